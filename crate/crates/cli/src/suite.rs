//! The reference-example suite: every bundled coin against its known verdicts
//! and closed-form values.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use oqw_core::aux_map::invariant_states;
use oqw_core::classify::{classify, classify_absorption, classify_dim2, Absorption, Verdict};
use oqw_core::coin::{validate_coin, Coin};
use oqw_core::fixtures;
use oqw_core::io::parse_coin_matrices;
use oqw_core::linalg::{basis_vector, inner, ComplexMatrix, C64};
use oqw_core::Error;

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub tol_half: f64,
    pub coin_tol: f64,
    /// Multiplies `L` of the named bundled coin before validation.
    pub scale_left: BTreeMap<String, f64>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            tol_half: 1e-9,
            coin_tol: 1e-10,
            scale_left: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Mismatch,
    InvalidCoin,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub coin: String,
    pub check: String,
    pub expected: String,
    pub observed: String,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == CheckStatus::Pass)
    }

    pub fn invalid_coins(&self) -> usize {
        self.checks.iter().filter(|c| c.status == CheckStatus::InvalidCoin).count()
    }

    pub fn mismatches(&self) -> usize {
        self.checks.iter().filter(|c| c.status == CheckStatus::Mismatch).count()
    }

    /// Fixed-width text table, one line per check.
    pub fn table(&self) -> String {
        let w = self.checks.iter().map(|c| c.coin.len()).max().unwrap_or(4).max(4);
        let wc = self.checks.iter().map(|c| c.check.len()).max().unwrap_or(5).max(5);
        let mut out = format!("{:<6} {:<w$} {:<wc$} {} | {}\n", "status", "coin", "check", "expected", "observed");
        for c in &self.checks {
            let status = match c.status {
                CheckStatus::Pass => "ok",
                CheckStatus::Mismatch => "FAIL",
                CheckStatus::InvalidCoin => "INVAL",
            };
            out.push_str(&format!(
                "{status:<6} {:<w$} {:<wc$} {} | {}\n",
                c.coin, c.check, c.expected, c.observed
            ));
        }
        out
    }
}

struct Ctx<'a> {
    coin: &'a str,
    checks: Vec<Check>,
}

impl Ctx<'_> {
    fn push(&mut self, check: &str, expected: impl Into<String>, observed: impl Into<String>, ok: bool) {
        self.checks.push(Check {
            coin: self.coin.to_string(),
            check: check.to_string(),
            expected: expected.into(),
            observed: observed.into(),
            status: if ok { CheckStatus::Pass } else { CheckStatus::Mismatch },
        });
    }

    fn close(&mut self, check: &str, expected: f64, observed: f64, tol: f64) {
        let ok = (expected - observed).abs() <= tol;
        self.push(check, format!("{expected:.12} ± {tol:.0e}"), format!("{observed:.12}"), ok);
    }

    fn matrix(&mut self, check: &str, expected: &ComplexMatrix, observed: Option<&ComplexMatrix>, tol: f64) {
        match observed {
            Some(m) => {
                let diff = m.max_diff(expected);
                self.push(check, format!("max diff <= {tol:.0e}"), format!("max diff {diff:.3e}"), diff <= tol);
            }
            None => self.push(check, format!("max diff <= {tol:.0e}"), "no unique invariant state", false),
        }
    }

    fn error(&mut self, check: &str, e: &Error) {
        self.push(check, "a result", format!("error: {e}"), false);
    }
}

fn line_is(v: &[C64], k: usize) -> bool {
    inner(v, &basis_vector(v.len(), k)).norm() > 1.0 - 1e-9
}

fn real(rows: &[&[f64]]) -> ComplexMatrix {
    ComplexMatrix::from_real_rows(rows).expect("finite entries")
}

/// What each coin is expected to satisfy.
#[derive(Clone, Copy)]
enum Expect {
    PqDiagonal,
    PqAntidiagonal,
    PqMixed,
    UnitarySum,
    Unbalanced,
    Triangular,
    CommonE1,
    Qutrit,
}

fn recurrence_name(v: &Verdict) -> String {
    match v {
        Verdict::MixedTransientOnly { vector, .. } => {
            let which = if line_is(vector, 0) {
                "e1"
            } else if line_is(vector, 1) {
                "e2"
            } else {
                "other"
            };
            format!("MixedTransientOnly({which})")
        }
        Verdict::Inconclusive { reason } => format!("Inconclusive ({reason})"),
        other => other.name().to_string(),
    }
}

fn absorption_name(v: &Absorption) -> String {
    match v {
        Absorption::AbsorbingOnlyFor { vector, .. } => {
            let which = if line_is(vector, 0) {
                "e1"
            } else if line_is(vector, 1) {
                "e2"
            } else {
                "other"
            };
            format!("AbsorbingOnlyFor({which})")
        }
        Absorption::Inconclusive { reason } => format!("Inconclusive ({reason})"),
        other => other.name().to_string(),
    }
}

fn check_coin(name: &str, coin: &Coin, expect: Expect, opts: &SuiteOptions) -> Vec<Check> {
    let mut cx = Ctx {
        coin: name,
        checks: Vec::new(),
    };
    let tol = opts.tol_half;
    let rec = match classify(coin, tol) {
        Ok(r) => r,
        Err(e) => {
            cx.error("classify", &e);
            return cx.checks;
        }
    };
    let abs = classify_absorption(coin, tol);
    let inv = invariant_states(coin);
    let rho = inv.as_ref().ok().and_then(|r| r.unique_state()).map(|s| s.matrix().clone());
    let rec_name = recurrence_name(&rec.verdict);
    let abs_name = abs.as_ref().map(|a| absorption_name(&a.verdict));
    let t = rec.trace_values.first().copied().unwrap_or(f64::NAN);
    let half = ComplexMatrix::identity(2).scale_real(0.5);

    let want_rec = |cx: &mut Ctx, expected: &str| cx.push("recurrence", expected, rec_name.clone(), rec_name == expected);
    let want_abs = |cx: &mut Ctx, expected: &str| match &abs_name {
        Ok(n) => cx.push("absorption", expected, n.clone(), n == expected),
        Err(e) => cx.error("absorption", e),
    };

    match expect {
        Expect::PqDiagonal => {
            want_rec(&mut cx, "Transient");
            let mut ts = rec.trace_values.clone();
            ts.sort_by(f64::total_cmp);
            if ts.len() == 2 {
                cx.close("Tr(L*L |e1><e1|)", 1.0 / 3.0, ts[0], 1e-10);
                cx.close("Tr(L*L |e2><e2|)", 2.0 / 3.0, ts[1], 1e-10);
            } else {
                cx.push("common eigenbasis", "2 trace values", format!("{}", ts.len()), false);
            }
        }
        Expect::PqAntidiagonal => {
            want_rec(&mut cx, "Transient");
            want_abs(&mut cx, "Absorbing");
            cx.matrix("rho_inf = diag(1,2)/3", &real(&[&[1.0 / 3.0, 0.0], &[0.0, 2.0 / 3.0]]), rho.as_ref(), 1e-10);
            cx.close("Tr(L*L rho_inf)", 5.0 / 9.0, t, 1e-10);
        }
        Expect::PqMixed => {
            want_rec(&mut cx, "MixedTransientOnly(e1)");
            want_abs(&mut cx, "AbsorbingOnlyFor(e2)");
        }
        Expect::UnitarySum => {
            want_rec(&mut cx, "Recurrent");
            cx.matrix("rho_inf = I/2", &half, rho.as_ref(), 1e-8);
            cx.close("Tr(L*L rho_inf)", 0.5, t, 1e-10);
        }
        Expect::Unbalanced => {
            want_rec(&mut cx, "Transient");
            want_abs(&mut cx, "Absorbing");
            let o = (6.0 + 6f64.sqrt()) / 20.0;
            cx.matrix("rho_inf = [[15,6+√6],[6+√6,5]]/20", &real(&[&[0.75, o], &[o, 0.25]]), rho.as_ref(), 1e-8);
            cx.close("Tr(L*L rho_inf)", 29.0 / 40.0 + 6f64.sqrt() / 10.0, t, 1e-10);
        }
        Expect::Triangular => {
            want_rec(&mut cx, "Recurrent");
            want_abs(&mut cx, "Absorbing");
            cx.matrix("rho_inf = I/2", &half, rho.as_ref(), 1e-8);
            cx.close("Tr(L*L rho_inf)", 0.5, t, 1e-10);
        }
        Expect::CommonE1 => {
            want_rec(&mut cx, "Recurrent");
            match &inv {
                Ok(r) => cx.push(
                    "unique non-faithful invariant state",
                    "unique, not faithful",
                    format!("unique={}, faithful={}", r.unique, r.faithful),
                    r.unique && !r.faithful,
                ),
                Err(e) => cx.error("invariant state", e),
            }
            cx.matrix("rho_inf = |e1><e1|", &real(&[&[1.0, 0.0], &[0.0, 0.0]]), rho.as_ref(), 1e-8);
        }
        Expect::Qutrit => {
            want_rec(&mut cx, "Transient");
            want_abs(&mut cx, "Absorbing");
            cx.close("Tr(L*L rho_inf)", 0.717825, t, 1e-5);
        }
    }

    // The complete two-dimensional criterion must agree with the dispatcher.
    if coin.dim() == 2 {
        if let Ok(c2) = classify_dim2(coin, tol) {
            let n = recurrence_name(&c2.verdict);
            if n != rec_name {
                cx.push("dim-2 criterion agrees", rec_name.clone(), n, false);
            }
        }
    }
    cx.checks
}

fn expectations() -> Vec<(String, &'static str, Option<f64>, Expect)> {
    vec![
        ("pq-diagonal".into(), "pq-diagonal", None, Expect::PqDiagonal),
        ("pq-antidiagonal".into(), "pq-antidiagonal", None, Expect::PqAntidiagonal),
        ("pq-mixed".into(), "pq-mixed", None, Expect::PqMixed),
        ("unbalanced".into(), "unbalanced", None, Expect::Unbalanced),
        ("triangular".into(), "triangular", None, Expect::Triangular),
        ("qutrit".into(), "qutrit", None, Expect::Qutrit),
        ("common-e1(x=0.1)".into(), "common-e1", Some(0.1), Expect::CommonE1),
        ("common-e1(x=0.3)".into(), "common-e1", Some(0.3), Expect::CommonE1),
        ("common-e1(x=0.45)".into(), "common-e1", Some(0.45), Expect::CommonE1),
    ]
}

/// Loads the bundled matrices for `source`, applies any `L` scaling, validates.
fn load(name: &str, source: &str, param: Option<f64>, opts: &SuiteOptions) -> Result<Coin, String> {
    let (l, r) = match param {
        None => parse_coin_matrices(fixtures::coin_text(source).expect("bundled coin")),
        Some(x) => fixtures::family(source).expect("bundled family").matrices_at(x),
    }
    .map_err(|e| e.to_string())?;
    let factor = opts.scale_left.get(name).or_else(|| opts.scale_left.get(source)).copied();
    let l = match factor {
        Some(f) => l.scale_real(f),
        None => l,
    };
    validate_coin(l, r, opts.coin_tol).map_err(|e| e.to_string())
}

/// Names accepted by `scale_left`.
pub fn coin_names() -> Vec<String> {
    let mut names: Vec<String> = expectations().into_iter().flat_map(|(n, s, _, _)| [n, s.to_string()]).collect();
    names.push("unitary-sum".into());
    names.sort();
    names.dedup();
    names
}

/// Runs the whole suite; coins are checked concurrently and reported in a fixed order.
pub fn run_suite(opts: &SuiteOptions) -> SuiteReport {
    let mut jobs: Vec<(String, Result<Coin, String>, Expect)> = expectations()
        .into_iter()
        .map(|(name, source, param, expect)| {
            let coin = load(&name, source, param, opts);
            (name, coin, expect)
        })
        .collect();
    let us_factor = opts.scale_left.get("unitary-sum").copied();
    let samples = fixtures::unitary_sum_samples().into_iter().map(|(name, coin)| {
        let coin = match us_factor {
            Some(f) => validate_coin(coin.left().scale_real(f), coin.right().clone(), opts.coin_tol).map_err(|e| e.to_string()),
            None => Ok(coin),
        };
        (name, coin, Expect::UnitarySum)
    });
    jobs.splice(3..3, samples);

    let checks = jobs
        .par_iter()
        .map(|(name, coin, expect)| match coin {
            Ok(c) => check_coin(name, c, *expect, opts),
            Err(msg) => vec![Check {
                coin: name.clone(),
                check: "coin validation".into(),
                expected: "L*L + R*R = I".into(),
                observed: msg.clone(),
                status: CheckStatus::InvalidCoin,
            }],
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    SuiteReport { checks }
}
