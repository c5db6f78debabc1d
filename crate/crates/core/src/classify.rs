//! Recurrence and absorption verdicts.
//!
//! Everything is decided by the quantity `t = Tr(L*L σ)`, the probability of a
//! left step from `σ`, evaluated at the invariant state of the auxiliary map or
//! at common eigenvectors of `L` and `R`. The walk drifts with speed
//! `μ = 1 - 2t`, so `t = 1/2` is the critical value.

use serde::Serialize;

use crate::aux_map::{
    aux_irreducibility_evidence, fixed_point_residual, invariant_states, oqw_irreducibility_search,
    InvariantStateReport,
};
use crate::coin::{common_eigenvectors, Coin, CommonEigReport, DensityMatrix, WordSearchOutcome};
use crate::error::{Error, Result};
use crate::linalg::{eigen_residual, norm, rayleigh, ComplexMatrix, C64};
use crate::Tolerances;

/// Word length used when the general criteria look for reducing lines.
pub const WORD_SEARCH_LEN: usize = 8;

/// Which criterion produced a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    /// `d = 2` with at most one common eigenvector: sign of `t` at the unique invariant state.
    TwoDimInvariantState,
    /// `d = 2` with an orthogonal common eigenbasis: `t` on each basis state.
    TwoDimCommonEigenbasis,
    /// Unique invariant state with `t ≠ 1/2`: nonzero drift.
    UniqueStateNonzeroDrift,
    /// Irreducible walk with `t = 1/2`: zero drift.
    IrreducibleZeroDrift,
    /// Unique invariant state with `t > 1/2`: drift towards the origin.
    UniqueStateDriftToOrigin,
    /// Irreducible walk: the sign of `t - 1/2` decides.
    IrreducibleDriftSign,
    /// Hypotheses of every criterion could not be established.
    InsufficientEvidence,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    Recurrent,
    Transient,
    /// Recurrent for every density except the pure state `sigma`.
    MixedTransientOnly { sigma: DensityMatrix, vector: Vec<C64> },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Recurrent => "Recurrent",
            Verdict::Transient => "Transient",
            Verdict::MixedTransientOnly { .. } => "MixedTransientOnly",
            Verdict::Inconclusive { .. } => "Inconclusive",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub basis_theorem: Basis,
    /// Some decisive `t` lies within `tol_half` of 1/2.
    pub near_critical: bool,
    /// The values `t` that decided the verdict.
    pub trace_values: Vec<f64>,
    /// `1 - 2t` for each trace value.
    pub drifts: Vec<f64>,
    pub invariant_state: Option<DensityMatrix>,
    /// Common eigenvectors of `L` and `R` used by the two-dimensional criterion.
    pub common_eigenvectors: Vec<Vec<C64>>,
    pub marginal_kernel: bool,
}

/// Absorption at the origin of the walk on `{0, 1, 2, ...}` started at `m ≥ 1`.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Absorption {
    /// Absorbed with probability 1 from every density and every `m`.
    Absorbing,
    NotAbsorbing,
    /// Only `sigma` (and no other density) is absorbed with certainty. For
    /// `ρ` written in the common eigenbasis `(u_sigma, u_other)`,
    /// `P(ρ) = ρ_sigma + ρ_other · ratio^m`.
    AbsorbingOnlyFor {
        sigma: DensityMatrix,
        vector: Vec<C64>,
        other: DensityMatrix,
        ratio: f64,
        formula: String,
    },
    Inconclusive { reason: String },
}

impl Absorption {
    pub fn name(&self) -> &'static str {
        match self {
            Absorption::Absorbing => "Absorbing",
            Absorption::NotAbsorbing => "NotAbsorbing",
            Absorption::AbsorbingOnlyFor { .. } => "AbsorbingOnlyFor",
            Absorption::Inconclusive { .. } => "Inconclusive",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AbsorptionVerdict {
    pub verdict: Absorption,
    pub basis_theorem: Basis,
    pub near_critical: bool,
    pub trace_values: Vec<f64>,
    pub invariant_state: Option<DensityMatrix>,
}

fn check_dim2(c: &Coin) -> Result<()> {
    if c.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: c.dim(),
        });
    }
    Ok(())
}

fn pure(v: &[C64]) -> DensityMatrix {
    DensityMatrix::pure(v).expect("common eigenvectors are unit vectors")
}

fn near_half(t: f64, tol_half: f64) -> bool {
    (t - 0.5).abs() <= tol_half
}

/// Trace values on the two basis states of an orthogonal common eigenbasis.
fn eigenbasis_traces(c: &Coin, ce: &CommonEigReport) -> [f64; 2] {
    [
        c.left_probability(pure(&ce.vectors[0]).matrix()),
        c.left_probability(pure(&ce.vectors[1]).matrix()),
    ]
}

fn inconclusive(reason: impl Into<String>, inv: Option<&InvariantStateReport>) -> Classification {
    Classification {
        verdict: Verdict::Inconclusive { reason: reason.into() },
        basis_theorem: Basis::InsufficientEvidence,
        near_critical: false,
        trace_values: vec![],
        drifts: vec![],
        invariant_state: None,
        common_eigenvectors: vec![],
        marginal_kernel: inv.is_some_and(|r| r.marginal),
    }
}

/// Complete recurrence criterion for two-dimensional coins.
pub fn classify_dim2(c: &Coin, tol_half: f64) -> Result<Classification> {
    check_dim2(c)?;
    let ce = common_eigenvectors(c)?;

    if ce.count == 2 {
        let t = eigenbasis_traces(c, &ce);
        let crit = [near_half(t[0], tol_half), near_half(t[1], tol_half)];
        let verdict = match crit {
            [true, true] => Verdict::Recurrent,
            [false, false] => Verdict::Transient,
            [a, _] => {
                let i = if a { 1 } else { 0 };
                Verdict::MixedTransientOnly {
                    sigma: pure(&ce.vectors[i]),
                    vector: ce.vectors[i].clone(),
                }
            }
        };
        return Ok(Classification {
            verdict,
            basis_theorem: Basis::TwoDimCommonEigenbasis,
            near_critical: crit[0] || crit[1],
            trace_values: t.to_vec(),
            drifts: t.iter().map(|x| 1.0 - 2.0 * x).collect(),
            invariant_state: None,
            common_eigenvectors: ce.vectors,
            marginal_kernel: false,
        });
    }

    let inv = invariant_states(c)?;
    let Some(rho) = inv.unique_state() else {
        return Ok(inconclusive(
            format!(
                "expected a unique invariant state with {} common eigenvector(s), kernel dimension {}{}",
                ce.count,
                inv.kernel_dim,
                if inv.marginal { " (marginal)" } else { "" }
            ),
            Some(&inv),
        ));
    };
    let t = c.left_probability(rho.matrix());
    let crit = near_half(t, tol_half);
    Ok(Classification {
        verdict: if crit { Verdict::Recurrent } else { Verdict::Transient },
        basis_theorem: Basis::TwoDimInvariantState,
        near_critical: crit,
        trace_values: vec![t],
        drifts: vec![1.0 - 2.0 * t],
        invariant_state: Some(rho.clone()),
        common_eigenvectors: ce.vectors,
        marginal_kernel: inv.marginal,
    })
}

/// Irreducibility evidence strong enough for the zero-drift criteria: the
/// auxiliary map is irreducible and no balanced word fixes a line.
fn irreducible_evidence(c: &Coin) -> Result<(bool, String)> {
    let aux = aux_irreducibility_evidence(c)?;
    if aux.aux_irreducible != Some(true) {
        return Ok((
            false,
            format!(
                "auxiliary map irreducibility not established ({})",
                aux.witness.unwrap_or_else(|| "no witness".into())
            ),
        ));
    }
    let search = oqw_irreducibility_search(c, WORD_SEARCH_LEN)?;
    match search.word_search.map(|w| w.outcome) {
        Some(WordSearchOutcome::NoObstruction) => Ok((true, String::new())),
        _ => Ok((
            false,
            format!(
                "balanced-word search found a candidate reducing line ({})",
                search.witness.unwrap_or_default()
            ),
        )),
    }
}

/// Criteria for coins of any dimension, valid under uniqueness or
/// irreducibility hypotheses.
pub fn classify_general(c: &Coin, tol_half: f64) -> Result<Classification> {
    let inv = invariant_states(c)?;
    let Some(rho) = inv.unique_state() else {
        return Ok(inconclusive(
            format!(
                "invariant state of the auxiliary map is not unique (kernel dimension {}{})",
                inv.kernel_dim,
                if inv.marginal { ", marginal" } else { "" }
            ),
            Some(&inv),
        ));
    };
    let t = c.left_probability(rho.matrix());
    let done = |verdict, basis| Classification {
        verdict,
        basis_theorem: basis,
        near_critical: near_half(t, tol_half),
        trace_values: vec![t],
        drifts: vec![1.0 - 2.0 * t],
        invariant_state: Some(rho.clone()),
        common_eigenvectors: vec![],
        marginal_kernel: inv.marginal,
    };
    if !near_half(t, tol_half) {
        return Ok(done(Verdict::Transient, Basis::UniqueStateNonzeroDrift));
    }
    let (irreducible, reason) = irreducible_evidence(c)?;
    if irreducible {
        return Ok(done(Verdict::Recurrent, Basis::IrreducibleZeroDrift));
    }
    let mut out = done(
        Verdict::Inconclusive {
            reason: format!("Tr(L*L rho) = 1/2 but {reason}"),
        },
        Basis::InsufficientEvidence,
    );
    out.near_critical = true;
    Ok(out)
}

/// Two-dimensional coins use the complete criterion, others the general one.
pub fn classify(c: &Coin, tol_half: f64) -> Result<Classification> {
    if c.dim() == 2 {
        classify_dim2(c, tol_half)
    } else {
        classify_general(c, tol_half)
    }
}

fn absorbs(t: f64, tol_half: f64) -> bool {
    t > 0.5 - tol_half
}

/// Absorption criterion for two-dimensional coins.
pub fn classify_absorption_dim2(c: &Coin, tol_half: f64) -> Result<AbsorptionVerdict> {
    check_dim2(c)?;
    let ce = common_eigenvectors(c)?;

    if ce.count == 2 {
        let t = eigenbasis_traces(c, &ce);
        let ok = [absorbs(t[0], tol_half), absorbs(t[1], tol_half)];
        let verdict = match ok {
            [true, true] => Absorption::Absorbing,
            [false, false] => Absorption::NotAbsorbing,
            [a, _] => {
                let (i, j) = if a { (0, 1) } else { (1, 0) };
                // Gambler's ruin on the line of u_j: left with probability t_j < 1/2.
                let ratio = t[j] / (1.0 - t[j]);
                Absorption::AbsorbingOnlyFor {
                    sigma: pure(&ce.vectors[i]),
                    vector: ce.vectors[i].clone(),
                    other: pure(&ce.vectors[j]),
                    ratio,
                    formula: format!("P(rho) = <u{i}|rho|u{i}> + <u{j}|rho|u{j}> * {ratio:.12}^m", i = i + 1, j = j + 1),
                }
            }
        };
        return Ok(AbsorptionVerdict {
            verdict,
            basis_theorem: Basis::TwoDimCommonEigenbasis,
            near_critical: near_half(t[0], tol_half) || near_half(t[1], tol_half),
            trace_values: t.to_vec(),
            invariant_state: None,
        });
    }

    let inv = invariant_states(c)?;
    let Some(rho) = inv.unique_state() else {
        return Ok(AbsorptionVerdict {
            verdict: Absorption::Inconclusive {
                reason: format!("invariant state not unique (kernel dimension {})", inv.kernel_dim),
            },
            basis_theorem: Basis::InsufficientEvidence,
            near_critical: false,
            trace_values: vec![],
            invariant_state: None,
        });
    };
    let t = c.left_probability(rho.matrix());
    Ok(AbsorptionVerdict {
        verdict: if absorbs(t, tol_half) {
            Absorption::Absorbing
        } else {
            Absorption::NotAbsorbing
        },
        basis_theorem: Basis::TwoDimInvariantState,
        near_critical: near_half(t, tol_half),
        trace_values: vec![t],
        invariant_state: Some(rho.clone()),
    })
}

/// Absorption criteria for coins of any dimension.
pub fn classify_absorption_general(c: &Coin, tol_half: f64) -> Result<AbsorptionVerdict> {
    let inv = invariant_states(c)?;
    let Some(rho) = inv.unique_state() else {
        return Ok(AbsorptionVerdict {
            verdict: Absorption::Inconclusive {
                reason: format!("invariant state not unique (kernel dimension {})", inv.kernel_dim),
            },
            basis_theorem: Basis::InsufficientEvidence,
            near_critical: false,
            trace_values: vec![],
            invariant_state: None,
        });
    };
    let t = c.left_probability(rho.matrix());
    let out = |verdict, basis| AbsorptionVerdict {
        verdict,
        basis_theorem: basis,
        near_critical: near_half(t, tol_half),
        trace_values: vec![t],
        invariant_state: Some(rho.clone()),
    };
    if t > 0.5 + tol_half {
        return Ok(out(Absorption::Absorbing, Basis::UniqueStateDriftToOrigin));
    }
    let (irreducible, reason) = irreducible_evidence(c)?;
    if !irreducible {
        return Ok(out(
            Absorption::Inconclusive {
                reason: format!("Tr(L*L rho) <= 1/2 and {reason}"),
            },
            Basis::InsufficientEvidence,
        ));
    }
    Ok(out(
        if absorbs(t, tol_half) {
            Absorption::Absorbing
        } else {
            Absorption::NotAbsorbing
        },
        Basis::IrreducibleDriftSign,
    ))
}

pub fn classify_absorption(c: &Coin, tol_half: f64) -> Result<AbsorptionVerdict> {
    if c.dim() == 2 {
        classify_absorption_dim2(c, tol_half)
    } else {
        classify_absorption_general(c, tol_half)
    }
}

/// `μ = 1 - 2 Tr(L*L ρ∞)` for an invariant state `ρ∞`.
pub fn drift(c: &Coin, rho_inf: &DensityMatrix) -> Result<f64> {
    let residual = fixed_point_residual(c, rho_inf.matrix());
    if residual > 1e-8 {
        return Err(Error::NotInvariant { residual });
    }
    let rho = rho_inf.matrix();
    let mu = 1.0 - 2.0 * c.left_probability(rho);
    let direct = ComplexMatrix::sandwich(c.right(), rho).trace().re - ComplexMatrix::sandwich(c.left(), rho).trace().re;
    if (mu - direct).abs() > 1e-10 {
        return Err(Error::InvalidMatrix(format!(
            "drift mismatch: 1 - 2t = {mu}, Tr(RρR*) - Tr(LρL*) = {direct}"
        )));
    }
    Ok(mu)
}

/// Left-step probability `p = |δ|²` along a common eigenvector `v` (`Lv = δv`);
/// the walk restricted to `v` is the classical walk with that bias.
pub fn classical_reduction_check(c: &Coin, v: &[C64]) -> Result<f64> {
    let tol = Tolerances::default();
    if v.len() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: c.dim(),
            found: v.len(),
        });
    }
    let n = norm(v);
    if n == 0.0 {
        return Err(Error::NotCommonEigenvector { residual: f64::INFINITY });
    }
    let u: Vec<C64> = v.iter().map(|z| z / n).collect();
    let delta = rayleigh(c.left(), &u);
    let lambda = rayleigh(c.right(), &u);
    let residual = eigen_residual(c.left(), delta, &u).max(eigen_residual(c.right(), lambda, &u));
    if residual > tol.eigen_match {
        return Err(Error::NotCommonEigenvector { residual });
    }
    let p = delta.norm_sqr();
    let sum = p + lambda.norm_sqr();
    if (sum - 1.0).abs() > 1e-10 {
        return Err(Error::NotTracePreserving { residual: (sum - 1.0).abs() });
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    const TOL: f64 = 1e-9;

    fn e(k: usize) -> Vec<C64> {
        crate::linalg::basis_vector(2, k)
    }

    #[test]
    fn diagonal_coin_is_transient() {
        let c = classify_dim2(&fixtures::pq_diagonal(), TOL).unwrap();
        assert!(matches!(c.verdict, Verdict::Transient));
        assert_eq!(c.basis_theorem, Basis::TwoDimCommonEigenbasis);
        let mut t = c.trace_values.clone();
        t.sort_by(f64::total_cmp);
        assert!((t[0] - 1.0 / 3.0).abs() < 1e-14 && (t[1] - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn mixed_coin_excepts_e1() {
        let c = classify_dim2(&fixtures::pq_mixed(), TOL).unwrap();
        match c.verdict {
            Verdict::MixedTransientOnly { vector, .. } => {
                assert!(crate::linalg::inner(&vector, &e(0)).norm() > 1.0 - 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(c.near_critical);
    }

    #[test]
    fn triangular_coin_is_recurrent() {
        let c = classify_dim2(&fixtures::triangular(), TOL).unwrap();
        assert!(matches!(c.verdict, Verdict::Recurrent));
        assert!((c.trace_values[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn antidiagonal_coin_is_transient() {
        let c = classify_dim2(&fixtures::pq_antidiagonal(), TOL).unwrap();
        assert!(matches!(c.verdict, Verdict::Transient));
        assert!((c.trace_values[0] - 5.0 / 9.0).abs() < 1e-12);
        assert!(!c.near_critical);
    }

    #[test]
    fn common_e1_family_is_recurrent() {
        for x in [0.05, 0.1, 0.3, 0.45] {
            let c = classify_dim2(&fixtures::common_e1_family(x), TOL).unwrap();
            assert!(matches!(c.verdict, Verdict::Recurrent), "x = {x}");
        }
    }

    #[test]
    fn general_criteria() {
        let c = classify_general(&fixtures::qutrit(), TOL).unwrap();
        assert!(matches!(c.verdict, Verdict::Transient));
        assert!((c.trace_values[0] - 0.717825).abs() < 1e-5);

        let us = fixtures::unitary_sum(C64::new(0.6, 0.0), C64::new(0.8, 0.0)).unwrap();
        assert!(matches!(classify_general(&us, TOL).unwrap().verdict, Verdict::Recurrent));

        let fair = Coin::classical(0.5).unwrap();
        let c = classify_general(&fair, TOL).unwrap();
        assert!(matches!(c.verdict, Verdict::Recurrent));
        assert_eq!(c.basis_theorem, Basis::IrreducibleZeroDrift);
    }

    #[test]
    fn general_zero_drift_without_irreducibility_is_inconclusive() {
        let c = classify_general(&fixtures::common_e1_family(0.3), TOL).unwrap();
        assert!(matches!(c.verdict, Verdict::Inconclusive { .. }));
    }

    #[test]
    fn dim2_absorption() {
        match classify_absorption_dim2(&fixtures::pq_mixed(), TOL).unwrap().verdict {
            Absorption::AbsorbingOnlyFor { vector, ratio, .. } => {
                assert!(crate::linalg::inner(&vector, &e(1)).norm() > 1.0 - 1e-12);
                assert!((ratio - 0.5).abs() < 1e-14);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            classify_absorption_dim2(&fixtures::pq_antidiagonal(), TOL).unwrap().verdict,
            Absorption::Absorbing
        ));
        let fair = ComplexMatrix::identity(2).scale_real(0.5f64.sqrt());
        let fair = Coin::new(fair.clone(), fair).unwrap();
        assert!(matches!(classify_absorption_dim2(&fair, TOL).unwrap().verdict, Absorption::Absorbing));
        assert!(matches!(
            classify_absorption_dim2(&fixtures::pq_diagonal(), TOL).unwrap().verdict,
            Absorption::AbsorbingOnlyFor { .. }
        ));
    }

    #[test]
    fn general_absorption() {
        for c in [fixtures::unbalanced(), fixtures::qutrit(), fixtures::triangular()] {
            assert!(matches!(
                classify_absorption_general(&c, TOL).unwrap().verdict,
                Absorption::Absorbing
            ));
        }
        let v = classify_absorption_general(&fixtures::triangular(), TOL).unwrap();
        assert_eq!(v.basis_theorem, Basis::IrreducibleDriftSign);
    }

    #[test]
    fn drift_values() {
        let inv = |c: &Coin| invariant_states(c).unwrap().states[0].clone();
        let c = fixtures::pq_antidiagonal();
        assert!((drift(&c, &inv(&c)).unwrap() + 1.0 / 9.0).abs() < 1e-12);
        let c = fixtures::triangular();
        assert!(drift(&c, &inv(&c)).unwrap().abs() < 1e-12);
        let c = fixtures::unbalanced();
        let expected = -9.0 / 20.0 - 6f64.sqrt() / 5.0;
        assert!((drift(&c, &inv(&c)).unwrap() - expected).abs() < 1e-10);
        let not_inv = DensityMatrix::pure(&e(0)).unwrap();
        assert!(matches!(drift(&c, &not_inv), Err(Error::NotInvariant { .. })));
    }

    #[test]
    fn classical_reduction() {
        assert!((classical_reduction_check(&fixtures::pq_diagonal(), &e(0)).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!((classical_reduction_check(&fixtures::common_e1_family(0.3), &e(0)).unwrap() - 0.5).abs() < 1e-14);
        let fair = Coin::classical(0.5).unwrap();
        assert!((classical_reduction_check(&fair, &[C64::new(1.0, 0.0)]).unwrap() - 0.5).abs() < 1e-14);
        assert!(matches!(
            classical_reduction_check(&fixtures::triangular(), &e(1)),
            Err(Error::NotCommonEigenvector { .. })
        ));
    }
}
