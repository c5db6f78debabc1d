//! `oqw` command-line workbench: validation, classification, invariant states,
//! exact series, Monte Carlo simulation, the reference suite and parameter sweeps.

pub mod suite;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use oqw_core::aux_map::{aux_irreducibility_evidence, invariant_states, oqw_irreducibility_search, states_json};
use oqw_core::classify::{classify, classify_absorption, drift, Absorption, Verdict, WORD_SEARCH_LEN};
use oqw_core::coin::{common_eigenvectors, validate_coin, walk_reducibility_dim2, Coin, DensityMatrix};
use oqw_core::dynamics::{absorption_series, first_return_series, return_series};
use oqw_core::io::{parse_coin_matrices, parse_density, parse_family, parse_operator, CoinFamily, ParamPosition};
use oqw_core::linalg::ComplexMatrix;
use oqw_core::montecarlo::{simulate, Experiment, SimConfig};
use oqw_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INVALID_COIN: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "oqw", version, about = "Open quantum random walks on the line: classification, exact series and simulation")]
pub struct Cli {
    /// Tolerance on |L*L + R*R - I|.
    #[arg(long, global = true, env = "OQW_COIN_TOL", default_value_t = 1e-10)]
    pub coin_tol: f64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that a coin file satisfies L*L + R*R = I.
    Validate {
        coin: PathBuf,
        #[command(flatten)]
        param: ParamArg,
    },
    /// Recurrence or absorption verdict as JSON. Exit 3 when inconclusive.
    Classify {
        coin: PathBuf,
        #[arg(long, env = "OQW_TOL_HALF", default_value_t = 1e-9)]
        tol_half: f64,
        #[arg(long, value_enum, default_value_t = ClassifyMode::Recurrence)]
        mode: ClassifyMode,
        #[command(flatten)]
        param: ParamArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Invariant states of the auxiliary map and irreducibility evidence.
    Invariant {
        coin: PathBuf,
        #[command(flatten)]
        param: ParamArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact return, first-return or absorption series as CSV.
    Series {
        coin: PathBuf,
        /// Density file; defaults to the maximally mixed state.
        #[arg(long, conflicts_with = "operator")]
        rho: Option<PathBuf>,
        /// Like --rho but accepts any Hermitian operator.
        #[arg(long)]
        operator: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        nmax: usize,
        #[arg(long, value_enum, default_value_t = SeriesKind::Return)]
        mode: SeriesKind,
        /// Start site for absorption.
        #[arg(long, default_value_t = 1)]
        start: i64,
        #[command(flatten)]
        param: ParamArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimates over quantum trajectories as JSON.
    Simulate {
        coin: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trajectories: usize,
        #[arg(long, default_value_t = 10_000)]
        horizon: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = QuantityKind::Drift)]
        quantity: QuantityKind,
        #[arg(long, default_value_t = 1)]
        start: i64,
        /// Initial density file; defaults to the maximally mixed state.
        #[arg(long)]
        rho: Option<PathBuf>,
        /// Worker threads; defaults to all cores.
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        param: ParamArg,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-trajectory summary CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the bundled reference examples. Exit 4 on any mismatch.
    Reproduce {
        #[arg(long, value_enum, default_value_t = SuiteName::ReferenceExamples)]
        suite: SuiteName,
        #[arg(long, env = "OQW_TOL_HALF", default_value_t = 1e-9)]
        tol_half: f64,
        /// Multiply L of a bundled coin, as `name=factor` (repeatable).
        #[arg(long, value_parser = parse_key_f64)]
        scale_left: Vec<(String, f64)>,
        /// Print the report as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Classify a coin family over a parameter range as CSV.
    Sweep {
        family: PathBuf,
        /// Parameter name; must match the family file.
        #[arg(long)]
        param: Option<String>,
        /// `a:b:step`, inclusive of `b`.
        #[arg(long)]
        range: String,
        #[arg(long, env = "OQW_TOL_HALF", default_value_t = 1e-9)]
        tol_half: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, clap::Args)]
pub struct ParamArg {
    /// Parameter value for family files, as `name=value`.
    #[arg(long = "param", value_parser = parse_key_f64)]
    pub param: Option<(String, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassifyMode {
    Recurrence,
    Absorption,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeriesKind {
    Return,
    FirstReturn,
    Absorb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QuantityKind {
    Drift,
    Return,
    Absorb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteName {
    ReferenceExamples,
}

fn parse_key_f64(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{v}` is not finite"));
    }
    Ok((k.trim().to_string(), v))
}

/// Provenance echoed into every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub coin_path: String,
    pub parameters: BTreeMap<String, String>,
    pub tool_version: String,
    pub seed: Option<u64>,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, coin_path: Option<&Path>) -> Self {
        Self {
            command: command.to_string(),
            coin_path: coin_path.map(|p| p.display().to_string()).unwrap_or_default(),
            parameters: BTreeMap::new(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: None,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    /// Single-line JSON, used as a CSV comment.
    pub fn comment(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }
}

/// A failure carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotTracePreserving { .. } => EXIT_INVALID_COIN,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write_output(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::input(format!("{}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(|e| Failure::input(e.to_string())),
    }
}

fn with_path(path: &Path, e: Error) -> Failure {
    let mut f = Failure::from(e);
    f.message = format!("{}: {}", path.display(), f.message);
    f
}

/// Loads a coin file, or a family file instantiated at `--param name=value`.
fn load_coin(path: &Path, param: &ParamArg, tol: f64) -> Result<(Coin, Option<ParamPosition>), Failure> {
    let text = read(path)?;
    let (l, r, pos) = match &param.param {
        None => {
            let (l, r) = parse_coin_matrices(&text).map_err(|e| with_path(path, e))?;
            (l, r, None)
        }
        Some((name, value)) => {
            let fam = parse_family(&text).map_err(|e| with_path(path, e))?;
            if &fam.param != name {
                return Err(Failure::input(format!(
                    "family parameter is `{}`, not `{name}`",
                    fam.param
                )));
            }
            let (l, r) = fam.matrices_at(*value).map_err(|e| with_path(path, e))?;
            (l, r, Some(fam.position(*value)))
        }
    };
    let coin = validate_coin(l, r, tol).map_err(|e| with_path(path, e))?;
    Ok((coin, pos))
}

fn manifest_with_param(m: RunManifest, param: &ParamArg) -> RunManifest {
    match &param.param {
        Some((k, v)) => m.param(k, v),
        None => m,
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

/// Parses the arguments and runs one command. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let tol = cli.coin_tol;
    match &cli.command {
        Command::Validate { coin, param } => cmd_validate(coin, param, tol, out),
        Command::Classify {
            coin,
            tol_half,
            mode,
            param,
            out: path,
        } => cmd_classify(coin, param, tol, *tol_half, *mode, path.as_deref(), out, err),
        Command::Invariant { coin, param, out: path } => cmd_invariant(coin, param, tol, path.as_deref(), out),
        Command::Series {
            coin,
            rho,
            operator,
            nmax,
            mode,
            start,
            param,
            out: path,
        } => {
            let (c, _) = load_coin(coin, param, tol)?;
            let (x, state_path) = match (rho, operator) {
                (Some(p), _) => (parse_density(&read(p)?).map_err(|e| with_path(p, e))?.into_matrix(), p.display().to_string()),
                (None, Some(p)) => (parse_operator(&read(p)?).map_err(|e| with_path(p, e))?, p.display().to_string()),
                (None, None) => (DensityMatrix::maximally_mixed(c.dim()).into_matrix(), "I/d".to_string()),
            };
            check_dim(&c, &x)?;
            let series = match mode {
                SeriesKind::Return => return_series(&c, &x, *nmax)?,
                SeriesKind::FirstReturn => first_return_series(&c, &x, *nmax)?,
                SeriesKind::Absorb => absorption_series(&c, &x, *start, *nmax)?,
            };
            let mut m = manifest_with_param(RunManifest::new("series", Some(coin)), param)
                .param("state", state_path)
                .param("nmax", nmax)
                .param("mode", format!("{mode:?}").to_lowercase());
            if *mode == SeriesKind::Absorb {
                m = m.param("start", start);
            }
            write_output(out, path.as_deref(), &series.to_csv(Some(&m.comment())))?;
            Ok(EXIT_OK)
        }
        Command::Simulate {
            coin,
            trajectories,
            horizon,
            seed,
            quantity,
            start,
            rho,
            workers,
            param,
            out: path,
            csv,
        } => {
            let (c, _) = load_coin(coin, param, tol)?;
            let init = match rho {
                Some(p) => parse_density(&read(p)?).map_err(|e| with_path(p, e))?,
                None => DensityMatrix::maximally_mixed(c.dim()),
            };
            let mut cfg = SimConfig::new(*seed, *trajectories, *horizon, init);
            cfg.workers = *workers;
            let exp = match quantity {
                QuantityKind::Drift => Experiment::Drift,
                QuantityKind::Return => Experiment::Return,
                QuantityKind::Absorb => {
                    cfg.start = *start;
                    Experiment::Absorption { start: *start }
                }
            };
            let outcome = simulate(&c, &cfg, exp)?;
            let mut m = manifest_with_param(RunManifest::new("simulate", Some(coin)), param)
                .param("trajectories", trajectories)
                .param("horizon", horizon)
                .param("quantity", format!("{quantity:?}").to_lowercase())
                .param("state", rho.as_ref().map_or("I/d".to_string(), |p| p.display().to_string()));
            if let Some(w) = workers {
                m = m.param("workers", w);
            }
            if *quantity == QuantityKind::Absorb {
                m = m.param("start", start);
            }
            m.seed = Some(*seed);
            if let Some(p) = csv {
                write_output(out, Some(p), &outcome.trajectories_csv(Some(&m.comment())))?;
            }
            let v = json!({ "manifest": m, "experiment": exp, "estimates": outcome.estimates });
            write_output(out, path.as_deref(), &pretty(&v))?;
            Ok(EXIT_OK)
        }
        Command::Reproduce {
            suite: _,
            tol_half,
            scale_left,
            json: as_json,
        } => {
            let known = suite::coin_names();
            for (name, _) in scale_left {
                if !known.contains(name) {
                    return Err(Failure::input(format!(
                        "unknown coin `{name}` for --scale-left; expected one of {}",
                        known.join(", ")
                    )));
                }
            }
            let opts = suite::SuiteOptions {
                tol_half: *tol_half,
                coin_tol: tol,
                scale_left: scale_left.iter().cloned().collect(),
            };
            let rep = suite::run_suite(&opts);
            let mut m = RunManifest::new("reproduce", None).param("suite", "reference-examples").param("tol_half", tol_half);
            for (k, v) in scale_left {
                m = m.param(&format!("scale_left.{k}"), v);
            }
            if *as_json {
                write_output(out, None, &pretty(&json!({ "manifest": m, "report": rep })))?;
            } else {
                write_output(out, None, &format!("# {}\n{}", m.comment(), rep.table()))?;
            }
            let code = if rep.passed() {
                EXIT_OK
            } else {
                let _ = writeln!(
                    err,
                    "{} mismatches, {} invalid coins",
                    rep.mismatches(),
                    rep.invalid_coins()
                );
                EXIT_MISMATCH
            };
            Ok(code)
        }
        Command::Sweep {
            family,
            param,
            range,
            tol_half,
            out: path,
        } => cmd_sweep(family, param.as_deref(), range, tol, *tol_half, path.as_deref(), out, err),
    }
}

fn check_dim(c: &Coin, x: &ComplexMatrix) -> Result<(), Failure> {
    if x.dim() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: c.dim(),
            found: x.dim(),
        }
        .into());
    }
    Ok(())
}

fn cmd_validate(path: &Path, param: &ParamArg, tol: f64, out: &mut dyn Write) -> Result<i32, Failure> {
    let text = read(path)?;
    let (l, r) = match &param.param {
        None => parse_coin_matrices(&text),
        Some((_, v)) => parse_family(&text).and_then(|f| f.matrices_at(*v)),
    }
    .map_err(|e| with_path(path, e))?;
    let m = manifest_with_param(RunManifest::new("validate", Some(path)), param).param("coin_tol", tol);
    let dim = l.dim();
    let (valid, residual, code) = match validate_coin(l, r, tol) {
        Ok(c) => (true, c.residual(), EXIT_OK),
        Err(Error::NotTracePreserving { residual }) => (false, residual, EXIT_INVALID_COIN),
        Err(e) => return Err(with_path(path, e)),
    };
    let v = json!({ "manifest": m, "valid": valid, "dim": dim, "residual": residual });
    write_output(out, None, &pretty(&v))?;
    Ok(code)
}

#[allow(clippy::too_many_arguments)]
fn cmd_classify(
    path: &Path,
    param: &ParamArg,
    tol: f64,
    tol_half: f64,
    mode: ClassifyMode,
    out_path: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    let (c, pos) = load_coin(path, param, tol)?;
    let m = manifest_with_param(RunManifest::new("classify", Some(path)), param)
        .param("tol_half", tol_half)
        .param("mode", format!("{mode:?}").to_lowercase());
    let mut v = json!({ "manifest": m, "dim": c.dim(), "residual": c.residual() });
    if let Some(p) = pos {
        v["param_position"] = serde_json::to_value(p).expect("serializes");
    }
    let mut reasons = Vec::new();
    if mode != ClassifyMode::Absorption {
        let rec = classify(&c, tol_half)?;
        if let Verdict::Inconclusive { reason } = &rec.verdict {
            reasons.push(format!("recurrence: {reason}"));
        }
        v["recurrence"] = serde_json::to_value(&rec).expect("serializes");
    }
    if mode != ClassifyMode::Recurrence {
        let abs = classify_absorption(&c, tol_half)?;
        if let Absorption::Inconclusive { reason } = &abs.verdict {
            reasons.push(format!("absorption: {reason}"));
        }
        v["absorption"] = serde_json::to_value(&abs).expect("serializes");
    }
    write_output(out, out_path, &pretty(&v))?;
    if reasons.is_empty() {
        Ok(EXIT_OK)
    } else {
        for r in reasons {
            let _ = writeln!(err, "inconclusive: {r}");
        }
        Ok(EXIT_INCONCLUSIVE)
    }
}

fn cmd_invariant(path: &Path, param: &ParamArg, tol: f64, out_path: Option<&Path>, out: &mut dyn Write) -> Result<i32, Failure> {
    let (c, _) = load_coin(path, param, tol)?;
    let m = manifest_with_param(RunManifest::new("invariant", Some(path)), param);
    let inv = invariant_states(&c)?;
    let drift_value = match inv.unique_state() {
        Some(s) => Some(drift(&c, s)?),
        None => None,
    };
    let mut v = json!({
        "manifest": m,
        "kernel_dim": inv.kernel_dim,
        "unique": inv.unique,
        "faithful": inv.faithful,
        "min_eigenvalue": inv.min_eigenvalue,
        "marginal": inv.marginal,
        "states": states_json(&inv),
        "drift": drift_value,
        "common_eigenvectors": common_eigenvectors(&c)?,
        "aux_irreducibility": aux_irreducibility_evidence(&c)?,
        "word_search": oqw_irreducibility_search(&c, WORD_SEARCH_LEN)?,
    });
    if c.dim() == 2 {
        v["walk_reducibility"] = serde_json::to_value(walk_reducibility_dim2(&c)?).expect("serializes");
    }
    write_output(out, out_path, &pretty(&v))?;
    Ok(EXIT_OK)
}

/// Grid `a, a + step, ...` up to `b` inclusive.
pub fn parse_range(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, step] = parts.as_slice() else {
        return Err(format!("range `{s}` is not of the form a:b:step"));
    };
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
    let (a, b, step) = (num(a)?, num(b)?, num(step)?);
    if !(a.is_finite() && b.is_finite() && step.is_finite()) || step <= 0.0 || b < a {
        return Err(format!("range `{s}` needs a <= b and step > 0"));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    if n > 1_000_000 {
        return Err(format!("range `{s}` has too many points"));
    }
    // Snap to a 1e-12 lattice so `0.1 + 2 * 0.05` prints as 0.2.
    Ok((0..=n).map(|k| ((a + k as f64 * step) * 1e12).round() / 1e12).collect())
}

struct SweepRow {
    value: f64,
    position: ParamPosition,
    verdict: String,
    traces: Vec<f64>,
    drifts: Vec<f64>,
    note: String,
    invalid: bool,
}

fn sweep_row(fam: &CoinFamily, value: f64, tol: f64, tol_half: f64) -> SweepRow {
    let position = fam.position(value);
    let mut row = SweepRow {
        value,
        position,
        verdict: String::new(),
        traces: Vec::new(),
        drifts: Vec::new(),
        note: String::new(),
        invalid: false,
    };
    let coin = match fam.instantiate(value, tol) {
        Ok(c) => c,
        Err(e) => {
            row.verdict = "invalid".into();
            row.note = e.to_string();
            row.invalid = true;
            return row;
        }
    };
    match classify(&coin, tol_half) {
        Ok(c) => {
            row.verdict = match &c.verdict {
                Verdict::Inconclusive { reason } => {
                    row.note = reason.clone();
                    "Inconclusive".into()
                }
                other => other.name().into(),
            };
            row.traces = c.trace_values;
            row.drifts = c.drifts;
        }
        Err(e) => {
            row.verdict = "error".into();
            row.note = e.to_string();
        }
    }
    row
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(";")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    path: &Path,
    param: Option<&str>,
    range: &str,
    tol: f64,
    tol_half: f64,
    out_path: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, Failure> {
    let fam = parse_family(&read(path)?).map_err(|e| with_path(path, e))?;
    if let Some(p) = param {
        if p != fam.param {
            return Err(Failure::input(format!("family parameter is `{}`, not `{p}`", fam.param)));
        }
    }
    let values = parse_range(range).map_err(Failure::input)?;
    let rows: Vec<SweepRow> = values.par_iter().map(|&v| sweep_row(&fam, v, tol, tol_half)).collect();

    let m = RunManifest::new("sweep", Some(path))
        .param("param", &fam.param)
        .param("range", range)
        .param("tol_half", tol_half);
    let mut csv = format!("# {}\nparam,verdict,trace_values,drift,position,note\n", m.comment());
    for r in &rows {
        let position = serde_json::to_value(r.position).expect("serializes");
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.value,
            r.verdict,
            join(&r.traces),
            join(&r.drifts),
            position.as_str().unwrap_or_default(),
            csv_field(&r.note)
        ));
    }
    write_output(out, out_path, &csv)?;
    let invalid: Vec<String> = rows.iter().filter(|r| r.invalid).map(|r| r.value.to_string()).collect();
    if invalid.is_empty() {
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(err, "invalid coin at {} = {}", fam.param, invalid.join(", "));
        Ok(EXIT_INPUT)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_is_inclusive() {
        let v = parse_range("0.05:0.45:0.05").unwrap();
        assert_eq!(v.len(), 9);
        assert!((v[8] - 0.45).abs() < 1e-12);
        assert_eq!(parse_range("1:1:0.1").unwrap(), vec![1.0]);
        assert!(parse_range("1:0:0.1").is_err());
        assert!(parse_range("0:1:0").is_err());
        assert!(parse_range("0:1").is_err());
    }

    #[test]
    fn key_value_parsing() {
        assert_eq!(parse_key_f64("x=0.3").unwrap(), ("x".to_string(), 0.3));
        assert!(parse_key_f64("x").is_err());
        assert!(parse_key_f64("x=abc").is_err());
    }

    #[test]
    fn csv_fields_are_quoted() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("plain"), "plain");
    }
}
