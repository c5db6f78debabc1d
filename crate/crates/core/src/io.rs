//! Coin, family and density file formats.
//!
//! A coin file is JSON of the form
//!
//! ```json
//! {"dim": 2,
//!  "L": [[{"re": "1/sqrt(3)", "im": "0"}, {"re": "0", "im": "0"}], ...],
//!  "R": [[...], ...]}
//! ```
//!
//! where each `re`/`im` is an expression in the [`crate::expr`] grammar (a
//! bare JSON number is accepted too, and a missing `im` means zero). Density
//! files use the same layout with a single `"rho"` matrix. Family files add
//! `"param": "<name>"` and may use that name inside entries, plus an optional
//! open `"interval": ["<lo>", "<hi>"]` of admissible values.

use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::coin::{validate_coin, Coin, DensityMatrix};
use crate::error::{Error, Result};
use crate::expr::{Bindings, Expr};
use crate::linalg::{ComplexMatrix, C64};
use crate::Tolerances;

#[derive(Debug, Clone)]
struct Entry {
    re: Expr,
    im: Expr,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ExprSource {
    Text(String),
    Number(f64),
}

fn parse_expr_source<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Expr, D::Error> {
    match ExprSource::deserialize(d)? {
        ExprSource::Number(x) => Ok(Expr::Num(x)),
        ExprSource::Text(s) => Expr::parse(&s).map_err(|e| de::Error::custom(format!("in `{s}`: {e}"))),
    }
}

fn zero_expr() -> Expr {
    Expr::Num(0.0)
}

impl<'de> Deserialize<'de> for Entry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            #[serde(deserialize_with = "parse_expr_source")]
            re: Expr,
            #[serde(default = "zero_expr", deserialize_with = "parse_expr_source")]
            im: Expr,
        }
        let raw = Raw::deserialize(d)?;
        Ok(Entry { re: raw.re, im: raw.im })
    }
}

type Rows = Vec<Vec<Entry>>;

fn check_shape(name: &str, dim: usize, rows: &Rows) -> std::result::Result<(), String> {
    if rows.len() != dim {
        return Err(format!("matrix `{name}` has {} rows but dim is {dim}", rows.len()));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
        return Err(format!("row {i} of matrix `{name}` has {} entries but dim is {dim}", r.len()));
    }
    Ok(())
}

fn check_vars(rows: &Rows, allowed: Option<&str>) -> std::result::Result<(), String> {
    for e in rows.iter().flatten() {
        for v in e.re.variables().into_iter().chain(e.im.variables()) {
            if Some(v.as_str()) != allowed {
                return Err(format!("unknown identifier `{v}`"));
            }
        }
    }
    Ok(())
}

fn eval_rows(rows: &Rows, vars: &Bindings) -> std::result::Result<ComplexMatrix, String> {
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let mut r = Vec::with_capacity(row.len());
        for e in row {
            r.push(C64::new(e.re.eval(vars)?, e.im.eval(vars)?));
        }
        out.push(r);
    }
    ComplexMatrix::from_rows(out).map_err(|e| e.to_string())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoinFile {
    dim: usize,
    #[serde(rename = "L")]
    left: Rows,
    #[serde(rename = "R")]
    right: Rows,
}

#[derive(Deserialize)]
#[serde(try_from = "RawCoinFile")]
struct CoinFile {
    left: ComplexMatrix,
    right: ComplexMatrix,
}

impl TryFrom<RawCoinFile> for CoinFile {
    type Error = String;

    fn try_from(raw: RawCoinFile) -> std::result::Result<Self, String> {
        if raw.dim == 0 {
            return Err("dim must be positive".into());
        }
        check_shape("L", raw.dim, &raw.left)?;
        check_shape("R", raw.dim, &raw.right)?;
        check_vars(&raw.left, None)?;
        check_vars(&raw.right, None)?;
        let empty = Bindings::new();
        Ok(CoinFile {
            left: eval_rows(&raw.left, &empty)?,
            right: eval_rows(&raw.right, &empty)?,
        })
    }
}

/// 1-based line and column of byte `offset`.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// Converts a serde error. Whole-file checks run after parsing and carry no
/// position, so those point at the key named in the message (or at the start).
fn json_error(text: &str, e: serde_json::Error) -> Error {
    let message = e.to_string();
    if e.line() > 0 {
        return Error::Parse {
            line: e.line(),
            column: e.column(),
            message,
        };
    }
    let key = message.split('`').nth(1).map(|k| format!("\"{k}\""));
    let offset = key.and_then(|k| text.find(&k)).unwrap_or(0);
    let (line, column) = line_col(text, offset);
    Error::Parse { line, column, message }
}

/// Parses the `(L, R)` matrices of a coin file without checking the coin constraint.
pub fn parse_coin_matrices(text: &str) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let f: CoinFile = serde_json::from_str(text).map_err(|e| json_error(text, e))?;
    Ok((f.left, f.right))
}

/// Parses a coin file and validates `L*L + R*R = I` at the default tolerance.
pub fn parse_coin(text: &str) -> Result<Coin> {
    parse_coin_with_tol(text, Tolerances::default().coin)
}

pub fn parse_coin_with_tol(text: &str, tol: f64) -> Result<Coin> {
    let (l, r) = parse_coin_matrices(text)?;
    validate_coin(l, r, tol)
}

#[derive(Serialize)]
struct EntryOut {
    re: String,
    im: String,
}

fn matrix_rows_out(m: &ComplexMatrix) -> Vec<Vec<EntryOut>> {
    m.rows()
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|z| EntryOut {
                    re: format!("{:?}", z.re),
                    im: format!("{:?}", z.im),
                })
                .collect()
        })
        .collect()
}

/// Writes a coin file with shortest round-trip decimal entries, so
/// `parse_coin(serialize_coin(c))` reproduces `c` bit for bit.
pub fn serialize_coin(coin: &Coin) -> String {
    #[derive(Serialize)]
    struct Out {
        dim: usize,
        #[serde(rename = "L")]
        left: Vec<Vec<EntryOut>>,
        #[serde(rename = "R")]
        right: Vec<Vec<EntryOut>>,
    }
    serde_json::to_string_pretty(&Out {
        dim: coin.dim(),
        left: matrix_rows_out(coin.left()),
        right: matrix_rows_out(coin.right()),
    })
    .expect("coin serialization cannot fail")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDensityFile {
    dim: usize,
    rho: Rows,
}

#[derive(Deserialize)]
#[serde(try_from = "RawDensityFile")]
struct DensityFile {
    rho: ComplexMatrix,
}

impl TryFrom<RawDensityFile> for DensityFile {
    type Error = String;

    fn try_from(raw: RawDensityFile) -> std::result::Result<Self, String> {
        if raw.dim == 0 {
            return Err("dim must be positive".into());
        }
        check_shape("rho", raw.dim, &raw.rho)?;
        check_vars(&raw.rho, None)?;
        Ok(DensityFile {
            rho: eval_rows(&raw.rho, &Bindings::new())?,
        })
    }
}

/// Parses the `"rho"` matrix of a density file without validating it, for
/// linear extensions of the series to non-density operators.
pub fn parse_operator(text: &str) -> Result<ComplexMatrix> {
    let f: DensityFile = serde_json::from_str(text).map_err(|e| json_error(text, e))?;
    Ok(f.rho)
}

/// Parses and validates a density file.
pub fn parse_density(text: &str) -> Result<DensityMatrix> {
    DensityMatrix::new(parse_operator(text)?, Tolerances::default().hermitian)
}

pub fn serialize_density(rho: &ComplexMatrix) -> String {
    #[derive(Serialize)]
    struct Out {
        dim: usize,
        rho: Vec<Vec<EntryOut>>,
    }
    serde_json::to_string_pretty(&Out {
        dim: rho.dim(),
        rho: matrix_rows_out(rho),
    })
    .expect("density serialization cannot fail")
}

/// A coin whose entries depend on one named parameter.
#[derive(Debug, Clone)]
pub struct CoinFamily {
    pub param: String,
    /// Open interval of admissible parameter values, when declared.
    pub interval: Option<(f64, f64)>,
    dim: usize,
    left: Rows,
    right: Rows,
}

/// Where a parameter value sits relative to the family's declared interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamPosition {
    Interior,
    Boundary,
    Outside,
    Undeclared,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamilyFile {
    dim: usize,
    param: String,
    #[serde(default)]
    interval: Option<(String, String)>,
    #[serde(rename = "L")]
    left: Rows,
    #[serde(rename = "R")]
    right: Rows,
}

#[derive(Deserialize)]
#[serde(try_from = "RawFamilyFile")]
struct FamilyFile(CoinFamily);

impl TryFrom<RawFamilyFile> for FamilyFile {
    type Error = String;

    fn try_from(raw: RawFamilyFile) -> std::result::Result<Self, String> {
        if raw.dim == 0 {
            return Err("dim must be positive".into());
        }
        check_shape("L", raw.dim, &raw.left)?;
        check_shape("R", raw.dim, &raw.right)?;
        check_vars(&raw.left, Some(&raw.param))?;
        check_vars(&raw.right, Some(&raw.param))?;
        let interval = match raw.interval {
            Some((lo, hi)) => {
                let lo = crate::expr::eval_str(&lo)?;
                let hi = crate::expr::eval_str(&hi)?;
                if lo >= hi {
                    return Err(format!("empty interval ({lo}, {hi})"));
                }
                Some((lo, hi))
            }
            None => None,
        };
        Ok(FamilyFile(CoinFamily {
            param: raw.param,
            interval,
            dim: raw.dim,
            left: raw.left,
            right: raw.right,
        }))
    }
}

pub fn parse_family(text: &str) -> Result<CoinFamily> {
    let f: FamilyFile = serde_json::from_str(text).map_err(|e| json_error(text, e))?;
    Ok(f.0)
}

impl CoinFamily {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Evaluates `(L, R)` at a parameter value without validating the coin.
    pub fn matrices_at(&self, value: f64) -> Result<(ComplexMatrix, ComplexMatrix)> {
        let mut vars = Bindings::new();
        vars.insert(self.param.clone(), value);
        let eval = |rows: &Rows| {
            eval_rows(rows, &vars).map_err(|m| Error::Config(format!("{} = {value}: {m}", self.param)))
        };
        Ok((eval(&self.left)?, eval(&self.right)?))
    }

    /// Evaluates and validates the coin at a parameter value.
    pub fn instantiate(&self, value: f64, tol: f64) -> Result<Coin> {
        let (l, r) = self.matrices_at(value)?;
        validate_coin(l, r, tol)
    }

    pub fn position(&self, value: f64) -> ParamPosition {
        match self.interval {
            None => ParamPosition::Undeclared,
            Some((lo, hi)) => {
                let eps = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
                if (value - lo).abs() <= eps || (value - hi).abs() <= eps {
                    ParamPosition::Boundary
                } else if value > lo && value < hi {
                    ParamPosition::Interior
                } else {
                    ParamPosition::Outside
                }
            }
        }
    }
}

/// Serializes a matrix as nested `[re, im]` pairs.
pub fn serialize_matrix<S: Serializer>(m: &ComplexMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(m.dim()))?;
    for row in m.rows() {
        let pairs: Vec<[f64; 2]> = row.iter().map(|z| [z.re, z.im]).collect();
        seq.serialize_element(&pairs)?;
    }
    seq.end()
}

/// Wrapper giving a matrix the `[re, im]` JSON layout.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixJson(pub ComplexMatrix);

impl Serialize for MatrixJson {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serialize_matrix(&self.0, s)
    }
}
