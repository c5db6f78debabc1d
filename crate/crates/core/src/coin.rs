//! Coins `(L, R)`, densities, and the eigenvector analysis of a coin.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{
    canonical_phase, eigen_decomposition, eigen_residual, hermitian_eigen, inner, norm, normalized, rayleigh,
    ComplexMatrix, C64,
};
use crate::Tolerances;

/// A validated pair of transition matrices with `L*L + R*R = I`.
///
/// `L` moves the walker one site left, `R` one site right.
#[derive(Debug, Clone, PartialEq)]
pub struct Coin {
    left: ComplexMatrix,
    right: ComplexMatrix,
    residual: f64,
}

/// Checks `max|L*L + R*R - I| <= tol` and builds the coin.
pub fn validate_coin(left: ComplexMatrix, right: ComplexMatrix, tol: f64) -> Result<Coin> {
    if left.dim() != right.dim() {
        return Err(Error::DimensionMismatch {
            expected: left.dim(),
            found: right.dim(),
        });
    }
    let d = left.dim();
    let gram = &(&left.adjoint() * &left) + &(&right.adjoint() * &right);
    let residual = gram.max_diff(&ComplexMatrix::identity(d));
    if residual > tol {
        return Err(Error::NotTracePreserving { residual });
    }
    Ok(Coin { left, right, residual })
}

impl Coin {
    pub fn new(left: ComplexMatrix, right: ComplexMatrix) -> Result<Self> {
        validate_coin(left, right, Tolerances::default().coin)
    }

    /// One-dimensional (classical) coin moving left with probability `p`.
    pub fn classical(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Config(format!("probability {p} outside [0, 1]")));
        }
        Self::new(
            ComplexMatrix::from_diag(&[C64::new(p.sqrt(), 0.0)]),
            ComplexMatrix::from_diag(&[C64::new((1.0 - p).sqrt(), 0.0)]),
        )
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.left.dim()
    }

    #[inline]
    pub fn left(&self) -> &ComplexMatrix {
        &self.left
    }

    #[inline]
    pub fn right(&self) -> &ComplexMatrix {
        &self.right
    }

    /// `max|L*L + R*R - I|` measured at validation.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// `L*L`.
    pub fn left_gram(&self) -> ComplexMatrix {
        &self.left.adjoint() * &self.left
    }

    /// `Tr(L*L ρ)`: probability of a left step from internal state `ρ`.
    pub fn left_probability(&self, rho: &ComplexMatrix) -> f64 {
        (&self.left_gram() * rho).trace().re
    }

    /// Unitarily rotated coin `(U L U*, U R U*)`.
    pub fn conjugated(&self, u: &ComplexMatrix) -> Result<Self> {
        let ud = u.adjoint();
        validate_coin(
            &(u * &self.left) * &ud,
            &(u * &self.right) * &ud,
            Tolerances::default().coin,
        )
    }

    /// Coin `(e^{iθ} L, e^{iφ} R)`; it induces the same walk.
    pub fn with_phases(&self, theta: f64, phi: f64) -> Self {
        Self {
            left: self.left.scale(C64::from_polar(1.0, theta)),
            right: self.right.scale(C64::from_polar(1.0, phi)),
            residual: self.residual,
        }
    }

    /// True when `LL* + RR* = I`, i.e. the auxiliary map fixes `I/d`.
    pub fn is_unital(&self, tol: f64) -> bool {
        let s = &(&self.left * &self.left.adjoint()) + &(&self.right * &self.right.adjoint());
        s.max_diff(&ComplexMatrix::identity(self.dim())) <= tol
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, positivity and unit trace within `tol`.
    pub fn new(matrix: ComplexMatrix, tol: f64) -> Result<Self> {
        let deviation = matrix.hermitian_deviation();
        if deviation > tol {
            return Err(Error::InvalidDensity(format!("not Hermitian (deviation {deviation:.3e})")));
        }
        let tr = matrix.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::InvalidDensity(format!("trace {tr} differs from 1")));
        }
        let min = hermitian_eigen(&matrix, tol)?[0].value.re;
        if min < -tol {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { matrix })
    }

    /// `|v><v| / <v|v>`.
    pub fn pure(v: &[C64]) -> Result<Self> {
        let u = normalized(v).ok_or_else(|| Error::InvalidDensity("zero state vector".into()))?;
        Ok(Self {
            matrix: ComplexMatrix::outer(&u),
        })
    }

    /// `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    /// Trusted constructor for internal results that are densities by construction.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigen(&self.matrix, 1e-8)
            .map(|p| p[0].value.re)
            .unwrap_or(f64::NAN)
    }

    /// Strictly positive (all eigenvalues above `tol`).
    pub fn is_faithful(&self, tol: f64) -> bool {
        self.min_eigenvalue() > tol
    }

    /// `U ρ U*`.
    pub fn conjugated(&self, u: &ComplexMatrix) -> Self {
        Self {
            matrix: ComplexMatrix::sandwich(u, &self.matrix),
        }
    }
}

impl AsRef<ComplexMatrix> for DensityMatrix {
    fn as_ref(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        crate::io::serialize_matrix(&self.matrix, s)
    }
}

/// Common eigenvectors of `L` and `R`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CommonEigReport {
    pub count: usize,
    /// Unit vectors; for `d = 2` and `count = 2` they are orthogonal.
    pub vectors: Vec<Vec<C64>>,
    pub eigen_left: Vec<C64>,
    pub eigen_right: Vec<C64>,
    /// A 2x2 factor had a (near-)repeated non-scalar eigenvalue.
    pub degenerate: bool,
    /// False when some eigenspace could not be resolved (only possible for `d > 2`).
    pub complete: bool,
}

/// Common eigenvectors of two matrices grouped by joint eigenspace.
#[derive(Debug, Clone)]
pub(crate) struct CommonEigenspaces {
    /// Each entry is an orthonormal basis of `ker(A - α) ∩ ker(B - β)`.
    pub spaces: Vec<Vec<Vec<C64>>>,
    pub degenerate: bool,
    pub complete: bool,
}

impl CommonEigenspaces {
    pub fn lines(&self) -> Vec<Vec<C64>> {
        self.spaces.iter().flatten().cloned().collect()
    }
}

/// Intersects every eigenspace of `a` with every eigenspace of `b`.
pub(crate) fn common_eigenspaces(a: &ComplexMatrix, b: &ComplexMatrix, tol: &Tolerances) -> Result<CommonEigenspaces> {
    let dec_a = eigen_decomposition(a, tol.degeneracy_gap)?;
    let dec_b = eigen_decomposition(b, tol.degeneracy_gap)?;
    let mut spaces: Vec<Vec<Vec<C64>>> = Vec::new();
    let mut seen: Vec<Vec<C64>> = Vec::new();

    for ea in &dec_a.spaces {
        for eb in &dec_b.spaces {
            let mut space = Vec::new();
            for v in subspace_intersection(&ea.basis, &eb.basis)? {
                let v = canonical_phase(&v);
                let ok_a = eigen_residual(a, rayleigh(a, &v), &v) <= tol.eigen_match;
                let ok_b = eigen_residual(b, rayleigh(b, &v), &v) <= tol.eigen_match;
                let dup = seen.iter().any(|u| inner(u, &v).norm() > 1.0 - tol.phase_dedup);
                if ok_a && ok_b && !dup {
                    seen.push(v.clone());
                    space.push(v);
                }
            }
            if !space.is_empty() {
                spaces.push(space);
            }
        }
    }
    Ok(CommonEigenspaces {
        spaces,
        degenerate: dec_a.degenerate || dec_b.degenerate,
        complete: dec_a.complete && dec_b.complete,
    })
}

/// Orthonormal basis of `span(e) ∩ span(f)` for orthonormal inputs.
fn subspace_intersection(e: &[Vec<C64>], f: &[Vec<C64>]) -> Result<Vec<Vec<C64>>> {
    let m = e.len();
    // Gram matrix of (I - P_F) restricted to span(e); its null vectors span the intersection.
    let project_out = |v: &[C64]| -> Vec<C64> {
        let mut w = v.to_vec();
        for fv in f {
            let c = inner(fv, &w);
            for (wi, fi) in w.iter_mut().zip(fv) {
                *wi -= c * fi;
            }
        }
        w
    };
    let residuals: Vec<Vec<C64>> = e.iter().map(|v| project_out(v)).collect();
    let mut g = ComplexMatrix::zeros(m);
    for i in 0..m {
        for j in 0..m {
            g[(i, j)] = inner(&residuals[i], &residuals[j]);
        }
    }
    let pairs = hermitian_eigen(&g, 1e-10)?;
    Ok(pairs
        .into_iter()
        .filter(|p| p.value.re.max(0.0).sqrt() <= 1e-7)
        .filter_map(|p| {
            let d = e[0].len();
            let v: Vec<C64> = (0..d).map(|k| (0..m).map(|i| p.vector[i] * e[i][k]).sum()).collect();
            normalized(&v)
        })
        .collect())
}

/// Common eigenvectors of `L` and `R`.
///
/// For `d = 2` with two independent common eigenvectors the report carries the
/// orthogonal pair `u₁, u₂` (the orthogonal complement of a common eigenvector
/// is then itself one).
pub fn common_eigenvectors(coin: &Coin) -> Result<CommonEigReport> {
    common_eigenvectors_with(coin, &Tolerances::default())
}

pub fn common_eigenvectors_with(coin: &Coin, tol: &Tolerances) -> Result<CommonEigReport> {
    let (l, r) = (coin.left(), coin.right());
    let common = common_eigenspaces(l, r, tol)?;
    let mut vectors = common.lines();

    if coin.dim() == 2 && vectors.len() == 2 {
        let u1 = vectors[0].clone();
        let u2 = canonical_phase(&[-u1[1].conj(), u1[0].conj()]);
        let ok = eigen_residual(l, rayleigh(l, &u2), &u2) <= tol.eigen_match
            && eigen_residual(r, rayleigh(r, &u2), &u2) <= tol.eigen_match;
        if ok {
            vectors[1] = u2;
        }
    }

    Ok(CommonEigReport {
        count: vectors.len(),
        eigen_left: vectors.iter().map(|v| rayleigh(l, v)).collect(),
        eigen_right: vectors.iter().map(|v| rayleigh(r, v)).collect(),
        vectors,
        degenerate: common.degenerate,
        complete: common.complete,
    })
}

/// Evidence about irreducibility of the walk and of its auxiliary map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducibilityReport {
    /// `None` when undecided.
    pub walk_reducible: Option<bool>,
    pub aux_irreducible: Option<bool>,
    pub witness: Option<String>,
    pub word_search: Option<WordSearch>,
}

impl ReducibilityReport {
    pub(crate) fn unknown() -> Self {
        Self {
            walk_reducible: None,
            aux_irreducible: None,
            witness: None,
            word_search: None,
        }
    }
}

/// Result of the bounded search over balanced words.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordSearch {
    pub max_len: usize,
    pub words_checked: usize,
    pub outcome: WordSearchOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WordSearchOutcome {
    /// A line left invariant by every balanced word checked.
    ReducibleCandidate { line: Vec<C64> },
    NoObstruction,
}

fn fmt_vec(v: &[C64]) -> String {
    let parts: Vec<String> = v.iter().map(|z| format!("{:.6}{:+.6}i", z.re, z.im)).collect();
    format!("({})", parts.join(", "))
}

/// `|Av - <w,Av> w|`: distance of `Av` from the line through unit `w`.
fn off_line(a: &ComplexMatrix, v: &[C64], w: &[C64]) -> f64 {
    let av = a.apply(v);
    let c = inner(w, &av);
    norm(&av.iter().zip(w).map(|(x, y)| x - c * y).collect::<Vec<_>>())
}

/// Reducibility test for the walk of a 2-dimensional coin, based on the common
/// eigenvectors `W` of `LR` and `RL`: the walk is reducible iff `W` contains an
/// eigenvector of `L` or `R`, or `W` is exactly two lines `ℂu ∪ ℂv` that `L`
/// and `R` swap.
pub fn walk_reducibility_dim2(coin: &Coin) -> Result<ReducibilityReport> {
    if coin.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: coin.dim(),
        });
    }
    let tol = Tolerances::default();
    let (l, r) = (coin.left(), coin.right());
    let lr = l * r;
    let rl = r * l;
    let w = common_eigenspaces(&lr, &rl, &tol)?;

    let reducible = |witness: String| ReducibilityReport {
        walk_reducible: Some(true),
        aux_irreducible: None,
        witness: Some(witness),
        word_search: None,
    };

    if w.spaces.iter().any(|s| s.len() >= 2) {
        return Ok(reducible(
            "every vector is a common eigenvector of LR and RL, including eigenvectors of L".into(),
        ));
    }
    let lines = w.lines();
    for v in &lines {
        let is_eig = |m: &ComplexMatrix| eigen_residual(m, rayleigh(m, v), v) <= tol.eigen_match;
        if is_eig(l) || is_eig(r) {
            return Ok(reducible(format!(
                "common eigenvector {} of LR and RL is an eigenvector of {}",
                fmt_vec(v),
                if is_eig(l) { "L" } else { "R" }
            )));
        }
    }
    if lines.len() == 2 {
        let (u, v) = (&lines[0], &lines[1]);
        let maps_to = |src: &[C64], dst: &[C64]| {
            off_line(l, src, dst) <= tol.eigen_match && off_line(r, src, dst) <= tol.eigen_match
        };
        if maps_to(u, v) && maps_to(v, u) {
            return Ok(reducible(format!(
                "L and R swap the lines through {} and {}",
                fmt_vec(u),
                fmt_vec(v)
            )));
        }
    }
    Ok(ReducibilityReport {
        walk_reducible: Some(false),
        aux_irreducible: None,
        witness: Some(format!("{} common eigenvector(s) of LR and RL, no reducing structure", lines.len())),
        word_search: None,
    })
}
