//! Eigen-solvers for small dense complex matrices.
//!
//! Hermitian problems go through cyclic Jacobi rotations. General matrices use
//! a closed form for `d <= 2`; larger ones find eigenvalues one at a time by
//! Rayleigh-quotient iteration with unitary deflation, then recover each
//! eigenspace as a kernel.

use serde::Serialize;

use super::matrix::{basis_vector, inner, norm, normalized, orthonormalize, ComplexMatrix, C64, ONE};
use super::nullspace::{null_space, solve_linear};
use crate::error::{Error, Result};

const JACOBI_MAX_SWEEPS: usize = 100;
const GENERAL_MAX_ITERATIONS: usize = 100_000;
const EIGEN_RESIDUAL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenPair {
    pub value: C64,
    /// Unit-norm eigenvector.
    pub vector: Vec<C64>,
}

/// An eigenvalue with an orthonormal basis of its (geometric) eigenspace.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenspace {
    pub value: C64,
    pub basis: Vec<Vec<C64>>,
}

/// All eigenspaces found for a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub spaces: Vec<Eigenspace>,
    /// Set when a 2x2 matrix had a repeated non-scalar eigenvalue (a Jordan block).
    pub degenerate: bool,
    /// False when some eigenvalue's geometric multiplicity could not be
    /// resolved numerically (defective or near-defective clusters for `d > 2`).
    pub complete: bool,
}

impl EigenDecomposition {
    pub fn pairs(&self) -> Vec<EigenPair> {
        self.spaces
            .iter()
            .flat_map(|s| {
                s.basis.iter().map(move |v| EigenPair {
                    value: s.value,
                    vector: v.clone(),
                })
            })
            .collect()
    }
}

/// Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Eigenvalues are returned in ascending order with orthonormal eigenvectors.
pub fn hermitian_eigen(h: &ComplexMatrix, tol: f64) -> Result<Vec<EigenPair>> {
    let deviation = h.hermitian_deviation();
    if deviation > tol {
        return Err(Error::NotHermitian { deviation });
    }
    let d = h.dim();
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(d);
    let stop = 1e-14 * h.frobenius_norm();

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= stop {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let b = a[(p, q)];
                let babs = b.norm();
                if babs == 0.0 {
                    continue;
                }
                // Phase e^{-iφ} on column q makes the (p, q) entry real, then a
                // real rotation annihilates it.
                let phase = b.conj() / babs;
                let (app, aqq) = (a[(p, p)].re, a[(q, q)].re);
                let tau = (aqq - app) / (2.0 * babs);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let mut rot = ComplexMatrix::identity(d);
                rot[(p, p)] = C64::new(c, 0.0);
                rot[(p, q)] = C64::new(s, 0.0);
                rot[(q, p)] = phase * (-s);
                rot[(q, q)] = phase * c;
                a = &(&rot.adjoint() * &a) * &rot;
                v = &v * &rot;
            }
        }
    }

    let mut pairs: Vec<EigenPair> = (0..d)
        .map(|k| EigenPair {
            value: C64::new(a[(k, k)].re, 0.0),
            vector: (0..d).map(|i| v[(i, k)]).collect(),
        })
        .collect();
    pairs.sort_by(|x, y| x.value.re.total_cmp(&y.value.re));
    Ok(pairs)
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let d = a.dim();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(h: &ComplexMatrix, tol: f64) -> Result<f64> {
    Ok(hermitian_eigen(h, tol)?[0].value.re)
}

/// True iff `H` is Hermitian within `tol` and its smallest eigenvalue is `>= -tol`.
pub fn is_psd(h: &ComplexMatrix, tol: f64) -> Result<bool> {
    Ok(min_eigenvalue(h, tol)? >= -tol)
}

/// Eigenpairs of a general complex matrix.
///
/// For `d = 2` this is exact: a scalar matrix yields `e₁, e₂`, a Jordan block a
/// single pair. For `d > 2` fewer than `d` pairs may be returned when the
/// matrix is defective.
pub fn eigen_general(m: &ComplexMatrix) -> Result<Vec<EigenPair>> {
    Ok(eigen_decomposition(m, 1e-8)?.pairs())
}

/// Eigenspaces of a general matrix. `gap_tol` is the relative eigenvalue gap
/// below which two eigenvalues are merged.
pub fn eigen_decomposition(m: &ComplexMatrix, gap_tol: f64) -> Result<EigenDecomposition> {
    match m.dim() {
        1 => Ok(EigenDecomposition {
            spaces: vec![Eigenspace {
                value: m[(0, 0)],
                basis: vec![vec![ONE]],
            }],
            degenerate: false,
            complete: true,
        }),
        2 => Ok(eigen_2x2(m, gap_tol)),
        _ => eigen_deflation(m, gap_tol),
    }
}

fn eigen_2x2(m: &ComplexMatrix, gap_tol: f64) -> EigenDecomposition {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let half_trace = (a + d) * 0.5;

    let scalar = b.norm() <= 1e-12 * scale && c.norm() <= 1e-12 * scale && (a - d).norm() <= 1e-12 * scale;
    if scalar {
        return EigenDecomposition {
            spaces: vec![Eigenspace {
                value: half_trace,
                basis: vec![basis_vector(2, 0), basis_vector(2, 1)],
            }],
            degenerate: false,
            complete: true,
        };
    }

    let disc = ((a - d) * (a - d) + b * c * 4.0).sqrt();
    if disc.norm() < gap_tol * scale {
        return EigenDecomposition {
            spaces: vec![Eigenspace {
                value: half_trace,
                basis: vec![eigvec_2x2(a, b, c, d, half_trace)],
            }],
            degenerate: true,
            complete: true,
        };
    }

    let spaces = [half_trace + disc * 0.5, half_trace - disc * 0.5]
        .into_iter()
        .map(|lambda| Eigenspace {
            value: lambda,
            basis: vec![eigvec_2x2(a, b, c, d, lambda)],
        })
        .collect();
    EigenDecomposition {
        spaces,
        degenerate: false,
        complete: true,
    }
}

/// Null vector of `[[a-λ, b], [c, d-λ]]`, using whichever row gives the
/// better-conditioned candidate.
fn eigvec_2x2(a: C64, b: C64, c: C64, d: C64, lambda: C64) -> Vec<C64> {
    let from_top = [b, lambda - a];
    let from_bottom = [lambda - d, c];
    let pick = if norm(&from_top) >= norm(&from_bottom) {
        from_top
    } else {
        from_bottom
    };
    normalized(&pick).unwrap_or_else(|| basis_vector(2, 0))
}

fn eigen_deflation(m: &ComplexMatrix, gap_tol: f64) -> Result<EigenDecomposition> {
    let mut budget = GENERAL_MAX_ITERATIONS;
    let mut values: Vec<C64> = Vec::with_capacity(m.dim());
    let mut a = m.clone();
    while a.dim() > 2 {
        let (mu, x) = rayleigh_eigenpair(&a, &mut budget)?;
        values.push(mu);
        a = deflate(&a, &x);
    }
    let tail = eigen_values_2x2(&a);
    values.extend(tail);

    let scale = m.max_abs().max(1.0);
    let mut clusters: Vec<(C64, usize)> = Vec::new();
    for v in values {
        match clusters.iter_mut().find(|(c, _)| (*c - v).norm() <= gap_tol * scale) {
            Some((c, k)) => {
                *c = (*c * (*k as f64) + v) / (*k as f64 + 1.0);
                *k += 1;
            }
            None => clusters.push((v, 1)),
        }
    }

    let mut complete = true;
    let mut spaces = Vec::new();
    for (mu, multiplicity) in clusters {
        let shifted = m - &ComplexMatrix::identity(m.dim()).scale(mu);
        let mut basis: Vec<Vec<C64>> = null_space(&shifted, 1e-9)
            .into_iter()
            .filter(|v| norm(&shifted.apply(v)) <= EIGEN_RESIDUAL * scale)
            .collect();
        if basis.is_empty() {
            if let Some(v) = inverse_iteration(m, mu) {
                basis.push(v);
            }
        }
        // A split defective eigenvalue can hand back a line already found.
        basis.retain(|v| {
            !spaces
                .iter()
                .flat_map(|s: &Eigenspace| s.basis.iter())
                .any(|u| inner(u, v).norm() > 1.0 - 1e-9)
        });
        if basis.len() < multiplicity {
            complete = false;
        }
        if basis.is_empty() {
            continue;
        }
        let value = if basis.len() == 1 {
            inner(&basis[0], &m.apply(&basis[0]))
        } else {
            mu
        };
        spaces.push(Eigenspace { value, basis });
    }

    Ok(EigenDecomposition {
        spaces,
        degenerate: false,
        complete,
    })
}

fn eigen_values_2x2(m: &ComplexMatrix) -> [C64; 2] {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let half_trace = (a + d) * 0.5;
    let disc = ((a - d) * (a - d) + b * c * 4.0).sqrt();
    [half_trace + disc * 0.5, half_trace - disc * 0.5]
}

/// Deterministic, generic-position starting vectors.
fn start_vector(d: usize, attempt: usize) -> Vec<C64> {
    (0..d)
        .map(|i| {
            let t = (i + 1) as f64 * (attempt + 1) as f64;
            C64::new((t * 0.754_877_666).fract() + 0.1, (t * 0.569_840_291).fract() - 0.5)
        })
        .collect()
}

fn rayleigh_eigenpair(a: &ComplexMatrix, budget: &mut usize) -> Result<(C64, Vec<C64>)> {
    let d = a.dim();
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let identity = ComplexMatrix::identity(d);
    let mut best: Option<(f64, C64, Vec<C64>)> = None;

    for attempt in 0..16 {
        let mut x = normalized(&start_vector(d, attempt)).expect("start vector is nonzero");
        for _ in 0..8 {
            match normalized(&a.apply(&x)) {
                Some(y) => x = y,
                None => break,
            }
        }
        for _ in 0..64 {
            if *budget == 0 {
                return Err(Error::ConvergenceFailure {
                    iterations: GENERAL_MAX_ITERATIONS,
                });
            }
            *budget -= 1;
            let ax = a.apply(&x);
            let mu = inner(&x, &ax);
            let residual = norm(&ax.iter().zip(&x).map(|(p, q)| p - mu * q).collect::<Vec<_>>());
            if best.as_ref().is_none_or(|(r, _, _)| residual < *r) {
                best = Some((residual, mu, x.clone()));
            }
            if residual <= 1e-14 * scale {
                return Ok((mu, x));
            }
            let shifted = a - &identity.scale(mu);
            match solve_linear(&shifted, &x).and_then(|y| normalized(&y)) {
                Some(y) => x = y,
                None => break,
            }
        }
        if let Some((r, mu, x)) = &best {
            if *r <= 1e-12 * scale {
                return Ok((*mu, x.clone()));
            }
        }
    }

    match best {
        Some((r, mu, x)) if r <= EIGEN_RESIDUAL => Ok((mu, x)),
        _ => Err(Error::ConvergenceFailure {
            iterations: GENERAL_MAX_ITERATIONS - *budget,
        }),
    }
}

/// Restricts `a` to the orthogonal complement of the unit vector `x`
/// (Schur-style deflation `Q* A Q` with `Q e₁ = x`).
fn deflate(a: &ComplexMatrix, x: &[C64]) -> ComplexMatrix {
    let d = a.dim();
    let mut candidates = vec![x.to_vec()];
    candidates.extend((0..d).map(|k| basis_vector(d, k)));
    let q_cols = orthonormalize(&candidates, 1e-8);
    let mut q = ComplexMatrix::zeros(d);
    for (j, col) in q_cols.iter().take(d).enumerate() {
        for i in 0..d {
            q[(i, j)] = col[i];
        }
    }
    let b = &(&q.adjoint() * a) * &q;
    let mut out = ComplexMatrix::zeros(d - 1);
    for i in 1..d {
        for j in 1..d {
            out[(i - 1, j - 1)] = b[(i, j)];
        }
    }
    out
}

fn inverse_iteration(m: &ComplexMatrix, mu: C64) -> Option<Vec<C64>> {
    let d = m.dim();
    let scale = m.max_abs().max(1.0);
    let shift = mu + C64::new(1e-10, 1e-10) * scale;
    let shifted = m - &ComplexMatrix::identity(d).scale(shift);
    let mut x = normalized(&start_vector(d, 3))?;
    for _ in 0..8 {
        x = normalized(&solve_linear(&shifted, &x)?)?;
    }
    let lambda = inner(&x, &m.apply(&x));
    let r: Vec<C64> = m.apply(&x).iter().zip(&x).map(|(p, q)| p - lambda * q).collect();
    (norm(&r) <= EIGEN_RESIDUAL * scale).then_some(x)
}

/// `|M v - λ v|`.
pub fn eigen_residual(m: &ComplexMatrix, value: C64, v: &[C64]) -> f64 {
    let mv = m.apply(v);
    norm(&mv.iter().zip(v).map(|(p, q)| p - value * q).collect::<Vec<_>>())
}

/// Rayleigh quotient `<v, M v>` for a unit vector.
pub fn rayleigh(m: &ComplexMatrix, v: &[C64]) -> C64 {
    inner(v, &m.apply(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn diagonal_thirds() {
        let h = ComplexMatrix::from_diag(&[c(1.0 / 3.0), c(2.0 / 3.0)]);
        let pairs = hermitian_eigen(&h, 1e-10).unwrap();
        assert!((pairs[0].value.re - 1.0 / 3.0).abs() < 1e-15);
        assert!((pairs[1].value.re - 2.0 / 3.0).abs() < 1e-15);
        assert!((pairs[0].vector[0].norm() - 1.0).abs() < 1e-15);
        assert!((pairs[1].vector[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scalar_half() {
        let h = ComplexMatrix::identity(2).scale_real(0.5);
        for p in hermitian_eigen(&h, 1e-10).unwrap() {
            assert!((p.value.re - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn unbalanced_invariant_state_eigenvalues_match_quadratic_formula() {
        let off = 6.0 + 6f64.sqrt();
        let h = ComplexMatrix::from_real_rows(&[&[15.0, off], &[off, 5.0]]).unwrap().scale_real(1.0 / 20.0);
        // λ = (tr ± sqrt(tr² - 4 det)) / 2 with tr = 1, det = (75 - off²)/400.
        let det = (75.0 - off * off) / 400.0;
        let root = (1.0 - 4.0 * det).sqrt();
        let expected = [(1.0 - root) / 2.0, (1.0 + root) / 2.0];
        let pairs = hermitian_eigen(&h, 1e-10).unwrap();
        for (p, e) in pairs.iter().zip(expected) {
            assert!((p.value.re - e).abs() < 1e-14, "{} vs {e}", p.value.re);
            assert!(p.value.re > 0.0);
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(hermitian_eigen(&m, 1e-10), Err(Error::NotHermitian { .. })));
        assert!(matches!(is_psd(&m, 1e-10), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn psd_checks() {
        assert!(is_psd(&ComplexMatrix::identity(2).scale_real(0.5), 1e-10).unwrap());
        assert!(!is_psd(&ComplexMatrix::from_diag(&[c(1.0), c(-1e-3)]), 1e-10).unwrap());
    }

    #[test]
    fn jordan_block_has_single_eigenvector() {
        let s = 1.0 / 3f64.sqrt();
        let m = ComplexMatrix::from_real_rows(&[&[s, s], &[0.0, s]]).unwrap();
        let pairs = eigen_general(&m).unwrap();
        assert_eq!(pairs.len(), 1);
        assert!((pairs[0].value - c(s)).norm() < 1e-12);
        assert!((pairs[0].vector[0].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_general() {
        let m = ComplexMatrix::from_diag(&[c(0.3), C64::new(0.1, 0.2)]);
        let pairs = eigen_general(&m).unwrap();
        assert_eq!(pairs.len(), 2);
        assert!((pairs[0].value - c(0.3)).norm() < 1e-15);
        assert!((pairs[0].vector[0].norm() - 1.0).abs() < 1e-15);
        assert!((pairs[1].value - C64::new(0.1, 0.2)).norm() < 1e-15);
        assert!((pairs[1].vector[1].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn swap_matrix() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let pairs = eigen_general(&m).unwrap();
        assert_eq!(pairs.len(), 2);
        let r = 1.0 / 2f64.sqrt();
        for p in pairs {
            let sign = p.value.re.signum();
            assert!((p.value.re.abs() - 1.0).abs() < 1e-15);
            let expected = [c(r), c(sign * r)];
            assert!((inner(&expected, &p.vector).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn general_3x3_residuals() {
        let m = ComplexMatrix::new(
            3,
            vec![
                C64::new(0.5, 0.1), C64::new(0.2, 0.0), C64::new(0.0, -0.3),
                C64::new(-0.1, 0.0), C64::new(0.3, 0.3), C64::new(0.4, 0.0),
                C64::new(0.0, 0.2), C64::new(0.1, -0.1), C64::new(-0.2, 0.0),
            ],
        )
        .unwrap();
        let pairs = eigen_general(&m).unwrap();
        assert_eq!(pairs.len(), 3);
        for p in &pairs {
            assert!(eigen_residual(&m, p.value, &p.vector) <= 1e-9);
        }
        let trace: C64 = pairs.iter().map(|p| p.value).sum();
        assert!((trace - m.trace()).norm() < 1e-10);
    }

    #[test]
    fn defective_3x3_is_flagged_or_resolved() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 1.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 2.0]]).unwrap();
        let dec = eigen_decomposition(&m, 1e-8).unwrap();
        for p in dec.pairs() {
            assert!(eigen_residual(&m, p.value, &p.vector) <= 1e-9);
        }
        let total: usize = dec.spaces.iter().map(|s| s.basis.len()).sum();
        assert!(total <= 2);
    }
}
