//! The auxiliary channel `𝔏(ρ) = LρL* + RρR*` and its invariant states.

use serde::Serialize;

use crate::coin::{
    common_eigenvectors, Coin, DensityMatrix, ReducibilityReport, WordSearch, WordSearchOutcome,
};
use crate::error::{Error, Result};
use crate::io::MatrixJson;
use crate::linalg::{
    eigen_decomposition, hermitian_eigen, inner, norm, null_space_scaled, ComplexMatrix, C64,
};
use crate::Tolerances;

/// Matrix of `𝔏` on column-stacked vectorizations (`d² x d²`).
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl Superoperator {
    /// Dimension `d` of the internal space.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `unvec(M vec(X))`.
    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::unvectorize(self.dim, &self.matrix.apply(&x.vectorize()))
    }
}

/// `M = conj(L) ⊗ L + conj(R) ⊗ R`, from `vec(AXB) = (Bᵀ ⊗ A) vec(X)`.
pub fn build_superoperator(c: &Coin) -> Superoperator {
    let (l, r) = (c.left(), c.right());
    Superoperator {
        dim: c.dim(),
        matrix: &l.conj().kron(l) + &r.conj().kron(r),
    }
}

/// `LXL* + RXR*` for any operator `X`.
pub fn apply_aux_matrix(c: &Coin, x: &ComplexMatrix) -> ComplexMatrix {
    &ComplexMatrix::sandwich(c.left(), x) + &ComplexMatrix::sandwich(c.right(), x)
}

pub fn apply_aux(c: &Coin, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: c.dim(),
            found: rho.dim(),
        });
    }
    Ok(DensityMatrix::from_trusted(apply_aux_matrix(c, rho.matrix())))
}

/// `𝔏ⁿ(X)`.
pub fn iterate_aux(c: &Coin, x: &ComplexMatrix, n: usize) -> ComplexMatrix {
    (0..n).fold(x.clone(), |acc, _| apply_aux_matrix(c, &acc))
}

/// `max|𝔏(X) - X|`.
pub fn fixed_point_residual(c: &Coin, x: &ComplexMatrix) -> f64 {
    apply_aux_matrix(c, x).max_diff(x)
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantStateReport {
    /// Dimension of `ker(M - I)`.
    pub kernel_dim: usize,
    pub states: Vec<DensityMatrix>,
    pub unique: bool,
    /// Whether the unique state is strictly positive; false when not unique.
    pub faithful: bool,
    /// Smallest eigenvalue of the unique state.
    pub min_eigenvalue: Option<f64>,
    /// A pivot of the kernel computation sat within 10x of the rank threshold.
    pub marginal: bool,
}

impl InvariantStateReport {
    pub fn unique_state(&self) -> Option<&DensityMatrix> {
        if self.unique {
            self.states.first()
        } else {
            None
        }
    }
}

pub fn invariant_states(c: &Coin) -> Result<InvariantStateReport> {
    invariant_states_with(c, &Tolerances::default())
}

/// Invariant densities of `𝔏`, extracted from `ker(M - I)`.
///
/// Kernel vectors are only determined up to a complex factor, so each one is
/// split into its Hermitian parts `(V+V*)/2` and `(V-V*)/(2i)`; those with a
/// usable trace are normalized and kept if positive. The projection of
/// `vec(I/d)` onto the kernel is tried as well so that unital coins always
/// report `I/d`.
pub fn invariant_states_with(c: &Coin, tol: &Tolerances) -> Result<InvariantStateReport> {
    let d = c.dim();
    let sup = build_superoperator(c);
    let shifted = &sup.matrix - &ComplexMatrix::identity(d * d);
    // Scale by |M| as well: for nearly scalar coins |M - I| is pure rounding.
    let scale = shifted.frobenius_norm().max(sup.matrix.frobenius_norm());
    let ns = null_space_scaled(&shifted, tol.null_space, scale);
    let kernel_dim = ns.basis.len();
    let marginal = ns.marginal();

    let mut candidates: Vec<ComplexMatrix> = Vec::new();
    for v in &ns.basis {
        let m = ComplexMatrix::unvectorize(d, v);
        let adj = m.adjoint();
        candidates.push((&m + &adj).scale_real(0.5));
        candidates.push((&m - &adj).scale(C64::new(0.0, -0.5)));
    }
    if kernel_dim > 0 {
        let id = ComplexMatrix::identity(d).vectorize();
        let mut proj = vec![C64::new(0.0, 0.0); d * d];
        for b in &ns.basis {
            let coef = inner(b, &id);
            for (p, x) in proj.iter_mut().zip(b) {
                *p += coef * x;
            }
        }
        candidates.push(ComplexMatrix::unvectorize(d, &proj).hermitian_part());
    }

    let mut states: Vec<DensityMatrix> = Vec::new();
    for h in candidates {
        let tr = h.trace().re;
        if tr.abs() <= tol.invariant_psd {
            continue;
        }
        let rho = h.scale_real(1.0 / tr).hermitian_part();
        let min = hermitian_eigen(&rho, 1e-8)?[0].value.re;
        if min < -tol.invariant_psd || fixed_point_residual(c, &rho) > 1e-8 {
            continue;
        }
        if states.iter().any(|s| s.matrix().max_diff(&rho) <= 1e-8) {
            continue;
        }
        states.push(DensityMatrix::from_trusted(rho));
    }
    if states.is_empty() {
        return Err(Error::NoInvariantState);
    }

    let unique = kernel_dim == 1 && !marginal && states.len() == 1;
    let min_eigenvalue = if unique { Some(states[0].min_eigenvalue()) } else { None };
    Ok(InvariantStateReport {
        kernel_dim,
        faithful: matches!(min_eigenvalue, Some(m) if m > tol.faithful),
        states,
        unique,
        min_eigenvalue,
        marginal,
    })
}

/// Irreducibility evidence for `𝔏`: a unique faithful invariant state proves
/// irreducibility, a common eigenvector of `L` and `R` disproves it.
pub fn aux_irreducibility_evidence(c: &Coin) -> Result<ReducibilityReport> {
    let inv = invariant_states(c)?;
    let mut rep = ReducibilityReport::unknown();
    if inv.unique && inv.faithful {
        rep.aux_irreducible = Some(true);
        rep.witness = Some(format!(
            "unique faithful invariant state (min eigenvalue {:.3e})",
            inv.min_eigenvalue.unwrap_or(f64::NAN)
        ));
        return Ok(rep);
    }
    let ce = common_eigenvectors(c)?;
    if let Some(v) = ce.vectors.first() {
        rep.aux_irreducible = Some(false);
        rep.witness = Some(format!("common eigenvector {} of L and R", fmt_vec(v)));
    }
    Ok(rep)
}

fn fmt_vec(v: &[C64]) -> String {
    let parts: Vec<String> = v.iter().map(|z| format!("{:.6}{:+.6}i", z.re, z.im)).collect();
    format!("({})", parts.join(", "))
}

/// Longest word length accepted by [`oqw_irreducibility_search`].
pub const MAX_WORD_LEN: usize = 12;

/// Products `B_{s_l} ⋯ B_{s_1}` over all words with equally many `L` and `R`
/// of length at most `max_len`.
fn balanced_products(c: &Coin, max_len: usize) -> Vec<ComplexMatrix> {
    let d = c.dim();
    let mut out = Vec::new();
    // (product, #L, #R) for every prefix; extend one letter at a time.
    let mut layer = vec![(ComplexMatrix::identity(d), 0usize, 0usize)];
    for len in 1..=max_len {
        let half = max_len / 2;
        let mut next = Vec::with_capacity(layer.len() * 2);
        for (p, nl, nr) in &layer {
            if *nl < half {
                next.push((c.left() * p, nl + 1, *nr));
            }
            if *nr < half {
                next.push((c.right() * p, *nl, nr + 1));
            }
        }
        layer = next;
        if len % 2 == 0 {
            out.extend(layer.iter().filter(|(_, nl, nr)| nl == nr).map(|(p, _, _)| p.clone()));
        }
    }
    out
}

/// Distance of `Av` from the line through unit `v`, relative to `|A|_F`.
fn line_defect(a: &ComplexMatrix, v: &[C64]) -> f64 {
    let scale = a.frobenius_norm();
    if scale == 0.0 {
        return 0.0;
    }
    let av = a.apply(v);
    let coef = inner(v, &av);
    norm(&av.iter().zip(v).map(|(x, y)| x - coef * y).collect::<Vec<_>>()) / scale
}

/// Bounded search for a line left invariant by every balanced word.
///
/// Such a line is only a candidate obstruction to irreducibility of the walk:
/// longer words are never examined, so the search cannot certify either way.
pub fn oqw_irreducibility_search(c: &Coin, max_len: usize) -> Result<ReducibilityReport> {
    if !max_len.is_multiple_of(2) || max_len > MAX_WORD_LEN || max_len == 0 {
        return Err(Error::Config(format!(
            "word length bound must be even and in 2..={MAX_WORD_LEN}, got {max_len}"
        )));
    }
    let tol = Tolerances::default();
    let mut rep = ReducibilityReport::unknown();

    if c.dim() == 1 {
        rep.witness = Some("one-dimensional internal space has no proper subspace".into());
        rep.word_search = Some(WordSearch {
            max_len,
            words_checked: 0,
            outcome: WordSearchOutcome::NoObstruction,
        });
        return Ok(rep);
    }

    let products = balanced_products(c, max_len);
    let words_checked = products.len();

    // Candidate lines: eigenvectors of the first product that is not a multiple
    // of the identity. If every product is scalar, every line is invariant.
    let pivot = products.iter().find(|p| {
        let s = p.trace() / C64::new(c.dim() as f64, 0.0);
        (*p - &ComplexMatrix::identity(c.dim()).scale(s)).frobenius_norm() > tol.word_search * p.frobenius_norm()
    });
    let candidates: Vec<Vec<C64>> = match pivot {
        None => vec![crate::linalg::basis_vector(c.dim(), 0)],
        Some(p) => eigen_decomposition(p, tol.degeneracy_gap)?
            .spaces
            .into_iter()
            .flat_map(|s| s.basis)
            .collect(),
    };

    let found = candidates
        .into_iter()
        .find(|v| products.iter().all(|p| line_defect(p, v) <= tol.word_search));

    rep.witness = Some(match &found {
        Some(v) => format!(
            "line through {} is invariant under all {words_checked} balanced words of length <= {max_len}",
            fmt_vec(v)
        ),
        None => format!("no common invariant line among {words_checked} balanced words of length <= {max_len}"),
    });
    rep.word_search = Some(WordSearch {
        max_len,
        words_checked,
        outcome: match found {
            Some(line) => WordSearchOutcome::ReducibleCandidate { line },
            None => WordSearchOutcome::NoObstruction,
        },
    });
    Ok(rep)
}

/// JSON view of a report's states.
pub fn states_json(rep: &InvariantStateReport) -> Vec<MatrixJson> {
    rep.states.iter().map(|s| MatrixJson(s.matrix().clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn real(rows: &[&[f64]]) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(rows).unwrap()
    }

    #[test]
    fn diagonal_coin_fixes_e1() {
        let rho = DensityMatrix::pure(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        let out = apply_aux(&fixtures::pq_diagonal(), &rho).unwrap();
        assert!(out.matrix().max_diff(rho.matrix()) < 1e-15);
    }

    #[test]
    fn unitary_sum_fixes_maximally_mixed() {
        let c = fixtures::coin("unitary-sum").unwrap();
        let half = DensityMatrix::maximally_mixed(2);
        assert!(apply_aux(&c, &half).unwrap().matrix().max_diff(half.matrix()) < 1e-15);
    }

    #[test]
    fn superoperator_matches_direct_application() {
        for (name, c) in fixtures::reference_coins() {
            let sup = build_superoperator(&c);
            let d = c.dim();
            for i in 0..d {
                for j in 0..d {
                    let mut e = ComplexMatrix::zeros(d);
                    e[(i, j)] = C64::new(1.0, 0.5);
                    let diff = sup.apply(&e).max_diff(&apply_aux_matrix(&c, &e));
                    assert!(diff < 1e-14, "{name}: {diff}");
                }
            }
        }
    }

    #[test]
    fn classical_superoperator_is_one() {
        let sup = build_superoperator(&Coin::classical(0.3).unwrap());
        assert!((sup.matrix()[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn diagonal_superoperator_entries() {
        // Matrix units E_ij map to (L_ii L_jj + R_ii R_jj) E_ij.
        let sup = build_superoperator(&fixtures::pq_diagonal());
        let off = 2.0 * 2f64.sqrt() / 3.0;
        let expected = [1.0, off, off, 1.0];
        for (k, e) in expected.iter().enumerate() {
            assert!((sup.matrix()[(k, k)].re - e).abs() < 1e-15);
        }
    }

    #[test]
    fn antidiagonal_invariant_state() {
        let rep = invariant_states(&fixtures::pq_antidiagonal()).unwrap();
        assert!(rep.unique && rep.faithful);
        let expected = real(&[&[1.0 / 3.0, 0.0], &[0.0, 2.0 / 3.0]]);
        assert!(rep.states[0].matrix().max_diff(&expected) < 1e-12);
    }

    #[test]
    fn unbalanced_invariant_state() {
        let rep = invariant_states(&fixtures::unbalanced()).unwrap();
        assert!(rep.unique && rep.faithful);
        let o = (6.0 + 6f64.sqrt()) / 20.0;
        let expected = real(&[&[0.75, o], &[o, 0.25]]);
        assert!(rep.states[0].matrix().max_diff(&expected) < 1e-10);
    }

    #[test]
    fn common_e1_family_invariant_state_is_not_faithful() {
        for x in [0.1, 0.3, 0.45] {
            let rep = invariant_states(&fixtures::common_e1_family(x)).unwrap();
            assert!(rep.unique, "x = {x}");
            assert!(!rep.faithful);
            let expected = real(&[&[1.0, 0.0], &[0.0, 0.0]]);
            assert!(rep.states[0].matrix().max_diff(&expected) < 1e-10);
        }
    }

    #[test]
    fn diagonal_coin_has_two_dimensional_kernel() {
        let rep = invariant_states(&fixtures::pq_diagonal()).unwrap();
        assert_eq!(rep.kernel_dim, 2);
        assert!(!rep.unique);
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(rep.states.iter().any(|s| s.matrix().max_diff(&half) < 1e-12));
    }

    #[test]
    fn fixed_point_iteration_agrees() {
        for c in [fixtures::pq_antidiagonal(), fixtures::unbalanced(), fixtures::qutrit()] {
            let rep = invariant_states(&c).unwrap();
            let start = ComplexMatrix::identity(c.dim()).scale_real(1.0 / c.dim() as f64);
            let it = iterate_aux(&c, &start, 2000);
            assert!(it.max_diff(rep.states[0].matrix()) < 1e-6);
        }
    }

    #[test]
    fn irreducibility_evidence() {
        assert_eq!(aux_irreducibility_evidence(&fixtures::triangular()).unwrap().aux_irreducible, Some(true));
        assert_eq!(
            aux_irreducibility_evidence(&fixtures::common_e1_family(0.3)).unwrap().aux_irreducible,
            Some(false)
        );
        assert_eq!(aux_irreducibility_evidence(&fixtures::pq_diagonal()).unwrap().aux_irreducible, Some(false));
    }

    fn outcome(c: &Coin, len: usize) -> WordSearchOutcome {
        oqw_irreducibility_search(c, len).unwrap().word_search.unwrap().outcome
    }

    #[test]
    fn word_search() {
        assert!(matches!(
            outcome(&fixtures::pq_diagonal(), 4),
            WordSearchOutcome::ReducibleCandidate { .. }
        ));
        assert_eq!(outcome(&fixtures::triangular(), 6), WordSearchOutcome::NoObstruction);
        let h = 0.5f64.sqrt();
        let us = fixtures::unitary_sum(C64::new(h, 0.0), C64::new(h, 0.0)).unwrap();
        assert_eq!(outcome(&us, 6), WordSearchOutcome::NoObstruction);
        assert!(oqw_irreducibility_search(&us, 5).is_err());
        assert!(oqw_irreducibility_search(&us, 14).is_err());
    }

    #[test]
    fn balanced_word_counts() {
        // Σ_{k=1..3} C(2k, k) = 2 + 6 + 20.
        let n = oqw_irreducibility_search(&fixtures::triangular(), 6)
            .unwrap()
            .word_search
            .unwrap()
            .words_checked;
        assert_eq!(n, 28);
    }
}
