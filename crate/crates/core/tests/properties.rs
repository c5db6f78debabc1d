use proptest::prelude::*;

use oqw_core::aux_map::{apply_aux_matrix, build_superoperator, fixed_point_residual, invariant_states, iterate_aux};
use oqw_core::classify::{classify, classify_absorption, classify_dim2, classify_general, Absorption, Verdict};
use oqw_core::coin::{common_eigenvectors, walk_reducibility_dim2, Coin, DensityMatrix};
use oqw_core::dynamics::LatticeState;
use oqw_core::fixtures;
use oqw_core::io::{parse_coin, serialize_coin};
use oqw_core::linalg::{hermitian_eigen, inner, null_space, orthonormalize, ComplexMatrix, C64};

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len).prop_map(|v| v.into_iter().map(|(a, b)| C64::new(a, b)).collect())
}

fn square(d: usize) -> impl Strategy<Value = ComplexMatrix> {
    complex_vec(d * d).prop_map(move |e| ComplexMatrix::new(d, e).unwrap())
}

fn hermitian(d: usize) -> impl Strategy<Value = ComplexMatrix> {
    square(d).prop_map(|a| (&a + &a.adjoint()).scale_real(0.5))
}

fn density(d: usize) -> impl Strategy<Value = ComplexMatrix> {
    square(d).prop_map(|a| {
        let p = &a * &a.adjoint();
        let t = p.trace().re;
        p.scale_real(1.0 / t)
    })
}

/// Orthonormalized columns of a random matrix.
fn unitary(d: usize) -> impl Strategy<Value = ComplexMatrix> {
    square(d).prop_filter_map("rank deficient", move |a| {
        let cols: Vec<Vec<C64>> = (0..d).map(|j| (0..d).map(|i| a[(i, j)]).collect()).collect();
        let q = orthonormalize(&cols, 1e-6);
        (q.len() == d).then(|| ComplexMatrix::from_rows((0..d).map(|i| (0..d).map(|j| q[j][i]).collect()).collect()).unwrap())
    })
}

/// Random valid coin: `[L; R]` is a random `2d x d` isometry.
fn coin(d: usize) -> impl Strategy<Value = Coin> {
    complex_vec(2 * d * d).prop_filter_map("rank deficient", move |e| {
        let cols: Vec<Vec<C64>> = (0..d).map(|j| (0..2 * d).map(|i| e[i * d + j]).collect()).collect();
        let q = orthonormalize(&cols, 1e-6);
        if q.len() < d {
            return None;
        }
        let block = |off: usize| ComplexMatrix::from_rows((0..d).map(|i| (0..d).map(|j| q[j][i + off]).collect()).collect()).unwrap();
        Coin::new(block(0), block(d)).ok()
    })
}

fn reference() -> Vec<(String, Coin)> {
    let mut v = fixtures::reference_coins();
    v.extend(fixtures::unitary_sum_samples());
    v
}

fn same_lines(a: &[Vec<C64>], b: &[Vec<C64>]) -> bool {
    a.len() == b.len() && a.iter().all(|u| b.iter().any(|v| inner(u, v).norm() > 1.0 - 1e-8))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hermitian_eigen_reconstructs(h in (1usize..=4).prop_flat_map(hermitian)) {
        let d = h.dim();
        let pairs = hermitian_eigen(&h, 1e-12).unwrap();
        let mut rec = ComplexMatrix::zeros(d);
        for p in &pairs {
            prop_assert!(p.value.im == 0.0);
            rec = &rec + &ComplexMatrix::outer(&p.vector).scale(p.value);
        }
        prop_assert!(rec.max_diff(&h) <= 1e-10 * h.max_abs().max(1e-300));
        for (i, p) in pairs.iter().enumerate() {
            for (j, q) in pairs.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                prop_assert!((inner(&p.vector, &q.vector) - expected).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn adjoint_is_an_anti_homomorphic_involution((a, b) in (1usize..=4).prop_flat_map(|d| (square(d), square(d)))) {
        prop_assert_eq!(a.adjoint().adjoint(), a.clone());
        let lhs = (&a * &b).adjoint();
        let rhs = &b.adjoint() * &a.adjoint();
        prop_assert!(lhs.max_diff(&rhs) < 1e-15);
    }

    #[test]
    fn random_coins_preserve_trace((c, rho) in (1usize..=3).prop_flat_map(|d| (coin(d), density(d)))) {
        let t = ComplexMatrix::sandwich(c.left(), &rho).trace().re + ComplexMatrix::sandwich(c.right(), &rho).trace().re;
        prop_assert!((t - 1.0).abs() < 1e-10);
    }

    #[test]
    fn coin_serialization_round_trips(c in (1usize..=3).prop_flat_map(coin)) {
        let text = serialize_coin(&c);
        let back = parse_coin(&text).unwrap();
        prop_assert_eq!(back.left().entries(), c.left().entries());
        prop_assert_eq!(back.right().entries(), c.right().entries());
        prop_assert_eq!(serialize_coin(&back), text);
    }

    #[test]
    fn common_eigenvectors_ignore_phases(theta in 0.0f64..6.3, phi in 0.0f64..6.3) {
        for (name, c) in reference() {
            let a = common_eigenvectors(&c).unwrap();
            let b = common_eigenvectors(&c.with_phases(theta, phi)).unwrap();
            prop_assert!(same_lines(&a.vectors, &b.vectors), "{}", name);
        }
    }

    #[test]
    fn aux_map_preserves_trace_and_positivity(rhos in prop::collection::vec(density(2), 20), rho3 in prop::collection::vec(density(3), 20)) {
        for (_, c) in reference() {
            let pool = if c.dim() == 2 { &rhos } else { &rho3 };
            for rho in pool {
                let out = apply_aux_matrix(&c, rho);
                prop_assert!((out.trace().re - 1.0).abs() < 1e-12);
                prop_assert!(DensityMatrix::new(out, 1e-10).is_ok());
            }
        }
    }

    #[test]
    fn invariant_state_is_unitarily_covariant(u in unitary(2)) {
        for (name, c) in reference().into_iter().filter(|(_, c)| c.dim() == 2) {
            let rep = invariant_states(&c).unwrap();
            let Some(rho) = rep.unique_state() else { continue };
            let cu = c.conjugated(&u).unwrap();
            let rep_u = invariant_states(&cu).unwrap();
            let rho_u = rep_u.unique_state().expect("uniqueness is basis independent");
            prop_assert!(rho_u.matrix().max_diff(rho.conjugated(&u).matrix()) <= 1e-8, "{}", name);
            prop_assert!(fixed_point_residual(&cu, rho_u.matrix()) <= 1e-8);
        }
    }

    #[test]
    fn dim2_verdicts_are_unitarily_covariant(u in unitary(2)) {
        for (name, c) in reference().into_iter().filter(|(_, c)| c.dim() == 2) {
            let a = classify_dim2(&c, 1e-9).unwrap();
            let b = classify_dim2(&c.conjugated(&u).unwrap(), 1e-9).unwrap();
            prop_assert_eq!(a.verdict.name(), b.verdict.name(), "{}", name);
            if let (Verdict::MixedTransientOnly { sigma: s, .. }, Verdict::MixedTransientOnly { sigma: t, .. }) = (&a.verdict, &b.verdict) {
                prop_assert!(t.matrix().max_diff(s.conjugated(&u).matrix()) <= 1e-8);
            }
        }
    }

    #[test]
    fn dim2_verdicts_ignore_phases(theta in 0.0f64..6.3, phi in 0.0f64..6.3) {
        for (name, c) in reference().into_iter().filter(|(_, c)| c.dim() == 2) {
            let a = classify_dim2(&c, 1e-9).unwrap();
            let b = classify_dim2(&c.with_phases(theta, phi), 1e-9).unwrap();
            prop_assert_eq!(a.verdict.name(), b.verdict.name(), "{}", name);
        }
    }

    #[test]
    fn dim2_criterion_is_exhaustive(c in coin(2)) {
        let r = classify_dim2(&c, 1e-9).unwrap();
        if !r.marginal_kernel {
            prop_assert!(!matches!(r.verdict, Verdict::Inconclusive { .. }), "{:?}", r.verdict);
        }
        let g = classify_general(&c, 1e-9).unwrap();
        if !matches!(g.verdict, Verdict::Inconclusive { .. }) {
            prop_assert_eq!(g.verdict.name(), r.verdict.name());
        }
    }

    #[test]
    fn random_three_dim_coins_never_fail(c in coin(3)) {
        let r = classify(&c, 1e-9).unwrap();
        let a = classify_absorption(&c, 1e-9).unwrap();
        if let Some(rho) = r.invariant_state.as_ref() {
            prop_assert!(fixed_point_residual(&c, rho.matrix()) <= 1e-8);
        }
        prop_assert_eq!(r.trace_values.len(), a.trace_values.len());
    }
}

#[test]
fn null_space_vectors_are_annihilated() {
    for (name, c) in reference() {
        let m = build_superoperator(&c).matrix() - &ComplexMatrix::identity(c.dim() * c.dim());
        let f = m.frobenius_norm();
        for v in null_space(&m, 1e-10) {
            let mv = m.apply(&v);
            let n = mv.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!(n <= 1e-8 * f, "{name}: {n}");
        }
    }
}

#[test]
fn diagonalizing_basis_diagonalizes_both_matrices() {
    for (name, c) in reference().into_iter().filter(|(_, c)| c.dim() == 2) {
        let rep = common_eigenvectors(&c).unwrap();
        if rep.count != 2 {
            continue;
        }
        let (u1, u2) = (&rep.vectors[0], &rep.vectors[1]);
        for m in [c.left(), c.right()] {
            assert!(inner(u2, &m.apply(u1)).norm() < 1e-8, "{name}");
            assert!(inner(u1, &m.apply(u2)).norm() < 1e-8, "{name}");
        }
    }
}

#[test]
fn unital_coins_fix_the_maximally_mixed_state() {
    let mut seen = 0;
    for (name, c) in reference() {
        if !c.is_unital(1e-10) {
            continue;
        }
        seen += 1;
        let rep = invariant_states(&c).unwrap();
        let half = ComplexMatrix::identity(c.dim()).scale_real(1.0 / c.dim() as f64);
        assert!(rep.states.iter().any(|s| s.matrix().max_diff(&half) < 1e-8), "{name}");
    }
    assert!(seen >= 2);
}

#[test]
fn fixed_point_iteration_matches_kernel() {
    for (name, c) in reference() {
        let rep = invariant_states(&c).unwrap();
        let Some(rho) = rep.unique_state() else { continue };
        let x = DensityMatrix::maximally_mixed(c.dim()).into_matrix();
        let a = iterate_aux(&c, &x, 2000);
        let b = apply_aux_matrix(&c, &a);
        // Skip periodic or slowly mixing maps, where the iterate has not settled.
        if a.max_diff(&b) > 1e-9 {
            continue;
        }
        assert!(a.max_diff(rho.matrix()) <= 1e-6, "{name}");
    }
}

#[test]
fn recurrent_irreducible_dim2_coins_are_absorbing() {
    for (name, c) in reference().into_iter().filter(|(_, c)| c.dim() == 2) {
        let red = walk_reducibility_dim2(&c).unwrap();
        if red.walk_reducible != Some(false) {
            continue;
        }
        if matches!(classify(&c, 1e-9).unwrap().verdict, Verdict::Recurrent) {
            let a = classify_absorption(&c, 1e-9).unwrap();
            assert!(matches!(a.verdict, Absorption::Absorbing), "{name}: {:?}", a.verdict);
        }
    }
}

#[test]
fn parity_is_exact() {
    for (name, c) in reference() {
        let x = DensityMatrix::maximally_mixed(c.dim()).into_matrix();
        let mut s = LatticeState::point_mass(&x, 0, -101, 101).unwrap();
        for n in 1..=100i64 {
            s.step(&c).unwrap();
            for site in -100..=100i64 {
                if (site + n) % 2 != 0 {
                    assert!(s.block(site).entries().iter().all(|z| *z == C64::new(0.0, 0.0)), "{name} n={n} site={site}");
                }
            }
        }
    }
}
