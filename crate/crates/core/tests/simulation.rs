use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oqw_core::coin::{common_eigenvectors, DensityMatrix};
use oqw_core::dynamics::first_return_series;
use oqw_core::fixtures;
use oqw_core::linalg::ComplexMatrix;
use oqw_core::montecarlo::{estimate_absorption, estimate_drift, estimate_return, step_trajectory, SimConfig, TrajectoryState};

#[test]
fn return_frequency_matches_exact_first_return() {
    let mut coins = fixtures::reference_coins();
    coins.extend(fixtures::unitary_sum_samples());
    let horizon = 200;
    for (k, (name, c)) in coins.into_iter().enumerate() {
        let init = DensityMatrix::maximally_mixed(c.dim());
        let exact = first_return_series(&c, init.matrix(), horizon).unwrap().total();
        let cfg = SimConfig::new(500 + k as u64, 4000, horizon as u64, init);
        let mc = estimate_return(&c, &cfg).unwrap();
        let diff = (mc.point_estimate - exact).abs();
        assert!(
            diff <= (4.0 * mc.std_error).max(1e-12),
            "{name}: MC {} ± {} vs exact {exact}",
            mc.point_estimate,
            mc.std_error
        );
    }
}

#[test]
fn eigenvector_states_stay_put() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (name, c) in fixtures::reference_coins() {
        for v in common_eigenvectors(&c).unwrap().vectors {
            let sigma = DensityMatrix::pure(&v).unwrap();
            let mut s = TrajectoryState {
                position: 0,
                internal: sigma.clone(),
                time: 0,
            };
            for _ in 0..500 {
                s = step_trajectory(&s, &c, rng.gen());
                assert!(s.internal.matrix().max_diff(sigma.matrix()) <= 1e-12, "{name}");
            }
        }
    }
}

#[test]
fn long_trajectories_stay_normalized() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for c in [fixtures::unbalanced(), fixtures::triangular(), fixtures::qutrit()] {
        let mut s = TrajectoryState {
            position: 0,
            internal: DensityMatrix::maximally_mixed(c.dim()),
            time: 0,
        };
        let mut worst = 0.0f64;
        for n in 0..1_000_000u32 {
            s = step_trajectory(&s, &c, rng.gen());
            if n % 1000 == 0 {
                let m: &ComplexMatrix = s.internal.matrix();
                worst = worst.max((m.trace().re - 1.0).abs()).max(m.hermitian_deviation());
            }
        }
        assert!(worst <= 1e-9, "{worst}");
        assert_eq!(s.time, 1_000_000);
    }
}

fn pure(k: usize) -> DensityMatrix {
    DensityMatrix::pure(&oqw_core::linalg::basis_vector(2, k)).unwrap()
}

#[test]
fn drift_examples() {
    let rho_inf = DensityMatrix::new(ComplexMatrix::from_real_rows(&[&[1.0 / 3.0, 0.0], &[0.0, 2.0 / 3.0]]).unwrap(), 1e-12).unwrap();
    let cases = [
        (fixtures::pq_antidiagonal(), rho_inf, -1.0 / 9.0),
        (fixtures::triangular(), DensityMatrix::maximally_mixed(2), 0.0),
        (oqw_core::coin::Coin::classical(0.5).unwrap(), DensityMatrix::maximally_mixed(1), 0.0),
    ];
    for (k, (c, init, mu)) in cases.into_iter().enumerate() {
        let e = estimate_drift(&c, &SimConfig::new(90 + k as u64, 2000, 2000, init)).unwrap();
        assert!((e.point_estimate - mu).abs() <= 3.0 * e.std_error, "{k}: {e:?}");
    }
}

#[test]
fn return_examples() {
    let tri = estimate_return(&fixtures::triangular(), &SimConfig::new(1, 2000, 10_000, DensityMatrix::maximally_mixed(2))).unwrap();
    assert!(tri.point_estimate >= 0.97, "{tri:?}");

    let c = fixtures::pq_antidiagonal();
    let init = DensityMatrix::maximally_mixed(2);
    let exact = first_return_series(&c, init.matrix(), 2000).unwrap().total();
    let e = estimate_return(&c, &SimConfig::new(2, 2000, 2000, init)).unwrap();
    assert!(e.point_estimate <= exact + 3.0 * e.std_error, "{e:?} vs {exact}");
    assert!(e.point_estimate < 0.95);
}

#[test]
fn absorption_examples() {
    let u = estimate_absorption(&fixtures::unbalanced(), 1, &SimConfig::new(3, 2000, 10_000, DensityMatrix::maximally_mixed(2))).unwrap();
    assert!(u.point_estimate >= 0.99, "{u:?}");

    let c = fixtures::pq_mixed();
    let e1 = estimate_absorption(&c, 1, &SimConfig::new(4, 2000, 10_000, pure(0))).unwrap();
    assert!((e1.point_estimate - 0.5).abs() <= 3.0 * e1.std_error + 0.01, "{e1:?}");
    let e2 = estimate_absorption(&c, 1, &SimConfig::new(5, 2000, 10_000, pure(1))).unwrap();
    assert!(e2.point_estimate >= 0.97, "{e2:?}");
}
