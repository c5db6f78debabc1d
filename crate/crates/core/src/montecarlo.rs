//! Quantum-trajectory simulation of the chain `(xₙ, ρₙ)`.
//!
//! Trajectory `k` draws its uniforms from ChaCha8 seeded with
//! `child_seed(master_seed, k)`, so every trajectory is reproducible on its own
//! and results do not depend on how trajectories are spread over threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::coin::{Coin, DensityMatrix};
use crate::dynamics::FLUSH;
use crate::error::{Error, Result};
use crate::linalg::{kernel, ComplexMatrix, C64, ZERO};

/// Below this branch probability a step is forced to the other side.
pub const BRANCH_GUARD: f64 = 1e-14;

/// Per-trajectory seed: the SplitMix64 finalizer applied to
/// `master + (index + 1) · 0x9E3779B97F4A7C15`.
pub fn child_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryState {
    pub position: i64,
    pub internal: DensityMatrix,
    pub time: u64,
}

/// One step driven by the uniform `u ∈ [0, 1)`: left with probability
/// `Tr(LρL*)`, with the internal state conditioned on the outcome.
pub fn step_trajectory(s: &TrajectoryState, c: &Coin, u: f64) -> TrajectoryState {
    let mut st = Stepper::new(c);
    let mut rho = s.internal.matrix().entries().to_vec();
    let dx = st.step(&mut rho, u);
    TrajectoryState {
        position: s.position + dx,
        internal: DensityMatrix::from_trusted(ComplexMatrix::new(c.dim(), rho).expect("finite state")),
        time: s.time + 1,
    }
}

/// Preallocated buffers for repeated trajectory steps.
struct Stepper {
    d: usize,
    l: Vec<C64>,
    l_adj: Vec<C64>,
    r: Vec<C64>,
    r_adj: Vec<C64>,
    l_gram: Vec<C64>,
    tmp: Vec<C64>,
    out: Vec<C64>,
}

impl Stepper {
    fn new(c: &Coin) -> Self {
        let dd = c.dim() * c.dim();
        Self {
            d: c.dim(),
            l: c.left().entries().to_vec(),
            l_adj: c.left().adjoint().entries().to_vec(),
            r: c.right().entries().to_vec(),
            r_adj: c.right().adjoint().entries().to_vec(),
            l_gram: c.left_gram().entries().to_vec(),
            tmp: vec![ZERO; dd],
            out: vec![ZERO; dd],
        }
    }

    /// Updates `rho` in place and returns the displacement.
    fn step(&mut self, rho: &mut [C64], u: f64) -> i64 {
        let d = self.d;
        let p_left = kernel::trace_product_re(&self.l_gram, rho, d).clamp(0.0, 1.0);
        let go_left = if p_left < BRANCH_GUARD {
            false
        } else if 1.0 - p_left < BRANCH_GUARD {
            true
        } else {
            u < p_left
        };
        let (a, a_adj) = if go_left {
            (&self.l, &self.l_adj)
        } else {
            (&self.r, &self.r_adj)
        };
        kernel::sandwich(a, a_adj, rho, &mut self.tmp, &mut self.out, d, false);
        // Renormalize by the actual trace of the branch and re-Hermitize.
        let tr = kernel::trace_re(&self.out, d);
        let inv = 1.0 / tr;
        for i in 0..d {
            for j in 0..d {
                let x = self.out[i * d + j];
                let y = self.out[j * d + i].conj();
                let mut z = (x + y) * (0.5 * inv);
                // Keep clear of subnormals, which slow the arithmetic badly.
                if z.re.abs() < FLUSH {
                    z.re = 0.0;
                }
                if z.im.abs() < FLUSH {
                    z.im = 0.0;
                }
                rho[i * d + j] = z;
            }
        }
        if go_left {
            -1
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub master_seed: u64,
    pub n_trajectories: usize,
    pub horizon: u64,
    pub init: DensityMatrix,
    /// Starting site (used by absorption runs; other runs start at 0).
    pub start: i64,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
}

impl SimConfig {
    pub fn new(master_seed: u64, n_trajectories: usize, horizon: u64, init: DensityMatrix) -> Self {
        Self {
            master_seed,
            n_trajectories,
            horizon,
            init,
            start: 0,
            workers: None,
        }
    }

    fn validate(&self, c: &Coin) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.n_trajectories < 1 {
            return Err(Error::Config("at least one trajectory is required".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("worker count must be positive".into()));
        }
        if self.init.dim() != c.dim() {
            return Err(Error::DimensionMismatch {
                expected: c.dim(),
                found: self.init.dim(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    /// `x_H / H`.
    Drift,
    /// Fraction of trajectories back at the start by the horizon.
    ReturnByHorizon,
    /// Fraction absorbed at 0 by the horizon.
    AbsorbedByHorizon,
    /// Mean number of visits to the start site in steps `1..=H`.
    MeanVisits,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub quantity: Quantity,
    pub horizon: u64,
    pub point_estimate: f64,
    /// Sample standard deviation over `√n_samples`.
    pub std_error: f64,
    pub n_samples: usize,
}

/// What to simulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    Drift,
    Return,
    Absorption { start: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrajectorySummary {
    pub index: usize,
    /// First return time (or absorption time), if it happened.
    pub hit_time: Option<u64>,
    pub visits: u64,
    pub final_position: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutcome {
    pub estimates: Vec<EstimateReport>,
    pub trajectories: Vec<TrajectorySummary>,
}

impl SimulationOutcome {
    /// CSV `trajectory_index,t0_or_-1,visits,final_position`.
    pub fn trajectories_csv(&self, comment: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(c) = comment {
            for line in c.lines() {
                out.push_str("# ");
                out.push_str(line);
                out.push('\n');
            }
        }
        out.push_str("trajectory_index,t0_or_-1,visits,final_position\n");
        for t in &self.trajectories {
            let hit = t.hit_time.map_or(-1, |h| h as i64);
            out.push_str(&format!("{},{},{},{}\n", t.index, hit, t.visits, t.final_position));
        }
        out
    }
}

fn run_one(c: &Coin, cfg: &SimConfig, exp: Experiment, index: usize) -> TrajectorySummary {
    let mut rng = ChaCha8Rng::seed_from_u64(child_seed(cfg.master_seed, index as u64));
    let mut st = Stepper::new(c);
    let mut rho = cfg.init.matrix().entries().to_vec();
    let (origin, mut x) = match exp {
        Experiment::Absorption { start } => (0, start),
        _ => (0, 0),
    };
    let mut hit_time = None;
    let mut visits = 0;
    for n in 1..=cfg.horizon {
        let u: f64 = rng.gen();
        x += st.step(&mut rho, u);
        if x == origin {
            visits += 1;
            if hit_time.is_none() {
                hit_time = Some(n);
                if matches!(exp, Experiment::Absorption { .. }) {
                    break;
                }
            }
        }
    }
    TrajectorySummary {
        index,
        hit_time,
        visits,
        final_position: x,
    }
}

fn estimate(quantity: Quantity, horizon: u64, samples: impl Iterator<Item = f64> + Clone) -> EstimateReport {
    let n = samples.clone().count();
    let mean = samples.clone().sum::<f64>() / n as f64;
    let var = if n > 1 {
        samples.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    EstimateReport {
        quantity,
        horizon,
        point_estimate: mean,
        std_error: (var / n as f64).sqrt(),
        n_samples: n,
    }
}

/// Runs every trajectory and aggregates in index order.
pub fn simulate(c: &Coin, cfg: &SimConfig, exp: Experiment) -> Result<SimulationOutcome> {
    cfg.validate(c)?;
    if let Experiment::Absorption { start } = exp {
        if start < 1 {
            return Err(Error::InvalidStart { start });
        }
    }
    let run = || -> Vec<TrajectorySummary> {
        (0..cfg.n_trajectories)
            .into_par_iter()
            .map(|k| run_one(c, cfg, exp, k))
            .collect()
    };
    let trajectories = match cfg.workers {
        None => run(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(run),
    };

    let h = cfg.horizon;
    let hit = |t: &TrajectorySummary| if t.hit_time.is_some() { 1.0 } else { 0.0 };
    let estimates = match exp {
        Experiment::Drift => vec![estimate(
            Quantity::Drift,
            h,
            trajectories.iter().map(|t| t.final_position as f64 / h as f64),
        )],
        Experiment::Return => vec![
            estimate(Quantity::ReturnByHorizon, h, trajectories.iter().map(hit)),
            estimate(Quantity::MeanVisits, h, trajectories.iter().map(|t| t.visits as f64)),
        ],
        Experiment::Absorption { .. } => {
            vec![estimate(Quantity::AbsorbedByHorizon, h, trajectories.iter().map(hit))]
        }
    };
    Ok(SimulationOutcome { estimates, trajectories })
}

/// Mean of `x_H / H` from site 0.
pub fn estimate_drift(c: &Coin, cfg: &SimConfig) -> Result<EstimateReport> {
    Ok(simulate(c, cfg, Experiment::Drift)?.estimates.remove(0))
}

/// Fraction of trajectories from `(0, ρ)` that revisit 0 by the horizon.
pub fn estimate_return(c: &Coin, cfg: &SimConfig) -> Result<EstimateReport> {
    Ok(simulate(c, cfg, Experiment::Return)?.estimates.remove(0))
}

/// Fraction of trajectories from `(m, ρ)` absorbed at 0 by the horizon.
pub fn estimate_absorption(c: &Coin, m: i64, cfg: &SimConfig) -> Result<EstimateReport> {
    Ok(simulate(c, cfg, Experiment::Absorption { start: m })?.estimates.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::linalg::basis_vector;

    fn e1() -> DensityMatrix {
        DensityMatrix::pure(&basis_vector(2, 0)).unwrap()
    }

    #[test]
    fn eigenvector_state_is_preserved() {
        let c = fixtures::pq_diagonal();
        let s = TrajectoryState {
            position: 0,
            internal: e1(),
            time: 0,
        };
        let left = step_trajectory(&s, &c, 0.2);
        assert_eq!(left.position, -1);
        assert!(left.internal.matrix().max_diff(e1().matrix()) < 1e-15);
        let right = step_trajectory(&s, &c, 0.9);
        assert_eq!(right.position, 1);
        assert!(right.internal.matrix().max_diff(e1().matrix()) < 1e-15);
    }

    #[test]
    fn guard_forces_possible_branch() {
        // From e₂ the unitary-sum coin (a = 1, b = 0) can only move right.
        let c = fixtures::unitary_sum(C64::new(1.0, 0.0), C64::new(0.0, 0.0)).unwrap();
        let s = TrajectoryState {
            position: 0,
            internal: DensityMatrix::pure(&basis_vector(2, 1)).unwrap(),
            time: 0,
        };
        let next = step_trajectory(&s, &c, 0.0);
        assert_eq!(next.position, 1);
        assert!((next.internal.matrix().trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn seeds_differ_per_trajectory() {
        assert_ne!(child_seed(7, 0), child_seed(7, 1));
        assert_ne!(child_seed(7, 0), child_seed(8, 0));
    }

    #[test]
    fn classical_absorption_by_gamblers_ruin() {
        let c = Coin::classical(1.0 / 3.0).unwrap();
        let cfg = SimConfig::new(11, 4000, 2000, DensityMatrix::maximally_mixed(1));
        let r = estimate_absorption(&c, 1, &cfg).unwrap();
        assert!((r.point_estimate - 0.5).abs() < 3.0 * r.std_error + 0.01, "{r:?}");
    }

    #[test]
    fn classical_return_probability() {
        // Left probability 1/3: the walk returns with probability 1 - |1 - 2/3| = 2/3.
        let c = Coin::classical(1.0 / 3.0).unwrap();
        let cfg = SimConfig::new(5, 4000, 2000, DensityMatrix::maximally_mixed(1));
        let r = estimate_return(&c, &cfg).unwrap();
        assert!((r.point_estimate - 2.0 / 3.0).abs() < 3.0 * r.std_error + 0.01, "{r:?}");
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let c = fixtures::triangular();
        let mut cfg = SimConfig::new(42, 64, 200, DensityMatrix::maximally_mixed(2));
        cfg.workers = Some(1);
        let a = simulate(&c, &cfg, Experiment::Return).unwrap();
        cfg.workers = Some(3);
        let b = simulate(&c, &cfg, Experiment::Return).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_configs() {
        let c = fixtures::triangular();
        let cfg = SimConfig::new(1, 0, 10, DensityMatrix::maximally_mixed(2));
        assert!(estimate_drift(&c, &cfg).is_err());
        let cfg = SimConfig::new(1, 10, 10, DensityMatrix::maximally_mixed(2));
        assert!(matches!(estimate_absorption(&c, 0, &cfg), Err(Error::InvalidStart { start: 0 })));
        let cfg = SimConfig::new(1, 10, 10, DensityMatrix::maximally_mixed(3));
        assert!(estimate_drift(&c, &cfg).is_err());
    }

    #[test]
    fn trajectory_csv() {
        let c = fixtures::triangular();
        let cfg = SimConfig::new(3, 3, 5, DensityMatrix::maximally_mixed(2));
        let out = simulate(&c, &cfg, Experiment::Return).unwrap();
        let csv = out.trajectories_csv(None);
        assert!(csv.starts_with("trajectory_index,t0_or_-1,visits,final_position\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}
