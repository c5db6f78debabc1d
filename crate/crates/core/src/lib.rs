//! Recurrence, transience and absorption analysis for homogeneous open quantum
//! random walks on the integer line.
//!
//! A walk is specified by a [`Coin`](coin::Coin): a pair of `d x d` matrices
//! `(L, R)` with `L*L + R*R = I`. At each step a particle at site `i` carrying
//! internal state `ρ` moves to `i - 1` with probability `Tr(LρL*)` or to `i + 1`
//! with probability `Tr(RρR*)`, its state updated accordingly.
//!
//! The crate classifies such walks through the invariant state of the
//! auxiliary channel `ρ ↦ LρL* + RρR*` ([`aux_map`], [`classify`]) and checks
//! the verdicts against exact lattice evolution ([`dynamics`]) and quantum
//! trajectory Monte Carlo ([`montecarlo`]).

pub mod aux_map;
pub mod classify;
pub mod coin;
pub mod dynamics;
mod error;
pub mod expr;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod montecarlo;
mod tolerance;

pub use error::{Error, Result};
pub use tolerance::Tolerances;
