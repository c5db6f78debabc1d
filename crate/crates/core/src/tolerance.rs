//! Numerical tolerances used across the crate.
//!
//! Every threshold that decides a discrete outcome (rank, uniqueness,
//! criticality, eigenvector identity) lives here so that callers can audit
//! and override them in one place.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Max-entry residual allowed in `L*L + R*R = I`.
    pub coin: f64,
    /// Max-entry deviation from Hermiticity.
    pub hermitian: f64,
    /// Smallest eigenvalue accepted by PSD checks is `-psd`.
    pub psd: f64,
    /// Relative pivot threshold for kernel computations.
    pub null_space: f64,
    /// Residual `|Mv - λv|` accepted when matching eigenvectors.
    pub eigen_match: f64,
    /// Two unit vectors are the same line when `|<u,v>| > 1 - phase_dedup`.
    pub phase_dedup: f64,
    /// Relative eigenvalue gap below which a 2x2 matrix is treated as degenerate.
    pub degeneracy_gap: f64,
    /// Distance from 1/2 at which a trace value counts as critical.
    pub half: f64,
    /// PSD and trace filters applied to invariant-state candidates.
    pub invariant_psd: f64,
    /// Minimum eigenvalue for a density to count as faithful.
    pub faithful: f64,
    /// Residual accepted for common invariant lines in the word search.
    pub word_search: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            coin: 1e-10,
            hermitian: 1e-10,
            psd: 1e-10,
            null_space: 1e-10,
            eigen_match: 1e-9,
            phase_dedup: 1e-9,
            degeneracy_gap: 1e-8,
            half: 1e-9,
            invariant_psd: 1e-8,
            faithful: 1e-8,
            word_search: 1e-8,
        }
    }
}
