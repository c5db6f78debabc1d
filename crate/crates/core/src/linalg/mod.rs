//! Dense complex linear algebra for small matrices (`d <= 8`).

mod eigen;
pub mod kernel;
mod matrix;
mod nullspace;

pub use eigen::{
    eigen_decomposition, eigen_general, eigen_residual, hermitian_eigen, is_psd, min_eigenvalue, rayleigh,
    EigenDecomposition, EigenPair, Eigenspace,
};
pub use matrix::{
    basis_vector, canonical_phase, inner, norm, normalized, orthonormalize, ComplexMatrix, C64, ONE, ZERO,
};
pub use nullspace::{null_space, null_space_detailed, null_space_scaled, solve_linear, NullSpace};

/// Conjugate transpose.
pub fn adjoint(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint()
}
