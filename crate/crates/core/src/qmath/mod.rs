//! Dense complex linear algebra for the small dimensions (≤ 16) this crate
//! needs: a 4-level density matrix and, at most, its 16-component vectorization.
//!
//! Everything here is a pure function of immutable inputs.

mod eigen;
mod expm;
mod lstsq;
mod matrix;

pub use eigen::{herm_eigen, HermEigen};
pub use expm::expm;
pub use lstsq::{lstsq, LstsqSolution, RealMatrix};
pub use matrix::{ComplexMatrix, Ket, MAX_DIM};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QmathError {
    #[error("dimension {0} is outside the supported range 1..={MAX_DIM}")]
    BadDimension(usize),
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix is not Hermitian (max defect {defect:.3e} > tolerance {tolerance:.1e})")]
    NotHermitian { defect: f64, tolerance: f64 },
    #[error("input contains non-finite entries")]
    NonFinite,
    #[error("degenerate fit: design is rank deficient (condition {condition:.3e}), null direction {null_direction:?}")]
    DegenerateFit {
        condition: f64,
        null_direction: Vec<f64>,
    },
    #[error("least squares needs at least as many observations as unknowns ({rows} < {cols})")]
    Underdetermined { rows: usize, cols: usize },
}
