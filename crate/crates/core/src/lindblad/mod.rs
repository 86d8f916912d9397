//! Density-matrix propagation under a time-dependent Lindblad generator
//!
//! ```text
//! dρ/dt = −i[H(t), ρ] + Σ_m ( c_m ρ c_m† − ½{c_m† c_m, ρ} ),   c_m = a_m(t)·C_m
//! ```
//!
//! `H(t) = H_static + Σ_k ( f_k(t)·O_k + h.c. )`. Coefficients may declare
//! support windows outside of which they vanish identically; the integrator
//! refines its step inside windows and strides between them.

mod coefficient;
mod density;
mod dopri;
mod oracle;
mod system;

pub use coefficient::{TimeCoefficient, Window};
pub use density::DensityMatrix;
pub use dopri::{evolve, integrate_observable, IntegratorStats, ObservableIntegral, SolverOptions, Trajectory};
pub use oracle::{evolve_unitary, MAX_ORACLE_STEP};
pub use system::{rhs, CollapseChannel, HamiltonianTerm, LindbladSystem};

use thiserror::Error;

use crate::qmath::QmathError;

/// Relative trace drift above which a step is treated as a divergence
/// instead of being renormalized away.
pub const TRACE_RENORM_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LindbladError {
    #[error(transparent)]
    Qmath(#[from] QmathError),
    #[error("{what} is not Hermitian (defect {defect:.3e})")]
    NotHermitian { what: &'static str, defect: f64 },
    #[error("collapse amplitude at t = {t} ns is {value}, expected a real value ≥ 0")]
    InvalidAmplitude { t: f64, value: num_complex::Complex64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid density matrix: {0}")]
    InvalidState(String),
    #[error("integration diverged at t = {t} ns (trace drift {drift:.3e})")]
    Diverged { t: f64, drift: f64 },
    #[error("stiffness failure at t = {t} ns: step {step:.3e} ns below minimum")]
    StiffnessFailure { t: f64, step: f64 },
    #[error("oracle step too coarse: norm drift {drift:.3e} at t = {t} ns")]
    OracleTooCoarse { t: f64, drift: f64 },
}
