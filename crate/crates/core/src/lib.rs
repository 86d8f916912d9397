//! Simulation of all-optical coherent control of a single electron spin in a
//! negatively charged quantum dot.
//!
//! The crate is layered bottom-up:
//!
//! * [`qmath`]: small dense complex linear algebra (eigen, expm, least squares).
//! * [`lindblad`]: adaptive Dormand–Prince propagation of a density matrix
//!   under a time-dependent Lindblad generator, plus a Schrödinger oracle.
//! * [`qdmodel`]: the four-level double-Λ trion model, its presets and readout.
//! * [`zeeman`]: effective g-factors, four-branch Zeeman fits, Bloch geometry.
//! * [`experiments`]: Rabi, Ramsey and SU(2) sweeps, calibration, fringe fits.
//!
//! Units: ℏ = 1, times in ns, Hamiltonian entries in rad/ns. User-facing
//! frequencies are ordinary frequencies in GHz.

pub mod experiments;
pub mod lindblad;
pub mod qdmodel;
pub mod qmath;
pub mod zeeman;

pub use num_complex::Complex64 as C64;
