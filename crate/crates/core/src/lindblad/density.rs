use num_complex::Complex64 as C64;

use super::LindbladError;
use crate::qmath::{herm_eigen, ComplexMatrix, Ket};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Hermitian, unit-trace, positive semidefinite state (within tolerances).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self, LindbladError> {
        if !m.is_finite() {
            return Err(LindbladError::InvalidState("non-finite entries".into()));
        }
        let defect = m.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(LindbladError::InvalidState(format!("Hermiticity defect {defect:.3e}")));
        }
        let drift = (m.trace() - C64::new(1.0, 0.0)).norm();
        if drift > TRACE_TOL {
            return Err(LindbladError::InvalidState(format!("trace off by {drift:.3e}")));
        }
        let min = herm_eigen(&m.hermitian_part())?.min();
        if min < -POSITIVITY_TOL {
            return Err(LindbladError::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self(m))
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn new_unchecked(m: ComplexMatrix) -> Self {
        Self(m)
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        Self(ComplexMatrix::unit(dim, index, index))
    }

    pub fn from_ket(psi: &Ket) -> Result<Self, LindbladError> {
        let n = psi.norm();
        if (n - 1.0).abs() > 1e-10 {
            return Err(LindbladError::InvalidState(format!("ket norm {n}")));
        }
        Ok(Self(ComplexMatrix::outer(psi, psi)))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn population(&self, i: usize) -> f64 {
        self.0[(i, i)].re
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.population(i)).collect()
    }

    /// ρ_ij.
    pub fn coherence(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    /// Re Tr(op·ρ).
    pub fn expectation(&self, op: &ComplexMatrix) -> f64 {
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += op[(i, j)] * self.0[(j, i)];
            }
        }
        acc.re
    }

    pub fn trace_drift(&self) -> f64 {
        (self.0.trace() - C64::new(1.0, 0.0)).norm()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.0.hermiticity_defect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        herm_eigen(&self.0.hermitian_part()).map(|e| e.min()).unwrap_or(f64::NAN)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn validates_invariants() {
        assert!(DensityMatrix::new(ComplexMatrix::unit(4, 1, 1)).is_ok());
        assert!(DensityMatrix::new(ComplexMatrix::from_real_diag(&[0.5, 0.6])).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::from_real_diag(&[1.1, -0.1])).is_err());
        let mut m = ComplexMatrix::from_real_diag(&[0.5, 0.5]);
        m[(0, 1)] = c(0.1, 0.0);
        assert!(DensityMatrix::new(m.clone()).is_err());
        m[(1, 0)] = c(0.1, 0.0);
        assert!(DensityMatrix::new(m).is_ok());
    }

    #[test]
    fn pure_state_observables() {
        let psi = Ket::new(vec![c(1.0, 0.0), c(0.0, 1.0)]).unwrap().normalized();
        let rho = DensityMatrix::from_ket(&psi).unwrap();
        assert!((rho.population(0) - 0.5).abs() < 1e-15);
        assert!((rho.coherence(0, 1) - c(0.0, -0.5)).norm() < 1e-15);
        assert!(rho.min_eigenvalue().abs() < 1e-12);
        assert!((rho.expectation(&ComplexMatrix::unit(2, 1, 1)) - 0.5).abs() < 1e-15);
    }
}
