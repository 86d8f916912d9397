use num_complex::Complex64 as C64;

use super::{HamiltonianTerm, LindbladError};
use crate::qmath::{expm, ComplexMatrix, Ket};

/// Upper bound on the oracle step inside support windows (ns).
pub const MAX_ORACLE_STEP: f64 = 1e-4;
const NORM_DRIFT_LIMIT: f64 = 1e-6;

fn hamiltonian(h_static: &ComplexMatrix, h_terms: &[HamiltonianTerm], t: f64) -> ComplexMatrix {
    let mut h = h_static.clone();
    for term in h_terms {
        let c = term.coeff.eval(t);
        if c == C64::new(0.0, 0.0) {
            continue;
        }
        let add = term.operator.scale(c);
        h = &(&h + &add) + &add.adjoint();
    }
    h
}

/// Schrödinger propagation by midpoint exponentials,
/// `ψ ← exp(−i H(t + dt/2) dt) ψ`.
///
/// Inside support windows the step is at most `dt`. Between windows, when
/// every time-dependent term is windowed, H is constant and the gap is
/// covered by one exact exponential.
pub fn evolve_unitary(
    h_static: &ComplexMatrix,
    h_terms: &[HamiltonianTerm],
    psi0: &Ket,
    t_span: (f64, f64),
    dt: f64,
) -> Result<Ket, LindbladError> {
    let (t0, t1) = t_span;
    if !(t0 < t1) {
        return Err(LindbladError::InvalidInput(format!("time span {t_span:?} must be increasing")));
    }
    if !(dt > 0.0 && dt <= MAX_ORACLE_STEP) {
        return Err(LindbladError::InvalidInput(format!("oracle step {dt} must be in (0, {MAX_ORACLE_STEP}] ns")));
    }
    if h_static.hermiticity_defect() > 1e-12 * h_static.max_abs().max(1.0) {
        return Err(LindbladError::NotHermitian { what: "static Hamiltonian", defect: h_static.hermiticity_defect() });
    }
    if psi0.dim() != h_static.dim() || h_terms.iter().any(|t| t.operator.dim() != h_static.dim()) {
        return Err(LindbladError::InvalidInput("dimension mismatch".into()));
    }
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(LindbladError::InvalidInput(format!("initial ket norm {} is not 1", psi0.norm())));
    }

    let all_windowed = h_terms.iter().all(|t| t.coeff.is_bounded());
    let windows: Vec<_> = h_terms.iter().flat_map(|t| t.coeff.windows().iter().copied()).collect();
    let mut cuts: Vec<f64> = windows
        .iter()
        .flat_map(|w| [w.lo, w.hi])
        .filter(|&b| b > t0 && b < t1)
        .chain([t0, t1])
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut psi = psi0.clone();
    let mut static_prop: Option<(f64, ComplexMatrix)> = None;
    for seg in cuts.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let mid = 0.5 * (a + b);
        let inside = windows.iter().any(|w| w.lo <= mid && mid <= w.hi);
        if all_windowed && !inside {
            let len = b - a;
            let u = match &static_prop {
                Some((l, u)) if *l == len => u.clone(),
                _ => {
                    let u = expm(&h_static.scale(C64::new(0.0, -len)))?;
                    static_prop = Some((len, u.clone()));
                    u
                }
            };
            psi = u.apply(&psi);
        } else {
            let steps = ((b - a) / dt).ceil().max(1.0) as usize;
            let h = (b - a) / steps as f64;
            for k in 0..steps {
                let tm = a + (k as f64 + 0.5) * h;
                let u = expm(&hamiltonian(h_static, h_terms, tm).scale(C64::new(0.0, -h)))?;
                psi = u.apply(&psi);
            }
        }
        let drift = (psi.norm() - 1.0).abs();
        if drift > NORM_DRIFT_LIMIT {
            return Err(LindbladError::OracleTooCoarse { t: b, drift });
        }
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::TimeCoefficient;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let psi = Ket::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let out = evolve_unitary(&ComplexMatrix::zeros(2), &[], &psi, (0.0, 3.0), 1e-4).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn diagonal_phases() {
        let e = [0.7, -2.3, 5.0];
        let t = 1.3;
        let psi = Ket::new(vec![c(0.6, 0.0), c(0.0, 0.48), c(0.64, 0.0)]).unwrap();
        let out = evolve_unitary(&ComplexMatrix::from_real_diag(&e), &[], &psi, (0.0, t), 1e-4).unwrap();
        for k in 0..3 {
            let expect = psi[k] * c(0.0, -e[k] * t).exp();
            assert!((out[k] - expect).norm() < 1e-10);
        }
    }

    #[test]
    fn constant_drive_closed_form() {
        let omega = 9.0;
        let term = HamiltonianTerm::new(ComplexMatrix::unit(2, 0, 1), TimeCoefficient::constant_real(omega / 2.0));
        let t = 0.8;
        let out = evolve_unitary(&ComplexMatrix::zeros(2), &[term], &Ket::basis(2, 0), (0.0, t), 1e-4).unwrap();
        assert!((out[1].norm_sqr() - (omega * t / 2.0).sin().powi(2)).abs() < 1e-8);
    }

    #[test]
    fn rejects_coarse_step() {
        assert!(evolve_unitary(&ComplexMatrix::zeros(2), &[], &Ket::basis(2, 0), (0.0, 1.0), 1e-3).is_err());
    }
}
