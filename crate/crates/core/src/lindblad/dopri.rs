//! Dormand–Prince 5(4) with FSAL and fifth-order continuous extension.

use num_complex::Complex64 as C64;

use super::{DensityMatrix, LindbladError, LindbladSystem, TRACE_RENORM_LIMIT};
use crate::qmath::{herm_eigen, ComplexMatrix};

const ZERO: C64 = C64::new(0.0, 0.0);

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Step cap outside every support window (ns).
    pub max_step: f64,
    /// Steps below this (ns) abort with a stiffness failure.
    pub min_step: f64,
    /// Track the smallest eigenvalue of ρ after every accepted step.
    pub check_positivity: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step: 1e-3,
            min_step: 1e-9,
            check_positivity: false,
        }
    }
}

impl SolverOptions {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self { rel_tol, abs_tol, ..Self::default() }
    }

    fn validate(&self) -> Result<(), LindbladError> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !(ok(self.rel_tol) && ok(self.abs_tol) && ok(self.max_step) && ok(self.min_step)) {
            return Err(LindbladError::InvalidInput(format!("solver options must be positive: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorStats {
    pub steps: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    /// Largest |Tr ρ − 1| seen before renormalization.
    pub max_trace_drift: f64,
    /// Largest ‖ρ − ρ†‖ seen before re-symmetrization.
    pub max_hermiticity_defect: f64,
    /// Only populated with [`SolverOptions::check_positivity`].
    pub min_eigenvalue: Option<f64>,
}

impl Default for IntegratorStats {
    fn default() -> Self {
        Self {
            steps: 0,
            rejected: 0,
            rhs_evals: 0,
            max_trace_drift: 0.0,
            max_hermiticity_defect: 0.0,
            min_eigenvalue: None,
        }
    }
}

impl IntegratorStats {
    /// Combine statistics from independent runs.
    pub fn merge(&mut self, other: &IntegratorStats) {
        self.steps += other.steps;
        self.rejected += other.rejected;
        self.rhs_evals += other.rhs_evals;
        self.max_trace_drift = self.max_trace_drift.max(other.max_trace_drift);
        self.max_hermiticity_defect = self.max_hermiticity_defect.max(other.max_hermiticity_defect);
        self.min_eigenvalue = match (self.min_eigenvalue, other.min_eigenvalue) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub stats: IntegratorStats,
}

#[derive(Clone, Debug)]
pub struct ObservableIntegral {
    pub value: f64,
    pub final_state: DensityMatrix,
    pub stats: IntegratorStats,
}

/// View of one accepted step, with dense output over `[t_old, t_new]`.
struct AcceptedStep<'s> {
    t_old: f64,
    t_new: f64,
    y_old: &'s [C64],
    y_new: &'s [C64],
    cont: &'s [Vec<C64>; 5],
    /// Applied to interpolated values to match the renormalized endpoint.
    trace_scale: f64,
}

impl AcceptedStep<'_> {
    fn interpolate(&self, t: f64, out: &mut [C64]) {
        if t >= self.t_new {
            out.copy_from_slice(self.y_new);
            return;
        }
        let theta = (t - self.t_old) / (self.t_new - self.t_old);
        let th1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = self.cont;
        for i in 0..out.len() {
            out[i] = (r1[i] + (r2[i] + (r3[i] + (r4[i] + r5[i] * th1) * theta) * th1) * theta) * self.trace_scale;
        }
    }
}

struct Stepper<'a> {
    sys: &'a LindbladSystem,
    opts: &'a SolverOptions,
    k: [Vec<C64>; 7],
    ytmp: Vec<C64>,
    heff: Vec<C64>,
    cont: [Vec<C64>; 5],
    stats: IntegratorStats,
}

impl<'a> Stepper<'a> {
    fn new(sys: &'a LindbladSystem, opts: &'a SolverOptions) -> Self {
        let len = sys.dim() * sys.dim();
        let buf = || vec![ZERO; len];
        Self {
            sys,
            opts,
            k: std::array::from_fn(|_| buf()),
            ytmp: buf(),
            heff: buf(),
            cont: std::array::from_fn(|_| buf()),
            stats: IntegratorStats::default(),
        }
    }

    fn eval(&mut self, t: f64, stage: usize, from_tmp: bool, y: &[C64]) -> Result<(), LindbladError> {
        self.stats.rhs_evals += 1;
        let src: &[C64] = if from_tmp { &self.ytmp } else { y };
        self.sys.rhs_into(t, src, &mut self.k[stage], &mut self.heff)
    }

    fn cap(&self, t: f64) -> f64 {
        self.sys
            .windows()
            .iter()
            .filter(|w| w.lo <= t && t < w.hi)
            .map(|w| w.max_step)
            .fold(self.opts.max_step, f64::min)
    }

    fn combine(&mut self, y: &[C64], h: f64, coeffs: &[(usize, f64)]) {
        for (i, yt) in self.ytmp.iter_mut().enumerate() {
            let mut acc = ZERO;
            for &(s, a) in coeffs {
                acc += self.k[s][i] * a;
            }
            *yt = y[i] + acc * h;
        }
    }

    /// Integrates from `t0` to `t1`, calling `on_step` after every accepted step.
    fn run(
        &mut self,
        y0: &[C64],
        t0: f64,
        t1: f64,
        mut on_step: impl FnMut(&AcceptedStep<'_>) -> Result<(), LindbladError>,
    ) -> Result<Vec<C64>, LindbladError> {
        let n = self.sys.dim();
        let len = n * n;
        let mut y = y0.to_vec();
        let mut y_new = vec![ZERO; len];

        let mut breakpoints: Vec<f64> = self
            .sys
            .windows()
            .iter()
            .flat_map(|w| [w.lo, w.hi])
            .filter(|&b| b > t0 && b < t1)
            .collect();
        breakpoints.push(t1);
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();

        self.eval(t0, 0, false, &y)?;
        let mut h = self.initial_step(&y, t0, t1);
        let mut t = t0;
        let mut bp = 0;
        let eps = |x: f64| 4.0 * f64::EPSILON * x.abs().max(1.0);

        loop {
            while bp < breakpoints.len() && breakpoints[bp] <= t + eps(t) {
                bp += 1;
            }
            if bp == breakpoints.len() {
                break;
            }
            let next = breakpoints[bp];
            let remaining = next - t;
            let mut h_try = h.min(self.cap(t));
            let mut lands = false;
            if h_try >= remaining || remaining - h_try < 1e-3 * h_try {
                h_try = remaining;
                lands = true;
            }
            if h_try < self.opts.min_step && !lands {
                return Err(LindbladError::StiffnessFailure { t, step: h_try });
            }

            self.combine(&y, h_try, &[(0, A21)]);
            self.eval(t + C2 * h_try, 1, true, &y)?;
            self.combine(&y, h_try, &[(0, A31), (1, A32)]);
            self.eval(t + C3 * h_try, 2, true, &y)?;
            self.combine(&y, h_try, &[(0, A41), (1, A42), (2, A43)]);
            self.eval(t + C4 * h_try, 3, true, &y)?;
            self.combine(&y, h_try, &[(0, A51), (1, A52), (2, A53), (3, A54)]);
            self.eval(t + C5 * h_try, 4, true, &y)?;
            self.combine(&y, h_try, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]);
            let t_new = if lands { next } else { t + h_try };
            self.eval(t_new, 5, true, &y)?;
            self.combine(&y, h_try, &[(0, A71), (2, A73), (3, A74), (4, A75), (5, A76)]);
            y_new.copy_from_slice(&self.ytmp);
            self.eval(t_new, 6, false, &y_new)?;

            let mut sum = 0.0;
            for i in 0..len {
                let e = (self.k[0][i] * E1
                    + self.k[2][i] * E3
                    + self.k[3][i] * E4
                    + self.k[4][i] * E5
                    + self.k[5][i] * E6
                    + self.k[6][i] * E7)
                    * h_try;
                let sc = self.opts.abs_tol + self.opts.rel_tol * y[i].norm().max(y_new[i].norm());
                sum += (e.norm() / sc).powi(2);
            }
            let err = (sum / len as f64).sqrt();
            if !err.is_finite() {
                return Err(LindbladError::Diverged { t, drift: f64::INFINITY });
            }

            if err <= 1.0 {
                for i in 0..len {
                    let ydiff = y_new[i] - y[i];
                    let bspl = self.k[0][i] * h_try - ydiff;
                    self.cont[0][i] = y[i];
                    self.cont[1][i] = ydiff;
                    self.cont[2][i] = bspl;
                    self.cont[3][i] = ydiff - self.k[6][i] * h_try - bspl;
                    self.cont[4][i] = (self.k[0][i] * D1
                        + self.k[2][i] * D3
                        + self.k[3][i] * D4
                        + self.k[4][i] * D5
                        + self.k[5][i] * D6
                        + self.k[6][i] * D7)
                        * h_try;
                }
                let trace_scale = self.clean_state(&mut y_new, t_new)?;
                if self.opts.check_positivity {
                    let m = ComplexMatrix::from_vec(n, y_new.clone())?;
                    let lo = herm_eigen(&m)?.min();
                    self.stats.min_eigenvalue = Some(self.stats.min_eigenvalue.map_or(lo, |v| v.min(lo)));
                }
                on_step(&AcceptedStep {
                    t_old: t,
                    t_new,
                    y_old: &y,
                    y_new: &y_new,
                    cont: &self.cont,
                    trace_scale,
                })?;
                std::mem::swap(&mut y, &mut y_new);
                self.k.swap(0, 6);
                t = t_new;
                self.stats.steps += 1;
                let factor = if err == 0.0 { 10.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 10.0) };
                h = if lands { h.max(h_try * factor) } else { h_try * factor };
            } else {
                self.stats.rejected += 1;
                h = h_try * (0.9 * err.powf(-0.2)).max(0.2);
                if h < self.opts.min_step {
                    return Err(LindbladError::StiffnessFailure { t, step: h });
                }
            }
        }
        Ok(y)
    }

    fn initial_step(&self, y: &[C64], t0: f64, t1: f64) -> f64 {
        let len = y.len() as f64;
        let (mut d0, mut d1) = (0.0, 0.0);
        for (yi, fi) in y.iter().zip(&self.k[0]) {
            let sc = self.opts.abs_tol + self.opts.rel_tol * yi.norm();
            d0 += (yi.norm() / sc).powi(2);
            d1 += (fi.norm() / sc).powi(2);
        }
        let (d0, d1) = ((d0 / len).sqrt(), (d1 / len).sqrt());
        let guess = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        guess.min(self.cap(t0)).min(t1 - t0).max(self.opts.min_step)
    }

    /// Re-symmetrizes and renormalizes an accepted state, returning the
    /// trace scaling that was applied.
    fn clean_state(&mut self, y: &mut [C64], t: f64) -> Result<f64, LindbladError> {
        let n = self.sys.dim();
        let mut defect = 0.0_f64;
        let mut trace = 0.0;
        for i in 0..n {
            for j in i..n {
                let a = y[i * n + j];
                let b = y[j * n + i];
                defect = defect.max((a - b.conj()).norm());
                let avg = (a + b.conj()) * 0.5;
                y[i * n + j] = avg;
                y[j * n + i] = avg.conj();
            }
            y[i * n + i].im = 0.0;
            trace += y[i * n + i].re;
        }
        let drift = (trace - 1.0).abs();
        self.stats.max_hermiticity_defect = self.stats.max_hermiticity_defect.max(defect);
        self.stats.max_trace_drift = self.stats.max_trace_drift.max(drift);
        if !(drift < TRACE_RENORM_LIMIT) {
            return Err(LindbladError::Diverged { t, drift });
        }
        let scale = 1.0 / trace;
        y.iter_mut().for_each(|z| *z *= scale);
        Ok(scale)
    }
}

fn symmetrize_normalize(n: usize, y: &mut [C64]) {
    let mut trace = 0.0;
    for i in 0..n {
        for j in i..n {
            let avg = (y[i * n + j] + y[j * n + i].conj()) * 0.5;
            y[i * n + j] = avg;
            y[j * n + i] = avg.conj();
        }
        y[i * n + i].im = 0.0;
        trace += y[i * n + i].re;
    }
    y.iter_mut().for_each(|z| *z /= trace);
}

fn check_span(system: &LindbladSystem, rho0: &DensityMatrix, t_span: (f64, f64), opts: &SolverOptions) -> Result<(), LindbladError> {
    opts.validate()?;
    if !(t_span.0.is_finite() && t_span.1.is_finite() && t_span.0 < t_span.1) {
        return Err(LindbladError::InvalidInput(format!("time span {t_span:?} must be increasing")));
    }
    if rho0.dim() != system.dim() {
        return Err(LindbladError::InvalidInput(format!(
            "initial state dimension {} does not match system dimension {}",
            rho0.dim(),
            system.dim()
        )));
    }
    Ok(())
}

/// Propagates `rho0` over `t_span`, returning states at `sample_times`
/// (strictly increasing, inside the span).
pub fn evolve(
    system: &LindbladSystem,
    rho0: &DensityMatrix,
    t_span: (f64, f64),
    sample_times: &[f64],
    opts: &SolverOptions,
) -> Result<Trajectory, LindbladError> {
    check_span(system, rho0, t_span, opts)?;
    if sample_times.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(LindbladError::InvalidInput("sample times must be strictly increasing".into()));
    }
    if sample_times.iter().any(|&s| s < t_span.0 || s > t_span.1) {
        return Err(LindbladError::InvalidInput(format!("sample times must lie within {t_span:?}")));
    }
    let n = system.dim();
    let mut states = Vec::with_capacity(sample_times.len());
    let mut next = 0;
    while next < sample_times.len() && sample_times[next] <= t_span.0 {
        states.push(rho0.clone());
        next += 1;
    }
    let mut buf = vec![ZERO; n * n];
    let mut stepper = Stepper::new(system, opts);
    stepper.run(rho0.matrix().as_slice(), t_span.0, t_span.1, |step| {
        while next < sample_times.len() && sample_times[next] <= step.t_new {
            let ts = sample_times[next];
            step.interpolate(ts, &mut buf);
            symmetrize_normalize(n, &mut buf);
            let m = ComplexMatrix::from_vec(n, buf.clone())?;
            let state = DensityMatrix::new(m).map_err(|e| match e {
                LindbladError::InvalidState(msg) => LindbladError::InvalidState(format!("at t = {ts} ns: {msg}")),
                other => other,
            })?;
            states.push(state);
            next += 1;
        }
        Ok(())
    })?;
    Ok(Trajectory {
        times: sample_times.to_vec(),
        states,
        stats: stepper.stats,
    })
}

/// `weight · ∫ Tr(projector·ρ(t)) dt` over `t_span`, accumulated by the
/// trapezoidal rule on the accepted step grid.
pub fn integrate_observable(
    system: &LindbladSystem,
    rho0: &DensityMatrix,
    t_span: (f64, f64),
    weight: f64,
    projector: &ComplexMatrix,
    opts: &SolverOptions,
) -> Result<ObservableIntegral, LindbladError> {
    check_span(system, rho0, t_span, opts)?;
    if !(weight >= 0.0 && weight.is_finite()) {
        return Err(LindbladError::InvalidInput(format!("weight {weight} must be finite and ≥ 0")));
    }
    if projector.dim() != system.dim() {
        return Err(LindbladError::InvalidInput("projector dimension mismatch".into()));
    }
    let idem = (&projector.matmul(projector) - projector).max_abs();
    if projector.hermiticity_defect() > 1e-10 || idem > 1e-10 {
        return Err(LindbladError::InvalidInput("observable must be a Hermitian idempotent projector".into()));
    }
    if weight == 0.0 {
        return Ok(ObservableIntegral {
            value: 0.0,
            final_state: rho0.clone(),
            stats: IntegratorStats::default(),
        });
    }
    let n = system.dim();
    let p = projector.as_slice();
    let expect = |y: &[C64]| -> f64 {
        let mut acc = ZERO;
        for i in 0..n {
            for j in 0..n {
                acc += p[i * n + j] * y[j * n + i];
            }
        }
        acc.re
    };
    let mut integral = 0.0;
    let mut stepper = Stepper::new(system, opts);
    let y_final = stepper.run(rho0.matrix().as_slice(), t_span.0, t_span.1, |step| {
        integral += 0.5 * (step.t_new - step.t_old) * (expect(step.y_old) + expect(step.y_new));
        Ok(())
    })?;
    let final_state = DensityMatrix::new_unchecked(ComplexMatrix::from_vec(n, y_final)?);
    Ok(ObservableIntegral {
        value: (weight * integral).max(0.0),
        final_state,
        stats: stepper.stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{CollapseChannel, HamiltonianTerm, TimeCoefficient, Window};
    use crate::qmath::Ket;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn tight() -> SolverOptions {
        SolverOptions::with_tolerances(1e-12, 1e-14)
    }

    fn two_level_drive(omega: f64) -> LindbladSystem {
        // H = (Ω/2) σx, resonant.
        let mut h = ComplexMatrix::zeros(2);
        h[(0, 1)] = c(omega / 2.0, 0.0);
        h[(1, 0)] = c(omega / 2.0, 0.0);
        LindbladSystem::new(h, vec![], vec![]).unwrap()
    }

    #[test]
    fn frozen_without_generator() {
        let sys = LindbladSystem::new(ComplexMatrix::zeros(2), vec![], vec![]).unwrap();
        let psi = Ket::new(vec![c(0.8, 0.0), c(0.0, 0.6)]).unwrap();
        let rho0 = DensityMatrix::from_ket(&psi).unwrap();
        let ts = [0.0, 0.5, 1.0, 2.0];
        let tr = evolve(&sys, &rho0, (0.0, 2.0), &ts, &SolverOptions::default()).unwrap();
        for s in &tr.states {
            assert_eq!(s, &rho0);
        }
    }

    #[test]
    fn closed_form_rabi() {
        let omega = 7.3;
        let sys = two_level_drive(omega);
        let ts: Vec<f64> = (0..=40).map(|k| k as f64 * 0.05).collect();
        let tr = evolve(&sys, &DensityMatrix::basis(2, 0), (0.0, 2.0), &ts, &tight()).unwrap();
        for (t, s) in tr.times.iter().zip(&tr.states) {
            let expect = (omega * t / 2.0).sin().powi(2);
            assert!((s.population(1) - expect).abs() < 1e-8, "t={t} got {} want {expect}", s.population(1));
        }
        assert!(tr.stats.max_trace_drift < 1e-12);
    }

    #[test]
    fn exponential_decay() {
        let gamma = 1.7;
        let sys = LindbladSystem::new(
            ComplexMatrix::zeros(2),
            vec![],
            vec![CollapseChannel::with_rate(ComplexMatrix::unit(2, 0, 1), gamma)],
        )
        .unwrap();
        let ts = [0.25, 1.0, 3.0];
        let tr = evolve(&sys, &DensityMatrix::basis(2, 1), (0.0, 3.0), &ts, &tight()).unwrap();
        for (t, s) in ts.iter().zip(&tr.states) {
            assert!((s.population(1) - (-gamma * t).exp()).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_integrand() {
        let gamma = 0.9;
        let sys = LindbladSystem::new(ComplexMatrix::zeros(4), vec![], vec![]).unwrap();
        let n = integrate_observable(
            &sys,
            &DensityMatrix::basis(4, 3),
            (0.0, 12.4),
            gamma,
            &ComplexMatrix::unit(4, 3, 3),
            &SolverOptions::default(),
        )
        .unwrap();
        assert!((n.value - gamma * 12.4).abs() < 1e-8);
    }

    #[test]
    fn zero_weight_is_zero() {
        let sys = two_level_drive(3.0);
        let n = integrate_observable(
            &sys,
            &DensityMatrix::basis(2, 0),
            (0.0, 1.0),
            0.0,
            &ComplexMatrix::unit(2, 1, 1),
            &SolverOptions::default(),
        )
        .unwrap();
        assert_eq!(n.value, 0.0);
    }

    #[test]
    fn rabi_integral_matches_closed_form() {
        // ∫₀ᵀ sin²(Ωt/2) dt = T/2 − sin(ΩT)/(2Ω)
        let (omega, t_end) = (5.1, 3.0);
        let sys = two_level_drive(omega);
        let n = integrate_observable(
            &sys,
            &DensityMatrix::basis(2, 0),
            (0.0, t_end),
            1.0,
            &ComplexMatrix::unit(2, 1, 1),
            &SolverOptions { max_step: 1e-3, ..tight() },
        )
        .unwrap();
        let expect = t_end / 2.0 - (omega * t_end).sin() / (2.0 * omega);
        assert!((n.value - expect).abs() < 1e-6, "{} vs {expect}", n.value);
    }

    #[test]
    fn window_caps_are_respected() {
        // A narrow pulse inside a long span must still be resolved.
        let width = 0.002;
        let area = std::f64::consts::PI;
        let amp = area / (width * (2.0 * std::f64::consts::PI).sqrt());
        let coeff = TimeCoefficient::windowed(
            move |t| c(0.5 * amp * (-(t - 1.0).powi(2) / (2.0 * width * width)).exp(), 0.0),
            vec![Window::new(1.0 - 6.0 * width, 1.0 + 6.0 * width, width / 50.0)],
        );
        let sys = LindbladSystem::new(
            ComplexMatrix::zeros(2),
            vec![HamiltonianTerm::new(ComplexMatrix::unit(2, 0, 1), coeff)],
            vec![],
        )
        .unwrap();
        let tr = evolve(&sys, &DensityMatrix::basis(2, 0), (0.0, 2.0), &[2.0], &tight()).unwrap();
        // π-area pulse: full inversion.
        assert!((tr.states[0].population(1) - 1.0).abs() < 1e-8);
        assert!(tr.stats.steps >= 600);
    }

    #[test]
    fn rejects_bad_inputs() {
        let sys = two_level_drive(1.0);
        let rho = DensityMatrix::basis(2, 0);
        let o = SolverOptions::default();
        assert!(evolve(&sys, &rho, (1.0, 0.0), &[], &o).is_err());
        assert!(evolve(&sys, &rho, (0.0, 1.0), &[0.5, 0.5], &o).is_err());
        assert!(evolve(&sys, &rho, (0.0, 1.0), &[1.5], &o).is_err());
        assert!(evolve(&sys, &rho, (0.0, 1.0), &[], &SolverOptions { rel_tol: 0.0, ..o.clone() }).is_err());
        let not_proj = ComplexMatrix::from_real_diag(&[0.5, 0.0]);
        assert!(integrate_observable(&sys, &rho, (0.0, 1.0), 1.0, &not_proj, &o).is_err());
        assert!(integrate_observable(&sys, &rho, (0.0, 1.0), -1.0, &ComplexMatrix::unit(2, 1, 1), &o).is_err());
    }

    #[test]
    fn stiff_system_fails() {
        let mut h = ComplexMatrix::zeros(2);
        h[(0, 1)] = c(1e14, 0.0);
        h[(1, 0)] = c(1e14, 0.0);
        let sys = LindbladSystem::new(h, vec![], vec![]).unwrap();
        let r = evolve(
            &sys,
            &DensityMatrix::basis(2, 0),
            (0.0, 1.0),
            &[],
            &SolverOptions { min_step: 1e-9, ..SolverOptions::default() },
        );
        assert!(matches!(r, Err(LindbladError::StiffnessFailure { .. })), "{r:?}");
    }
}
