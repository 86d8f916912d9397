//! Rabi, Ramsey and SU(2) sweeps over the double-Λ model, pulse
//! calibration and fringe analysis.
//!
//! Sweep points are independent and run on the rayon pool; rows are always
//! returned in grid order.

mod fit;

pub use fit::{autocorrelation_period, fit_damped_cosine, periodogram_peak, FringeFit, MIN_PERIODS, PEAK_TO_MEDIAN};

use rayon::prelude::*;
use thiserror::Error;

use crate::lindblad::{evolve, DensityMatrix, IntegratorStats, SolverOptions};
use crate::qdmodel::{
    assemble, cw_scale, pulse_half_width, pulses_overlap, readout_solver, readout_with, DoubleLambdaParams,
    Geometry, ModelError, PulseSpec, DIM, DOWN, UP,
};
use crate::qmath::QmathError;
use crate::zeeman::{equator_pulse_angle, ZeemanError};

/// Upper end of the amplitude grids, GHz.
pub const RABI_MAX_GHZ: f64 = 2550.0;
pub const RABI_POINTS: usize = 128;
pub const RAMSEY_STEP_PS: f64 = 1.33;
pub const RAMSEY_POINTS: usize = 751;
pub const SU2_AMPLITUDES: usize = 64;
pub const SU2_DELAY_START_PS: f64 = 20.0;
pub const SU2_DELAYS: usize = 90;
/// Centre of the first pulse, ns.
pub const FIRST_PULSE_T0: f64 = 1.0;

pub const COL_OMEGA: &str = "omega_p_GHz";
pub const COL_TAU: &str = "tau_ps";
pub const COL_COUNTS: &str = "counts";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid scan: {0}")]
    InvalidScan(String),
    #[error("at {coords}: {source}")]
    Point {
        coords: String,
        #[source]
        source: ModelError,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("calibration failed: target transfer {target:.6} exceeds the first-lobe maximum {reachable:.6}")]
    CalibrationFailed { target: f64, reachable: f64 },
    #[error("no fringe: periodogram peak is only {peak_ratio:.2}× the median")]
    NoFringe { peak_ratio: f64 },
    #[error("{} of {total} sweep points failed; first at {}", failures.len(), failures.first().map(|f| f.coords.as_str()).unwrap_or("?"))]
    PartialSweep {
        failures: Vec<PointFailure>,
        total: usize,
        result: Box<SweepResult>,
    },
    #[error(transparent)]
    Fit(#[from] QmathError),
    #[error(transparent)]
    Geometry(#[from] ZeemanError),
}

#[derive(Clone, Debug)]
pub struct PointFailure {
    pub index: usize,
    pub coords: String,
    pub message: String,
}

/// Tabular sweep output with the parameter snapshot that produced it.
#[derive(Clone, Debug)]
pub struct SweepResult {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Per row: two pulses closer than twice their support half-width.
    pub overlapping: Vec<bool>,
    pub params: DoubleLambdaParams,
    pub cw_scale: f64,
    pub stats: IntegratorStats,
}

impl SweepResult {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn counts(&self) -> Vec<f64> {
        self.column(COL_COUNTS).unwrap_or_default()
    }
}

fn check_grid(name: &str, grid: &[f64], min: f64) -> Result<(), ExperimentError> {
    if grid.is_empty() {
        return Err(ExperimentError::InvalidScan(format!("{name} grid is empty")));
    }
    if grid.iter().any(|v| !(v.is_finite() && *v >= min)) {
        return Err(ExperimentError::InvalidScan(format!("{name} grid values must be finite and ≥ {min}")));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(ExperimentError::InvalidScan(format!("{name} grid must be strictly increasing")));
    }
    Ok(())
}

/// `n` evenly spaced amplitudes in (0, max].
pub fn amplitude_grid(max: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|k| max * k as f64 / n as f64).collect()
}

/// `n` delays starting at `start` with spacing `step`, rounded to 1e-9 ps
/// so decimal steps print as written.
pub fn delay_grid(start: f64, step: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| ((start + step * k as f64) * 1e9).round() / 1e9).collect()
}

#[derive(Clone, Debug)]
pub struct RabiScan {
    pub params: DoubleLambdaParams,
    /// Ω_p/2π grid, GHz.
    pub amplitudes: Vec<f64>,
    pub cw_scale: f64,
    pub t0: f64,
    pub solver: SolverOptions,
}

impl RabiScan {
    pub fn new(params: DoubleLambdaParams) -> Self {
        Self {
            params,
            amplitudes: amplitude_grid(RABI_MAX_GHZ, RABI_POINTS),
            cw_scale: cw_scale::RABI,
            t0: FIRST_PULSE_T0,
            solver: readout_solver(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RamseyScan {
    pub params: DoubleLambdaParams,
    /// Amplitude of both pulses, GHz.
    pub omega_p: f64,
    pub delays_ps: Vec<f64>,
    pub cw_scale: f64,
    pub t0: f64,
    pub solver: SolverOptions,
}

impl RamseyScan {
    pub fn new(params: DoubleLambdaParams, omega_p: f64) -> Self {
        Self {
            params,
            omega_p,
            delays_ps: delay_grid(0.0, RAMSEY_STEP_PS, RAMSEY_POINTS),
            cw_scale: cw_scale::RAMSEY,
            t0: FIRST_PULSE_T0,
            solver: readout_solver(),
        }
    }

    /// Scan at the amplitude of an effective π/2 pulse for the geometry.
    pub fn calibrated(params: DoubleLambdaParams) -> Result<(Self, PulseCalibration), ExperimentError> {
        let cal = calibrate_ramsey_pulse(&params)?;
        Ok((Self::new(params, cal.omega_p), cal))
    }
}

#[derive(Clone, Debug)]
pub struct Su2Scan {
    pub params: DoubleLambdaParams,
    pub amplitudes: Vec<f64>,
    pub delays_ps: Vec<f64>,
    pub cw_scale: f64,
    pub t0: f64,
    pub solver: SolverOptions,
}

impl Su2Scan {
    pub fn new(params: DoubleLambdaParams) -> Self {
        Self {
            params,
            amplitudes: amplitude_grid(RABI_MAX_GHZ, SU2_AMPLITUDES),
            delays_ps: delay_grid(SU2_DELAY_START_PS, RAMSEY_STEP_PS, SU2_DELAYS),
            cw_scale: cw_scale::SU2,
            t0: FIRST_PULSE_T0,
            solver: readout_solver(),
        }
    }
}

fn pulse_pair(t0: f64, omega_p: f64, tau_ps: f64) -> [PulseSpec; 2] {
    [PulseSpec::new(t0, omega_p), PulseSpec::new(t0 + tau_ps * 1e-3, omega_p)]
}

struct PointOutcome {
    counts: f64,
    stats: IntegratorStats,
}

fn run_points(
    params: &DoubleLambdaParams,
    cw: f64,
    solver: &SolverOptions,
    jobs: &[Vec<PulseSpec>],
) -> Vec<Result<PointOutcome, ModelError>> {
    jobs.par_iter()
        .map(|pulses| {
            readout_with(params, pulses, cw, solver).map(|r| PointOutcome { counts: r.counts, stats: r.stats })
        })
        .collect()
}

fn check_cw(cw: f64) -> Result<(), ExperimentError> {
    if !(cw.is_finite() && cw >= 0.0) {
        return Err(ExperimentError::InvalidScan(format!("cw_scale {cw} must be finite and ≥ 0")));
    }
    Ok(())
}

/// One single-pulse readout per amplitude; the first failing point aborts.
pub fn run_rabi(scan: &RabiScan) -> Result<SweepResult, ExperimentError> {
    scan.params.validate()?;
    check_grid("amplitude", &scan.amplitudes, 0.0)?;
    check_cw(scan.cw_scale)?;
    let jobs: Vec<Vec<PulseSpec>> = scan.amplitudes.iter().map(|&om| vec![PulseSpec::new(scan.t0, om)]).collect();
    let outcomes = run_points(&scan.params, scan.cw_scale, &scan.solver, &jobs);
    let mut stats = IntegratorStats::default();
    let mut rows = Vec::with_capacity(jobs.len());
    for (om, out) in scan.amplitudes.iter().zip(outcomes) {
        let out = out.map_err(|source| ExperimentError::Point { coords: format!("{COL_OMEGA} = {om}"), source })?;
        stats.merge(&out.stats);
        rows.push(vec![*om, out.counts]);
    }
    Ok(SweepResult {
        columns: vec![COL_OMEGA.into(), COL_COUNTS.into()],
        overlapping: vec![false; rows.len()],
        rows,
        params: scan.params.clone(),
        cw_scale: scan.cw_scale,
        stats,
    })
}

/// Two identical pulses per delay; the first failing point aborts.
pub fn run_ramsey(scan: &RamseyScan) -> Result<SweepResult, ExperimentError> {
    scan.params.validate()?;
    check_grid("delay", &scan.delays_ps, 0.0)?;
    check_cw(scan.cw_scale)?;
    if !(scan.omega_p.is_finite() && scan.omega_p >= 0.0) {
        return Err(ExperimentError::InvalidScan(format!("pulse amplitude {} must be ≥ 0", scan.omega_p)));
    }
    let jobs: Vec<Vec<PulseSpec>> = scan.delays_ps.iter().map(|&tau| pulse_pair(scan.t0, scan.omega_p, tau).to_vec()).collect();
    let outcomes = run_points(&scan.params, scan.cw_scale, &scan.solver, &jobs);
    let mut stats = IntegratorStats::default();
    let mut rows = Vec::with_capacity(jobs.len());
    let mut overlapping = Vec::with_capacity(jobs.len());
    for ((tau, out), pulses) in scan.delays_ps.iter().zip(outcomes).zip(&jobs) {
        let out = out.map_err(|source| ExperimentError::Point { coords: format!("{COL_TAU} = {tau}"), source })?;
        stats.merge(&out.stats);
        rows.push(vec![*tau, out.counts]);
        overlapping.push(pulses_overlap(&scan.params, pulses));
    }
    Ok(SweepResult {
        columns: vec![COL_TAU.into(), COL_COUNTS.into()],
        rows,
        overlapping,
        params: scan.params.clone(),
        cw_scale: scan.cw_scale,
        stats,
    })
}

/// Full amplitude × delay map in row-major order (amplitude outer).
/// Failing points are recorded with NaN counts and reported together.
pub fn run_su2_map(scan: &Su2Scan) -> Result<SweepResult, ExperimentError> {
    scan.params.validate()?;
    check_grid("amplitude", &scan.amplitudes, 0.0)?;
    check_grid("delay", &scan.delays_ps, 0.0)?;
    check_cw(scan.cw_scale)?;
    let coords: Vec<(f64, f64)> = scan
        .amplitudes
        .iter()
        .flat_map(|&om| scan.delays_ps.iter().map(move |&tau| (om, tau)))
        .collect();
    let jobs: Vec<Vec<PulseSpec>> = coords.iter().map(|&(om, tau)| pulse_pair(scan.t0, om, tau).to_vec()).collect();
    let outcomes = run_points(&scan.params, scan.cw_scale, &scan.solver, &jobs);
    let mut stats = IntegratorStats::default();
    let mut rows = Vec::with_capacity(jobs.len());
    let mut overlapping = Vec::with_capacity(jobs.len());
    let mut failures = Vec::new();
    for (index, ((&(om, tau), out), pulses)) in coords.iter().zip(outcomes).zip(&jobs).enumerate() {
        let counts = match out {
            Ok(o) => {
                stats.merge(&o.stats);
                o.counts
            }
            Err(e) => {
                failures.push(PointFailure {
                    index,
                    coords: format!("{COL_OMEGA} = {om}, {COL_TAU} = {tau}"),
                    message: e.to_string(),
                });
                f64::NAN
            }
        };
        rows.push(vec![om, tau, counts]);
        overlapping.push(pulses_overlap(&scan.params, pulses));
    }
    let result = SweepResult {
        columns: vec![COL_OMEGA.into(), COL_TAU.into(), COL_COUNTS.into()],
        rows,
        overlapping,
        params: scan.params.clone(),
        cw_scale: scan.cw_scale,
        stats,
    };
    if failures.is_empty() {
        Ok(result)
    } else {
        Err(ExperimentError::PartialSweep { total: coords.len(), failures, result: Box::new(result) })
    }
}

/// Copy of `params` with every dissipative channel switched off.
pub fn dissipation_free(params: &DoubleLambdaParams) -> DoubleLambdaParams {
    DoubleLambdaParams {
        gamma0: 0.0,
        gamma_dephasing: 0.0,
        alpha_phonon: 0.0,
        ..params.clone()
    }
}

/// Level populations right after a single pulse, starting from |2⟩, with
/// the CW laser off. Only the pulse support window is propagated.
pub fn single_pulse_populations(
    params: &DoubleLambdaParams,
    omega_p: f64,
    solver: &SolverOptions,
) -> Result<[f64; DIM], ExperimentError> {
    let pulse = PulseSpec::new(FIRST_PULSE_T0, omega_p);
    let system = assemble(params, &[pulse], 0.0)?;
    let hw = pulse_half_width(params);
    let end = FIRST_PULSE_T0 + hw;
    let tr = evolve(&system, &DensityMatrix::basis(DIM, DOWN), (FIRST_PULSE_T0 - hw, end), &[end], solver)
        .map_err(ModelError::from)?;
    let p = tr.states[0].populations();
    Ok([p[0], p[1], p[2], p[3]])
}

/// |1⟩ population after one dissipation-free pulse.
pub fn pulse_transfer(params: &DoubleLambdaParams, omega_p: f64) -> Result<f64, ExperimentError> {
    Ok(single_pulse_populations(&dissipation_free(params), omega_p, &calibration_solver())?[UP])
}

fn calibration_solver() -> SolverOptions {
    SolverOptions::with_tolerances(1e-10, 1e-12)
}

/// Geometric |1⟩ population after rotating the pole by `angle_deg` about an
/// axis tilted `tilt_deg` from it.
pub fn geometric_transfer(tilt_deg: f64, angle_deg: f64) -> f64 {
    let (st, ct) = tilt_deg.to_radians().sin_cos();
    let z = ct * ct + st * st * angle_deg.to_radians().cos();
    (1.0 - z) / 2.0
}

/// How the calibrated amplitude was obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CalibrationMethod {
    /// Transfer matches the field-tilt geometry.
    Geometric,
    /// The geometric transfer is out of reach; the angle is realised about
    /// the pulse's own effective axis, whose tilt from the pole follows from
    /// the first-lobe maximum transfer, sin²ϑ = P_max.
    EffectiveAxis { tilt_deg: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseCalibration {
    pub omega_p: f64,
    pub target_angle: f64,
    pub target_transfer: f64,
    pub achieved_transfer: f64,
    /// First-lobe maximum (amplitude, transfer).
    pub lobe_peak: (f64, f64),
    pub method: CalibrationMethod,
}

/// Coarse scan step for locating the first Rabi lobe, GHz.
const CAL_SCAN_STEP: f64 = 10.0;
const CAL_TOLERANCE: f64 = 1e-6;

/// First maximum of the dissipation-free transfer, refined by golden section.
fn first_lobe(params: &DoubleLambdaParams) -> Result<(f64, f64), ExperimentError> {
    let free = dissipation_free(params);
    let solver = calibration_solver();
    let transfer = |om: f64| -> Result<f64, ExperimentError> { Ok(single_pulse_populations(&free, om, &solver)?[UP]) };
    let mut prev = (0.0, 0.0);
    let mut cur = (CAL_SCAN_STEP, transfer(CAL_SCAN_STEP)?);
    let mut om = cur.0;
    while om < 2.0 * RABI_MAX_GHZ {
        om += CAL_SCAN_STEP;
        let next = (om, transfer(om)?);
        if next.1 < cur.1 {
            let (mut a, mut b) = (prev.0, next.0);
            let g = (5f64.sqrt() - 1.0) / 2.0;
            let mut c = b - g * (b - a);
            let mut d = a + g * (b - a);
            let (mut fc, mut fd) = (transfer(c)?, transfer(d)?);
            while b - a > 1e-3 {
                if fc > fd {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - g * (b - a);
                    fc = transfer(c)?;
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + g * (b - a);
                    fd = transfer(d)?;
                }
            }
            let m = 0.5 * (a + b);
            return Ok((m, transfer(m)?));
        }
        prev = cur;
        cur = next;
    }
    Err(ExperimentError::InvalidScan("no Rabi maximum below twice the amplitude range".into()))
}

fn bisect_transfer(params: &DoubleLambdaParams, hi: f64, target: f64) -> Result<(f64, f64), ExperimentError> {
    let free = dissipation_free(params);
    let solver = calibration_solver();
    let (mut a, mut b) = (0.0, hi);
    let mut best = (hi, f64::NAN);
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        let p = single_pulse_populations(&free, m, &solver)?[UP];
        best = (m, p);
        if (p - target).abs() < CAL_TOLERANCE {
            break;
        }
        if p < target {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(best)
}

/// Smallest amplitude on the rising side of the first lobe whose
/// dissipation-free transfer equals the geometric value for a rotation by
/// `target_angle` about the field-tilted axis.
pub fn calibrate_pulse(params: &DoubleLambdaParams, target_angle: f64) -> Result<PulseCalibration, ExperimentError> {
    params.validate()?;
    if !(target_angle > 0.0 && target_angle <= 180.0) {
        return Err(ExperimentError::InvalidScan(format!("target angle {target_angle}° must be in (0, 180]")));
    }
    let tilt = params.geometry.field_angle();
    let target = geometric_transfer(tilt, target_angle);
    let lobe = first_lobe(params)?;
    if target > lobe.1 + 1e-3 {
        return Err(ExperimentError::CalibrationFailed { target, reachable: lobe.1 });
    }
    let (omega_p, achieved) = if target >= lobe.1 { lobe } else { bisect_transfer(params, lobe.0, target)? };
    Ok(PulseCalibration {
        omega_p,
        target_angle,
        target_transfer: target,
        achieved_transfer: achieved,
        lobe_peak: lobe,
        method: CalibrationMethod::Geometric,
    })
}

/// Effective π/2 amplitude for Ramsey runs: the equator angle of the field
/// tilt, realised geometrically when possible, else about the pulse's
/// effective axis.
pub fn calibrate_ramsey_pulse(params: &DoubleLambdaParams) -> Result<PulseCalibration, ExperimentError> {
    let angle = equator_pulse_angle(params.geometry.field_angle())?;
    match calibrate_pulse(params, angle) {
        Err(ExperimentError::CalibrationFailed { .. }) => {}
        other => return other,
    }
    let lobe = first_lobe(params)?;
    let tilt_deg = lobe.1.clamp(0.0, 1.0).sqrt().asin().to_degrees();
    let target = geometric_transfer(tilt_deg, angle);
    let (omega_p, achieved) = bisect_transfer(params, lobe.0, target)?;
    Ok(PulseCalibration {
        omega_p,
        target_angle: angle,
        target_transfer: target,
        achieved_transfer: achieved,
        lobe_peak: lobe,
        method: CalibrationMethod::EffectiveAxis { tilt_deg },
    })
}

/// Damped-cosine fit of counts against delay, skipping rows whose pulses
/// overlap. Frequency in GHz, decay in 1/ns.
pub fn fringe_analysis(result: &SweepResult) -> Result<FringeFit, ExperimentError> {
    let tau = result
        .column(COL_TAU)
        .ok_or_else(|| ExperimentError::InvalidScan(format!("result has no {COL_TAU} column")))?;
    let counts = result.counts();
    let (t, y): (Vec<f64>, Vec<f64>) = tau
        .iter()
        .zip(&counts)
        .zip(&result.overlapping)
        .filter(|(_, &ov)| !ov)
        .map(|((&t, &n), _)| (t * 1e-3, n))
        .unzip();
    fit_damped_cosine(&t, &y)
}

/// Autocorrelation period (ps) along the delay axis of every amplitude row
/// of an SU(2) map. `None` where a row has no usable modulation.
pub fn su2_row_periods(result: &SweepResult) -> Result<Vec<(f64, Option<f64>)>, ExperimentError> {
    let (om, tau) = match (result.column(COL_OMEGA), result.column(COL_TAU)) {
        (Some(o), Some(t)) => (o, t),
        _ => return Err(ExperimentError::InvalidScan("result is not an SU(2) map".into())),
    };
    let counts = result.counts();
    let mut out = Vec::new();
    let mut start = 0;
    while start < om.len() {
        let mut end = start;
        while end < om.len() && om[end] == om[start] {
            end += 1;
        }
        out.push((om[start], autocorrelation_period(&tau[start..end], &counts[start..end])));
        start = end;
    }
    Ok(out)
}

/// Ramsey scan defaults for a geometry preset.
pub fn default_ramsey(geometry: Geometry) -> Result<(RamseyScan, PulseCalibration), ExperimentError> {
    RamseyScan::calibrated(crate::qdmodel::preset(geometry))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qdmodel::preset;

    #[test]
    fn grids() {
        let a = amplitude_grid(2550.0, 128);
        assert_eq!(a.len(), 128);
        assert!((a[0] - 2550.0 / 128.0).abs() < 1e-12 && a[127] == 2550.0);
        let d = delay_grid(0.0, 1.33, 751);
        assert_eq!(d.len(), 751);
        assert!((d[750] - 997.5).abs() < 1e-9);
        let s = Su2Scan::new(preset(Geometry::Oblique));
        assert_eq!(s.amplitudes.len() * s.delays_ps.len(), 64 * 90);
        assert!(s.delays_ps[0] == 20.0 && *s.delays_ps.last().unwrap() <= 140.0);
        assert_eq!(RamseyScan::new(preset(Geometry::Voigt), 900.0).cw_scale, cw_scale::RAMSEY);
    }

    #[test]
    fn geometric_transfer_values() {
        assert!((geometric_transfer(90.0, 180.0) - 1.0).abs() < 1e-15);
        assert!((geometric_transfer(90.0, 90.0) - 0.5).abs() < 1e-15);
        let a = equator_pulse_angle(60.0).unwrap();
        assert!((geometric_transfer(60.0, a) - 0.5).abs() < 1e-12);
        assert_eq!(geometric_transfer(60.0, 0.0), 0.0);
    }

    #[test]
    fn scan_validation() {
        let p = preset(Geometry::Oblique);
        let mut r = RabiScan::new(p.clone());
        r.amplitudes = vec![10.0, 5.0];
        assert!(matches!(run_rabi(&r), Err(ExperimentError::InvalidScan(_))));
        r.amplitudes = vec![];
        assert!(run_rabi(&r).is_err());
        let mut s = RamseyScan::new(p.clone(), 100.0);
        s.delays_ps = vec![-1.0];
        assert!(run_ramsey(&s).is_err());
        let mut m = Su2Scan::new(p);
        m.cw_scale = f64::NAN;
        assert!(run_su2_map(&m).is_err());
    }

    #[test]
    fn rabi_point_failure_names_coordinate() {
        let mut p = preset(Geometry::Oblique);
        p.t_window = 0.5;
        let mut r = RabiScan::new(p);
        r.amplitudes = vec![100.0];
        let err = run_rabi(&r).unwrap_err();
        assert!(matches!(err, ExperimentError::Point { .. }));
        assert!(err.to_string().contains("omega_p_GHz = 100"), "{err}");
    }

    #[test]
    fn su2_failures_are_collected() {
        let mut s = Su2Scan::new(preset(Geometry::Oblique));
        s.params.t_window = 1.02;
        s.amplitudes = vec![0.0];
        s.delays_ps = vec![1.0, 30.0];
        match run_su2_map(&s) {
            Err(ExperimentError::PartialSweep { failures, total, result }) => {
                assert_eq!(total, 2);
                assert_eq!(failures.len(), 1);
                assert_eq!(failures[0].index, 1);
                assert!(result.rows[0][2].is_finite() && result.rows[1][2].is_nan());
            }
            other => panic!("{other:?}"),
        }
    }
}
