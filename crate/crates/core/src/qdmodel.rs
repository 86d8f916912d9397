//! Four-level double-Λ model of a charged quantum dot.
//!
//! Level labels (0-based indices in parentheses):
//!
//! * |1⟩ (0): spin-up ground state
//! * |2⟩ (1): spin-down ground state, the initial state
//! * |3⟩ (2): lower trion
//! * |4⟩ (3): upper trion
//!
//! A CW laser drives 1↔4 in its rotating frame; photons on 4→2 are counted.
//! Ultrafast detuned pulses couple both ground states to both trions.
//! Frequencies in [`DoubleLambdaParams`] are ordinary frequencies in GHz and
//! are converted to rad/ns here.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::lindblad::{
    integrate_observable, CollapseChannel, DensityMatrix, HamiltonianTerm, IntegratorStats, LindbladError,
    LindbladSystem, SolverOptions, TimeCoefficient, Window,
};
use crate::qmath::ComplexMatrix;

pub const DIM: usize = 4;
pub const UP: usize = 0;
pub const DOWN: usize = 1;
pub const TRION_LOW: usize = 2;
pub const TRION_HIGH: usize = 3;

/// Pulse terms vanish beyond this many σ_t from the pulse centre.
pub const PULSE_SUPPORT_SIGMAS: f64 = 6.0;
/// Integrator step cap inside pulse windows, as a fraction of σ_t.
pub const PULSE_STEP_FRACTION: f64 = 1.0 / 50.0;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("pulse at t0 = {t0} ns does not fit in the window [0, {t_window}] ns with a {margin} ns margin")]
    PulseOutsideWindow { t0: f64, t_window: f64, margin: f64 },
    #[error("invalid pulse: {0}")]
    InvalidPulse(String),
    #[error(transparent)]
    Lindblad(#[from] LindbladError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Geometry {
    Oblique,
    Voigt,
}

impl Geometry {
    pub const ALL: [Geometry; 2] = [Geometry::Oblique, Geometry::Voigt];

    /// Field tilt from the growth axis in degrees.
    pub fn field_angle(self) -> f64 {
        match self {
            Geometry::Oblique => 60.0,
            Geometry::Voigt => 90.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Geometry::Oblique => "oblique",
            Geometry::Voigt => "voigt",
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Geometry {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "oblique" => Ok(Geometry::Oblique),
            "voigt" => Ok(Geometry::Voigt),
            other => Err(ModelError::InvalidParams(format!(
                "unknown geometry {other:?} (expected oblique or voigt)"
            ))),
        }
    }
}

/// One optical transition, ground index × trion index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Transition {
    T13,
    T14,
    T23,
    T24,
}

impl Transition {
    pub const ALL: [Transition; 4] = [Transition::T13, Transition::T14, Transition::T23, Transition::T24];

    pub fn ground(self) -> usize {
        match self {
            Transition::T13 | Transition::T14 => UP,
            Transition::T23 | Transition::T24 => DOWN,
        }
    }

    pub fn excited(self) -> usize {
        match self {
            Transition::T13 | Transition::T23 => TRION_LOW,
            Transition::T14 | Transition::T24 => TRION_HIGH,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Dipole weights k_ij of the four transitions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Couplings {
    pub k13: f64,
    pub k14: f64,
    pub k23: f64,
    pub k24: f64,
}

impl Couplings {
    pub fn get(&self, t: Transition) -> f64 {
        match t {
            Transition::T13 => self.k13,
            Transition::T14 => self.k14,
            Transition::T23 => self.k23,
            Transition::T24 => self.k24,
        }
    }

    pub fn uniform(k: f64) -> Self {
        Self { k13: k, k14: k, k23: k, k24: k }
    }
}

/// Every parameter of the double-Λ model for one geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct DoubleLambdaParams {
    pub geometry: Geometry,
    /// Ground-state (electron) splitting, GHz.
    pub de_gs: f64,
    /// Trion (hole) splitting, GHz.
    pub de_es: f64,
    /// Rotating-frame offset of |3⟩, GHz.
    pub d_cw: f64,
    /// CW Rabi frequency, GHz.
    pub omega_cw: f64,
    /// Pulse carrier detuning, GHz.
    pub d_p: f64,
    /// Spectral standard deviation of the pulse field, GHz.
    pub sigma_f: f64,
    /// Polarization angles α, β in degrees.
    pub alpha_pol: f64,
    pub beta_pol: f64,
    pub k: Couplings,
    /// Relative sign of each transition dipole, order 13, 14, 23, 24.
    ///
    /// Multiplies the pulse drive only. The Voigt preset flips 2↔4 so that
    /// the two Raman paths via |3⟩ and |4⟩ add instead of cancelling.
    pub dipole_sign: [f64; 4],
    /// Radiative scale Γ₀, 1/ns. Γ_ji = k_ij² Γ₀.
    pub gamma0: f64,
    /// Static pure dephasing of the trions, 1/ns.
    pub gamma_dephasing: f64,
    /// Phonon coefficient in ns: dephasing rate α·Ω(t)² with Ω in rad/ns.
    pub alpha_phonon: f64,
    /// Also apply static dephasing to the two ground states.
    pub ground_dephasing: bool,
    /// Simulated window, ns.
    pub t_window: f64,
    /// Laser repetition rate, GHz.
    pub rep_rate: f64,
}

/// Gaussian pulse centred at `t0` (ns) with peak Rabi frequency `omega_p` (GHz).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseSpec {
    pub t0: f64,
    pub omega_p: f64,
}

impl PulseSpec {
    pub fn new(t0: f64, omega_p: f64) -> Self {
        Self { t0, omega_p }
    }
}

/// CW scale factors of the three experiments.
pub mod cw_scale {
    pub const RABI: f64 = 1.0;
    pub const RAMSEY: f64 = 0.577_350_269_189_625_8;
    pub const SU2: f64 = 0.5;
}

/// Exact at multiples of 90°.
fn cos_sin_deg(deg: f64) -> (f64, f64) {
    let r = deg.rem_euclid(360.0);
    if r == 0.0 {
        (1.0, 0.0)
    } else if r == 90.0 {
        (0.0, 1.0)
    } else if r == 180.0 {
        (-1.0, 0.0)
    } else if r == 270.0 {
        (0.0, -1.0)
    } else {
        let (s, c) = deg.to_radians().sin_cos();
        (c, s)
    }
}

/// Δ_cw that puts the CW laser on the 1↔4 resonance.
pub fn resonant_d_cw(de_gs: f64, de_es: f64) -> f64 {
    -(de_es + de_gs / 2.0)
}

pub fn preset(geometry: Geometry) -> DoubleLambdaParams {
    let (de_gs, de_es, alpha_pol, beta_pol, k, dipole_sign) = match geometry {
        Geometry::Oblique => (
            32.0,
            63.4,
            90.0,
            10.0,
            Couplings { k13: 0.25, k14: 0.75, k23: 0.75, k24: 0.25 },
            [1.0; 4],
        ),
        Geometry::Voigt => (31.0, 9.7, 45.0, 90.0, Couplings::uniform(0.5), [1.0, 1.0, 1.0, -1.0]),
    };
    DoubleLambdaParams {
        geometry,
        de_gs,
        de_es,
        d_cw: resonant_d_cw(de_gs, de_es),
        omega_cw: 1.0,
        d_p: -500.0,
        sigma_f: 98.0,
        alpha_pol,
        beta_pol,
        k,
        dipole_sign,
        gamma0: 1.0,
        gamma_dephasing: 1.0,
        alpha_phonon: 28e-6,
        ground_dephasing: false,
        t_window: 12.4,
        rep_rate: 0.0802,
    }
}

impl DoubleLambdaParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidParams(msg));
        let finite = [
            ("de_gs", self.de_gs),
            ("de_es", self.de_es),
            ("d_cw", self.d_cw),
            ("omega_cw", self.omega_cw),
            ("d_p", self.d_p),
            ("sigma_f", self.sigma_f),
            ("alpha_pol", self.alpha_pol),
            ("beta_pol", self.beta_pol),
            ("gamma0", self.gamma0),
            ("gamma_dephasing", self.gamma_dephasing),
            ("alpha_phonon", self.alpha_phonon),
            ("t_window", self.t_window),
            ("rep_rate", self.rep_rate),
        ];
        if let Some((name, v)) = finite.iter().find(|(_, v)| !v.is_finite()) {
            return bad(format!("{name} = {v} is not finite"));
        }
        for (name, v) in [("de_gs", self.de_gs), ("de_es", self.de_es), ("omega_cw", self.omega_cw), ("sigma_f", self.sigma_f)] {
            if v <= 0.0 {
                return bad(format!("{name} = {v} must be > 0"));
            }
        }
        for (name, v) in [
            ("gamma0", self.gamma0),
            ("gamma_dephasing", self.gamma_dephasing),
            ("alpha_phonon", self.alpha_phonon),
        ] {
            if v < 0.0 {
                return bad(format!("{name} = {v} must be ≥ 0"));
            }
        }
        for t in Transition::ALL {
            let k = self.k.get(t);
            if !(0.0..=1.0).contains(&k) {
                return bad(format!("coupling {t:?} = {k} must lie in [0, 1]"));
            }
        }
        if self.dipole_sign.iter().any(|s| s.abs() != 1.0) {
            return bad(format!("dipole signs {:?} must each be ±1", self.dipole_sign));
        }
        if !(self.t_window > 0.0 && self.rep_rate > 0.0) {
            return bad("t_window and rep_rate must be > 0".into());
        }
        if self.t_window > 1.0 / self.rep_rate * (1.0 + 1e-12) {
            return bad(format!(
                "t_window = {} ns exceeds one repetition period {} ns",
                self.t_window,
                1.0 / self.rep_rate
            ));
        }
        Ok(())
    }

    /// Radiative rate Γ_ji of the given transition, 1/ns.
    pub fn radiative_rate(&self, t: Transition) -> f64 {
        self.k.get(t).powi(2) * self.gamma0
    }

    /// Weight of the counted 4→2 channel.
    pub fn readout_rate(&self) -> f64 {
        self.radiative_rate(Transition::T24)
    }
}

/// Temporal width of the pulse envelope, σ_t = 1/(2π σ_f), in ns.
pub fn sigma_t(params: &DoubleLambdaParams) -> f64 {
    1.0 / (TAU * params.sigma_f)
}

/// Half-width of a pulse's support window, ns.
pub fn pulse_half_width(params: &DoubleLambdaParams) -> f64 {
    PULSE_SUPPORT_SIGMAS * sigma_t(params)
}

pub fn build_h0(params: &DoubleLambdaParams) -> ComplexMatrix {
    let p = params;
    ComplexMatrix::from_real_diag(&[
        -TAU * p.de_gs / 2.0,
        TAU * p.de_gs / 2.0,
        TAU * p.d_cw,
        TAU * (p.d_cw + p.de_es),
    ])
}

pub fn build_hcw(params: &DoubleLambdaParams) -> ComplexMatrix {
    let v = TAU * params.omega_cw / 2.0 * params.k.k14;
    let mut h = ComplexMatrix::zeros(DIM);
    h[(UP, TRION_HIGH)] = C64::new(v, 0.0);
    h[(TRION_HIGH, UP)] = C64::new(v, 0.0);
    h
}

/// Unit-amplitude polarization weights (w₁₃, w₁₄, w₂₃, w₂₄).
pub fn pulse_coefficients(params: &DoubleLambdaParams) -> [C64; 4] {
    let (ca, sa) = cos_sin_deg(params.alpha_pol);
    let (cb, sb) = cos_sin_deg(params.beta_pol);
    let straight = C64::new(ca, 0.0);
    let crossed = C64::new(cb * sa, sb * sa);
    match params.geometry {
        Geometry::Oblique => [crossed, straight, crossed, straight],
        Geometry::Voigt => [crossed, straight, straight, crossed],
    }
}

fn check_pulses(params: &DoubleLambdaParams, pulses: &[PulseSpec]) -> Result<(), ModelError> {
    let margin = pulse_half_width(params);
    for p in pulses {
        if !(p.omega_p.is_finite() && p.omega_p >= 0.0) {
            return Err(ModelError::InvalidPulse(format!("amplitude {} GHz must be finite and ≥ 0", p.omega_p)));
        }
        if !(p.t0.is_finite() && p.t0 - margin >= 0.0 && p.t0 + margin <= params.t_window) {
            return Err(ModelError::PulseOutsideWindow { t0: p.t0, t_window: params.t_window, margin });
        }
    }
    Ok(())
}

/// True when two pulse centres are closer than twice the support half-width.
pub fn pulses_overlap(params: &DoubleLambdaParams, pulses: &[PulseSpec]) -> bool {
    let min_sep = 2.0 * pulse_half_width(params);
    pulses
        .iter()
        .enumerate()
        .any(|(i, a)| pulses[i + 1..].iter().any(|b| (a.t0 - b.t0).abs() < min_sep))
}

fn pulse_window(params: &DoubleLambdaParams, p: &PulseSpec) -> Window {
    let hw = pulse_half_width(params);
    Window::new(p.t0 - hw, p.t0 + hw, PULSE_STEP_FRACTION * sigma_t(params))
}

/// One Hamiltonian term per transition and pulse, operator |i⟩⟨j| with
/// coefficient ½ s k w · 2πΩ_p · exp(−(t−t₀)²/2σ_t²) · e^{−i 2π Δ_p t}.
pub fn build_pulse_terms(params: &DoubleLambdaParams, pulses: &[PulseSpec]) -> Result<Vec<HamiltonianTerm>, ModelError> {
    check_pulses(params, pulses)?;
    let weights = pulse_coefficients(params);
    let st = sigma_t(params);
    let inv_two_var = 1.0 / (2.0 * st * st);
    let carrier = -TAU * params.d_p;
    let mut terms = Vec::with_capacity(4 * pulses.len());
    for pulse in pulses {
        for tr in Transition::ALL {
            let i = tr.index();
            let amp = weights[i] * (0.5 * params.dipole_sign[i] * params.k.get(tr) * TAU * pulse.omega_p);
            let t0 = pulse.t0;
            let coeff = TimeCoefficient::windowed(
                move |t| {
                    let env = (-(t - t0).powi(2) * inv_two_var).exp();
                    amp * env * C64::from_polar(1.0, carrier * t)
                },
                vec![pulse_window(params, pulse)],
            );
            terms.push(HamiltonianTerm::new(ComplexMatrix::unit(DIM, tr.ground(), tr.excited()), coeff));
        }
    }
    Ok(terms)
}

/// Radiative decay, static dephasing and pulse-driven phonon dephasing.
pub fn build_collapse(params: &DoubleLambdaParams, pulses: &[PulseSpec]) -> Result<Vec<CollapseChannel>, ModelError> {
    check_pulses(params, pulses)?;
    let mut channels = Vec::new();
    if params.gamma0 > 0.0 {
        for tr in Transition::ALL {
            let rate = params.radiative_rate(tr);
            if rate > 0.0 {
                channels.push(CollapseChannel::with_rate(ComplexMatrix::unit(DIM, tr.ground(), tr.excited()), rate));
            }
        }
    }
    let dephased: &[usize] = if params.ground_dephasing {
        &[UP, DOWN, TRION_LOW, TRION_HIGH]
    } else {
        &[TRION_LOW, TRION_HIGH]
    };
    if params.gamma_dephasing > 0.0 {
        for &j in dephased {
            channels.push(CollapseChannel::with_rate(ComplexMatrix::unit(DIM, j, j), params.gamma_dephasing));
        }
    }
    let driven: Vec<&PulseSpec> = pulses.iter().filter(|p| p.omega_p > 0.0).collect();
    if params.alpha_phonon > 0.0 && !driven.is_empty() {
        let st = sigma_t(params);
        let inv_two_var = 1.0 / (2.0 * st * st);
        let scale = params.alpha_phonon.sqrt() * TAU;
        let centres: Vec<(f64, f64)> = driven.iter().map(|p| (p.t0, p.omega_p)).collect();
        let windows: Vec<Window> = driven.iter().map(|p| pulse_window(params, p)).collect();
        for j in [TRION_LOW, TRION_HIGH] {
            let centres = centres.clone();
            let amp = TimeCoefficient::windowed(
                move |t| {
                    let env: f64 = centres.iter().map(|&(t0, om)| om * (-(t - t0).powi(2) * inv_two_var).exp()).sum();
                    C64::new(scale * env, 0.0)
                },
                windows.clone(),
            );
            channels.push(CollapseChannel::new(ComplexMatrix::unit(DIM, j, j), amp));
        }
    }
    Ok(channels)
}

pub fn assemble(params: &DoubleLambdaParams, pulses: &[PulseSpec], cw_scale: f64) -> Result<LindbladSystem, ModelError> {
    params.validate()?;
    if !(cw_scale.is_finite() && cw_scale >= 0.0) {
        return Err(ModelError::InvalidParams(format!("cw_scale = {cw_scale} must be finite and ≥ 0")));
    }
    let h_static = &build_h0(params) + &build_hcw(params).scale_real(cw_scale);
    let terms = build_pulse_terms(params, pulses)?;
    let collapse = build_collapse(params, pulses)?;
    Ok(LindbladSystem::new(h_static, terms, collapse)?)
}

/// Integrator settings used for readouts unless overridden.
pub fn readout_solver() -> SolverOptions {
    SolverOptions::with_tolerances(1e-9, 1e-11)
}

#[derive(Clone, Debug)]
pub struct Readout {
    /// Time-integrated photon number on 4→2.
    pub counts: f64,
    pub final_state: DensityMatrix,
    pub stats: IntegratorStats,
}

/// Photon counts N = ∫ Γ₄₂ ⟨p₄₄⟩ dt over the window, starting in |2⟩.
pub fn readout(params: &DoubleLambdaParams, pulses: &[PulseSpec], cw_scale: f64) -> Result<Readout, ModelError> {
    readout_with(params, pulses, cw_scale, &readout_solver())
}

pub fn readout_with(
    params: &DoubleLambdaParams,
    pulses: &[PulseSpec],
    cw_scale: f64,
    opts: &SolverOptions,
) -> Result<Readout, ModelError> {
    let system = assemble(params, pulses, cw_scale)?;
    let r = integrate_observable(
        &system,
        &DensityMatrix::basis(DIM, DOWN),
        (0.0, params.t_window),
        params.readout_rate(),
        &ComplexMatrix::unit(DIM, TRION_HIGH, TRION_HIGH),
        opts,
    )?;
    Ok(Readout {
        counts: r.value,
        final_state: r.final_state,
        stats: r.stats,
    })
}

/// Pulse area ∫ 2πΩ(t) dt of one pulse at amplitude `omega_p` (GHz), rad.
pub fn pulse_area(params: &DoubleLambdaParams, omega_p: f64) -> f64 {
    TAU * omega_p * sigma_t(params) * (2.0 * PI).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn sigma_t_is_fourier_width() {
        let p = preset(Geometry::Oblique);
        let st = sigma_t(&p);
        assert!(close(st, 1.0 / (2.0 * PI * 98.0), 1e-15));
        assert!(close(st, 1.6240e-3, 1e-7));
        // intensity FWHM ≈ 2.70 ps
        let fwhm_ps = 2.0 * st * 2f64.ln().sqrt() * 1e3;
        assert!(close(fwhm_ps, 2.70, 0.01), "{fwhm_ps}");
        let doubled = DoubleLambdaParams { sigma_f: 196.0, ..p };
        assert!(close(sigma_t(&doubled), st / 2.0, 1e-15));
    }

    #[test]
    fn h0_oblique_diagonal() {
        let p = preset(Geometry::Oblique);
        let h = build_h0(&p);
        let want = [-16.0, 16.0, -79.4, -16.0];
        for (k, w) in want.iter().enumerate() {
            assert!(close(h[(k, k)].re / TAU, *w, 1e-12));
        }
        assert!(close(h.trace().re / TAU, 2.0 * p.d_cw + p.de_es, 1e-12));
        // 1↔4 resonance in the rotating frame
        assert!(close(h[(0, 0)].re, h[(3, 3)].re, 1e-12));
    }

    #[test]
    fn hcw_entries() {
        let p = preset(Geometry::Oblique);
        let h = build_hcw(&p);
        assert!(close(h[(0, 3)].re / TAU, 0.375, 1e-15));
        assert_eq!(h.hermiticity_defect(), 0.0);
        assert_eq!(h.trace(), C64::new(0.0, 0.0));
        let off = DoubleLambdaParams { omega_cw: 1e-300, ..p };
        assert!(build_hcw(&off).max_abs() < 1e-290);
    }

    #[test]
    fn polarization_weights() {
        let w = pulse_coefficients(&preset(Geometry::Oblique));
        let e10 = C64::from_polar(1.0, 10f64.to_radians());
        assert_eq!(w[1], C64::new(0.0, 0.0));
        assert_eq!(w[3], C64::new(0.0, 0.0));
        assert!((w[0] - e10).norm() < 1e-15 && (w[2] - e10).norm() < 1e-15);

        let w = pulse_coefficients(&preset(Geometry::Voigt));
        let r = 0.5f64.sqrt();
        assert!((w[1] - C64::new(r, 0.0)).norm() < 1e-15);
        assert!((w[2] - C64::new(r, 0.0)).norm() < 1e-15);
        assert!((w[0] - C64::new(0.0, r)).norm() < 1e-15);
        assert!((w[3] - C64::new(0.0, r)).norm() < 1e-15);

        for g in Geometry::ALL {
            let p = DoubleLambdaParams { alpha_pol: 0.0, ..preset(g) };
            let w = pulse_coefficients(&p);
            assert_eq!(w[1], C64::new(1.0, 0.0));
            assert_eq!(w[0], C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn presets() {
        let o = preset(Geometry::Oblique);
        let v = preset(Geometry::Voigt);
        assert_eq!(o.de_gs, 32.0);
        assert_eq!(v.de_es, 9.7);
        assert!(close(o.d_cw, -79.4, 1e-12));
        assert!(close(v.d_cw, -25.2, 1e-12));
        o.validate().unwrap();
        v.validate().unwrap();
        assert!(o.t_window <= 1.0 / o.rep_rate);
    }

    #[test]
    fn invalid_params() {
        let p = preset(Geometry::Oblique);
        for bad in [
            DoubleLambdaParams { de_gs: 0.0, ..p.clone() },
            DoubleLambdaParams { sigma_f: -1.0, ..p.clone() },
            DoubleLambdaParams { gamma0: -1.0, ..p.clone() },
            DoubleLambdaParams { k: Couplings { k13: 1.2, ..p.k }, ..p.clone() },
            DoubleLambdaParams { t_window: 20.0, ..p.clone() },
            DoubleLambdaParams { dipole_sign: [1.0, 0.5, 1.0, 1.0], ..p.clone() },
            DoubleLambdaParams { d_p: f64::NAN, ..p.clone() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn pulse_term_peak_and_support() {
        let p = preset(Geometry::Oblique);
        let pulse = PulseSpec::new(1.0, 1500.0);
        let terms = build_pulse_terms(&p, &[pulse]).unwrap();
        assert_eq!(terms.len(), 4);
        let hw = pulse_half_width(&p);
        for (tr, term) in Transition::ALL.iter().zip(&terms) {
            let peak = term.coeff.eval(1.0).norm();
            let w = pulse_coefficients(&p)[tr.index()].norm();
            assert!(close(peak, 0.5 * p.k.get(*tr) * w * TAU * 1500.0, 1e-9));
            assert_eq!(term.coeff.eval(1.0 + 1.01 * hw), C64::new(0.0, 0.0));
            assert_eq!(term.coeff.eval(1.0 - 1.01 * hw), C64::new(0.0, 0.0));
        }
        assert_eq!(terms[1].coeff.eval(1.0).norm(), 0.0);
        assert!(terms[0].coeff.eval(1.0).norm() > 0.0);
        let zero = build_pulse_terms(&p, &[PulseSpec::new(1.0, 0.0)]).unwrap();
        for t in [0.999, 1.0, 1.003] {
            assert!(zero.iter().all(|term| term.coeff.eval(t) == C64::new(0.0, 0.0)));
        }
    }

    #[test]
    fn pulses_must_fit() {
        let p = preset(Geometry::Oblique);
        assert!(matches!(
            build_pulse_terms(&p, &[PulseSpec::new(0.001, 100.0)]),
            Err(ModelError::PulseOutsideWindow { .. })
        ));
        assert!(build_pulse_terms(&p, &[PulseSpec::new(12.399, 100.0)]).is_err());
        assert!(build_pulse_terms(&p, &[PulseSpec::new(1.0, -1.0)]).is_err());
    }

    #[test]
    fn overlap_flag() {
        let p = preset(Geometry::Oblique);
        let st = sigma_t(&p);
        assert!(pulses_overlap(&p, &[PulseSpec::new(1.0, 1.0), PulseSpec::new(1.0 + 11.0 * st, 1.0)]));
        assert!(!pulses_overlap(&p, &[PulseSpec::new(1.0, 1.0), PulseSpec::new(1.0 + 13.0 * st, 1.0)]));
        assert!(!pulses_overlap(&p, &[PulseSpec::new(1.0, 1.0)]));
    }

    #[test]
    fn collapse_channels() {
        let o = preset(Geometry::Oblique);
        let ch = build_collapse(&o, &[]).unwrap();
        // four radiative + two dephasing, no phonon without pulses
        assert_eq!(ch.len(), 6);
        let rate_of = |p: &DoubleLambdaParams, chans: &[CollapseChannel], g: usize, e: usize| -> f64 {
            chans
                .iter()
                .filter(|c| c.operator == ComplexMatrix::unit(DIM, g, e))
                .map(|c| c.amplitude.eval(0.0).re.powi(2))
                .sum::<f64>()
                / p.gamma0.max(1e-300)
        };
        let g41 = rate_of(&o, &ch, UP, TRION_HIGH);
        let g42 = rate_of(&o, &ch, DOWN, TRION_HIGH);
        assert!(close(g41 / g42, 9.0, 1e-12));
        assert!(close(g41 + g42, 0.625, 1e-12));

        let v = preset(Geometry::Voigt);
        let ch = build_collapse(&v, &[]).unwrap();
        assert!(close(rate_of(&v, &ch, UP, TRION_HIGH), 0.25, 1e-12));
        assert!(close(rate_of(&v, &ch, DOWN, TRION_HIGH), 0.25, 1e-12));

        let silent = DoubleLambdaParams { gamma0: 0.0, gamma_dephasing: 0.0, alpha_phonon: 0.0, ..o.clone() };
        assert!(build_collapse(&silent, &[PulseSpec::new(1.0, 500.0)]).unwrap().is_empty());

        let with_ground = DoubleLambdaParams { ground_dephasing: true, ..o.clone() };
        assert_eq!(build_collapse(&with_ground, &[]).unwrap().len(), 8);
    }

    #[test]
    fn phonon_rate_scales_with_drive_squared() {
        let o = preset(Geometry::Oblique);
        let ch = build_collapse(&o, &[PulseSpec::new(1.0, 1000.0)]).unwrap();
        let phonon: Vec<_> = ch.iter().filter(|c| c.amplitude.is_bounded()).collect();
        assert_eq!(phonon.len(), 2);
        let rate = phonon[0].amplitude.eval(1.0).re.powi(2);
        assert!(close(rate, o.alpha_phonon * (TAU * 1000.0).powi(2), 1e-9));
    }

    #[test]
    fn assembled_hamiltonian_is_hermitian() {
        for g in Geometry::ALL {
            let p = preset(g);
            let sys = assemble(&p, &[PulseSpec::new(1.0, 2000.0), PulseSpec::new(1.05, 800.0)], 0.5).unwrap();
            let st = sigma_t(&p);
            for k in -70..=70 {
                for t0 in [1.0, 1.05] {
                    let h = sys.hamiltonian(t0 + k as f64 * st / 10.0);
                    assert!(h.hermiticity_defect() <= 1e-12 * h.max_abs(), "{g} t offset {k}");
                }
            }
        }
    }

    #[test]
    fn readout_zero_cases() {
        let o = preset(Geometry::Oblique);
        let dark = readout(&o, &[], 1.0).unwrap();
        assert!(dark.counts < 1e-6 * o.readout_rate() * o.t_window, "{}", dark.counts);
        let no_gamma = DoubleLambdaParams { gamma0: 0.0, ..o.clone() };
        assert_eq!(readout(&no_gamma, &[PulseSpec::new(1.0, 800.0)], 1.0).unwrap().counts, 0.0);
    }

    #[test]
    fn geometry_parse() {
        assert_eq!("Oblique".parse::<Geometry>().unwrap(), Geometry::Oblique);
        assert_eq!(" voigt ".parse::<Geometry>().unwrap(), Geometry::Voigt);
        assert!("faraday".parse::<Geometry>().is_err());
    }
}
