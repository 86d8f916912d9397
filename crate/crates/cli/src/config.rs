//! Flat `key = value` configuration with unit-suffixed keys.

use std::fmt::Write as _;
use std::path::Path;

use qdspin::experiments::{
    RABI_MAX_GHZ, RABI_POINTS, RAMSEY_POINTS, RAMSEY_STEP_PS, SU2_AMPLITUDES, SU2_DELAYS, SU2_DELAY_START_PS,
    FIRST_PULSE_T0,
};
use qdspin::qdmodel::{cw_scale, preset, DoubleLambdaParams, Geometry};
use qdspin::zeeman::{GTensor, ZeemanModel};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`\n{}", schema_listing())]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: `{key}` = `{value}`: {message}")]
    BadValue { line: usize, key: String, value: String, message: String },
    #[error("missing required key `model.geometry` (oblique or voigt)")]
    MissingGeometry,
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanConfig {
    pub pulse_t0_ns: f64,
    pub rabi_max_ghz: f64,
    pub rabi_points: usize,
    pub rabi_cw_scale: f64,
    /// `None` calibrates an effective π/2 pulse at run time.
    pub ramsey_omega_p_ghz: Option<f64>,
    pub delay_start_ps: f64,
    pub delay_step_ps: f64,
    pub delay_points: usize,
    pub ramsey_cw_scale: f64,
    pub su2_max_ghz: f64,
    pub su2_points: usize,
    pub su2_delay_start_ps: f64,
    pub su2_delay_step_ps: f64,
    pub su2_delay_points: usize,
    pub su2_cw_scale: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ZeemanConfig {
    pub model: ZeemanModel,
    pub theta_deg: f64,
    pub b_max_t: f64,
    pub b_steps: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub model: DoubleLambdaParams,
    pub solver: SolverConfig,
    pub scan: ScanConfig,
    pub zeeman: ZeemanConfig,
}

/// Every accepted key with its meaning and unit.
pub const SCHEMA: &[(&str, &str)] = &[
    ("model.geometry", "oblique | voigt"),
    ("model.dE_gs_GHz", "ground-state splitting ΔE_gs/2π, GHz"),
    ("model.dE_es_GHz", "trion splitting ΔE_es/2π, GHz"),
    ("model.d_cw_GHz", "rotating-frame offset Δ_cw/2π, GHz"),
    ("model.omega_cw_GHz", "CW Rabi frequency Ω_cw/2π, GHz"),
    ("model.d_p_GHz", "pulse carrier detuning Δ_p/2π, GHz"),
    ("model.sigma_f_GHz", "pulse spectral width σ_f, GHz"),
    ("model.alpha_pol_deg", "polarization angle α, degrees"),
    ("model.beta_pol_deg", "polarization angle β, degrees"),
    ("model.k13", "coupling k13, dimensionless"),
    ("model.k14", "coupling k14, dimensionless"),
    ("model.k23", "coupling k23, dimensionless"),
    ("model.k24", "coupling k24, dimensionless"),
    ("model.sign13", "pulse dipole sign of 1-3, ±1"),
    ("model.sign14", "pulse dipole sign of 1-4, ±1"),
    ("model.sign23", "pulse dipole sign of 2-3, ±1"),
    ("model.sign24", "pulse dipole sign of 2-4, ±1"),
    ("model.gamma0_per_ns", "radiative scale Γ0, 1/ns"),
    ("model.gamma_dephasing_per_ns", "static trion dephasing γ_d, 1/ns"),
    ("model.alpha_phonon_ns", "phonon coefficient α, ns (rate α·Ω², Ω in rad/ns)"),
    ("model.ground_dephasing", "apply γ_d to the ground states too, true | false"),
    ("model.t_window_ns", "simulated window, ns"),
    ("model.rep_rate_GHz", "laser repetition rate, GHz"),
    ("solver.rel_tol", "relative tolerance, dimensionless"),
    ("solver.abs_tol", "absolute tolerance, dimensionless"),
    ("scan.pulse_t0_ns", "centre of the first pulse, ns"),
    ("scan.rabi_max_GHz", "largest Rabi amplitude Ω_p/2π, GHz"),
    ("scan.rabi_points", "Rabi grid points, count"),
    ("scan.rabi_cw_scale", "CW scale during the Rabi scan, dimensionless"),
    ("scan.ramsey_omega_p_GHz", "Ramsey pulse amplitude, GHz, or auto"),
    ("scan.delay_start_ps", "first Ramsey delay, ps"),
    ("scan.delay_step_ps", "Ramsey delay step, ps"),
    ("scan.delay_points", "Ramsey delay points, count"),
    ("scan.ramsey_cw_scale", "CW scale during the Ramsey scan, dimensionless"),
    ("scan.su2_max_GHz", "largest SU(2) map amplitude, GHz"),
    ("scan.su2_points", "SU(2) map amplitude points, count"),
    ("scan.su2_delay_start_ps", "first SU(2) map delay, ps"),
    ("scan.su2_delay_step_ps", "SU(2) map delay step, ps"),
    ("scan.su2_delay_points", "SU(2) map delay points, count"),
    ("scan.su2_cw_scale", "CW scale during the SU(2) map, dimensionless"),
    ("zeeman.E0_ueV", "zero-field transition energy, μeV"),
    ("zeeman.gamma_dia_ueV_per_T2", "diamagnetic coefficient, μeV/T²"),
    ("zeeman.ge_F", "electron g-tensor, out-of-plane component"),
    ("zeeman.ge_V", "electron g-tensor, in-plane component"),
    ("zeeman.gh_F", "hole g-tensor, out-of-plane component"),
    ("zeeman.gh_V", "hole g-tensor, in-plane component"),
    ("zeeman.theta_deg", "field tilt from the growth axis, degrees"),
    ("zeeman.B_max_T", "largest field of a Zeeman sweep, T"),
    ("zeeman.B_steps", "field points of a Zeeman sweep, count"),
];

/// Where each preset value comes from.
fn origin(key: &str) -> &'static str {
    match key {
        "model.geometry" => "field geometry",
        "model.d_cw_GHz" => "derived: CW laser resonant with 1-4",
        "model.sign13" | "model.sign14" | "model.sign23" => "model convention",
        "model.sign24" => "model convention: Voigt flips 2-4 so the Raman paths add",
        "model.ground_dephasing" => "model choice: dephasing acts on the trions",
        "model.t_window_ns" | "model.rep_rate_GHz" => "published simulation parameter",
        "model.gamma0_per_ns" => "published simulation parameter, Γ_ji = k_ij² Γ0",
        k if k.starts_with("model.") => "published simulation parameter",
        "solver.rel_tol" | "solver.abs_tol" => "default: converged to 1e-10 relative in the readout",
        "scan.delay_step_ps" | "scan.su2_delay_step_ps" => "published delay step",
        "scan.ramsey_cw_scale" | "scan.su2_cw_scale" | "scan.rabi_cw_scale" => "published CW power ratio",
        "scan.rabi_max_GHz" => "published largest amplitude",
        k if k.starts_with("scan.") => "default grid",
        "zeeman.gamma_dia_ueV_per_T2" => "fitted diamagnetic coefficient for this geometry",
        "zeeman.E0_ueV" => "default offset",
        "zeeman.theta_deg" => "field tilt of this geometry",
        "zeeman.B_max_T" | "zeeman.B_steps" => "default sweep",
        _ => "measured g-tensor component",
    }
}

pub fn schema_listing() -> String {
    let mut s = String::from("accepted keys:\n");
    for (k, d) in SCHEMA {
        let _ = writeln!(s, "  {k:<30} {d}");
    }
    s
}

impl Config {
    pub fn preset(geometry: Geometry) -> Self {
        let (theta_deg, gamma_dia) = match geometry {
            Geometry::Oblique => (60.0, 6.021),
            Geometry::Voigt => (90.0, 4.395),
        };
        Self {
            model: preset(geometry),
            solver: SolverConfig { rel_tol: 1e-9, abs_tol: 1e-11 },
            scan: ScanConfig {
                pulse_t0_ns: FIRST_PULSE_T0,
                rabi_max_ghz: RABI_MAX_GHZ,
                rabi_points: RABI_POINTS,
                rabi_cw_scale: cw_scale::RABI,
                ramsey_omega_p_ghz: None,
                delay_start_ps: 0.0,
                delay_step_ps: RAMSEY_STEP_PS,
                delay_points: RAMSEY_POINTS,
                ramsey_cw_scale: cw_scale::RAMSEY,
                su2_max_ghz: RABI_MAX_GHZ,
                su2_points: SU2_AMPLITUDES,
                su2_delay_start_ps: SU2_DELAY_START_PS,
                su2_delay_step_ps: RAMSEY_STEP_PS,
                su2_delay_points: SU2_DELAYS,
                su2_cw_scale: cw_scale::SU2,
            },
            zeeman: ZeemanConfig {
                model: ZeemanModel { e0: 1.3466e6, gamma_dia, electron: GTensor::ELECTRON, hole: GTensor::HOLE },
                theta_deg,
                b_max_t: 5.0,
                b_steps: 11,
            },
        }
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    /// Parses a document. `model.geometry` selects the preset that supplies
    /// every key the document omits.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: Vec<(usize, String, String)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((k, v)) = content.split_once('=') else {
                return Err(ConfigError::Syntax { line, message: format!("expected `key = value`, got `{content}`") });
            };
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if k.is_empty() || v.is_empty() {
                return Err(ConfigError::Syntax { line, message: "empty key or value".into() });
            }
            if !SCHEMA.iter().any(|(s, _)| *s == k) {
                return Err(ConfigError::UnknownKey { line, key: k });
            }
            if entries.iter().any(|(_, e, _)| *e == k) {
                return Err(ConfigError::Duplicate { line, key: k });
            }
            entries.push((line, k, v));
        }
        let (gline, _, gval) = entries.iter().find(|(_, k, _)| k == "model.geometry").ok_or(ConfigError::MissingGeometry)?;
        let geometry: Geometry = gval.parse().map_err(|e: qdspin::qdmodel::ModelError| ConfigError::BadValue {
            line: *gline,
            key: "model.geometry".into(),
            value: gval.clone(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::preset(geometry);
        for (line, k, v) in &entries {
            cfg.set(k, v).map_err(|message| ConfigError::BadValue {
                line: *line,
                key: k.clone(),
                value: v.clone(),
                message,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Assigns one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let f = || value.parse::<f64>().map_err(|e| format!("not a number: {e}"));
        let n = || value.parse::<usize>().map_err(|e| format!("not a count: {e}"));
        let m = &mut self.model;
        let s = &mut self.scan;
        let z = &mut self.zeeman;
        match key {
            "model.geometry" => m.geometry = value.parse().map_err(|e: qdspin::qdmodel::ModelError| e.to_string())?,
            "model.dE_gs_GHz" => m.de_gs = f()?,
            "model.dE_es_GHz" => m.de_es = f()?,
            "model.d_cw_GHz" => m.d_cw = f()?,
            "model.omega_cw_GHz" => m.omega_cw = f()?,
            "model.d_p_GHz" => m.d_p = f()?,
            "model.sigma_f_GHz" => m.sigma_f = f()?,
            "model.alpha_pol_deg" => m.alpha_pol = f()?,
            "model.beta_pol_deg" => m.beta_pol = f()?,
            "model.k13" => m.k.k13 = f()?,
            "model.k14" => m.k.k14 = f()?,
            "model.k23" => m.k.k23 = f()?,
            "model.k24" => m.k.k24 = f()?,
            "model.sign13" => m.dipole_sign[0] = f()?,
            "model.sign14" => m.dipole_sign[1] = f()?,
            "model.sign23" => m.dipole_sign[2] = f()?,
            "model.sign24" => m.dipole_sign[3] = f()?,
            "model.gamma0_per_ns" => m.gamma0 = f()?,
            "model.gamma_dephasing_per_ns" => m.gamma_dephasing = f()?,
            "model.alpha_phonon_ns" => m.alpha_phonon = f()?,
            "model.ground_dephasing" => {
                m.ground_dephasing = value.parse().map_err(|_| "expected true or false".to_string())?
            }
            "model.t_window_ns" => m.t_window = f()?,
            "model.rep_rate_GHz" => m.rep_rate = f()?,
            "solver.rel_tol" => self.solver.rel_tol = f()?,
            "solver.abs_tol" => self.solver.abs_tol = f()?,
            "scan.pulse_t0_ns" => s.pulse_t0_ns = f()?,
            "scan.rabi_max_GHz" => s.rabi_max_ghz = f()?,
            "scan.rabi_points" => s.rabi_points = n()?,
            "scan.rabi_cw_scale" => s.rabi_cw_scale = f()?,
            "scan.ramsey_omega_p_GHz" => s.ramsey_omega_p_ghz = if value == "auto" { None } else { Some(f()?) },
            "scan.delay_start_ps" => s.delay_start_ps = f()?,
            "scan.delay_step_ps" => s.delay_step_ps = f()?,
            "scan.delay_points" => s.delay_points = n()?,
            "scan.ramsey_cw_scale" => s.ramsey_cw_scale = f()?,
            "scan.su2_max_GHz" => s.su2_max_ghz = f()?,
            "scan.su2_points" => s.su2_points = n()?,
            "scan.su2_delay_start_ps" => s.su2_delay_start_ps = f()?,
            "scan.su2_delay_step_ps" => s.su2_delay_step_ps = f()?,
            "scan.su2_delay_points" => s.su2_delay_points = n()?,
            "scan.su2_cw_scale" => s.su2_cw_scale = f()?,
            "zeeman.E0_ueV" => z.model.e0 = f()?,
            "zeeman.gamma_dia_ueV_per_T2" => z.model.gamma_dia = f()?,
            "zeeman.ge_F" => z.model.electron.g_f = f()?,
            "zeeman.ge_V" => z.model.electron.g_v = f()?,
            "zeeman.gh_F" => z.model.hole.g_f = f()?,
            "zeeman.gh_V" => z.model.hole.g_v = f()?,
            "zeeman.theta_deg" => z.theta_deg = f()?,
            "zeeman.B_max_T" => z.b_max_t = f()?,
            "zeeman.B_steps" => z.b_steps = n()?,
            _ => return Err(format!("unknown key\n{}", schema_listing())),
        }
        Ok(())
    }

    /// Textual value of one key; `None` for keys outside the schema.
    pub fn get(&self, key: &str) -> Option<String> {
        let m = &self.model;
        let s = &self.scan;
        let z = &self.zeeman;
        let v = match key {
            "model.geometry" => m.geometry.name().to_string(),
            "model.dE_gs_GHz" => m.de_gs.to_string(),
            "model.dE_es_GHz" => m.de_es.to_string(),
            "model.d_cw_GHz" => m.d_cw.to_string(),
            "model.omega_cw_GHz" => m.omega_cw.to_string(),
            "model.d_p_GHz" => m.d_p.to_string(),
            "model.sigma_f_GHz" => m.sigma_f.to_string(),
            "model.alpha_pol_deg" => m.alpha_pol.to_string(),
            "model.beta_pol_deg" => m.beta_pol.to_string(),
            "model.k13" => m.k.k13.to_string(),
            "model.k14" => m.k.k14.to_string(),
            "model.k23" => m.k.k23.to_string(),
            "model.k24" => m.k.k24.to_string(),
            "model.sign13" => m.dipole_sign[0].to_string(),
            "model.sign14" => m.dipole_sign[1].to_string(),
            "model.sign23" => m.dipole_sign[2].to_string(),
            "model.sign24" => m.dipole_sign[3].to_string(),
            "model.gamma0_per_ns" => m.gamma0.to_string(),
            "model.gamma_dephasing_per_ns" => m.gamma_dephasing.to_string(),
            "model.alpha_phonon_ns" => m.alpha_phonon.to_string(),
            "model.ground_dephasing" => m.ground_dephasing.to_string(),
            "model.t_window_ns" => m.t_window.to_string(),
            "model.rep_rate_GHz" => m.rep_rate.to_string(),
            "solver.rel_tol" => self.solver.rel_tol.to_string(),
            "solver.abs_tol" => self.solver.abs_tol.to_string(),
            "scan.pulse_t0_ns" => s.pulse_t0_ns.to_string(),
            "scan.rabi_max_GHz" => s.rabi_max_ghz.to_string(),
            "scan.rabi_points" => s.rabi_points.to_string(),
            "scan.rabi_cw_scale" => s.rabi_cw_scale.to_string(),
            "scan.ramsey_omega_p_GHz" => s.ramsey_omega_p_ghz.map_or("auto".into(), |v| v.to_string()),
            "scan.delay_start_ps" => s.delay_start_ps.to_string(),
            "scan.delay_step_ps" => s.delay_step_ps.to_string(),
            "scan.delay_points" => s.delay_points.to_string(),
            "scan.ramsey_cw_scale" => s.ramsey_cw_scale.to_string(),
            "scan.su2_max_GHz" => s.su2_max_ghz.to_string(),
            "scan.su2_points" => s.su2_points.to_string(),
            "scan.su2_delay_start_ps" => s.su2_delay_start_ps.to_string(),
            "scan.su2_delay_step_ps" => s.su2_delay_step_ps.to_string(),
            "scan.su2_delay_points" => s.su2_delay_points.to_string(),
            "scan.su2_cw_scale" => s.su2_cw_scale.to_string(),
            "zeeman.E0_ueV" => z.model.e0.to_string(),
            "zeeman.gamma_dia_ueV_per_T2" => z.model.gamma_dia.to_string(),
            "zeeman.ge_F" => z.model.electron.g_f.to_string(),
            "zeeman.ge_V" => z.model.electron.g_v.to_string(),
            "zeeman.gh_F" => z.model.hole.g_f.to_string(),
            "zeeman.gh_V" => z.model.hole.g_v.to_string(),
            "zeeman.theta_deg" => z.theta_deg.to_string(),
            "zeeman.B_max_T" => z.b_max_t.to_string(),
            "zeeman.B_steps" => z.b_steps.to_string(),
            _ => return None,
        };
        Some(v)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        self.model.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let SolverConfig { rel_tol, abs_tol } = self.solver;
        if !(rel_tol > 0.0 && rel_tol < 1.0 && abs_tol > 0.0 && abs_tol < 1.0) {
            return bad(format!("solver tolerances ({rel_tol}, {abs_tol}) must lie in (0, 1)"));
        }
        let s = &self.scan;
        for (name, v) in [
            ("scan.rabi_points", s.rabi_points),
            ("scan.delay_points", s.delay_points),
            ("scan.su2_points", s.su2_points),
            ("scan.su2_delay_points", s.su2_delay_points),
            ("zeeman.B_steps", self.zeeman.b_steps),
        ] {
            if v == 0 {
                return bad(format!("{name} must be ≥ 1"));
            }
        }
        for (name, v) in [
            ("scan.rabi_max_GHz", s.rabi_max_ghz),
            ("scan.su2_max_GHz", s.su2_max_ghz),
            ("scan.delay_step_ps", s.delay_step_ps),
            ("scan.su2_delay_step_ps", s.su2_delay_step_ps),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} = {v} must be > 0"));
            }
        }
        for (name, v) in [
            ("scan.delay_start_ps", s.delay_start_ps),
            ("scan.su2_delay_start_ps", s.su2_delay_start_ps),
            ("scan.rabi_cw_scale", s.rabi_cw_scale),
            ("scan.ramsey_cw_scale", s.ramsey_cw_scale),
            ("scan.su2_cw_scale", s.su2_cw_scale),
            ("zeeman.B_max_T", self.zeeman.b_max_t),
            ("zeeman.gamma_dia_ueV_per_T2", self.zeeman.model.gamma_dia),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} = {v} must be ≥ 0"));
            }
        }
        if let Some(om) = s.ramsey_omega_p_ghz {
            if !(om.is_finite() && om >= 0.0) {
                return bad(format!("scan.ramsey_omega_p_GHz = {om} must be ≥ 0"));
            }
        }
        if !(s.pulse_t0_ns.is_finite() && s.pulse_t0_ns > 0.0) {
            return bad(format!("scan.pulse_t0_ns = {} must be > 0", s.pulse_t0_ns));
        }
        if !(0.0..=90.0).contains(&self.zeeman.theta_deg) {
            return bad(format!("zeeman.theta_deg = {} must lie in [0, 90]", self.zeeman.theta_deg));
        }
        Ok(())
    }

    /// Full document, one commented line per key.
    pub fn to_text(&self) -> String {
        let mut out = format!("# qdspin configuration, {} geometry\n", self.model.geometry);
        let mut section = "";
        for (key, doc) in SCHEMA {
            let sec = key.split('.').next().unwrap_or("");
            if sec != section {
                let _ = writeln!(out, "\n# [{sec}]");
                section = sec;
            }
            let value = self.get(key).expect("schema key");
            let _ = writeln!(out, "{key} = {value}  # {doc}; {}", origin(key));
        }
        out
    }
}
