//! Zeeman physics of the electron/trion pair and Bloch-sphere geometry of
//! rotations about a tilted axis.

use std::collections::BTreeSet;
use std::io::{Read, Write};

use thiserror::Error;

use crate::qmath::{lstsq, QmathError, RealMatrix};

/// Bohr magneton over Planck's constant, GHz/T.
pub const MU_B_GHZ_PER_T: f64 = 13.996_244_9;
/// Bohr magneton, μeV/T.
pub const MU_B_UEV_PER_T: f64 = 57.8838;

#[derive(Debug, Error)]
pub enum ZeemanError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("the equator cannot be reached by rotating the pole about an axis tilted {theta}° (< 45°)")]
    EquatorUnreachable { theta: f64 },
    #[error("degenerate fit: {0}")]
    DegenerateFit(#[source] QmathError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Out-of-plane (Faraday) and in-plane (Voigt) g-factor magnitudes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GTensor {
    pub g_f: f64,
    pub g_v: f64,
}

impl GTensor {
    pub const ELECTRON: GTensor = GTensor { g_f: 0.497, g_v: 0.446 };
    pub const HOLE: GTensor = GTensor { g_f: 1.823, g_v: 0.129 };
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldConfig {
    pub b_tesla: f64,
    /// Tilt from the growth axis, degrees.
    pub theta_deg: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeemanModel {
    /// Zero-field transition energy, μeV.
    pub e0: f64,
    /// Diamagnetic coefficient, μeV/T².
    pub gamma_dia: f64,
    pub electron: GTensor,
    pub hole: GTensor,
}

/// Electron and hole spin signs labelling one of the four optical lines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Branch {
    pub s_e: i8,
    pub s_h: i8,
}

impl Branch {
    pub const ALL: [Branch; 4] = [
        Branch { s_e: -1, s_h: -1 },
        Branch { s_e: -1, s_h: 1 },
        Branch { s_e: 1, s_h: -1 },
        Branch { s_e: 1, s_h: 1 },
    ];

    pub fn new(s_e: i8, s_h: i8) -> Result<Self, ZeemanError> {
        if s_e.abs() != 1 || s_h.abs() != 1 {
            return Err(ZeemanError::InvalidInput(format!("branch signs ({s_e}, {s_h}) must each be ±1")));
        }
        Ok(Self { s_e, s_h })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchPoint {
    pub b_tesla: f64,
    pub branch: Branch,
    /// Transition energy, μeV.
    pub energy: f64,
}

fn check_angle(theta: f64) -> Result<(), ZeemanError> {
    if !(0.0..=90.0).contains(&theta) {
        return Err(ZeemanError::InvalidInput(format!("angle {theta}° must lie in [0, 90]")));
    }
    Ok(())
}

/// Exact at 0° and 90°.
fn cos_sin_deg(deg: f64) -> (f64, f64) {
    if deg == 0.0 {
        (1.0, 0.0)
    } else if deg == 90.0 {
        (0.0, 1.0)
    } else {
        let (s, c) = deg.to_radians().sin_cos();
        (c, s)
    }
}

/// √((g_F cos θ)² + (g_V sin θ)²).
pub fn effective_g(g: &GTensor, theta_deg: f64) -> Result<f64, ZeemanError> {
    check_angle(theta_deg)?;
    let (c, s) = cos_sin_deg(theta_deg);
    Ok((g.g_f * c).hypot(g.g_v * s))
}

/// Spin precession frequency in GHz.
pub fn larmor_frequency(g_eff: f64, b_tesla: f64) -> Result<f64, ZeemanError> {
    if !(b_tesla >= 0.0) {
        return Err(ZeemanError::InvalidInput(format!("field {b_tesla} T must be ≥ 0")));
    }
    Ok(g_eff * MU_B_GHZ_PER_T * b_tesla)
}

/// Splitting in GHz corresponding to `g_eff` at `b_tesla`; same as [`larmor_frequency`].
pub fn zeeman_splitting_ghz(g_eff: f64, b_tesla: f64) -> Result<f64, ZeemanError> {
    larmor_frequency(g_eff, b_tesla)
}

fn branch_energy(e0: f64, gamma: f64, g_e: f64, g_h: f64, b: f64, br: Branch) -> f64 {
    e0 + gamma * b * b + (f64::from(br.s_e) * g_e + f64::from(br.s_h) * g_h) * MU_B_UEV_PER_T * b / 2.0
}

/// Energies (μeV) of the four lines, in [`Branch::ALL`] order.
pub fn transition_energies(model: &ZeemanModel, field: &FieldConfig) -> Result<[(Branch, f64); 4], ZeemanError> {
    if !(field.b_tesla >= 0.0 && field.b_tesla.is_finite()) {
        return Err(ZeemanError::InvalidInput(format!("field {} T must be finite and ≥ 0", field.b_tesla)));
    }
    let g_e = effective_g(&model.electron, field.theta_deg)?;
    let g_h = effective_g(&model.hole, field.theta_deg)?;
    Ok(Branch::ALL.map(|br| (br, branch_energy(model.e0, model.gamma_dia, g_e, g_h, field.b_tesla, br))))
}

/// Noiseless branch data on the given field values.
pub fn synthetic_branches(model: &ZeemanModel, theta_deg: f64, fields: &[f64]) -> Result<Vec<BranchPoint>, ZeemanError> {
    let mut out = Vec::with_capacity(4 * fields.len());
    for &b in fields {
        let field = FieldConfig { b_tesla: b, theta_deg };
        for (branch, energy) in transition_energies(model, &field)? {
            out.push(BranchPoint { b_tesla: b, branch, energy });
        }
    }
    Ok(out)
}

/// Parameters identifiable from a single tilt angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeemanFit {
    pub e0: f64,
    pub gamma_dia: f64,
    pub g_e: f64,
    pub g_h: f64,
    /// Root-mean-square residual, μeV.
    pub rms_residual: f64,
    pub condition: f64,
}

/// Simultaneous linear fit of all four branches in (E0, γ, g_e, g_h).
pub fn fit_zeeman(points: &[BranchPoint]) -> Result<ZeemanFit, ZeemanError> {
    if points.iter().any(|p| !(p.b_tesla.is_finite() && p.energy.is_finite())) {
        return Err(ZeemanError::InvalidInput("non-finite field or energy".into()));
    }
    let branches: BTreeSet<Branch> = points.iter().map(|p| p.branch).collect();
    if branches.len() < 4 {
        return Err(ZeemanError::InvalidInput(format!(
            "all four branches are required, found {}",
            branches.len()
        )));
    }
    let fields: BTreeSet<u64> = points.iter().map(|p| p.b_tesla.to_bits()).collect();
    if fields.len() < 2 {
        return Err(ZeemanError::DegenerateFit(QmathError::Underdetermined { rows: fields.len(), cols: 4 }));
    }
    if fields.len() < 4 {
        return Err(ZeemanError::InvalidInput(format!(
            "at least 4 distinct field values are required, found {}",
            fields.len()
        )));
    }
    let rows: Vec<Vec<f64>> = points
        .iter()
        .map(|p| {
            let z = MU_B_UEV_PER_T * p.b_tesla / 2.0;
            vec![1.0, p.b_tesla * p.b_tesla, f64::from(p.branch.s_e) * z, f64::from(p.branch.s_h) * z]
        })
        .collect();
    let design = RealMatrix::from_rows(&rows).map_err(ZeemanError::DegenerateFit)?;
    let obs: Vec<f64> = points.iter().map(|p| p.energy).collect();
    let sol = lstsq(&design, &obs).map_err(ZeemanError::DegenerateFit)?;
    let c = &sol.coefficients;
    Ok(ZeemanFit {
        e0: c[0],
        gamma_dia: c[1],
        g_e: c[2],
        g_h: c[3],
        rms_residual: sol.residual_norm / (points.len() as f64).sqrt(),
        condition: sol.condition,
    })
}

/// Recovers (g_F, g_V) from effective g-factors measured at two tilt angles.
pub fn resolve_g_tensor(g_a: f64, theta_a: f64, g_b: f64, theta_b: f64) -> Result<GTensor, ZeemanError> {
    check_angle(theta_a)?;
    check_angle(theta_b)?;
    let (ca, sa) = cos_sin_deg(theta_a);
    let (cb, sb) = cos_sin_deg(theta_b);
    let (ca2, sa2, cb2, sb2) = (ca * ca, sa * sa, cb * cb, sb * sb);
    let det = ca2 * sb2 - sa2 * cb2;
    if det.abs() < 1e-9 {
        return Err(ZeemanError::InvalidInput(format!(
            "angles {theta_a}° and {theta_b}° do not separate the in- and out-of-plane components"
        )));
    }
    let (ya, yb) = (g_a * g_a, g_b * g_b);
    let gf2 = (ya * sb2 - yb * sa2) / det;
    let gv2 = (ca2 * yb - cb2 * ya) / det;
    if gf2 < 0.0 || gv2 < 0.0 {
        return Err(ZeemanError::InvalidInput(format!(
            "effective g-factors {g_a} and {g_b} are inconsistent with a diagonal tensor"
        )));
    }
    Ok(GTensor { g_f: gf2.sqrt(), g_v: gv2.sqrt() })
}

pub type Vec3 = [f64; 3];

/// Control axis tilted by θ from ẑ towards x̂.
pub fn rotation_axis(theta_deg: f64) -> Result<Vec3, ZeemanError> {
    check_angle(theta_deg)?;
    let (c, s) = cos_sin_deg(theta_deg);
    Ok([s, 0.0, c])
}

/// Rotation angle about the tilted axis that carries the pole to the equator.
pub fn equator_pulse_angle(theta_deg: f64) -> Result<f64, ZeemanError> {
    check_angle(theta_deg)?;
    if theta_deg < 45.0 {
        return Err(ZeemanError::EquatorUnreachable { theta: theta_deg });
    }
    if theta_deg == 90.0 {
        return Ok(90.0);
    }
    if theta_deg == 45.0 {
        return Ok(180.0);
    }
    let t = theta_deg.to_radians().tan();
    Ok((-1.0 / (t * t)).clamp(-1.0, 1.0).acos().to_degrees())
}

/// Rodrigues rotation of `v` by `angle_deg` about unit `axis`.
pub fn rotate(v: Vec3, axis: Vec3, angle_deg: f64) -> Vec3 {
    let (s, c) = angle_deg.to_radians().sin_cos();
    let dot = axis[0] * v[0] + axis[1] * v[1] + axis[2] * v[2];
    let cross = [
        axis[1] * v[2] - axis[2] * v[1],
        axis[2] * v[0] - axis[0] * v[2],
        axis[0] * v[1] - axis[1] * v[0],
    ];
    std::array::from_fn(|i| v[i] * c + cross[i] * s + axis[i] * dot * (1.0 - c))
}

/// R(n̂, θ₂)·R(ẑ, φ)·R(n̂, θ₁) applied to the north pole.
pub fn compose_bloch(theta_axis: f64, pulse_angle: f64, precession_phase: f64, pulse_angle2: f64) -> Result<Vec3, ZeemanError> {
    let n = rotation_axis(theta_axis)?;
    let v = rotate([0.0, 0.0, 1.0], n, pulse_angle);
    let v = rotate(v, [0.0, 0.0, 1.0], precession_phase);
    Ok(rotate(v, n, pulse_angle2))
}

/// Result of scanning the free-precession phase between two equal pulses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseScan {
    /// Precession phase minimizing the final z, degrees in [0, 360).
    pub phi_star: f64,
    pub z_min: f64,
}

/// Brute-force scan of φ ∈ [0, 360) in `step_deg` increments for the
/// phase that sends the Bloch vector closest to the south pole.
pub fn scan_precession_phase(theta_axis: f64, pulse_angle: f64, step_deg: f64) -> Result<PhaseScan, ZeemanError> {
    if !(step_deg > 0.0 && step_deg <= 360.0) {
        return Err(ZeemanError::InvalidInput(format!("scan step {step_deg}° must be in (0, 360]")));
    }
    let steps = (360.0 / step_deg).round() as usize;
    let mut best = PhaseScan { phi_star: 0.0, z_min: f64::INFINITY };
    for k in 0..steps {
        let phi = k as f64 * step_deg;
        let z = compose_bloch(theta_axis, pulse_angle, phi, pulse_angle)?[2];
        if z < best.z_min {
            best = PhaseScan { phi_star: phi, z_min: z };
        }
    }
    Ok(best)
}

pub const CSV_HEADER: [&str; 4] = ["B_tesla", "s_e", "s_h", "energy_ueV"];

pub fn read_branch_points<R: Read>(reader: R) -> Result<Vec<BranchPoint>, ZeemanError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| ZeemanError::InvalidInput(format!("missing column {name:?}; expected {CSV_HEADER:?}")))
    };
    let idx = [col(CSV_HEADER[0])?, col(CSV_HEADER[1])?, col(CSV_HEADER[2])?, col(CSV_HEADER[3])?];
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |k: usize| -> Result<&str, ZeemanError> {
            rec.get(idx[k])
                .ok_or_else(|| ZeemanError::InvalidInput(format!("row {}: missing {}", line + 1, CSV_HEADER[k])))
        };
        let num = |k: usize| -> Result<f64, ZeemanError> {
            let s = field(k)?;
            s.parse::<f64>()
                .map_err(|_| ZeemanError::InvalidInput(format!("row {}: {} = {s:?} is not a number", line + 1, CSV_HEADER[k])))
        };
        let sign = |k: usize| -> Result<i8, ZeemanError> {
            let s = field(k)?;
            s.parse::<i8>()
                .map_err(|_| ZeemanError::InvalidInput(format!("row {}: {} = {s:?} must be -1 or 1", line + 1, CSV_HEADER[k])))
        };
        let b = num(0)?;
        if !(b >= 0.0 && b.is_finite()) {
            return Err(ZeemanError::InvalidInput(format!("row {}: field {b} must be ≥ 0", line + 1)));
        }
        out.push(BranchPoint {
            b_tesla: b,
            branch: Branch::new(sign(1)?, sign(2)?)?,
            energy: num(3)?,
        });
    }
    Ok(out)
}

pub fn write_branch_points<W: Write>(writer: W, points: &[BranchPoint]) -> Result<(), ZeemanError> {
    let mut wtr = csv::WriterBuilder::new().from_writer(writer);
    wtr.write_record(CSV_HEADER)?;
    for p in points {
        wtr.write_record([
            p.b_tesla.to_string(),
            p.branch.s_e.to_string(),
            p.branch.s_h.to_string(),
            p.energy.to_string(),
        ])?;
    }
    wtr.flush().map_err(csv::Error::from)?;
    Ok(())
}
