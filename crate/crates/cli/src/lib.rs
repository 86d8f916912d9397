//! Command-line front end for the qdspin simulator.

/// `println!` that ignores a closed stdout.
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

pub mod config;
pub mod plot;
pub mod validate;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use qdspin::experiments::{
    amplitude_grid, calibrate_ramsey_pulse, delay_grid, fringe_analysis, run_rabi, run_ramsey, run_su2_map,
    su2_row_periods, ExperimentError, FringeFit, PulseCalibration, RabiScan, RamseyScan, Su2Scan, SweepResult,
    COL_COUNTS, COL_OMEGA, COL_TAU,
};
use qdspin::lindblad::SolverOptions;
use qdspin::qdmodel::Geometry;
use qdspin::zeeman::{
    fit_zeeman, read_branch_points, resolve_g_tensor, synthetic_branches, write_branch_points, BranchPoint, GTensor,
    ZeemanFit,
};
use thiserror::Error;

use crate::config::{Config, ConfigError};
use crate::plot::{render, PlotSpec};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        CliError::Failed(e.to_string())
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Failed(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(name = "qdspin", version, about = "All-optical spin control of a charged quantum dot: Lindblad simulation")]
pub struct Cli {
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Source {
    /// Configuration file; omitted keys fall back to its geometry's preset.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Preset to use without a configuration file.
    #[arg(long, value_name = "GEOMETRY", conflicts_with = "config", default_value = "oblique")]
    pub geometry: Geometry,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: Source,
    /// Output CSV.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Optional SVG plot.
    #[arg(long, value_name = "PATH")]
    pub svg: Option<PathBuf>,
    /// Grid override, e.g. `--grid scan.delay_points=200` (repeatable).
    #[arg(long = "grid", value_name = "KEY=VALUE")]
    pub grid: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the full preset configuration of a geometry.
    Preset {
        geometry: Geometry,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Photon counts versus single-pulse amplitude.
    Rabi(SweepArgs),
    /// Photon counts versus delay between two identical pulses.
    Ramsey(SweepArgs),
    /// Photon counts versus amplitude and delay of a pulse pair.
    Su2map(SweepArgs),
    /// Four optical branch energies versus field strength.
    Zeeman {
        #[command(flatten)]
        source: Source,
        /// Largest field, T.
        #[arg(long, value_name = "TESLA")]
        b_max: Option<f64>,
        /// Number of field points.
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        #[arg(long, value_name = "PATH")]
        svg: Option<PathBuf>,
    },
    /// Fit E0, γ and the effective g-factors to branch energies.
    FitZeeman {
        /// CSV with columns B_tesla, s_e, s_h, energy_ueV.
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        /// Field tilt of the input data, degrees.
        #[arg(long, value_name = "DEG")]
        theta: f64,
        /// Second dataset at another tilt; resolves the g-tensor components.
        #[arg(long, value_name = "PATH", requires = "paired_theta")]
        paired: Option<PathBuf>,
        #[arg(long, value_name = "DEG", requires = "paired")]
        paired_theta: Option<f64>,
        /// Also write the report here.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Run the invariant and oracle suite.
    Validate {
        #[command(flatten)]
        source: Source,
    },
}

pub fn load(source: &Source) -> Result<Config, CliError> {
    match &source.config {
        Some(p) => Ok(Config::load(p)?),
        None => Ok(Config::preset(source.geometry)),
    }
}

/// Applies `--grid` overrides; only `scan.*` keys are accepted.
pub fn apply_grid(cfg: &mut Config, overrides: &[String]) -> Result<(), CliError> {
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--grid expects KEY=VALUE, got `{o}`")))?;
        let (k, v) = (k.trim(), v.trim());
        if !k.starts_with("scan.") || cfg.get(k).is_none() {
            return Err(CliError::Usage(format!("--grid accepts scan.* keys only, got `{k}`")));
        }
        cfg.set(k, v).map_err(|e| CliError::Usage(format!("--grid {k}: {e}")))?;
    }
    cfg.validate()?;
    Ok(())
}

fn solver(cfg: &Config) -> SolverOptions {
    SolverOptions::with_tolerances(cfg.solver.rel_tol, cfg.solver.abs_tol)
}

/// Writes a header row and one row per entry with shortest round-trip floats.
pub fn write_table(path: &Path, columns: &[String], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(file);
    let fail = |e: csv::Error| CliError::Failed(format!("{}: {e}", path.display()));
    w.write_record(columns).map_err(fail)?;
    for r in rows {
        w.write_record(r.iter().map(|v| v.to_string())).map_err(fail)?;
    }
    w.flush().map_err(io_err(path))
}

fn write_plot(path: &Path, spec: &PlotSpec, columns: &[String], rows: &[Vec<f64>]) -> Result<(), CliError> {
    let svg = render(spec, columns, rows).map_err(|e| CliError::Failed(e.to_string()))?;
    std::fs::write(path, svg).map_err(io_err(path))
}

pub fn cmd_preset(geometry: Geometry, out: Option<&Path>) -> Result<String, CliError> {
    let text = Config::preset(geometry).to_text();
    if let Some(p) = out {
        std::fs::write(p, &text).map_err(io_err(p))?;
    }
    Ok(text)
}

pub fn cmd_rabi(cfg: &Config, out: &Path, svg: Option<&Path>) -> Result<SweepResult, CliError> {
    let s = &cfg.scan;
    let scan = RabiScan {
        params: cfg.model.clone(),
        amplitudes: amplitude_grid(s.rabi_max_ghz, s.rabi_points),
        cw_scale: s.rabi_cw_scale,
        t0: s.pulse_t0_ns,
        solver: solver(cfg),
    };
    let r = run_rabi(&scan)?;
    write_table(out, &r.columns, &r.rows)?;
    if let Some(p) = svg {
        let title = format!("Rabi scan, {} geometry", cfg.model.geometry);
        write_plot(p, &PlotSpec::line(COL_OMEGA, COL_COUNTS, &title, "Ω_p/2π (GHz)", "photon counts N"), &r.columns, &r.rows)?;
    }
    Ok(r)
}

pub struct RamseyOutcome {
    pub result: SweepResult,
    pub omega_p: f64,
    pub calibration: Option<PulseCalibration>,
    pub fit: Result<FringeFit, String>,
}

pub fn cmd_ramsey(cfg: &Config, out: &Path, svg: Option<&Path>) -> Result<RamseyOutcome, CliError> {
    let s = &cfg.scan;
    let (omega_p, calibration) = match s.ramsey_omega_p_ghz {
        Some(om) => (om, None),
        None => {
            let cal = calibrate_ramsey_pulse(&cfg.model)?;
            (cal.omega_p, Some(cal))
        }
    };
    let scan = RamseyScan {
        params: cfg.model.clone(),
        omega_p,
        delays_ps: delay_grid(s.delay_start_ps, s.delay_step_ps, s.delay_points),
        cw_scale: s.ramsey_cw_scale,
        t0: s.pulse_t0_ns,
        solver: solver(cfg),
    };
    let result = run_ramsey(&scan)?;
    write_table(out, &result.columns, &result.rows)?;
    if let Some(p) = svg {
        let title = format!("Ramsey fringes, {} geometry, Ω_p/2π = {omega_p:.2} GHz", cfg.model.geometry);
        write_plot(p, &PlotSpec::line(COL_TAU, COL_COUNTS, &title, "delay τ (ps)", "photon counts N"), &result.columns, &result.rows)?;
    }
    let fit = fringe_analysis(&result).map_err(|e| e.to_string());
    Ok(RamseyOutcome { result, omega_p, calibration, fit })
}

/// Runs the map and writes every point; failed points appear as NaN and
/// make the command fail after the files are written.
pub fn cmd_su2map(cfg: &Config, out: &Path, svg: Option<&Path>) -> Result<SweepResult, CliError> {
    let s = &cfg.scan;
    let scan = Su2Scan {
        params: cfg.model.clone(),
        amplitudes: amplitude_grid(s.su2_max_ghz, s.su2_points),
        delays_ps: delay_grid(s.su2_delay_start_ps, s.su2_delay_step_ps, s.su2_delay_points),
        cw_scale: s.su2_cw_scale,
        t0: s.pulse_t0_ns,
        solver: solver(cfg),
    };
    let (result, failure) = match run_su2_map(&scan) {
        Ok(r) => (r, None),
        Err(ExperimentError::PartialSweep { failures, total, result }) => {
            let mut msg = format!("{} of {total} map points failed:", failures.len());
            for f in &failures {
                let _ = write!(msg, "\n  {}: {}", f.coords, f.message);
            }
            (*result, Some(msg))
        }
        Err(e) => return Err(e.into()),
    };
    write_table(out, &result.columns, &result.rows)?;
    if let Some(p) = svg {
        let title = format!("SU(2) map, {} geometry", cfg.model.geometry);
        let spec = PlotSpec::heatmap(COL_TAU, COL_OMEGA, COL_COUNTS, &title, ["delay τ (ps)", "Ω_p/2π (GHz)", "N"]);
        write_plot(p, &spec, &result.columns, &result.rows)?;
    }
    match failure {
        Some(msg) => Err(CliError::Failed(msg)),
        None => Ok(result),
    }
}

pub fn cmd_zeeman(cfg: &Config, b_max: f64, steps: usize, out: &Path, svg: Option<&Path>) -> Result<Vec<BranchPoint>, CliError> {
    if !(b_max.is_finite() && b_max >= 0.0) || steps == 0 {
        return Err(CliError::Usage(format!("field range needs B_max ≥ 0 and steps ≥ 1, got {b_max}, {steps}")));
    }
    let fields: Vec<f64> = if steps == 1 {
        vec![b_max]
    } else {
        (0..steps).map(|i| b_max * i as f64 / (steps - 1) as f64).collect()
    };
    let z = &cfg.zeeman;
    let points = synthetic_branches(&z.model, z.theta_deg, &fields).map_err(|e| CliError::Failed(e.to_string()))?;
    let file = File::create(out).map_err(io_err(out))?;
    write_branch_points(file, &points).map_err(|e| CliError::Failed(e.to_string()))?;
    if let Some(p) = svg {
        let columns = vec!["B_tesla".to_string(), "branch".to_string(), "energy_ueV".to_string()];
        let rows: Vec<Vec<f64>> = points
            .iter()
            .map(|pt| vec![pt.b_tesla, f64::from(2 * i32::from(pt.branch.s_e > 0) + i32::from(pt.branch.s_h > 0) + 1), pt.energy])
            .collect();
        let title = format!("Optical branches at {}° tilt", z.theta_deg);
        let spec = PlotSpec::line("B_tesla", "energy_ueV", &title, "B (T)", "transition energy (μeV)").grouped_by("branch");
        write_plot(p, &spec, &columns, &rows)?;
    }
    Ok(points)
}

pub struct ZeemanReport {
    pub fit: ZeemanFit,
    pub paired: Option<(ZeemanFit, GTensor, GTensor)>,
    pub text: String,
}

fn read_points(path: &Path) -> Result<Vec<BranchPoint>, CliError> {
    let file = File::open(path).map_err(io_err(path))?;
    read_branch_points(file).map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))
}

fn describe_fit(text: &mut String, label: &str, theta: f64, f: &ZeemanFit) {
    let _ = writeln!(text, "[{label}] theta_deg = {theta}");
    let _ = writeln!(text, "E0_ueV = {}", f.e0);
    let _ = writeln!(text, "gamma_dia_ueV_per_T2 = {}", f.gamma_dia);
    let _ = writeln!(text, "g_e_eff = {}", f.g_e);
    let _ = writeln!(text, "g_h_eff = {}", f.g_h);
    let _ = writeln!(text, "rms_residual_ueV = {}", f.rms_residual);
    let _ = writeln!(text, "condition = {}", f.condition);
}

pub fn cmd_fit_zeeman(
    input: &Path,
    theta: f64,
    paired: Option<(&Path, f64)>,
    out: Option<&Path>,
) -> Result<ZeemanReport, CliError> {
    let fail = |e: qdspin::zeeman::ZeemanError| CliError::Failed(e.to_string());
    let fit = fit_zeeman(&read_points(input)?).map_err(fail)?;
    let mut text = String::new();
    describe_fit(&mut text, "primary", theta, &fit);
    let paired = match paired {
        Some((path, theta_b)) => {
            let other = fit_zeeman(&read_points(path)?).map_err(fail)?;
            describe_fit(&mut text, "paired", theta_b, &other);
            let e = resolve_g_tensor(fit.g_e, theta, other.g_e, theta_b).map_err(fail)?;
            let h = resolve_g_tensor(fit.g_h, theta, other.g_h, theta_b).map_err(fail)?;
            let _ = writeln!(text, "[tensor]");
            let _ = writeln!(text, "ge_F = {}\nge_V = {}\ngh_F = {}\ngh_V = {}", e.g_f, e.g_v, h.g_f, h.g_v);
            Some((other, e, h))
        }
        None => None,
    };
    if let Some(p) = out {
        std::fs::write(p, &text).map_err(io_err(p))?;
    }
    Ok(ZeemanReport { fit, paired, text })
}

fn render_report(report: &validate::Report) -> String {
    let mut s = String::new();
    for c in &report.checks {
        let _ = writeln!(
            s,
            "{} {:<18} {:>7.2} s  {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.elapsed.as_secs_f64(),
            c.detail
        );
    }
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    let _ = writeln!(
        s,
        "{} of {} checks passed in {:.1} s{}",
        report.checks.len() - failed.len(),
        report.checks.len(),
        report.elapsed.as_secs_f64(),
        if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
    );
    s
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Preset { geometry, out } => {
            let text = cmd_preset(geometry, out.as_deref())?;
            if out.is_none() {
                let _ = write!(std::io::stdout(), "{text}");
            }
        }
        Command::Rabi(a) => {
            let mut cfg = load(&a.source)?;
            apply_grid(&mut cfg, &a.grid)?;
            let r = cmd_rabi(&cfg, &a.out, a.svg.as_deref())?;
            say!("wrote {} Rabi points to {}", r.len(), a.out.display());
        }
        Command::Ramsey(a) => {
            let mut cfg = load(&a.source)?;
            apply_grid(&mut cfg, &a.grid)?;
            let o = cmd_ramsey(&cfg, &a.out, a.svg.as_deref())?;
            if let Some(c) = &o.calibration {
                say!(
                    "calibrated pulse: Ω_p/2π = {:.4} GHz, transfer {:.4} ({:?})",
                    c.omega_p, c.achieved_transfer, c.method
                );
            }
            say!("wrote {} Ramsey points to {}", o.result.len(), a.out.display());
            match &o.fit {
                Ok(f) => say!(
                    "fringe: frequency {:.4} GHz, phase {:.4} rad, decay time {:.4} ns, visibility {:.4}",
                    f.frequency,
                    f.phase,
                    f.decay_time(),
                    f.visibility()
                ),
                Err(e) => say!("fringe fit unavailable: {e}"),
            }
        }
        Command::Su2map(a) => {
            let mut cfg = load(&a.source)?;
            apply_grid(&mut cfg, &a.grid)?;
            let r = cmd_su2map(&cfg, &a.out, a.svg.as_deref())?;
            say!("wrote {} map points to {}", r.len(), a.out.display());
            let mut periods: Vec<f64> = su2_row_periods(&r)?.into_iter().filter_map(|(_, p)| p).collect();
            if !periods.is_empty() {
                periods.sort_by(f64::total_cmp);
                say!("median row period {:.3} ps over {} rows", periods[periods.len() / 2], periods.len());
            }
        }
        Command::Zeeman { source, b_max, steps, out, svg } => {
            let cfg = load(&source)?;
            let b_max = b_max.unwrap_or(cfg.zeeman.b_max_t);
            let steps = steps.unwrap_or(cfg.zeeman.b_steps);
            let pts = cmd_zeeman(&cfg, b_max, steps, &out, svg.as_deref())?;
            say!("wrote {} branch energies to {}", pts.len(), out.display());
        }
        Command::FitZeeman { input, theta, paired, paired_theta, out } => {
            let pair = paired.as_deref().zip(paired_theta);
            let r = cmd_fit_zeeman(&input, theta, pair, out.as_deref())?;
            let _ = write!(std::io::stdout(), "{}", r.text);
        }
        Command::Validate { source } => {
            let cfg = load(&source)?;
            let report = validate::run(&cfg);
            let _ = write!(std::io::stdout(), "{}", render_report(&report));
            if !report.passed() {
                return Err(CliError::Failed("validation failed".into()));
            }
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be ≥ 1".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(cli.command)),
            Err(e) => Err(CliError::Failed(e.to_string())),
        },
        None => execute(cli.command),
    };
    match outcome {
        Ok(()) => {
            let _ = std::io::stdout().flush();
            0
        }
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            e.exit_code()
        }
    }
}
