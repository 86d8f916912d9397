//! Quick invariant and oracle suite run by `qdspin validate`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::time::{Duration, Instant};

use qdspin::experiments::{dissipation_free, fit_damped_cosine, run_rabi, run_su2_map, FringeFit, RabiScan, Su2Scan};
use qdspin::lindblad::{evolve, evolve_unitary, DensityMatrix, SolverOptions};
use qdspin::qdmodel::{
    assemble, build_collapse, build_h0, build_hcw, build_pulse_terms, readout, DoubleLambdaParams, PulseSpec,
    Transition, DIM, DOWN, UP,
};
use qdspin::qmath::{ComplexMatrix, Ket};
use qdspin::zeeman::{
    effective_g, equator_pulse_angle, fit_zeeman, larmor_frequency, synthetic_branches, BranchPoint, GTensor,
    ZeemanModel,
};
use qdspin::C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::config::Config;

/// Radiative scale the couplings are normalised to, 1/ns.
pub const REFERENCE_GAMMA0: f64 = 1.0;
/// Unitary oracle step, ns.
pub const ORACLE_DT: f64 = 2.5e-7;

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub checks: Vec<Check>,
    pub elapsed: Duration,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

type Outcome = Result<(bool, String), String>;

fn verdict(ok: bool, detail: String) -> Outcome {
    Ok((ok, detail))
}

/// Ground-state populations at the end of the window from the Lindblad
/// solver and from the unitary oracle, dissipation and CW included as given.
pub fn oracle_populations(
    params: &DoubleLambdaParams,
    omega_p: f64,
    t0: f64,
    dt: f64,
    opts: &SolverOptions,
) -> Result<([f64; 2], [f64; 2]), String> {
    let p = dissipation_free(params);
    let pulses = [PulseSpec::new(t0, omega_p)];
    let sys = assemble(&p, &pulses, 1.0).map_err(|e| e.to_string())?;
    let span = (0.0, p.t_window);
    let rho = evolve(&sys, &DensityMatrix::basis(DIM, DOWN), span, &[p.t_window], opts).map_err(|e| e.to_string())?;
    let st = &rho.states[0];
    let h = &build_h0(&p) + &build_hcw(&p);
    let terms = build_pulse_terms(&p, &pulses).map_err(|e| e.to_string())?;
    let psi = evolve_unitary(&h, &terms, &Ket::basis(DIM, DOWN), span, dt).map_err(|e| e.to_string())?;
    let pop = psi.populations();
    Ok(([st.population(UP), st.population(DOWN)], [pop[UP], pop[DOWN]]))
}

/// Largest deviation of the 1↔4 excited population from sin²(πk₁₄Ω_cw t)
/// with every other coupling and all dissipation removed.
pub fn two_level_error(params: &DoubleLambdaParams, opts: &SolverOptions) -> Result<f64, String> {
    let mut p = dissipation_free(params);
    p.k.k13 = 0.0;
    p.k.k23 = 0.0;
    p.k.k24 = 0.0;
    let sys = assemble(&p, &[], 1.0).map_err(|e| e.to_string())?;
    let times: Vec<f64> = (1..=124).map(|i| i as f64 * 0.1).collect();
    let tr = evolve(&sys, &DensityMatrix::basis(DIM, UP), (0.0, p.t_window), &times, opts).map_err(|e| e.to_string())?;
    let rate = PI * p.k.k14 * p.omega_cw;
    Ok(times
        .iter()
        .zip(&tr.states)
        .map(|(t, s)| (s.population(3) - (rate * t).sin().powi(2)).abs())
        .fold(0.0, f64::max))
}

/// Damped-cosine fit of Re ρ₁₂ during 1 ns of free precession from
/// (|1⟩+|2⟩)/√2 with CW and pulses off.
pub fn free_precession_fit(params: &DoubleLambdaParams, opts: &SolverOptions) -> Result<FringeFit, String> {
    let sys = assemble(params, &[], 0.0).map_err(|e| e.to_string())?;
    let amp = C64::new(FRAC_1_SQRT_2, 0.0);
    let mut v = vec![C64::new(0.0, 0.0); DIM];
    v[UP] = amp;
    v[DOWN] = amp;
    let psi = Ket::new(v).map_err(|e| e.to_string())?;
    let rho0 = DensityMatrix::from_ket(&psi).map_err(|e| e.to_string())?;
    let times: Vec<f64> = (1..=1000).map(|i| i as f64 * 1e-3).collect();
    let tr = evolve(&sys, &rho0, (0.0, 1.0), &times, opts).map_err(|e| e.to_string())?;
    let y: Vec<f64> = tr.states.iter().map(|s| s.coherence(UP, DOWN).re).collect();
    fit_damped_cosine(&times, &y).map_err(|e| e.to_string())
}

/// Relative errors of a Monte-Carlo Zeeman round trip.
#[derive(Clone, Copy, Debug)]
pub struct RoundTrip {
    pub reps: usize,
    /// |mean(fit)/true − 1| over the ensemble.
    pub gamma_bias: f64,
    pub g_e_bias: f64,
    pub g_h_bias: f64,
    /// Largest single-run |fit/true − 1|.
    pub gamma_worst: f64,
    pub g_worst: f64,
}

/// Fits `reps` noisy copies (Gaussian noise of `noise` μeV) of synthetic
/// four-branch data at 11 fields in [0, 5] T.
pub fn zeeman_round_trip(model: &ZeemanModel, theta: f64, reps: usize, noise: f64, seed: u64) -> Result<RoundTrip, String> {
    let fields: Vec<f64> = (0..11).map(|i| 0.5 * i as f64).collect();
    let clean = synthetic_branches(model, theta, &fields).map_err(|e| e.to_string())?;
    let ge = effective_g(&model.electron, theta).map_err(|e| e.to_string())?;
    let gh = effective_g(&model.hole, theta).map_err(|e| e.to_string())?;
    let normal = Normal::new(0.0, noise).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sums = [0.0; 3];
    let (mut gamma_worst, mut g_worst) = (0.0f64, 0.0f64);
    for _ in 0..reps {
        let noisy: Vec<BranchPoint> =
            clean.iter().map(|p| BranchPoint { energy: p.energy + normal.sample(&mut rng), ..*p }).collect();
        let fit = fit_zeeman(&noisy).map_err(|e| e.to_string())?;
        sums[0] += fit.gamma_dia;
        sums[1] += fit.g_e;
        sums[2] += fit.g_h;
        gamma_worst = gamma_worst.max((fit.gamma_dia / model.gamma_dia - 1.0).abs());
        g_worst = g_worst.max((fit.g_e / ge - 1.0).abs()).max((fit.g_h / gh - 1.0).abs());
    }
    let n = reps as f64;
    Ok(RoundTrip {
        reps,
        gamma_bias: (sums[0] / n / model.gamma_dia - 1.0).abs(),
        g_e_bias: (sums[1] / n / ge - 1.0).abs(),
        g_h_bias: (sums[2] / n / gh - 1.0).abs(),
        gamma_worst,
        g_worst,
    })
}

/// Counts of one pulse at `t0` and of the same pulse with the pulse and the
/// window end both moved `shift` ns earlier, so the time left after the pulse
/// is unchanged.
pub fn translated_counts(params: &DoubleLambdaParams, t0: f64, omega_p: f64, shift: f64) -> Result<(f64, f64), String> {
    let a = readout(params, &[PulseSpec::new(t0, omega_p)], 1.0).map_err(|e| e.to_string())?;
    let moved = DoubleLambdaParams { t_window: params.t_window - shift, ..params.clone() };
    let b = readout(&moved, &[PulseSpec::new(t0 - shift, omega_p)], 1.0).map_err(|e| e.to_string())?;
    Ok((a.counts, b.counts))
}

fn branching(cfg: &Config) -> Outcome {
    let p = &cfg.model;
    let channels = build_collapse(p, &[]).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for tr in Transition::ALL {
        let expected = p.k.get(tr).powi(2) * REFERENCE_GAMMA0;
        let op = ComplexMatrix::unit(DIM, tr.ground(), tr.excited());
        let rate: f64 = channels
            .iter()
            .filter(|c| c.operator == op)
            .map(|c| c.amplitude.eval(0.0).norm_sqr())
            .sum();
        worst = worst.max((rate - expected).abs());
        detail.push(format!("{tr:?} {rate:.6}/ns (expected {expected:.6})"));
    }
    let total4 = p.radiative_rate(Transition::T14) + p.radiative_rate(Transition::T24);
    let ratio = if total4 > 0.0 { p.radiative_rate(Transition::T24) / total4 } else { f64::NAN };
    let expected_ratio = p.k.k24.powi(2) / (p.k.k14.powi(2) + p.k.k24.powi(2));
    let ok = worst < 1e-12 && (ratio - expected_ratio).abs() < 1e-12;
    verdict(ok, format!("{}; readout branching 4→2 = {ratio:.6}", detail.join(", ")))
}

fn conservation(cfg: &Config) -> Outcome {
    let mut scan = RabiScan::new(cfg.model.clone());
    scan.amplitudes = (1..=8).map(|i| i as f64 * cfg.scan.rabi_max_ghz / 8.0).collect();
    scan.solver = SolverOptions { check_positivity: true, ..SolverOptions::with_tolerances(cfg.solver.rel_tol, cfg.solver.abs_tol) };
    let r = run_rabi(&scan).map_err(|e| e.to_string())?;
    let s = &r.stats;
    let min_eig = s.min_eigenvalue.unwrap_or(f64::NAN);
    let ok = s.max_trace_drift < 1e-8 && s.max_hermiticity_defect < 1e-10 && min_eig > -1e-8;
    verdict(
        ok,
        format!(
            "trace drift {:.2e}, Hermiticity defect {:.2e}, min eigenvalue {:.2e} over 8 Rabi points",
            s.max_trace_drift, s.max_hermiticity_defect, min_eig
        ),
    )
}

fn oracle(cfg: &Config) -> Outcome {
    let opts = SolverOptions::with_tolerances(1e-10, 1e-12);
    let (a, b) = oracle_populations(&cfg.model, 1500.0, cfg.scan.pulse_t0_ns, ORACLE_DT, &opts)?;
    let gap = (a[0] - b[0]).abs().max((a[1] - b[1]).abs());
    verdict(gap < 1e-6, format!("ground populations differ by {gap:.2e} at 1500 GHz"))
}

fn two_level(cfg: &Config) -> Outcome {
    let err = two_level_error(&cfg.model, &SolverOptions::with_tolerances(1e-10, 1e-12))?;
    verdict(err < 1e-8, format!("max |p44 - sin²| = {err:.2e}"))
}

fn larmor(cfg: &Config) -> Outcome {
    let fit = free_precession_fit(&cfg.model, &SolverOptions::with_tolerances(1e-10, 1e-12))?;
    let rel = (fit.frequency / cfg.model.de_gs - 1.0).abs();
    verdict(rel < 1e-3, format!("{:.5} GHz vs ΔE_gs {} GHz", fit.frequency, cfg.model.de_gs))
}

fn g_factors(_: &Config) -> Outcome {
    let ge = effective_g(&GTensor::ELECTRON, 60.0).map_err(|e| e.to_string())?;
    let gh = effective_g(&GTensor::HOLE, 60.0).map_err(|e| e.to_string())?;
    let f = larmor_frequency(ge, 5.0).map_err(|e| e.to_string())?;
    let ok = (ge - 0.459).abs() <= 1e-3 && (gh - 0.919).abs() <= 2e-3 && (f - 32.1).abs() <= 0.1;
    verdict(ok, format!("g_e {ge:.4}, g_h {gh:.4}, Larmor at 5 T {f:.3} GHz"))
}

fn equator(_: &Config) -> Outcome {
    let a = equator_pulse_angle(60.0).map_err(|e| e.to_string())?;
    let b = equator_pulse_angle(90.0).map_err(|e| e.to_string())?;
    verdict((a - 109.471).abs() <= 0.01 && b == 90.0, format!("{a:.4}° at 60°, {b}° at 90°"))
}

fn zeeman(cfg: &Config) -> Outcome {
    let z = &cfg.zeeman;
    let r = zeeman_round_trip(&z.model, z.theta_deg, 100, 1.0, 7)?;
    let ok = r.gamma_bias < 0.02 && r.g_e_bias < 0.01 && r.g_h_bias < 0.01;
    verdict(
        ok,
        format!(
            "ensemble bias γ {:.3}%, g_e {:.3}%, g_h {:.3}% over {} runs (worst single run γ {:.2}%, g {:.2}%)",
            r.gamma_bias * 100.0,
            r.g_e_bias * 100.0,
            r.g_h_bias * 100.0,
            r.reps,
            r.gamma_worst * 100.0,
            r.g_worst * 100.0
        ),
    )
}

fn determinism(cfg: &Config) -> Outcome {
    let mut scan = Su2Scan::new(cfg.model.clone());
    scan.amplitudes = vec![400.0, 800.0];
    scan.delays_ps = vec![20.0, 35.0, 50.0];
    let a = run_su2_map(&scan).map_err(|e| e.to_string())?;
    let b = run_su2_map(&scan).map_err(|e| e.to_string())?;
    let same = a.rows.iter().flatten().zip(b.rows.iter().flatten()).all(|(x, y)| x.to_bits() == y.to_bits());
    verdict(same, format!("{} map points bitwise {}", a.len(), if same { "identical" } else { "different" }))
}

fn translation(cfg: &Config) -> Outcome {
    let (n0, n1) = translated_counts(&cfg.model, cfg.scan.pulse_t0_ns, 900.0, 0.5)?;
    let rel = (n0 / n1 - 1.0).abs();
    verdict(rel < 1e-4, format!("N = {n0:.10} vs {n1:.10} with pulse and window end 0.5 ns earlier"))
}

type CheckFn = fn(&Config) -> Outcome;

const CHECKS: [(&str, CheckFn); 10] = [
    ("branching-ratio", branching),
    ("conservation", conservation),
    ("solver-oracle", oracle),
    ("two-level-cw", two_level),
    ("larmor-frequency", larmor),
    ("g-factors", g_factors),
    ("equator-angle", equator),
    ("zeeman-fit", zeeman),
    ("determinism", determinism),
    ("time-translation", translation),
];

pub fn run(cfg: &Config) -> Report {
    let start = Instant::now();
    let checks = CHECKS
        .iter()
        .map(|(name, f)| {
            let t = Instant::now();
            let (passed, detail) = match f(cfg) {
                Ok(v) => v,
                Err(e) => (false, format!("error: {e}")),
            };
            Check { name, passed, detail, elapsed: t.elapsed() }
        })
        .collect();
    Report { checks, elapsed: start.elapsed() }
}
