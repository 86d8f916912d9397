//! Acceptance criteria 1–11, one PASS/FAIL line each.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use qdspin::experiments::{
    amplitude_grid, default_ramsey, fringe_analysis, run_rabi, run_ramsey, run_su2_map, su2_row_periods,
    CalibrationMethod, RabiScan, Su2Scan, SweepResult, SU2_AMPLITUDES,
};
use qdspin::lindblad::SolverOptions;
use qdspin::qdmodel::{preset, Geometry};
use qdspin::zeeman::{effective_g, equator_pulse_angle, larmor_frequency, GTensor, ZeemanModel};
use qdspin_cli::validate::{free_precession_fit, oracle_populations, two_level_error, zeeman_round_trip, ORACLE_DT};

struct Verdict {
    pass: bool,
    summary: String,
    notes: Vec<String>,
}

fn verdict(pass: bool, summary: String) -> Verdict {
    Verdict { pass, summary, notes: Vec::new() }
}

fn run(results: &mut Vec<(usize, bool)>, n: usize, title: &str, f: impl FnOnce() -> Result<Verdict, String>) {
    let t = Instant::now();
    let v = f().unwrap_or_else(|e| verdict(false, format!("error: {e}")));
    println!(
        "{} criterion {n:>2}: {title} ({:.1} s): {}",
        if v.pass { "PASS" } else { "FAIL" },
        t.elapsed().as_secs_f64(),
        v.summary
    );
    for note in &v.notes {
        println!("     note: {note}");
    }
    results.push((n, v.pass));
}

fn fine() -> SolverOptions {
    SolverOptions::with_tolerances(1e-10, 1e-12)
}

fn c1() -> Result<Verdict, String> {
    let t = Instant::now();
    let (lind, oracle) = oracle_populations(&preset(Geometry::Oblique), 1500.0, 1.0, ORACLE_DT, &fine())?;
    let elapsed = t.elapsed();
    let gap = (lind[0] - oracle[0]).abs().max((lind[1] - oracle[1]).abs());
    Ok(verdict(
        gap < 1e-6 && elapsed < Duration::from_secs(10),
        format!(
            "p1 = {:.9}, p2 = {:.9} vs oracle {:.9}, {:.9}; max gap {gap:.2e}; {:.2} s",
            lind[0],
            lind[1],
            oracle[0],
            oracle[1],
            elapsed.as_secs_f64()
        ),
    ))
}

struct RabiRuns {
    oblique: (SweepResult, Duration),
    voigt: (SweepResult, Duration),
}

fn rabi_scan(g: Geometry) -> Result<(SweepResult, Duration), String> {
    let mut scan = RabiScan::new(preset(g));
    scan.solver.check_positivity = true;
    let t = Instant::now();
    let r = run_rabi(&scan).map_err(|e| e.to_string())?;
    Ok((r, t.elapsed()))
}

fn c2(runs: &RabiRuns) -> Result<Verdict, String> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (g, (r, dt)) in [(Geometry::Oblique, &runs.oblique), (Geometry::Voigt, &runs.voigt)] {
        let s = &r.stats;
        let min_eig = s.min_eigenvalue.ok_or("positivity not recorded")?;
        let ok = s.max_trace_drift < 1e-8
            && s.max_hermiticity_defect < 1e-10
            && min_eig > -1e-8
            && *dt < Duration::from_secs(300)
            && r.len() == 128;
        pass &= ok;
        parts.push(format!(
            "{g}: {} points, trace drift {:.2e}, Hermiticity defect {:.2e}, min eigenvalue {:.2e}, {:.1} s",
            r.len(),
            s.max_trace_drift,
            s.max_hermiticity_defect,
            min_eig,
            dt.as_secs_f64()
        ));
    }
    Ok(verdict(pass, parts.join("; ")))
}

fn c3() -> Result<Verdict, String> {
    let mut worst = 0.0f64;
    for g in Geometry::ALL {
        worst = worst.max(two_level_error(&preset(g), &fine())?);
    }
    Ok(verdict(worst < 1e-8, format!("max |p44 − sin²(π k14 Ω_cw t)| = {worst:.2e} over 124 times, both presets")))
}

fn c4() -> Result<Verdict, String> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (g, f0) in [(Geometry::Oblique, 32.0), (Geometry::Voigt, 31.0)] {
        let fit = free_precession_fit(&preset(g), &fine())?;
        let rel = (fit.frequency / f0 - 1.0).abs();
        pass &= rel <= 1e-3;
        parts.push(format!("{g}: {:.6} GHz ({:+.2e} relative)", fit.frequency, fit.frequency / f0 - 1.0));
    }
    Ok(verdict(pass, parts.join("; ")))
}

fn c5() -> Result<Verdict, String> {
    let ge = effective_g(&GTensor::ELECTRON, 60.0).map_err(|e| e.to_string())?;
    let gh = effective_g(&GTensor::HOLE, 60.0).map_err(|e| e.to_string())?;
    let f = larmor_frequency(0.459, 5.0).map_err(|e| e.to_string())?;
    let pass = (ge - 0.459).abs() <= 1e-3 && (gh - 0.919).abs() <= 2e-3 && (f - 32.1).abs() <= 0.1;
    Ok(verdict(pass, format!("g_e = {ge:.5}, g_h = {gh:.5}, larmor_frequency(0.459, 5 T) = {f:.4} GHz")))
}

fn c6() -> Result<Verdict, String> {
    let a = equator_pulse_angle(60.0).map_err(|e| e.to_string())?;
    let b = equator_pulse_angle(90.0).map_err(|e| e.to_string())?;
    Ok(verdict((a - 109.471).abs() <= 0.01 && b == 90.0, format!("{a:.5}° at 60°, {b}° at 90°")))
}

/// Interior grid points strictly above both neighbours.
fn local_maxima(r: &SweepResult) -> Vec<(f64, f64)> {
    let n = r.counts();
    (1..n.len().saturating_sub(1))
        .filter(|&i| n[i] > n[i - 1] && n[i] > n[i + 1])
        .map(|i| (r.rows[i][0], n[i]))
        .collect()
}

fn c7(runs: &RabiRuns) -> Result<Verdict, String> {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut notes = Vec::new();
    for (g, (r, dt)) in [(Geometry::Oblique, &runs.oblique), (Geometry::Voigt, &runs.voigt)] {
        let peaks = local_maxima(r);
        let decreasing = peaks.windows(2).all(|w| w[1].1 < w[0].1);
        let ok = peaks.len() >= 3 && decreasing && *dt < Duration::from_secs(600);
        pass &= ok;
        let list: Vec<String> = peaks.iter().map(|(om, n)| format!("{om:.1} GHz → {n:.5}")).collect();
        parts.push(format!("{g}: {} maxima [{}], decreasing: {decreasing}", peaks.len(), list.join(", ")));
        if peaks.len() < 3 {
            notes.push(format!(
                "{g}: fewer than three lobes fit below {:.0} GHz at this pulse area per GHz",
                r.rows.last().map(|x| x[0]).unwrap_or(0.0)
            ));
        }
    }
    Ok(Verdict { pass, summary: parts.join("; "), notes })
}

fn c8() -> Result<Verdict, String> {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut notes = Vec::new();
    let t = Instant::now();
    for (g, f0) in [(Geometry::Oblique, 32.0), (Geometry::Voigt, 31.0)] {
        let tg = Instant::now();
        let (scan, cal) = default_ramsey(g).map_err(|e| e.to_string())?;
        let r = run_ramsey(&scan).map_err(|e| e.to_string())?;
        let fit = fringe_analysis(&r).map_err(|e| e.to_string())?;
        let freq_ok = (fit.frequency - f0).abs() <= 0.5;
        let phase_ok = match g {
            Geometry::Voigt => fit.phase.abs() < 0.05,
            Geometry::Oblique => fit.phase.abs() > 0.1,
        };
        pass &= freq_ok && phase_ok && r.len() == 751;
        let method = match cal.method {
            CalibrationMethod::Geometric => "geometric".to_string(),
            CalibrationMethod::EffectiveAxis { tilt_deg } => format!("effective axis {tilt_deg:.2}°"),
        };
        parts.push(format!(
            "{g}: f = {:.4} GHz, φ = {:+.4} rad ({}), Ω_p/2π = {:.2} GHz [{method}], {:.1} s",
            fit.frequency,
            fit.phase,
            match g {
                Geometry::Voigt => "|φ| < 0.05 required",
                Geometry::Oblique => "|φ| > 0.1 required",
            },
            cal.omega_p,
            tg.elapsed().as_secs_f64()
        ));
        if g == Geometry::Oblique {
            let soft = (fit.phase.abs() - 0.24).abs() <= 0.15;
            notes.push(format!(
                "soft: Oblique |φ| = {:.4} rad vs reference 0.24 ± 0.15 rad: {}",
                fit.phase.abs(),
                if soft { "inside" } else { "outside" }
            ));
        }
    }
    pass &= t.elapsed() < Duration::from_secs(900);
    Ok(Verdict { pass, summary: parts.join("; "), notes })
}

/// Amplitude rows of the reduced CI map.
const SU2_CI_ROWS: usize = 8;

fn c9() -> Result<Verdict, String> {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut notes = Vec::new();
    for (g, f0) in [(Geometry::Oblique, 32.0), (Geometry::Voigt, 31.0)] {
        let expected = 1000.0 / f0;
        let mut scan = Su2Scan::new(preset(g));
        scan.amplitudes = amplitude_grid(2550.0, SU2_CI_ROWS);
        let t = Instant::now();
        let r = run_su2_map(&scan).map_err(|e| e.to_string())?;
        let elapsed = t.elapsed();
        let rows = su2_row_periods(&r).map_err(|e| e.to_string())?;
        let found: Vec<f64> = rows.iter().filter_map(|&(_, p)| p).collect();
        let within = found.iter().filter(|p| (*p / expected - 1.0).abs() <= 0.02).count();
        let counts = r.counts();
        let nd = scan.delays_ps.len();
        let spread = |v: &[f64]| {
            let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            (hi - lo) / hi.abs().max(1e-300)
        };
        let along_delay = (0..SU2_CI_ROWS).map(|i| spread(&counts[i * nd..(i + 1) * nd])).fold(0.0, f64::max);
        let along_amp = (0..nd)
            .map(|j| spread(&(0..SU2_CI_ROWS).map(|i| counts[i * nd + j]).collect::<Vec<_>>()))
            .fold(0.0, f64::max);
        let full_estimate = elapsed.as_secs_f64() * (SU2_AMPLITUDES as f64 / SU2_CI_ROWS as f64) / 8.0;
        let ok = found.len() * 2 >= rows.len()
            && within == found.len()
            && along_delay > 0.05
            && along_amp > 0.05
            && full_estimate < 3600.0;
        pass &= ok;
        let list: Vec<String> = rows
            .iter()
            .map(|(om, p)| format!("{om:.0}:{}", p.map_or("-".to_string(), |p| format!("{p:.2}"))))
            .collect();
        parts.push(format!(
            "{g}: {within}/{} row periods within 2% of {expected:.2} ps [{}], relative range along τ {along_delay:.2}, along Ω {along_amp:.2}",
            found.len(),
            list.join(" ")
        ));
        notes.push(format!(
            "{g}: {SU2_CI_ROWS}×{nd} grid in {:.1} s; 64×{nd} with 8 workers extrapolates to {:.0} s",
            elapsed.as_secs_f64(),
            full_estimate
        ));
    }
    Ok(Verdict { pass, summary: parts.join("; "), notes })
}

fn c10() -> Result<Verdict, String> {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut notes = Vec::new();
    for (g, theta, gamma, seed) in [(Geometry::Oblique, 60.0, 6.021, 11), (Geometry::Voigt, 90.0, 4.395, 12)] {
        let model = ZeemanModel { e0: 1.3466e6, gamma_dia: gamma, electron: GTensor::ELECTRON, hole: GTensor::HOLE };
        let r = zeeman_round_trip(&model, theta, 100, 1.0, seed)?;
        pass &= r.gamma_bias < 0.02 && r.g_e_bias < 0.01 && r.g_h_bias < 0.01;
        parts.push(format!(
            "{g}: mean over {} runs off by γ {:.3}%, g_e {:.3}%, g_h {:.3}%",
            r.reps,
            r.gamma_bias * 100.0,
            r.g_e_bias * 100.0,
            r.g_h_bias * 100.0
        ));
        notes.push(format!(
            "{g}: worst single run γ {:.2}%, g {:.2}% (per-run scatter set by 1 μeV noise)",
            r.gamma_worst * 100.0,
            r.g_worst * 100.0
        ));
    }
    Ok(Verdict { pass, summary: parts.join("; "), notes })
}

fn c11() -> Result<Verdict, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_qdspin");
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "4", "4"].iter().enumerate() {
        let out = dir.path().join(format!("map{i}.csv"));
        let status = Command::new(bin)
            .args(["--threads", threads, "su2map", "--geometry", "voigt", "--out"])
            .arg(&out)
            .args(["--grid", "scan.su2_points=3", "--grid", "scan.su2_delay_points=8"])
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("su2map exited with {}", status.status));
        }
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    Ok(verdict(
        same,
        format!("3 invocations (1, 4, 4 threads), {} bytes each, byte-identical: {same}", outputs[0].len()),
    ))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut results = Vec::new();
    run(&mut results, 1, "solver-oracle equivalence", c1);
    let runs = match (rabi_scan(Geometry::Oblique), rabi_scan(Geometry::Voigt)) {
        (Ok(oblique), Ok(voigt)) => Some(RabiRuns { oblique, voigt }),
        (Err(e), _) | (_, Err(e)) => {
            println!("Rabi scans failed: {e}");
            None
        }
    };
    match &runs {
        Some(r) => {
            run(&mut results, 2, "conservation over a full Rabi scan", || c2(r));
        }
        None => results.push((2, false)),
    }
    run(&mut results, 3, "analytic two-level CW drive", c3);
    run(&mut results, 4, "Larmor frequency from free precession", c4);
    run(&mut results, 5, "g-factor pipeline", c5);
    run(&mut results, 6, "effective π/2 geometry", c6);
    match &runs {
        Some(r) => run(&mut results, 7, "Rabi structure", || c7(r)),
        None => results.push((7, false)),
    }
    run(&mut results, 8, "Ramsey frequencies and phases", c8);
    run(&mut results, 9, "SU(2) map periodicity (reduced grid)", c9);
    run(&mut results, 10, "Zeeman fit Monte-Carlo round trip", c10);
    run(&mut results, 11, "determinism of su2map output", c11);
    let failed: Vec<String> = results.iter().filter(|(_, p)| !p).map(|(n, _)| n.to_string()).collect();
    println!(
        "acceptance: {} of {} criteria passed in {:.0} s{}",
        results.len() - failed.len(),
        results.len(),
        start.elapsed().as_secs_f64(),
        if failed.is_empty() { String::new() } else { format!("; failed: {}", failed.join(", ")) }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
