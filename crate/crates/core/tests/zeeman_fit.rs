use qdspin::zeeman::{
    effective_g, fit_zeeman, read_branch_points, resolve_g_tensor, synthetic_branches, write_branch_points,
    BranchPoint, GTensor, ZeemanModel,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

fn model(gamma_dia: f64) -> ZeemanModel {
    ZeemanModel { e0: 1.3466e6, gamma_dia, electron: GTensor::ELECTRON, hole: GTensor::HOLE }
}

fn fields() -> Vec<f64> {
    (0..11).map(|i| 0.5 * i as f64).collect()
}

/// Ensemble means and sample standard deviations of (γ, g_e, g_h).
fn ensemble(m: &ZeemanModel, theta: f64, reps: usize, seed: u64) -> ([f64; 3], [f64; 3]) {
    let clean = synthetic_branches(m, theta, &fields()).unwrap();
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let fits: Vec<[f64; 3]> = (0..reps)
        .map(|_| {
            let pts: Vec<BranchPoint> =
                clean.iter().map(|p| BranchPoint { energy: p.energy + noise.sample(&mut rng), ..*p }).collect();
            let f = fit_zeeman(&pts).unwrap();
            [f.gamma_dia, f.g_e, f.g_h]
        })
        .collect();
    let n = reps as f64;
    let mut mean = [0.0; 3];
    let mut sd = [0.0; 3];
    for k in 0..3 {
        mean[k] = fits.iter().map(|f| f[k]).sum::<f64>() / n;
        sd[k] = (fits.iter().map(|f| (f[k] - mean[k]).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    }
    (mean, sd)
}

#[test]
fn monte_carlo_recovers_both_geometries() {
    for (theta, gamma, seed) in [(60.0, 6.021, 1), (90.0, 4.395, 2)] {
        let m = model(gamma);
        let ge = effective_g(&m.electron, theta).unwrap();
        let gh = effective_g(&m.hole, theta).unwrap();
        let (mean, _) = ensemble(&m, theta, 100, seed);
        assert!((mean[0] / gamma - 1.0).abs() < 0.02, "γ {}", mean[0]);
        assert!((mean[1] / ge - 1.0).abs() < 0.01, "g_e {}", mean[1]);
        assert!((mean[2] / gh - 1.0).abs() < 0.01, "g_h {}", mean[2]);
    }
}

#[test]
fn monte_carlo_spread_matches_least_squares_error() {
    // For 1 μeV noise the g columns are orthogonal to the rest, so
    // σ_g = 1 / (μ_B/2 · sqrt(4 Σ B²)).
    let sum_b2: f64 = fields().iter().map(|b| b * b).sum();
    let sigma_g = 1.0 / (57.8838 / 2.0 * (4.0 * sum_b2).sqrt());
    let (_, sd) = ensemble(&model(6.021), 60.0, 400, 3);
    for s in [sd[1], sd[2]] {
        assert!((s / sigma_g - 1.0).abs() < 0.15, "{s} vs {sigma_g}");
    }
}

#[test]
fn csv_round_trip_and_paired_tensor() {
    let m = model(6.021);
    let ob = synthetic_branches(&m, 60.0, &fields()).unwrap();
    let vo = synthetic_branches(&ZeemanModel { gamma_dia: 4.395, ..m }, 90.0, &fields()).unwrap();
    let mut buf = Vec::new();
    write_branch_points(&mut buf, &ob).unwrap();
    let back = read_branch_points(buf.as_slice()).unwrap();
    assert_eq!(back, ob);
    let a = fit_zeeman(&back).unwrap();
    let b = fit_zeeman(&vo).unwrap();
    let e = resolve_g_tensor(a.g_e, 60.0, b.g_e, 90.0).unwrap();
    let h = resolve_g_tensor(a.g_h, 60.0, b.g_h, 90.0).unwrap();
    assert!((e.g_f - 0.497).abs() < 1e-9 && (e.g_v - 0.446).abs() < 1e-9);
    assert!((h.g_f - 1.823).abs() < 1e-9 && (h.g_v - 0.129).abs() < 1e-9);
}
