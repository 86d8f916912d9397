use qdspin::experiments::{
    delay_grid, dissipation_free, fringe_analysis, run_rabi, run_ramsey, run_su2_map, single_pulse_populations,
    RabiScan, RamseyScan, Su2Scan,
};
use qdspin::lindblad::{evolve, evolve_unitary, DensityMatrix, SolverOptions};
use qdspin::qdmodel::{
    assemble, build_h0, build_hcw, build_pulse_terms, preset, readout, readout_solver, resonant_d_cw, Geometry,
    PulseSpec, DIM, DOWN, TRION_HIGH, UP,
};
use qdspin::qmath::Ket;

fn fine() -> SolverOptions {
    SolverOptions::with_tolerances(1e-10, 1e-12)
}

#[test]
fn voigt_unitary_limit_matches_oracle() {
    let p = dissipation_free(&preset(Geometry::Voigt));
    let pulses = [PulseSpec::new(1.0, 900.0)];
    let sys = assemble(&p, &pulses, 1.0).unwrap();
    let tr = evolve(&sys, &DensityMatrix::basis(DIM, DOWN), (0.0, p.t_window), &[p.t_window], &fine()).unwrap();
    let h = &build_h0(&p) + &build_hcw(&p);
    let terms = build_pulse_terms(&p, &pulses).unwrap();
    let psi = evolve_unitary(&h, &terms, &Ket::basis(DIM, DOWN), (0.0, p.t_window), 2.5e-7).unwrap();
    let pops = psi.populations();
    for i in 0..DIM {
        let gap = (tr.states[0].population(i) - pops[i]).abs();
        assert!(gap < 1e-6, "level {i}: {gap:e}");
    }
}

#[test]
fn counts_invariant_when_pulse_and_window_end_move_together() {
    for g in Geometry::ALL {
        let p = preset(g);
        let a = readout(&p, &[PulseSpec::new(1.0, 700.0)], 1.0).unwrap().counts;
        for shift in [0.3, 0.8] {
            let moved = qdspin::qdmodel::DoubleLambdaParams { t_window: p.t_window - shift, ..p.clone() };
            let b = readout(&moved, &[PulseSpec::new(1.0 - shift, 700.0)], 1.0).unwrap().counts;
            assert!((b / a - 1.0).abs() < 1e-4, "{g} shift {shift}: {a} vs {b}");
        }
    }
}

#[test]
fn fixed_window_end_truncates_the_repump_tail() {
    // The CW repump after a pulse outlasts the window, so an earlier pulse
    // leaves more time to collect photons.
    for g in Geometry::ALL {
        let p = preset(g);
        let early = readout(&p, &[PulseSpec::new(0.5, 700.0)], 1.0).unwrap().counts;
        let late = readout(&p, &[PulseSpec::new(1.5, 700.0)], 1.0).unwrap().counts;
        assert!(early > late * (1.0 + 1e-3), "{g}: {early} vs {late}");
    }
}

#[test]
fn no_pulse_no_counts() {
    for g in Geometry::ALL {
        let n = readout(&preset(g), &[], 1.0).unwrap().counts;
        assert!(n.abs() < 1e-12, "{g}: {n:e}");
    }
}

#[test]
fn voigt_literal_dipole_signs_cancel_the_raman_transfer() {
    let flipped = preset(Geometry::Voigt);
    let literal = qdspin::qdmodel::DoubleLambdaParams { dipole_sign: [1.0; 4], ..flipped.clone() };
    let s = fine();
    for om in [450.0, 934.0] {
        let with_flip = single_pulse_populations(&flipped, om, &s).unwrap()[UP];
        let without = single_pulse_populations(&literal, om, &s).unwrap()[UP];
        assert!(without < 0.05 * with_flip, "{om} GHz: {with_flip} vs {without}");
    }
    assert!(single_pulse_populations(&flipped, 934.0, &s).unwrap()[UP] > 0.75);
}

#[test]
fn cw_alone_pumps_up_into_upper_trion() {
    let p = dissipation_free(&preset(Geometry::Oblique));
    let sys = assemble(&p, &[], 1.0).unwrap();
    let t = 0.5 / (p.k.k14 * p.omega_cw);
    let tr = evolve(&sys, &DensityMatrix::basis(DIM, UP), (0.0, t), &[t], &fine()).unwrap();
    assert!((tr.states[0].population(TRION_HIGH) - 1.0).abs() < 1e-8);
}

fn ramsey_frequency(de_gs: f64) -> f64 {
    let mut p = preset(Geometry::Oblique);
    p.de_gs = de_gs;
    p.d_cw = resonant_d_cw(p.de_gs, p.de_es);
    let scan = RamseyScan { delays_ps: delay_grid(0.0, 2.0, 150), ..RamseyScan::new(p, 615.2) };
    fringe_analysis(&run_ramsey(&scan).unwrap()).unwrap().frequency
}

#[test]
fn doubling_ground_splitting_doubles_fringe_frequency() {
    let f1 = ramsey_frequency(32.0);
    let f2 = ramsey_frequency(64.0);
    assert!((f1 / 32.0 - 1.0).abs() < 5e-3, "{f1}");
    assert!((f2 / f1 - 2.0).abs() < 1e-2, "{f1} {f2}");
}

#[test]
fn one_point_map_equals_ramsey_point() {
    for g in Geometry::ALL {
        let p = preset(g);
        let su2 = Su2Scan { amplitudes: vec![800.0], delays_ps: vec![37.24], ..Su2Scan::new(p.clone()) };
        let ramsey = RamseyScan { delays_ps: vec![37.24], cw_scale: su2.cw_scale, ..RamseyScan::new(p, 800.0) };
        let a = run_su2_map(&su2).unwrap().counts()[0];
        let b = run_ramsey(&ramsey).unwrap().counts()[0];
        assert_eq!(a.to_bits(), b.to_bits(), "{g}");
    }
}

#[test]
fn serial_and_parallel_sweeps_agree_bitwise() {
    let scan = RabiScan { amplitudes: vec![300.0, 900.0, 1500.0, 2100.0], ..RabiScan::new(preset(Geometry::Voigt)) };
    let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    let serial = pool(1).install(|| run_rabi(&scan)).unwrap();
    let parallel = pool(4).install(|| run_rabi(&scan)).unwrap();
    for (a, b) in serial.rows.iter().flatten().zip(parallel.rows.iter().flatten()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
}

#[test]
fn readout_converged_in_tolerance() {
    let p = preset(Geometry::Oblique);
    let pulses = [PulseSpec::new(1.0, 1654.0)];
    let base = qdspin::qdmodel::readout_with(&p, &pulses, 1.0, &readout_solver()).unwrap().counts;
    let tight = qdspin::qdmodel::readout_with(&p, &pulses, 1.0, &SolverOptions::with_tolerances(1e-11, 1e-13))
        .unwrap()
        .counts;
    assert!((base / tight - 1.0).abs() < 1e-7, "{base} {tight}");
}
