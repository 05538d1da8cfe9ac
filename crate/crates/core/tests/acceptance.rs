//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line
//! and asserts both its numerical tolerance and its runtime budget.
//! Runs without the libtest harness so the lines are always shown.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use casimir_core::constants::{error_budget, C, EPS0, HBAR};
use casimir_core::contact::{
    minimized_force, solve_contact_ode, toy_model_argmin, toy_model_eval, ContactOptions, DistanceCurve,
    FarBoundary, LogPotential,
};
use casimir_core::electrostatics::{force_from_capacitance, CapacitanceProfile};
use casimir_core::lifshitz::{casimir_pressure, sphere_plane_force, LifshitzProblem};
use casimir_core::patches::{patch_force_sphere_plane, PatchSpectrum};
use casimir_core::permittivity::PermittivityModel;
use casimir_core::screening::{apparent_distance_offset, debye_length, SemiconductorPlate};
use casimir_core::simkit::{
    run_analysis, simulate_dataset, AnalysisModel, ContactParams, ElectrostaticModel, ExperimentConfig,
};

const GOLD_OMEGA_P: f64 = 1.37e16;
const GOLD_GAMMA: f64 = 5.3e13;

fn drude() -> PermittivityModel {
    PermittivityModel::Drude {
        omega_p: GOLD_OMEGA_P,
        gamma: GOLD_GAMMA,
    }
}

fn plasma() -> PermittivityModel {
    PermittivityModel::Plasma { omega_p: GOLD_OMEGA_P }
}

fn report(id: u32, ok: bool, budget: Duration, elapsed: Duration, detail: String) {
    let in_time = elapsed <= budget;
    println!(
        "criterion {id}: {} ({detail}; {:.3} s of {} s)",
        if ok && in_time { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    assert!(ok, "criterion {id} out of tolerance: {detail}");
    assert!(in_time, "criterion {id} over its runtime budget: {elapsed:?} > {budget:?}");
}

fn criterion_01_ideal_mirror_pressure() {
    const TOL: f64 = 1e-3;
    let start = Instant::now();
    let d = 1e-6;
    let p = casimir_pressure(&LifshitzProblem::new(
        PermittivityModel::PerfectConductor,
        PermittivityModel::PerfectConductor,
        d,
        0.0,
    ))
    .unwrap();
    let oracle = PI * PI * HBAR * C / (240.0 * d.powi(4));
    let err = (p / oracle - 1.0).abs();
    report(
        1,
        err < TOL && (p * 1e3 - 1.30).abs() < 0.005,
        Duration::from_secs(1),
        start.elapsed(),
        format!("P = {p:.6e} Pa, oracle {oracle:.6e}, rel err {err:.2e}"),
    );
}

fn criterion_02_plasma_correction_factor() {
    const TOL: f64 = 0.02;
    let start = Instant::now();
    let x = 0.005;
    let d = C / (GOLD_OMEGA_P * x);
    let real = casimir_pressure(&LifshitzProblem::new(plasma(), plasma(), d, 0.0)).unwrap();
    let ideal = casimir_pressure(&LifshitzProblem::new(
        PermittivityModel::PerfectConductor,
        PermittivityModel::PerfectConductor,
        d,
        0.0,
    ))
    .unwrap();
    let ratio = real / ideal;
    let eta = 1.0 - 16.0 / 3.0 * x;
    let err = (ratio / eta - 1.0).abs();
    report(
        2,
        err < TOL,
        Duration::from_secs(10),
        start.elapsed(),
        format!("ratio {ratio:.5} vs {eta:.5}, rel diff {err:.2e}"),
    );
}

fn criterion_03_factor_of_two() {
    let start = Instant::now();
    let ratio = |d: f64| {
        let dr = sphere_plane_force(&LifshitzProblem::new(drude(), drude(), d, 300.0), 1.0).unwrap();
        let pl = sphere_plane_force(&LifshitzProblem::new(plasma(), plasma(), d, 300.0), 1.0).unwrap();
        dr.abs() / pl.abs()
    };
    let (r30, r10) = (ratio(30e-6), ratio(10e-6));
    report(
        3,
        (r30 - 0.50).abs() <= 0.03 && (0.45..=0.65).contains(&r10),
        Duration::from_secs(30),
        start.elapsed(),
        format!("Drude/plasma {r30:.4} at 30 um, {r10:.4} at 10 um"),
    );
}

fn criterion_04_thermal_reduction_at_1um() {
    let start = Instant::now();
    let d = 1e-6;
    let dr = casimir_pressure(&LifshitzProblem::new(drude(), drude(), d, 300.0)).unwrap();
    let pl = casimir_pressure(&LifshitzProblem::new(plasma(), plasma(), d, 300.0)).unwrap();
    let reduction = 1.0 - dr / pl;
    report(
        4,
        (0.10..=0.35).contains(&reduction),
        Duration::from_secs(10),
        start.elapsed(),
        format!("pressure reduction {:.1}%", 100.0 * reduction),
    );
}

fn criterion_05_patch_asymptotics() {
    let start = Instant::now();
    let (v0, lambda, r) = (0.01, 10e-6, 100e-6);
    let spec = PatchSpectrum::TopHatCorrelation { v0, lambda_patch: lambda };
    let force = |d: f64| patch_force_sphere_plane(&spec, r, d, 1e-8).unwrap();
    let d = 0.005 * lambda;
    let short = force(d) * d / (PI * EPS0 * r * v0 * v0);
    let (d1, d2) = (2.0 * lambda, 20.0 * lambda);
    let slope = (force(d2) / force(d1)).ln() / (d2 / d1).ln();
    report(
        5,
        (short - 1.0).abs() <= 0.01 && (slope + 3.0).abs() <= 0.3,
        Duration::from_secs(10),
        start.elapsed(),
        format!("F d/(pi eps0 R V0^2) = {short:.4} at 0.005 lambda, slope {slope:.3}"),
    );
}

fn criterion_06_screening() {
    let start = Instant::now();
    let ge = SemiconductorPlate {
        eps_static: 16.0,
        carrier_density: 4.7e19,
        t: 300.0,
    };
    let lambda = debye_length(&ge).unwrap();
    let d_min = 30.0 * lambda / ge.eps_static;
    let off = apparent_distance_offset(lambda, ge.eps_static, (d_min, 100.0 * d_min)).unwrap();
    let err = (off.delta_total / off.three_lambda_over_eps - 1.0).abs();
    report(
        6,
        (0.55e-6..=0.75e-6).contains(&lambda) && err < 0.05 && off.min_y >= 30.0 - 1e-9,
        Duration::from_secs(5),
        start.elapsed(),
        format!(
            "lambda {:.3} um, offset {:.4} um vs 3 lambda/eps {:.4} um (rel {err:.2e})",
            lambda * 1e6,
            off.delta_total * 1e6,
            off.three_lambda_over_eps * 1e6
        ),
    );
}

fn criterion_07_contact_closed_forms() {
    const TOL: f64 = 1e-6;
    const ARGMIN_TOL: f64 = 1e-10;
    let start = Instant::now();
    let (a, b, area) = (2e-3, -5e-3, 1e-6);
    let va = LogPotential { a, b };
    let profile = CapacitanceProfile::ParallelPlate { area };
    let (d_near, d_far) = (1e-7, 1e-5);
    let exact = |d: f64| -va.value(d) - a;
    let opts = ContactOptions {
        far_boundary: FarBoundary::Value(exact(d_far)),
        ..ContactOptions::default()
    };
    let sol = solve_contact_ode(&va, &profile, d_far, d_near, opts).unwrap();
    let (mut vc_err, mut f_err) = (0.0f64, 0.0f64);
    for i in 0..=200 {
        let d = d_near * 10f64.powf(2.0 * i as f64 / 200.0);
        vc_err = vc_err.max((sol.value(d) / exact(d) - 1.0).abs());
        let f = minimized_force(&profile, &va, &sol, d).unwrap();
        f_err = f_err.max((f.abs() / (EPS0 * area * a * a / (2.0 * d * d)) - 1.0).abs());
    }
    let mut argmin_err = 0.0f64;
    for (d, delta, vc) in [(1e-6, 1e-6, 0.1), (1e-7, 5e-7, -0.05), (3e-6, 1e-8, 0.2)] {
        let closed = toy_model_eval(d, delta, area, 0.0, vc).unwrap().v_m;
        let x = toy_model_argmin(d, delta, area, vc).unwrap();
        argmin_err = argmin_err.max((x / closed - 1.0).abs());
    }
    report(
        7,
        vc_err < TOL && f_err < TOL && argmin_err < ARGMIN_TOL,
        Duration::from_secs(5),
        start.elapsed(),
        format!("V_c err {vc_err:.1e}, force err {f_err:.1e}, argmin err {argmin_err:.1e}"),
    );
}

/// The criterion-8 experiment: 12 positions × 11 voltages, noise 2% of the
/// force at the minimizing potential.
fn round_trip_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        r: 100e-6,
        t: 300.0,
        plate_model: drude(),
        sphere_model: drude(),
        patch_spec: None,
        contact: ContactParams { a: 2e-3, b: -5e-3 },
        v1: 30e-3,
        v_rms: Some(10e-3),
        d0: 150e-9,
        z_grid: (0..12).map(|i| 1e-6 * 10f64.powf(i as f64 / 11.0)).collect(),
        v_sweep: (0..11).map(|i| -0.5 + 0.1 * i as f64).collect(),
        sigma_f: 0.0,
        sigma_f_relative: 0.02,
        seed,
        electrostatic_model: ElectrostaticModel::Pfa,
        include_casimir: true,
        te_zero_policy: Default::default(),
    }
}

fn criterion_08_round_trip() {
    const PARAM_TOL: f64 = 0.05;
    const D0_TOL: f64 = 2e-9;
    let start = Instant::now();
    let config = round_trip_config(42);
    let data = simulate_dataset(&config).unwrap();
    assert_eq!(data.records.len(), 12 * 11);
    let res = run_analysis(&data, &AnalysisModel::from_config(&config)).unwrap();
    let rel = |x: f64, t: f64| (x / t - 1.0).abs();
    let d0_err = (res.d0_est - config.d0).abs();
    let errs = [
        rel(res.residual_fit.v1, config.v1),
        rel(res.residual_fit.v_rms, 10e-3),
        rel(res.log_fit.a, config.contact.a),
        rel(res.log_fit.b, config.contact.b),
    ];
    report(
        8,
        d0_err < D0_TOL && errs.iter().all(|&e| e < PARAM_TOL),
        Duration::from_secs(60),
        start.elapsed(),
        format!(
            "d0 {:.3} nm, V1 {:.3} mV, V_rms {:.3} mV, a {:.4} mV, b {:.4} mV",
            res.d0_est * 1e9,
            res.residual_fit.v1 * 1e3,
            res.residual_fit.v_rms * 1e3,
            res.log_fit.a * 1e3,
            res.log_fit.b * 1e3
        ),
    );
}

fn criterion_09_error_budget() {
    let start = Instant::now();
    let dd = error_budget(-3.0, 100e-9, 0.005).unwrap();
    report(
        9,
        (dd * 1e9 - 0.167).abs() < 5e-4,
        Duration::from_millis(100),
        start.elapsed(),
        format!("delta d = {:.4} nm", dd * 1e9),
    );
}

fn criterion_10_exact_vs_pfa() {
    const TOL: f64 = 0.02;
    let start = Instant::now();
    let (r, v) = (100e-6, 1.0);
    let deviation = |x: f64, tol: f64| {
        let d = x * r;
        let exact = force_from_capacitance(&CapacitanceProfile::SpherePlane { radius: r, tol }, d, v).unwrap();
        exact / (PI * EPS0 * r * v * v / d) - 1.0
    };
    let at_1e3 = deviation(1e-3, 1e-12);
    let check = deviation(1e-3, 1e-10);
    let grid: Vec<f64> = (0..=8).map(|i| 1e-4 * 10f64.powf(i as f64 / 4.0)).collect();
    let devs: Vec<f64> = grid.iter().map(|&x| deviation(x, 1e-12).abs()).collect();
    // Smaller d/R, smaller deviation.
    let monotone = devs.windows(2).all(|w| w[0] < w[1]);
    report(
        10,
        at_1e3.abs() < TOL && (at_1e3 - check).abs() < 1e-6 && monotone,
        Duration::from_secs(5),
        start.elapsed(),
        format!(
            "deviation {at_1e3:.3e} at d/R = 1e-3; {:.2e} .. {:.2e} over [1e-4, 1e-2]",
            devs[0],
            devs[devs.len() - 1]
        ),
    );
}

fn main() {
    let criteria: [(u32, fn()); 10] = [
        (1, criterion_01_ideal_mirror_pressure),
        (2, criterion_02_plasma_correction_factor),
        (3, criterion_03_factor_of_two),
        (4, criterion_04_thermal_reduction_at_1um),
        (5, criterion_05_patch_asymptotics),
        (6, criterion_06_screening),
        (7, criterion_07_contact_closed_forms),
        (8, criterion_08_round_trip),
        (9, criterion_09_error_budget),
        (10, criterion_10_exact_vs_pfa),
    ];
    let mut failed = Vec::new();
    for (id, check) in criteria {
        if std::panic::catch_unwind(check).is_err() {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", criteria.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
