//! Acceptance suite: one test per criterion. Each test prints a single
//! pass/fail line with the measured quantities (run with `--nocapture`
//! to see them on success).
//!
//! Criteria 5 and 6 re-run the published convergence experiments end to
//! end, so this suite takes a few minutes of CPU.

use dispersl::elliptic::{corrected_cnoidal, paper_initial_condition, pde_residual};
use dispersl::flux::FluxSpec;
use dispersl::harness::{
    convergence_in_dt, convergence_in_h, fit_error_slope, verify_properties, ExperimentSpec,
    Reference, Sweep,
};
use dispersl::interp::{interpolation_error_norms, p1_orthogonality_residual, InterpKind};
use dispersl::lambda::{lambda4, lambda5, stability_identity_residual, LambdaSet};
use dispersl::stepper::{consistency_error, solve_node, step, SchemeConfig, SchemeState};
use dispersl::torus::{GridFunction, TorusGrid};
use dispersl::trig::TrigPoly;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn report(criterion: &str, passed: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} -- {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_1_moment_certification() {
    let start = Instant::now();
    let l4 = lambda4();
    let l5 = lambda5();
    let mut worst: f64 = 0.0;
    for (ls, kmax) in [(&l4, 3u32), (&l5, 4u32)] {
        for k in 0..=kmax {
            let want = match k {
                0 => 1.0,
                3 => -1.0,
                _ => 0.0,
            };
            worst = worst.max((ls.moment(k).unwrap() - want).abs());
        }
    }
    let elapsed = start.elapsed();
    let passed = worst <= 1e-12 && elapsed.as_secs_f64() < 1e-3;
    report(
        "1 (moment certification)",
        passed,
        &format!(
            "max moment deviation {worst:.2e} (<= 1e-12), runtime {:.1} us (< 1 ms)",
            elapsed.as_secs_f64() * 1e6
        ),
    );
}

#[test]
fn criterion_2_operator_stability() {
    let start = Instant::now();
    let mut max_amp_excess: f64 = 0.0;
    for (ls, range) in [
        (lambda4(), 2.0 * std::f64::consts::PI / 4.0f64.cbrt()),
        (lambda5(), std::f64::consts::PI),
    ] {
        for i in 0..=100_000 {
            let psi = range * i as f64 / 100_000.0;
            max_amp_excess = max_amp_excess.max(ls.amplification(psi, 1.0) - 1.0);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut max_identity: f64 = 0.0;
    for ls in [lambda4(), lambda5()] {
        for _ in 0..100 {
            let v = TrigPoly::random(&mut rng, 8);
            let delta = rng.random_range(0.01..0.1);
            let r = stability_identity_residual(&ls, &v, delta).unwrap();
            max_identity = max_identity.max(r / v.l2_norm().powi(2));
        }
    }
    let elapsed = start.elapsed();
    let passed = max_amp_excess <= 1e-12 && max_identity <= 1e-12 && elapsed.as_secs_f64() < 1.0;
    report(
        "2 (operator stability)",
        passed,
        &format!(
            "amplification excess {max_amp_excess:.2e} over 1e5 samples, identity residual \
             {max_identity:.2e} over 100 trig polynomials, runtime {:.2} s (< 1 s)",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_3_interpolation_hypotheses() {
    let start = Instant::now();
    let grid = TorusGrid::new(16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut max_p1: f64 = 0.0;
    for _ in 0..20 {
        let v = TrigPoly::random(&mut rng, 5);
        let w = TrigPoly::random(&mut rng, 5);
        for kind in [InterpKind::Spline, InterpKind::Hermite] {
            let r = p1_orthogonality_residual(&v, &w, grid, kind).unwrap().abs();
            max_p1 = max_p1.max(r / (v.seminorm(2) * w.seminorm(2)));
        }
    }

    let sine = TrigPoly::sine(1, 1.0);
    let mut min_l2_order = f64::INFINITY;
    let mut min_h2_order = f64::INFINITY;
    for kind in [InterpKind::Spline, InterpKind::Hermite] {
        let mut prev: Option<(f64, f64)> = None;
        for nx in [16usize, 32, 64, 128] {
            let g = TorusGrid::new(nx).unwrap();
            let (l2, h2) = interpolation_error_norms(&sine, g, kind).unwrap();
            if let Some((pl2, ph2)) = prev {
                min_l2_order = min_l2_order.min((pl2 / l2).log2());
                min_h2_order = min_h2_order.min((ph2 / h2).log2());
            }
            prev = Some((l2, h2));
        }
    }
    let elapsed = start.elapsed();
    let passed =
        max_p1 <= 1e-8 && min_l2_order >= 3.8 && min_h2_order >= 1.8 && elapsed.as_secs_f64() < 5.0;
    report(
        "3 (interpolation hypotheses)",
        passed,
        &format!(
            "orthogonality residual {max_p1:.2e} (<= 1e-8), L2 order {min_l2_order:.2} (>= 3.8), \
             H2 order {min_h2_order:.2} (>= 1.8), runtime {:.2} s (< 5 s)",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_4_consistency_order() {
    let start = Instant::now();
    let nu = 1e-3;
    let wave = corrected_cnoidal(nu).unwrap();
    let grid = TorusGrid::new(128).unwrap();
    let dts = [1e-2, 5e-3, 2.5e-3];
    let mut orders = Vec::new();
    for ls in [lambda4(), lambda5()] {
        let mut vals = Vec::new();
        for &dt in &dts {
            let cfg = SchemeConfig::new(nu, FluxSpec::Kdv, ls.clone(), InterpKind::Spline, dt, 1.0)
                .unwrap();
            let (l2, _) = consistency_error(&wave, 0.5, &cfg, grid).unwrap();
            vals.push(l2);
        }
        orders.push(dispersl::harness::fit_slope(&dts, &vals, 3).unwrap());
    }
    let elapsed = start.elapsed();
    let passed = orders[0] >= 0.30 && orders[1] >= 0.60 && elapsed.as_secs_f64() < 30.0;
    report(
        "4 (consistency order)",
        passed,
        &format!(
            "four-point order {:.3} (>= 0.30, target 1/3), five-point order {:.3} (>= 0.60, \
             target 2/3), runtime {:.2} s (< 30 s)",
            orders[0],
            orders[1],
            elapsed.as_secs_f64()
        ),
    );
}

fn fig1_spec(ls: LambdaSet) -> ExperimentSpec {
    ExperimentSpec {
        scheme: SchemeConfig::new(1e-3, FluxSpec::Kdv, ls, InterpKind::Hermite, 0.01, 1.0).unwrap(),
        nx: 1000,
        sweep: Sweep::DtList(vec![
            1.0 / 100.0,
            1.0 / 200.0,
            1.0 / 400.0,
            1.0 / 800.0,
            1.0 / 1600.0,
        ]),
        reference: Reference::CorrectedCnoidal,
        output_path: None,
    }
}

#[test]
fn criterion_5_time_step_convergence() {
    let published_l4 = [0.00779164, 0.00634823, 0.00514792, 0.00415775, 0.00334669];
    let published_l5 = [0.00236038, 0.00153862, 0.00099024, 0.000632204, 0.000401607];

    let mut passed = true;
    let mut details = Vec::new();
    for (name, ls, published, slope_band) in [
        ("four-point", lambda4(), &published_l4, (0.28, 0.40)),
        ("five-point", lambda5(), &published_l5, (0.60, 0.72)),
    ] {
        let rows = convergence_in_dt(&fig1_spec(ls)).unwrap();
        let slope = fit_error_slope(&rows, true, 2).unwrap();
        let slope_ok = slope >= slope_band.0 && slope <= slope_band.1;
        let mut worst_ratio: f64 = 1.0;
        for (row, &want) in rows.iter().zip(published.iter()) {
            let got = row.rel_l2_error.unwrap();
            let ratio = got / want;
            worst_ratio = worst_ratio.max(ratio.max(1.0 / ratio));
        }
        let points_ok = worst_ratio <= 1.5;
        // errors decrease strictly as dt shrinks (rows are dt-descending)
        let monotone = rows
            .windows(2)
            .all(|w| w[1].rel_l2_error.unwrap() < w[0].rel_l2_error.unwrap());
        passed &= slope_ok && points_ok && monotone;
        details.push(format!(
            "{name}: slope {slope:.3} in [{}, {}] {}, worst published-error ratio \
             {worst_ratio:.3} (<= 1.5), errors monotone in dt: {monotone}",
            slope_band.0,
            slope_band.1,
            if slope_ok { "ok" } else { "VIOLATED" },
        ));
    }
    report(
        "5 (time-step convergence reproduction)",
        passed,
        &details.join("; "),
    );
}

#[test]
fn criterion_6_mesh_refinement_convergence() {
    let spec = ExperimentSpec {
        scheme: SchemeConfig::new(
            1e-3,
            FluxSpec::Kdv,
            lambda5(),
            InterpKind::Hermite,
            0.01,
            1.0,
        )
        .unwrap(),
        nx: 16,
        sweep: Sweep::HList {
            h_list: vec![
                1.0 / 16.0,
                1.0 / 32.0,
                1.0 / 64.0,
                1.0 / 128.0,
                1.0 / 256.0,
                1.0 / 512.0,
            ],
            dt_rule_coeff: 100.0,
            dt_rule_exp: 12.0 / 5.0,
        },
        reference: Reference::CorrectedCnoidal,
        output_path: None,
    };
    let rows = convergence_in_h(&spec).unwrap();
    let slope = fit_error_slope(&rows, false, 2).unwrap();
    let finest = rows.last().unwrap().rel_l2_error.unwrap();
    let published_finest = 5.54486e-05;
    let ratio = (finest / published_finest).max(published_finest / finest);
    let passed = (1.45..=1.70).contains(&slope) && ratio <= 1.5;
    report(
        "6 (mesh refinement reproduction)",
        passed,
        &format!(
            "tail-2 slope {slope:.3} in [1.45, 1.70] (theoretical 8/5), finest error \
             {finest:.4e} vs published {published_finest:.4e} (ratio {ratio:.3} <= 1.5)"
        ),
    );
}

#[test]
fn criterion_7_pde_residual_gate() {
    let start = Instant::now();
    let nu = 1e-3;
    let corrected = corrected_cnoidal(nu).unwrap();
    let printed = paper_initial_condition(nu).unwrap();
    let flux = FluxSpec::Kdv;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut max_corr: f64 = 0.0;
    let mut max_printed: f64 = 0.0;
    for _ in 0..100 {
        let x = rng.random_range(0.0..1.0);
        let t = rng.random_range(0.0..1.0);
        max_corr = max_corr.max(pde_residual(&corrected, nu, &flux, x, t).abs());
        max_printed = max_printed.max(pde_residual(&printed, nu, &flux, x, t).abs());
    }
    let elapsed = start.elapsed();
    let passed = max_corr <= 2e-8 && max_printed >= 1e3 * max_corr && elapsed.as_secs_f64() < 5.0;
    report(
        "7 (equation residual gate)",
        passed,
        &format!(
            "corrected wave residual {max_corr:.2e} (<= 2e-8), printed formula {max_printed:.2e} \
             ({:.0}x, >= 1e3x), runtime {:.2} s (< 5 s)",
            max_printed / max_corr,
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_8_scheme_invariants() {
    let start = Instant::now();

    // constant preservation, both variants
    let grid = TorusGrid::new(16).unwrap();
    let mut worst_const: f64 = 0.0;
    for interp in [InterpKind::Spline, InterpKind::Hermite] {
        let cfg = SchemeConfig::new(1e-3, FluxSpec::Kdv, lambda5(), interp, 0.01, 1.0).unwrap();
        let derivs = matches!(interp, InterpKind::Hermite)
            .then(|| GridFunction::constant(grid, 0.0).unwrap());
        let mut state = SchemeState::new(0, GridFunction::constant(grid, 2.5).unwrap(), derivs);
        for _ in 0..5 {
            state = step(&state, &cfg).unwrap();
        }
        for &v in state.values().values() {
            worst_const = worst_const.max((v - 2.5).abs());
        }
    }

    // node-order independence, bitwise
    let grid = TorusGrid::new(200).unwrap();
    let wave = corrected_cnoidal(1e-3).unwrap();
    let cfg = SchemeConfig::new(
        1e-3,
        FluxSpec::Kdv,
        lambda5(),
        InterpKind::Spline,
        0.01,
        1.0,
    )
    .unwrap();
    let values = GridFunction::sample(grid, wave.initial_condition()).unwrap();
    let state = SchemeState::new(0, values, None);
    let pc = state.interpolant(InterpKind::Spline).unwrap();
    let forward: Vec<f64> = (0..grid.nx())
        .map(|j| {
            solve_node(&pc, grid.node(j), &cfg, state.values().values()[j])
                .unwrap()
                .0
        })
        .collect();
    let mut reversed = vec![0.0; grid.nx()];
    for j in (0..grid.nx()).rev() {
        reversed[j] = solve_node(&pc, grid.node(j), &cfg, state.values().values()[j])
            .unwrap()
            .0;
    }
    let stepped = step(&state, &cfg).unwrap();
    let order_independent = forward == reversed && forward.as_slice() == stepped.values().values();

    // sweep determinism, bitwise
    let spec = ExperimentSpec {
        scheme: SchemeConfig::new(
            1e-3,
            FluxSpec::Kdv,
            lambda5(),
            InterpKind::Hermite,
            0.02,
            0.1,
        )
        .unwrap(),
        nx: 64,
        sweep: Sweep::DtList(vec![0.02, 0.05]),
        reference: Reference::CorrectedCnoidal,
        output_path: None,
    };
    let a = convergence_in_dt(&spec).unwrap();
    let b = convergence_in_dt(&spec).unwrap();
    let deterministic = a.iter().zip(&b).all(|(x, y)| {
        x.rel_l2_error == y.rel_l2_error
            && x.hs_star_error == y.hs_star_error
            && x.weighted_error == y.weighted_error
    });

    let elapsed = start.elapsed();
    let passed =
        worst_const <= 1e-12 && order_independent && deterministic && elapsed.as_secs_f64() < 10.0;
    report(
        "8 (scheme invariants)",
        passed,
        &format!(
            "constant drift {worst_const:.2e} (<= 1e-12), node order bitwise-independent: \
             {order_independent}, sweeps deterministic: {deterministic}, runtime {:.2} s (< 10 s)",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn property_suite_is_green() {
    // the full randomized verification suite doubles as an acceptance gate
    let report_out = verify_properties(0).unwrap();
    report(
        "verify (property suite)",
        report_out.all_passed(),
        &format!("{} checks, all pass", report_out.checks.len()),
    );
}
