//! Experiment driver: time-step and mesh-refinement convergence sweeps
//! against the exact cnoidal reference, log-log slope fitting, CSV
//! emission, key=value configuration files, and the randomized property
//! verification suite.

mod config;
mod csv;
mod verify;

pub use config::{parse_config, ConfigError, Reference, Sweep};
pub use csv::{read_rows, write_rows};
pub use verify::{verify_properties, PropertyCheck, VerifyReport};

use crate::elliptic::{corrected_cnoidal, CnoidalWave, ExactSolution};

use crate::norms::{l2_norm, relative_l2_error, star_norm, weighted_norm};
use crate::stepper::{run, RunResult, SchemeConfig};
use crate::torus::TorusGrid;
use crate::{Error, Result};

/// One experiment: a scheme template plus the sweep that varies it.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub scheme: SchemeConfig,
    /// Grid size for time-step sweeps (mesh sweeps derive nx per row).
    pub nx: usize,
    pub sweep: Sweep,
    pub reference: Reference,
    pub output_path: Option<String>,
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub h: f64,
    pub dt: f64,
    pub final_time: f64,
    pub rel_l2_error: Option<f64>,
    pub hs_star_error: Option<f64>,
    pub weighted_error: Option<f64>,
    pub wall_seconds: f64,
    pub max_fp_iters: u32,
}

fn reference_wave(reference: &Reference, nu: f64) -> Result<Option<CnoidalWave>> {
    match reference {
        Reference::CorrectedCnoidal => Ok(Some(corrected_cnoidal(nu)?)),
        Reference::None => Ok(None),
    }
}

/// Run one configuration and measure its errors against the reference.
fn run_row(
    cfg: &SchemeConfig,
    grid: TorusGrid,
    wave: Option<&CnoidalWave>,
) -> Result<ConvergenceRow> {
    let result: RunResult = match wave {
        Some(w) => {
            let deriv = w.initial_derivative();
            run(cfg, grid, w.initial_condition(), Some(&deriv))?
        }
        None => {
            // without a reference the sweep still needs initial data;
            // start from rest
            run(cfg, grid, |_| 0.0, Some(&|_| 0.0))?
        }
    };

    let (rel, star, weighted) = match wave {
        Some(w) => {
            let t = result.final_time;
            let pc = result.state.interpolant(cfg.interpolation())?;
            let rel = relative_l2_error(|x| pc.eval_unchecked(x, 0), |x| w.eval_xt(x, t), grid)?;
            let err_l2 = l2_norm(|x| pc.eval_unchecked(x, 0) - w.eval_xt(x, t), grid)?;
            let err_sem = l2_norm(|x| pc.eval_unchecked(x, 2) - w.deriv_x(x, t, 2), grid)?;
            (
                Some(rel),
                Some(star_norm(err_l2, err_sem)),
                Some(weighted_norm(err_l2, err_sem, 2, grid.h(), cfg.dt())),
            )
        }
        None => (None, None, None),
    };

    Ok(ConvergenceRow {
        h: grid.h(),
        dt: cfg.dt(),
        final_time: result.final_time,
        rel_l2_error: rel,
        hs_star_error: star,
        weighted_error: weighted,
        wall_seconds: result.diagnostics.wall.as_secs_f64(),
        max_fp_iters: result.diagnostics.max_fp_iters,
    })
}

fn with_dt(template: &SchemeConfig, dt: f64) -> Result<SchemeConfig> {
    SchemeConfig::with_fixed_point(
        template.nu(),
        template.flux().clone(),
        template.lambda_set().clone(),
        template.interpolation(),
        dt,
        template.t_end(),
        template.fp_tol(),
        template.fp_max_iter(),
    )
}

/// Fixed mesh, one full run per time step; rows ordered by decreasing dt.
pub fn convergence_in_dt(spec: &ExperimentSpec) -> Result<Vec<ConvergenceRow>> {
    let dt_list = match &spec.sweep {
        Sweep::DtList(list) => list.clone(),
        Sweep::HList { .. } => {
            return Err(Error::InvalidInput(
                "convergence_in_dt needs a dt sweep".into(),
            ))
        }
    };
    let mut dts = dt_list;
    dts.sort_by(|a, b| b.partial_cmp(a).expect("finite dt"));
    let grid = TorusGrid::new(spec.nx)?;
    let wave = reference_wave(&spec.reference, spec.scheme.nu())?;
    dts.iter()
        .map(|&dt| {
            with_dt(&spec.scheme, dt)
                .and_then(|cfg| run_row(&cfg, grid, wave.as_ref()))
                .map_err(|e| Error::RowFailed {
                    h: grid.h(),
                    dt,
                    source: Box::new(e),
                })
        })
        .collect()
}

/// Coupled refinement: per mesh size h the time step is coeff * h^exponent
/// and the horizon is floor(t_end / dt) steps.
pub fn convergence_in_h(spec: &ExperimentSpec) -> Result<Vec<ConvergenceRow>> {
    let (h_list, coeff, exponent) = match &spec.sweep {
        Sweep::HList {
            h_list,
            dt_rule_coeff,
            dt_rule_exp,
        } => (h_list.clone(), *dt_rule_coeff, *dt_rule_exp),
        Sweep::DtList(_) => {
            return Err(Error::InvalidInput(
                "convergence_in_h needs an h sweep".into(),
            ))
        }
    };
    let mut hs = h_list;
    hs.sort_by(|a, b| b.partial_cmp(a).expect("finite h"));
    let wave = reference_wave(&spec.reference, spec.scheme.nu())?;
    hs.iter()
        .map(|&h| {
            let dt = coeff * h.powf(exponent);
            let row = (|| {
                let nx_f = 1.0 / h;
                let nx = nx_f.round();
                if (nx_f - nx).abs() > 1e-9 * nx_f || nx < 4.0 {
                    return Err(Error::InvalidInput(format!(
                        "h = {h} is not the reciprocal of an integer mesh size"
                    )));
                }
                let grid = TorusGrid::new(nx as usize)?;
                run_row(&with_dt(&spec.scheme, dt)?, grid, wave.as_ref())
            })();
            row.map_err(|e| Error::RowFailed {
                h,
                dt,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Least-squares slope of log(y) against log(x) over the last `tail` rows.
pub fn fit_slope(xs: &[f64], ys: &[f64], tail: usize) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidInput("slope fit length mismatch".into()));
    }
    if tail < 2 || tail > xs.len() {
        return Err(Error::InvalidInput(format!(
            "slope fit needs 2 <= tail <= {} rows, got {tail}",
            xs.len()
        )));
    }
    let xs = &xs[xs.len() - tail..];
    let ys = &ys[ys.len() - tail..];
    if xs.iter().chain(ys).any(|&v| v.is_nan() || v <= 0.0) {
        return Err(Error::InvalidInput(
            "slope fit needs strictly positive values".into(),
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = tail as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("slope fit x-values coincide".into()));
    }
    Ok(sxy / sxx)
}

/// Convenience: slope of the error column against the chosen abscissa.
pub fn fit_error_slope(rows: &[ConvergenceRow], against_dt: bool, tail: usize) -> Result<f64> {
    let xs: Vec<f64> = rows
        .iter()
        .map(|r| if against_dt { r.dt } else { r.h })
        .collect();
    let ys: Vec<f64> = rows
        .iter()
        .map(|r| {
            r.rel_l2_error.ok_or_else(|| {
                Error::InvalidInput("slope fit over rows without a reference error".into())
            })
        })
        .collect::<Result<_>>()?;
    fit_slope(&xs, &ys, tail)
}

/// Spot-check of the residual oracle, as printed by the CLI.
pub fn residual_report(nu: f64, samples: usize, seed: u64) -> Result<(f64, f64)> {
    use rand::{Rng, SeedableRng};
    let corrected = corrected_cnoidal(nu)?;
    let printed = crate::elliptic::paper_initial_condition(nu)?;
    let flux = crate::flux::FluxSpec::Kdv;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut max_corr: f64 = 0.0;
    let mut max_printed: f64 = 0.0;
    for _ in 0..samples {
        let x: f64 = rng.random_range(0.0..1.0);
        let t: f64 = rng.random_range(0.0..1.0);
        max_corr = max_corr.max(crate::elliptic::pde_residual(&corrected, nu, &flux, x, t).abs());
        max_printed =
            max_printed.max(crate::elliptic::pde_residual(&printed, nu, &flux, x, t).abs());
    }
    Ok((max_corr, max_printed))
}

/// Shared helper for tests and the verification suite: median of a sample.
pub(crate) fn median_u32(mut v: Vec<u32>) -> f64 {
    v.sort_unstable();
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        0.5 * (v[n / 2 - 1] as f64 + v[n / 2] as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flux::FluxSpec;
    use crate::interp::InterpKind;
    use crate::lambda::lambda5;

    fn tiny_spec(reference: Reference) -> ExperimentSpec {
        let scheme = SchemeConfig::new(
            1e-3,
            FluxSpec::Zero,
            lambda5(),
            InterpKind::Hermite,
            0.05,
            0.2,
        )
        .unwrap();
        ExperimentSpec {
            scheme,
            nx: 32,
            sweep: Sweep::DtList(vec![0.05, 0.1]),
            reference,
            output_path: None,
        }
    }

    #[test]
    fn dt_sweep_orders_rows_descending() {
        let rows = convergence_in_dt(&tiny_spec(Reference::None)).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].dt > rows[1].dt);
        assert!(rows[0].rel_l2_error.is_none());
        assert!(rows[0].wall_seconds >= 0.0);
    }

    #[test]
    fn dt_sweep_with_reference_populates_errors() {
        let rows = convergence_in_dt(&tiny_spec(Reference::CorrectedCnoidal)).unwrap();
        for row in &rows {
            assert!(row.rel_l2_error.unwrap() > 0.0);
            assert!(row.hs_star_error.unwrap() >= row.rel_l2_error.unwrap() * 0.0);
            assert!(row.weighted_error.unwrap() > 0.0);
        }
    }

    #[test]
    fn h_sweep_applies_the_dt_rule() {
        let mut spec = tiny_spec(Reference::None);
        spec.scheme = SchemeConfig::new(
            1e-3,
            FluxSpec::Zero,
            lambda5(),
            InterpKind::Hermite,
            0.05,
            0.5,
        )
        .unwrap();
        spec.sweep = Sweep::HList {
            h_list: vec![1.0 / 16.0, 1.0 / 32.0],
            dt_rule_coeff: 2.0,
            dt_rule_exp: 1.0,
        };
        let rows = convergence_in_h(&spec).unwrap();
        assert_eq!(rows.len(), 2);
        assert!((rows[0].dt - 2.0 / 16.0).abs() < 1e-15);
        assert!((rows[1].dt - 2.0 / 32.0).abs() < 1e-15);
        // floor convention: 0.5 / 0.125 = 4 steps at the coarse level
        assert!((rows[0].final_time - 0.5).abs() < 1e-12);
    }

    #[test]
    fn h_sweep_rejects_non_reciprocal_h() {
        let mut spec = tiny_spec(Reference::None);
        spec.sweep = Sweep::HList {
            h_list: vec![0.07],
            dt_rule_coeff: 1.0,
            dt_rule_exp: 1.0,
        };
        assert!(convergence_in_h(&spec).is_err());
    }

    #[test]
    fn failed_rows_are_marked() {
        // second dt exceeds t_end, so its row (and only its row) fails
        let mut spec = tiny_spec(Reference::None);
        spec.sweep = Sweep::DtList(vec![0.05, 0.5]);
        match convergence_in_dt(&spec) {
            Err(crate::Error::RowFailed { dt, .. }) => assert_eq!(dt, 0.5),
            other => panic!("expected a marked row failure, got {other:?}"),
        }
    }

    #[test]
    fn slope_of_exact_power_laws() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.to_vec();
        assert!((fit_slope(&xs, &ys, 4).unwrap() - 1.0).abs() < 1e-12);
        let ys: Vec<f64> = xs.iter().map(|&x: &f64| 3.0 * x.powf(2.0 / 3.0)).collect();
        assert!((fit_slope(&xs, &ys, 3).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!(fit_slope(&xs, &[1.0, 1.0, 1.0, 0.0], 2).is_err());
        assert!(fit_slope(&xs, &ys, 1).is_err());
    }

    #[test]
    fn printed_mesh_sweep_slopes() {
        // slope arithmetic on the published coordinates of the coupled sweep
        let hs = [
            1.0 / 16.0,
            1.0 / 32.0,
            1.0 / 64.0,
            1.0 / 128.0,
            1.0 / 256.0,
            1.0 / 512.0,
        ];
        let es = [
            0.00864922,
            0.00391716,
            0.00146543,
            0.000501557,
            0.000167431,
            5.54486e-05,
        ];
        let tail3 = fit_slope(&hs, &es, 3).unwrap();
        assert!((tail3 - 1.5885953634556).abs() < 1e-10, "{tail3}");
        let last_pair = (es[4] / es[5]).log2();
        assert!((last_pair - 1.5943437289850324).abs() < 1e-10);
    }

    #[test]
    fn sweeps_are_deterministic() {
        let spec = tiny_spec(Reference::CorrectedCnoidal);
        let a = convergence_in_dt(&spec).unwrap();
        let b = convergence_in_dt(&spec).unwrap();
        for (ra, rb) in a.iter().zip(&b) {
            assert_eq!(ra.rel_l2_error, rb.rel_l2_error);
            assert_eq!(ra.hs_star_error, rb.hs_star_error);
            assert_eq!(ra.weighted_error, rb.weighted_error);
        }
    }
}
