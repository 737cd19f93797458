//! The fully discrete semi-Lagrangian time stepper.
//!
//! One step applies the dispersive translation combination and the
//! advective characteristic pull-back through the previous level's
//! interpolant, then re-interpolates at the nodes: at every node the
//! implicit scalar equation
//!
//!   u_j = sum_(gamma, lambda) gamma * I[U^{n-1}](x_j - f(u_j) dt + lambda delta)
//!
//! is solved by fixed-point iteration, with delta = (nu dt)^{1/3}. The
//! spline variant carries nodal values only; the Hermite variant also
//! advances nodal derivatives through the chain-rule update
//! v_j = w_j / (1 + w_j f'(u_j) dt).

use crate::elliptic::ExactSolution;
use crate::flux::FluxSpec;
use crate::interp::{
    build_cubic_hermite, build_periodic_cubic_spline, HermiteData, InterpKind, PiecewiseCubic,
};
use crate::lambda::{LambdaSet, Shift};
use crate::norms::{weighted_norm, QuadratureRule};
use crate::torus::{GridFunction, TorusGrid};
use crate::{Error, Result};
use rayon::prelude::*;
use std::time::{Duration, Instant};

/// Default relative tolerance of the per-node fixed point.
pub const DEFAULT_FP_TOL: f64 = 1e-13;
/// Default iteration cap of the per-node fixed point.
pub const DEFAULT_FP_MAX_ITER: u32 = 100;

#[derive(Debug, Clone)]
pub struct SchemeConfig {
    nu: f64,
    flux: FluxSpec,
    lambda_set: LambdaSet,
    interpolation: InterpKind,
    dt: f64,
    t_end: f64,
    fp_tol: f64,
    fp_max_iter: u32,
}

impl SchemeConfig {
    pub fn new(
        nu: f64,
        flux: FluxSpec,
        lambda_set: LambdaSet,
        interpolation: InterpKind,
        dt: f64,
        t_end: f64,
    ) -> Result<Self> {
        Self::with_fixed_point(
            nu,
            flux,
            lambda_set,
            interpolation,
            dt,
            t_end,
            DEFAULT_FP_TOL,
            DEFAULT_FP_MAX_ITER,
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub fn with_fixed_point(
        nu: f64,
        flux: FluxSpec,
        lambda_set: LambdaSet,
        interpolation: InterpKind,
        dt: f64,
        t_end: f64,
        fp_tol: f64,
        fp_max_iter: u32,
    ) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidInput(format!("nu = {nu} must be positive")));
        }
        if !(dt > 0.0 && dt < 1.0) {
            return Err(Error::InvalidInput(format!("dt = {dt} must lie in (0, 1)")));
        }
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "t_end = {t_end} must be positive"
            )));
        }
        if dt > t_end {
            return Err(Error::InvalidInput(format!(
                "dt = {dt} exceeds t_end = {t_end}: no steps to take"
            )));
        }
        if fp_tol.is_nan() || fp_tol < 1e-15 {
            return Err(Error::InvalidInput(format!(
                "fp_tol = {fp_tol} below 1e-15"
            )));
        }
        if fp_max_iter == 0 {
            return Err(Error::InvalidInput("fp_max_iter = 0".into()));
        }
        Ok(SchemeConfig {
            nu,
            flux,
            lambda_set,
            interpolation,
            dt,
            t_end,
            fp_tol,
            fp_max_iter,
        })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn flux(&self) -> &FluxSpec {
        &self.flux
    }

    pub fn lambda_set(&self) -> &LambdaSet {
        &self.lambda_set
    }

    pub fn interpolation(&self) -> InterpKind {
        self.interpolation
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn fp_tol(&self) -> f64 {
        self.fp_tol
    }

    pub fn fp_max_iter(&self) -> u32 {
        self.fp_max_iter
    }

    pub fn shift(&self) -> Shift {
        Shift::new(self.nu, self.dt).expect("validated nu and dt")
    }

    /// Number of steps: round(t_end / dt) when the ratio is an integer up
    /// to rounding fuzz, floor otherwise; the reached time is steps * dt.
    pub fn num_steps(&self) -> usize {
        let ratio = self.t_end / self.dt;
        let rounded = ratio.round();
        if (ratio - rounded).abs() <= 1e-8 * ratio.max(1.0) {
            rounded as usize
        } else {
            ratio.floor() as usize
        }
    }
}

/// Numerical solution at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeState {
    step_index: usize,
    values: GridFunction,
    derivs: Option<GridFunction>,
}

impl SchemeState {
    pub fn new(step_index: usize, values: GridFunction, derivs: Option<GridFunction>) -> Self {
        SchemeState {
            step_index,
            values,
            derivs,
        }
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn values(&self) -> &GridFunction {
        &self.values
    }

    pub fn derivs(&self) -> Option<&GridFunction> {
        self.derivs.as_ref()
    }

    pub fn grid(&self) -> TorusGrid {
        self.values.grid()
    }

    /// The interpolant this state feeds into the next step.
    pub fn interpolant(&self, kind: InterpKind) -> Result<PiecewiseCubic> {
        match kind {
            InterpKind::Spline => build_periodic_cubic_spline(&self.values),
            InterpKind::Hermite => {
                let derivs = self.derivs.as_ref().ok_or_else(|| {
                    Error::InvalidInput("hermite stepping needs nodal derivatives".into())
                })?;
                build_cubic_hermite(&HermiteData::new(
                    self.grid(),
                    self.values.values().to_vec(),
                    derivs.values().to_vec(),
                )?)
            }
        }
    }
}

/// Solve the implicit node equation u = G(u) with
/// G(u) = sum gamma I(x_j - f(u) dt + lambda delta) by successive
/// substitution from `u_init`; returns the solution and the number of
/// interpolant-sum evaluations.
pub fn solve_node(
    interpolant: &PiecewiseCubic,
    x_j: f64,
    cfg: &SchemeConfig,
    u_init: f64,
) -> Result<(f64, u32)> {
    solve_node_inner(interpolant, x_j, cfg, cfg.shift().delta(), u_init)
}

fn solve_node_inner(
    interpolant: &PiecewiseCubic,
    x_j: f64,
    cfg: &SchemeConfig,
    delta: f64,
    u_init: f64,
) -> Result<(f64, u32)> {
    if !u_init.is_finite() {
        return Err(Error::NonFinite { what: "u_init" });
    }
    let dt = cfg.dt;
    let flux = &cfg.flux;

    // G is constant in u when the flux vanishes
    if flux.is_zero() {
        let u = cfg.lambda_set.apply_unchecked(interpolant, x_j, delta, 0);
        if !u.is_finite() {
            return Err(Error::NumericBlowup { node: None });
        }
        return Ok((u, 1));
    }

    let mut u = u_init;
    for iter in 1..=cfg.fp_max_iter {
        let base = x_j - flux.f(u) * dt;
        let g = cfg.lambda_set.apply_unchecked(interpolant, base, delta, 0);
        if !g.is_finite() {
            return Err(Error::NumericBlowup { node: None });
        }
        let diff = (g - u).abs();
        u = g;
        if diff <= cfg.fp_tol * (1.0 + g.abs()) {
            return Ok((u, iter));
        }
    }
    // diagnose: did the well-posedness proxy 3 dt |f'| |S^D u|_{1,inf} pass 1?
    let grid = interpolant.grid();
    let slope = (0..grid.nx())
        .map(|j| {
            cfg.lambda_set
                .apply_unchecked(interpolant, grid.node(j), delta, 1)
                .abs()
        })
        .fold(0.0f64, f64::max);
    let proxy = 3.0 * dt * flux.f_prime(u).abs() * slope;
    let base = x_j - flux.f(u) * dt;
    let residual = (cfg.lambda_set.apply_unchecked(interpolant, base, delta, 0) - u).abs();
    Err(Error::NonConvergence {
        node: None,
        iters: cfg.fp_max_iter,
        residual,
        wellposedness_exceeded: proxy > 1.0,
    })
}

#[derive(Debug, Clone, Copy, Default)]
struct StepStats {
    total_iters: u64,
    max_iters: u32,
}

fn solve_all_nodes(
    pc: &PiecewiseCubic,
    cfg: &SchemeConfig,
    delta: f64,
    init: &[f64],
) -> Result<(Vec<f64>, Vec<u32>)> {
    let grid = pc.grid();
    let results: Vec<Result<(f64, u32)>> = (0..grid.nx())
        .into_par_iter()
        .map(|j| solve_node_inner(pc, grid.node(j), cfg, delta, init[j]))
        .collect();
    let mut values = Vec::with_capacity(grid.nx());
    let mut iters = Vec::with_capacity(grid.nx());
    for (j, r) in results.into_iter().enumerate() {
        let (u, it) = r.map_err(|e| e.at_node(j))?;
        values.push(u);
        iters.push(it);
    }
    Ok((values, iters))
}

fn step_spline_stats(state: &SchemeState, cfg: &SchemeConfig) -> Result<(SchemeState, StepStats)> {
    if cfg.interpolation != InterpKind::Spline {
        return Err(Error::InvalidInput(
            "step_spline called with a non-spline configuration".into(),
        ));
    }
    let pc = build_periodic_cubic_spline(&state.values)?;
    let delta = cfg.shift().delta();
    let (values, iters) = solve_all_nodes(&pc, cfg, delta, state.values.values())?;
    let stats = StepStats {
        total_iters: iters.iter().map(|&i| i as u64).sum(),
        max_iters: iters.iter().copied().max().unwrap_or(0),
    };
    Ok((
        SchemeState::new(
            state.step_index + 1,
            GridFunction::new(state.grid(), values)?,
            None,
        ),
        stats,
    ))
}

/// One step of the spline variant.
pub fn step_spline(state: &SchemeState, cfg: &SchemeConfig) -> Result<SchemeState> {
    step_spline_stats(state, cfg).map(|(s, _)| s)
}

fn step_hermite_stats(state: &SchemeState, cfg: &SchemeConfig) -> Result<(SchemeState, StepStats)> {
    if cfg.interpolation != InterpKind::Hermite {
        return Err(Error::InvalidInput(
            "step_hermite called with a non-hermite configuration".into(),
        ));
    }
    let pc = state.interpolant(InterpKind::Hermite)?;
    let grid = state.grid();
    let delta = cfg.shift().delta();
    let dt = cfg.dt;
    let (values, iters) = solve_all_nodes(&pc, cfg, delta, state.values.values())?;

    let mut derivs = Vec::with_capacity(grid.nx());
    for (j, &u) in values.iter().enumerate() {
        let base = grid.node(j) - cfg.flux.f(u) * dt;
        let w = cfg.lambda_set.apply_unchecked(&pc, base, delta, 1);
        let denom = 1.0 + w * cfg.flux.f_prime(u) * dt;
        if denom.abs() < 1e-12 {
            return Err(Error::DerivativeSingularity {
                node: j,
                denom: denom.abs(),
            });
        }
        derivs.push(w / denom);
    }
    let stats = StepStats {
        total_iters: iters.iter().map(|&i| i as u64).sum(),
        max_iters: iters.iter().copied().max().unwrap_or(0),
    };
    Ok((
        SchemeState::new(
            state.step_index + 1,
            GridFunction::new(grid, values)?,
            Some(GridFunction::new(grid, derivs)?),
        ),
        stats,
    ))
}

/// One step of the Hermite variant: solve for nodal values, then update
/// nodal derivatives by v_j = w_j / (1 + w_j f'(u_j) dt).
pub fn step_hermite(state: &SchemeState, cfg: &SchemeConfig) -> Result<SchemeState> {
    step_hermite_stats(state, cfg).map(|(s, _)| s)
}

/// One step of whichever variant the configuration selects.
pub fn step(state: &SchemeState, cfg: &SchemeConfig) -> Result<SchemeState> {
    match cfg.interpolation {
        InterpKind::Spline => step_spline(state, cfg),
        InterpKind::Hermite => step_hermite(state, cfg),
    }
}

/// Aggregated fixed-point diagnostics of a full run.
#[derive(Debug, Clone, Copy)]
pub struct RunDiagnostics {
    pub steps: usize,
    pub total_fp_iters: u64,
    pub max_fp_iters: u32,
    pub wall: Duration,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub state: SchemeState,
    pub final_time: f64,
    pub diagnostics: RunDiagnostics,
}

/// Sample the initial data (nodal derivatives too for the Hermite variant)
/// and advance `cfg.num_steps()` steps.
pub fn run(
    cfg: &SchemeConfig,
    grid: TorusGrid,
    u0: impl Fn(f64) -> f64,
    u0_deriv: Option<&dyn Fn(f64) -> f64>,
) -> Result<RunResult> {
    let start = Instant::now();
    let values = GridFunction::sample(grid, &u0)?;
    let derivs = match cfg.interpolation {
        InterpKind::Spline => None,
        InterpKind::Hermite => {
            let d = u0_deriv.ok_or_else(|| {
                Error::InvalidInput("hermite run needs the initial derivative".into())
            })?;
            Some(GridFunction::sample(grid, d)?)
        }
    };
    let mut state = SchemeState::new(0, values, derivs);
    let steps = cfg.num_steps();
    let mut total_fp_iters = 0u64;
    let mut max_fp_iters = 0u32;
    for n in 0..steps {
        let (next, stats) = match cfg.interpolation {
            InterpKind::Spline => step_spline_stats(&state, cfg),
            InterpKind::Hermite => step_hermite_stats(&state, cfg),
        }
        .map_err(|e| e.at_step(n + 1))?;
        total_fp_iters += stats.total_iters;
        max_fp_iters = max_fp_iters.max(stats.max_iters);
        state = next;
    }
    Ok(RunResult {
        state,
        final_time: steps as f64 * cfg.dt,
        diagnostics: RunDiagnostics {
            steps,
            total_fp_iters,
            max_fp_iters,
            wall: start.elapsed(),
        },
    })
}

/// L^2 and weighted-H^2 norms of the consistency error
///
///   tau(x) = (u(x, t_n) - sum gamma u(x - f(u(x, t_n)) dt + lambda delta,
///             t_{n-1})) / dt
///
/// evaluated through exact translations of the exact solution only; the
/// second x-derivative for the seminorm comes from the chain rule on the
/// solution's analytic derivatives.
pub fn consistency_error(
    exact: &dyn ExactSolution,
    t_n: f64,
    cfg: &SchemeConfig,
    grid: TorusGrid,
) -> Result<(f64, f64)> {
    let dt = cfg.dt;
    let delta = cfg.shift().delta();
    let flux = &cfg.flux;
    let t_prev = t_n - dt;
    let rule = QuadratureRule::gauss7();
    let h = grid.h();

    let tau_and_second = |x: f64| -> (f64, f64) {
        let a = exact.eval_xt(x, t_n);
        let a1 = exact.deriv_x(x, t_n, 1);
        let a2 = exact.deriv_x(x, t_n, 2);
        let g = x - flux.f(a) * dt;
        let g1 = 1.0 - flux.f_prime(a) * a1 * dt;
        let g2 = -(flux.f_double_prime(a) * a1 * a1 + flux.f_prime(a) * a2) * dt;
        let mut b = 0.0;
        let mut b2 = 0.0;
        for &(gam, lam) in cfg.lambda_set.pairs() {
            let foot = g + lam * delta;
            b += gam * exact.eval_xt(foot, t_prev);
            b2 += gam
                * (exact.deriv_x(foot, t_prev, 2) * g1 * g1 + exact.deriv_x(foot, t_prev, 1) * g2);
        }
        ((a - b) / dt, (a2 - b2) / dt)
    };

    let mut l2_sq = 0.0;
    let mut sem_sq = 0.0;
    for j in 0..grid.nx() {
        l2_sq += rule.integrate_cell(grid.node(j), h, |x| {
            let (t, _) = tau_and_second(x);
            t * t
        });
        sem_sq += rule.integrate_cell(grid.node(j), h, |x| {
            let (_, t2) = tau_and_second(x);
            t2 * t2
        });
    }
    let l2 = l2_sq.max(0.0).sqrt();
    let sem = sem_sq.max(0.0).sqrt();
    Ok((l2, weighted_norm(l2, sem, 2, h, dt)))
}
