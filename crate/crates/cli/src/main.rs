//! Command-line harness around the dispersl solver library.
//!
//! Exit codes: 0 on success, 1 on numerical failure (non-convergence,
//! blow-up, failed verification), 2 on configuration errors.

use clap::{Parser, Subcommand};
use dispersl::harness::{
    convergence_in_dt, convergence_in_h, fit_error_slope, parse_config, read_rows, residual_report,
    verify_properties, write_rows, ExperimentSpec, Reference, Sweep,
};
use dispersl::stepper::run;
use dispersl::torus::TorusGrid;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_NUMERICAL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(
    name = "dispersl",
    about = "Semi-Lagrangian solver harness for dispersive conservation laws",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One full run of the configured scheme; prints a summary row.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Time-step convergence sweep at fixed mesh; writes CSV.
    SweepDt {
        #[arg(long)]
        config: PathBuf,
    },
    /// Mesh refinement sweep with the coupled time-step rule; writes CSV.
    SweepH {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the property-verification suite.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Spot-check the equation residual of the reference solutions.
    Residual {
        #[arg(long)]
        nu: f64,
    },
}

fn init_thread_pool() {
    if let Ok(raw) = std::env::var("DISPERSL_THREADS") {
        match raw.trim().parse::<usize>() {
            Ok(0) => {}
            Ok(n) => {
                if let Err(e) = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                {
                    eprintln!("warning: could not cap thread pool: {e}");
                }
            }
            Err(_) => eprintln!("warning: ignoring non-numeric DISPERSL_THREADS = {raw:?}"),
        }
    }
}

fn load_spec(path: &Path) -> Result<ExperimentSpec, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read config {}: {e}", path.display());
        ExitCode::from(EXIT_CONFIG)
    })?;
    parse_config(&text).map_err(|e| {
        eprintln!("error: bad config {}: {e}", path.display());
        ExitCode::from(EXIT_CONFIG)
    })
}

fn write_table(
    spec: &ExperimentSpec,
    rows: &[dispersl::harness::ConvergenceRow],
) -> Result<(), ExitCode> {
    let csv = write_rows(rows);
    match &spec.output_path {
        Some(path) => {
            std::fs::write(path, &csv).map_err(|e| {
                eprintln!("error: cannot write {path}: {e}");
                ExitCode::from(EXIT_CONFIG)
            })?;
            // sanity: the emitted table must parse back identically
            debug_assert_eq!(
                read_rows(&csv).expect("own output parses").len(),
                rows.len()
            );
            eprintln!("wrote {} rows to {path}", rows.len());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn report_slope(rows: &[dispersl::harness::ConvergenceRow], against_dt: bool) {
    if rows.len() >= 2 && rows.iter().all(|r| r.rel_l2_error.is_some()) {
        match fit_error_slope(rows, against_dt, 2) {
            Ok(s) => eprintln!("tail-2 fitted slope: {s:.4}"),
            Err(e) => eprintln!("slope not available: {e}"),
        }
    } else {
        eprintln!("slope not available (fewer than 2 rows with errors)");
    }
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => {
            let spec = match load_spec(&config) {
                Ok(s) => s,
                Err(code) => return code,
            };
            let grid = match TorusGrid::new(spec.nx) {
                Ok(g) => g,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            let outcome = match spec.reference {
                Reference::CorrectedCnoidal => {
                    dispersl::elliptic::corrected_cnoidal(spec.scheme.nu()).and_then(|wave| {
                        let deriv = wave.initial_derivative();
                        let result =
                            run(&spec.scheme, grid, wave.initial_condition(), Some(&deriv))?;
                        let pc = result.state.interpolant(spec.scheme.interpolation())?;
                        let t = result.final_time;
                        let rel = dispersl::norms::relative_l2_error(
                            |x| pc.eval_unchecked(x, 0),
                            |x| dispersl::elliptic::ExactSolution::eval_xt(&wave, x, t),
                            grid,
                        )?;
                        Ok((result, Some(rel)))
                    })
                }
                Reference::None => run(
                    &spec.scheme,
                    grid,
                    |_| 0.0,
                    Some(&(|_| 0.0) as &dyn Fn(f64) -> f64),
                )
                .map(|r| (r, None)),
            };
            match outcome {
                Ok((result, rel)) => {
                    println!(
                        "steps = {}  final_time = {:.6}  total_fp_iters = {}  max_fp_iters = {}  wall = {:.3}s{}",
                        result.diagnostics.steps,
                        result.final_time,
                        result.diagnostics.total_fp_iters,
                        result.diagnostics.max_fp_iters,
                        result.diagnostics.wall.as_secs_f64(),
                        rel.map(|r| format!("  rel_l2_error = {r:.6e}"))
                            .unwrap_or_default()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_NUMERICAL)
                }
            }
        }
        Command::SweepDt { config } => {
            let spec = match load_spec(&config) {
                Ok(s) => s,
                Err(code) => return code,
            };
            if !matches!(spec.sweep, Sweep::DtList(_)) {
                eprintln!("error: sweep-dt needs `sweep = dt` in the config");
                return ExitCode::from(EXIT_CONFIG);
            }
            match convergence_in_dt(&spec) {
                Ok(rows) => {
                    if let Err(code) = write_table(&spec, &rows) {
                        return code;
                    }
                    report_slope(&rows, true);
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_NUMERICAL)
                }
            }
        }
        Command::SweepH { config } => {
            let spec = match load_spec(&config) {
                Ok(s) => s,
                Err(code) => return code,
            };
            if !matches!(spec.sweep, Sweep::HList { .. }) {
                eprintln!("error: sweep-h needs `sweep = h` in the config");
                return ExitCode::from(EXIT_CONFIG);
            }
            match convergence_in_h(&spec) {
                Ok(rows) => {
                    if let Err(code) = write_table(&spec, &rows) {
                        return code;
                    }
                    report_slope(&rows, false);
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_NUMERICAL)
                }
            }
        }
        Command::Verify { seed } => match verify_properties(seed) {
            Ok(report) => {
                print!("{}", report.render());
                if report.all_passed() {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(EXIT_NUMERICAL)
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_NUMERICAL)
            }
        },
        Command::Residual { nu } => match residual_report(nu, 100, 0) {
            Ok((corrected, printed)) => {
                println!(
                    "max |residual| over 100 random points: corrected cnoidal = {corrected:.6e}, \
                     printed formula = {printed:.6e} ({:.0}x)",
                    printed / corrected
                );
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_NUMERICAL)
            }
        },
    }
}
