use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chemolab::harness::{convergence_study, read_two_columns, resolve_scenario, run_scenario, sweep, ScenarioSource};
use chemolab::lemmas::verify_all;
use chemolab::model::{cole_hopf_forward, cole_hopf_inverse};
use chemolab::solver::RunStatus;
use chemolab::{Error, Field, SpatialGrid};
use clap::{Parser, Subcommand, ValueEnum};

/// The only environment variable the tool reads.
const OUTPUT_ROOT_VAR: &str = "CHEMOLAB_OUTPUT_ROOT";
const DEFAULT_OUTPUT_ROOT: &str = "runs";

const EXIT_VALIDATION: u8 = 1;
const EXIT_RUN_FAILURE: u8 = 2;
const EXIT_LEMMA_VIOLATION: u8 = 3;

#[derive(Parser)]
#[command(name = "chemolab", version, about = "Chemotaxis-growth simulations with dynamic boundary data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario (a TOML file or a bundled scenario name).
    Simulate { config: String },
    /// Run a scenario once per value of a numeric config field.
    Sweep {
        config: String,
        /// Dotted path of the field, e.g. `model.gamma`.
        #[arg(long)]
        axis: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Grid-refinement study against a fine reference run.
    Convergence {
        config: String,
        #[arg(long, value_delimiter = ',', required = true)]
        grids: Vec<usize>,
        #[arg(long)]
        reference: usize,
    },
    /// Fuzz the scalar inequalities and check their equality cases.
    VerifyLemmas {
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Cole-Hopf transform of a two-column `x,value` CSV, written to stdout.
    Transform {
        csv: PathBuf,
        #[arg(long, value_enum)]
        direction: Direction,
        /// `c(a)` for the inverse direction.
        #[arg(long, default_value_t = 1.0)]
        anchor: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Forward,
    Inverse,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::RunFailed(_) => EXIT_RUN_FAILURE,
            _ => EXIT_VALIDATION,
        };
        Failure { code, message: e.to_string() }
    }
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_VAR).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT))
}

fn json(value: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), Failure> {
    std::fs::write(path, json(value)).map_err(|e| fail(EXIT_RUN_FAILURE, format!("{}: {e}", path.display())))
}

fn scenario_dir(src: &ScenarioSource) -> Result<PathBuf, Failure> {
    Ok(output_root().join(src.scenario()?.output_subdir()))
}

fn simulate(config: &str) -> Result<(), Failure> {
    let src = resolve_scenario(config)?;
    let out = run_scenario(&src, &output_root())?;
    println!("{}", json(&out.summary));
    println!("output: {}", out.dir.display());
    match out.result.status {
        RunStatus::Completed => Ok(()),
        RunStatus::Rejected => Err(fail(EXIT_VALIDATION, out.result.metadata.reason.unwrap_or_default())),
        status => Err(fail(
            EXIT_RUN_FAILURE,
            format!("{status:?} at t = {}: {}", out.result.final_state.t, out.result.metadata.reason.unwrap_or_default()),
        )),
    }
}

fn run_sweep(config: &str, axis: &str, values: &[f64], parallel: usize) -> Result<(), Failure> {
    let src = resolve_scenario(config)?;
    let dir = scenario_dir(&src)?.join(format!("sweep-{axis}"));
    let table = sweep(&src, axis, values, parallel, Some(&dir))?;
    let mut failed = 0;
    for row in &table.rows {
        match (&row.summary, &row.error) {
            (Some(s), _) => {
                let h1 = s.final_h1.map(|v| format!("{v:.3e}")).unwrap_or_default();
                println!("{axis} = {:<12} {:?} final_h1 {h1}", row.value, s.status);
                failed += usize::from(s.status != RunStatus::Completed);
            }
            (None, e) => {
                println!("{axis} = {:<12} error: {}", row.value, e.as_deref().unwrap_or(""));
                failed += 1;
            }
        }
    }
    println!("output: {}", dir.join("sweep.csv").display());
    if failed > 0 {
        return Err(fail(EXIT_RUN_FAILURE, format!("{failed} of {} runs did not complete", table.rows.len())));
    }
    Ok(())
}

fn convergence(config: &str, grids: &[usize], reference: usize) -> Result<(), Failure> {
    let src = resolve_scenario(config)?;
    let dir = scenario_dir(&src)?.join("convergence");
    let report = convergence_study(&src, grids, reference, Some(&dir))?;
    write_json(&dir.join("convergence.json"), &report)?;
    println!("{:>6} {:>12} {:>12} {:>8} {:>8}", "n", "err_u", "err_v", "order_u", "order_v");
    for (k, n) in report.grids.iter().enumerate() {
        let order = |o: &[f64]| k.checked_sub(1).map(|j| format!("{:.3}", o[j])).unwrap_or_else(|| "-".into());
        println!(
            "{n:>6} {:>12.4e} {:>12.4e} {:>8} {:>8}",
            report.errors_u[k],
            report.errors_v[k],
            order(&report.orders_u),
            order(&report.orders_v)
        );
    }
    if report.degenerate {
        println!("note: errors at round-off level, orders are not meaningful");
    }
    println!("output: {}", dir.display());
    Ok(())
}

fn verify_lemmas(samples: usize, seed: u64) -> Result<(), Failure> {
    if samples == 0 {
        return Err(fail(EXIT_VALIDATION, "--samples must be positive"));
    }
    let reports = verify_all(samples, seed)?;
    println!(
        "{:<6} {:>9} {:>13} {:>12} {:>8} {:>10} {:>10} {:>9}",
        "lemma", "samples", "min_residual", "at_rho", "at_s", "violations", "overflowed", "witnesses"
    );
    let mut ok = true;
    for r in &reports {
        let found = r.witnesses.iter().filter(|w| w.found).count();
        println!(
            "{:<6} {:>9} {:>13.3e} {:>12.5e} {:>8.4} {:>10} {:>10} {:>6}/{}",
            r.lemma.to_string(),
            r.samples,
            r.min.residual,
            r.min.rho,
            r.min.s,
            r.violations,
            r.overflowed,
            found,
            r.witnesses.len()
        );
        for w in r.witnesses.iter().filter(|w| !w.found) {
            println!("       witness missed: {} (rho = {}, s = {}, residual {:.3e})", w.locus, w.at.rho, w.at.s, w.at.residual);
        }
        ok &= r.passed();
    }
    if ok {
        Ok(())
    } else {
        Err(fail(EXIT_LEMMA_VIOLATION, "inequality violated or equality witness missing"))
    }
}

fn uniform_field(xs: &[f64], values: Vec<f64>, path: &Path) -> Result<Field, Failure> {
    let n = xs.len();
    if n < 3 {
        return Err(fail(EXIT_VALIDATION, format!("{}: need at least 3 rows", path.display())));
    }
    let grid = SpatialGrid::new(xs[0], xs[n - 1], n)?;
    if let Some(i) = (0..n).find(|&i| (xs[i] - grid.x(i)).abs() > 1e-9 * grid.length()) {
        return Err(fail(EXIT_VALIDATION, format!("{}: x is not uniformly spaced at row {}", path.display(), i + 1)));
    }
    Ok(Field::new(grid, values)?)
}

fn transform(csv: &Path, direction: Direction, anchor: f64) -> Result<(), Failure> {
    let (xs, values) = read_two_columns(csv)?;
    let input = uniform_field(&xs, values, csv)?;
    let (out, header) = match direction {
        Direction::Forward => (cole_hopf_forward(&input, 0.0, 0.0)?, "x,v"),
        Direction::Inverse => (cole_hopf_inverse(&input, anchor)?, "x,c"),
    };
    println!("{header}");
    for (x, v) in xs.iter().zip(&out.values) {
        println!("{x:.16e},{v:.16e}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { config } => simulate(config),
        Command::Sweep { config, axis, values, parallel } => run_sweep(config, axis, values, *parallel),
        Command::Convergence { config, grids, reference } => convergence(config, grids, *reference),
        Command::VerifyLemmas { samples, seed } => verify_lemmas(*samples, *seed),
        Command::Transform { csv, direction, anchor } => transform(csv, *direction, *anchor),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
