//! Scenario files, bundled scenarios, run persistence, convergence studies
//! and parameter sweeps.
//!
//! Every function that writes files takes the output root explicitly.

mod config;
mod convergence;
mod persist;
mod sweep;

pub use config::{
    read_two_columns, BoundarySpec, GridSection, InitialSection, InitialSpec, ModelSection, Scenario, ScenarioSource, SignalSpec,
};
pub use convergence::{convergence_study, ConvergenceReport, ERROR_FLOOR};
pub use persist::{read_state_csv, write_state_csv, RunSummary};
pub use sweep::{sweep, time_to_threshold, SweepRow, SweepTable, DEFAULT_THRESHOLD_FRACTION};

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::solver::{simulate, NullSink, RunResult};

/// Scenario files compiled into the library.
pub const BUNDLED: [(&str, &str); 10] = [
    ("equilibrium", include_str!("../../scenarios/equilibrium.toml")),
    ("equilibrium-hyperbolic", include_str!("../../scenarios/equilibrium-hyperbolic.toml")),
    ("thm1-decay", include_str!("../../scenarios/thm1-decay.toml")),
    ("thm1-decay-gamma2", include_str!("../../scenarios/thm1-decay-gamma2.toml")),
    ("thm2-decay", include_str!("../../scenarios/thm2-decay.toml")),
    ("thm2-decay-gamma2", include_str!("../../scenarios/thm2-decay-gamma2.toml")),
    ("asymmetric-u", include_str!("../../scenarios/asymmetric-u.toml")),
    ("ba-violation", include_str!("../../scenarios/ba-violation.toml")),
    ("mms-pp", include_str!("../../scenarios/mms-pp.toml")),
    ("mms-ph", include_str!("../../scenarios/mms-ph.toml")),
];

pub fn bundled(name: &str) -> Result<ScenarioSource> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Config { path: name.to_string(), message: format!("no bundled scenario named `{name}`") })?;
    ScenarioSource::parse(text, format!("bundled:{name}"), None)
}

/// Loads a scenario from a file, or from the bundled library when `arg`
/// names a bundled scenario and no such file exists.
pub fn resolve_scenario(arg: &str) -> Result<ScenarioSource> {
    let path = Path::new(arg);
    if !path.exists() && BUNDLED.iter().any(|(n, _)| *n == arg) {
        return bundled(arg);
    }
    ScenarioSource::load(path)
}

/// A finished run and where its files went.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub result: RunResult,
    pub dir: PathBuf,
    pub summary: RunSummary,
}

/// Runs a scenario and writes `diagnostics.csv`, `final_state.csv` and
/// `run.json` into `out_root/<output_dir>`.
pub fn run_scenario(src: &ScenarioSource, out_root: &Path) -> Result<RunOutcome> {
    let scenario = src.scenario()?;
    let dir = out_root.join(scenario.output_subdir());
    run_into(src, &dir)
}

pub(crate) fn run_into(src: &ScenarioSource, dir: &Path) -> Result<RunOutcome> {
    let scenario = src.scenario()?;
    let spec = src.run_spec()?;
    let result = simulate(&spec, &mut NullSink)?;
    let summary = RunSummary::new(&scenario, &result);
    persist::write_run(dir, src, &spec, &result, &summary)?;
    Ok(RunOutcome { result, dir: dir.to_path_buf(), summary })
}
