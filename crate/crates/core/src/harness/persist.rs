use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use serde::Serialize;

use super::{sweep::time_to_threshold, ScenarioSource, DEFAULT_THRESHOLD_FRACTION};
use crate::diagnostics::{fmt_f64, gronwall_ledger, write_records_csv};
use crate::error::{Error, Result};
use crate::model::{Field, SpatialGrid, State};
use crate::profiles::{alpha_profile, beta_profile, BaVerdict};
use crate::solver::{RunMetadata, RunResult, RunSpec, RunStatus};
use crate::stencil::mass;

use super::Scenario;

/// Headline numbers of one run, as written to `run.json` and sweep tables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub status: RunStatus,
    pub records: usize,
    pub initial_h1: Option<f64>,
    pub final_h1: Option<f64>,
    /// Minimal Grönwall constant over the recorded series.
    pub c_star: Option<f64>,
    pub time_to_threshold: Option<f64>,
    pub ba_verdict: BaVerdict,
}

impl RunSummary {
    pub fn new(scenario: &Scenario, r: &RunResult) -> Self {
        let first = r.records.first();
        let last = r.records.last();
        RunSummary {
            name: scenario.name.clone(),
            status: r.status,
            records: r.records.len(),
            initial_h1: first.map(|x| x.total_h1_deviation()),
            final_h1: last.map(|x| x.total_h1_deviation()),
            c_star: (!r.records.is_empty()).then(|| gronwall_ledger(&r.records, 1.0).c_star),
            time_to_threshold: time_to_threshold(&r.records, DEFAULT_THRESHOLD_FRACTION),
            ba_verdict: r.metadata.ba.verdict,
        }
    }
}

#[derive(Serialize)]
struct RunJson<'a> {
    scenario: &'a str,
    source: &'a str,
    summary: &'a RunSummary,
    metadata: &'a RunMetadata,
    config: &'a toml::Table,
}

const STATE_COLUMNS_PP: [&str; 6] = ["t", "x", "u", "v", "alpha", "beta"];
const STATE_COLUMNS_PH: [&str; 6] = ["t", "x", "u", "v", "alpha", "psi"];

/// Writes `t, x, u, v, α` and either `β` or `Ψ` per node.
pub fn write_state_csv(path: &Path, s: &State, spec: &RunSpec, psi: Option<f64>) -> Result<()> {
    let grid = s.grid();
    let alpha = alpha_profile(&spec.boundary, grid, s.t);
    let hyperbolic = spec.params.variant.is_hyperbolic();
    let last: Vec<f64> = if hyperbolic {
        let psi = psi.unwrap_or_else(|| mass(&s.v.values, grid.h) / grid.length());
        vec![psi; grid.n]
    } else {
        beta_profile(&spec.boundary, grid, s.t)?.values
    };
    let wrap = |e: csv::Error| Error::Csv { path: path.to_path_buf(), message: e.to_string() };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    w.write_record(if hyperbolic { STATE_COLUMNS_PH } else { STATE_COLUMNS_PP }).map_err(wrap)?;
    for (i, last) in last.iter().enumerate() {
        w.write_record([
            fmt_f64(s.t),
            fmt_f64(grid.x(i)),
            fmt_f64(s.u.values[i]),
            fmt_f64(s.v.values[i]),
            fmt_f64(alpha.values[i]),
            fmt_f64(*last),
        ])
        .map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reloads the `(t, u, v)` part of a `final_state.csv`.
pub fn read_state_csv(path: &Path) -> Result<State> {
    let bad = |message: String| Error::Csv { path: path.to_path_buf(), message };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.len() != 6 || &header[0] != "t" || &header[1] != "x" || &header[2] != "u" || &header[3] != "v" {
        return Err(bad(format!("unexpected header {header:?}")));
    }
    let (mut t, mut xs, mut u, mut v) = (None, Vec::new(), Vec::new(), Vec::new());
    for row in rdr.records() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let num = |i: usize| row[i].parse::<f64>().map_err(|e| bad(e.to_string()));
        t.get_or_insert(num(0)?);
        xs.push(num(1)?);
        u.push(num(2)?);
        v.push(num(3)?);
    }
    let t = t.ok_or_else(|| bad("no rows".into()))?;
    let grid = SpatialGrid::new(xs[0], xs[xs.len() - 1], xs.len())?;
    State::new(t, Field::new(grid, u)?, Field::new(grid, v)?)
}

pub(crate) fn write_run(dir: &Path, src: &ScenarioSource, spec: &RunSpec, r: &RunResult, summary: &RunSummary) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let diag = dir.join("diagnostics.csv");
    let f = File::create(&diag).map_err(|e| Error::io(&diag, e))?;
    write_records_csv(&r.records, BufWriter::new(f)).map_err(|e| Error::io(&diag, e))?;

    write_state_csv(&dir.join("final_state.csv"), &r.final_state, spec, r.metadata.final_psi)?;

    let json = dir.join("run.json");
    let body = RunJson { scenario: &summary.name, source: &src.origin, summary, metadata: &r.metadata, config: &src.value };
    let text = serde_json::to_string_pretty(&body).map_err(|e| Error::io(&json, std::io::Error::other(e)))?;
    fs::write(&json, text).map_err(|e| Error::io(&json, e))
}
