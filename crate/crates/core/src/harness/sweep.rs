use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::{run_into, RunSummary, ScenarioSource};
use crate::diagnostics::{fmt_f64, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::profiles::BaVerdict;
use crate::solver::{simulate, NullSink};

/// Threshold for time-to-threshold: total H¹ deviation below this fraction
/// of its initial value.
pub const DEFAULT_THRESHOLD_FRACTION: f64 = 1e-2;

/// First record time at which the total H¹ deviation drops below
/// `fraction` times its initial value. `None` when the initial deviation
/// is zero or the threshold is never reached.
pub fn time_to_threshold(records: &[DiagnosticsRecord], fraction: f64) -> Option<f64> {
    let initial = records.first()?.total_h1_deviation();
    if !(initial > 0.0) {
        return None;
    }
    records.iter().find(|r| r.total_h1_deviation() < fraction * initial).map(|r| r.t)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    /// `None` when the run could not be set up; see `error`.
    pub summary: Option<RunSummary>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub axis: String,
    pub rows: Vec<SweepRow>,
}

const COLUMNS: [&str; 7] = ["value", "status", "final_h1", "c_star", "time_to_threshold", "ba_verdict", "error"];

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

impl SweepTable {
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(COLUMNS)?;
        for row in &self.rows {
            let (status, final_h1, c_star, ttt, ba) = match &row.summary {
                Some(s) => (
                    serde_json::to_value(s.status).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default(),
                    opt(s.final_h1),
                    opt(s.c_star),
                    opt(s.time_to_threshold),
                    match s.ba_verdict {
                        BaVerdict::Satisfied => "satisfied".to_string(),
                        BaVerdict::Suspect => "suspect".to_string(),
                    },
                ),
                None => ("error".into(), String::new(), String::new(), String::new(), String::new()),
            };
            w.write_record([fmt_f64(row.value), status, final_h1, c_star, ttt, ba, row.error.clone().unwrap_or_default()])?;
        }
        w.flush()
    }
}

/// Runs the base scenario once per axis value, up to `parallelism` at a
/// time. Rows keep the order of `values`, and a failing run becomes an
/// error row. With `out_dir`, each run writes into `<out_dir>/<index>` and
/// the table goes to `<out_dir>/sweep.csv`.
pub fn sweep(
    base: &ScenarioSource,
    axis: &str,
    values: &[f64],
    parallelism: usize,
    out_dir: Option<&Path>,
) -> Result<SweepTable> {
    if values.is_empty() {
        return Err(Error::Precondition("sweep needs at least one value".into()));
    }
    if parallelism == 0 {
        return Err(Error::Precondition("parallelism must be >= 1".into()));
    }
    // a bad axis path is a config error for the whole sweep
    base.with_raw_override(axis, values[0])?;

    let one = |(k, &value): (usize, &f64)| -> SweepRow {
        let attempt = || -> Result<RunSummary> {
            let src = base.with_override(axis, value)?;
            match out_dir {
                Some(dir) => Ok(run_into(&src, &dir.join(format!("{k:03}")))?.summary),
                None => {
                    let result = simulate(&src.run_spec()?, &mut NullSink)?;
                    Ok(RunSummary::new(&src.scenario()?, &result))
                }
            }
        };
        match attempt() {
            Ok(summary) => SweepRow { value, summary: Some(summary), error: None },
            Err(e) => SweepRow { value, summary: None, error: Some(e.to_string()) },
        }
    };

    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(parallelism).build().map_err(|e| Error::Precondition(e.to_string()))?;
    let rows: Vec<SweepRow> = pool.install(|| values.par_iter().enumerate().map(one).collect());
    let table = SweepTable { axis: axis.to_string(), rows };
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join("sweep.csv");
        let f = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        table.write_csv(f).map_err(|e| Error::io(&path, e))?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::bundled;

    fn rec(t: f64, h1: f64) -> DiagnosticsRecord {
        let text = format!("{}\n{t},0,0,{h1},0,0,0,0,0,0,0,,,,0,0\n", crate::diagnostics::RECORD_COLUMNS.join(","));
        crate::diagnostics::read_records_csv(text.as_bytes()).unwrap().remove(0)
    }

    #[test]
    fn threshold_crossing() {
        let recs = vec![rec(0.0, 1.0), rec(1.0, 0.5), rec(2.0, 0.009), rec(3.0, 0.001)];
        assert_eq!(time_to_threshold(&recs, 1e-2), Some(2.0));
        assert_eq!(time_to_threshold(&recs[..2], 1e-2), None);
        assert_eq!(time_to_threshold(&[rec(0.0, 0.0)], 1e-2), None);
    }

    #[test]
    fn bad_axis_is_an_error() {
        let src = bundled("equilibrium").unwrap();
        assert!(sweep(&src, "model.nope", &[1.0], 1, None).is_err());
    }

    #[test]
    fn failures_become_rows() {
        let src = bundled("equilibrium").unwrap().with_override("numerics.t_end", 0.05).unwrap();
        let t = sweep(&src, "model.gamma", &[1.0, 0.5], 2, None).unwrap();
        assert!(t.rows[0].summary.is_some());
        assert!(t.rows[1].error.as_deref().unwrap().contains("gamma"));
    }
}
