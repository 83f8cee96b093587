use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{run_into, ScenarioSource};
use crate::error::{Error, Result};
use crate::model::State;
use crate::solver::{simulate, NullSink, RunStatus};

/// L² errors below this are treated as exact.
pub const ERROR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub grids: Vec<usize>,
    pub reference_n: usize,
    pub errors_u: Vec<f64>,
    pub errors_v: Vec<f64>,
    /// `log(e_k / e_{k+1}) / log(h_k / h_{k+1})` for consecutive grids.
    pub orders_u: Vec<f64>,
    pub orders_v: Vec<f64>,
    /// Set when some error is below [`ERROR_FLOOR`], making the orders
    /// meaningless.
    pub degenerate: bool,
}

impl ConvergenceReport {
    pub fn min_order(&self) -> f64 {
        self.orders_u.iter().chain(&self.orders_v).copied().fold(f64::INFINITY, f64::min)
    }
}

/// Trapezoid L² norm of `coarse - reference` on the coarse nodes.
fn restricted_errors(coarse: &State, reference: &State) -> (f64, f64) {
    let stride = (reference.grid().n - 1) / (coarse.grid().n - 1);
    let h = coarse.grid().h;
    let err = |c: &[f64], r: &[f64]| {
        let sq: Vec<f64> = c.iter().enumerate().map(|(i, x)| (x - r[i * stride]).powi(2)).collect();
        crate::stencil::trapezoid(&sq, h).sqrt()
    };
    (err(&coarse.u.values, &reference.u.values), err(&coarse.v.values, &reference.v.values))
}

/// Runs the scenario on each grid and on `reference_n` nodes with the same
/// time step, and reports errors at `t_end` against the reference together
/// with observed orders. When `out_dir` is given every run is persisted in
/// its own `n<N>` subdirectory.
pub fn convergence_study(
    src: &ScenarioSource,
    grids: &[usize],
    reference_n: usize,
    out_dir: Option<&Path>,
) -> Result<ConvergenceReport> {
    if grids.is_empty() {
        return Err(Error::Precondition("at least one grid is required".into()));
    }
    let max = *grids.iter().max().expect("non-empty");
    if reference_n < 2 * max - 1 {
        return Err(Error::Precondition(format!("reference_n = {reference_n} must be >= 2*{max}-1")));
    }
    for &n in grids {
        if n < 3 || !(reference_n - 1).is_multiple_of(n - 1) {
            return Err(Error::Precondition(format!("grid n = {n} does not nest into reference n = {reference_n}")));
        }
    }

    let run = |n: usize| -> Result<State> {
        let src = src.with_override("grid.n", n as f64)?;
        let result = match out_dir {
            Some(dir) => run_into(&src, &dir.join(format!("n{n}")))?.result,
            None => simulate(&src.run_spec()?, &mut NullSink)?,
        };
        if result.status != RunStatus::Completed {
            return Err(Error::RunFailed(format!(
                "run at n = {n} ended with {:?}: {}",
                result.status,
                result.metadata.reason.unwrap_or_default()
            )));
        }
        Ok(result.final_state)
    };

    let reference = run(reference_n)?;
    let mut errors_u = Vec::new();
    let mut errors_v = Vec::new();
    for &n in grids {
        let (eu, ev) = restricted_errors(&run(n)?, &reference);
        errors_u.push(eu);
        errors_v.push(ev);
    }
    let order = |e: &[f64]| -> Vec<f64> {
        (1..grids.len())
            .map(|k| {
                let ratio_h = (grids[k] - 1) as f64 / (grids[k - 1] - 1) as f64;
                (e[k - 1] / e[k]).ln() / ratio_h.ln()
            })
            .collect()
    };
    let degenerate = errors_u.iter().chain(&errors_v).any(|&e| e < ERROR_FLOOR);
    Ok(ConvergenceReport {
        grids: grids.to_vec(),
        reference_n,
        orders_u: order(&errors_u),
        orders_v: order(&errors_v),
        errors_u,
        errors_v,
        degenerate,
    })
}
