use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{step_ph, step_pp, NumericsConfig, SourceTerm, StepContext, StepError};
use crate::diagnostics::{evaluate_record, ledger_value, DiagnosticsRecord, RecordContext};
use crate::error::{Error, Result};
use crate::model::{
    check_compatibility, CompatibilityReport, ModelParams, SpatialGrid, State, TheoryFlag, DEFAULT_COMPATIBILITY_TOL,
};
use crate::profiles::{
    ba_integrability_check, sample_alpha_bounds, AlphaBounds, BaReport, BaVerdict, BoundaryData, PsiAccumulator,
    ReferenceProfileSample,
};
use crate::stencil::mass;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Completed,
    PositivityLost,
    StepUnstable,
    /// Failed a hypothesis check before the first step.
    Rejected,
}

/// Receives each diagnostics record as it is produced.
pub trait DiagnosticsSink {
    fn record(&mut self, rec: &DiagnosticsRecord);
}

pub struct NullSink;

impl DiagnosticsSink for NullSink {
    fn record(&mut self, _: &DiagnosticsRecord) {}
}

impl<F: FnMut(&DiagnosticsRecord)> DiagnosticsSink for F {
    fn record(&mut self, rec: &DiagnosticsRecord) {
        self(rec)
    }
}

/// A fully resolved simulation request.
#[derive(Clone)]
pub struct RunSpec {
    pub params: ModelParams,
    pub boundary: BoundaryData,
    pub initial: State,
    pub numerics: NumericsConfig,
    /// Steps between diagnostics records.
    pub cadence: usize,
    pub source: Option<Arc<dyn SourceTerm>>,
    pub compatibility_tol: f64,
}

impl RunSpec {
    pub fn new(params: ModelParams, boundary: BoundaryData, initial: State, numerics: NumericsConfig, cadence: usize) -> Self {
        RunSpec { params, boundary, initial, numerics, cadence, source: None, compatibility_tol: DEFAULT_COMPATIBILITY_TOL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub grid: SpatialGrid,
    pub dt: f64,
    pub t_end: f64,
    pub steps_taken: usize,
    pub wall_time_s: f64,
    pub stability_limit: Option<f64>,
    pub compatibility: Option<CompatibilityReport>,
    pub alpha_bounds: AlphaBounds,
    pub ba: BaReport,
    pub flags: Vec<TheoryFlag>,
    /// Smallest `u` seen at any step.
    pub min_u: f64,
    /// Why the run stopped early, if it did.
    pub reason: Option<String>,
    /// `Ψ` at the final state (hyperbolic variant only).
    pub final_psi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub status: RunStatus,
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: State,
    pub metadata: RunMetadata,
}

fn profile_at(spec: &RunSpec, s: &State, psi: Option<&PsiAccumulator>) -> Result<ReferenceProfileSample> {
    match psi {
        Some(p) => Ok(ReferenceProfileSample::hyperbolic(&spec.boundary, s.grid(), s.t, p.value())),
        None => ReferenceProfileSample::parabolic(&spec.boundary, s.grid(), s.t),
    }
}

/// Running state of the ledger columns.
struct Ledger {
    g0: f64,
    integral: f64,
    last: Option<(f64, f64)>,
}

impl Ledger {
    fn fill(&mut self, rec: &mut DiagnosticsRecord) {
        let g = ledger_value(rec);
        match self.last {
            None => self.g0 = g,
            Some((t, f)) => self.integral += 0.5 * (rec.t - t) * (rec.forcing + f),
        }
        self.last = Some((rec.t, rec.forcing));
        rec.ledger_lhs = g;
        rec.ledger_rhs = (self.g0 + self.integral) * self.integral.exp();
    }
}

/// Runs the stepper from `spec.initial` to `t_end`, recording diagnostics
/// at step 0, every `cadence` steps and at the last step. Step failures end
/// the run with the matching status; only malformed input is an `Err`.
pub fn simulate(spec: &RunSpec, sink: &mut dyn DiagnosticsSink) -> Result<RunResult> {
    let started = Instant::now();
    spec.params.validate()?;
    spec.numerics.validate()?;
    if spec.cadence == 0 {
        return Err(Error::InvalidParams("diagnostics cadence must be >= 1".into()));
    }
    let grid = spec.initial.grid();
    if (grid.a, grid.b) != (spec.params.domain.a, spec.params.domain.b) {
        return Err(Error::InvalidParams(format!(
            "grid [{}, {}] does not match the model domain [{}, {}]",
            grid.a, grid.b, spec.params.domain.a, spec.params.domain.b
        )));
    }
    let hyperbolic = spec.params.variant.is_hyperbolic();
    if !hyperbolic && spec.boundary.beta.is_none() {
        return Err(Error::MissingBetaSignals);
    }

    let cfg = &spec.numerics;
    let horizon = spec.initial.t + cfg.steps() as f64 * cfg.dt;
    let bounds = sample_alpha_bounds(&spec.boundary, horizon, cfg.dt / 10.0);
    let ba = ba_integrability_check(&spec.boundary, horizon, cfg.dt);
    let mut flags = spec.params.theory_flags();
    if spec.boundary.has_tabulated() {
        flags.push(TheoryFlag::TabulatedBoundaryData);
    }
    if ba.verdict == BaVerdict::Suspect {
        flags.push(TheoryFlag::IntegrabilitySuspect);
    }
    let mut meta = RunMetadata {
        grid,
        dt: cfg.dt,
        t_end: cfg.t_end,
        steps_taken: 0,
        wall_time_s: 0.0,
        stability_limit: None,
        compatibility: None,
        alpha_bounds: bounds,
        ba,
        flags,
        min_u: spec.initial.u.min(),
        reason: None,
        final_psi: None,
    };

    let rejected = |mut meta: RunMetadata, reason: String| RunResult {
        status: RunStatus::Rejected,
        records: Vec::new(),
        final_state: spec.initial.clone(),
        metadata: {
            meta.reason = Some(reason);
            meta.wall_time_s = started.elapsed().as_secs_f64();
            meta
        },
    };

    match check_compatibility(&spec.initial, &spec.boundary, spec.params.variant, spec.compatibility_tol) {
        Ok(rep) => meta.compatibility = Some(rep),
        Err(e) => return Ok(rejected(meta, e.to_string())),
    }
    match cfg.check_stability(&spec.initial, &spec.params) {
        Ok(limit) => meta.stability_limit = Some(limit),
        Err(e) => return Ok(rejected(meta, e.to_string())),
    }

    // Endpoints agree with the data to within tolerance; make them exact.
    let mut state = spec.initial.clone();
    let n = grid.n;
    let t0 = state.t;
    state.u.values[0] = spec.boundary.alpha1.value(t0);
    state.u.values[n - 1] = spec.boundary.alpha2.value(t0);
    if let Some((b1, b2)) = &spec.boundary.beta {
        if !hyperbolic {
            state.v.values[0] = b1.value(t0);
            state.v.values[n - 1] = b2.value(t0);
        }
    }

    let mut psi = hyperbolic
        .then(|| PsiAccumulator::new(&spec.boundary, spec.params.domain, mass(&state.v.values, grid.h), spec.params.gamma, t0));
    let ctx = StepContext { bd: &spec.boundary, params: &spec.params, cfg, source: spec.source.as_deref() };
    let rctx = RecordContext { bd: &spec.boundary, params: &spec.params, bounds: &bounds };
    let mut ledger = Ledger { g0: 0.0, integral: 0.0, last: None };
    let mut records = Vec::new();
    let mut emit = |s: &State, psi: Option<&PsiAccumulator>, records: &mut Vec<DiagnosticsRecord>| -> Result<()> {
        let profile = profile_at(spec, s, psi)?;
        let mut rec = evaluate_record(s, &profile, rctx)?;
        ledger.fill(&mut rec);
        sink.record(&rec);
        records.push(rec);
        Ok(())
    };

    emit(&state, psi.as_ref(), &mut records)?;
    let steps = cfg.steps();
    let mut status = RunStatus::Completed;
    let mut reason = None;
    for k in 1..=steps {
        let result = match psi.as_mut() {
            Some(p) => step_ph(&state, p, &ctx),
            None => step_pp(&state, &ctx),
        };
        match result {
            Ok((mut next, rep)) => {
                // keep t on the k·dt lattice instead of accumulating rounding
                next.t = t0 + k as f64 * cfg.dt;
                meta.min_u = meta.min_u.min(rep.min_u);
                state = next;
                meta.steps_taken = k;
                if k % spec.cadence == 0 || k == steps {
                    emit(&state, psi.as_ref(), &mut records)?;
                }
            }
            Err(e) => {
                meta.min_u = meta.min_u.min(e.report().min_u);
                meta.steps_taken = k;
                status = match e {
                    StepError::PositivityLost { .. } => RunStatus::PositivityLost,
                    StepError::StepUnstable { .. } => RunStatus::StepUnstable,
                };
                reason = Some(e.to_string());
                state = e.state().clone();
                break;
            }
        }
    }
    meta.reason = reason;
    meta.final_psi = psi.map(|p| p.value());
    meta.wall_time_s = started.elapsed().as_secs_f64();
    Ok(RunResult { status, records, final_state: state, metadata: meta })
}
