use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{damped_from, dissipation_from, entropy, Deviations};
use crate::error::{Error, Result};
use crate::model::{ModelParams, State};
use crate::profiles::{forcing_x, forcing_y, AlphaBounds, BoundaryData, ReferenceProfileSample};
use crate::stencil::mass;

/// One row of the per-run diagnostics series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub l2_u_dev: f64,
    pub l2_v_dev: f64,
    pub h1_u_dev: f64,
    pub h1_v_dev: f64,
    /// `E₁` when `γ = 1`, `E₂` otherwise.
    pub entropy: f64,
    pub sqrt_u_dissipation: f64,
    pub v_dissipation: f64,
    pub weighted_u_dissipation: f64,
    /// `X(t)` (parabolic-parabolic) or `Y(t)` (hyperbolic).
    pub forcing: f64,
    pub vtilde_mean: f64,
    #[serde(rename = "H")]
    pub h: Option<f64>,
    #[serde(rename = "J")]
    pub j: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    /// `G(t) = 2E + ‖ṽ‖²`
    pub ledger_lhs: f64,
    /// `(G(0) + I(t))·e^{I(t)}` with `I(t) = ∫₀ᵗ forcing`, i.e. the integrated
    /// bound at unit constant.
    pub ledger_rhs: f64,
}

impl DiagnosticsRecord {
    pub fn total_h1_deviation(&self) -> f64 {
        self.h1_u_dev + self.h1_v_dev
    }
}

pub const RECORD_COLUMNS: [&str; 16] = [
    "t",
    "l2_u_dev",
    "l2_v_dev",
    "h1_u_dev",
    "h1_v_dev",
    "entropy",
    "sqrt_u_dissipation",
    "v_dissipation",
    "weighted_u_dissipation",
    "forcing",
    "vtilde_mean",
    "H",
    "J",
    "K",
    "ledger_lhs",
    "ledger_rhs",
];

/// Run-level inputs the record needs besides the state and profile.
#[derive(Debug, Clone, Copy)]
pub struct RecordContext<'a> {
    pub bd: &'a BoundaryData,
    pub params: &'a ModelParams,
    /// `α̲`, `ᾱ` over the run horizon; needed for `K`.
    pub bounds: &'a AlphaBounds,
}

/// Evaluates every diagnostic except the ledger columns, which depend on
/// the run history and are left at zero.
pub fn evaluate_record(s: &State, profile: &ReferenceProfileSample, ctx: RecordContext<'_>) -> Result<DiagnosticsRecord> {
    let gamma = ctx.params.gamma;
    let dev = Deviations::new(s, profile)?;
    let norms = dev.norms();
    let ent = entropy(&s.u, &profile.alpha, gamma)?;
    if let Some((index, value)) = s.u.first_at_or_below(0.0) {
        return Err(Error::NonPositiveInput { index, value });
    }
    let diss = dissipation_from(s, &dev, gamma);
    let hyperbolic = ctx.params.variant.is_hyperbolic();
    let forcing = if hyperbolic { forcing_y(ctx.bd, profile.t) } else { forcing_x(ctx.bd, profile.t)? };
    let vtilde_mean = mass(&dev.v, dev.h) / s.grid().length();
    let damped = (hyperbolic && gamma >= 2.0).then(|| damped_from(&dev, &profile.alpha, ent, forcing, gamma, ctx.bounds));
    Ok(DiagnosticsRecord {
        t: s.t,
        l2_u_dev: norms.l2_u,
        l2_v_dev: norms.l2_v,
        h1_u_dev: norms.h1_u,
        h1_v_dev: norms.h1_v,
        entropy: ent,
        sqrt_u_dissipation: diss.sqrt_u,
        v_dissipation: diss.v,
        weighted_u_dissipation: diss.weighted_u,
        forcing,
        vtilde_mean,
        h: damped.map(|d| d.h),
        j: damped.map(|d| d.j),
        k: damped.map(|d| d.k),
        ledger_lhs: 0.0,
        ledger_rhs: 0.0,
    })
}

/// 17 significant digits, enough to round-trip any `f64`.
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn write_records_csv<W: Write>(records: &[DiagnosticsRecord], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORD_COLUMNS)?;
    for r in records {
        let row = [
            fmt_f64(r.t),
            fmt_f64(r.l2_u_dev),
            fmt_f64(r.l2_v_dev),
            fmt_f64(r.h1_u_dev),
            fmt_f64(r.h1_v_dev),
            fmt_f64(r.entropy),
            fmt_f64(r.sqrt_u_dissipation),
            fmt_f64(r.v_dissipation),
            fmt_f64(r.weighted_u_dissipation),
            fmt_f64(r.forcing),
            fmt_f64(r.vtilde_mean),
            fmt_opt(r.h),
            fmt_opt(r.j),
            fmt_opt(r.k),
            fmt_f64(r.ledger_lhs),
            fmt_f64(r.ledger_rhs),
        ];
        w.write_record(&row)?;
    }
    w.flush()
}

pub fn read_records_csv<R: Read>(input: R) -> Result<Vec<DiagnosticsRecord>> {
    let bad = |message: String| Error::Csv { path: "<diagnostics>".into(), message };
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if headers.iter().ne(RECORD_COLUMNS.iter().copied()) {
        return Err(bad(format!("unexpected header {headers:?}")));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| bad(e.to_string()))?;
        let num =
            |i: usize| -> Result<f64> { row[i].parse::<f64>().map_err(|e| bad(format!("column {}: {e}", RECORD_COLUMNS[i]))) };
        let opt = |i: usize| -> Result<Option<f64>> {
            if row[i].is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        out.push(DiagnosticsRecord {
            t: num(0)?,
            l2_u_dev: num(1)?,
            l2_v_dev: num(2)?,
            h1_u_dev: num(3)?,
            h1_v_dev: num(4)?,
            entropy: num(5)?,
            sqrt_u_dissipation: num(6)?,
            v_dissipation: num(7)?,
            weighted_u_dissipation: num(8)?,
            forcing: num(9)?,
            vtilde_mean: num(10)?,
            h: opt(11)?,
            j: opt(12)?,
            k: opt(13)?,
            ledger_lhs: num(14)?,
            ledger_rhs: num(15)?,
        });
    }
    Ok(out)
}
