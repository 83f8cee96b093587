use serde::{Deserialize, Serialize};

use super::DiagnosticsRecord;

/// Absolute slack allowed on the integrated inequality.
pub const DEFAULT_LEDGER_SLACK: f64 = 1e-10;

/// `G = 2E + ‖ṽ‖²` for one record.
pub fn ledger_value(r: &DiagnosticsRecord) -> f64 {
    2.0 * r.entropy + r.l2_v_dev * r.l2_v_dev
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerSample {
    pub t: f64,
    pub g: f64,
    /// `∫₀ᵗ forcing` by the trapezoid rule on the record times.
    pub forcing_integral: f64,
    /// `(G(0) + C·I)·exp(C·I)` at the requested constant.
    pub bound: f64,
    /// `bound + slack - G`; negative means a violation.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerReport {
    pub c: f64,
    pub slack: f64,
    /// Smallest constant for which the bound holds at every sample;
    /// infinite when growth occurs with no forcing to pay for it.
    pub c_star: f64,
    pub holds: bool,
    pub samples: Vec<LedgerSample>,
    /// Times at which the bound fails at constant `c`.
    pub violations: Vec<f64>,
}

impl LedgerReport {
    pub fn c_star_finite(&self) -> bool {
        self.c_star.is_finite()
    }
}

fn bound(g0: f64, c: f64, integral: f64) -> f64 {
    let ci = c * integral;
    (g0 + ci) * ci.exp()
}

/// Smallest `C ≥ 0` with `G ≤ (G₀ + C·I)e^{C·I} + slack`.
fn minimal_constant(g0: f64, g: f64, integral: f64, slack: f64) -> f64 {
    let target = g - slack;
    if target <= g0 {
        return 0.0;
    }
    if integral <= 0.0 {
        return f64::INFINITY;
    }
    let mut hi = 1.0;
    while bound(g0, hi, integral) < target {
        hi *= 2.0;
        if !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bound(g0, mid, integral) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    hi
}

pub fn gronwall_ledger(series: &[DiagnosticsRecord], c: f64) -> LedgerReport {
    gronwall_ledger_with_slack(series, c, DEFAULT_LEDGER_SLACK)
}

/// Checks `G(t) ≤ (G(0) + C∫₀ᵗF)·exp(C∫₀ᵗF)` at every record, where `F` is the
/// record's forcing column, and fits the minimal working constant.
pub fn gronwall_ledger_with_slack(series: &[DiagnosticsRecord], c: f64, slack: f64) -> LedgerReport {
    let mut samples = Vec::with_capacity(series.len());
    let mut violations = Vec::new();
    let mut c_star = 0.0f64;
    let Some(first) = series.first() else {
        return LedgerReport { c, slack, c_star, holds: true, samples, violations };
    };
    let g0 = ledger_value(first);
    let mut integral = 0.0;
    let mut prev: Option<&DiagnosticsRecord> = None;
    for r in series {
        if let Some(p) = prev {
            integral += 0.5 * (r.t - p.t) * (r.forcing + p.forcing);
        }
        prev = Some(r);
        let g = ledger_value(r);
        let b = bound(g0, c, integral);
        let margin = b + slack - g;
        if margin < 0.0 {
            violations.push(r.t);
        }
        c_star = c_star.max(minimal_constant(g0, g, integral, slack));
        samples.push(LedgerSample { t: r.t, g, forcing_integral: integral, bound: b, margin });
    }
    LedgerReport { c, slack, c_star, holds: violations.is_empty(), samples, violations }
}
