use serde::{Deserialize, Serialize};

use super::{State, Variant};
use crate::error::{EndpointMismatch, Error, Result};
use crate::profiles::BoundaryData;

/// Tolerance for analytically specified data.
pub const DEFAULT_COMPATIBILITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    pub tol: f64,
    /// Largest endpoint mismatch across all checked values.
    pub max_mismatch: f64,
    pub min_u: f64,
}

/// Checks the initial state against the boundary data at `t = s.t` and the
/// positivity of the initial density. `β` endpoints are only checked for
/// the parabolic-parabolic variant.
pub fn check_compatibility(s: &State, bd: &BoundaryData, variant: Variant, tol: f64) -> Result<CompatibilityReport> {
    if let Some((index, value)) = s.u.first_at_or_below(0.0) {
        return Err(Error::NonPositiveInitialDensity { index, value });
    }
    let t = s.t;
    let grid = s.grid();
    let mut checks = vec![("u", grid.a, s.u.first(), bd.alpha1.value(t)), ("u", grid.b, s.u.last(), bd.alpha2.value(t))];
    if variant == Variant::ParabolicParabolic {
        let (b1, b2) = bd.beta.as_ref().ok_or(Error::MissingBetaSignals)?;
        checks.push(("v", grid.a, s.v.first(), b1.value(t)));
        checks.push(("v", grid.b, s.v.last(), b2.value(t)));
    }

    let mut mismatches = Vec::new();
    let mut max_mismatch = 0.0f64;
    for (field, x, initial, boundary) in checks {
        let gap = (initial - boundary).abs();
        max_mismatch = max_mismatch.max(gap);
        if !(gap <= tol) {
            mismatches.push(EndpointMismatch { field, x, initial, boundary });
        }
    }
    if !mismatches.is_empty() {
        return Err(Error::IncompatibleData(mismatches));
    }
    Ok(CompatibilityReport { tol, max_mismatch, min_u: s.u.min() })
}
