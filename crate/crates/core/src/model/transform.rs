use super::Field;
use crate::error::{Error, Result};
use crate::stencil;

/// Cole–Hopf transform `v = ∂x ln(e^{σt} c)`.
///
/// The factor `e^{σt}` is spatially constant and drops out under `∂x`, so
/// `sigma` and `t` are accepted but never multiplied into `c` (large `σt`
/// would otherwise overflow).
pub fn cole_hopf_forward(c: &Field, _sigma: f64, _t: f64) -> Result<Field> {
    if let Some((index, value)) = c.first_at_or_below(0.0) {
        return Err(Error::NonPositiveInput { index, value });
    }
    let log: Vec<f64> = c.values.iter().map(|v| v.ln()).collect();
    Ok(Field { grid: c.grid, values: stencil::derivative(&log, c.grid.h) })
}

/// Reconstructs `c` from `v = (ln c)_x` with `c(a) = anchor`, integrating
/// `v` by the cumulative trapezoid rule.
pub fn cole_hopf_inverse(v: &Field, anchor: f64) -> Result<Field> {
    if !(anchor > 0.0) || !anchor.is_finite() {
        return Err(Error::NonPositiveInput { index: 0, value: anchor });
    }
    let ln_anchor = anchor.ln();
    let values = stencil::cumulative_trapezoid(&v.values, v.grid.h).into_iter().map(|s| (ln_anchor + s).exp()).collect();
    Ok(Field { grid: v.grid, values })
}
