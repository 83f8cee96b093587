//! Finite-difference stencils and quadrature shared by the steppers and the
//! diagnostics. Every function assumes a uniform grid with at least three
//! nodes.

/// First derivative: central in the interior, second-order one-sided at the
/// endpoints.
pub fn derivative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    debug_assert!(n >= 3);
    let mut out = vec![0.0; n];
    let inv = 1.0 / (2.0 * h);
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) * inv;
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) * inv;
    }
    out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) * inv;
    out
}

/// Central difference `[F_{i+1} - F_{i-1}] / 2h` at interior nodes. Endpoint
/// entries are left at zero; callers overwrite or ignore them.
pub fn central_interior(flux: &[f64], h: f64, out: &mut [f64]) {
    let n = flux.len();
    let inv = 1.0 / (2.0 * h);
    out[0] = 0.0;
    for i in 1..n - 1 {
        out[i] = (flux[i + 1] - flux[i - 1]) * inv;
    }
    out[n - 1] = 0.0;
}

/// Flux divergence for the hyperbolic update: central in the interior,
/// second-order one-sided at the endpoints. Its [`mass`]-weighted sum is
/// exactly `F_{n-1} - F_0`.
pub fn conservative_divergence(flux: &[f64], h: f64, out: &mut [f64]) {
    let n = flux.len();
    let inv = 1.0 / (2.0 * h);
    central_interior(flux, h, out);
    out[0] = (-3.0 * flux[0] + 4.0 * flux[1] - flux[2]) * inv;
    out[n - 1] = (3.0 * flux[n - 1] - 4.0 * flux[n - 2] + flux[n - 3]) * inv;
}

/// First-order forward difference `[F_{i+1} - F_i] / h`, backward at the
/// right endpoint.
pub fn forward_divergence(flux: &[f64], h: f64, out: &mut [f64]) {
    let n = flux.len();
    for i in 0..n - 1 {
        out[i] = (flux[i + 1] - flux[i]) / h;
    }
    out[n - 1] = (flux[n - 1] - flux[n - 2]) / h;
}

/// `[f_{i+1} - 2 f_i + f_{i-1}] / h²` at interior nodes, zero at endpoints.
pub fn laplacian_interior(values: &[f64], h: f64, out: &mut [f64]) {
    let n = values.len();
    let inv = 1.0 / (h * h);
    out[0] = 0.0;
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - 2.0 * values[i] + values[i - 1]) * inv;
    }
    out[n - 1] = 0.0;
}

/// Composite trapezoid rule.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        _ => {
            let inner: f64 = values[1..n - 1].iter().sum();
            h * (0.5 * (values[0] + values[n - 1]) + inner)
        }
    }
}

/// Discrete integral paired with [`conservative_divergence`]: weights
/// `h·(1/4, 5/4, 1, ..., 1, 5/4, 1/4)`. Second-order accurate, and the
/// discrete mass of `v` changes only through the endpoint fluxes.
pub fn mass(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 3 {
        return trapezoid(values, h);
    }
    trapezoid(values, h) + 0.25 * h * (values[1] - values[0] + values[n - 2] - values[n - 1])
}

/// Trapezoid rule applied to `f(values[i])` without allocating.
pub fn trapezoid_map(values: &[f64], h: f64, f: impl Fn(usize, f64) -> f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mut inner = 0.0;
    for (i, &v) in values.iter().enumerate().take(n - 1).skip(1) {
        inner += f(i, v);
    }
    h * (0.5 * (f(0, values[0]) + f(n - 1, values[n - 1])) + inner)
}

/// Running trapezoid integral starting from zero.
pub fn cumulative_trapezoid(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(acc);
    for w in values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Thomas algorithm for a tridiagonal system. `lower[i]` multiplies
/// `x[i-1]` and `upper[i]` multiplies `x[i+1]` in row `i` (`lower[0]` and
/// `upper[n-1]` are ignored). The solution overwrites `rhs`. `scratch` must
/// have the same length as `rhs`.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64], scratch: &mut [f64]) {
    let n = rhs.len();
    debug_assert!(diag.len() == n && lower.len() == n && upper.len() == n && scratch.len() == n);
    let mut denom = diag[0];
    scratch[0] = upper[0] / denom;
    rhs[0] /= denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * scratch[i - 1];
        scratch[i] = upper[i] / denom;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= scratch[i] * rhs[i + 1];
    }
}

/// Max-norm of `A x - rhs` for a tridiagonal `A`.
pub fn tridiagonal_residual(lower: &[f64], diag: &[f64], upper: &[f64], x: &[f64], rhs: &[f64]) -> f64 {
    let n = x.len();
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut ax = diag[i] * x[i];
        if i > 0 {
            ax += lower[i] * x[i - 1];
        }
        if i + 1 < n {
            ax += upper[i] * x[i + 1];
        }
        worst = worst.max((ax - rhs[i]).abs());
    }
    worst
}
