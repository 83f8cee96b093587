//! Boundary data and the dynamic reference profiles measured against it:
//! the affine interpolants `α(x,t)`, `β(x,t)`, the spatial average `Ψ(t)`,
//! and the forcing budgets `X(t)`, `Y(t)`.

mod signal;

use serde::{Deserialize, Serialize};

pub use signal::{AnalyticFamily, BoundarySignal, SignalKind, Table};

use crate::error::{Error, Result};
use crate::model::{Field, Interval, SpatialGrid};

/// The four Dirichlet signals. `beta` is absent for the hyperbolic variant.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub alpha1: BoundarySignal,
    pub alpha2: BoundarySignal,
    pub beta: Option<(BoundarySignal, BoundarySignal)>,
}

impl BoundaryData {
    pub fn new(alpha1: BoundarySignal, alpha2: BoundarySignal, beta: Option<(BoundarySignal, BoundarySignal)>) -> Result<Self> {
        let bd = BoundaryData { alpha1, alpha2, beta };
        bd.alpha1.validate()?;
        bd.alpha2.validate()?;
        if let Some((b1, b2)) = &bd.beta {
            b1.validate()?;
            b2.validate()?;
        }
        Ok(bd)
    }

    /// `α ≡ 1`, `β ≡ 0` (or no `β`).
    pub fn equilibrium(with_beta: bool) -> Self {
        BoundaryData {
            alpha1: BoundarySignal::constant(1.0),
            alpha2: BoundarySignal::constant(1.0),
            beta: with_beta.then(|| (BoundarySignal::constant(0.0), BoundarySignal::constant(0.0))),
        }
    }

    pub fn has_tabulated(&self) -> bool {
        let mut all = vec![&self.alpha1, &self.alpha2];
        if let Some((b1, b2)) = &self.beta {
            all.push(b1);
            all.push(b2);
        }
        all.iter().any(|s| s.kind() == SignalKind::Tabulated)
    }

    fn betas(&self) -> Result<(&BoundarySignal, &BoundarySignal)> {
        self.beta.as_ref().map(|(a, b)| (a, b)).ok_or(Error::MissingBetaSignals)
    }
}

/// Reference profiles at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceProfileSample {
    pub t: f64,
    pub alpha: Field,
    pub beta: Option<Field>,
    pub psi: Option<f64>,
}

impl ReferenceProfileSample {
    /// Parabolic-parabolic profile: `α(·,t)` and `β(·,t)`.
    pub fn parabolic(bd: &BoundaryData, grid: SpatialGrid, t: f64) -> Result<Self> {
        Ok(ReferenceProfileSample { t, alpha: alpha_profile(bd, grid, t), beta: Some(beta_profile(bd, grid, t)?), psi: None })
    }

    /// Hyperbolic profile: `α(·,t)` and the average `Ψ(t)`.
    pub fn hyperbolic(bd: &BoundaryData, grid: SpatialGrid, t: f64, psi: f64) -> Self {
        ReferenceProfileSample { t, alpha: alpha_profile(bd, grid, t), beta: None, psi: Some(psi) }
    }

    /// The reference value for `v` at node `i`.
    pub fn v_reference(&self, i: usize) -> f64 {
        match (&self.beta, self.psi) {
            (Some(beta), _) => beta.values[i],
            (None, Some(psi)) => psi,
            (None, None) => 0.0,
        }
    }
}

fn interpolate(grid: SpatialGrid, left: f64, right: f64) -> Field {
    let values = (0..grid.n)
        .map(|i| {
            let theta = grid.unit_coordinate(i);
            (1.0 - theta) * left + theta * right
        })
        .collect();
    Field { grid, values }
}

/// `α(x,t) = α₁(t) + (x-a)/(b-a)·[α₂(t) - α₁(t)]` on the grid nodes.
pub fn alpha_profile(bd: &BoundaryData, grid: SpatialGrid, t: f64) -> Field {
    interpolate(grid, bd.alpha1.value(t), bd.alpha2.value(t))
}

/// `β(x,t)`, the affine interpolant of `β₁(t)`, `β₂(t)`.
pub fn beta_profile(bd: &BoundaryData, grid: SpatialGrid, t: f64) -> Result<Field> {
    let (b1, b2) = bd.betas()?;
    Ok(interpolate(grid, b1.value(t), b2.value(t)))
}

fn boundary_flux(bd: &BoundaryData, gamma: f64, t: f64) -> f64 {
    bd.alpha2.value(t).powf(gamma) - bd.alpha1.value(t).powf(gamma)
}

/// `Ψ(t) = (1/(b-a))·[∫v₀ dx + ∫₀ᵗ (α₂^γ - α₁^γ) dτ]` with the time integral
/// by the composite trapezoid rule on a step no larger than `quadrature_dt`.
/// `v0_integral` is `∫_a^b v₀ dx`.
pub fn psi_average(bd: &BoundaryData, domain: Interval, v0_integral: f64, gamma: f64, t: f64, quadrature_dt: f64) -> f64 {
    let steps = (t / quadrature_dt).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let mut integral = 0.0;
    let mut prev = boundary_flux(bd, gamma, 0.0);
    for k in 1..=steps {
        let next = boundary_flux(bd, gamma, k as f64 * dt);
        integral += 0.5 * dt * (prev + next);
        prev = next;
    }
    (v0_integral + integral) / domain.length()
}

/// Running `Ψ(t)`, advanced by one trapezoid increment per solver step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiAccumulator {
    length: f64,
    gamma: f64,
    mass: f64,
    t: f64,
    flux: f64,
}

impl PsiAccumulator {
    pub fn new(bd: &BoundaryData, domain: Interval, v0_integral: f64, gamma: f64, t0: f64) -> Self {
        PsiAccumulator { length: domain.length(), gamma, mass: v0_integral, t: t0, flux: boundary_flux(bd, gamma, t0) }
    }

    pub fn value(&self) -> f64 {
        self.mass / self.length
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    /// Adds `dt·½[(α₂^γ - α₁^γ)(t) + (α₂^γ - α₁^γ)(t + dt)]` to the mass.
    pub fn advance(&mut self, bd: &BoundaryData, dt: f64) {
        let t_new = self.t + dt;
        let flux_new = boundary_flux(bd, self.gamma, t_new);
        self.mass += 0.5 * dt * (self.flux + flux_new);
        self.flux = flux_new;
        self.t = t_new;
    }
}

/// `X(t) = |1-α₁| + |α₂-α₁| + |α₁'| + |α₂'| + |β₂-β₁| + |β₁'| + |β₂'|`.
pub fn forcing_x(bd: &BoundaryData, t: f64) -> Result<f64> {
    let (b1, b2) = bd.betas()?;
    Ok(forcing_y(bd, t) + (b2.value(t) - b1.value(t)).abs() + b1.derivative(t).abs() + b2.derivative(t).abs())
}

/// `Y(t) = |1-α₁| + |α₂-α₁| + |α₁'| + |α₂'|`.
pub fn forcing_y(bd: &BoundaryData, t: f64) -> f64 {
    let a1 = bd.alpha1.value(t);
    let a2 = bd.alpha2.value(t);
    (1.0 - a1).abs() + (a2 - a1).abs() + bd.alpha1.derivative(t).abs() + bd.alpha2.derivative(t).abs()
}

/// Pointwise bounds of `α` over a horizon, found by dense sampling. Because
/// `α` is affine in `x` its extremes sit at the endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaBounds {
    pub lower: f64,
    pub upper: f64,
    pub alpha1_min: f64,
    pub alpha2_min: f64,
    pub horizon: f64,
    pub resolution: f64,
}

pub fn sample_alpha_bounds(bd: &BoundaryData, horizon: f64, resolution: f64) -> AlphaBounds {
    let steps = (horizon / resolution).ceil().max(1.0) as usize;
    let mut out = AlphaBounds {
        lower: f64::INFINITY,
        upper: f64::NEG_INFINITY,
        alpha1_min: f64::INFINITY,
        alpha2_min: f64::INFINITY,
        horizon,
        resolution,
    };
    for k in 0..=steps {
        let t = (k as f64 * resolution).min(horizon);
        let a1 = bd.alpha1.value(t);
        let a2 = bd.alpha2.value(t);
        out.alpha1_min = out.alpha1_min.min(a1);
        out.alpha2_min = out.alpha2_min.min(a2);
        out.upper = out.upper.max(a1.max(a2));
    }
    out.lower = out.alpha1_min.min(out.alpha2_min);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaVerdict {
    Satisfied,
    Suspect,
}

/// Integrals of one signal deviation over the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignalIntegral {
    pub name: String,
    /// `∫|s - s∞|` where `s∞` is 1 for `α` and 0 for `β`.
    pub value_integral: f64,
    /// `∫|s'|`
    pub derivative_integral: f64,
    /// Contribution of the tail window to both integrals.
    pub tail: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaThresholds {
    /// Tail window as a fraction of the horizon.
    pub tail_window: f64,
    /// Verdict is `Satisfied` when the tail is below this fraction of the
    /// total. Heuristic only.
    pub max_tail_fraction: f64,
}

impl Default for BaThresholds {
    fn default() -> Self {
        BaThresholds { tail_window: 0.1, max_tail_fraction: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaReport {
    pub signals: Vec<SignalIntegral>,
    pub total: f64,
    pub tail: f64,
    pub verdict: BaVerdict,
    pub alpha1_min: f64,
    pub alpha2_min: f64,
    pub horizon: f64,
    pub resolution: f64,
    pub thresholds: BaThresholds,
}

/// Numerical stand-in for the `W^{1,1}` hypothesis on the boundary data.
pub fn ba_integrability_check(bd: &BoundaryData, horizon: f64, dt: f64) -> BaReport {
    ba_integrability_check_with(bd, horizon, dt, BaThresholds::default())
}

pub fn ba_integrability_check_with(bd: &BoundaryData, horizon: f64, dt: f64, thresholds: BaThresholds) -> BaReport {
    let steps = (horizon / dt).ceil().max(1.0) as usize;
    let step = horizon / steps as f64;
    let tail_start = horizon * (1.0 - thresholds.tail_window);

    let mut named: Vec<(&str, &BoundarySignal, f64)> = vec![("alpha1", &bd.alpha1, 1.0), ("alpha2", &bd.alpha2, 1.0)];
    if let Some((b1, b2)) = &bd.beta {
        named.push(("beta1", b1, 0.0));
        named.push(("beta2", b2, 0.0));
    }

    let signals: Vec<SignalIntegral> = named
        .into_iter()
        .map(|(name, sig, target)| {
            let integrand = |t: f64| ((sig.value(t) - target).abs(), sig.derivative(t).abs());
            let mut acc = SignalIntegral { name: name.to_string(), value_integral: 0.0, derivative_integral: 0.0, tail: 0.0 };
            let mut prev = integrand(0.0);
            for k in 1..=steps {
                let t0 = (k - 1) as f64 * step;
                let t1 = k as f64 * step;
                let next = integrand(t1);
                let dv = 0.5 * step * (prev.0 + next.0);
                let dd = 0.5 * step * (prev.1 + next.1);
                acc.value_integral += dv;
                acc.derivative_integral += dd;
                if t0 >= tail_start - 0.5 * step {
                    acc.tail += dv + dd;
                }
                prev = next;
            }
            acc
        })
        .collect();

    let total: f64 = signals.iter().map(|s| s.value_integral + s.derivative_integral).sum();
    let tail: f64 = signals.iter().map(|s| s.tail).sum();
    let verdict =
        if total == 0.0 || tail < thresholds.max_tail_fraction * total { BaVerdict::Satisfied } else { BaVerdict::Suspect };
    let bounds = sample_alpha_bounds(bd, horizon, step);
    BaReport {
        signals,
        total,
        tail,
        verdict,
        alpha1_min: bounds.alpha1_min,
        alpha2_min: bounds.alpha2_min,
        horizon,
        resolution: step,
        thresholds,
    }
}
