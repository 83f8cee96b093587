use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which of the two systems is being solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// `v` diffuses and carries Dirichlet data.
    ParabolicParabolic,
    /// `v_t = (u^γ)_x`, no boundary condition on `v`.
    ParabolicHyperbolic,
}

impl Variant {
    pub fn is_hyperbolic(self) -> bool {
        matches!(self, Variant::ParabolicHyperbolic)
    }
}

/// Closed spatial interval `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub a: f64,
    pub b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > a) {
            return Err(Error::InvalidParams(format!("domain [{a}, {b}] must satisfy a < b")));
        }
        Ok(Interval { a, b })
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }
}

/// Conditions under which a run leaves the hypotheses of the stability
/// theorems. They are recorded in run metadata, never treated as errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "flag")]
pub enum TheoryFlag {
    /// Hyperbolic variant with `1 < γ < 2`.
    OutsideTheory { gamma: f64 },
    /// Piecewise-linear boundary data is only C⁰.
    TabulatedBoundaryData,
    /// The integrability heuristic for the boundary data failed.
    IntegrabilitySuspect,
}

/// Rescaled (non-dimensional) model parameters used by the solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub variant: Variant,
    pub gamma: f64,
    pub domain: Interval,
}

impl ModelParams {
    pub fn new(variant: Variant, gamma: f64, domain: Interval) -> Result<Self> {
        let p = ModelParams { variant, gamma, domain };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma >= 1.0) {
            return Err(Error::InvalidGamma { gamma: self.gamma, expected: "gamma >= 1" });
        }
        Interval::new(self.domain.a, self.domain.b)?;
        Ok(())
    }

    /// True for the hyperbolic variant with `1 < γ < 2`, a range the
    /// stability theory does not cover.
    pub fn outside_theory(&self) -> bool {
        self.variant.is_hyperbolic() && self.gamma > 1.0 && self.gamma < 2.0
    }

    pub fn theory_flags(&self) -> Vec<TheoryFlag> {
        if self.outside_theory() {
            vec![TheoryFlag::OutsideTheory { gamma: self.gamma }]
        } else {
            Vec::new()
        }
    }
}

/// Dimensional coefficients of the chemotaxis model with logarithmic
/// sensitivity, logistic growth `κ₁u(1 - u/κ₂)` and production
/// `μ u^γ c - σ c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub chi: f64,
    pub diffusivity: f64,
    pub epsilon: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub mu: f64,
    pub sigma: f64,
    pub gamma: f64,
}

/// A scale factor kept as magnitude and orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleFactor {
    pub magnitude: f64,
    pub sign: f64,
}

impl ScaleFactor {
    fn from_value(value: f64) -> Self {
        ScaleFactor { magnitude: value.abs(), sign: if value < 0.0 { -1.0 } else { 1.0 } }
    }

    pub fn value(&self) -> f64 {
        self.sign * self.magnitude
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    /// Logistic rate after rescaling, `D κ₁ / (μ κ₂^γ χ)`.
    pub r: f64,
    /// `v̂ = v_scale · v`
    pub v_scale: ScaleFactor,
    /// `x̂ = x_scale · x`
    pub x_scale: ScaleFactor,
    /// `t̂ = t_scale · t`
    pub t_scale: ScaleFactor,
    /// `ε / D`, the coefficient of `v_xx` after rescaling.
    pub chemical_diffusion_ratio: f64,
    /// `ε / χ`, the coefficient of the quadratic flux after rescaling.
    pub quadratic_flux_ratio: f64,
    /// Whether the rescaled system coincides with the one the solver
    /// integrates (`χ < 0`, `r = 1`, `ε/D ∈ {0, 1}`, `ε/χ ∈ {0, -1}`).
    pub solver_normalized: bool,
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.chi, self.diffusivity, self.epsilon, self.kappa1, self.kappa2, self.mu, self.sigma, self.gamma];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("all coefficients must be finite".into()));
        }
        if self.diffusivity <= 0.0 {
            return Err(Error::InvalidParams(format!("D = {} must be positive", self.diffusivity)));
        }
        if self.epsilon < 0.0 {
            return Err(Error::InvalidParams(format!("epsilon = {} must be non-negative", self.epsilon)));
        }
        if self.kappa1 <= 0.0 || self.kappa2 <= 0.0 {
            return Err(Error::InvalidParams(format!("kappa1 = {}, kappa2 = {} must be positive", self.kappa1, self.kappa2)));
        }
        if self.gamma < 1.0 {
            return Err(Error::InvalidGamma { gamma: self.gamma, expected: "gamma >= 1" });
        }
        Ok(())
    }
}

/// Rescales the dimensional model onto the non-dimensional system and maps
/// the physical domain through the spatial scale factor.
///
/// The orientation of each factor is reported separately from its
/// magnitude; when `χ > 0` the spatial factor is positive and the domain is
/// not reflected.
pub fn nondimensionalize(p: &PhysicalParams, domain: Interval) -> Result<(ModelParams, ScalingReport)> {
    let product = p.chi * p.mu;
    if !(product > 0.0) {
        return Err(Error::RejectedRegime { product });
    }
    p.validate()?;
    let domain = Interval::new(domain.a, domain.b)?;

    let k = p.kappa2.powf(p.gamma);
    let mu_k = p.mu * k;
    let r = p.diffusivity * p.kappa1 / (mu_k * p.chi);
    let v_scale = (p.chi / mu_k).sqrt();
    let x_scale = p.chi.signum() * (p.chi * mu_k).sqrt() / p.diffusivity;
    let t_scale = mu_k * p.chi / p.diffusivity;

    let chemical_diffusion_ratio = p.epsilon / p.diffusivity;
    let quadratic_flux_ratio = p.epsilon / p.chi;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + b.abs());
    let solver_normalized = p.chi < 0.0
        && close(r, 1.0)
        && (chemical_diffusion_ratio == 0.0 || (close(chemical_diffusion_ratio, 1.0) && close(quadratic_flux_ratio, -1.0)));

    let (xa, xb) = (x_scale * domain.a, x_scale * domain.b);
    let scaled_domain = Interval::new(xa.min(xb), xa.max(xb))?;
    let variant = if p.epsilon == 0.0 { Variant::ParabolicHyperbolic } else { Variant::ParabolicParabolic };
    let model = ModelParams::new(variant, p.gamma, scaled_domain)?;
    let report = ScalingReport {
        r,
        v_scale: ScaleFactor::from_value(v_scale),
        x_scale: ScaleFactor::from_value(x_scale),
        t_scale: ScaleFactor::from_value(t_scale),
        chemical_diffusion_ratio,
        quadratic_flux_ratio,
        solver_normalized,
    };
    Ok((model, report))
}
