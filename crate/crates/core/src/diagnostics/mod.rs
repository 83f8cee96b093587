//! Functionals of the stability analysis evaluated on grid states.
//!
//! Quadrature is the composite trapezoid rule on the solver grid, except
//! for means of `v` in the hyperbolic system, which use
//! [`stencil::mass`](crate::stencil::mass). Every derivative uses [`stencil::derivative`](crate::stencil::derivative), so
//! the diagnostics never see a different discretization from the dynamics.

mod ledger;
mod record;

pub use ledger::{gronwall_ledger, gronwall_ledger_with_slack, ledger_value, LedgerReport, LedgerSample, DEFAULT_LEDGER_SLACK};
pub(crate) use record::fmt_f64;
pub use record::{evaluate_record, read_records_csv, write_records_csv, DiagnosticsRecord, RecordContext, RECORD_COLUMNS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Field, State};
use crate::profiles::{forcing_y, AlphaBounds, BoundaryData, ReferenceProfileSample};
use crate::stencil::{derivative, mass, trapezoid, trapezoid_map};

fn ensure_positive(f: &Field) -> Result<()> {
    match f.first_at_or_below(0.0) {
        Some((index, value)) => Err(Error::NonPositiveInput { index, value }),
        None => Ok(()),
    }
}

fn ensure_same_grid(a: &Field, b: &Field) -> Result<()> {
    if a.same_grid(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// `E₁ = ∫ (u ln u - u) - (α ln α - α) - ln α·(u - α) dx`.
pub fn entropy_e1(u: &Field, alpha: &Field) -> Result<f64> {
    ensure_same_grid(u, alpha)?;
    ensure_positive(u)?;
    ensure_positive(alpha)?;
    let a = &alpha.values;
    Ok(trapezoid_map(&u.values, u.grid.h, |i, ui| {
        let ai = a[i];
        let la = ai.ln();
        (ui * ui.ln() - ui) - (ai * la - ai) - la * (ui - ai)
    }))
}

/// `E₂ = (1/(γ-1)) ∫ u^γ - α^γ - γα^{γ-1}(u - α) dx` for `γ > 1`.
pub fn entropy_e2(u: &Field, alpha: &Field, gamma: f64) -> Result<f64> {
    if !(gamma > 1.0) {
        return Err(Error::InvalidGamma { gamma, expected: "gamma > 1" });
    }
    ensure_same_grid(u, alpha)?;
    if let Some((index, value)) = u.values.iter().copied().enumerate().find(|&(_, v)| !(v >= 0.0)) {
        return Err(Error::NonPositiveInput { index, value });
    }
    ensure_positive(alpha)?;
    let a = &alpha.values;
    let scale = 1.0 / (gamma - 1.0);
    Ok(trapezoid_map(&u.values, u.grid.h, |i, ui| {
        let ai = a[i];
        scale * (ui.powf(gamma) - ai.powf(gamma) - gamma * ai.powf(gamma - 1.0) * (ui - ai))
    }))
}

/// `E₁` for `γ = 1`, `E₂` otherwise.
pub fn entropy(u: &Field, alpha: &Field, gamma: f64) -> Result<f64> {
    if gamma == 1.0 {
        entropy_e1(u, alpha)
    } else {
        entropy_e2(u, alpha, gamma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationNorms {
    pub l2_u: f64,
    pub h1_u: f64,
    pub l2_v: f64,
    pub h1_v: f64,
}

/// Deviations `ũ = u - α` and `ṽ = v - β` (or `v - Ψ`), with their
/// derivatives on the shared stencil.
#[derive(Debug, Clone, PartialEq)]
pub struct Deviations {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub u_x: Vec<f64>,
    pub v_x: Vec<f64>,
    pub h: f64,
}

impl Deviations {
    pub fn new(s: &State, profile: &ReferenceProfileSample) -> Result<Self> {
        ensure_same_grid(&s.u, &profile.alpha)?;
        if let Some(beta) = &profile.beta {
            ensure_same_grid(&s.v, beta)?;
        }
        let h = s.u.grid.h;
        let u: Vec<f64> = s.u.values.iter().zip(&profile.alpha.values).map(|(u, a)| u - a).collect();
        let v: Vec<f64> = s.v.values.iter().enumerate().map(|(i, v)| v - profile.v_reference(i)).collect();
        let u_x = derivative(&u, h);
        let v_x = derivative(&v, h);
        Ok(Deviations { u, v, u_x, v_x, h })
    }

    pub fn norms(&self) -> DeviationNorms {
        let sq = |x: &[f64]| trapezoid_map(x, self.h, |_, v| v * v);
        let (u2, ux2, v2, vx2) = (sq(&self.u), sq(&self.u_x), sq(&self.v), sq(&self.v_x));
        DeviationNorms { l2_u: u2.sqrt(), h1_u: (u2 + ux2).sqrt(), l2_v: v2.sqrt(), h1_v: (v2 + vx2).sqrt() }
    }
}

/// L² and H¹ norms of `ũ` and `ṽ`, with `‖f‖_{H¹} = sqrt(‖f‖² + ‖f_x‖²)`.
pub fn deviation_norms(s: &State, profile: &ReferenceProfileSample) -> Result<DeviationNorms> {
    Ok(Deviations::new(s, profile)?.norms())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dissipation {
    /// `‖(√u)_x‖² = ∫ |u_x|²/(4u)`
    pub sqrt_u: f64,
    /// `‖ṽ_x‖²`
    pub v: f64,
    /// `∫ u^{γ-2} |ũ_x|²`
    pub weighted_u: f64,
}

pub fn dissipation_terms(s: &State, profile: &ReferenceProfileSample, gamma: f64) -> Result<Dissipation> {
    ensure_positive(&s.u)?;
    let dev = Deviations::new(s, profile)?;
    Ok(dissipation_from(s, &dev, gamma))
}

fn dissipation_from(s: &State, dev: &Deviations, gamma: f64) -> Dissipation {
    let h = dev.h;
    let u = &s.u.values;
    let u_x = derivative(u, h);
    let sqrt_u = trapezoid_map(&u_x, h, |i, d| d * d / (4.0 * u[i]));
    let v = trapezoid_map(&dev.v_x, h, |_, d| d * d);
    let weighted_u = if gamma == 2.0 {
        trapezoid_map(&dev.u_x, h, |_, d| d * d)
    } else {
        trapezoid_map(&dev.u_x, h, |i, d| u[i].powf(gamma - 2.0) * d * d)
    };
    Dissipation { sqrt_u, v, weighted_u }
}

/// `H`, `J`, `K` of the damped equation for `ṽ_x` (hyperbolic, `γ ≥ 2`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DampedQuantities {
    pub h: f64,
    pub j: f64,
    pub k: f64,
}

/// Weight `(γ-1)·ᾱ^{2γ-2}·α̲^{2-γ}` multiplying the entropy inside `K`.
pub fn k_entropy_weight(gamma: f64, bounds: &AlphaBounds) -> f64 {
    (gamma - 1.0) * bounds.upper.powf(2.0 * gamma - 2.0) * bounds.lower.powf(2.0 - gamma)
}

pub fn damped_quantities(
    s: &State,
    profile: &ReferenceProfileSample,
    bd: &BoundaryData,
    gamma: f64,
    bounds: &AlphaBounds,
) -> Result<DampedQuantities> {
    if !(gamma >= 2.0) {
        return Err(Error::InvalidGamma { gamma, expected: "gamma >= 2" });
    }
    let dev = Deviations::new(s, profile)?;
    let e2 = entropy_e2(&s.u, &profile.alpha, gamma)?;
    Ok(damped_from(&dev, &profile.alpha, e2, forcing_y(bd, profile.t), gamma, bounds))
}

fn damped_from(dev: &Deviations, alpha: &Field, e2: f64, y: f64, gamma: f64, bounds: &AlphaBounds) -> DampedQuantities {
    let h = dev.h;
    let sq = |x: &[f64]| trapezoid_map(x, h, |_, v| v * v);
    let vx2 = sq(&dev.v_x);
    let ux2 = sq(&dev.u_x);
    let cross = trapezoid_map(&dev.u, h, |i, ut| alpha.values[i].powf(gamma - 1.0) * ut * dev.v_x[i]);
    let h_val = vx2 / (2.0 * gamma) - cross;

    let nonlinear = if gamma <= 4.0 {
        trapezoid_map(&dev.u, h, |i, ut| {
            let p = ut * dev.u_x[i];
            p * p
        })
    } else {
        trapezoid_map(&dev.u, h, |i, ut| ut.abs().powf(gamma - 1.0) * dev.u_x[i] * dev.u_x[i])
    };
    let j = nonlinear + ux2 + y;

    let chi = k_entropy_weight(gamma, bounds);
    let k = 2.0 * chi * e2 + h_val + chi * sq(&dev.v) + bounds.lower.powf(gamma) / (4.0 * bounds.upper * bounds.upper) * ux2;
    DampedQuantities { h: h_val, j, k }
}

/// Mean of `v - Ψ` over the domain under [`mass`], the quadrature the
/// hyperbolic update conserves exactly.
pub fn vtilde_mass(v: &Field, psi: f64) -> f64 {
    let shifted: Vec<f64> = v.values.iter().map(|x| x - psi).collect();
    mass(&shifted, v.grid.h) / v.grid.length()
}

/// Plain trapezoid integral of a field.
pub fn integral(f: &Field) -> f64 {
    trapezoid(&f.values, f.grid.h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SpatialGrid;
    use std::f64::consts::{E, PI};

    fn unit(n: usize) -> SpatialGrid {
        SpatialGrid::new(0.0, 1.0, n).unwrap()
    }

    fn profile(alpha: Field, beta: Option<Field>, psi: Option<f64>) -> ReferenceProfileSample {
        ReferenceProfileSample { t: 0.0, alpha, beta, psi }
    }

    #[test]
    fn e1_vanishes_on_profile() {
        let g = unit(21);
        let a = Field::from_fn(g, |x| 1.0 + x);
        assert!(entropy_e1(&a, &a).unwrap().abs() < 1e-15);
    }

    #[test]
    fn e1_constant_integrand() {
        let g = unit(11);
        let e = entropy_e1(&Field::constant(g, E), &Field::constant(g, 1.0)).unwrap();
        assert!((e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn e1_rejects_non_positive() {
        let g = unit(5);
        let mut u = Field::constant(g, 1.0);
        u.values[2] = -0.1;
        assert!(matches!(entropy_e1(&u, &Field::constant(g, 1.0)), Err(Error::NonPositiveInput { index: 2, .. })));
    }

    #[test]
    fn e2_square_identity() {
        let g = unit(11);
        let a = Field::from_fn(g, |x| 1.0 + 0.5 * x);
        assert!(entropy_e2(&a, &a, 3.0).unwrap().abs() < 1e-15);
        let u = Field::from_fn(g, |x| 2.0 + 0.5 * x);
        assert!((entropy_e2(&u, &a, 2.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(entropy_e2(&u, &a, 1.0), Err(Error::InvalidGamma { .. })));
    }

    #[test]
    fn sine_deviation_norms() {
        let g = unit(401);
        let u = Field::from_fn(g, |x| 1.0 + (PI * x).sin());
        let s = State::new(0.0, u, Field::constant(g, 0.0)).unwrap();
        let p = profile(Field::constant(g, 1.0), Some(Field::constant(g, 0.0)), None);
        let dev = Deviations::new(&s, &p).unwrap();
        let n = dev.norms();
        assert!((n.l2_u - 0.5f64.sqrt()).abs() <= 1e-3);
        let ux = (n.h1_u * n.h1_u - n.l2_u * n.l2_u).sqrt();
        assert!((ux - PI / 2.0f64.sqrt()).abs() <= 1e-2);
        assert_eq!(n.l2_v, 0.0);
    }

    #[test]
    fn equilibrium_norms_vanish() {
        let g = unit(11);
        let s = State::new(0.0, Field::constant(g, 1.0), Field::constant(g, 0.0)).unwrap();
        let p = profile(Field::constant(g, 1.0), Some(Field::constant(g, 0.0)), None);
        let n = deviation_norms(&s, &p).unwrap();
        assert_eq!((n.l2_u, n.h1_u, n.l2_v, n.h1_v), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn hyperbolic_constant_vtilde_is_zero() {
        let g = unit(11);
        let s = State::new(0.0, Field::constant(g, 1.0), Field::constant(g, 0.7)).unwrap();
        let p = profile(Field::constant(g, 1.0), None, Some(0.7));
        assert_eq!(deviation_norms(&s, &p).unwrap().l2_v, 0.0);
    }

    #[test]
    fn grid_mismatch_detected() {
        let s = State::new(0.0, Field::constant(unit(11), 1.0), Field::constant(unit(11), 0.0)).unwrap();
        let p = profile(Field::constant(unit(12), 1.0), None, Some(0.0));
        assert!(matches!(deviation_norms(&s, &p), Err(Error::GridMismatch)));
    }

    #[test]
    fn sqrt_u_dissipation() {
        let g = unit(11);
        let s = State::new(0.0, Field::constant(g, 2.0), Field::constant(g, 0.0)).unwrap();
        let p = profile(Field::constant(g, 2.0), Some(Field::constant(g, 0.0)), None);
        assert_eq!(dissipation_terms(&s, &p, 1.0).unwrap().sqrt_u, 0.0);

        let g = unit(801);
        let s = State::new(0.0, Field::from_fn(g, |x| (2.0 * x).exp()), Field::constant(g, 0.0)).unwrap();
        let p = profile(Field::constant(g, 1.0), Some(Field::constant(g, 0.0)), None);
        let d = dissipation_terms(&s, &p, 1.0).unwrap();
        assert!((d.sqrt_u - (E * E - 1.0) / 2.0).abs() <= 1e-3, "{}", d.sqrt_u);
    }

    #[test]
    fn weighted_dissipation_unit_weight_at_gamma_two() {
        let g = unit(51);
        let s = State::new(0.0, Field::from_fn(g, |x| 1.0 + x * x), Field::constant(g, 0.0)).unwrap();
        let p = profile(Field::constant(g, 1.0), Some(Field::constant(g, 0.0)), None);
        let dev = Deviations::new(&s, &p).unwrap();
        let d = dissipation_terms(&s, &p, 2.0).unwrap();
        assert_eq!(d.weighted_u, trapezoid_map(&dev.u_x, g.h, |_, v| v * v));
    }

    #[test]
    fn damped_quantities_require_gamma_two() {
        let g = unit(11);
        let s = State::new(0.0, Field::constant(g, 1.0), Field::constant(g, 0.0)).unwrap();
        let p = profile(Field::constant(g, 1.0), None, Some(0.0));
        let b = AlphaBounds { lower: 1.0, upper: 1.0, alpha1_min: 1.0, alpha2_min: 1.0, horizon: 1.0, resolution: 0.1 };
        let eq = BoundaryData::equilibrium(false);
        assert!(matches!(damped_quantities(&s, &p, &eq, 1.5, &b), Err(Error::InvalidGamma { .. })));
        let d = damped_quantities(&s, &p, &eq, 2.0, &b).unwrap();
        assert_eq!((d.h, d.j, d.k), (0.0, 0.0, 0.0));
    }

    #[test]
    fn vtilde_mass_of_periodic_bump() {
        let g = unit(201);
        let v = Field::from_fn(g, |x| 0.3 + (2.0 * PI * x).sin());
        assert!(vtilde_mass(&v, 0.3).abs() <= 1e-10);
        assert_eq!(vtilde_mass(&Field::constant(g, 0.3), 0.3), 0.0);
    }
}
