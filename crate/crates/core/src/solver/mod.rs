//! IMEX Euler method-of-lines steppers for both variants.
//!
//! Each step solves for the increment `δ = uⁿ⁺¹ - uⁿ` from
//! `(I - dt·Δ_h) δ = dt·[Δ_h uⁿ + explicit terms]` with Dirichlet rows set to
//! the boundary data at the new time. Written this way, a state whose
//! right-hand side vanishes is reproduced bit for bit. `u` is advanced
//! first; the `(u^γ)_x` term in the `v` update then uses the time-averaged
//! flux `½[(uⁿ)^γ + (uⁿ⁺¹)^γ]`.

mod mms;
mod run;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use mms::Manufactured;
pub use run::{simulate, DiagnosticsSink, NullSink, RunMetadata, RunResult, RunSpec, RunStatus};

use crate::error::{Error as CoreError, Result};
use crate::model::{Field, ModelParams, State, Variant};
use crate::profiles::{BoundaryData, PsiAccumulator};
use crate::stencil::{
    central_interior, conservative_divergence, forward_divergence, laplacian_interior, solve_tridiagonal, tridiagonal_residual,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Implicit diffusion, explicit transport and reaction.
    Imex,
    FullyExplicit,
}

/// Discretization of `(u^γ)_x` in the hyperbolic `v` equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HyperbolicFlux {
    /// Central interior, second-order one-sided at the endpoints. Conserves
    /// the `stencil::mass` of `v - Ψ` exactly.
    Central,
    /// First-order forward difference. Not mass-conserving.
    Upwind,
}

/// How `(u v)_x` is differenced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FluxForm {
    /// Central difference of the pointwise product.
    Conservative,
    /// `u_x v + u v_x` with central differences of each factor.
    ProductRule,
}

fn default_cfl() -> f64 {
    0.9
}
fn default_scheme() -> Scheme {
    Scheme::Imex
}
fn default_hyperbolic_flux() -> HyperbolicFlux {
    HyperbolicFlux::Central
}
fn default_flux_form() -> FluxForm {
    FluxForm::Conservative
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    /// A step fails with `PositivityLost` once `min u` drops to this value.
    #[serde(default)]
    pub positivity_floor: f64,
    #[serde(default = "default_hyperbolic_flux")]
    pub hyperbolic_flux: HyperbolicFlux,
    #[serde(default = "default_flux_form")]
    pub flux_form: FluxForm,
}

impl NumericsConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        NumericsConfig {
            dt,
            t_end,
            cfl_safety: default_cfl(),
            scheme: Scheme::Imex,
            positivity_floor: 0.0,
            hyperbolic_flux: HyperbolicFlux::Central,
            flux_form: FluxForm::Conservative,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CoreError::InvalidParams(m));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return bad(format!("t_end = {} must be positive", self.t_end));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad(format!("cfl_safety = {} must lie in (0, 1]", self.cfl_safety));
        }
        if !(self.positivity_floor >= 0.0) {
            return bad(format!("positivity_floor = {} must be non-negative", self.positivity_floor));
        }
        Ok(())
    }

    /// Number of fixed steps covering `[0, t_end]`; the last step may end
    /// slightly past `t_end` when `dt` does not divide it.
    pub fn steps(&self) -> usize {
        let ratio = self.t_end / self.dt;
        let rounded = ratio.round();
        if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
            rounded as usize
        } else {
            ratio.ceil() as usize
        }
    }

    /// Largest admissible step for `s`:
    /// `cfl_safety·min(h²/2 [explicit only], 1/(c/h + R))` where `c` bounds the
    /// transport speeds and `R = 1 + 2 max u` the reaction rate.
    pub fn stability_limit(&self, s: &State, params: &ModelParams) -> f64 {
        let h = s.grid().h;
        let advective = 1.0 / (max_speed(&s.u, &s.v, params) / h + reaction_rate(&s.u));
        let limit = match self.scheme {
            Scheme::Imex => advective,
            Scheme::FullyExplicit => advective.min(0.5 * h * h),
        };
        self.cfl_safety * limit
    }

    pub fn check_stability(&self, s: &State, params: &ModelParams) -> Result<f64> {
        let limit = self.stability_limit(s, params);
        if self.dt > limit {
            return Err(CoreError::StepTooLarge { dt: self.dt, limit });
        }
        Ok(limit)
    }
}

fn reaction_rate(u: &Field) -> f64 {
    1.0 + 2.0 * u.max().max(0.0)
}

/// Bound on the characteristic speeds of the transport part.
fn max_speed(u: &Field, v: &Field, params: &ModelParams) -> f64 {
    let g = params.gamma;
    let k = if params.variant.is_hyperbolic() { 1.0 } else { 3.0 };
    u.values
        .iter()
        .zip(&v.values)
        .map(|(&ui, &vi)| {
            let p = 4.0 * g * ui.max(0.0).powf(g);
            0.5 * (k * vi.abs() + (vi * vi + p).sqrt())
        })
        .fold(0.0, f64::max)
}

/// `dt·(c/h + R)`, plus `2dt/h²` in explicit mode.
fn cfl_number(s: &State, params: &ModelParams, cfg: &NumericsConfig) -> f64 {
    let h = s.grid().h;
    let adv = cfg.dt * (max_speed(&s.u, &s.v, params) / h + reaction_rate(&s.u));
    match cfg.scheme {
        Scheme::Imex => adv,
        Scheme::FullyExplicit => adv.max(2.0 * cfg.dt / (h * h)),
    }
}

/// Extra forcing `(S_u, S_v)` added to the right-hand sides, evaluated at
/// the old time level.
pub trait SourceTerm: Send + Sync {
    fn u_source(&self, x: f64, t: f64) -> f64;
    fn v_source(&self, x: f64, t: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub t_new: f64,
    pub max_u: f64,
    pub min_u: f64,
    pub cfl_used: f64,
    pub linear_solve_residual: f64,
}

/// A failed step. The offending state is attached for post-mortem output.
#[derive(Debug, Clone, Error)]
pub enum StepError {
    #[error("positivity lost at t = {}: min u = {}", .report.t_new, .report.min_u)]
    PositivityLost { state: Box<State>, report: StepReport },
    #[error("non-finite values at t = {}", .report.t_new)]
    StepUnstable { state: Box<State>, report: StepReport },
}

impl StepError {
    pub fn state(&self) -> &State {
        match self {
            StepError::PositivityLost { state, .. } | StepError::StepUnstable { state, .. } => state,
        }
    }

    pub fn report(&self) -> &StepReport {
        match self {
            StepError::PositivityLost { report, .. } | StepError::StepUnstable { report, .. } => report,
        }
    }
}

/// Everything a step reads besides the state.
#[derive(Clone, Copy)]
pub struct StepContext<'a> {
    pub bd: &'a BoundaryData,
    pub params: &'a ModelParams,
    pub cfg: &'a NumericsConfig,
    pub source: Option<&'a dyn SourceTerm>,
}

impl<'a> StepContext<'a> {
    pub fn new(bd: &'a BoundaryData, params: &'a ModelParams, cfg: &'a NumericsConfig) -> Self {
        StepContext { bd, params, cfg, source: None }
    }

    pub fn with_source(mut self, source: &'a dyn SourceTerm) -> Self {
        self.source = Some(source);
        self
    }
}

#[inline]
fn pow_gamma(x: f64, g: f64) -> f64 {
    if g == 1.0 {
        x
    } else if g == 2.0 {
        x * x
    } else {
        x.powf(g)
    }
}

/// `½[(uⁿ)^γ + (uⁿ⁺¹)^γ]`
fn averaged_flux(old: &[f64], new: &[f64], g: f64) -> Vec<f64> {
    old.iter().zip(new).map(|(&a, &b)| 0.5 * (pow_gamma(a, g) + pow_gamma(b, g))).collect()
}

/// Solves `(I - dt·Δ_h)δ = rhs` with identity Dirichlet rows, or takes
/// `δ = rhs` in explicit mode. Returns the linear residual.
fn apply_diffusion(rhs: &mut [f64], dt: f64, h: f64, scheme: Scheme) -> f64 {
    if scheme == Scheme::FullyExplicit {
        return 0.0;
    }
    let n = rhs.len();
    let r = dt / (h * h);
    let mut lower = vec![-r; n];
    let mut diag = vec![1.0 + 2.0 * r; n];
    let mut upper = vec![-r; n];
    lower[0] = 0.0;
    upper[0] = 0.0;
    diag[0] = 1.0;
    lower[n - 1] = 0.0;
    upper[n - 1] = 0.0;
    diag[n - 1] = 1.0;
    let original = rhs.to_vec();
    let mut scratch = vec![0.0; n];
    solve_tridiagonal(&lower, &diag, &upper, rhs, &mut scratch);
    tridiagonal_residual(&lower, &diag, &upper, rhs, &original)
}

fn source_values(ctx: &StepContext<'_>, s: &State, pick_u: bool) -> Option<Vec<f64>> {
    let src = ctx.source?;
    let g = s.grid();
    Some(
        (0..g.n)
            .map(|i| {
                let x = g.x(i);
                if pick_u {
                    src.u_source(x, s.t)
                } else {
                    src.v_source(x, s.t)
                }
            })
            .collect(),
    )
}

/// Advances `u` one step. Shared by both variants.
fn advance_u(s: &State, ctx: &StepContext<'_>, t_new: f64) -> (Vec<f64>, f64) {
    let g = s.grid();
    let (n, h, dt) = (g.n, g.h, ctx.cfg.dt);
    let u = &s.u.values;
    let v = &s.v.values;

    let mut lap = vec![0.0; n];
    laplacian_interior(u, h, &mut lap);
    let mut transport = vec![0.0; n];
    match ctx.cfg.flux_form {
        FluxForm::Conservative => {
            let uv: Vec<f64> = u.iter().zip(v).map(|(a, b)| a * b).collect();
            central_interior(&uv, h, &mut transport);
        }
        FluxForm::ProductRule => {
            let mut ux = vec![0.0; n];
            let mut vx = vec![0.0; n];
            central_interior(u, h, &mut ux);
            central_interior(v, h, &mut vx);
            for i in 1..n - 1 {
                transport[i] = ux[i] * v[i] + u[i] * vx[i];
            }
        }
    }
    let src = source_values(ctx, s, true);

    let mut rhs = vec![0.0; n];
    for i in 1..n - 1 {
        let mut f = lap[i] + transport[i] + u[i] * (1.0 - u[i]);
        if let Some(sv) = &src {
            f += sv[i];
        }
        rhs[i] = dt * f;
    }
    let left = ctx.bd.alpha1.value(t_new);
    let right = ctx.bd.alpha2.value(t_new);
    rhs[0] = left - u[0];
    rhs[n - 1] = right - u[n - 1];

    let residual = apply_diffusion(&mut rhs, dt, h, ctx.cfg.scheme);
    let mut u_new: Vec<f64> = u.iter().zip(&rhs).map(|(a, d)| a + d).collect();
    u_new[0] = left;
    u_new[n - 1] = right;
    (u_new, residual)
}

fn finish(
    s: &State,
    u_new: Vec<f64>,
    v_new: Vec<f64>,
    t_new: f64,
    cfl_used: f64,
    residual: f64,
    floor: f64,
) -> Result<(State, StepReport), StepError> {
    let grid = s.grid();
    let next = State { t: t_new, u: Field { grid, values: u_new }, v: Field { grid, values: v_new } };
    let report = StepReport { t_new, max_u: next.u.max(), min_u: next.u.min(), cfl_used, linear_solve_residual: residual };
    let finite = next.u.values.iter().chain(&next.v.values).all(|x| x.is_finite());
    if !finite {
        return Err(StepError::StepUnstable { state: Box::new(next), report });
    }
    if next.u.first_at_or_below(floor).is_some() {
        return Err(StepError::PositivityLost { state: Box::new(next), report });
    }
    Ok((next, report))
}

fn check_u(s: &State, u_new: &[f64], t_new: f64, cfl_used: f64, residual: f64, floor: f64) -> Result<(), StepError> {
    if u_new.iter().all(|x| x.is_finite() && *x > floor) {
        return Ok(());
    }
    // v is left at the old level; the step never got that far
    finish(s, u_new.to_vec(), s.v.values.clone(), t_new, cfl_used, residual, floor).map(|_| ())
}

/// One step of the parabolic-parabolic system
/// `u_t = u_xx + (uv)_x + u(1-u)`, `v_t = v_xx + (v²)_x + (u^γ)_x`
/// with Dirichlet data on both unknowns at `t + dt`.
pub fn step_pp(s: &State, ctx: &StepContext<'_>) -> Result<(State, StepReport), StepError> {
    debug_assert_eq!(ctx.params.variant, Variant::ParabolicParabolic);
    let g = s.grid();
    let (n, h, dt) = (g.n, g.h, ctx.cfg.dt);
    let t_new = s.t + dt;
    let cfl_used = cfl_number(s, ctx.params, ctx.cfg);
    let floor = ctx.cfg.positivity_floor;

    let (u_new, res_u) = advance_u(s, ctx, t_new);
    check_u(s, &u_new, t_new, cfl_used, res_u, floor)?;

    let v = &s.v.values;
    let mut lap = vec![0.0; n];
    laplacian_interior(v, h, &mut lap);
    let mut dv2 = vec![0.0; n];
    match ctx.cfg.flux_form {
        FluxForm::Conservative => {
            let v2: Vec<f64> = v.iter().map(|x| x * x).collect();
            central_interior(&v2, h, &mut dv2);
        }
        FluxForm::ProductRule => {
            let mut vx = vec![0.0; n];
            central_interior(v, h, &mut vx);
            for i in 1..n - 1 {
                dv2[i] = 2.0 * v[i] * vx[i];
            }
        }
    }
    let flux = averaged_flux(&s.u.values, &u_new, ctx.params.gamma);
    let mut dflux = vec![0.0; n];
    central_interior(&flux, h, &mut dflux);
    let src = source_values(ctx, s, false);

    let mut rhs = vec![0.0; n];
    for i in 1..n - 1 {
        let mut f = lap[i] + dv2[i] + dflux[i];
        if let Some(sv) = &src {
            f += sv[i];
        }
        rhs[i] = dt * f;
    }
    let (b1, b2) = ctx.bd.beta.as_ref().expect("beta checked before stepping");
    let left = b1.value(t_new);
    let right = b2.value(t_new);
    rhs[0] = left - v[0];
    rhs[n - 1] = right - v[n - 1];
    let res_v = apply_diffusion(&mut rhs, dt, h, ctx.cfg.scheme);
    let mut v_new: Vec<f64> = v.iter().zip(&rhs).map(|(a, d)| a + d).collect();
    v_new[0] = left;
    v_new[n - 1] = right;

    finish(s, u_new, v_new, t_new, cfl_used, res_u.max(res_v), floor)
}

/// Explicit update `v + dt·D(flux)` of the hyperbolic equation
/// `v_t = (u^γ)_x`, with no boundary condition on `v`.
pub fn hyperbolic_v_update(v: &[f64], flux: &[f64], dt: f64, h: f64, scheme: HyperbolicFlux) -> Vec<f64> {
    let mut d = vec![0.0; v.len()];
    match scheme {
        HyperbolicFlux::Central => conservative_divergence(flux, h, &mut d),
        HyperbolicFlux::Upwind => forward_divergence(flux, h, &mut d),
    }
    v.iter().zip(&d).map(|(a, b)| a + dt * b).collect()
}

/// One step of the parabolic-hyperbolic system: `u` as in [`step_pp`] with
/// Dirichlet data, `v_t = (u^γ)_x` explicitly. `psi` receives the matching
/// trapezoid increment of the boundary flux.
pub fn step_ph(s: &State, psi: &mut PsiAccumulator, ctx: &StepContext<'_>) -> Result<(State, StepReport), StepError> {
    debug_assert_eq!(ctx.params.variant, Variant::ParabolicHyperbolic);
    let g = s.grid();
    let (h, dt) = (g.h, ctx.cfg.dt);
    let t_new = s.t + dt;
    let cfl_used = cfl_number(s, ctx.params, ctx.cfg);
    let floor = ctx.cfg.positivity_floor;

    let (u_new, res_u) = advance_u(s, ctx, t_new);
    check_u(s, &u_new, t_new, cfl_used, res_u, floor)?;

    let flux = averaged_flux(&s.u.values, &u_new, ctx.params.gamma);
    let mut v_new = hyperbolic_v_update(&s.v.values, &flux, dt, h, ctx.cfg.hyperbolic_flux);
    if let Some(src) = source_values(ctx, s, false) {
        for (v, sv) in v_new.iter_mut().zip(src) {
            *v += dt * sv;
        }
    }
    let out = finish(s, u_new, v_new, t_new, cfl_used, res_u, floor)?;
    psi.advance(ctx.bd, dt);
    Ok(out)
}
