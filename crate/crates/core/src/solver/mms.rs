use std::f64::consts::PI;

use super::SourceTerm;
use crate::model::{Field, Interval, SpatialGrid, State, Variant};
use crate::profiles::BoundaryData;

/// Smooth exact solution
/// `u* = 1 + ½e^{-t} sin(πx̂)`, `v* = ½e^{-t} x̂(1 - x̂)`, `x̂ = (x-a)/(b-a)`,
/// and the source terms that make it solve the forced system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Manufactured {
    pub domain: Interval,
    pub gamma: f64,
    pub variant: Variant,
}

struct Point {
    u: f64,
    u_t: f64,
    u_x: f64,
    u_xx: f64,
    v: f64,
    v_t: f64,
    v_x: f64,
    v_xx: f64,
}

impl Manufactured {
    pub fn new(domain: Interval, gamma: f64, variant: Variant) -> Self {
        Manufactured { domain, gamma, variant }
    }

    fn point(&self, x: f64, t: f64) -> Point {
        let l = self.domain.length();
        let xh = (x - self.domain.a) / l;
        let e = 0.5 * (-t).exp();
        let (sn, cs) = (PI * xh).sin_cos();
        let p = xh * (1.0 - xh);
        Point {
            u: 1.0 + e * sn,
            u_t: -e * sn,
            u_x: e * PI * cs / l,
            u_xx: -e * PI * PI * sn / (l * l),
            v: e * p,
            v_t: -e * p,
            v_x: e * (1.0 - 2.0 * xh) / l,
            v_xx: -2.0 * e / (l * l),
        }
    }

    pub fn u(&self, x: f64, t: f64) -> f64 {
        self.point(x, t).u
    }

    pub fn v(&self, x: f64, t: f64) -> f64 {
        self.point(x, t).v
    }

    pub fn state(&self, grid: SpatialGrid, t: f64) -> State {
        State { t, u: Field::from_fn(grid, |x| self.u(x, t)), v: Field::from_fn(grid, |x| self.v(x, t)) }
    }

    /// Exact boundary data: `u* = 1` and `v* = 0` at both ends for all `t`.
    pub fn boundary(&self) -> BoundaryData {
        BoundaryData::equilibrium(!self.variant.is_hyperbolic())
    }
}

impl SourceTerm for Manufactured {
    fn u_source(&self, x: f64, t: f64) -> f64 {
        let p = self.point(x, t);
        let uv_x = p.u_x * p.v + p.u * p.v_x;
        p.u_t - p.u_xx - uv_x - p.u * (1.0 - p.u)
    }

    fn v_source(&self, x: f64, t: f64) -> f64 {
        let p = self.point(x, t);
        let g = self.gamma;
        let ug_x = g * p.u.powf(g - 1.0) * p.u_x;
        match self.variant {
            Variant::ParabolicParabolic => p.v_t - p.v_xx - 2.0 * p.v * p.v_x - ug_x,
            Variant::ParabolicHyperbolic => p.v_t - ug_x,
        }
    }
}
