use serde::{Deserialize, Serialize};

use super::Interval;
use crate::error::{Error, Result};

/// Uniform grid on `[a, b]` with `n` nodes including both endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    pub a: f64,
    pub b: f64,
    pub n: usize,
    pub h: f64,
}

impl SpatialGrid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        Interval::new(a, b)?;
        if n < 3 {
            return Err(Error::InvalidParams(format!("grid needs at least 3 nodes, got {n}")));
        }
        Ok(SpatialGrid { a, b, n, h: (b - a) / (n - 1) as f64 })
    }

    pub fn on(domain: Interval, n: usize) -> Result<Self> {
        Self::new(domain.a, domain.b, n)
    }

    pub fn domain(&self) -> Interval {
        Interval { a: self.a, b: self.b }
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Node `i`; the last node is exactly `b`.
    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.b
        } else {
            self.a + i as f64 * self.h
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Fraction `(x_i - a)/(b - a)`, exactly 0 and 1 at the endpoints.
    pub fn unit_coordinate(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            1.0
        } else {
            i as f64 / (self.n - 1) as f64
        }
    }
}

/// Grid-sampled scalar field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub grid: SpatialGrid,
    pub values: Vec<f64>,
}

impl Field {
    pub fn new(grid: SpatialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::InvalidParams(format!("field has {} values for a grid of {} nodes", values.len(), grid.n)));
        }
        Ok(Field { grid, values })
    }

    pub fn from_fn(grid: SpatialGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.n).map(|i| f(grid.x(i))).collect();
        Field { grid, values }
    }

    pub fn constant(grid: SpatialGrid, value: f64) -> Self {
        Field { grid, values: vec![value; grid.n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// First node whose value is `<= floor`, if any.
    pub fn first_at_or_below(&self, floor: f64) -> Option<(usize, f64)> {
        self.values.iter().copied().enumerate().find(|&(_, v)| !(v > floor))
    }

    pub fn same_grid(&self, other: &Field) -> bool {
        self.grid == other.grid
    }
}

/// Solution snapshot `(u, v)` at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    pub u: Field,
    pub v: Field,
}

impl State {
    pub fn new(t: f64, u: Field, v: Field) -> Result<Self> {
        if !u.same_grid(&v) {
            return Err(Error::GridMismatch);
        }
        if !(t >= 0.0) {
            return Err(Error::InvalidParams(format!("time {t} must be non-negative")));
        }
        Ok(State { t, u, v })
    }

    pub fn grid(&self) -> SpatialGrid {
        self.u.grid
    }
}
