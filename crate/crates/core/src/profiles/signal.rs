use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed-form boundary families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum AnalyticFamily {
    /// `value`
    Constant { value: f64 },
    /// `1 + c·e^{-λt}`
    OnePlusExpDecay { c: f64, lambda: f64 },
    /// `c·e^{-λt}`
    ExpDecay { c: f64, lambda: f64 },
    /// `c·e^{-λt}·cos(ωt)`
    DampedOscillation { c: f64, lambda: f64, omega: f64 },
    /// `1 + c/(1 + λt)`, a slowly decaying tail that is not integrable.
    OnePlusAlgebraicDecay { c: f64, lambda: f64 },
}

impl AnalyticFamily {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            AnalyticFamily::Constant { value } => value,
            AnalyticFamily::OnePlusExpDecay { c, lambda } => 1.0 + c * (-lambda * t).exp(),
            AnalyticFamily::ExpDecay { c, lambda } => c * (-lambda * t).exp(),
            AnalyticFamily::DampedOscillation { c, lambda, omega } => c * (-lambda * t).exp() * (omega * t).cos(),
            AnalyticFamily::OnePlusAlgebraicDecay { c, lambda } => 1.0 + c / (1.0 + lambda * t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            AnalyticFamily::Constant { .. } => 0.0,
            AnalyticFamily::OnePlusExpDecay { c, lambda } | AnalyticFamily::ExpDecay { c, lambda } => {
                -lambda * c * (-lambda * t).exp()
            }
            AnalyticFamily::DampedOscillation { c, lambda, omega } => {
                let e = c * (-lambda * t).exp();
                -e * (lambda * (omega * t).cos() + omega * (omega * t).sin())
            }
            AnalyticFamily::OnePlusAlgebraicDecay { c, lambda } => {
                let d = 1.0 + lambda * t;
                -c * lambda / (d * d)
            }
        }
    }

    fn params(&self) -> Vec<f64> {
        match *self {
            AnalyticFamily::Constant { value } => vec![value],
            AnalyticFamily::OnePlusExpDecay { c, lambda }
            | AnalyticFamily::ExpDecay { c, lambda }
            | AnalyticFamily::OnePlusAlgebraicDecay { c, lambda } => vec![c, lambda],
            AnalyticFamily::DampedOscillation { c, lambda, omega } => vec![c, lambda, omega],
        }
    }
}

/// Piecewise-linear signal through `(t, value)` samples. Outside the sample
/// range the signal is held constant with zero slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl Table {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() || times.len() < 2 {
            return Err(Error::InvalidParams("a tabulated signal needs at least two (t, value) rows".into()));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("tabulated signal contains non-finite entries".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParams("tabulated times must be strictly increasing".into()));
        }
        Ok(Table { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Index `k` with `t_k <= t < t_{k+1}`, or `None` outside the table.
    fn interval(&self, t: f64) -> Option<usize> {
        let last = self.times.len() - 1;
        if t < self.times[0] || t >= self.times[last] {
            return None;
        }
        Some(self.times.partition_point(|&s| s <= t) - 1)
    }

    fn slope(&self, k: usize) -> f64 {
        (self.values[k + 1] - self.values[k]) / (self.times[k + 1] - self.times[k])
    }

    pub fn value(&self, t: f64) -> f64 {
        match self.interval(t) {
            Some(k) => self.values[k] + (t - self.times[k]) * self.slope(k),
            None if t < self.times[0] => self.values[0],
            None => self.values[self.values.len() - 1],
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.interval(t).map_or(0.0, |k| self.slope(k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignalKind {
    Analytic,
    Tabulated,
}

/// A boundary value `t ↦ value(t)` together with its time derivative.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundarySignal {
    Analytic(AnalyticFamily),
    Tabulated(Table),
}

impl BoundarySignal {
    pub fn constant(value: f64) -> Self {
        BoundarySignal::Analytic(AnalyticFamily::Constant { value })
    }

    pub fn kind(&self) -> SignalKind {
        match self {
            BoundarySignal::Analytic(_) => SignalKind::Analytic,
            BoundarySignal::Tabulated(_) => SignalKind::Tabulated,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            BoundarySignal::Analytic(f) => f.value(t),
            BoundarySignal::Tabulated(tab) => tab.value(t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            BoundarySignal::Analytic(f) => f.derivative(t),
            BoundarySignal::Tabulated(tab) => tab.derivative(t),
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if let BoundarySignal::Analytic(f) = self {
            if f.params().iter().any(|p| !p.is_finite()) {
                return Err(Error::InvalidParams(format!("non-finite parameter in {f:?}")));
            }
        }
        Ok(())
    }
}

impl From<AnalyticFamily> for BoundarySignal {
    fn from(f: AnalyticFamily) -> Self {
        BoundarySignal::Analytic(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let fams = [
            AnalyticFamily::Constant { value: 2.0 },
            AnalyticFamily::OnePlusExpDecay { c: 0.5, lambda: 1.3 },
            AnalyticFamily::ExpDecay { c: -0.7, lambda: 0.4 },
            AnalyticFamily::DampedOscillation { c: 0.3, lambda: 0.2, omega: 5.0 },
            AnalyticFamily::OnePlusAlgebraicDecay { c: 1.0, lambda: 1.0 },
        ];
        let eps = 1e-6;
        for f in fams {
            for &t in &[0.0, 0.37, 2.5, 11.0] {
                let fd = (f.value(t + eps) - f.value(t - eps)) / (2.0 * eps);
                assert!((fd - f.derivative(t)).abs() < 1e-8, "{f:?} at {t}");
            }
        }
    }

    #[test]
    fn table_interpolates_with_interval_slope() {
        let tab = Table::new(vec![0.0, 1.0, 3.0], vec![1.0, 3.0, 2.0]).unwrap();
        assert_eq!(tab.value(0.5), 2.0);
        assert_eq!(tab.derivative(0.5), 2.0);
        assert_eq!(tab.value(2.0), 2.5);
        assert_eq!(tab.derivative(2.0), -0.5);
        // sample point uses the interval to its right
        assert_eq!(tab.derivative(1.0), -0.5);
        // held constant past the end
        assert_eq!(tab.value(10.0), 2.0);
        assert_eq!(tab.derivative(10.0), 0.0);
    }

    #[test]
    fn table_value_and_slope_are_consistent() {
        let tab = Table::new(vec![0.0, 0.5, 2.0, 2.25], vec![1.0, 1.4, 0.9, 1.0]).unwrap();
        for k in 0..3 {
            let (t0, t1) = (tab.times()[k], tab.times()[k + 1]);
            let mid = 0.5 * (t0 + t1);
            let fd = (tab.value(t1 - 1e-9) - tab.value(t0)) / (t1 - 1e-9 - t0);
            assert!((fd - tab.derivative(mid)).abs() < 1e-6);
        }
    }

    #[test]
    fn table_rejects_unsorted() {
        assert!(Table::new(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(Table::new(vec![0.0], vec![1.0]).is_err());
    }
}
