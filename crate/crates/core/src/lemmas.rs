//! Residuals of the elementary power inequalities used by the energy
//! estimates, plus a seeded fuzzer.
//!
//! Each `ineq_t*` returns `rhs - lhs`, which is non-negative whenever the
//! inequality holds.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `ρ` and `s` the fuzzer draws.
pub const RHO_CAP: f64 = 1e6;
pub const S_CAP: f64 = 64.0;
/// Absolute residual floor below `ρ = 10³`.
pub const RESIDUAL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InequalityResidual {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub rho: f64,
    pub s: f64,
}

impl InequalityResidual {
    fn new(lhs: f64, rhs: f64, rho: f64, s: f64) -> Self {
        Self { lhs, rhs, residual: rhs - lhs, rho, s }
    }

    pub fn holds(&self) -> bool {
        self.residual >= -residual_tolerance(self.rho, self.s)
    }
}

/// Rounding allowance for a residual evaluated at `(ρ, s)`.
pub fn residual_tolerance(rho: f64, s: f64) -> f64 {
    if rho <= 1e3 {
        RESIDUAL_FLOOR
    } else {
        RESIDUAL_FLOOR.max(rho.powf(s) * 1e-15)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LemmaId {
    T1,
    T2,
    T3,
    T4,
    T5,
}

impl LemmaId {
    pub const ALL: [LemmaId; 5] = [LemmaId::T1, LemmaId::T2, LemmaId::T3, LemmaId::T4, LemmaId::T5];

    pub fn name(self) -> &'static str {
        match self {
            LemmaId::T1 => "T1",
            LemmaId::T2 => "T2",
            LemmaId::T3 => "T3",
            LemmaId::T4 => "T4",
            LemmaId::T5 => "T5",
        }
    }

    /// Closed `s` range sampled by the fuzzer. T2 excludes `s = 1`.
    pub fn s_range(self) -> (f64, f64) {
        match self {
            LemmaId::T1 | LemmaId::T3 => (2.0, S_CAP),
            LemmaId::T2 => (1.0, 2.0),
            LemmaId::T4 => (1.0, S_CAP),
            LemmaId::T5 => (0.0, 1.0),
        }
    }

    pub fn eval(self, rho: f64, s: f64) -> Result<InequalityResidual> {
        match self {
            LemmaId::T1 => ineq_t1(rho, s),
            LemmaId::T2 => ineq_t2(rho, s),
            LemmaId::T3 => ineq_t3(rho, s),
            LemmaId::T4 => ineq_t4(rho, s),
            LemmaId::T5 => ineq_t5(rho, s),
        }
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LemmaId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "T1" => Ok(LemmaId::T1),
            "T2" => Ok(LemmaId::T2),
            "T3" => Ok(LemmaId::T3),
            "T4" => Ok(LemmaId::T4),
            "T5" => Ok(LemmaId::T5),
            _ => Err(Error::InvalidParams(format!("unknown lemma {s:?}"))),
        }
    }
}

fn check(lemma: &'static str, rho: f64, s: f64, ok: bool) -> Result<()> {
    if ok && rho >= 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::DomainError { lemma, rho, s })
    }
}

/// `ρ^s − 1 − s(ρ − 1)`; `powf` already gives `0^s = 0` for `s > 0`.
fn bregman(rho: f64, s: f64) -> f64 {
    rho.powf(s) - 1.0 - s * (rho - 1.0)
}

/// `(ρ−1)² ≤ ρ^s − 1 − s(ρ−1)` for `s ≥ 2`.
pub fn ineq_t1(rho: f64, s: f64) -> Result<InequalityResidual> {
    check("T1", rho, s, s >= 2.0)?;
    let d = rho - 1.0;
    Ok(InequalityResidual::new(d * d, bregman(rho, s), rho, s))
}

/// Minimizer of `ρ^s − sρ − ρ` over `ρ ≥ 0`.
pub fn t2_rho_star(s: f64) -> f64 {
    (1.0 + 1.0 / s).powf(1.0 / (s - 1.0))
}

/// `ρ − 1 ≤ ρ^s − 1 − s(ρ−1) + (s−1)(1 + 1/s)^{s/(s−1)} − s` for `1 < s ≤ 2`.
pub fn ineq_t2(rho: f64, s: f64) -> Result<InequalityResidual> {
    check("T2", rho, s, s > 1.0 && s <= 2.0)?;
    let shift = (s - 1.0) * (1.0 + 1.0 / s).powf(s / (s - 1.0)) - s;
    Ok(InequalityResidual::new(rho - 1.0, bregman(rho, s) + shift, rho, s))
}

/// `|ρ−1|^s ≤ ρ^s − 1 − s(ρ−1)` for `s ≥ 2`.
pub fn ineq_t3(rho: f64, s: f64) -> Result<InequalityResidual> {
    check("T3", rho, s, s >= 2.0)?;
    Ok(InequalityResidual::new((rho - 1.0).abs().powf(s), bregman(rho, s), rho, s))
}

/// `s(ρ−1) ≤ ρ^s − 1` for `s ≥ 1`.
pub fn ineq_t4(rho: f64, s: f64) -> Result<InequalityResidual> {
    check("T4", rho, s, s >= 1.0)?;
    Ok(InequalityResidual::new(s * (rho - 1.0), rho.powf(s) - 1.0, rho, s))
}

/// `|ρ^s − 1| ≤ |ρ−1|` for `0 ≤ s ≤ 1`.
pub fn ineq_t5(rho: f64, s: f64) -> Result<InequalityResidual> {
    check("T5", rho, s, (0.0..=1.0).contains(&s))?;
    Ok(InequalityResidual::new((rho.powf(s) - 1.0).abs(), (rho - 1.0).abs(), rho, s))
}

/// Pointwise form of the mass bound `u ≤ φ(u, α) + (e−1)α`, where `φ` is the
/// `E₁` integrand. Returns the residual `φ + (e−1)α − u`.
pub fn mass_bound_pointwise(u: f64, alpha: f64) -> Result<f64> {
    if !(u > 0.0 && alpha > 0.0) {
        return Err(Error::NonPositiveInput { index: 0, value: u.min(alpha) });
    }
    let la = alpha.ln();
    let phi = (u * u.ln() - u) - (alpha * la - alpha) - la * (u - alpha);
    Ok(phi + (std::f64::consts::E - 1.0) * alpha - u)
}

/// Pointwise form of `2·(E₂ integrand) ≥ γ α̲^{γ−2}/(γ−1) · (u−α)²` for
/// `γ ≥ 2`, `u ≥ 0`, `α ≥ α̲ > 0`. Returns `rhs − lhs` of that inequality
/// read left to right as "bound ≤ entropy".
pub fn quadratic_entropy_bound_pointwise(u: f64, alpha: f64, gamma: f64, alpha_low: f64) -> Result<f64> {
    if gamma < 2.0 {
        return Err(Error::InvalidGamma { gamma, expected: ">= 2" });
    }
    if !(u >= 0.0 && alpha > 0.0 && alpha_low > 0.0 && alpha_low <= alpha) {
        return Err(Error::InvalidParams(format!(
            "need u >= 0 and 0 < alpha_low <= alpha, got u={u}, alpha={alpha}, alpha_low={alpha_low}"
        )));
    }
    let d = u - alpha;
    let e2 = (u.powf(gamma) - alpha.powf(gamma) - gamma * alpha.powf(gamma - 1.0) * d) / (gamma - 1.0);
    let bound = gamma * alpha_low.powf(gamma - 2.0) / (gamma - 1.0) * d * d;
    Ok(2.0 * e2 - bound)
}

/// A known equality point and its evaluated residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub locus: &'static str,
    pub at: InequalityResidual,
    pub tolerance: f64,
    pub found: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuzzReport {
    pub lemma: LemmaId,
    pub samples: usize,
    pub seed: u64,
    pub rho_max: f64,
    /// Smallest residual over all finite samples, with its location.
    pub min: InequalityResidual,
    /// Samples whose residual fell below the rounding allowance.
    pub violations: usize,
    /// Samples where a side overflowed; excluded from `min`.
    pub overflowed: usize,
    pub witnesses: Vec<Witness>,
}

impl FuzzReport {
    pub fn witnesses_found(&self) -> bool {
        self.witnesses.iter().all(|w| w.found)
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.witnesses_found()
    }
}

const SHARDS: u64 = 8;
const WITNESS_RHOS: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 10.0];

fn witness(lemma: LemmaId, locus: &'static str, rho: f64, s: f64) -> Witness {
    let at = lemma.eval(rho, s).expect("witness inside domain");
    let tolerance = RESIDUAL_FLOOR * (1.0 + at.rhs.abs());
    Witness { locus, at, tolerance, found: at.residual.abs() <= tolerance }
}

/// Equality loci of each lemma. `ρ = 1` is not an equality point of T2,
/// whose residual there is `(s−1)(1+1/s)^{s/(s−1)} − s > 0`; its locus is `ρ*`.
pub fn equality_witnesses(lemma: LemmaId) -> Vec<Witness> {
    let mut out = Vec::new();
    match lemma {
        LemmaId::T1 | LemmaId::T3 => {
            for s in [2.0, 3.0, 7.5, S_CAP] {
                out.push(witness(lemma, "rho=1", 1.0, s));
            }
            for rho in WITNESS_RHOS {
                out.push(witness(lemma, "s=2", rho, 2.0));
            }
        }
        LemmaId::T2 => {
            for s in [1.25, 1.5, 1.75, 2.0] {
                out.push(witness(lemma, "rho=rho*", t2_rho_star(s), s));
            }
        }
        LemmaId::T4 | LemmaId::T5 => {
            let ss: &[f64] = if lemma == LemmaId::T4 { &[1.0, 2.0, 9.0] } else { &[0.0, 0.5, 1.0] };
            for &s in ss {
                out.push(witness(lemma, "rho=1", 1.0, s));
            }
            for rho in WITNESS_RHOS {
                out.push(witness(lemma, "s=1", rho, 1.0));
            }
        }
    }
    out
}

struct Shard {
    min: Option<InequalityResidual>,
    violations: usize,
    overflowed: usize,
}

fn draw(rng: &mut ChaCha8Rng, lemma: LemmaId, rho_max: f64, log_grid: bool) -> (f64, f64) {
    let lo_rho = 1e-6f64;
    let rho =
        if log_grid { (lo_rho.ln() + rng.gen::<f64>() * (rho_max.ln() - lo_rho.ln())).exp() } else { rng.gen::<f64>() * rho_max };
    let (a, b) = lemma.s_range();
    let mut s = a + rng.gen::<f64>() * (b - a);
    if lemma == LemmaId::T2 && s <= 1.0 {
        s = 2.0;
    }
    (rho, s)
}

fn run_shard(lemma: LemmaId, count: usize, seed: u64, rho_max: f64, log_grid: bool, with_zero: bool) -> Shard {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut shard = Shard { min: None, violations: 0, overflowed: 0 };
    for k in 0..count {
        let (mut rho, s) = draw(&mut rng, lemma, rho_max, log_grid);
        if with_zero && k == 0 {
            rho = 0.0;
        }
        let r = lemma.eval(rho, s).expect("sample inside domain");
        if !(r.lhs.is_finite() && r.rhs.is_finite()) {
            shard.overflowed += 1;
            continue;
        }
        if !r.holds() {
            shard.violations += 1;
        }
        if shard.min.is_none_or(|m| r.residual < m.residual) {
            shard.min = Some(r);
        }
    }
    shard
}

/// Evaluates a lemma on `samples` seeded draws. Work is split over a fixed
/// number of shards with derived seeds, so the report does not depend on
/// the thread count.
pub fn fuzz_lemma(lemma: LemmaId, samples: usize, seed: u64, rho_max: f64, log_grid: bool) -> Result<FuzzReport> {
    if samples == 0 {
        return Err(Error::InvalidParams("samples must be >= 1".into()));
    }
    if !(rho_max > 1e-6 && rho_max <= RHO_CAP) {
        return Err(Error::InvalidParams(format!("rho_max must lie in (1e-6, {RHO_CAP}], got {rho_max}")));
    }
    let per = samples.div_ceil(SHARDS as usize);
    let shards: Vec<Shard> = (0..SHARDS)
        .into_par_iter()
        .map(|k| {
            let start = k as usize * per;
            let count = per.min(samples.saturating_sub(start));
            let shard_seed = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k);
            run_shard(lemma, count, shard_seed, rho_max, log_grid, k == 0)
        })
        .collect();

    let mut min: Option<InequalityResidual> = None;
    let (mut violations, mut overflowed) = (0, 0);
    for sh in shards {
        violations += sh.violations;
        overflowed += sh.overflowed;
        if let Some(m) = sh.min {
            if min.is_none_or(|cur| m.residual < cur.residual) {
                min = Some(m);
            }
        }
    }
    let min = min.ok_or_else(|| Error::Precondition("every sample overflowed".into()))?;
    Ok(FuzzReport { lemma, samples, seed, rho_max, min, violations, overflowed, witnesses: equality_witnesses(lemma) })
}

/// Runs every lemma with the default fuzz domain.
pub fn verify_all(samples: usize, seed: u64) -> Result<Vec<FuzzReport>> {
    LemmaId::ALL.iter().enumerate().map(|(i, &l)| fuzz_lemma(l, samples, seed.wrapping_add(i as u64), 1e3, true)).collect()
}
