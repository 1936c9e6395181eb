//! Exact moments of the scaled statistic for the random component `X` and a
//! Monte Carlo harness that checks them.
//!
//! For `i < j` the difference `X_i - X_j` is uniform on the grid of `X_j`, so
//! each ordered-pair indicator is a Bernoulli variable with success
//! probability `gamma_k` where `j ∈ I_k`. Summing gives
//!
//! ```text
//! E[F]   = (2/N)   * sum_{j=2..N} (j-1) * gamma_k(j)
//! Var[F] = (4/N^2) * sum_{j=2..N} (j-1) * gamma_k(j) * (1 - gamma_k(j))
//! ```
//!
//! The variance treats the pair indicators as uncorrelated. That is exact for
//! `N = 2`; for larger `N` the indicators `1{|X_i - X_j| <= r}` and
//! `1{|X_l - X_j| <= r}` with `i, l < j` on grids coarser than the window are
//! slightly positively correlated, which the Monte Carlo check absorbs.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::construction::ConstructionConfig;
use crate::error::{Error, Result};
use crate::generators::RngState;
use crate::pair_correlation::{pair_count_fast, Predicate, Radius, ScalingKind};
use crate::rational;
use crate::torus::{DyadicPoint, SequenceRecord, MAX_EXP};

/// The level `m` with `j ∈ I_m = (2^(m-1), 2^m]`; `I_0 = {1}`.
pub fn block_index(j: u64) -> usize {
    assert!(j >= 1, "indices start at 1");
    if j == 1 {
        0
    } else {
        (j - 1).ilog2() as usize + 1
    }
}

/// `sum (j - 1)` over `j ∈ I_k` with `2 <= j <= n`.
pub(crate) fn index_weight(k: usize, n: u64) -> BigInt {
    if k == 0 {
        return BigInt::zero();
    }
    let lo = (1u64 << (k - 1)) + 1;
    let hi = (1u64 << k).min(n);
    if hi < lo {
        return BigInt::zero();
    }
    // sum of t for t = lo-1 ..= hi-1
    let (a, b) = (BigInt::from(lo - 1), BigInt::from(hi - 1));
    (&a + &b) * (&b - &a + 1) / 2
}

/// Probability that a uniform point of the grid `2^-(k + a_k)` lies within
/// torus distance `s / y_N` of 0: `min(1, (2 floor(2^(k+a_k) s / y_N) + 1) / 2^(k+a_k))`.
pub fn gamma_k(k: usize, a_k: u32, s: f64, y_n: &BigRational) -> Result<BigRational> {
    if k == 0 {
        return Err(Error::Range("gamma_k is defined for k >= 1".into()));
    }
    let e = k as u64 + a_k as u64;
    if e > MAX_EXP as u64 {
        return Err(Error::Range(format!(
            "grid exponent k + a(k) = {e} exceeds {MAX_EXP}"
        )));
    }
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::Range(format!(
            "s = {s} must be finite and nonnegative"
        )));
    }
    let e = e as u32;
    let size = rational::pow2(e);
    let r = rational::from_f64(s)? / y_n;
    let hits: BigInt = rational::floor(&(r * BigRational::from_integer(size.clone()))) * 2 + 1;
    let hits = hits.min(size.clone());
    Ok(BigRational::new(hits, size))
}

fn moment_terms(
    n: u64,
    s: f64,
    c: &ConstructionConfig,
    scaling: &ScalingKind,
) -> Result<Vec<(BigInt, BigRational)>> {
    if n == 0 {
        return Err(Error::Range("N must be >= 1".into()));
    }
    let top = block_index(n);
    if top > c.m_max() {
        return Err(Error::Range(format!(
            "N = {n} needs a({top}) but the schedule stops at m = {}",
            c.m_max()
        )));
    }
    let y = scaling.value(n as usize)?.exact;
    (1..=top)
        .map(|k| Ok((index_weight(k, n), gamma_k(k, c.a(k).unwrap(), s, &y)?)))
        .collect()
}

/// Exact `E[F~(s)]` for the random component `X_1..X_N`.
pub fn expected_f(
    n: u64,
    s: f64,
    c: &ConstructionConfig,
    scaling: &ScalingKind,
) -> Result<BigRational> {
    let sum = moment_terms(n, s, c, scaling)?
        .into_iter()
        .fold(BigRational::zero(), |acc, (w, g)| {
            acc + BigRational::from_integer(w) * g
        });
    Ok(sum * BigRational::new(BigInt::from(2), BigInt::from(n)))
}

/// Exact `Var[F~(s)]` under uncorrelated pair indicators (see module docs).
pub fn variance_f(
    n: u64,
    s: f64,
    c: &ConstructionConfig,
    scaling: &ScalingKind,
) -> Result<BigRational> {
    let sum =
        moment_terms(n, s, c, scaling)?
            .into_iter()
            .fold(BigRational::zero(), |acc, (w, g)| {
                let q = BigRational::one() - &g;
                acc + BigRational::from_integer(w) * g * q
            });
    let n2 = BigInt::from(n) * BigInt::from(n);
    Ok(sum * BigRational::new(BigInt::from(4), n2))
}

/// One realization of `X_1..X_N` (random component only, no deterministic blocks).
///
/// Draw `i` of the SplitMix64 stream feeds `X_i`; `X_1` consumes its draw and is 0.
pub fn random_component(n: usize, c: &ConstructionConfig, seed: u64) -> Result<SequenceRecord> {
    if n == 0 {
        return Err(Error::Range("N must be >= 1".into()));
    }
    let top = block_index(n as u64);
    if top > c.m_max() {
        return Err(Error::Range(format!(
            "N = {n} needs a({top}) but the schedule stops at m = {}",
            c.m_max()
        )));
    }
    let mut rng = RngState::new(seed);
    let mut points = Vec::with_capacity(n);
    for i in 1..=n as u64 {
        let draw = rng.next_u64();
        let p = if i == 1 {
            DyadicPoint::ZERO
        } else {
            let e = c.random_exp(block_index(i)).unwrap();
            if e > MAX_EXP {
                return Err(Error::Range(format!("grid exponent {e} exceeds {MAX_EXP}")));
            }
            DyadicPoint::new(draw & ((1u64 << e) - 1), e)?
        };
        points.push(p);
    }
    SequenceRecord::exact("random-component", Some(seed), points)
}

/// Exact moments, optionally with Monte Carlo estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub n: u64,
    pub s: f64,
    pub expectation: BigRational,
    pub variance: BigRational,
    pub mc: Option<McEstimate>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub samples: usize,
    pub seed: u64,
    pub mean: f64,
    /// Unbiased sample variance.
    pub var: f64,
    pub stderr: f64,
}

impl MomentReport {
    pub fn exact(n: u64, s: f64, c: &ConstructionConfig, scaling: &ScalingKind) -> Result<Self> {
        Ok(Self {
            n,
            s,
            expectation: expected_f(n, s, c, scaling)?,
            variance: variance_f(n, s, c, scaling)?,
            mc: None,
        })
    }

    pub fn expectation_f64(&self) -> f64 {
        rational::to_f64(&self.expectation)
    }

    pub fn variance_f64(&self) -> f64 {
        rational::to_f64(&self.variance)
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "N": self.n,
            "s": self.s,
            "expectation": {
                "exact": rational::fmt_scaled(&self.expectation, self.n),
                "value": self.expectation_f64(),
            },
            "variance": {
                "exact": rational::fmt_scaled(&self.variance, self.n),
                "value": self.variance_f64(),
            },
        });
        if let Some(mc) = &self.mc {
            v["mc"] = json!({
                "samples": mc.samples,
                "seed": mc.seed,
                "mean": mc.mean,
                "var": mc.var,
                "stderr": mc.stderr,
            });
        }
        v
    }
}

/// Draws `samples` independent realizations of the random component and
/// evaluates the non-strict scaled statistic on each. Sample `t` is seeded
/// with the `t`-th output of a SplitMix64 stream started at `seed`, so the
/// result does not depend on the degree of parallelism.
pub fn mc_moments(
    n: u64,
    s: f64,
    c: &ConstructionConfig,
    scaling: &ScalingKind,
    samples: usize,
    seed: u64,
) -> Result<MomentReport> {
    if samples < 2 {
        return Err(Error::Usage("Monte Carlo needs at least 2 samples".into()));
    }
    let mut report = MomentReport::exact(n, s, c, scaling)?;
    let radius = Radius::scaled(s, &scaling.value(n as usize)?)?;
    let seeds = RngState::task_seeds(seed, samples);
    let values: Vec<f64> = seeds
        .par_iter()
        .map(|&t| {
            let x = random_component(n as usize, c, t)?;
            let count = pair_count_fast(&x, n as usize, &radius, Predicate::NonStrict)?;
            Ok(count as f64 / n as f64)
        })
        .collect::<Result<_>>()?;
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    report.mc = Some(McEstimate {
        samples,
        seed,
        mean,
        var,
        stderr: (var / k).sqrt(),
    });
    Ok(report)
}
