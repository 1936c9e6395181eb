//! Gap profiles: the distinct circular gap lengths of a prefix and their multiplicities.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::torus::{Points, SequenceRecord};

/// Default grouping tolerance for binary64 gaps.
pub const DEFAULT_TOL: f64 = 1e-12;

/// A dyadic gap length `num / 2^exp` in `[0, 1]`, reduced. The full circle is `1/2^0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DyadicLength {
    num: u64,
    exp: u32,
}

impl DyadicLength {
    fn reduce(num: u64, exp: u32) -> Self {
        if num == 0 {
            return Self { num: 0, exp: 0 };
        }
        let tz = num.trailing_zeros().min(exp);
        Self {
            num: num >> tz,
            exp: exp - tz,
        }
    }

    pub fn num(self) -> u64 {
        self.num
    }

    pub fn exp(self) -> u32 {
        self.exp
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / (1u64 << self.exp) as f64
    }
}

impl fmt::Display for DyadicLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GapLengths {
    Exact(Vec<DyadicLength>),
    /// Group means of tolerance-chained binary64 gaps.
    Approx(Vec<f64>),
}

impl GapLengths {
    pub fn len(&self) -> usize {
        match self {
            GapLengths::Exact(v) => v.len(),
            GapLengths::Approx(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            GapLengths::Exact(v) => v.iter().map(|l| l.to_f64()).collect(),
            GapLengths::Approx(v) => v.clone(),
        }
    }
}

/// Distinct gap lengths `l_1 < ... < l_g` of `x_1..x_N` with multiplicities.
#[derive(Clone, Debug, PartialEq)]
pub struct GapProfile {
    pub n: usize,
    pub lengths: GapLengths,
    pub multiplicities: Vec<u64>,
}

impl GapProfile {
    /// Number of distinct gap lengths.
    pub fn g(&self) -> usize {
        self.multiplicities.len()
    }

    pub fn max_multiplicity(&self) -> u64 {
        self.multiplicities.iter().copied().max().unwrap_or(0)
    }

    pub fn max_ratio(&self) -> f64 {
        self.max_multiplicity() as f64 / self.n as f64
    }

    pub fn multiplicity_sum(&self) -> u64 {
        self.multiplicities.iter().sum()
    }

    /// `sum_i l_i * phi_i` in binary64.
    pub fn weighted_length_sum(&self) -> f64 {
        self.lengths
            .to_f64()
            .iter()
            .zip(&self.multiplicities)
            .map(|(l, &m)| l * m as f64)
            .sum()
    }

    pub fn row(&self) -> GapRow {
        GapRow {
            n: self.n,
            g: self.g(),
            max_multiplicity: self.max_multiplicity(),
            max_ratio: self.max_ratio(),
        }
    }

    /// Exact check of `sum_i l_i * phi_i == 1`; `false` for binary64 profiles.
    pub fn weighted_sum_is_exactly_one(&self) -> bool {
        let GapLengths::Exact(v) = &self.lengths else {
            return false;
        };
        let e = v.iter().map(|l| l.exp).max().unwrap_or(0);
        let total: u128 = v
            .iter()
            .zip(&self.multiplicities)
            .map(|(l, &m)| ((l.num as u128) << (e - l.exp)) * m as u128)
            .sum();
        total == 1u128 << e
    }

    /// Both profile identities: `sum phi = N` and `sum l*phi = 1` (exact, or within `tol`).
    pub fn identities_hold(&self, tol: f64) -> bool {
        if self.multiplicity_sum() != self.n as u64 {
            return false;
        }
        match self.lengths {
            GapLengths::Exact(_) => self.weighted_sum_is_exactly_one(),
            GapLengths::Approx(_) => (self.weighted_length_sum() - 1.0).abs() <= tol,
        }
    }

    pub fn to_json(&self) -> Value {
        let lengths: Vec<Value> = match &self.lengths {
            GapLengths::Exact(v) => v.iter().map(|l| Value::String(l.to_string())).collect(),
            GapLengths::Approx(v) => v.iter().map(|&l| json!(l)).collect(),
        };
        json!({
            "N": self.n,
            "g": self.g(),
            "lengths": lengths,
            "multiplicities": self.multiplicities,
            "max_ratio": self.max_ratio(),
        })
    }
}

/// Computes the gap profile of `x_1..x_N`, including the wrap gap from the
/// largest point back to the smallest. Coincident points give gaps of length 0.
///
/// Dyadic gaps are grouped by exact equality and require `dedup_tol == 0`.
/// Binary64 gaps are sorted and chained into one group while successive
/// differences stay within `dedup_tol`; each group reports its mean.
pub fn gap_profile(points: &SequenceRecord, n: usize, dedup_tol: f64) -> Result<GapProfile> {
    if n == 0 {
        return Err(Error::Range("gap profile needs N >= 1".into()));
    }
    points.check_prefix(n)?;
    if !(dedup_tol.is_finite() && dedup_tol >= 0.0) {
        return Err(Error::Usage(format!(
            "dedup tolerance {dedup_tol} must be finite and nonnegative"
        )));
    }
    match points.points() {
        Points::Exact(v) => {
            if dedup_tol != 0.0 {
                return Err(Error::Usage(
                    "exact inputs are grouped exactly; tolerance must be 0".into(),
                ));
            }
            let e = v[..n].iter().map(|p| p.exp()).max().unwrap_or(0);
            let full = 1u64 << e;
            let mut a: Vec<u64> = v[..n].iter().map(|p| p.numerator_at(e).unwrap()).collect();
            a.sort_unstable();
            let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
            for w in a.windows(2) {
                *counts.entry(w[1] - w[0]).or_default() += 1;
            }
            *counts.entry(full - (a[n - 1] - a[0])).or_default() += 1;
            let (lengths, multiplicities) = counts
                .into_iter()
                .map(|(k, m)| (DyadicLength::reduce(k, e), m))
                .unzip();
            Ok(GapProfile {
                n,
                lengths: GapLengths::Exact(lengths),
                multiplicities,
            })
        }
        Points::Approx(v) => {
            let mut a = v[..n].to_vec();
            a.sort_unstable_by(f64::total_cmp);
            let mut gaps: Vec<f64> = a.windows(2).map(|w| w[1] - w[0]).collect();
            gaps.push(1.0 - (a[n - 1] - a[0]));
            gaps.sort_unstable_by(f64::total_cmp);
            let mut lengths = Vec::new();
            let mut multiplicities = Vec::new();
            let (mut sum, mut count, mut last) = (gaps[0], 1u64, gaps[0]);
            for &gap in &gaps[1..] {
                if gap - last <= dedup_tol {
                    sum += gap;
                    count += 1;
                } else {
                    lengths.push(sum / count as f64);
                    multiplicities.push(count);
                    sum = gap;
                    count = 1;
                }
                last = gap;
            }
            lengths.push(sum / count as f64);
            multiplicities.push(count);
            Ok(GapProfile {
                n,
                lengths: GapLengths::Approx(lengths),
                multiplicities,
            })
        }
    }
}

/// One summary row of a gap series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GapRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub g: usize,
    pub max_multiplicity: u64,
    pub max_ratio: f64,
}

impl GapRow {
    /// Pigeonhole: `g(N) >= N / max_i phi_i`.
    pub fn pigeonhole_holds(&self) -> bool {
        self.g as u64 * self.max_multiplicity >= self.n as u64
    }
}

/// Gap profile summaries at increasing checkpoints.
pub fn gap_series(
    points: &SequenceRecord,
    checkpoints: &[usize],
    dedup_tol: f64,
) -> Result<Vec<GapRow>> {
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Usage(
            "checkpoints must be strictly increasing".into(),
        ));
    }
    checkpoints
        .par_iter()
        .map(|&n| Ok(gap_profile(points, n, dedup_tol)?.row()))
        .collect()
}
