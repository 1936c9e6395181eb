//! Points on the torus `[0,1)`: exact dyadic rationals and binary64 values.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Largest admissible dyadic exponent. Numerators, differences and pair sums
/// of points on a `2^-62` grid all fit in a `u64`.
pub const MAX_EXP: u32 = 62;

/// The exact torus point `num / 2^exp`, kept in canonical reduced form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct DyadicPoint {
    num: u64,
    exp: u32,
}

impl DyadicPoint {
    pub const ZERO: DyadicPoint = DyadicPoint { num: 0, exp: 0 };

    /// Builds `num / 2^exp` and reduces it.
    pub fn new(num: u64, exp: u32) -> Result<Self> {
        if exp > MAX_EXP {
            return Err(Error::Range(format!(
                "dyadic exponent {exp} exceeds {MAX_EXP}"
            )));
        }
        if num >> exp != 0 {
            return Err(Error::Range(format!("numerator {num} not below 2^{exp}")));
        }
        Ok(Self::reduce(num, exp))
    }

    /// Accepts only an already canonical pair (used by file readers).
    pub fn from_canonical(num: u64, exp: u32) -> Result<Self> {
        let p = Self::new(num, exp)?;
        if p.num != num || p.exp != exp {
            return Err(Error::Range(format!(
                "({num}, {exp}) is not canonical; expected ({}, {})",
                p.num, p.exp
            )));
        }
        Ok(p)
    }

    // caller guarantees num < 2^exp, exp <= MAX_EXP
    pub(crate) fn reduce(num: u64, exp: u32) -> Self {
        if num == 0 {
            return Self::ZERO;
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

    /// Numerator on the finer grid `2^-exp`. `None` if `exp` is coarser than the point.
    pub fn numerator_at(self, exp: u32) -> Option<u64> {
        if exp < self.exp || exp > MAX_EXP {
            None
        } else {
            Some(self.num << (exp - self.exp))
        }
    }

    /// Nearest binary64 value (exact whenever `exp <= 53` or the numerator is short).
    pub fn to_f64(self) -> f64 {
        self.num as f64 / (1u64 << self.exp) as f64
    }
}

impl Ord for DyadicPoint {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exp.max(other.exp);
        (self.num << (e - self.exp)).cmp(&(other.num << (e - other.exp)))
    }
}

impl PartialOrd for DyadicPoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DyadicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

/// Validates a binary64 torus coordinate.
pub fn check_unit(v: f64) -> Result<f64> {
    if v.is_nan() || !(0.0..1.0).contains(&v) {
        return Err(Error::Range(format!("{v} is not in [0,1)")));
    }
    Ok(v)
}

/// A torus point in either representation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TorusPoint {
    Exact(DyadicPoint),
    Approx(f64),
}

impl TorusPoint {
    pub fn approx(v: f64) -> Result<Self> {
        check_unit(v).map(TorusPoint::Approx)
    }

    pub fn to_f64(self) -> f64 {
        match self {
            TorusPoint::Exact(p) => p.to_f64(),
            TorusPoint::Approx(v) => v,
        }
    }
}

impl From<DyadicPoint> for TorusPoint {
    fn from(p: DyadicPoint) -> Self {
        TorusPoint::Exact(p)
    }
}

fn common_grid(p: DyadicPoint, q: DyadicPoint) -> (u64, u64, u32) {
    let e = p.exp.max(q.exp);
    (p.num << (e - p.exp), q.num << (e - q.exp), e)
}

pub(crate) fn dyadic_distance(p: DyadicPoint, q: DyadicPoint) -> DyadicPoint {
    let (a, b, e) = common_grid(p, q);
    let d = a.abs_diff(b);
    let full = 1u64 << e;
    DyadicPoint::reduce(d.min(full - d), e)
}

pub(crate) fn dyadic_arc(p: DyadicPoint, q: DyadicPoint) -> DyadicPoint {
    let (a, b, e) = common_grid(p, q);
    let full = 1u64 << e;
    DyadicPoint::reduce(b.wrapping_sub(a) & (full - 1), e)
}

/// Nearest-integer distance on `[0,1)`; binary64 counterpart of [`dyadic_distance`].
#[inline]
pub(crate) fn approx_distance(p: f64, q: f64) -> f64 {
    let d = (p - q).abs();
    d.min(1.0 - d)
}

/// Distance to the nearest integer of `p - q`, in the inputs' representation.
pub fn torus_distance(p: TorusPoint, q: TorusPoint) -> Result<TorusPoint> {
    match (p, q) {
        (TorusPoint::Exact(p), TorusPoint::Exact(q)) => {
            Ok(TorusPoint::Exact(dyadic_distance(p, q)))
        }
        (TorusPoint::Approx(p), TorusPoint::Approx(q)) => {
            Ok(TorusPoint::Approx(approx_distance(p, q)))
        }
        _ => Err(Error::MixedRepr("torus_distance")),
    }
}

/// Forward arc from `p` to `q`, i.e. `(q - p) mod 1`.
pub fn arc_gap(p: TorusPoint, q: TorusPoint) -> Result<TorusPoint> {
    match (p, q) {
        (TorusPoint::Exact(p), TorusPoint::Exact(q)) => Ok(TorusPoint::Exact(dyadic_arc(p, q))),
        (TorusPoint::Approx(p), TorusPoint::Approx(q)) => {
            let mut d = q - p;
            if d < 0.0 {
                d += 1.0;
            }
            // a tiny negative difference can round up to 1.0
            if d >= 1.0 {
                d = 1.0 - f64::EPSILON / 2.0;
            }
            Ok(TorusPoint::Approx(d))
        }
        _ => Err(Error::MixedRepr("arc_gap")),
    }
}

/// Homogeneous point storage for a sequence.
#[derive(Clone, Debug, PartialEq)]
pub enum Points {
    Exact(Vec<DyadicPoint>),
    Approx(Vec<f64>),
}

impl Points {
    pub fn len(&self) -> usize {
        match self {
            Points::Exact(v) => v.len(),
            Points::Approx(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// 1-based access.
    pub fn get(&self, n: usize) -> Option<TorusPoint> {
        let i = n.checked_sub(1)?;
        match self {
            Points::Exact(v) => v.get(i).copied().map(TorusPoint::Exact),
            Points::Approx(v) => v.get(i).copied().map(TorusPoint::Approx),
        }
    }
}

/// Provenance attached to a sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SequenceMeta {
    pub kind: String,
    pub seed: Option<u64>,
}

/// An ordered list of torus points, indexed from 1.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceRecord {
    meta: SequenceMeta,
    points: Points,
}

impl SequenceRecord {
    pub fn exact(
        kind: impl Into<String>,
        seed: Option<u64>,
        points: Vec<DyadicPoint>,
    ) -> Result<Self> {
        Self::new(
            SequenceMeta {
                kind: kind.into(),
                seed,
            },
            Points::Exact(points),
        )
    }

    pub fn approx(kind: impl Into<String>, seed: Option<u64>, points: Vec<f64>) -> Result<Self> {
        Self::new(
            SequenceMeta {
                kind: kind.into(),
                seed,
            },
            Points::Approx(points),
        )
    }

    pub fn new(meta: SequenceMeta, points: Points) -> Result<Self> {
        if meta.kind.is_empty() || meta.kind.chars().any(char::is_whitespace) {
            return Err(Error::Usage(format!(
                "invalid sequence kind label {:?}",
                meta.kind
            )));
        }
        if let Points::Approx(v) = &points {
            for &x in v {
                check_unit(x)?;
            }
        }
        Ok(Self { meta, points })
    }

    pub fn meta(&self) -> &SequenceMeta {
        &self.meta
    }

    pub fn points(&self) -> &Points {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.points, Points::Exact(_))
    }

    /// Point `x_n`, 1-based.
    pub fn get(&self, n: usize) -> Option<TorusPoint> {
        self.points.get(n)
    }

    pub(crate) fn check_prefix(&self, n: usize) -> Result<()> {
        if n > self.len() {
            return Err(Error::Range(format!(
                "prefix length {n} exceeds sequence length {}",
                self.len()
            )));
        }
        Ok(())
    }
}
