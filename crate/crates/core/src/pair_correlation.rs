//! Close-pair counting and the pair-correlation statistic
//! `F(s) = #{i != j <= N : |x_i - x_j| ⊲ s / y_N} / N`.

use std::io::Write;

use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::io::fmt_f64;
use crate::rational;
use crate::torus::{
    approx_distance, dyadic_distance, DyadicPoint, Points, SequenceRecord, MAX_EXP,
};

/// Comparison used against the radius.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Predicate {
    /// `distance < radius`
    Strict,
    /// `distance <= radius`
    NonStrict,
}

/// The normalising sequence `y_N`.
#[derive(Clone, Debug, PartialEq)]
pub enum ScalingKind {
    /// `y_n = n`
    Identity,
    /// `y_n = n + floor(sqrt(n))`
    PlusSqrt,
    /// `y_n = max(n - floor(sqrt(n)), 1)`
    MinusSqrt,
    /// `y_n = table[n - 1]`
    Custom(Vec<f64>),
}

/// A value of `y_N`, exact and rounded.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleValue {
    pub exact: BigRational,
    pub approx: f64,
}

impl ScaleValue {
    fn integer(v: u64) -> Self {
        Self {
            exact: rational::from_u64(v),
            approx: v as f64,
        }
    }
}

impl ScalingKind {
    pub fn value(&self, n: usize) -> Result<ScaleValue> {
        if n == 0 {
            return Err(Error::Range("scaling index must be >= 1".into()));
        }
        let n64 = n as u64;
        Ok(match self {
            ScalingKind::Identity => ScaleValue::integer(n64),
            ScalingKind::PlusSqrt => ScaleValue::integer(n64 + n64.isqrt()),
            ScalingKind::MinusSqrt => ScaleValue::integer((n64 - n64.isqrt()).max(1)),
            ScalingKind::Custom(table) => {
                let v = *table.get(n - 1).ok_or_else(|| {
                    Error::Range(format!("custom scaling table has no entry for N = {n}"))
                })?;
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::Range(format!(
                        "custom scaling value {v} at N = {n} is not positive"
                    )));
                }
                ScaleValue {
                    exact: rational::from_f64(v)?,
                    approx: v,
                }
            }
        })
    }

    /// Default comparison: strict for the plain statistic, non-strict for scaled variants.
    pub fn default_predicate(&self) -> Predicate {
        match self {
            ScalingKind::Identity => Predicate::Strict,
            _ => Predicate::NonStrict,
        }
    }
}

/// A counting radius, held exactly and as binary64.
///
/// Dyadic inputs are compared exactly against the rational value; binary64
/// inputs are compared against the rounded `approx`.
#[derive(Clone, Debug)]
pub struct Radius {
    exact: BigRational,
    approx: f64,
    // Per grid exponent e: largest integer k with k/2^e <= r (resp. < r), saturated.
    le: [i64; MAX_EXP as usize + 1],
    lt: [i64; MAX_EXP as usize + 1],
}

impl Radius {
    pub fn new(r: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::Range(format!(
                "radius {r} must be finite and nonnegative"
            )));
        }
        Ok(Self::from_parts(rational::from_f64(r)?, r))
    }

    /// `s / y`, exact from the binary64 inputs.
    pub fn scaled(s: f64, y: &ScaleValue) -> Result<Self> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::Range(format!(
                "s = {s} must be finite and nonnegative"
            )));
        }
        let exact = rational::from_f64(s)? / &y.exact;
        Ok(Self::from_parts(exact, s / y.approx))
    }

    fn from_parts(exact: BigRational, approx: f64) -> Self {
        let mut le = [0i64; MAX_EXP as usize + 1];
        let mut lt = [0i64; MAX_EXP as usize + 1];
        for e in 0..=MAX_EXP {
            let scaled = &exact * rational::from_u64(1u64 << e);
            let fl = rational::floor(&scaled);
            let fl_i = fl.to_i64().unwrap_or(i64::MAX);
            le[e as usize] = fl_i;
            lt[e as usize] = if scaled.is_integer() {
                fl_i.saturating_sub(1)
            } else {
                fl_i
            };
        }
        Self {
            exact,
            approx,
            le,
            lt,
        }
    }

    pub fn exact(&self) -> &BigRational {
        &self.exact
    }

    pub fn approx(&self) -> f64 {
        self.approx
    }

    /// Largest grid numerator `k` on `2^-e` admitted by the predicate (`-1`: none).
    fn bound_at(&self, e: u32, pred: Predicate) -> i64 {
        match pred {
            Predicate::NonStrict => self.le[e as usize],
            Predicate::Strict => self.lt[e as usize],
        }
    }

    /// Whether a dyadic distance is within the radius.
    pub fn admits_dyadic(&self, d: DyadicPoint, pred: Predicate) -> bool {
        (d.num() as i64) <= self.bound_at(d.exp(), pred)
    }

    #[inline]
    pub fn admits_f64(&self, d: f64, pred: Predicate) -> bool {
        match pred {
            Predicate::Strict => d < self.approx,
            Predicate::NonStrict => d <= self.approx,
        }
    }
}

fn all_pairs(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1)
}

/// Ordered close pairs among `x_1..x_N` by direct enumeration of all `N(N-1)` pairs.
pub fn pair_count_brute(
    points: &SequenceRecord,
    n: usize,
    radius: &Radius,
    pred: Predicate,
) -> Result<u64> {
    points.check_prefix(n)?;
    let mut count = 0u64;
    match points.points() {
        Points::Exact(v) => {
            let v = &v[..n];
            for (i, &p) in v.iter().enumerate() {
                for (j, &q) in v.iter().enumerate() {
                    if i != j && radius.admits_dyadic(dyadic_distance(p, q), pred) {
                        count += 1;
                    }
                }
            }
        }
        Points::Approx(v) => {
            let v = &v[..n];
            for (i, &p) in v.iter().enumerate() {
                for (j, &q) in v.iter().enumerate() {
                    if i != j && radius.admits_f64(approx_distance(p, q), pred) {
                        count += 1;
                    }
                }
            }
        }
    }
    Ok(count)
}

/// Same result as [`pair_count_brute`] in `O(N log N)`: sort, then sweep two
/// monotone pointers per point, one for short forward differences and one
/// for differences that are short across the wrap at 1.
pub fn pair_count_fast(
    points: &SequenceRecord,
    n: usize,
    radius: &Radius,
    pred: Predicate,
) -> Result<u64> {
    points.check_prefix(n)?;
    if n < 2 {
        return Ok(0);
    }
    let unordered = match points.points() {
        Points::Exact(v) => {
            let e = v[..n].iter().map(|p| p.exp()).max().unwrap_or(0);
            let full = 1u64 << e;
            let bound = radius.bound_at(e, pred);
            if bound < 0 {
                return Ok(0);
            }
            let t = bound as u64;
            if t >= full / 2 {
                return Ok(all_pairs(n));
            }
            let mut a: Vec<u64> = v[..n].iter().map(|p| p.numerator_at(e).unwrap()).collect();
            a.sort_unstable();
            sweep(&a, |lo, hi| hi - lo <= t, |lo, hi| full - (hi - lo) <= t)
        }
        Points::Approx(v) => {
            let saturated = match pred {
                Predicate::NonStrict => radius.approx >= 0.5,
                Predicate::Strict => radius.approx > 0.5,
            };
            if saturated {
                return Ok(all_pairs(n));
            }
            let mut a = v[..n].to_vec();
            a.sort_unstable_by(f64::total_cmp);
            sweep(
                &a,
                |lo, hi| radius.admits_f64(hi - lo, pred),
                |lo, hi| radius.admits_f64(1.0 - (hi - lo), pred),
            )
        }
    };
    Ok(2 * unordered)
}

/// Counts unordered pairs `i < j` of a sorted slice with `near(a_i, a_j)` or
/// `wrap(a_i, a_j)`. Among `j > i`, `near` must hold on a prefix and `wrap` on
/// a disjoint suffix, and both boundaries may only move right as `i` grows.
fn sweep<T: Copy>(a: &[T], near: impl Fn(T, T) -> bool, wrap: impl Fn(T, T) -> bool) -> u64 {
    let n = a.len();
    let (mut hi, mut lo) = (0usize, 0usize);
    let mut total = 0u64;
    for i in 0..n {
        hi = hi.max(i + 1);
        while hi < n && near(a[i], a[hi]) {
            hi += 1;
        }
        lo = lo.max(hi);
        while lo < n && !wrap(a[i], a[lo]) {
            lo += 1;
        }
        total += (hi - i - 1) as u64 + (n - lo) as u64;
    }
    total
}

/// One pair-correlation evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct PcQuery {
    pub n: usize,
    pub s: f64,
    pub scaling: ScalingKind,
    pub predicate: Predicate,
}

impl PcQuery {
    pub fn new(n: usize, s: f64, scaling: ScalingKind, predicate: Predicate) -> Result<Self> {
        if n == 0 {
            return Err(Error::Range("N must be >= 1".into()));
        }
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Range(format!("s = {s} must be positive")));
        }
        Ok(Self {
            n,
            s,
            scaling,
            predicate,
        })
    }

    /// Uses the predicate conventional for `scaling`.
    pub fn with_default_predicate(n: usize, s: f64, scaling: ScalingKind) -> Result<Self> {
        let pred = scaling.default_predicate();
        Self::new(n, s, scaling, pred)
    }

    pub fn radius(&self) -> Result<Radius> {
        Radius::scaled(self.s, &self.scaling.value(self.n)?)
    }
}

pub fn pc_statistic(points: &SequenceRecord, query: &PcQuery) -> Result<f64> {
    points.check_prefix(query.n)?;
    let count = pair_count_fast(points, query.n, &query.radius()?, query.predicate)?;
    Ok(count as f64 / query.n as f64)
}

/// `pc_statistic` over a strictly increasing grid of `s` values.
pub fn pc_curve(
    points: &SequenceRecord,
    n: usize,
    s_grid: &[f64],
    scaling: &ScalingKind,
    predicate: Predicate,
) -> Result<Vec<(f64, f64)>> {
    if s_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Usage("s grid must be strictly increasing".into()));
    }
    s_grid
        .iter()
        .map(|&s| {
            let q = PcQuery::new(n, s, scaling.clone(), predicate)?;
            Ok((s, pc_statistic(points, &q)?))
        })
        .collect()
}

pub fn write_curve_csv<W: Write>(mut w: W, curve: &[(f64, f64)]) -> Result<()> {
    writeln!(w, "s,F")?;
    for &(s, f) in curve {
        writeln!(w, "{},{}", fmt_f64(s), fmt_f64(f))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{equispaced, iid_uniform, RngState};
    use proptest::prelude::*;

    fn exact(points: &[(u64, u32)]) -> SequenceRecord {
        let v = points
            .iter()
            .map(|&(n, e)| DyadicPoint::new(n, e).unwrap())
            .collect();
        SequenceRecord::exact("test", None, v).unwrap()
    }

    /// Independent count: enumerate the 56 ordered pairs of j/8 by circular index distance.
    #[test]
    fn equispaced_eight_oracle() {
        let mut oracle = 0;
        for i in 0..8i64 {
            for j in 0..8i64 {
                let k = (i - j).rem_euclid(8).min((j - i).rem_euclid(8));
                // distance k/8 < 1.5/8
                if i != j && 2 * k < 3 {
                    oracle += 1;
                }
            }
        }
        assert_eq!(oracle, 16);
        let seq = equispaced(8);
        let r = Radius::new(1.5 / 8.0).unwrap();
        assert_eq!(
            pair_count_brute(&seq, 8, &r, Predicate::Strict).unwrap(),
            16
        );
        assert_eq!(pair_count_fast(&seq, 8, &r, Predicate::Strict).unwrap(), 16);
    }

    #[test]
    fn trivial_counts() {
        let seq = iid_uniform(10, 3);
        let r = Radius::new(0.3).unwrap();
        assert_eq!(pair_count_brute(&seq, 1, &r, Predicate::Strict).unwrap(), 0);
        assert_eq!(pair_count_fast(&seq, 1, &r, Predicate::Strict).unwrap(), 0);
        let half = Radius::new(0.5).unwrap();
        for n in [2, 7, 10] {
            assert_eq!(
                pair_count_brute(&seq, n, &half, Predicate::NonStrict).unwrap(),
                (n * (n - 1)) as u64
            );
            assert_eq!(
                pair_count_fast(&seq, n, &half, Predicate::NonStrict).unwrap(),
                (n * (n - 1)) as u64
            );
        }
        assert!(pair_count_fast(&seq, 11, &r, Predicate::Strict).is_err());
        assert!(pair_count_brute(&seq, 11, &r, Predicate::Strict).is_err());
    }

    #[test]
    fn duplicates_at_radius_zero() {
        let seq = exact(&[(0, 0), (0, 0), (1, 1)]);
        let zero = Radius::new(0.0).unwrap();
        assert_eq!(
            pair_count_fast(&seq, 3, &zero, Predicate::NonStrict).unwrap(),
            2
        );
        assert_eq!(
            pair_count_brute(&seq, 3, &zero, Predicate::NonStrict).unwrap(),
            2
        );
        assert_eq!(
            pair_count_fast(&seq, 3, &zero, Predicate::Strict).unwrap(),
            0
        );
    }

    #[test]
    fn antipodal_boundary() {
        let seq = exact(&[(0, 0), (1, 1), (1, 2)]);
        let half = Radius::new(0.5).unwrap();
        assert_eq!(
            pair_count_fast(&seq, 3, &half, Predicate::Strict).unwrap(),
            4
        );
        assert_eq!(
            pair_count_brute(&seq, 3, &half, Predicate::Strict).unwrap(),
            4
        );
    }

    #[test]
    fn oracle_match_on_512_iid_points() {
        let seq = iid_uniform(512, 2024);
        let r = Radius::new(2.0 / 512.0).unwrap();
        for pred in [Predicate::Strict, Predicate::NonStrict] {
            assert_eq!(
                pair_count_fast(&seq, 512, &r, pred).unwrap(),
                pair_count_brute(&seq, 512, &r, pred).unwrap()
            );
        }
    }

    #[test]
    fn statistic_examples() {
        let seq = equispaced(8);
        let q = PcQuery::new(8, 1.5, ScalingKind::Identity, Predicate::Strict).unwrap();
        assert_eq!(pc_statistic(&seq, &q).unwrap(), 2.0);
        let q1 = PcQuery::new(1, 1.5, ScalingKind::Identity, Predicate::Strict).unwrap();
        assert_eq!(pc_statistic(&seq, &q1).unwrap(), 0.0);
        let two = exact(&[(0, 0), (1, 2)]);
        let q2 = PcQuery::new(2, 1.0, ScalingKind::Identity, Predicate::NonStrict).unwrap();
        assert_eq!(pc_statistic(&two, &q2).unwrap(), 1.0);
        assert!(PcQuery::new(0, 1.0, ScalingKind::Identity, Predicate::Strict).is_err());
        assert!(PcQuery::new(3, 0.0, ScalingKind::Identity, Predicate::Strict).is_err());
    }

    #[test]
    fn curve_examples() {
        let seq = equispaced(8);
        let c = pc_curve(
            &seq,
            8,
            &[0.5, 1.5],
            &ScalingKind::Identity,
            Predicate::Strict,
        )
        .unwrap();
        assert_eq!(c, vec![(0.5, 0.0), (1.5, 2.0)]);
        assert!(
            pc_curve(&seq, 8, &[], &ScalingKind::Identity, Predicate::Strict)
                .unwrap()
                .is_empty()
        );
        assert!(pc_curve(
            &seq,
            8,
            &[1.0, 1.0],
            &ScalingKind::Identity,
            Predicate::Strict
        )
        .is_err());
        let mut out = Vec::new();
        write_curve_csv(&mut out, &c).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "s,F\n5.0000000000000000e-1,0.0000000000000000e0\n1.5000000000000000e0,2.0000000000000000e0\n"
        );
    }

    #[test]
    fn scaling_values() {
        assert_eq!(ScalingKind::PlusSqrt.value(10).unwrap().approx, 13.0);
        assert_eq!(ScalingKind::MinusSqrt.value(10).unwrap().approx, 7.0);
        assert_eq!(ScalingKind::MinusSqrt.value(1).unwrap().approx, 1.0);
        assert_eq!(ScalingKind::MinusSqrt.value(2).unwrap().approx, 1.0);
        assert!(ScalingKind::Custom(vec![1.0]).value(2).is_err());
        assert!(ScalingKind::Custom(vec![-1.0]).value(1).is_err());
        assert_eq!(ScalingKind::Custom(vec![2.5]).value(1).unwrap().approx, 2.5);
    }

    #[test]
    fn exact_radius_thresholds() {
        // 1/3 is not dyadic: k/8 <= 1/3 iff k <= 2
        let y = ScaleValue {
            exact: rational::from_u64(3),
            approx: 3.0,
        };
        let r = Radius::scaled(1.0, &y).unwrap();
        assert!(r.admits_dyadic(DyadicPoint::new(2, 3).unwrap(), Predicate::Strict));
        assert!(!r.admits_dyadic(DyadicPoint::new(3, 3).unwrap(), Predicate::NonStrict));
        let q = Radius::new(0.25).unwrap();
        assert!(q.admits_dyadic(DyadicPoint::new(1, 2).unwrap(), Predicate::NonStrict));
        assert!(!q.admits_dyadic(DyadicPoint::new(1, 2).unwrap(), Predicate::Strict));
        assert!(!Radius::new(0.0)
            .unwrap()
            .admits_dyadic(DyadicPoint::ZERO, Predicate::Strict));
    }

    fn dyadic_seq(seed: u64, n: usize, e: u32) -> SequenceRecord {
        let mut rng = RngState::new(seed);
        let v = (0..n)
            .map(|_| DyadicPoint::new(rng.next_u64() & ((1u64 << e) - 1), e).unwrap())
            .collect();
        SequenceRecord::exact("test", Some(seed), v).unwrap()
    }

    #[test]
    fn iid_statistic_near_two() {
        let n = 1 << 14;
        let q = PcQuery::with_default_predicate(n, 1.0, ScalingKind::Identity).unwrap();
        let f = pc_statistic(&iid_uniform(n, 2024), &q).unwrap();
        assert!((f - 2.0).abs() <= 0.15, "F = {f}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn fast_matches_brute_dyadic(seed in any::<u64>(), n in 1usize..200, e in 1u32..=12, k in 0u64..=2048) {
            let seq = dyadic_seq(seed, n, e);
            // radius k/4096 lands on grid boundaries often
            let r = Radius::new(k as f64 / 4096.0).unwrap();
            for pred in [Predicate::Strict, Predicate::NonStrict] {
                let fast = pair_count_fast(&seq, n, &r, pred).unwrap();
                prop_assert_eq!(fast, pair_count_brute(&seq, n, &r, pred).unwrap());
                prop_assert_eq!(fast % 2, 0);
                prop_assert!(fast <= (n * (n - 1)) as u64);
            }
        }

        #[test]
        fn fast_matches_brute_f64(seed in any::<u64>(), n in 1usize..200, r in 0.0f64..0.5) {
            let seq = iid_uniform(n, seed);
            let r = Radius::new(r).unwrap();
            for pred in [Predicate::Strict, Predicate::NonStrict] {
                prop_assert_eq!(pair_count_fast(&seq, n, &r, pred).unwrap(), pair_count_brute(&seq, n, &r, pred).unwrap());
            }
        }

        #[test]
        fn statistic_monotone_in_s(seed in any::<u64>(), s1 in 0.01f64..10.0, ds in 0.0f64..10.0) {
            let seq = iid_uniform(64, seed);
            let s2 = s1 + ds;
            for scaling in [ScalingKind::Identity, ScalingKind::PlusSqrt, ScalingKind::MinusSqrt] {
                let f1 = pc_statistic(&seq, &PcQuery::with_default_predicate(64, s1, scaling.clone()).unwrap()).unwrap();
                let f2 = pc_statistic(&seq, &PcQuery::with_default_predicate(64, s2, scaling).unwrap()).unwrap();
                prop_assert!(f1 <= f2);
                prop_assert!(f2 <= 63.0);
            }
        }
    }
}
