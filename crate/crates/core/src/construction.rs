//! The randomized block sequence `(Z_n)`.
//!
//! Random blocks hold `X_i`, uniform on the grid `A_m = {j / 2^(m + a(m))}`
//! for `i` in `I_m = (2^(m-1), 2^m]` (with `X_1 = 0`). Before the random block
//! of level `m` sits the deterministic block `C_m = B_m \ B_(m-1)`, the new
//! points of the grid `B_m = {j / 2^b(m)}` in increasing order:
//!
//! ```text
//! X_1 | C_1 | X_2 | C_2 | X_3 X_4 | C_3 | X_5 .. X_8 | C_4 | ...
//! ```
//!
//! Choosing `a, b` from a target gap-count function `q` bounds the number of
//! distinct gaps of every prefix by `q`.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::generators::RngState;
use crate::torus::{DyadicPoint, SequenceRecord, MAX_EXP};

/// Largest block level that may be materialized.
pub const MAX_BLOCK: usize = 60;

/// A weakly increasing target gap-count function on `1..=len`, `q(n) >= 4`.
///
/// No upper bound is imposed here; [`derive_ab`] rejects a `q` that grows so
/// fast that some `b(m)` would drop below 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QSpec {
    q: Vec<u64>,
}

impl QSpec {
    pub fn new(q: Vec<u64>) -> Result<Self> {
        let mut problems = Vec::new();
        for (i, &v) in q.iter().enumerate() {
            let n = i + 1;
            if v < 4 {
                problems.push(format!("q({n}) = {v} < 4"));
            }
            if i > 0 && v < q[i - 1] {
                problems.push(format!("q not weakly increasing at n = {n}"));
            }
        }
        if q.is_empty() {
            problems.push("q table is empty".into());
        }
        if problems.is_empty() {
            Ok(Self { q })
        } else {
            Err(Error::Config(problems))
        }
    }

    /// `q(n) = max(4, floor(log2 n) + 4)` on `1..=len`.
    pub fn log(len: usize) -> Self {
        Self::new(
            (1..=len as u64)
                .map(|n| (n.ilog2() as u64 + 4).max(4))
                .collect(),
        )
        .unwrap()
    }

    /// `q(n) = max(4, n)` on `1..=len`.
    pub fn linear(len: usize) -> Self {
        Self::new((1..=len as u64).map(|n| n.max(4)).collect()).unwrap()
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn table(&self) -> &[u64] {
        &self.q
    }

    /// `q(n)`, 1-based; `None` past the table.
    pub fn q(&self, n: usize) -> Option<u64> {
        n.checked_sub(1).and_then(|i| self.q.get(i)).copied()
    }

    /// `h(n) = floor(log2 q(n))`.
    pub fn h(&self, n: usize) -> Option<u32> {
        self.q(n).map(u64::ilog2)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScheduleSource {
    DerivedFromQ(QSpec),
    Explicit,
}

/// Schedule tables `a(m), b(m)` for `m = 1..=m_max`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructionConfig {
    a: Vec<u32>,
    b: Vec<u32>,
    source: ScheduleSource,
}

impl ConstructionConfig {
    pub fn explicit(a: Vec<u32>, b: Vec<u32>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Config(vec![format!(
                "a has {} entries but b has {}",
                a.len(),
                b.len()
            )]));
        }
        if a.is_empty() {
            return Err(Error::Config(vec!["empty schedule".into()]));
        }
        Ok(Self {
            a,
            b,
            source: ScheduleSource::Explicit,
        })
    }

    /// `a(m) = ceil(m/2)`, `b(m) = m - floor(m/2)`, so `b~(m) = floor(m/2)`.
    pub fn half(m_max: usize) -> Self {
        let a = (1..=m_max as u32).map(|m| m.div_ceil(2)).collect();
        let b = (1..=m_max as u32).map(|m| m - m / 2).collect();
        Self::explicit(a, b).unwrap()
    }

    pub fn m_max(&self) -> usize {
        self.a.len()
    }

    pub fn source(&self) -> &ScheduleSource {
        &self.source
    }

    pub fn a_table(&self) -> &[u32] {
        &self.a
    }

    pub fn b_table(&self) -> &[u32] {
        &self.b
    }

    /// `a(m)` for `1 <= m <= m_max`.
    pub fn a(&self, m: usize) -> Option<u32> {
        m.checked_sub(1).and_then(|i| self.a.get(i)).copied()
    }

    /// `b(m)` for `1 <= m <= m_max`, with `b(0) = 0`.
    pub fn b(&self, m: usize) -> Option<u32> {
        if m == 0 {
            Some(0)
        } else {
            self.b.get(m - 1).copied()
        }
    }

    /// `b~(m) = m - b(m)`.
    pub fn b_tilde(&self, m: usize) -> Option<i64> {
        self.b(m).map(|b| m as i64 - b as i64)
    }

    /// Exponent of the random grid `A_m`.
    pub fn random_exp(&self, m: usize) -> Option<u32> {
        self.a(m).map(|a| m as u32 + a)
    }

    fn require_block(&self, m: usize) -> Result<()> {
        if m > self.m_max() {
            return Err(Error::Range(format!(
                "block {m} needed but the schedule only covers m <= {}",
                self.m_max()
            )));
        }
        Ok(())
    }

    /// Size of `C_m` (`|B_1|` for `m = 1`).
    pub fn c(&self, m: usize) -> Result<u64> {
        self.require_block(m)?;
        let b = self.b(m).unwrap();
        Ok(if m == 1 {
            1u64 << b
        } else {
            (1u64 << b) - (1u64 << self.b(m - 1).unwrap())
        })
    }

    /// Last index of the random block `R_m`: `2^b(m) + 2^m` (and 1 for `m = 0`).
    pub fn block_end(&self, m: usize) -> Result<u64> {
        if m == 0 {
            return Ok(1);
        }
        self.require_block(m)?;
        Ok((1u64 << self.b(m).unwrap()) + (1u64 << m))
    }

    /// The level `m` with `n` in `D_m ∪ R_m` (`0` for `n = 1`).
    pub fn level_of(&self, n: u64) -> Result<usize> {
        if n == 0 {
            return Err(Error::Range("indices start at 1".into()));
        }
        let mut m = 0;
        while self.block_end(m)? < n {
            m += 1;
        }
        Ok(m)
    }

    /// `m + a(m) - b(m-1)`: the log2 of the gap-count bound for `n ∈ D_m ∪ R_m`.
    pub fn gap_bound_exp(&self, m: usize) -> Result<u32> {
        self.require_block(m)?;
        if m == 0 {
            return Err(Error::Range("the gap bound is stated for m >= 1".into()));
        }
        Ok(self.random_exp(m).unwrap() - self.b(m - 1).unwrap())
    }

    /// Short hex digest of the schedule tables.
    pub fn digest(&self) -> String {
        let canon = serde_json::json!({ "a": self.a, "b": self.b }).to_string();
        hex::encode(&Sha256::digest(canon.as_bytes())[..8])
    }
}

/// A problem found by [`validate_config`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NotPositive {
        table: char,
        m: usize,
    },
    NotMonotone {
        table: char,
        m: usize,
    },
    BTildeOutOfRange {
        m: usize,
        value: i64,
    },
    BTildeNotMonotone {
        m: usize,
    },
    /// `b~` shows no growth over the materialized range.
    BTildeNotDivergent {
        first: i64,
        last: i64,
    },
    ExponentCap {
        m: usize,
        exp: u32,
    },
    TooManyBlocks {
        m_max: usize,
    },
}

impl Violation {
    /// Whether the sequence is still well defined despite this violation.
    /// Only the growth heuristic for `b~` is of that kind: it guards the
    /// pair-correlation limit, not the layout or the gap bound.
    pub fn is_asymptotic(&self) -> bool {
        matches!(self, Violation::BTildeNotDivergent { .. })
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotPositive { table, m } => write!(f, "{table}({m}) must be >= 1"),
            Violation::NotMonotone { table, m } => write!(f, "{table} decreases at m = {m}"),
            Violation::BTildeOutOfRange { m, value } => {
                write!(f, "b~({m}) = {value} is outside [0, {m}]")
            }
            Violation::BTildeNotMonotone { m } => write!(f, "b~ decreases at m = {m}"),
            Violation::BTildeNotDivergent { first, last } => {
                write!(
                    f,
                    "b~ does not grow over the schedule (b~(1) = {first}, b~(m_max) = {last})"
                )
            }
            Violation::ExponentCap { m, exp } => {
                write!(f, "m + a(m) = {exp} exceeds {MAX_EXP} at m = {m}")
            }
            Violation::TooManyBlocks { m_max } => write!(f, "m_max = {m_max} exceeds {MAX_BLOCK}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Validation {
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

impl Validation {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// No violation prevents building the sequence.
    pub fn is_constructible(&self) -> bool {
        self.violations.iter().all(Violation::is_asymptotic)
    }

    pub fn messages(&self) -> Vec<String> {
        self.violations.iter().map(ToString::to_string).collect()
    }
}

pub fn validate_config(c: &ConstructionConfig) -> Validation {
    let mut v = Validation::default();
    let m_max = c.m_max();
    if m_max > MAX_BLOCK {
        v.violations.push(Violation::TooManyBlocks { m_max });
    }
    for m in 1..=m_max {
        let (a, b) = (c.a(m).unwrap(), c.b(m).unwrap());
        if a < 1 {
            v.violations.push(Violation::NotPositive { table: 'a', m });
        }
        if b < 1 {
            v.violations.push(Violation::NotPositive { table: 'b', m });
        }
        if m > 1 && a < c.a(m - 1).unwrap() {
            v.violations.push(Violation::NotMonotone { table: 'a', m });
        }
        if m > 1 && b < c.b(m - 1).unwrap() {
            v.violations.push(Violation::NotMonotone { table: 'b', m });
        }
        let exp = m as u32 + a;
        if exp > MAX_EXP {
            v.violations.push(Violation::ExponentCap { m, exp });
        }
        let bt = c.b_tilde(m).unwrap();
        if !(0..=m as i64).contains(&bt) {
            v.violations
                .push(Violation::BTildeOutOfRange { m, value: bt });
        }
        if m > 1 && bt < c.b_tilde(m - 1).unwrap() {
            v.violations.push(Violation::BTildeNotMonotone { m });
        }
    }
    if m_max >= 1 {
        let first = c.b_tilde(1).unwrap();
        let last = c.b_tilde(m_max).unwrap();
        if last <= first {
            v.violations
                .push(Violation::BTildeNotDivergent { first, last });
        } else if m_max >= 2 && c.b_tilde(m_max / 2 + 1) == Some(last) {
            v.warnings.push(format!(
                "b~ is constant (= {last}) on the top half of the schedule"
            ));
        }
    }
    v
}

/// `a(m) = ceil(h(m)/2)`, `b(m) = m + 1 - floor(h(m+1)/2)` for `m = 1..=m_max`.
pub fn derive_ab(q: &QSpec, m_max: usize) -> Result<ConstructionConfig> {
    if m_max == 0 {
        return Err(Error::Config(vec!["m_max must be >= 1".into()]));
    }
    if q.len() < m_max + 1 {
        return Err(Error::Config(vec![format!(
            "q covers n <= {} but m_max = {m_max} needs n <= {}",
            q.len(),
            m_max + 1
        )]));
    }
    let mut a = Vec::with_capacity(m_max);
    let mut b = Vec::with_capacity(m_max);
    let mut problems = Vec::new();
    for m in 1..=m_max {
        let h = q.h(m).unwrap();
        let h_next = q.h(m + 1).unwrap();
        a.push(h.div_ceil(2));
        let bm = m as i64 + 1 - (h_next / 2) as i64;
        if bm < 1 {
            problems.push(format!("b({m}) = {bm} < 1"));
        }
        b.push(bm.max(0) as u32);
    }
    if !problems.is_empty() {
        return Err(Error::Config(problems));
    }
    let c = ConstructionConfig {
        a,
        b,
        source: ScheduleSource::DerivedFromQ(q.clone()),
    };
    let val = validate_config(&c);
    if !val.is_constructible() {
        return Err(Error::Config(val.messages()));
    }
    Ok(c)
}

/// Derives the shortest schedule from `q` whose blocks cover `1..=n`.
pub fn derive_ab_covering(q: &QSpec, n: u64) -> Result<ConstructionConfig> {
    let mut m = 1;
    loop {
        if m > MAX_BLOCK || m + 1 > q.len() {
            return Err(Error::Config(vec![format!(
                "q is too short to cover n = {n}"
            )]));
        }
        let b = m as i64 + 1 - (q.h(m + 1).unwrap() / 2) as i64;
        if (0..63).contains(&b) && (1u64 << b) + (1u64 << m) >= n {
            return derive_ab(q, m);
        }
        m += 1;
    }
}

/// [`derive_ab_covering`] with at least `min_blocks` levels, e.g. to reach
/// the random block holding `X_N`.
pub fn derive_ab_with_blocks(q: &QSpec, n: u64, min_blocks: usize) -> Result<ConstructionConfig> {
    let c = derive_ab_covering(q, n)?;
    if c.m_max() >= min_blocks {
        Ok(c)
    } else {
        derive_ab(q, min_blocks)
    }
}

/// Where index `n` of `(Z_n)` comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockDescriptor {
    /// `Z_n = X_i` with `i ∈ I_m`.
    RandomSlot { i: u64, m: usize },
    /// `Z_n` is the `j`-th smallest element of `C_m` (1-based).
    DeterministicSlot { m: usize, j: u64 },
}

/// Descriptors for `n = 1..=N`.
pub fn block_schedule(n: usize, c: &ConstructionConfig) -> Result<Vec<BlockDescriptor>> {
    if n == 0 {
        return Err(Error::Range("N must be >= 1".into()));
    }
    let mut out = Vec::with_capacity(n);
    out.push(BlockDescriptor::RandomSlot { i: 1, m: 0 });
    let mut m = 1;
    while out.len() < n {
        let c_m = c.c(m)?;
        for j in 1..=c_m {
            if out.len() == n {
                break;
            }
            out.push(BlockDescriptor::DeterministicSlot { m, j });
        }
        for i in (1u64 << (m - 1)) + 1..=(1u64 << m) {
            if out.len() == n {
                break;
            }
            out.push(BlockDescriptor::RandomSlot { i, m });
        }
        m += 1;
    }
    Ok(out)
}

/// `C_m = B_m \ B_(m-1)` in increasing order.
pub fn deterministic_block(m: usize, c: &ConstructionConfig) -> Result<Vec<DyadicPoint>> {
    if m == 0 {
        return Err(Error::Range("deterministic blocks start at m = 1".into()));
    }
    c.require_block(m)?;
    let b = c.b(m).unwrap();
    if b > MAX_EXP {
        return Err(Error::Range(format!("b({m}) = {b} exceeds {MAX_EXP}")));
    }
    let step = if m == 1 { 0 } else { b - c.b(m - 1).unwrap() };
    let size = 1u64 << b;
    Ok(if m == 1 {
        (0..size).map(|j| DyadicPoint::new(j, b).unwrap()).collect()
    } else if step == 0 {
        Vec::new()
    } else {
        let stride = 1u64 << step;
        (0..size)
            .filter(|j| j % stride != 0)
            .map(|j| DyadicPoint::new(j, b).unwrap())
            .collect()
    })
}

/// Materializes `Z_1..Z_N`.
///
/// Random slots consume one SplitMix64 draw each, in increasing `i`; `X_i`
/// keeps the low `m + a(m)` bits of its draw. `X_1` consumes a draw and is
/// then fixed to 0.
pub fn construct_sequence(n: usize, c: &ConstructionConfig, seed: u64) -> Result<SequenceRecord> {
    let val = validate_config(c);
    if !val.is_constructible() {
        return Err(Error::Config(val.messages()));
    }
    let schedule = block_schedule(n, c)?;
    let mut rng = RngState::new(seed);
    let mut block: (usize, Vec<DyadicPoint>) = (0, Vec::new());
    let mut points = Vec::with_capacity(n);
    for d in schedule {
        let p = match d {
            BlockDescriptor::RandomSlot { i, m } => {
                let draw = rng.next_u64();
                if i == 1 {
                    DyadicPoint::ZERO
                } else {
                    let e = c.random_exp(m).unwrap();
                    DyadicPoint::new(draw & ((1u64 << e) - 1), e)?
                }
            }
            BlockDescriptor::DeterministicSlot { m, j } => {
                if block.0 != m {
                    block = (m, deterministic_block(m, c)?);
                }
                block.1[(j - 1) as usize]
            }
        };
        points.push(p);
    }
    SequenceRecord::exact("construction", Some(seed), points)
}

/// Checks `B_(m-1) ⊆ {Z_1..Z_n} ⊆ A_m` for the level `m` of `n`, exactly.
pub fn grid_inclusion_holds(z: &[DyadicPoint], n: usize, c: &ConstructionConfig) -> Result<bool> {
    if n == 0 || n > z.len() {
        return Err(Error::Range(format!("prefix {n} out of range")));
    }
    let m = c.level_of(n as u64)?;
    if m == 0 {
        return Ok(z[0] == DyadicPoint::ZERO);
    }
    let fine = c.random_exp(m).unwrap();
    if z[..n].iter().any(|p| p.exp() > fine) {
        return Ok(false);
    }
    let coarse = c.b(m - 1).unwrap();
    if m == 1 {
        return Ok(true);
    }
    let present: HashSet<u64> = z[..n]
        .iter()
        .filter(|p| p.exp() <= coarse)
        .map(|p| p.numerator_at(coarse).unwrap())
        .collect();
    Ok(present.len() as u64 == 1u64 << coarse)
}

/// The on-disk schedule description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigFile {
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })
    }

    /// Builds a schedule covering `1..=n`.
    pub fn schedule(&self, n: u64) -> Result<ConstructionConfig> {
        self.schedule_with_blocks(n, 1)
    }

    /// Like [`ConfigFile::schedule`], but a derived schedule has at least
    /// `min_blocks` levels.
    pub fn schedule_with_blocks(&self, n: u64, min_blocks: usize) -> Result<ConstructionConfig> {
        match (self.source.as_str(), &self.q, &self.a, &self.b) {
            ("q", Some(q), None, None) => derive_ab_with_blocks(&QSpec::new(q.clone())?, n, min_blocks),
            ("explicit", None, Some(a), Some(b)) => ConstructionConfig::explicit(a.clone(), b.clone()),
            _ => Err(Error::Config(vec![
                "expected {\"source\":\"q\",\"q\":[..]} or {\"source\":\"explicit\",\"a\":[..],\"b\":[..]}".into(),
            ])),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaps::gap_profile;
    use crate::torus::Points;
    use proptest::prelude::*;

    use BlockDescriptor::{DeterministicSlot as Det, RandomSlot as Rnd};

    fn pt(num: u64, exp: u32) -> DyadicPoint {
        DyadicPoint::new(num, exp).unwrap()
    }

    fn exact_points(rec: &SequenceRecord) -> Vec<DyadicPoint> {
        match rec.points() {
            Points::Exact(v) => v.clone(),
            Points::Approx(_) => unreachable!(),
        }
    }

    #[test]
    fn derive_linear_q() {
        let q = QSpec::linear(9);
        assert_eq!(q.h(8), Some(3));
        assert_eq!(q.h(7), Some(2));
        let c = derive_ab(&q, 7).unwrap();
        assert_eq!(c.b(7), Some(7));
        assert_eq!(c.a(7), Some(1));
    }

    #[test]
    fn constant_q_is_rejected_as_non_divergent() {
        let q = QSpec::new(vec![4; 21]).unwrap();
        let c = derive_ab(&q, 20).unwrap();
        assert!(c.a_table().iter().all(|&a| a == 1));
        assert!((1..=20).all(|m| c.b(m) == Some(m as u32) && c.b_tilde(m) == Some(0)));
        let v = validate_config(&c);
        assert!(!v.is_valid());
        assert!(v.is_constructible());
        assert_eq!(
            v.violations,
            vec![Violation::BTildeNotDivergent { first: 0, last: 0 }]
        );
    }

    #[test]
    fn half_exponential_q() {
        // q(n) = max(4, 2^floor(n/2)); independent recomputation of the tables
        let q = QSpec::new((1..=21u32).map(|n| (1u64 << (n / 2)).max(4)).collect()).unwrap();
        let c = derive_ab(&q, 20).unwrap();
        for m in 1..=20usize {
            let h = |n: usize| ((n / 2) as u32).max(2);
            assert_eq!(q.h(m), Some(h(m)));
            assert_eq!(c.a(m), Some(h(m).div_ceil(2)));
            assert_eq!(c.b_tilde(m), Some((h(m + 1) / 2) as i64 - 1));
        }
        assert_eq!(c.b_tilde(20), Some(4));
        assert!(validate_config(&c).is_valid());
    }

    #[test]
    fn qspec_errors_list_offenders() {
        let Err(Error::Config(msgs)) = QSpec::new(vec![4, 3, 8, 5]) else {
            panic!()
        };
        assert!(msgs.iter().any(|m| m.contains("q(2) = 3")));
        assert!(msgs.iter().any(|m| m.contains("n = 4")));
        assert!(derive_ab(&QSpec::linear(5), 5).is_err());
        // h(2) = 6 forces b(1) = 2 - 3 < 1
        assert!(matches!(
            derive_ab(&QSpec::new(vec![4, 64, 64]).unwrap(), 2),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn validate_examples() {
        let c = ConstructionConfig::half(30);
        let v = validate_config(&c);
        assert!(v.is_valid(), "{v:?}");
        assert!((1..=30).all(|m| c.b_tilde(m) == Some((m / 2) as i64)));

        let bad_b = ConstructionConfig::explicit(vec![1; 5], (2..=6).collect()).unwrap();
        let v = validate_config(&bad_b);
        assert!(v
            .violations
            .contains(&Violation::BTildeOutOfRange { m: 1, value: -1 }));
        assert!(!v.is_constructible());

        let bad_a = ConstructionConfig::explicit(vec![2, 1, 2, 3], vec![1, 1, 2, 2]).unwrap();
        assert!(validate_config(&bad_a)
            .violations
            .contains(&Violation::NotMonotone { table: 'a', m: 2 }));

        let cap = ConstructionConfig::explicit(vec![61, 61], vec![1, 1]).unwrap();
        assert!(validate_config(&cap)
            .violations
            .iter()
            .any(|v| matches!(v, Violation::ExponentCap { m: 2, .. })));
    }

    #[test]
    fn warning_for_flat_top_half() {
        let c = ConstructionConfig::explicit(vec![1; 6], vec![1, 1, 2, 3, 4, 5]).unwrap();
        let v = validate_config(&c);
        assert!(v.is_valid());
        assert_eq!(v.warnings.len(), 1);
    }

    #[test]
    fn schedule_small_example() {
        let c = ConstructionConfig::explicit(vec![1, 1, 1], vec![1, 2, 2]).unwrap();
        let s = block_schedule(8, &c).unwrap();
        assert_eq!(
            s,
            vec![
                Rnd { i: 1, m: 0 },
                Det { m: 1, j: 1 },
                Det { m: 1, j: 2 },
                Rnd { i: 2, m: 1 },
                Det { m: 2, j: 1 },
                Det { m: 2, j: 2 },
                Rnd { i: 3, m: 2 },
                Rnd { i: 4, m: 2 },
            ]
        );
        // D_3 is empty since b(3) = b(2)
        let s = block_schedule(12, &c).unwrap();
        assert_eq!(
            &s[8..],
            &[
                Rnd { i: 5, m: 3 },
                Rnd { i: 6, m: 3 },
                Rnd { i: 7, m: 3 },
                Rnd { i: 8, m: 3 }
            ]
        );
        assert!(block_schedule(13, &c).is_err());
    }

    #[test]
    fn deterministic_block_examples() {
        let c = ConstructionConfig::explicit(vec![1, 1, 1], vec![1, 2, 2]).unwrap();
        assert_eq!(
            deterministic_block(1, &c).unwrap(),
            vec![pt(0, 0), pt(1, 1)]
        );
        assert_eq!(
            deterministic_block(2, &c).unwrap(),
            vec![pt(1, 2), pt(3, 2)]
        );
        assert!(deterministic_block(3, &c).unwrap().is_empty());
        assert!(deterministic_block(4, &c).is_err());
    }

    #[test]
    fn first_three_points() {
        let c = ConstructionConfig::half(10);
        for seed in [0, 1, 99] {
            let z = construct_sequence(3, &c, seed).unwrap();
            assert_eq!(exact_points(&z), vec![pt(0, 0), pt(0, 0), pt(1, 1)]);
        }
        assert_eq!(
            construct_sequence(500, &c, 7).unwrap(),
            construct_sequence(500, &c, 7).unwrap()
        );
    }

    #[test]
    fn random_slots_follow_stream() {
        let c = ConstructionConfig::half(10);
        let z = exact_points(&construct_sequence(40, &c, 5).unwrap());
        let mut rng = RngState::new(5);
        let mut draws = Vec::new();
        for (n, d) in block_schedule(40, &c).unwrap().into_iter().enumerate() {
            if let Rnd { i, m } = d {
                let draw = rng.next_u64();
                draws.push(i);
                if i > 1 {
                    let e = c.random_exp(m).unwrap();
                    assert_eq!(z[n].numerator_at(e), Some(draw & ((1 << e) - 1)));
                }
            }
        }
        assert_eq!(draws, (1..=draws.len() as u64).collect::<Vec<_>>());
    }

    #[test]
    fn rejects_broken_config() {
        let bad = ConstructionConfig::explicit(vec![1; 5], (2..=6).collect()).unwrap();
        assert!(matches!(
            construct_sequence(10, &bad, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn config_file_forms() {
        let f = ConfigFile::parse(r#"{"source":"explicit","a":[1,1],"b":[1,2],"seed":3}"#).unwrap();
        assert_eq!(f.seed, Some(3));
        assert_eq!(f.schedule(4).unwrap().b_table(), &[1, 2]);
        let f = ConfigFile::parse(r#"{"source":"q","q":[4,4,4,5,5,6,6,8,8,8]}"#).unwrap();
        let c = f.schedule(20).unwrap();
        assert!(c.block_end(c.m_max()).unwrap() >= 20);
        assert!(ConfigFile::parse(r#"{"source":"q","a":[1]}"#)
            .unwrap()
            .schedule(4)
            .is_err());
        assert!(ConfigFile::parse("{").is_err());
        assert_eq!(f.schedule_with_blocks(20, 8).unwrap().m_max(), 8);
    }

    #[test]
    fn block_floor_extends_short_schedules() {
        let q = QSpec::log(64);
        let short = derive_ab_covering(&q, 1024).unwrap();
        assert!(short.m_max() < 10);
        assert_eq!(derive_ab_with_blocks(&q, 1024, 10).unwrap().m_max(), 10);
        assert_eq!(derive_ab_with_blocks(&q, 1024, 1).unwrap(), short);
    }

    fn check_prefixes(c: &ConstructionConfig, seed: u64, n: usize) {
        let rec = construct_sequence(n, c, seed).unwrap();
        let z = exact_points(&rec);
        for k in 2..=n {
            let m = c.level_of(k as u64).unwrap();
            assert!(grid_inclusion_holds(&z, k, c).unwrap(), "n = {k}");
            let g = gap_profile(&rec, k, 0.0).unwrap().g() as u64;
            assert!(g <= 1u64 << c.gap_bound_exp(m).unwrap(), "n = {k}: g = {g}");
        }
    }

    #[test]
    fn prefixes_respect_grids_and_gap_bound() {
        check_prefixes(&ConstructionConfig::half(12), 11, 3000);
        let q = QSpec::linear(40);
        check_prefixes(&derive_ab_covering(&q, 3000).unwrap(), 12, 3000);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn schedule_partitions_indices(steps in proptest::collection::vec(0u32..=1, 1..9), extra in 0u32..2, n in 1usize..600) {
            // b weakly increasing with b~ = m - b(m) >= 0, grown from random unit steps
            let mut b = vec![1u32];
            for (k, s) in steps.iter().enumerate() {
                let m = k as u32 + 2;
                b.push((b[k] + s).min(m));
            }
            let m_max = b.len();
            let a = vec![1 + extra; m_max];
            let c = ConstructionConfig::explicit(a, b).unwrap();
            let n = n.min(c.block_end(m_max).unwrap() as usize);
            let s = block_schedule(n, &c).unwrap();
            prop_assert_eq!(s.len(), n);
            let randoms: Vec<u64> = s.iter().filter_map(|d| match d { Rnd { i, .. } => Some(*i), _ => None }).collect();
            prop_assert_eq!(randoms, (1..=s.iter().filter(|d| matches!(d, Rnd { .. })).count() as u64).collect::<Vec<_>>());
            for m in 1..=m_max {
                let dets = s.iter().filter(|d| matches!(d, Det { m: mm, .. } if *mm == m)).count() as u64;
                let rands = s.iter().filter(|d| matches!(d, Rnd { m: mm, .. } if *mm == m)).count() as u64;
                if c.block_end(m).unwrap() as usize <= n {
                    prop_assert_eq!(dets, c.c(m).unwrap());
                    prop_assert_eq!(rands, 1u64 << (m - 1));
                    prop_assert_eq!(deterministic_block(m, &c).unwrap().len() as u64, dets);
                }
            }
        }
    }
}
