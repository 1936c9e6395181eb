//! The acceptance suite. Every criterion is deterministic: seeds and
//! tolerances are fixed below.

use std::fmt;

use rayon::prelude::*;

use crate::construction::{
    construct_sequence, derive_ab_covering, grid_inclusion_holds, ConstructionConfig, QSpec,
};
use crate::error::Result;
use crate::gaps::{gap_profile, DEFAULT_TOL};
use crate::generators::{equispaced, iid_uniform, kronecker_fixed, RngState, GOLDEN_FRACTION};
use crate::io::sequence_to_string;
use crate::oracles::{expected_f, mc_moments, variance_f, MomentReport};
use crate::pair_correlation::{
    pair_count_brute, pair_count_fast, pc_statistic, PcQuery, Predicate, Radius, ScalingKind,
};
use crate::rational;
use crate::torus::{DyadicPoint, Points, SequenceRecord};

pub const COUNTING_SEED: u64 = 0x5EED_0001;
pub const GAP_IDENTITY_SEED: u64 = 0x5EED_0002;
pub const GAP_BOUND_MASTER_SEED: u64 = 0x5EED_0004;
pub const MC_SEED: u64 = 0x5EED_0008;
pub const CONSTRUCTION_SEED: u64 = 0x5EED_0009;

pub const COUNTING_INSTANCES: usize = 200;
pub const GAP_BOUND_SEEDS: usize = 20;
pub const BINARY64_IDENTITY_TOL: f64 = 1e-9;
pub const EXPECTATION_REL_TOL: f64 = 0.05;
pub const VARIANCE_GROWTH_FACTOR: f64 = 4.0;
pub const MC_SIGMAS: f64 = 3.0;
pub const MC_VAR_REL_TOL: f64 = 0.5;
pub const PPC_REL_TOL: f64 = 0.1;

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {:>2} {}: {}", self.id, self.name, self.detail)
    }
}

fn outcome(id: u8, name: &'static str, res: Result<(bool, String)>) -> CriterionOutcome {
    match res {
        Ok((passed, detail)) => CriterionOutcome {
            id,
            name,
            passed,
            detail,
        },
        Err(e) => CriterionOutcome {
            id,
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

/// Schedule used by the statistical criteria: `a(m) = ceil(m/2)`, `b(m) = m - floor(m/2)`.
pub fn half_schedule() -> ConstructionConfig {
    ConstructionConfig::half(20)
}

/// `q(n) = max(4, floor(log2 n) + 4)`.
pub fn log_q(len: usize) -> QSpec {
    QSpec::log(len)
}

fn counting_instance(
    rng: &mut RngState,
    t: usize,
) -> Result<(SequenceRecord, usize, Radius, Predicate)> {
    let n = 1 + (rng.next_u64() % 512) as usize;
    let pred = if (t / 2).is_multiple_of(2) {
        Predicate::Strict
    } else {
        Predicate::NonStrict
    };
    let dyadic = t.is_multiple_of(2);
    let e = 1 + (rng.next_u64() % 16) as u32;
    let seq = if dyadic {
        let v = (0..n)
            .map(|_| DyadicPoint::new(rng.next_u64() & ((1u64 << e) - 1), e))
            .collect::<Result<Vec<_>>>()?;
        SequenceRecord::exact("test", None, v)?
    } else {
        iid_uniform(n, rng.next_u64())
    };
    let r = match t {
        0 | 1 => 0.0,
        _ if t + 2 >= COUNTING_INSTANCES => 0.5,
        // radii on the point grid so that boundary ties occur
        _ if t.is_multiple_of(3) => {
            (rng.next_u64() % ((1u64 << e) / 2 + 1)) as f64 / (1u64 << e) as f64
        }
        _ => 0.5 * (t as f64 / COUNTING_INSTANCES as f64) * rng.next_f64().sqrt(),
    };
    Ok((seq, n, Radius::new(r)?, pred))
}

/// 1: the sweep counter agrees with brute force on 200 random instances.
pub fn counting_oracle() -> CriterionOutcome {
    outcome(
        1,
        "counting oracle equivalence",
        (|| {
            let mut rng = RngState::new(COUNTING_SEED);
            let instances = (0..COUNTING_INSTANCES)
                .map(|t| counting_instance(&mut rng, t))
                .collect::<Result<Vec<_>>>()?;
            let mismatches = instances
                .par_iter()
                .map(|(seq, n, r, pred)| {
                    Ok(pair_count_fast(seq, *n, r, *pred)? != pair_count_brute(seq, *n, r, *pred)?)
                })
                .collect::<Result<Vec<bool>>>()?
                .into_iter()
                .filter(|&bad| bad)
                .count();
            Ok((
                mismatches == 0,
                format!("{COUNTING_INSTANCES} instances, {mismatches} mismatches"),
            ))
        })(),
    )
}

fn identity_sequences() -> Result<Vec<SequenceRecord>> {
    let n = 1 << 14;
    Ok(vec![
        equispaced(n),
        equispaced(12_345),
        kronecker_fixed(GOLDEN_FRACTION, n),
        iid_uniform(n, GAP_IDENTITY_SEED),
        construct_sequence(n, &half_schedule(), GAP_IDENTITY_SEED)?,
        construct_sequence(
            n,
            &derive_ab_covering(&log_q(64), n as u64)?,
            GAP_IDENTITY_SEED,
        )?,
    ])
}

/// 2: `sum phi = N`, `sum l*phi = 1` and `g >= N / max phi` on every profile.
pub fn gap_identities() -> CriterionOutcome {
    outcome(
        2,
        "gap profile identities",
        (|| {
            let seqs = identity_sequences()?;
            let mut checked = 0usize;
            let mut failures = Vec::new();
            for seq in &seqs {
                let len = seq.len();
                let mut cps: Vec<usize> = (0..=14)
                    .map(|k| 1usize << k)
                    .filter(|&n| n <= len)
                    .collect();
                cps.extend([3, 5, 100, 1000, 4097, 9999, len]);
                cps.sort_unstable();
                cps.dedup();
                let tol = if seq.is_exact() { 0.0 } else { DEFAULT_TOL };
                for n in cps {
                    let p = gap_profile(seq, n, tol)?;
                    checked += 1;
                    if !(p.identities_hold(BINARY64_IDENTITY_TOL) && p.row().pigeonhole_holds()) {
                        failures.push(format!("{} N={n}", seq.meta().kind));
                    }
                }
            }
            Ok((
                failures.is_empty(),
                format!(
                    "{checked} profiles over {} sequences; failures: {failures:?}",
                    seqs.len()
                ),
            ))
        })(),
    )
}

/// 3: golden-ratio Kronecker prefixes have at most three gaps.
pub fn three_gap() -> CriterionOutcome {
    outcome(
        3,
        "three gap theorem (Kronecker, golden ratio)",
        (|| {
            let seq = kronecker_fixed(GOLDEN_FRACTION, 4096);
            let rows = (2..=4096usize)
                .into_par_iter()
                .map(|n| Ok(gap_profile(&seq, n, DEFAULT_TOL)?.row()))
                .collect::<Result<Vec<_>>>()?;
            let max_g = rows.iter().map(|r| r.g).max().unwrap_or(0);
            let min_ratio = rows
                .iter()
                .map(|r| r.max_ratio)
                .fold(f64::INFINITY, f64::min);
            let bad = rows
                .iter()
                .filter(|r| r.g > 3 || r.max_ratio < 1.0 / 3.0)
                .count();
            Ok((bad == 0, format!("N = 2..4096: max g = {max_g}, min max-ratio = {min_ratio:.4}, violations = {bad}")))
        })(),
    )
}

struct GapBoundRun {
    seed: u64,
    bound_violations: Vec<String>,
    inclusion_violations: Vec<String>,
    max_g: usize,
}

fn gap_bound_runs() -> Result<Vec<GapBoundRun>> {
    let n_max = 1usize << 15;
    let q = log_q(n_max);
    let c = derive_ab_covering(&q, n_max as u64)?;
    let seeds = RngState::task_seeds(GAP_BOUND_MASTER_SEED, GAP_BOUND_SEEDS);
    seeds
        .par_iter()
        .map(|&seed| {
            let rec = construct_sequence(n_max, &c, seed)?;
            let Points::Exact(z) = rec.points() else {
                unreachable!("construction is exact")
            };
            let mut run = GapBoundRun {
                seed,
                bound_violations: Vec::new(),
                inclusion_violations: Vec::new(),
                max_g: 0,
            };
            for k in 4..=15 {
                let n = 1usize << k;
                let m = c.level_of(n as u64)?;
                let g = gap_profile(&rec, n, 0.0)?.g();
                run.max_g = run.max_g.max(g);
                let exp = c.gap_bound_exp(m)?;
                let h = q.h(m).unwrap();
                let qn = q.q(n).unwrap();
                if exp != h || g as u64 > 1u64 << exp || g as u64 > qn {
                    run.bound_violations.push(format!(
                        "n={n} m={m} g={g} 2^(m+a-b)={} 2^h={} q={qn}",
                        1u64 << exp,
                        1u64 << h
                    ));
                }
                if !grid_inclusion_holds(z, n, &c)? {
                    run.inclusion_violations.push(format!("n={n} m={m}"));
                }
            }
            Ok(run)
        })
        .collect()
}

/// 4: with the schedule derived from `q`, `g(n) <= 2^h(m) <= q(n)` for every seed.
pub fn gap_count_bound() -> CriterionOutcome {
    outcome(
        4,
        "gap-count bound of the construction",
        (|| {
            let runs = gap_bound_runs()?;
            let bad: Vec<String> = runs
                .iter()
                .flat_map(|r| {
                    r.bound_violations
                        .iter()
                        .map(move |v| format!("seed {}: {v}", r.seed))
                })
                .collect();
            let max_g = runs.iter().map(|r| r.max_g).max().unwrap_or(0);
            Ok((
                bad.is_empty(),
                format!(
                    "{} seeds x n = 2^4..2^15, max g = {max_g}; violations: {bad:?}",
                    runs.len()
                ),
            ))
        })(),
    )
}

/// 5: `B_(m-1) ⊆ {Z_1..Z_n} ⊆ A_m` on the runs of criterion 4.
pub fn grid_inclusion() -> CriterionOutcome {
    outcome(
        5,
        "grid inclusion",
        (|| {
            let runs = gap_bound_runs()?;
            let bad: Vec<String> = runs
                .iter()
                .flat_map(|r| {
                    r.inclusion_violations
                        .iter()
                        .map(move |v| format!("seed {}: {v}", r.seed))
                })
                .collect();
            Ok((
                bad.is_empty(),
                format!("{} seeds x 12 checkpoints; violations: {bad:?}", runs.len()),
            ))
        })(),
    )
}

fn expectation_rel_err(n: u64, s: f64) -> Result<f64> {
    let e = expected_f(n, s, &half_schedule(), &ScalingKind::Identity)?;
    Ok((rational::to_f64(&e) / (2.0 * s) - 1.0).abs())
}

/// 6: `E[F~] / 2s` is within 5% of 1 at `N = 2^16` and closer than at `N = 2^8`.
pub fn expectation_asymptotic() -> CriterionOutcome {
    outcome(
        6,
        "expectation oracle vs 2s",
        (|| {
            let mut ok = true;
            let mut parts = Vec::new();
            for s in [0.5, 1.0, 2.0] {
                let small = expectation_rel_err(1 << 8, s)?;
                let large = expectation_rel_err(1 << 16, s)?;
                ok &= large <= EXPECTATION_REL_TOL && large < small;
                parts.push(format!(
                    "s={s}: rel 2^8 = {small:.5}, rel 2^16 = {large:.5}"
                ));
            }
            Ok((ok, parts.join("; ")))
        })(),
    )
}

/// 7: `N * Var[F~(1)]` stays within 4x of its value at `N = 2^8`.
pub fn variance_decay() -> CriterionOutcome {
    outcome(
        7,
        "variance decay N*Var bounded",
        (|| {
            let c = half_schedule();
            let scaled = [8u32, 10, 12, 14]
                .iter()
                .map(|&k| {
                    let n = 1u64 << k;
                    Ok(n as f64
                        * rational::to_f64(&variance_f(n, 1.0, &c, &ScalingKind::Identity)?))
                })
                .collect::<Result<Vec<f64>>>()?;
            let cap = VARIANCE_GROWTH_FACTOR * scaled[0];
            let ok = scaled.iter().all(|&v| v <= cap);
            Ok((
                ok,
                format!("N*Var at 2^8,2^10,2^12,2^14 = {scaled:.5?}, cap {cap:.5}"),
            ))
        })(),
    )
}

fn mc_report() -> Result<MomentReport> {
    mc_moments(
        1 << 10,
        1.0,
        &half_schedule(),
        &ScalingKind::Identity,
        500,
        MC_SEED,
    )
}

/// 8: Monte Carlo moments agree with the exact oracles.
pub fn mc_agreement() -> CriterionOutcome {
    outcome(
        8,
        "Monte Carlo vs exact moments",
        (|| {
            let r = mc_report()?;
            let mc = r.mc.as_ref().expect("mc requested");
            let (e, v) = (r.expectation_f64(), r.variance_f64());
            let mean_ok = (mc.mean - e).abs() <= MC_SIGMAS * mc.stderr;
            let var_ok = (mc.var - v).abs() <= MC_VAR_REL_TOL * v;
            Ok((
                mean_ok && var_ok,
                format!(
                "seed {MC_SEED:#x}: mean {:.5} vs E {e:.5} (3se = {:.5}); var {:.6} vs Var {v:.6}",
                mc.mean,
                MC_SIGMAS * mc.stderr,
                mc.var
            ),
            ))
        })(),
    )
}

fn construction_realization() -> Result<SequenceRecord> {
    construct_sequence(1 << 16, &half_schedule(), CONSTRUCTION_SEED)
}

/// 9: one realization of the full construction is close to Poissonian at `N = 2^16`.
pub fn empirical_ppc() -> CriterionOutcome {
    outcome(
        9,
        "empirical PPC of the construction",
        (|| {
            let z = construction_realization()?;
            let n = 1 << 16;
            let mut ok = true;
            let mut parts = Vec::new();
            for s in [0.5, 1.0, 2.0] {
                let f = pc_statistic(
                    &z,
                    &PcQuery::new(n, s, ScalingKind::Identity, Predicate::Strict)?,
                )?;
                let tol = PPC_REL_TOL * (2.0 * s).max(1.0);
                ok &= (f - 2.0 * s).abs() <= tol;
                parts.push(format!("F({s}) = {f:.5}"));
            }
            let small = gap_profile(&z, 1 << 8, 0.0)?.max_ratio();
            let large = gap_profile(&z, n, 0.0)?.max_ratio();
            ok &= large < small;
            parts.push(format!("max-ratio 2^8 = {small:.4}, 2^16 = {large:.4}"));
            Ok((
                ok,
                format!("seed {CONSTRUCTION_SEED:#x}: {}", parts.join(", ")),
            ))
        })(),
    )
}

/// 10: the randomized criteria reproduce bit-identical outputs.
pub fn determinism() -> CriterionOutcome {
    outcome(
        10,
        "determinism",
        (|| {
            let z1 = sequence_to_string(&construction_realization()?);
            let z2 = sequence_to_string(&construction_realization()?);
            let m1 = mc_report()?.to_json().to_string();
            let m2 = mc_report()?.to_json().to_string();
            let i1 = sequence_to_string(&iid_uniform(1 << 14, GAP_IDENTITY_SEED));
            let i2 = sequence_to_string(&iid_uniform(1 << 14, GAP_IDENTITY_SEED));
            let b1: Vec<String> = gap_bound_runs()?
                .iter()
                .map(|r| format!("{}:{}", r.seed, r.max_g))
                .collect();
            let b2: Vec<String> = gap_bound_runs()?
                .iter()
                .map(|r| format!("{}:{}", r.seed, r.max_g))
                .collect();
            let ok = z1 == z2 && m1 == m2 && i1 == i2 && b1 == b2;
            Ok((
                ok,
                format!(
                    "construction {} bytes, mc report, iid stream, gap-bound runs compared",
                    z1.len()
                ),
            ))
        })(),
    )
}

pub fn run_all() -> Vec<CriterionOutcome> {
    vec![
        counting_oracle(),
        gap_identities(),
        three_gap(),
        gap_count_bound(),
        grid_inclusion(),
        expectation_asymptotic(),
        variance_decay(),
        mc_agreement(),
        empirical_ppc(),
        determinism(),
    ]
}
