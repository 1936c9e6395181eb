//! Poissonian pair correlations on the torus `[0,1)`.
//!
//! The crate provides exact (dyadic) and binary64 point representations,
//! pair-correlation counting with a brute-force oracle and an `O(N log N)`
//! sweep, gap profiles, reference sequences (Kronecker, i.i.d. uniform,
//! equispaced), the randomized block construction interleaving random dyadic
//! samples with deterministic dyadic grids, and exact moment oracles for the
//! random component together with a Monte Carlo harness.

pub mod acceptance;
pub mod construction;
pub mod error;
pub mod gaps;
pub mod generators;
pub mod io;
pub mod oracles;
pub mod pair_correlation;
pub mod rational;
pub mod torus;

pub use construction::{
    block_schedule, construct_sequence, derive_ab, derive_ab_covering, derive_ab_with_blocks,
    deterministic_block, validate_config, BlockDescriptor, ConstructionConfig, QSpec,
    ScheduleSource, Validation,
};
pub use error::{Error, Result};
pub use gaps::{gap_profile, gap_series, GapLengths, GapProfile, GapRow};
pub use generators::{equispaced, iid_uniform, kronecker, RngState};
pub use oracles::{block_index, expected_f, gamma_k, mc_moments, variance_f, MomentReport};
pub use pair_correlation::{
    pair_count_brute, pair_count_fast, pc_curve, pc_statistic, PcQuery, Predicate, Radius,
    ScalingKind,
};
pub use torus::{
    arc_gap, torus_distance, DyadicPoint, Points, SequenceMeta, SequenceRecord, TorusPoint,
};
