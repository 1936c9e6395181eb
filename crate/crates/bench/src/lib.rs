//! Inputs shared by the benchmarks.

use ppclab::{construct_sequence, iid_uniform, ConstructionConfig, SequenceRecord};

pub const SEED: u64 = 0xBE4C;

/// A dyadic sequence of length `n` from the block construction.
pub fn dyadic_points(n: usize) -> SequenceRecord {
    let m = (n.max(2) - 1).ilog2() as usize + 1;
    construct_sequence(n, &ConstructionConfig::half(m), SEED).expect("schedule covers n")
}

pub fn f64_points(n: usize) -> SequenceRecord {
    iid_uniform(n, SEED)
}
