//! Reference sequences and the seeded generator shared by every randomized routine.

use crate::torus::{DyadicPoint, SequenceRecord};

/// SplitMix64. Same seed, same stream, on every platform.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RngState {
    state: u64,
}

impl RngState {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on `[0,1)`: a draw divided by `2^64`, see [`unit_f64`].
    pub fn next_f64(&mut self) -> f64 {
        unit_f64(self.next_u64())
    }

    /// Seeds for independent tasks: task `t` gets the `t`-th output of a master stream.
    pub fn task_seeds(master: u64, count: usize) -> Vec<u64> {
        let mut rng = RngState::new(master);
        (0..count).map(|_| rng.next_u64()).collect()
    }
}

/// `x / 2^64` rounded to nearest binary64. The `2^10` largest inputs would
/// round up to 1 and are mapped to the largest double below 1 instead.
fn unit_f64(x: u64) -> f64 {
    let v = x as f64 * (1.0 / 18_446_744_073_709_551_616.0);
    if v < 1.0 {
        v
    } else {
        1.0 - f64::EPSILON / 2.0
    }
}

/// `(sqrt(5) - 1) / 2` as a 64-bit fixed-point fraction.
pub const GOLDEN_FRACTION: u64 = 0x9E37_79B9_7F4A_7C15;

/// Converts the fractional part of `alpha` to a 64-bit fixed-point step.
pub fn alpha_to_fixed(alpha: f64) -> u64 {
    let frac = alpha - alpha.floor();
    // frac < 1 has at most 53 significant bits; the product is exact
    let scaled = frac * 18_446_744_073_709_551_616.0;
    if scaled >= 18_446_744_073_709_551_616.0 {
        0
    } else {
        scaled as u64
    }
}

/// `x_k = {k * alpha}` for `k = 1..n`, binary64.
///
/// The orbit is computed exactly in 64-bit fixed point, so the only error is
/// the final rounding of each point; rational `alpha` gives a periodic orbit.
pub fn kronecker(alpha: f64, n: usize) -> SequenceRecord {
    kronecker_fixed(alpha_to_fixed(alpha), n)
}

pub fn kronecker_fixed(step: u64, n: usize) -> SequenceRecord {
    let mut acc = 0u64;
    let points = (0..n)
        .map(|_| {
            acc = acc.wrapping_add(step);
            unit_f64(acc)
        })
        .collect();
    SequenceRecord::approx("kronecker", None, points).expect("fixed-point orbit lies in [0,1)")
}

/// `n` i.i.d. uniform points from SplitMix64 seeded with `seed`.
pub fn iid_uniform(n: usize, seed: u64) -> SequenceRecord {
    let mut rng = RngState::new(seed);
    let points = (0..n).map(|_| rng.next_f64()).collect();
    SequenceRecord::approx("iid", Some(seed), points).expect("uniform draws lie in [0,1)")
}

/// `k / n` for `k = 0..n`; exact when `n` is a power of two.
pub fn equispaced(n: usize) -> SequenceRecord {
    if n.is_power_of_two() && n.trailing_zeros() <= crate::torus::MAX_EXP {
        let e = n.trailing_zeros();
        let points = (0..n as u64)
            .map(|k| DyadicPoint::new(k, e).unwrap())
            .collect();
        SequenceRecord::exact("equispaced", None, points).unwrap()
    } else {
        let points = (0..n).map(|k| k as f64 / n as f64).collect();
        SequenceRecord::approx("equispaced", None, points).unwrap()
    }
}
