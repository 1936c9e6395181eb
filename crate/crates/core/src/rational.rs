//! Small helpers over `BigRational` used by the exact radius and moment code.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Every finite binary64 value is a dyadic rational; this is that rational.
pub fn from_f64(v: f64) -> Result<BigRational> {
    BigRational::from_float(v).ok_or_else(|| Error::Range(format!("{v} is not finite")))
}

pub fn from_u64(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn pow2(e: u32) -> BigInt {
    BigInt::one() << e
}

/// `floor(r)` for a nonnegative rational.
pub fn floor(r: &BigRational) -> BigInt {
    r.numer().div_floor(r.denom())
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Writes `r` as `p / 2^e` with `p` odd (or `0/2^0`); `None` when the
/// denominator is not a power of two.
pub fn dyadic_parts(r: &BigRational) -> Option<(BigInt, u32)> {
    if r.is_zero() {
        return Some((BigInt::zero(), 0));
    }
    let den = r.denom();
    let e = den.trailing_zeros()? as u32;
    if den != &pow2(e) {
        return None;
    }
    Some((r.numer().clone(), e))
}

/// Renders `value` as `"p/2^e·N⁻²"`, meaning `value = p / (2^e · N²)`, when
/// `value · N²` is dyadic; otherwise as a reduced fraction `"p/q"`.
pub fn fmt_scaled(value: &BigRational, n: u64) -> String {
    let scaled = value * from_u64(n) * from_u64(n);
    match dyadic_parts(&scaled) {
        Some((p, e)) => format!("{p}/2^{e}·N⁻²"),
        None => fmt_plain(value),
    }
}

pub fn fmt_plain(value: &BigRational) -> String {
    if value.denom().is_one() {
        value.numer().to_string()
    } else {
        format!("{}/{}", value.numer(), value.denom())
    }
}

pub fn is_nonnegative(r: &BigRational) -> bool {
    !r.is_negative()
}
