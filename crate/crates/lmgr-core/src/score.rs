//! Exact rational scores.
//!
//! Recognition scores are ratios of small integer counts. Keeping them as
//! arbitrary-precision rationals makes comparisons and argmax ties exact;
//! floats only appear at the reporting boundary.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

pub type Score = BigRational;

/// `n / d` as an exact rational. Panics if `d == 0`; callers decide how an
/// empty denominator is defined for their metric.
pub fn ratio(n: u64, d: u64) -> Score {
    assert!(d != 0, "score denominator must be nonzero");
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn zero() -> Score {
    BigRational::from_integer(BigInt::from(0))
}

pub fn one() -> Score {
    BigRational::from_integer(BigInt::from(1))
}

/// Lossy conversion for reporting. Exact comparisons must use the rational.
pub fn to_f64(s: &Score) -> f64 {
    s.to_f64().expect("rational outside f64 range")
}
