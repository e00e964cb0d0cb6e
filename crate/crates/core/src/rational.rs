//! Exact rationals, always in lowest terms, rendered as `<num>/<den>`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// 2^k for any integer k.
pub fn pow2(k: i64) -> Rational {
    let p = BigInt::one() << k.unsigned_abs() as usize;
    if k >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

/// 2^(-k), the weight of an integer exponent.
pub fn weight_of_exponent(k: i64) -> Rational {
    pow2(-k)
}

/// Canonical rendering: numerator and denominator, even for integers.
pub fn render(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Accepts `n/d`, `n`, or `-n/d`. Result is reduced.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = |m: &str| Error::Parse {
        line: 0,
        msg: format!("{m}: {s:?}"),
    };
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = n.parse().map_err(|_| bad("invalid numerator"))?;
    let den: BigInt = d.parse().map_err(|_| bad("invalid denominator"))?;
    if den.is_zero() {
        return Err(bad("zero denominator"));
    }
    Ok(Rational::new(num, den))
}

/// Largest integer ≤ r.
pub fn floor(r: &Rational) -> BigInt {
    r.numer().div_floor(r.denom())
}

pub fn to_i64(n: &BigInt) -> Option<i64> {
    i64::try_from(n).ok()
}

/// If r = 2^(-k) exactly, returns k.
pub fn exponent_of(r: &Rational) -> Option<i64> {
    if !r.is_positive() {
        return None;
    }
    let (n, d) = (r.numer(), r.denom());
    let is_pow2 = |x: &BigInt| x.is_positive() && (x & (x - BigInt::one())).is_zero();
    if n.is_one() && is_pow2(d) {
        Some(d.bits() as i64 - 1)
    } else if d.is_one() && is_pow2(n) {
        Some(-(n.bits() as i64 - 1))
    } else {
        None
    }
}
