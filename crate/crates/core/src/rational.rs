//! Exact rational scalars and their textual encoding.
//!
//! Every exact computation in this crate runs over [`Q`], an arbitrary
//! precision rational. Files and reports encode rationals as `"p/q"` or `"p"`.

use std::fmt;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Q = BigRational;

/// A malformed rational literal.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("ParseError: invalid rational literal {0:?}")]
pub struct ParseRationalError(pub String);

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn parse_rational(s: &str) -> Result<Q, ParseRationalError> {
    let t = s.trim();
    let err = || ParseRationalError(s.to_string());
    match t.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| err())?;
            let d: BigInt = d.trim().parse().map_err(|_| err())?;
            if d.is_zero() {
                return Err(err());
            }
            Ok(Q::new(n, d))
        }
        None => {
            let n: BigInt = t.parse().map_err(|_| err())?;
            Ok(Q::from_integer(n))
        }
    }
}

/// `"p/q"` in lowest terms, or `"p"` for integers.
pub fn format_rational(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Display adapter for rationals in the `"p/q"` encoding.
pub struct Rat<'a>(pub &'a Q);

impl fmt::Display for Rat<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(self.0))
    }
}

pub fn to_f64(x: &Q) -> f64 {
    if let Some(v) = x.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    let sign = if x.is_negative() { -1.0 } else { 1.0 };
    sign * (ln_abs(x)).exp()
}

/// Natural logarithm of a positive big integer, robust beyond the f64 range.
pub fn ln_bigint(n: &BigInt) -> f64 {
    assert!(n.sign() == Sign::Plus, "logarithm of a non-positive integer");
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top: BigInt = n >> shift;
    top.to_f64().expect("64-bit mantissa").ln() + (shift as f64) * std::f64::consts::LN_2
}

/// `ln |x|` for a non-zero rational.
pub fn ln_abs(x: &Q) -> f64 {
    assert!(!x.is_zero(), "logarithm of zero");
    ln_bigint(&x.numer().abs()) - ln_bigint(&x.denom().abs())
}

/// Integer power with a possibly negative exponent.
pub fn pow_i(x: &Q, e: i64) -> Q {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

pub fn is_integer(x: &Q) -> bool {
    x.denom().is_one()
}

/// Exact square root of a non-negative integer, if it is a perfect square.
pub fn exact_isqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    if &r * &r == *n {
        Some(r)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse_rational("3/6").unwrap(), frac(1, 2));
        assert_eq!(parse_rational(" -7 ").unwrap(), q(-7));
        assert_eq!(parse_rational("4/-8").unwrap(), frac(-1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn formats_lowest_terms() {
        assert_eq!(format_rational(&frac(6, 4)), "3/2");
        assert_eq!(format_rational(&q(-5)), "-5");
        assert_eq!(format_rational(&frac(-1, 12)), "-1/12");
    }

    #[test]
    fn log_of_huge_integers() {
        let big = BigInt::from(3u32).pow(2000);
        let expect = 2000.0 * 3f64.ln();
        assert!((ln_bigint(&big) - expect).abs() < 1e-9 * expect);
        assert!((ln_abs(&frac(1, 8)) + 8f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn perfect_squares() {
        assert_eq!(exact_isqrt(&BigInt::from(1521)), Some(BigInt::from(39)));
        assert_eq!(exact_isqrt(&BigInt::from(1522)), None);
        assert_eq!(exact_isqrt(&BigInt::from(-4)), None);
    }
}
