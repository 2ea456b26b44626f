//! Scalar types shared by the exact and floating-point evaluation paths.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Field scalar used by evaluation routines.
///
/// Implemented for `f32`, `f64` and exact `BigRational`. Routines that must be
/// exact (lattice determinants, support-set solves) take `BigRational` directly;
/// everything else is generic.
pub trait Scalar: Clone + Debug + PartialOrd + Num + Signed + Send + Sync + 'static {
    /// Whether arithmetic is exact.
    const EXACT: bool;

    fn from_int(v: i64) -> Self;
    fn from_ratio(q: &BigRational) -> Self;
    fn to_f64(&self) -> f64;

    /// Integer power; negative exponents invert.
    fn powi_exact(&self, k: i32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k.unsigned_abs() {
            acc = acc * self.clone();
        }
        if k < 0 {
            Self::one() / acc
        } else {
            acc
        }
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn from_ratio(q: &BigRational) -> Self {
        ratio_to_f64(q)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn powi_exact(&self, k: i32) -> Self {
        self.powi(k)
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;
    fn from_int(v: i64) -> Self {
        v as f32
    }
    fn from_ratio(q: &BigRational) -> Self {
        ratio_to_f64(q) as f32
    }
    fn to_f64(&self) -> f64 {
        *self as f64
    }
    fn powi_exact(&self, k: i32) -> Self {
        self.powi(k)
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_ratio(q: &BigRational) -> Self {
        q.clone()
    }
    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }
}

/// Correctly scaled conversion that survives huge numerators and denominators.
pub fn ratio_to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift = nb - db - 60;
    let (n, d) = if shift > 0 {
        (q.numer().clone(), q.denom() << (shift as usize))
    } else {
        (q.numer() << ((-shift) as usize), q.denom().clone())
    };
    let mant = (n / d).to_f64().unwrap_or(0.0);
    mant * 2f64.powi(shift as i32)
}

/// `num / den` as an exact rational.
pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Integer as an exact rational.
pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Parses `p`, `p/q` or a finite decimal such as `1.25` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::Invalid(format!("cannot parse rational `{text}`"));
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        let mut num: BigInt = digits.parse().map_err(|_| bad())?;
        if neg {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(num, den));
    }
    let p: BigInt = t.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(p))
}

/// `"p/q"` (or `"p"` for integers).
pub fn format_rational(q: &BigRational) -> String {
    q.to_string()
}

/// n! as an exact integer.
pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_forms() {
        assert_eq!(parse_rational("3/8").unwrap(), ratio(3, 8));
        assert_eq!(parse_rational("6").unwrap(), int(6));
        assert_eq!(parse_rational("1.25").unwrap(), ratio(5, 4));
        assert_eq!(parse_rational("-0.5").unwrap(), ratio(-1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn huge_ratio_converts() {
        let big = BigRational::new(num_traits::pow(BigInt::from(10), 400), num_traits::pow(BigInt::from(10), 399));
        assert!((ratio_to_f64(&big) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn generic_power() {
        assert_eq!(ratio(2, 3).powi_exact(-2), ratio(9, 4));
        assert_eq!(2.0f64.powi_exact(3), 8.0);
    }
}
