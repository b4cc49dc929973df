//! Exact rationals over `i64` with checked arithmetic.
//!
//! Every value is kept in lowest terms with a positive denominator, so
//! structural equality is numeric equality and values can serve as exact
//! dedup keys. Overflow surfaces as [`MeanError::ArithmeticOverflow`].

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{MeanError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Rational {
    num: i64,
    den: i64,
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rational {
    pub const ZERO: Rational = Rational { num: 0, den: 1 };
    pub const ONE: Rational = Rational { num: 1, den: 1 };

    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(MeanError::InvalidSpec("zero denominator".into()));
        }
        Self::from_wide(num as i128, den as i128)
    }

    pub fn integer(n: i64) -> Self {
        Rational { num: n, den: 1 }
    }

    fn from_wide(num: i128, den: i128) -> Result<Self> {
        debug_assert!(den != 0);
        let g = gcd(num, den).max(1);
        let (mut n, mut d) = (num / g, den / g);
        if d < 0 {
            n = -n;
            d = -d;
        }
        let num = i64::try_from(n).map_err(|_| MeanError::ArithmeticOverflow)?;
        let den = i64::try_from(d).map_err(|_| MeanError::ArithmeticOverflow)?;
        Ok(Rational { num, den })
    }

    pub fn numer(&self) -> i64 {
        self.num
    }

    pub fn denom(&self) -> i64 {
        self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn checked_add(self, rhs: Rational) -> Result<Rational> {
        let n = self.num as i128 * rhs.den as i128 + rhs.num as i128 * self.den as i128;
        let d = self.den as i128 * rhs.den as i128;
        Self::from_wide(n, d)
    }

    pub fn checked_sub(self, rhs: Rational) -> Result<Rational> {
        self.checked_add(rhs.checked_neg()?)
    }

    pub fn checked_mul(self, rhs: Rational) -> Result<Rational> {
        Self::from_wide(self.num as i128 * rhs.num as i128, self.den as i128 * rhs.den as i128)
    }

    pub fn checked_div(self, rhs: Rational) -> Result<Rational> {
        if rhs.num == 0 {
            return Err(MeanError::InvalidSpec("division by zero".into()));
        }
        Self::from_wide(self.num as i128 * rhs.den as i128, self.den as i128 * rhs.num as i128)
    }

    pub fn checked_neg(self) -> Result<Rational> {
        Ok(Rational { num: self.num.checked_neg().ok_or(MeanError::ArithmeticOverflow)?, den: self.den })
    }

    /// Exact sum of a sequence.
    pub fn sum<I: IntoIterator<Item = Rational>>(items: I) -> Result<Rational> {
        items.into_iter().try_fold(Rational::ZERO, |acc, r| acc.checked_add(r))
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::ZERO
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.num as i128 * other.den as i128).cmp(&(other.num as i128 * self.den as i128))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Rational {
    type Err = MeanError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || MeanError::InvalidSpec(format!("not a rational: {s:?}"));
        match s.trim().split_once('/') {
            Some((n, d)) => {
                let n = n.trim().parse::<i64>().map_err(|_| bad())?;
                let d = d.trim().parse::<i64>().map_err(|_| bad())?;
                Rational::new(n, d)
            }
            None => Ok(Rational::integer(s.trim().parse::<i64>().map_err(|_| bad())?)),
        }
    }
}

#[derive(Deserialize)]
struct RawRational {
    num: i64,
    den: i64,
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawRational::deserialize(d)?;
        Rational::new(raw.num, raw.den).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn normalizes_sign_and_gcd() {
        let x = r(6, -8);
        assert_eq!((x.numer(), x.denom()), (-3, 4));
        assert_eq!(r(0, -5), Rational::ZERO);
    }

    #[test]
    fn exact_arithmetic() {
        assert_eq!(r(1, 2).checked_add(r(1, 3)).unwrap(), r(5, 6));
        assert_eq!(r(1, 4).checked_sub(r(1, 2)).unwrap(), r(-1, 4));
        assert_eq!(r(2, 3).checked_mul(r(3, 4)).unwrap(), r(1, 2));
        assert_eq!(r(1, 2).checked_div(r(1, 4)).unwrap(), r(2, 1));
        assert!(r(1, 2) > r(1, 3));
        assert!(r(-1, 2) < Rational::ZERO);
    }

    #[test]
    fn overflow_is_an_error() {
        let big = Rational::integer(i64::MAX);
        assert!(matches!(big.checked_add(Rational::ONE), Err(MeanError::ArithmeticOverflow)));
        assert!(matches!(Rational::integer(i64::MIN).checked_neg(), Err(MeanError::ArithmeticOverflow)));
    }

    #[test]
    fn parses_and_serializes() {
        assert_eq!("-1/2".parse::<Rational>().unwrap(), r(-1, 2));
        assert_eq!("3".parse::<Rational>().unwrap(), Rational::integer(3));
        assert!("1/0".parse::<Rational>().is_err());
        let json = serde_json::to_string(&r(1, 4)).unwrap();
        assert_eq!(json, r#"{"num":1,"den":4}"#);
        let back: Rational = serde_json::from_str(r#"{"num":2,"den":-8}"#).unwrap();
        assert_eq!(back, r(-1, 4));
    }

    proptest! {
        #[test]
        fn lowest_terms_and_field_laws(a in -1000i64..1000, b in 1i64..1000, c in -1000i64..1000, d in 1i64..1000) {
            let x = r(a, b);
            let y = r(c, d);
            prop_assert!(x.denom() > 0);
            prop_assert_eq!(gcd(x.numer() as i128, x.denom() as i128).max(1), 1);
            let s = x.checked_add(y).unwrap();
            prop_assert_eq!(s.checked_sub(y).unwrap(), x);
            prop_assert!((s.to_f64() - (x.to_f64() + y.to_f64())).abs() < 1e-9);
        }
    }
}
