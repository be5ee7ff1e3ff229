//! Exact rationals with a distinguished `+∞`.
//!
//! Exponent bookkeeping needs equality tests, so everything here is exact.
//! `1/∞ = 0` and `1/0 = ∞`; the remaining undefined forms (`∞ − ∞`, `0·∞`)
//! panic, since they indicate a logic error in the caller.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rational {
    Finite(Ratio<i64>),
    PosInfinity,
}

pub use Rational::PosInfinity as INF;

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational::Finite(Ratio::new(num, den))
    }

    pub fn int(n: i64) -> Self {
        Rational::Finite(Ratio::from_integer(n))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    pub fn inf() -> Self {
        Rational::PosInfinity
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Rational::PosInfinity)
    }

    pub fn is_finite(&self) -> bool {
        !self.is_infinite()
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Rational::Finite(r) if *r.numer() == 0)
    }

    pub fn numer(&self) -> Option<i64> {
        match self {
            Rational::Finite(r) => Some(*r.numer()),
            Rational::PosInfinity => None,
        }
    }

    pub fn denom(&self) -> Option<i64> {
        match self {
            Rational::Finite(r) => Some(*r.denom()),
            Rational::PosInfinity => None,
        }
    }

    /// Reciprocal with `1/∞ = 0`, `1/0 = ∞`. Negative values are inverted
    /// normally.
    pub fn recip(&self) -> Self {
        match self {
            Rational::PosInfinity => Self::zero(),
            Rational::Finite(r) if *r.numer() == 0 => Rational::PosInfinity,
            Rational::Finite(r) => Rational::Finite(r.recip()),
        }
    }

    /// Hölder conjugate `p' = p/(p-1)`, with `1' = ∞` and `∞' = 1`.
    pub fn conjugate(&self) -> Self {
        (Self::one() - self.recip()).recip()
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Rational::PosInfinity => f64::INFINITY,
            Rational::Finite(r) => *r.numer() as f64 / *r.denom() as f64,
        }
    }

    pub fn abs(&self) -> Self {
        match self {
            Rational::Finite(r) if *r.numer() < 0 => Rational::Finite(-*r),
            x => *x,
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    fn finite(&self, op: &str) -> Ratio<i64> {
        match self {
            Rational::Finite(r) => *r,
            Rational::PosInfinity => panic!("undefined rational operation {op} with infinity"),
        }
    }
}

impl Default for Rational {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Self::int(n)
    }
}

impl From<Ratio<i64>> for Rational {
    fn from(r: Ratio<i64>) -> Self {
        Rational::Finite(r)
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Rational::PosInfinity, Rational::PosInfinity) => Ordering::Equal,
            (Rational::PosInfinity, _) => Ordering::Greater,
            (_, Rational::PosInfinity) => Ordering::Less,
            (Rational::Finite(a), Rational::Finite(b)) => a.cmp(b),
        }
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        match (self, rhs) {
            (Rational::Finite(a), Rational::Finite(b)) => Rational::Finite(a + b),
            _ => Rational::PosInfinity,
        }
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, rhs: Rational) -> Rational {
        match (self, rhs) {
            (Rational::Finite(a), Rational::Finite(b)) => Rational::Finite(a - b),
            (Rational::PosInfinity, Rational::Finite(_)) => Rational::PosInfinity,
            _ => panic!("undefined rational operation x - inf"),
        }
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        match (self, rhs) {
            (Rational::Finite(a), Rational::Finite(b)) => Rational::Finite(a * b),
            (Rational::PosInfinity, x) | (x, Rational::PosInfinity) => {
                let a = x.finite("mul");
                assert!(*a.numer() > 0, "undefined rational operation inf * {a}");
                Rational::PosInfinity
            }
        }
    }
}

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        self * rhs.recip()
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational::Finite(-self.finite("neg"))
    }
}

impl<'a> Add<&'a Rational> for Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        self + *rhs
    }
}

impl<'a> Sub<&'a Rational> for Rational {
    type Output = Rational;
    fn sub(self, rhs: &Rational) -> Rational {
        self - *rhs
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rational::PosInfinity => write!(f, "inf"),
            Rational::Finite(r) if *r.denom() == 1 => write!(f, "{}", r.numer()),
            Rational::Finite(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let t = s.trim();
        let bad = || Error::Parse(format!("invalid rational {s:?}"));
        if t.eq_ignore_ascii_case("inf") || t == "∞" {
            return Ok(Rational::PosInfinity);
        }
        match t.split_once('/') {
            Some((a, b)) => {
                let a: i64 = a.trim().parse().map_err(|_| bad())?;
                let b: i64 = b.trim().parse().map_err(|_| bad())?;
                if b == 0 {
                    return Err(bad());
                }
                Ok(Rational::new(a, b))
            }
            None => t.parse::<i64>().map(Rational::int).map_err(|_| bad()),
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Shorthand for `Rational::new`.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(num, den)
}
