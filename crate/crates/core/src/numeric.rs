//! Exact rational scalars and real intervals with open/closed endpoints.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::Error;

/// An exact signed rational number kept in lowest terms with a positive
/// denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Result<Self, Error> {
        let denom = denom.into();
        if denom.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(Rational(BigRational::new(numer.into(), denom)))
    }

    /// Panicking shorthand for literals in tests and fixtures.
    pub fn frac(numer: i64, denom: i64) -> Self {
        Self::new(numer, denom).expect("nonzero denominator")
    }

    pub fn from_int(value: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(value.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    pub fn pow(&self, exp: u32) -> Self {
        Rational(num_traits::pow(self.0.clone(), exp as usize))
    }

    /// Largest integer not exceeding `self`.
    pub fn floor(&self) -> BigInt {
        self.0.numer().div_floor(self.0.denom())
    }

    pub fn midpoint(&self, other: &Self) -> Self {
        (self + other) / Rational::from_int(2)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Decimal rendering rounded half away from zero to `digits` places.
    /// Display only; never fed back into computation.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scale = num_traits::pow(BigInt::from(10), digits);
        let scaled = self.0.abs() * BigRational::from_integer(scale.clone());
        let rounded = (scaled + BigRational::new(BigInt::one(), BigInt::from(2))).floor();
        let int = rounded.to_integer();
        let (whole, frac) = int.div_rem(&scale);
        let sign = if self.is_negative() && !int.is_zero() { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{whole}")
        } else {
            format!("{sign}{whole}.{:0>width$}", frac.to_string(), width = digits)
        }
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_int(v)
    }
}

impl From<BigInt> for Rational {
    fn from(v: BigInt) -> Self {
        Rational::from_int(v)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        let parse_int = |part: &str, what: &str| -> Result<BigInt, Error> {
            part.trim()
                .parse::<BigInt>()
                .map_err(|_| Error::Parse(format!("invalid {what} in rational {s:?}")))
        };
        match s.split_once('/') {
            Some((p, q)) => {
                let q = q.trim();
                if q.starts_with(['+', '-']) {
                    return Err(Error::Parse(format!("signed denominator in rational {s:?}")));
                }
                let denom = parse_int(q, "denominator")?;
                if denom.is_zero() {
                    return Err(Error::Parse(format!("zero denominator in rational {s:?}")));
                }
                Rational::new(parse_int(p, "numerator")?, denom)
            }
            None => Ok(Rational::from_int(parse_int(s, "integer")?)),
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational($trait::$method(&self.0, &rhs.0))
            }
        }
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($trait::$method(self.0, rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational($trait::$method(self.0, &rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational($trait::$method(&self.0, rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

/// Upper endpoint of an interval on the half-line: finite or `+∞`.
///
/// `Finite` is declared first so the derived order puts `PlusInfinity` above
/// every rational.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ExtendedBound {
    Finite(Rational),
    PlusInfinity,
}

impl ExtendedBound {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtendedBound::Finite(r) => Some(r),
            ExtendedBound::PlusInfinity => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedBound::PlusInfinity)
    }

    pub fn cmp_rational(&self, t: &Rational) -> Ordering {
        match self {
            ExtendedBound::Finite(r) => r.cmp(t),
            ExtendedBound::PlusInfinity => Ordering::Greater,
        }
    }
}

impl From<Rational> for ExtendedBound {
    fn from(r: Rational) -> Self {
        ExtendedBound::Finite(r)
    }
}

impl fmt::Display for ExtendedBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedBound::Finite(r) => write!(f, "{r}"),
            ExtendedBound::PlusInfinity => f.write_str("∞"),
        }
    }
}

impl Serialize for ExtendedBound {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtendedBound::Finite(r) => r.serialize(serializer),
            ExtendedBound::PlusInfinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedBound {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        match s.trim() {
            "inf" | "+inf" | "∞" | "infinity" => Ok(ExtendedBound::PlusInfinity),
            other => other.parse().map(ExtendedBound::Finite).map_err(serde::de::Error::custom),
        }
    }
}

/// A nonempty real interval with a finite rational lower endpoint.
///
/// `lo == hi` with both ends closed is a singleton; a ray has `hi = +∞` and
/// an open upper end.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawInterval")]
pub struct Interval {
    lo: Rational,
    hi: ExtendedBound,
    lo_closed: bool,
    hi_closed: bool,
}

#[derive(Deserialize)]
struct RawInterval {
    lo: Rational,
    hi: ExtendedBound,
    lo_closed: bool,
    hi_closed: bool,
}

impl TryFrom<RawInterval> for Interval {
    type Error = Error;
    fn try_from(raw: RawInterval) -> Result<Self, Error> {
        Interval::new(raw.lo, raw.hi, raw.lo_closed, raw.hi_closed)
    }
}

impl Interval {
    pub fn new(
        lo: Rational,
        hi: impl Into<ExtendedBound>,
        lo_closed: bool,
        hi_closed: bool,
    ) -> Result<Self, Error> {
        let hi = hi.into();
        match &hi {
            ExtendedBound::PlusInfinity if hi_closed => {
                return Err(Error::InvalidInterval("a ray cannot be closed at +∞".into()))
            }
            ExtendedBound::Finite(h) if *h < lo => {
                return Err(Error::InvalidInterval(format!("empty interval: {lo} > {h}")))
            }
            ExtendedBound::Finite(h) if *h == lo && !(lo_closed && hi_closed) => {
                return Err(Error::InvalidInterval(format!(
                    "degenerate interval at {lo} must be closed on both sides"
                )))
            }
            _ => {}
        }
        Ok(Interval { lo, hi, lo_closed, hi_closed })
    }

    pub fn singleton(t: Rational) -> Self {
        Interval { lo: t.clone(), hi: ExtendedBound::Finite(t), lo_closed: true, hi_closed: true }
    }

    pub fn closed(lo: Rational, hi: Rational) -> Result<Self, Error> {
        Self::new(lo, hi, true, true)
    }

    pub fn open(lo: Rational, hi: Rational) -> Result<Self, Error> {
        Self::new(lo, hi, false, false)
    }

    pub fn open_ray(lo: Rational) -> Self {
        Interval { lo, hi: ExtendedBound::PlusInfinity, lo_closed: false, hi_closed: false }
    }

    pub fn closed_ray(lo: Rational) -> Self {
        Interval { lo, hi: ExtendedBound::PlusInfinity, lo_closed: true, hi_closed: false }
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &ExtendedBound {
        &self.hi
    }

    pub fn lo_closed(&self) -> bool {
        self.lo_closed
    }

    pub fn hi_closed(&self) -> bool {
        self.hi_closed
    }

    pub fn is_singleton(&self) -> bool {
        self.hi.finite() == Some(&self.lo)
    }

    pub fn is_unbounded(&self) -> bool {
        self.hi.is_infinite()
    }

    pub fn contains(&self, t: &Rational) -> bool {
        let above_lo = match self.lo.cmp(t) {
            Ordering::Less => true,
            Ordering::Equal => self.lo_closed,
            Ordering::Greater => false,
        };
        let below_hi = match self.hi.cmp_rational(t) {
            Ordering::Greater => true,
            Ordering::Equal => self.hi_closed,
            Ordering::Less => false,
        };
        above_lo && below_hi
    }

    /// True iff no rational lies in both intervals.
    pub fn is_disjoint(&self, other: &Interval) -> bool {
        let (lo, lo_closed) = match self.lo.cmp(&other.lo) {
            Ordering::Greater => (&self.lo, self.lo_closed),
            Ordering::Less => (&other.lo, other.lo_closed),
            Ordering::Equal => (&self.lo, self.lo_closed && other.lo_closed),
        };
        let (hi, hi_closed) = match self.hi.cmp(&other.hi) {
            Ordering::Less => (&self.hi, self.hi_closed),
            Ordering::Greater => (&other.hi, other.hi_closed),
            Ordering::Equal => (&self.hi, self.hi_closed && other.hi_closed),
        };
        match hi.cmp_rational(lo) {
            Ordering::Greater => false,
            Ordering::Equal => !(lo_closed && hi_closed),
            Ordering::Less => true,
        }
    }

    /// A rational strictly inside the interval, or the point itself for a
    /// singleton.
    pub fn interior_point(&self) -> Rational {
        match &self.hi {
            ExtendedBound::Finite(h) => self.lo.midpoint(h),
            ExtendedBound::PlusInfinity => &self.lo + Rational::one(),
        }
    }
}

pub fn interval_contains(i: &Interval, t: &Rational) -> bool {
    i.contains(t)
}

pub fn intervals_disjoint(i: &Interval, j: &Interval) -> bool {
    i.is_disjoint(j)
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_singleton() {
            return write!(f, "{{{}}}", self.lo);
        }
        let open = if self.lo_closed { '[' } else { '(' };
        let close = if self.hi_closed { ']' } else { ')' };
        write!(f, "{open}{},{}{close}", self.lo, self.hi)
    }
}
