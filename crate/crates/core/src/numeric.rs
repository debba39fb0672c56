//! Exact rationals and the extended rationals `Q ∪ {+∞}`.
//!
//! [`Rational`] keeps values that fit into `i64` numerator/denominator pairs
//! in an allocation-free representation and promotes to [`BigRational`] only
//! when an intermediate result does not fit. Both representations are kept in
//! canonical reduced form, so structural equality and hashing agree with
//! numeric equality.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    /// Reduced, `den > 0`, `num > i64::MIN`.
    Small(i64, i64),
    /// Reduced; never representable as `Small`.
    Big(BigRational),
}

/// An exact rational number in canonical form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational(Repr);

fn fits(v: i128) -> bool {
    v > i64::MIN as i128 && v <= i64::MAX as i128
}

impl Rational {
    pub fn zero() -> Self {
        Rational(Repr::Small(0, 1))
    }

    pub fn one() -> Self {
        Rational(Repr::Small(1, 1))
    }

    pub fn from_int(v: i64) -> Self {
        Rational::from_i128(v as i128, 1)
    }

    /// Panics if `den == 0`.
    pub fn new(num: i64, den: i64) -> Self {
        Rational::from_i128(num as i128, den as i128)
    }

    fn from_i128(num: i128, den: i128) -> Self {
        assert!(den != 0, "zero denominator");
        let g = num.gcd(&den);
        let (mut n, mut d) = (num / g, den / g);
        if d < 0 {
            n = -n;
            d = -d;
        }
        if fits(n) && fits(d) {
            Rational(Repr::Small(n as i64, d as i64))
        } else {
            Rational::from_big(BigRational::new(BigInt::from(n), BigInt::from(d)))
        }
    }

    /// Accepts any `BigRational` (they are always reduced) and demotes when possible.
    pub fn from_big(r: BigRational) -> Self {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) if n > i64::MIN => Rational(Repr::Small(n, d)),
            _ => Rational(Repr::Big(r)),
        }
    }

    pub fn from_bigint(v: BigInt) -> Self {
        Rational::from_big(BigRational::from_integer(v))
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(r) => r.clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, _) => BigInt::from(*n),
            Repr::Big(r) => r.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(_, d) => BigInt::from(*d),
            Repr::Big(r) => r.denom().clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }

    pub fn is_positive(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n > 0,
            Repr::Big(r) => r.is_positive(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n < 0,
            Repr::Big(r) => r.is_negative(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(r) => r.is_integer(),
        }
    }

    pub fn ceil(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, d) => BigInt::from(Integer::div_ceil(n, d)),
            Repr::Big(r) => r.ceil().to_integer(),
        }
    }

    pub fn floor(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, d) => BigInt::from(Integer::div_floor(n, d)),
            Repr::Big(r) => r.floor().to_integer(),
        }
    }

    pub fn recip(&self) -> Self {
        match &self.0 {
            Repr::Small(n, d) => Rational::from_i128(*d as i128, *n as i128),
            Repr::Big(r) => Rational::from_big(r.recip()),
        }
    }

    /// Integer power; negative exponents invert. Panics on `0^e` with `e < 0`.
    pub fn pow(&self, exp: i32) -> Self {
        let base = if exp < 0 { self.recip() } else { self.clone() };
        let mut acc = Rational::one();
        for _ in 0..exp.unsigned_abs() {
            acc = &acc * &base;
        }
        acc
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::from_int(v)
    }
}

impl<'a> Add<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        match (&self.0, &rhs.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                let (a, b, c, d) = (*a as i128, *b as i128, *c as i128, *d as i128);
                if b == d {
                    Rational::from_i128(a + c, b)
                } else {
                    Rational::from_i128(a * d + c * b, b * d)
                }
            }
            _ => Rational::from_big(self.to_big() + rhs.to_big()),
        }
    }
}

impl<'a> Sub<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn sub(self, rhs: &Rational) -> Rational {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn mul(self, rhs: &Rational) -> Rational {
        match (&self.0, &rhs.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                Rational::from_i128(*a as i128 * *c as i128, *b as i128 * *d as i128)
            }
            _ => Rational::from_big(self.to_big() * rhs.to_big()),
        }
    }
}

impl<'a> Div<&'a Rational> for &'a Rational {
    type Output = Rational;
    /// Panics on division by zero.
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero");
        self * &rhs.recip()
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        match &self.0 {
            Repr::Small(n, d) => Rational(Repr::Small(-n, *d)),
            Repr::Big(r) => Rational::from_big(-r.clone()),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => {
                (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128))
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, 1) => write!(f, "{n}"),
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Big(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Repr::Big(r) => write!(f, "{}/{}", r.numer(), r.denom()),
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
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse = |t: &str| BigInt::from_str(t.trim()).map_err(|_| Error::Parse(s.to_string()));
        match s.split_once('/') {
            Some((n, d)) => {
                let (n, d) = (parse(n)?, parse(d)?);
                if d.is_zero() {
                    return Err(Error::Parse(s.to_string()));
                }
                Ok(Rational::from_big(BigRational::new(n, d)))
            }
            None => Ok(Rational::from_bigint(parse(s)?)),
        }
    }
}

/// A value in `Q ∪ {+∞}`.
///
/// `∞` is strictly greater than every finite value. Addition is total;
/// multiplication goes through [`ExtRational::checked_mul`] because `0·∞`
/// and `c·∞` with `c < 0` have no value here.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum ExtRational {
    Finite(Rational),
    Infinity,
}

impl ExtRational {
    pub fn zero() -> Self {
        ExtRational::Finite(Rational::zero())
    }

    pub fn one() -> Self {
        ExtRational::Finite(Rational::one())
    }

    pub fn infinity() -> Self {
        ExtRational::Infinity
    }

    pub fn from_int(v: i64) -> Self {
        ExtRational::Finite(Rational::from_int(v))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        ExtRational::Finite(Rational::new(num, den))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtRational::Finite(_))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtRational::Infinity)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExtRational::Finite(r) if r.is_zero())
    }

    pub fn is_positive(&self) -> bool {
        match self {
            ExtRational::Finite(r) => r.is_positive(),
            ExtRational::Infinity => true,
        }
    }

    pub fn is_negative(&self) -> bool {
        matches!(self, ExtRational::Finite(r) if r.is_negative())
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtRational::Finite(r) => Some(r),
            ExtRational::Infinity => None,
        }
    }

    pub fn checked_mul(&self, other: &ExtRational) -> Result<ExtRational> {
        use ExtRational::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Ok(Finite(a * b)),
            (Infinity, Infinity) => Ok(Infinity),
            (Finite(c), Infinity) | (Infinity, Finite(c)) => {
                if c.is_positive() {
                    Ok(Infinity)
                } else {
                    Err(Error::Arithmetic(format!("{c} * inf is undefined")))
                }
            }
        }
    }

    /// Multiplication by a finite scalar.
    pub fn scale(&self, c: &Rational) -> Result<ExtRational> {
        self.checked_mul(&ExtRational::Finite(c.clone()))
    }

    pub fn checked_sub(&self, other: &ExtRational) -> Result<ExtRational> {
        use ExtRational::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Ok(Finite(a - b)),
            (Infinity, Finite(_)) => Ok(Infinity),
            (_, Infinity) => Err(Error::Arithmetic("subtraction of inf".into())),
        }
    }

    /// `self / other` for finite nonzero `other`.
    pub fn div_finite(&self, other: &Rational) -> Result<ExtRational> {
        if other.is_zero() {
            return Err(Error::Arithmetic("division by zero".into()));
        }
        self.scale(&other.recip())
    }
}

impl Default for ExtRational {
    fn default() -> Self {
        ExtRational::zero()
    }
}

impl From<Rational> for ExtRational {
    fn from(r: Rational) -> Self {
        ExtRational::Finite(r)
    }
}

impl From<i64> for ExtRational {
    fn from(v: i64) -> Self {
        ExtRational::from_int(v)
    }
}

impl<'a> Add<&'a ExtRational> for &'a ExtRational {
    type Output = ExtRational;
    fn add(self, rhs: &ExtRational) -> ExtRational {
        match (self, rhs) {
            (ExtRational::Finite(a), ExtRational::Finite(b)) => ExtRational::Finite(a + b),
            _ => ExtRational::Infinity,
        }
    }
}

impl Add for ExtRational {
    type Output = ExtRational;
    fn add(self, rhs: ExtRational) -> ExtRational {
        &self + &rhs
    }
}

impl AddAssign<&ExtRational> for ExtRational {
    fn add_assign(&mut self, rhs: &ExtRational) {
        if let (ExtRational::Finite(a), ExtRational::Finite(b)) = (&*self, rhs) {
            *self = ExtRational::Finite(a + b);
        } else {
            *self = ExtRational::Infinity;
        }
    }
}

impl AddAssign for ExtRational {
    fn add_assign(&mut self, rhs: ExtRational) {
        *self += &rhs;
    }
}

impl Sum for ExtRational {
    fn sum<I: Iterator<Item = ExtRational>>(iter: I) -> Self {
        let mut acc = ExtRational::zero();
        for v in iter {
            acc += &v;
            if acc.is_infinite() {
                break;
            }
        }
        acc
    }
}

impl<'a> Sum<&'a ExtRational> for ExtRational {
    fn sum<I: Iterator<Item = &'a ExtRational>>(iter: I) -> Self {
        let mut acc = ExtRational::zero();
        for v in iter {
            acc += v;
            if acc.is_infinite() {
                break;
            }
        }
        acc
    }
}

impl Ord for ExtRational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtRational::Finite(a), ExtRational::Finite(b)) => a.cmp(b),
            (ExtRational::Finite(_), ExtRational::Infinity) => Ordering::Less,
            (ExtRational::Infinity, ExtRational::Finite(_)) => Ordering::Greater,
            (ExtRational::Infinity, ExtRational::Infinity) => Ordering::Equal,
        }
    }
}

impl PartialOrd for ExtRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::Finite(r) => fmt::Display::fmt(r, f),
            ExtRational::Infinity => f.write_str("inf"),
        }
    }
}

impl fmt::Debug for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ExtRational {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "+inf" | "∞" => Ok(ExtRational::Infinity),
            t => Ok(ExtRational::Finite(t.parse()?)),
        }
    }
}

impl Serialize for ExtRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExtRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Str(String),
            Int(i64),
        }
        match Raw::deserialize(d)? {
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Int(v) => Ok(ExtRational::from_int(v)),
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match ExtRational::deserialize(d)? {
            ExtRational::Finite(r) => Ok(r),
            ExtRational::Infinity => Err(serde::de::Error::custom("expected a finite value")),
        }
    }
}

/// `n^exp` with a floor on fractional exponents, as an exact big integer.
pub fn int_pow(n: usize, exp: u64) -> BigInt {
    num_traits::pow(BigInt::from(n), exp as usize)
}

/// Integer ceiling of a nonnegative rational as `u64`, if it fits.
pub fn ceil_u64(r: &Rational) -> Option<u64> {
    r.ceil().to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn canonical_form() {
        assert_eq!(r(2, 4), r(1, 2));
        assert_eq!(r(3, -6), r(-1, 2));
        assert_eq!(r(0, -5), Rational::zero());
        assert_eq!(r(6, 3).to_string(), "2");
        assert_eq!(r(-6, 4).to_string(), "-3/2");
    }

    #[test]
    fn promotes_and_demotes() {
        let big = Rational::from_int(i64::MAX);
        let sq = &big * &big;
        assert!(matches!(sq.0, Repr::Big(_)));
        let back = &sq / &big;
        assert!(matches!(back.0, Repr::Small(_, _)));
        assert_eq!(back, big);
    }

    #[test]
    fn infinity_rules() {
        let inf = ExtRational::infinity();
        let two = ExtRational::from_int(2);
        assert_eq!(&inf + &two, inf);
        assert!(inf > ExtRational::from_int(i64::MAX));
        assert_eq!(two.checked_mul(&inf).unwrap(), inf);
        assert!(ExtRational::zero().checked_mul(&inf).is_err());
        assert!(ExtRational::from_int(-1).checked_mul(&inf).is_err());
        assert!(two.checked_sub(&inf).is_err());
    }

    #[test]
    fn parses() {
        assert_eq!("3/2".parse::<ExtRational>().unwrap(), ExtRational::ratio(3, 2));
        assert_eq!("inf".parse::<ExtRational>().unwrap(), ExtRational::Infinity);
        assert_eq!("-4".parse::<ExtRational>().unwrap(), ExtRational::from_int(-4));
        assert!("1/0".parse::<ExtRational>().is_err());
        assert!("x".parse::<ExtRational>().is_err());
        let huge: Rational = "123456789012345678901234567890/17".parse().unwrap();
        assert_eq!(huge.to_string(), "123456789012345678901234567890/17");
    }

    fn small() -> impl Strategy<Value = Rational> {
        (-1_000_000_000i64..1_000_000_000, 1i64..1_000_000).prop_map(|(n, d)| r(n, d))
    }

    fn wide() -> impl Strategy<Value = Rational> {
        prop_oneof![
            small(),
            (any::<i64>(), 1i64..i64::MAX).prop_map(|(n, d)| Rational::from_i128(n as i128, d as i128)),
        ]
    }

    fn is_canonical(x: &Rational) -> bool {
        let b = x.to_big();
        let reduced = BigRational::new(b.numer().clone(), b.denom().clone());
        reduced == b && b.denom().is_positive() && matches!(x.0, Repr::Small(..)) == Rational::from_big(b).is_small()
    }

    impl Rational {
        fn is_small(&self) -> bool {
            matches!(self.0, Repr::Small(..))
        }
    }

    proptest! {
        #[test]
        fn field_laws(a in wide(), b in wide(), c in wide()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            for v in [&a + &b, &a * &b, &a - &c] {
                prop_assert!(is_canonical(&v));
            }
        }

        #[test]
        fn ordering_matches_big(a in wide(), b in wide()) {
            prop_assert_eq!(a.cmp(&b), a.to_big().cmp(&b.to_big()));
        }

        #[test]
        fn display_round_trips(a in wide()) {
            prop_assert_eq!(a.to_string().parse::<Rational>().unwrap(), a);
        }
    }
}
