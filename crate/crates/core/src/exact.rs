//! Exact rational numbers.
//!
//! `ExactRational` is a thin newtype over `num_rational::BigRational`, which
//! keeps values in lowest terms with a positive denominator.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExactRational(BigRational);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ExactRational {
    pub fn zero() -> Self {
        ExactRational(BigRational::zero())
    }

    pub fn one() -> Self {
        ExactRational(BigRational::one())
    }

    pub fn from_int(v: i64) -> Self {
        ExactRational(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_bigint(v: BigInt) -> Self {
        ExactRational(BigRational::from_integer(v))
    }

    /// `num / den`, normalized. Fails on a zero denominator.
    pub fn new(num: BigInt, den: BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(ExactRational(BigRational::new(num, den)))
    }

    pub fn ratio(num: i64, den: i64) -> Result<Self> {
        Self::new(BigInt::from(num), BigInt::from(den))
    }

    /// Builds from the `(-1)^sign * numerator / denominator` triple.
    pub fn from_parts(negative: bool, numerator: BigInt, denominator: BigInt) -> Result<Self> {
        let q = Self::new(numerator.abs(), denominator.abs())?;
        Ok(if negative { q.neg() } else { q })
    }

    /// `(negative, numerator, denominator)` in normalized form; zero is `(false, 0, 1)`.
    pub fn parts(&self) -> (bool, BigInt, BigInt) {
        (
            self.0.is_negative(),
            self.0.numer().abs(),
            self.0.denom().clone(),
        )
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn signum(&self) -> i32 {
        if self.0.is_zero() {
            0
        } else if self.0.is_negative() {
            -1
        } else {
            1
        }
    }

    pub fn to_integer(&self) -> Option<BigInt> {
        self.0.is_integer().then(|| self.0.numer().clone())
    }

    pub fn to_i64(&self) -> Option<i64> {
        self.to_integer().and_then(|v| v.to_i64())
    }

    /// Nearest `f64`; advisory only.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn floor(&self) -> BigInt {
        self.0.numer().div_floor(self.0.denom())
    }

    pub fn ceil(&self) -> BigInt {
        -((-self.0.numer()).div_floor(self.0.denom()))
    }

    pub fn neg(&self) -> Self {
        ExactRational(-&self.0)
    }

    pub fn abs(&self) -> Self {
        ExactRational(self.0.abs())
    }

    pub fn add(&self, o: &Self) -> Self {
        ExactRational(&self.0 + &o.0)
    }

    pub fn sub(&self, o: &Self) -> Self {
        ExactRational(&self.0 - &o.0)
    }

    pub fn mul(&self, o: &Self) -> Self {
        ExactRational(&self.0 * &o.0)
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        if o.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(ExactRational(&self.0 / &o.0))
    }

    pub fn recip(&self) -> Result<Self> {
        Self::one().div(self)
    }

    /// Integer power; negative exponents require a nonzero base.
    pub fn powi(&self, e: i64) -> Result<Self> {
        if e < 0 {
            return self.recip()?.powi(-e);
        }
        let e = u32::try_from(e).map_err(|_| Error::resource("exponent too large"))?;
        Ok(ExactRational(num_traits::pow::Pow::pow(&self.0, e)))
    }

    /// Combined size of numerator and denominator in bits.
    pub fn bits(&self) -> u64 {
        self.0.numer().bits() + self.0.denom().bits()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }
}

/// Exact `a op b`.
pub fn rational_arith(a: &ExactRational, b: &ExactRational, op: ArithOp) -> Result<ExactRational> {
    Ok(match op {
        ArithOp::Add => a.add(b),
        ArithOp::Sub => a.sub(b),
        ArithOp::Mul => a.mul(b),
        ArithOp::Div => a.div(b)?,
    })
}

impl From<i64> for ExactRational {
    fn from(v: i64) -> Self {
        Self::from_int(v)
    }
}

impl From<BigInt> for ExactRational {
    fn from(v: BigInt) -> Self {
        Self::from_bigint(v)
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for ExactRational {
    type Err = Error;

    /// Accepts `a`, `-a`, `a/b`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Validation(format!("not a rational number: {s:?}"));
        match s.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| bad())?;
                let d: BigInt = d.trim().parse().map_err(|_| bad())?;
                Self::new(n, d)
            }
            None => Ok(Self::from_bigint(s.parse().map_err(|_| bad())?)),
        }
    }
}

impl PartialEq<i64> for ExactRational {
    fn eq(&self, other: &i64) -> bool {
        self.0.is_integer() && self.0.numer() == &BigInt::from(*other)
    }
}

/// Sign of a `BigInt` as -1, 0, 1.
pub(crate) fn bigint_sign(v: &BigInt) -> i32 {
    match v.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> ExactRational {
        ExactRational::ratio(n, d).unwrap()
    }

    #[test]
    fn arith_examples() {
        assert_eq!(rational_arith(&q(1, 2), &q(1, 3), ArithOp::Add).unwrap(), q(5, 6));
        assert_eq!(rational_arith(&q(2, 4), &q(1, 1), ArithOp::Mul).unwrap(), q(1, 2));
        assert_eq!(rational_arith(&q(-3, 7), &q(-3, 7), ArithOp::Div).unwrap(), q(1, 1));
        assert_eq!(
            rational_arith(&q(1, 2), &ExactRational::zero(), ArithOp::Div),
            Err(Error::DivisionByZero)
        );
    }

    #[test]
    fn normalized_parts() {
        let (neg, n, d) = q(6, -4).parts();
        assert!(neg);
        assert_eq!((n, d), (BigInt::from(3), BigInt::from(2)));
        let (neg, n, d) = ExactRational::zero().parts();
        assert!(!neg);
        assert_eq!((n, d), (BigInt::from(0), BigInt::from(1)));
    }

    #[test]
    fn parse_and_display() {
        assert_eq!("3/2".parse::<ExactRational>().unwrap(), q(3, 2));
        assert_eq!("-4".parse::<ExactRational>().unwrap(), q(-4, 1));
        assert_eq!(q(10, 4).to_string(), "5/2");
        assert!("1/0".parse::<ExactRational>().is_err());
    }

    #[test]
    fn floor_ceil() {
        assert_eq!(q(-7, 2).floor(), BigInt::from(-4));
        assert_eq!(q(-7, 2).ceil(), BigInt::from(-3));
        assert_eq!(q(7, 2).ceil(), BigInt::from(4));
    }
}
