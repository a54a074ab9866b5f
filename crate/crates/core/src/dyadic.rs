//! Dyadic rationals `m * 2^e` with directed rounding.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::ExactRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    Down,
    Up,
}

impl Round {
    pub fn flip(self) -> Self {
        match self {
            Round::Down => Round::Up,
            Round::Up => Round::Down,
        }
    }
}

/// `mant * 2^exp`. Normalized: `mant` is odd, or zero with `exp == 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

/// Floor or ceiling of `n / 2^shift` for `shift >= 0`.
fn shr_round(n: &BigInt, shift: u64, dir: Round) -> BigInt {
    if shift == 0 {
        return n.clone();
    }
    // `>>` on BigInt floors for negative values as well.
    let floor = n >> shift;
    match dir {
        Round::Down => floor,
        Round::Up => {
            if (&floor << shift) == *n {
                floor
            } else {
                floor + 1
            }
        }
    }
}

fn div_round(n: &BigInt, d: &BigInt, dir: Round) -> BigInt {
    match dir {
        Round::Down => n.div_floor(d),
        Round::Up => -((-n).div_floor(d)),
    }
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        if mant.is_zero() {
            return Self::zero();
        }
        let tz = mant.trailing_zeros().unwrap_or(0);
        if tz == 0 {
            Dyadic { mant, exp }
        } else {
            Dyadic {
                mant: mant >> tz,
                exp: exp + tz as i64,
            }
        }
    }

    pub fn zero() -> Self {
        Dyadic {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(v: i64) -> Self {
        Self::new(BigInt::from(v), 0)
    }

    pub fn from_bigint(v: BigInt) -> Self {
        Self::new(v, 0)
    }

    /// `2^e`.
    pub fn pow2(e: i64) -> Self {
        Dyadic {
            mant: BigInt::one(),
            exp: e,
        }
    }

    /// Exact conversion of a finite `f64`.
    pub fn from_f64(v: f64) -> Option<Self> {
        if !v.is_finite() {
            return None;
        }
        if v == 0.0 {
            return Some(Self::zero());
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1i64 } else { 1 };
        let exp_bits = ((bits >> 52) & 0x7ff) as i64;
        let frac = (bits & ((1u64 << 52) - 1)) as i64;
        let (m, e) = if exp_bits == 0 {
            (frac, -1074)
        } else {
            (frac | (1i64 << 52), exp_bits - 1075)
        };
        Some(Self::new(BigInt::from(sign * m), e))
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn signum(&self) -> i32 {
        crate::exact::bigint_sign(&self.mant)
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    /// Number of significant bits of the mantissa.
    pub fn bits(&self) -> u64 {
        self.mant.bits()
    }

    /// `floor(log2 |x|)` for nonzero `x`.
    pub fn ilog2(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.exp + self.mant.bits() as i64 - 1)
        }
    }

    pub fn neg(&self) -> Self {
        Dyadic {
            mant: -&self.mant,
            exp: self.exp,
        }
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            mant: self.mant.abs(),
            exp: self.exp,
        }
    }

    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        Dyadic {
            mant: self.mant.clone(),
            exp: self.exp + k,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(o.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &o.mant << (o.exp - e) as u64;
        Self::new(a + b, e)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        // Product of odd mantissas is odd, so no renormalization is needed.
        Dyadic {
            mant: &self.mant * &o.mant,
            exp: self.exp + o.exp,
        }
    }

    /// Rounds to at most `prec` significant bits in direction `dir`.
    pub fn round(&self, prec: u32, dir: Round) -> Self {
        let bits = self.mant.bits();
        if bits <= prec as u64 {
            return self.clone();
        }
        let shift = bits - prec as u64;
        Self::new(shr_round(&self.mant, shift, dir), self.exp + shift as i64)
    }

    /// Rounds to an integer multiple of `2^e` in direction `dir`.
    pub fn round_to_exp(&self, e: i64, dir: Round) -> Self {
        if self.exp >= e {
            return self.clone();
        }
        let shift = (e - self.exp) as u64;
        Self::new(shr_round(&self.mant, shift, dir), e)
    }

    pub fn floor(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << self.exp as u64
        } else {
            shr_round(&self.mant, (-self.exp) as u64, Round::Down)
        }
    }

    pub fn ceil(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << self.exp as u64
        } else {
            shr_round(&self.mant, (-self.exp) as u64, Round::Up)
        }
    }

    /// Integer nearest to `self` (ties toward +inf).
    pub fn round_nearest(&self) -> BigInt {
        self.add(&Dyadic::pow2(-1)).floor()
    }

    /// `n / d` for integers, rounded to `prec` significant bits.
    fn quotient(n: &BigInt, d: &BigInt, prec: u32, dir: Round) -> Self {
        if n.is_zero() {
            return Self::zero();
        }
        // Scale so the integer quotient carries at least `prec + 1` bits.
        let shift = prec as i64 + 2 + d.bits() as i64 - n.bits() as i64;
        let (nn, e) = if shift > 0 {
            (n << shift as u64, -shift)
        } else {
            (n.clone(), 0)
        };
        let q = div_round(&nn, d, dir);
        Self::new(q, e).round(prec, dir)
    }

    /// `self / o` rounded to `prec` bits; `None` when `o` is zero.
    pub fn div(&self, o: &Self, prec: u32, dir: Round) -> Option<Self> {
        if o.is_zero() {
            return None;
        }
        let q = Self::quotient(&self.mant, &o.mant, prec, dir);
        Some(q.mul_pow2(self.exp - o.exp))
    }

    pub fn from_rational(q: &ExactRational, prec: u32, dir: Round) -> Self {
        Self::quotient(q.numer(), q.denom(), prec, dir)
    }

    /// Rational `q` rounded to a multiple of `2^e`.
    pub fn from_rational_exp(q: &ExactRational, e: i64, dir: Round) -> Self {
        let (n, d) = if e <= 0 {
            (q.numer() << (-e) as u64, q.denom().clone())
        } else {
            (q.numer().clone(), q.denom() << e as u64)
        };
        Self::new(div_round(&n, &d, dir), e)
    }

    pub fn to_rational(&self) -> ExactRational {
        if self.exp >= 0 {
            ExactRational::from_bigint(&self.mant << self.exp as u64)
        } else {
            ExactRational::new(self.mant.clone(), BigInt::one() << (-self.exp) as u64)
                .expect("nonzero power of two")
        }
    }

    /// Square root rounded to `prec` bits; `None` for negative input.
    pub fn sqrt(&self, prec: u32, dir: Round) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        // Make the exponent even and the mantissa carry 2*prec+4 bits.
        let want = 2 * prec as i64 + 4;
        let mut shift = (want - self.mant.bits() as i64).max(0);
        if (self.exp - shift).rem_euclid(2) != 0 {
            shift += 1;
        }
        let m = &self.mant << shift as u64;
        let e = self.exp - shift;
        let r = m.sqrt();
        let r = match dir {
            Round::Down => r,
            Round::Up => {
                if &r * &r == m {
                    r
                } else {
                    r + 1
                }
            }
        };
        Some(Self::new(r, e / 2).round(prec, dir))
    }

    /// `f64` rounded in direction `dir`; saturates to infinities.
    pub fn to_f64_dir(&self, dir: Round) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let r = self.round(53, dir);
        let top = r.exp + r.mant.bits() as i64;
        if top > 1024 {
            return match (dir, r.is_negative()) {
                (Round::Up, true) => -f64::MAX,
                (Round::Up, false) => f64::INFINITY,
                (Round::Down, true) => f64::NEG_INFINITY,
                (Round::Down, false) => f64::MAX,
            };
        }
        let r = if r.exp < -1074 {
            r.round_to_exp(-1074, dir).round(53, dir)
        } else {
            r
        };
        if r.is_zero() {
            return 0.0;
        }
        let m = r.mant.to_i64().expect("53-bit mantissa") as f64;
        m * pow2_f64(r.exp)
    }

    /// Nearest-ish `f64`; advisory only.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let r = self.round(53, Round::Down);
        let top = r.exp + r.mant.bits() as i64;
        if top > 1024 {
            return if r.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            };
        }
        if r.exp < -1074 - 53 {
            return 0.0;
        }
        r.mant.to_f64().unwrap_or(f64::NAN) * pow2_f64(r.exp)
    }

    /// Decimal rendering with `digits` fractional digits (truncated toward zero).
    pub fn to_decimal(&self, digits: usize) -> String {
        let q = self.to_rational();
        let scale = BigInt::from(10).pow(digits as u32);
        let scaled = q.abs().mul(&ExactRational::from_bigint(scale)).floor();
        let s = scaled.to_string();
        let s = if s.len() <= digits {
            format!("{}{}", "0".repeat(digits + 1 - s.len()), s)
        } else {
            s
        };
        let (int, frac) = s.split_at(s.len() - digits);
        let sign = if self.is_negative() { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    }
}

/// Exact `2^e` as `f64` for `-1074 <= e <= 1023`.
fn pow2_f64(e: i64) -> f64 {
    if e >= -1022 {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else {
        // Subnormal range: split into two exact factors.
        f64::from_bits(((e + 1023 + 60) as u64) << 52) * f64::from_bits(((1023 - 60) as u64) << 52)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, o: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), o.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        self.sub(o).signum().cmp(&0)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Exact textual form `m*2^e` (or plain integer when `e >= 0`).
impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp >= 0 {
            write!(f, "{}", &self.mant << self.exp as u64)
        } else {
            write!(f, "{}*2^{}", self.mant, self.exp)
        }
    }
}

impl FromStr for Dyadic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Validation(format!("not a dyadic number: {s:?}"));
        let s = s.trim();
        match s.split_once("*2^") {
            Some((m, e)) => Ok(Dyadic::new(
                m.parse().map_err(|_| bad())?,
                e.parse().map_err(|_| bad())?,
            )),
            None => {
                let q: ExactRational = s.parse()?;
                let d = Dyadic::from_rational_exp(&q, -4096, Round::Down);
                if d.to_rational() == q {
                    Ok(d)
                } else {
                    Err(bad())
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(m: i64, e: i64) -> Dyadic {
        Dyadic::new(BigInt::from(m), e)
    }

    #[test]
    fn normalization() {
        assert_eq!(d(12, 0), d(3, 2));
        assert_eq!(d(0, 7), Dyadic::zero());
        assert_eq!(d(-8, -3), Dyadic::from_int(-1));
    }

    #[test]
    fn directed_rounding() {
        // 7 has three bits; rounding to two bits gives 6 (down) or 8 (up).
        assert_eq!(d(7, 0).round(2, Round::Down), d(6, 0));
        assert_eq!(d(7, 0).round(2, Round::Up), d(8, 0));
        assert_eq!(d(-7, 0).round(2, Round::Down), d(-8, 0));
        assert_eq!(d(-7, 0).round(2, Round::Up), d(-6, 0));
    }

    #[test]
    fn division_brackets_quotient() {
        let one = Dyadic::one();
        let three = Dyadic::from_int(3);
        let lo = one.div(&three, 40, Round::Down).unwrap();
        let hi = one.div(&three, 40, Round::Up).unwrap();
        let third = ExactRational::ratio(1, 3).unwrap();
        assert!(lo.to_rational() < third && third < hi.to_rational());
        assert!(hi.sub(&lo) <= Dyadic::pow2(-40));
    }

    #[test]
    fn f64_roundtrip() {
        for v in [0.1, -3.75, 1e-300, 5e-324, 1.7976931348623157e308] {
            let x = Dyadic::from_f64(v).unwrap();
            assert_eq!(x.to_f64_dir(Round::Down), v);
            assert_eq!(x.to_f64_dir(Round::Up), v);
        }
        let third = Dyadic::from_rational(&ExactRational::ratio(1, 3).unwrap(), 80, Round::Down);
        assert!(third.to_f64_dir(Round::Down) < third.to_f64_dir(Round::Up));
    }

    #[test]
    fn sqrt_brackets() {
        let two = Dyadic::from_int(2);
        let lo = two.sqrt(60, Round::Down).unwrap();
        let hi = two.sqrt(60, Round::Up).unwrap();
        assert!(lo.mul(&lo) <= two && hi.mul(&hi) >= two);
        assert_eq!(d(9, 4).sqrt(10, Round::Down).unwrap(), d(3, 2));
    }

    #[test]
    fn decimal_and_parse() {
        assert_eq!(d(1, -1).to_decimal(3), "0.500");
        assert_eq!(d(-5, -2).to_decimal(2), "-1.25");
        let x: Dyadic = "13*2^-5".parse().unwrap();
        assert_eq!(x, d(13, -5));
        assert_eq!(x.to_string(), "13*2^-5");
        assert_eq!("3/8".parse::<Dyadic>().unwrap(), d(3, -3));
    }
}
