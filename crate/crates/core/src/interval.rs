//! Interval arithmetic with two interchangeable backends.
//!
//! [`F64Iv`] rounds outward with `next_up`/`next_down` and is the fast path.
//! [`DyadicIv`] keeps arbitrary-precision dyadic endpoints and is used when
//! the requested width is beyond what doubles can certify.

use std::fmt;
use std::sync::{Mutex, OnceLock};
use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::dyadic::{Dyadic, Round};
use crate::error::{Error, Result};
use crate::exact::ExactRational;

/// Certified interval `[lo, hi]` with dyadic endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "EnclosureRepr", into = "EnclosureRepr")]
pub struct Enclosure {
    lo: Dyadic,
    hi: Dyadic,
}

#[derive(Serialize, Deserialize)]
struct EnclosureRepr {
    lo: String,
    hi: String,
}

impl TryFrom<EnclosureRepr> for Enclosure {
    type Error = Error;
    fn try_from(r: EnclosureRepr) -> Result<Self> {
        Enclosure::new(r.lo.parse()?, r.hi.parse()?)
    }
}

impl From<Enclosure> for EnclosureRepr {
    fn from(e: Enclosure) -> Self {
        EnclosureRepr {
            lo: e.lo.to_string(),
            hi: e.hi.to_string(),
        }
    }
}

impl Enclosure {
    pub fn new(lo: Dyadic, hi: Dyadic) -> Result<Self> {
        if lo > hi {
            return Err(Error::Validation(format!("empty enclosure [{lo}, {hi}]")));
        }
        Ok(Enclosure { lo, hi })
    }

    pub fn point(v: Dyadic) -> Self {
        Enclosure {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn zero() -> Self {
        Self::point(Dyadic::zero())
    }

    /// Tightest dyadic enclosure of `q` at `prec` bits.
    pub fn from_rational(q: &ExactRational, prec: u32) -> Self {
        Enclosure {
            lo: Dyadic::from_rational(q, prec, Round::Down),
            hi: Dyadic::from_rational(q, prec, Round::Up),
        }
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn width(&self) -> Dyadic {
        self.hi.sub(&self.lo)
    }

    pub fn mid(&self) -> Dyadic {
        self.lo.add(&self.hi).mul_pow2(-1)
    }

    /// `true` when `width <= 2^e`.
    pub fn width_at_most(&self, e: i64) -> bool {
        self.width() <= Dyadic::pow2(e)
    }

    pub fn contains(&self, v: &Dyadic) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn contains_rational(&self, q: &ExactRational) -> bool {
        self.lo.to_rational() <= *q && *q <= self.hi.to_rational()
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn subset_of(&self, o: &Enclosure) -> bool {
        o.lo <= self.lo && self.hi <= o.hi
    }

    pub fn hull(&self, o: &Enclosure) -> Enclosure {
        Enclosure {
            lo: self.lo.clone().min(o.lo.clone()),
            hi: self.hi.clone().max(o.hi.clone()),
        }
    }

    pub fn intersect(&self, o: &Enclosure) -> Option<Enclosure> {
        let lo = self.lo.clone().max(o.lo.clone());
        let hi = self.hi.clone().min(o.hi.clone());
        (lo <= hi).then_some(Enclosure { lo, hi })
    }

    /// `[lo - r, hi + r]` for `r >= 0`.
    pub fn widen(&self, r: &Dyadic) -> Enclosure {
        let r = r.abs();
        Enclosure {
            lo: self.lo.sub(&r),
            hi: self.hi.add(&r),
        }
    }

    pub fn neg(&self) -> Enclosure {
        Enclosure {
            lo: self.hi.neg(),
            hi: self.lo.neg(),
        }
    }

    pub fn add(&self, o: &Enclosure) -> Enclosure {
        Enclosure {
            lo: self.lo.add(&o.lo),
            hi: self.hi.add(&o.hi),
        }
    }

    /// Exact product of two enclosures.
    pub fn mul(&self, o: &Enclosure) -> Enclosure {
        let c = [
            self.lo.mul(&o.lo),
            self.lo.mul(&o.hi),
            self.hi.mul(&o.lo),
            self.hi.mul(&o.hi),
        ];
        let lo = c.iter().min().cloned().unwrap_or_else(Dyadic::zero);
        let hi = c.iter().max().cloned().unwrap_or_else(Dyadic::zero);
        Enclosure { lo, hi }
    }

    /// Outward rounding of both endpoints to `prec` bits.
    pub fn round_out(&self, prec: u32) -> Enclosure {
        Enclosure {
            lo: self.lo.round(prec, Round::Down),
            hi: self.hi.round(prec, Round::Up),
        }
    }

    pub fn abs(&self) -> Enclosure {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            self.neg()
        } else {
            Enclosure {
                lo: Dyadic::zero(),
                hi: self.lo.abs().max(self.hi.clone()),
            }
        }
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64_dir(Round::Down)
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64_dir(Round::Up)
    }

    /// Advisory midpoint as `f64`.
    pub fn to_f64(&self) -> f64 {
        self.mid().to_f64()
    }

    /// Decimal rendering `[lo, hi]` with `digits` fractional digits (advisory).
    pub fn to_decimal(&self, digits: usize) -> String {
        let (lo, hi) = self.decimal_bounds(digits);
        format!("[{lo}, {hi}]")
    }

    /// Endpoints as decimals rounded outward to `digits` places.
    pub fn decimal_bounds(&self, digits: usize) -> (String, String) {
        (dec_floor(&self.lo, digits), dec_ceil(&self.hi, digits))
    }
}

fn dec_floor(d: &Dyadic, digits: usize) -> String {
    let scale = ExactRational::from_bigint(BigInt::from(10).pow(digits as u32));
    let v = d.to_rational().mul(&scale).floor();
    render_scaled(v, digits)
}

fn dec_ceil(d: &Dyadic, digits: usize) -> String {
    let scale = ExactRational::from_bigint(BigInt::from(10).pow(digits as u32));
    let v = d.to_rational().mul(&scale).ceil();
    render_scaled(v, digits)
}

fn render_scaled(v: BigInt, digits: usize) -> String {
    let neg = v.is_negative();
    let s = v.abs().to_string();
    let s = if s.len() <= digits {
        format!("{}{}", "0".repeat(digits + 1 - s.len()), s)
    } else {
        s
    };
    let (i, f) = s.split_at(s.len() - digits);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{i}")
    } else {
        format!("{sign}{i}.{f}")
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Interval arithmetic backend.
///
/// All operations are outward rounded: the true result of the real
/// operation on any members of the operands lies in the returned interval.
pub trait Arith: Clone + fmt::Debug + Send + Sync + 'static {
    type Ctx: Copy + fmt::Debug + Send + Sync;

    fn ctx(&self) -> Self::Ctx;
    /// Working precision in bits.
    fn precision(ctx: Self::Ctx) -> u32;

    fn from_i64(ctx: Self::Ctx, v: i64) -> Self;
    fn from_dyadic(ctx: Self::Ctx, v: &Dyadic) -> Self;
    fn from_bounds(ctx: Self::Ctx, lo: &Dyadic, hi: &Dyadic) -> Self;
    fn from_rational(ctx: Self::Ctx, q: &ExactRational) -> Self;
    fn pi(ctx: Self::Ctx) -> Self;
    fn ln2(ctx: Self::Ctx) -> Self;

    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// `None` when the divisor contains zero.
    fn div(&self, o: &Self) -> Option<Self>;
    fn mul_pow2(&self, k: i64) -> Self;
    fn hull(&self, o: &Self) -> Self;
    fn intersect(&self, o: &Self) -> Option<Self>;
    fn abs(&self) -> Self;
    fn sqr(&self) -> Self;
    /// `None` when the interval is entirely negative.
    fn sqrt(&self) -> Option<Self>;

    fn lo(&self) -> Dyadic;
    fn hi(&self) -> Dyadic;
    fn lo_f64(&self) -> f64;
    fn hi_f64(&self) -> f64;
    fn is_finite(&self) -> bool;
    fn is_point(&self) -> bool;
    /// A point interval inside `self`.
    fn mid(&self) -> Self;

    /// Interval `[lo, hi]` from finite `f64` bounds.
    fn from_f64_bounds(ctx: Self::Ctx, lo: f64, hi: f64) -> Self {
        let l = Dyadic::from_f64(lo).expect("finite bound");
        let h = Dyadic::from_f64(hi).expect("finite bound");
        Self::from_bounds(ctx, &l, &h)
    }

    fn from_f64(ctx: Self::Ctx, x: f64) -> Self {
        Self::from_f64_bounds(ctx, x, x)
    }

    fn from_enclosure(ctx: Self::Ctx, e: &Enclosure) -> Self {
        Self::from_bounds(ctx, e.lo(), e.hi())
    }

    fn zero(ctx: Self::Ctx) -> Self {
        Self::from_i64(ctx, 0)
    }

    fn one(ctx: Self::Ctx) -> Self {
        Self::from_i64(ctx, 1)
    }

    fn mul_i64(&self, v: i64) -> Self {
        self.mul(&Self::from_i64(self.ctx(), v))
    }

    fn recip(&self) -> Option<Self> {
        Self::one(self.ctx()).div(self)
    }

    fn contains_zero(&self) -> bool {
        self.lo_f64() <= 0.0 && self.hi_f64() >= 0.0 && {
            !self.lo().is_positive() && !self.hi().is_negative()
        }
    }

    /// Strictly positive.
    fn is_pos(&self) -> bool {
        self.lo_f64() > 0.0 || (self.is_finite() && self.lo().is_positive())
    }

    /// Strictly negative.
    fn is_neg(&self) -> bool {
        self.hi_f64() < 0.0 || (self.is_finite() && self.hi().is_negative())
    }

    /// Interval `[-1, 1] * |r|_hi` added to `self`.
    fn inflate(&self, r: &Self) -> Self {
        let m = r.abs();
        let sym = m.neg().hull(&m);
        self.add(&sym)
    }

    /// Upper bound for the width, as `f64`.
    fn width_f64(&self) -> f64 {
        let w = self.hi_f64() - self.lo_f64();
        if w.is_finite() {
            w.next_up()
        } else {
            f64::INFINITY
        }
    }

    /// Half the width as an interval (upper bound on the radius).
    fn radius(&self) -> Self {
        let w = Self::from_dyadic(self.ctx(), &self.hi().sub(&self.lo()));
        w.mul_pow2(-1)
    }

    fn max(&self, o: &Self) -> Self {
        let lo = self.lo().max(o.lo());
        let hi = self.hi().max(o.hi());
        Self::from_bounds(self.ctx(), &lo, &hi)
    }

    fn min(&self, o: &Self) -> Self {
        let lo = self.lo().min(o.lo());
        let hi = self.hi().min(o.hi());
        Self::from_bounds(self.ctx(), &lo, &hi)
    }

    fn to_enclosure(&self) -> Option<Enclosure> {
        if !self.is_finite() {
            return None;
        }
        Enclosure::new(self.lo(), self.hi()).ok()
    }

    /// Integer power by repeated squaring.
    fn powi(&self, e: u32) -> Self {
        let mut acc = Self::one(self.ctx());
        let mut base = self.clone();
        let mut e = e;
        let mut first = true;
        while e > 0 {
            if e & 1 == 1 {
                acc = if first { base.clone() } else { acc.mul(&base) };
                first = false;
            }
            e >>= 1;
            if e > 0 {
                base = base.sqr();
            }
        }
        acc
    }
}

/// Outward-rounded `f64` interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct F64Iv {
    lo: f64,
    hi: f64,
}

impl F64Iv {
    pub fn new(lo: f64, hi: f64) -> Self {
        if lo.is_nan() || hi.is_nan() {
            F64Iv {
                lo: f64::NEG_INFINITY,
                hi: f64::INFINITY,
            }
        } else {
            F64Iv { lo, hi }
        }
    }

    pub fn point(v: f64) -> Self {
        F64Iv { lo: v, hi: v }
    }

    pub fn entire() -> Self {
        F64Iv {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn lo_raw(&self) -> f64 {
        self.lo
    }

    pub fn hi_raw(&self) -> f64 {
        self.hi
    }

    #[inline]
    fn out(lo: f64, hi: f64) -> Self {
        Self::new(lo.next_down(), hi.next_up())
    }
}

impl Arith for F64Iv {
    type Ctx = ();

    fn ctx(&self) {}

    fn precision(_: ()) -> u32 {
        53
    }

    fn from_i64(_: (), v: i64) -> Self {
        let f = v as f64;
        if f as i64 == v && (f.abs() as u64) < (1u64 << 53) {
            F64Iv::point(f)
        } else {
            Self::from_dyadic((), &Dyadic::from_int(v))
        }
    }

    fn from_f64_bounds(_: (), lo: f64, hi: f64) -> Self {
        F64Iv::new(lo, hi)
    }

    fn from_dyadic(_: (), v: &Dyadic) -> Self {
        F64Iv::new(v.to_f64_dir(Round::Down), v.to_f64_dir(Round::Up))
    }

    fn from_bounds(_: (), lo: &Dyadic, hi: &Dyadic) -> Self {
        F64Iv::new(lo.to_f64_dir(Round::Down), hi.to_f64_dir(Round::Up))
    }

    fn from_rational(_: (), q: &ExactRational) -> Self {
        if let (Some(n), Some(d)) = (small(q.numer()), small(q.denom())) {
            if d == 1.0 {
                return F64Iv::point(n);
            }
            let v = n / d;
            // Both operands are exact; the correctly rounded quotient is within one ulp.
            return Self::out(v, v);
        }
        F64Iv::new(
            Dyadic::from_rational(q, 64, Round::Down).to_f64_dir(Round::Down),
            Dyadic::from_rational(q, 64, Round::Up).to_f64_dir(Round::Up),
        )
    }

    fn pi(_: ()) -> Self {
        F64Iv::new(std::f64::consts::PI, std::f64::consts::PI.next_up())
    }

    fn ln2(_: ()) -> Self {
        F64Iv::new(std::f64::consts::LN_2, std::f64::consts::LN_2.next_up())
    }

    #[inline]
    fn add(&self, o: &Self) -> Self {
        Self::out(self.lo + o.lo, self.hi + o.hi)
    }

    #[inline]
    fn sub(&self, o: &Self) -> Self {
        Self::out(self.lo - o.hi, self.hi - o.lo)
    }

    #[inline]
    fn mul(&self, o: &Self) -> Self {
        if self.lo >= 0.0 && o.lo >= 0.0 {
            return Self::out(self.lo * o.lo, self.hi * o.hi);
        }
        let a = self.lo * o.lo;
        let b = self.lo * o.hi;
        let c = self.hi * o.lo;
        let d = self.hi * o.hi;
        if a.is_nan() || b.is_nan() || c.is_nan() || d.is_nan() {
            return F64Iv::entire();
        }
        Self::out(a.min(b).min(c.min(d)), a.max(b).max(c.max(d)))
    }

    #[inline]
    fn neg(&self) -> Self {
        F64Iv {
            lo: -self.hi,
            hi: -self.lo,
        }
    }

    fn div(&self, o: &Self) -> Option<Self> {
        if o.lo <= 0.0 && o.hi >= 0.0 {
            return None;
        }
        let a = self.lo / o.lo;
        let b = self.lo / o.hi;
        let c = self.hi / o.lo;
        let d = self.hi / o.hi;
        if a.is_nan() || b.is_nan() || c.is_nan() || d.is_nan() {
            return Some(F64Iv::entire());
        }
        Some(Self::out(a.min(b).min(c.min(d)), a.max(b).max(c.max(d))))
    }

    fn mul_pow2(&self, k: i64) -> Self {
        let k = k.clamp(-2000, 2000) as i32;
        let (lo, hi) = if k < -1000 {
            (self.lo * 2f64.powi(-1000) * 2f64.powi(k + 1000), self.hi * 2f64.powi(-1000) * 2f64.powi(k + 1000))
        } else if k > 1000 {
            (self.lo * 2f64.powi(1000) * 2f64.powi(k - 1000), self.hi * 2f64.powi(1000) * 2f64.powi(k - 1000))
        } else {
            (self.lo * 2f64.powi(k), self.hi * 2f64.powi(k))
        };
        let exact = |v: f64| v == 0.0 || (v.is_normal() && k >= -1000);
        if exact(lo) && exact(hi) {
            F64Iv::new(lo, hi)
        } else {
            Self::out(lo, hi)
        }
    }

    fn hull(&self, o: &Self) -> Self {
        F64Iv::new(self.lo.min(o.lo), self.hi.max(o.hi))
    }

    fn intersect(&self, o: &Self) -> Option<Self> {
        let lo = self.lo.max(o.lo);
        let hi = self.hi.min(o.hi);
        (lo <= hi).then_some(F64Iv { lo, hi })
    }

    fn abs(&self) -> Self {
        if self.lo >= 0.0 {
            *self
        } else if self.hi <= 0.0 {
            self.neg()
        } else {
            F64Iv::new(0.0, (-self.lo).max(self.hi))
        }
    }

    fn sqr(&self) -> Self {
        let a = self.abs();
        Self::out(a.lo * a.lo, a.hi * a.hi).max_zero()
    }

    fn sqrt(&self) -> Option<Self> {
        if self.hi < 0.0 {
            return None;
        }
        let lo = self.lo.max(0.0);
        Some(F64Iv::new(lo.sqrt().next_down().max(0.0), self.hi.sqrt().next_up()))
    }

    fn lo(&self) -> Dyadic {
        Dyadic::from_f64(self.lo).expect("finite lower endpoint")
    }

    fn hi(&self) -> Dyadic {
        Dyadic::from_f64(self.hi).expect("finite upper endpoint")
    }

    fn lo_f64(&self) -> f64 {
        self.lo
    }

    fn hi_f64(&self) -> f64 {
        self.hi
    }

    fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    fn mid(&self) -> Self {
        let m = 0.5 * self.lo + 0.5 * self.hi;
        F64Iv::point(m.clamp(self.lo, self.hi))
    }

    fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && self.hi >= 0.0
    }

    fn is_pos(&self) -> bool {
        self.lo > 0.0
    }

    fn is_neg(&self) -> bool {
        self.hi < 0.0
    }

    fn radius(&self) -> Self {
        let w = (self.hi - self.lo).next_up() * 0.5;
        F64Iv::point(w.next_up())
    }

    fn max(&self, o: &Self) -> Self {
        F64Iv::new(self.lo.max(o.lo), self.hi.max(o.hi))
    }

    fn min(&self, o: &Self) -> Self {
        F64Iv::new(self.lo.min(o.lo), self.hi.min(o.hi))
    }
}

impl F64Iv {
    fn max_zero(self) -> Self {
        F64Iv::new(self.lo.max(0.0), self.hi)
    }
}

fn small(v: &BigInt) -> Option<f64> {
    if v.bits() <= 53 {
        num_traits::ToPrimitive::to_f64(v)
    } else {
        None
    }
}

/// Arbitrary-precision interval; endpoints are rounded to `prec` bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicIv {
    lo: Dyadic,
    hi: Dyadic,
    prec: u32,
}

impl DyadicIv {
    fn mk(lo: Dyadic, hi: Dyadic, prec: u32) -> Self {
        DyadicIv {
            lo: lo.round(prec, Round::Down),
            hi: hi.round(prec, Round::Up),
            prec,
        }
    }

    fn p(&self, o: &Self) -> u32 {
        self.prec.max(o.prec)
    }

    pub fn with_precision(&self, prec: u32) -> Self {
        Self::mk(self.lo.clone(), self.hi.clone(), prec)
    }
}

impl Arith for DyadicIv {
    type Ctx = u32;

    fn ctx(&self) -> u32 {
        self.prec
    }

    fn precision(ctx: u32) -> u32 {
        ctx
    }

    fn from_i64(ctx: u32, v: i64) -> Self {
        Self::from_dyadic(ctx, &Dyadic::from_int(v))
    }

    fn from_dyadic(ctx: u32, v: &Dyadic) -> Self {
        Self::mk(v.clone(), v.clone(), ctx)
    }

    fn from_bounds(ctx: u32, lo: &Dyadic, hi: &Dyadic) -> Self {
        Self::mk(lo.clone(), hi.clone(), ctx)
    }

    fn from_rational(ctx: u32, q: &ExactRational) -> Self {
        DyadicIv {
            lo: Dyadic::from_rational(q, ctx, Round::Down),
            hi: Dyadic::from_rational(q, ctx, Round::Up),
            prec: ctx,
        }
    }

    fn pi(ctx: u32) -> Self {
        let (lo, hi) = cached_constant(Constant::Pi, ctx);
        Self::mk(lo, hi, ctx)
    }

    fn ln2(ctx: u32) -> Self {
        let (lo, hi) = cached_constant(Constant::Ln2, ctx);
        Self::mk(lo, hi, ctx)
    }

    fn add(&self, o: &Self) -> Self {
        Self::mk(self.lo.add(&o.lo), self.hi.add(&o.hi), self.p(o))
    }

    fn sub(&self, o: &Self) -> Self {
        Self::mk(self.lo.sub(&o.hi), self.hi.sub(&o.lo), self.p(o))
    }

    fn mul(&self, o: &Self) -> Self {
        let p = self.p(o);
        if !self.lo.is_negative() && !o.lo.is_negative() {
            return Self::mk(self.lo.mul(&o.lo), self.hi.mul(&o.hi), p);
        }
        let c = [
            self.lo.mul(&o.lo),
            self.lo.mul(&o.hi),
            self.hi.mul(&o.lo),
            self.hi.mul(&o.hi),
        ];
        let lo = c.iter().min().cloned().expect("four candidates");
        let hi = c.iter().max().cloned().expect("four candidates");
        Self::mk(lo, hi, p)
    }

    fn neg(&self) -> Self {
        DyadicIv {
            lo: self.hi.neg(),
            hi: self.lo.neg(),
            prec: self.prec,
        }
    }

    fn div(&self, o: &Self) -> Option<Self> {
        if o.contains_zero() {
            return None;
        }
        let p = self.p(o);
        // 1/x is decreasing on each side of zero.
        let r = DyadicIv {
            lo: Dyadic::one().div(&o.hi, p + 2, Round::Down)?,
            hi: Dyadic::one().div(&o.lo, p + 2, Round::Up)?,
            prec: p + 2,
        };
        Some(self.mul(&r).with_precision(p))
    }

    fn mul_pow2(&self, k: i64) -> Self {
        DyadicIv {
            lo: self.lo.mul_pow2(k),
            hi: self.hi.mul_pow2(k),
            prec: self.prec,
        }
    }

    fn hull(&self, o: &Self) -> Self {
        Self::mk(
            self.lo.clone().min(o.lo.clone()),
            self.hi.clone().max(o.hi.clone()),
            self.p(o),
        )
    }

    fn intersect(&self, o: &Self) -> Option<Self> {
        let lo = self.lo.clone().max(o.lo.clone());
        let hi = self.hi.clone().min(o.hi.clone());
        (lo <= hi).then(|| Self::mk(lo, hi, self.p(o)))
    }

    fn abs(&self) -> Self {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            self.neg()
        } else {
            DyadicIv {
                lo: Dyadic::zero(),
                hi: self.lo.abs().max(self.hi.clone()),
                prec: self.prec,
            }
        }
    }

    fn sqr(&self) -> Self {
        let a = self.abs();
        Self::mk(a.lo.mul(&a.lo), a.hi.mul(&a.hi), self.prec)
    }

    fn sqrt(&self) -> Option<Self> {
        if self.hi.is_negative() {
            return None;
        }
        let lo = if self.lo.is_negative() {
            Dyadic::zero()
        } else {
            self.lo.sqrt(self.prec, Round::Down)?
        };
        Some(DyadicIv {
            lo,
            hi: self.hi.sqrt(self.prec, Round::Up)?,
            prec: self.prec,
        })
    }

    fn lo(&self) -> Dyadic {
        self.lo.clone()
    }

    fn hi(&self) -> Dyadic {
        self.hi.clone()
    }

    fn lo_f64(&self) -> f64 {
        self.lo.to_f64_dir(Round::Down)
    }

    fn hi_f64(&self) -> f64 {
        self.hi.to_f64_dir(Round::Up)
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    fn mid(&self) -> Self {
        let m = self.lo.add(&self.hi).mul_pow2(-1);
        DyadicIv {
            lo: m.clone(),
            hi: m,
            prec: self.prec,
        }
    }

    fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    fn is_pos(&self) -> bool {
        self.lo.is_positive()
    }

    fn is_neg(&self) -> bool {
        self.hi.is_negative()
    }

    fn width_f64(&self) -> f64 {
        self.hi.sub(&self.lo).to_f64_dir(Round::Up)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Constant {
    Pi,
    Ln2,
}

type ConstCache = Mutex<HashMap<(Constant, u32), (Dyadic, Dyadic)>>;

fn cached_constant(c: Constant, prec: u32) -> (Dyadic, Dyadic) {
    static CACHE: OnceLock<ConstCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().expect("constant cache").get(&(c, prec)) {
        return v.clone();
    }
    let bits = prec as u64 + 16;
    let (s, e) = match c {
        Constant::Pi => pi_fixed(bits),
        Constant::Ln2 => ln2_fixed(bits),
    };
    let lo = Dyadic::new(&s - &e, -(bits as i64));
    let hi = Dyadic::new(&s + &e, -(bits as i64));
    let v = (lo, hi);
    cache
        .lock()
        .expect("constant cache")
        .insert((c, prec), v.clone());
    v
}

/// `atan(1/x) * 2^bits` as `(value, error)` with `|true - value| <= error`.
fn atan_inv_fixed(x: u64, bits: u64) -> (BigInt, BigInt) {
    let x2 = BigInt::from(x * x);
    let mut pw = (BigInt::one() << bits) / BigInt::from(x);
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    while !pw.is_zero() {
        let term = &pw / BigInt::from(2 * k + 1);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        pw /= &x2;
        k += 1;
    }
    // Each power carries error < 2 and each term < 3; the omitted tail is < 1.
    (sum, BigInt::from(3 * k + 1))
}

/// Machin's formula: `pi = 16 atan(1/5) - 4 atan(1/239)`.
pub(crate) fn pi_fixed(bits: u64) -> (BigInt, BigInt) {
    let (a, ea) = atan_inv_fixed(5, bits);
    let (b, eb) = atan_inv_fixed(239, bits);
    (a * 16 - b * 4, ea * 16 + eb * 4)
}

/// `ln 2 = 2 atanh(1/3)`.
pub(crate) fn ln2_fixed(bits: u64) -> (BigInt, BigInt) {
    let nine = BigInt::from(9);
    let mut pw = (BigInt::one() << bits) / BigInt::from(3);
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    while !pw.is_zero() {
        sum += &pw / BigInt::from(2 * k + 1);
        pw /= &nine;
        k += 1;
    }
    (sum * 2, BigInt::from(2 * (3 * k + 1)))
}

/// An exact rational within `2^-j` of pi.
pub fn piq(j: u32) -> ExactRational {
    let mut bits = j as u64 + 24;
    loop {
        let (s, e) = pi_fixed(bits);
        if e.bits() + (j as u64) < bits {
            return ExactRational::new(s, BigInt::one() << bits).expect("nonzero denominator");
        }
        bits += 16;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> ExactRational {
        ExactRational::ratio(n, d).unwrap()
    }

    #[test]
    fn f64_constants_are_enclosures() {
        let p = DyadicIv::pi(200);
        let f = F64Iv::pi(());
        assert!(Dyadic::from_f64(f.lo_f64()).unwrap() <= p.lo());
        assert!(Dyadic::from_f64(f.hi_f64()).unwrap() >= p.hi());
        let l = DyadicIv::ln2(200);
        let g = F64Iv::ln2(());
        assert!(Dyadic::from_f64(g.lo_f64()).unwrap() <= l.lo());
        assert!(Dyadic::from_f64(g.hi_f64()).unwrap() >= l.hi());
    }

    #[test]
    fn pi_digits() {
        // 3.14159265358979323846264338327950288...
        let p = DyadicIv::pi(120);
        let lo: ExactRational = "314159265358979323846264338327950288/100000000000000000000000000000000000"
            .parse()
            .unwrap();
        let hi: ExactRational = "314159265358979323846264338327950289/100000000000000000000000000000000000"
            .parse()
            .unwrap();
        assert!(p.lo().to_rational() > lo && p.hi().to_rational() < hi);
        assert!(p.width_f64() < 1e-35);
        let pq = piq(30);
        assert!(pq.sub(&lo).abs() < q(1, 1 << 30));
    }

    #[test]
    fn f64_division_by_interval_with_zero() {
        let a = F64Iv::from_i64((), 1);
        let z = F64Iv::new(-1.0, 1.0);
        assert!(a.div(&z).is_none());
        assert!(DyadicIv::one(64).div(&DyadicIv::zero(64)).is_none());
    }

    #[test]
    fn third_enclosed_by_both() {
        let t = q(1, 3);
        let f = F64Iv::from_rational((), &t);
        assert!(f.lo().to_rational() < t && f.hi().to_rational() > t);
        let d = DyadicIv::one(100).div(&DyadicIv::from_i64(100, 3)).unwrap();
        assert!(d.lo().to_rational() < t && d.hi().to_rational() > t);
        assert!(d.width_f64() < 1e-29);
    }

    #[test]
    fn powi_and_sqrt() {
        let x = DyadicIv::from_i64(80, 3);
        assert_eq!(x.powi(5).to_enclosure().unwrap(), Enclosure::point(Dyadic::from_int(243)));
        let s = DyadicIv::from_i64(80, 2).sqrt().unwrap();
        assert!(s.sqr().lo() <= Dyadic::from_int(2) && s.sqr().hi() >= Dyadic::from_int(2));
        let m = F64Iv::new(-2.0, 3.0).sqr();
        assert_eq!((m.lo_f64(), m.hi_f64() >= 9.0), (0.0, true));
    }

    #[test]
    fn decimal_rendering() {
        let e = Enclosure::new(Dyadic::from_int(1), Dyadic::new(3.into(), -1)).unwrap();
        assert_eq!(e.to_decimal(2), "[1.00, 1.50]");
        let e = Enclosure::from_rational(&q(-1, 3), 40);
        assert_eq!(e.to_decimal(3), "[-0.334, -0.333]");
    }

    #[test]
    fn enclosure_serde() {
        let e = Enclosure::from_rational(&q(1, 3), 20);
        let s = serde_json::to_string(&e).unwrap();
        let back: Enclosure = serde_json::from_str(&s).unwrap();
        assert_eq!(e, back);
    }
}
