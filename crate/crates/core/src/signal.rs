//! Elementary signals `f(t) = g sum_k c_k sinc(t - k)` and elementary
//! sequences `x(k) = g c_k`, both on a symmetric window `{-L, ..., L}`.

use std::fmt;
use std::marker::PhantomData;

use num_bigint::BigInt;

use crate::dyadic::Dyadic;
use crate::elementary::{sin_cos_pi, sinc, sinc_deriv};
use crate::error::{Error, Result};
use crate::exact::ExactRational;
use crate::interval::{Arith, DyadicIv, Enclosure};
use crate::real::{approximate, ComplexDescription, RealDescription};

/// Working precision for products of inexact coefficients.
pub const COEF_PREC: u32 = 192;

/// A real coefficient: exact, or known only through an enclosure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Coef {
    Exact(ExactRational),
    Approx(Enclosure),
}

impl Coef {
    pub fn zero() -> Self {
        Coef::Exact(ExactRational::zero())
    }

    pub fn one() -> Self {
        Coef::Exact(ExactRational::one())
    }

    pub fn int(v: i64) -> Self {
        Coef::Exact(ExactRational::from_int(v))
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self, Coef::Exact(q) if q.is_zero())
    }

    pub fn is_exact_one(&self) -> bool {
        matches!(self, Coef::Exact(q) if q.is_one())
    }

    pub fn exact(&self) -> Option<&ExactRational> {
        match self {
            Coef::Exact(q) => Some(q),
            Coef::Approx(_) => None,
        }
    }

    pub fn to_enclosure(&self, prec: u32) -> Enclosure {
        match self {
            Coef::Exact(q) => match crate::expr::exact_dyadic(q) {
                Some(d) => Enclosure::point(d),
                None => Enclosure::from_rational(q, prec),
            },
            Coef::Approx(e) => e.clone(),
        }
    }

    pub fn to_arith<A: Arith>(&self, ctx: A::Ctx) -> A {
        match self {
            Coef::Exact(q) => A::from_rational(ctx, q),
            Coef::Approx(e) => A::from_enclosure(ctx, e),
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            Coef::Exact(q) => Coef::Exact(q.neg()),
            Coef::Approx(e) => Coef::Approx(e.neg()),
        }
    }

    pub fn add(&self, o: &Coef) -> Self {
        match (self, o) {
            (Coef::Exact(a), Coef::Exact(b)) => Coef::Exact(a.add(b)),
            _ => Coef::Approx(
                self.to_enclosure(COEF_PREC)
                    .add(&o.to_enclosure(COEF_PREC))
                    .round_out(COEF_PREC),
            ),
        }
    }

    pub fn sub(&self, o: &Coef) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Coef) -> Self {
        match (self, o) {
            (Coef::Exact(a), Coef::Exact(b)) => Coef::Exact(a.mul(b)),
            (Coef::Exact(a), _) | (_, Coef::Exact(a)) if a.is_zero() => Coef::zero(),
            _ => Coef::Approx(
                self.to_enclosure(COEF_PREC)
                    .mul(&o.to_enclosure(COEF_PREC))
                    .round_out(COEF_PREC),
            ),
        }
    }

    /// Upper bound of `|c|` as an f64, rounded up.
    pub fn abs_hi(&self) -> f64 {
        let e = self.to_enclosure(64).abs();
        e.hi_f64()
    }

    fn from_real(x: &RealDescription) -> Result<Coef> {
        if x.seq.free_vars().is_empty() {
            if let Ok(q) = x.term(&BigInt::from(0)) {
                return Ok(Coef::Exact(q));
            }
        }
        Ok(Coef::Approx(approximate(x, COEF_PREC)?))
    }
}

impl From<ExactRational> for Coef {
    fn from(q: ExactRational) -> Self {
        Coef::Exact(q)
    }
}

impl fmt::Display for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coef::Exact(q) => write!(f, "{q}"),
            Coef::Approx(e) => write!(f, "{e}"),
        }
    }
}

/// Marker for continuous-time signals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Continuous;
/// Marker for sequences.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Discrete;

/// Coefficients `gain * (re_k + i im_k)` for `|k| <= L`, stored sparsely:
/// indices sorted, exact zeros dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Elementary<K> {
    l: u64,
    gain: Coef,
    re: Vec<(i64, Coef)>,
    im: Vec<(i64, Coef)>,
    kind: PhantomData<K>,
}

pub type ElementarySignal = Elementary<Continuous>;
pub type ElementarySequence = Elementary<Discrete>;

/// Real or imaginary part.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
}

fn normalize(l: u64, mut v: Vec<(i64, Coef)>) -> Result<Vec<(i64, Coef)>> {
    v.retain(|(_, c)| !c.is_exact_zero());
    v.sort_by_key(|(k, _)| *k);
    for w in v.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::Validation(format!("duplicate coefficient index {}", w[0].0)));
        }
    }
    if let Some((k, _)) = v.iter().find(|(k, _)| k.unsigned_abs() > l) {
        return Err(Error::Validation(format!("index {k} outside window of half-width {l}")));
    }
    Ok(v)
}

fn lookup(v: &[(i64, Coef)], k: i64) -> Coef {
    match v.binary_search_by_key(&k, |(i, _)| *i) {
        Ok(i) => v[i].1.clone(),
        Err(_) => Coef::zero(),
    }
}

impl<K: Clone> Elementary<K> {
    pub fn new(l: u64, gain: Coef, re: Vec<(i64, Coef)>, im: Vec<(i64, Coef)>) -> Result<Self> {
        let (re, im) = if gain.is_exact_zero() {
            (Vec::new(), Vec::new())
        } else {
            (normalize(l, re)?, normalize(l, im)?)
        };
        Ok(Elementary {
            l,
            gain,
            re,
            im,
            kind: PhantomData,
        })
    }

    /// Real exact coefficients.
    pub fn from_exact(l: u64, coeffs: Vec<(i64, ExactRational)>) -> Result<Self> {
        let re = coeffs.into_iter().map(|(k, q)| (k, Coef::Exact(q))).collect();
        Self::new(l, Coef::one(), re, Vec::new())
    }

    /// Consecutive values starting at index `lo`; the window is padded to
    /// be symmetric.
    pub fn from_values(lo: i64, values: &[ExactRational]) -> Self {
        let hi = lo + values.len() as i64 - 1;
        let l = lo.unsigned_abs().max(hi.unsigned_abs());
        let coeffs = values
            .iter()
            .enumerate()
            .map(|(i, q)| (lo + i as i64, q.clone()))
            .collect();
        Self::from_exact(l, coeffs).expect("indices inside padded window")
    }

    pub fn zero(l: u64) -> Self {
        Self::new(l, Coef::one(), Vec::new(), Vec::new()).expect("empty")
    }

    /// The unit impulse at 0: `sinc` as a signal, `delta` as a sequence.
    pub fn unit() -> Self {
        Self::from_exact(0, vec![(0, ExactRational::one())]).expect("index 0")
    }

    pub fn l(&self) -> u64 {
        self.l
    }

    pub fn gain(&self) -> &Coef {
        &self.gain
    }

    /// Stored nonzero real-part coefficients (before the gain).
    pub fn re(&self) -> &[(i64, Coef)] {
        &self.re
    }

    pub fn im(&self) -> &[(i64, Coef)] {
        &self.im
    }

    pub fn part(&self, p: Part) -> &[(i64, Coef)] {
        match p {
            Part::Re => &self.re,
            Part::Im => &self.im,
        }
    }

    /// Coefficient `k` including the gain, as `(re, im)`.
    pub fn coeff(&self, k: i64) -> (Coef, Coef) {
        (
            self.gain.mul(&lookup(&self.re, k)),
            self.gain.mul(&lookup(&self.im, k)),
        )
    }

    pub fn is_real(&self) -> bool {
        self.im.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.gain.exact().is_some()
            && self.re.iter().chain(&self.im).all(|(_, c)| c.exact().is_some())
    }

    /// True when every coefficient is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.re.is_empty() && self.im.is_empty()
    }

    /// Number of stored nonzero coefficients.
    pub fn nnz(&self) -> usize {
        self.re.len() + self.im.len()
    }

    /// Smallest and largest index carrying a nonzero coefficient.
    pub fn support(&self) -> Option<(i64, i64)> {
        let lo = self.re.first().map(|p| p.0).into_iter().chain(self.im.first().map(|p| p.0)).min()?;
        let hi = self.re.last().map(|p| p.0).into_iter().chain(self.im.last().map(|p| p.0)).max()?;
        Some((lo, hi))
    }

    /// Same object with the gain multiplied into the coefficients.
    pub fn fold_gain(&self) -> Self {
        if self.gain.is_exact_one() {
            return self.clone();
        }
        let f = |v: &[(i64, Coef)]| v.iter().map(|(k, c)| (*k, self.gain.mul(c))).collect();
        Self::new(self.l, Coef::one(), f(&self.re), f(&self.im)).expect("same indices")
    }

    /// Multiplies the gain by `s`.
    pub fn scale(&self, s: &Coef) -> Self {
        Self::new(self.l, self.gain.mul(s), self.re.clone(), self.im.clone()).expect("same indices")
    }

    fn recast<K2>(&self) -> Elementary<K2> {
        Elementary {
            l: self.l,
            gain: self.gain.clone(),
            re: self.re.clone(),
            im: self.im.clone(),
            kind: PhantomData,
        }
    }

    /// `a f + b g` with complex scalars given as `(re, im)` coefficient pairs.
    pub fn combine(a: &(Coef, Coef), f: &Self, b: &(Coef, Coef), g: &Self) -> Self {
        let l = f.l.max(g.l);
        let real_scalars = a.1.is_exact_zero() && b.1.is_exact_zero();
        // Shared gain stays factored out.
        if f.gain == g.gain && real_scalars {
            let re = merge(&a.0, &f.re, &b.0, &g.re);
            let im = merge(&a.0, &f.im, &b.0, &g.im);
            return Self::new(l, f.gain.clone(), re, im).expect("union window");
        }
        let (f, g) = (f.fold_gain(), g.fold_gain());
        let mut re = merge(&a.0, &f.re, &b.0, &g.re);
        let mut im = merge(&a.0, &f.im, &b.0, &g.im);
        if !real_scalars {
            let minus_ai = a.1.neg();
            let minus_bi = b.1.neg();
            re = merge(&Coef::one(), &re, &Coef::one(), &merge(&minus_ai, &f.im, &minus_bi, &g.im));
            im = merge(&Coef::one(), &im, &Coef::one(), &merge(&a.1, &f.re, &b.1, &g.re));
        }
        Self::new(l, Coef::one(), re, im).expect("union window")
    }

    /// Prepared real or imaginary part with the gain folded in.
    pub fn prepare<A: Arith>(&self, ctx: A::Ctx, part: Part) -> Prepared<A> {
        let g: A = self.gain.to_arith(ctx);
        let src = self.part(part);
        let mut ks = Vec::with_capacity(src.len());
        let mut c = Vec::with_capacity(src.len());
        let mut a = Vec::with_capacity(src.len());
        for (k, v) in src {
            let x = g.mul(&v.to_arith::<A>(ctx));
            ks.push(*k);
            a.push(if k.rem_euclid(2) == 1 { x.neg() } else { x.clone() });
            c.push(x);
        }
        Prepared { ctx, ks, c, a }
    }
}

fn merge(a: &Coef, x: &[(i64, Coef)], b: &Coef, y: &[(i64, Coef)]) -> Vec<(i64, Coef)> {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let kx = x.get(i).map(|p| p.0).unwrap_or(i64::MAX);
        let ky = y.get(j).map(|p| p.0).unwrap_or(i64::MAX);
        if kx < ky {
            out.push((kx, a.mul(&x[i].1)));
            i += 1;
        } else if ky < kx {
            out.push((ky, b.mul(&y[j].1)));
            j += 1;
        } else {
            out.push((kx, a.mul(&x[i].1).add(&b.mul(&y[j].1))));
            i += 1;
            j += 1;
        }
    }
    out
}

fn scalar(c: &ComplexDescription) -> Result<(Coef, Coef)> {
    Ok((Coef::from_real(&c.re)?, Coef::from_real(&c.im)?))
}

impl ElementarySignal {
    /// `sinc(t - k)` scaled by `c`.
    pub fn shifted_sinc(k: i64, c: ExactRational) -> Self {
        Self::from_exact(k.unsigned_abs(), vec![(k, c)]).expect("index inside window")
    }

    /// Integer samples: `f(m) = c_m`.
    pub fn sample(&self) -> ElementarySequence {
        self.recast()
    }

    /// Enclosure of `f(t)` for exact `t`, with width at most `2^-m`.
    pub fn eval_signal(&self, t: &ExactRational, m: u32) -> Result<(Enclosure, Enclosure)> {
        self.eval_refined(m, |p| Ok(DyadicIv::from_rational(p, t)), false)
    }

    /// Enclosure of `f(t)` for a computable `t`.
    pub fn eval_at_real(&self, t: &RealDescription, m: u32) -> Result<(Enclosure, Enclosure)> {
        self.eval_refined(
            m,
            |p| Ok(DyadicIv::from_enclosure(p, &approximate(t, p - 4)?)),
            false,
        )
    }

    /// Enclosure of `f'(t)` for exact `t`, with width at most `2^-m`.
    pub fn eval_derivative(&self, t: &ExactRational, m: u32) -> Result<(Enclosure, Enclosure)> {
        self.eval_refined(m, |p| Ok(DyadicIv::from_rational(p, t)), true)
    }

    fn eval_refined(
        &self,
        m: u32,
        point: impl Fn(u32) -> Result<DyadicIv>,
        deriv: bool,
    ) -> Result<(Enclosure, Enclosure)> {
        let size_bits = 64 - (self.nnz() as u64 + 1).leading_zeros();
        let mut prec = m + 16 + 2 * size_bits;
        for _ in 0..5 {
            let t = point(prec)?;
            let mut out = Vec::with_capacity(2);
            for part in [Part::Re, Part::Im] {
                let v = if self.part(part).is_empty() {
                    DyadicIv::zero(prec)
                } else {
                    let p = self.prepare::<DyadicIv>(prec, part);
                    if deriv {
                        p.deriv(&t)
                    } else {
                        p.eval(&t)
                    }
                };
                out.push(v.to_enclosure().ok_or_else(|| Error::gen("non-finite enclosure"))?);
            }
            let target = -(m as i64);
            if out.iter().all(|e| e.width_at_most(target)) {
                let im = out.pop().expect("two parts");
                return Ok((out.pop().expect("two parts"), im));
            }
            prec *= 2;
        }
        Err(Error::gen(format!(
            "could not reach width 2^-{m}; coefficient enclosures are too wide"
        )))
    }

    /// The derivative as an evaluable object.
    pub fn derivative(&self) -> Derivative {
        Derivative { f: self.clone() }
    }

    /// `a f + b g` with computable complex scalars.
    pub fn linear_combine(
        a: &ComplexDescription,
        f: &Self,
        b: &ComplexDescription,
        g: &Self,
    ) -> Result<Self> {
        Ok(Self::combine(&scalar(a)?, f, &scalar(b)?, g))
    }
}

impl ElementarySequence {
    /// Signal with the same coefficients.
    pub fn interpolate(&self) -> ElementarySignal {
        self.recast()
    }

    /// `x(k)` as `(re, im)`.
    pub fn at(&self, k: i64) -> (Coef, Coef) {
        self.coeff(k)
    }

    pub fn linear_combine(
        a: &ComplexDescription,
        f: &Self,
        b: &ComplexDescription,
        g: &Self,
    ) -> Result<Self> {
        Ok(Self::combine(&scalar(a)?, f, &scalar(b)?, g))
    }

    /// `(h * x)(k) = sum_l h(k - l) x(l)`.
    pub fn discrete_convolution(h: &Self, x: &Self) -> Self {
        let l = h.l + x.l;
        let conv = |p: &[(i64, Coef)], q: &[(i64, Coef)]| -> Vec<(i64, Coef)> {
            let mut acc: std::collections::BTreeMap<i64, Coef> = Default::default();
            for (i, a) in p {
                for (j, b) in q {
                    let slot = acc.entry(i + j).or_insert_with(Coef::zero);
                    *slot = slot.add(&a.mul(b));
                }
            }
            acc.into_iter().collect()
        };
        let rr = conv(&h.re, &x.re);
        let ii = conv(&h.im, &x.im);
        let ri = conv(&h.re, &x.im);
        let ir = conv(&h.im, &x.re);
        let re = merge(&Coef::one(), &rr, &Coef::int(-1), &ii);
        let im = merge(&Coef::one(), &ri, &Coef::one(), &ir);
        Self::new(l, h.gain.mul(&x.gain), re, im).expect("convolution window")
    }
}

impl<K> fmt::Display for Elementary<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L = {}", self.l)?;
        if !self.gain.is_exact_one() {
            write!(f, "; gain = {}", self.gain)?;
        }
        for (name, v) in [("c", &self.re), ("ci", &self.im)] {
            for (k, c) in v.iter() {
                write!(f, "; {name}[{k}] = {c}")?;
            }
        }
        Ok(())
    }
}

/// `f'` for an elementary signal `f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Derivative {
    f: ElementarySignal,
}

impl Derivative {
    pub fn signal(&self) -> &ElementarySignal {
        &self.f
    }

    pub fn eval(&self, t: &ExactRational, m: u32) -> Result<(Enclosure, Enclosure)> {
        self.f.eval_derivative(t, m)
    }
}

/// One real part of a signal converted to a backend: indices `k`,
/// coefficients `c_k` (gain included) and `a_k = (-1)^k c_k`.
#[derive(Clone, Debug)]
pub struct Prepared<A: Arith> {
    pub ctx: A::Ctx,
    pub ks: Vec<i64>,
    pub c: Vec<A>,
    pub a: Vec<A>,
}

impl<A: Arith> Prepared<A> {
    pub fn is_empty(&self) -> bool {
        self.ks.is_empty()
    }

    /// Position of the coefficient with index `k`.
    pub fn index_of(&self, k: i64) -> Option<usize> {
        self.ks.binary_search(&k).ok()
    }

    /// Upper bound of `sum |c_k|`.
    pub fn sum_abs(&self) -> A {
        self.c
            .iter()
            .fold(A::zero(self.ctx), |s, c| s.add(&c.abs()))
    }

    /// Upper bound of `max |c_k|`.
    pub fn max_abs(&self) -> A {
        self.c.iter().fold(A::zero(self.ctx), |s, c| s.max(&c.abs()))
    }

    /// Nearest integer `m` to `t` when `t` lies within `(m - 1/4, m + 1/4)`.
    fn near_integer(t: &A) -> Option<(i64, bool)> {
        let (lo, hi) = (t.lo_f64(), t.hi_f64());
        if !lo.is_finite() || !hi.is_finite() {
            return None;
        }
        let m = ((lo + hi) / 2.0).round();
        let q = Dyadic::pow2(-2);
        let md = Dyadic::from_f64(m)?;
        let inside = t.lo() > md.sub(&q) && t.hi() < md.add(&q);
        Some((m as i64, inside))
    }

    /// `f(t)`.
    pub fn eval(&self, t: &A) -> A {
        let ctx = self.ctx;
        if self.is_empty() {
            return A::zero(ctx);
        }
        let near = Self::near_integer(t);
        let direct = || {
            self.ks.iter().zip(&self.c).fold(A::zero(ctx), |s, (k, c)| {
                s.add(&c.mul(&sinc(&t.sub(&A::from_i64(ctx, *k)))))
            })
        };
        let skip = match near {
            Some((m, true)) => Some(m),
            Some((_, false)) => {
                // Product form needs t - k to exclude zero for all k.
                let w = t.width_f64();
                if w >= 0.5 {
                    return direct();
                }
                let (lo, hi) = (t.lo_f64().ceil(), t.hi_f64().floor());
                if lo <= hi {
                    return direct();
                }
                None
            }
            None => return direct(),
        };
        let mut acc = A::zero(ctx);
        let mut near_term = A::zero(ctx);
        for ((k, c), a) in self.ks.iter().zip(&self.c).zip(&self.a) {
            let d = t.sub(&A::from_i64(ctx, *k));
            if Some(*k) == skip {
                near_term = c.mul(&sinc(&d));
            } else {
                acc = acc.add(&a.div(&d).expect("t - k excludes zero"));
            }
        }
        let (s, _) = sin_cos_pi(t);
        let s = s.div(&A::pi(ctx)).expect("pi > 0");
        s.mul(&acc).add(&near_term)
    }

    /// `f'(t)`.
    pub fn deriv(&self, t: &A) -> A {
        let ctx = self.ctx;
        if self.is_empty() {
            return A::zero(ctx);
        }
        let direct = || {
            self.ks.iter().zip(&self.c).fold(A::zero(ctx), |s, (k, c)| {
                s.add(&c.mul(&sinc_deriv(&t.sub(&A::from_i64(ctx, *k)))))
            })
        };
        let skip = match Self::near_integer(t) {
            Some((m, true)) => Some(m),
            Some((_, false)) if t.width_f64() < 0.5 && t.lo_f64().ceil() > t.hi_f64().floor() => None,
            _ => return direct(),
        };
        let mut s1 = A::zero(ctx);
        let mut s2 = A::zero(ctx);
        let mut near_term = A::zero(ctx);
        for ((k, c), a) in self.ks.iter().zip(&self.c).zip(&self.a) {
            let d = t.sub(&A::from_i64(ctx, *k));
            if Some(*k) == skip {
                near_term = c.mul(&sinc_deriv(&d));
            } else {
                let r = a.div(&d).expect("t - k excludes zero");
                s2 = s2.add(&r.div(&d).expect("t - k excludes zero"));
                s1 = s1.add(&r);
            }
        }
        let (s, c) = sin_cos_pi(t);
        let s = s.div(&A::pi(ctx)).expect("pi > 0");
        c.mul(&s1).sub(&s.mul(&s2)).add(&near_term)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::F64Iv;

    fn q(s: &str) -> ExactRational {
        s.parse().unwrap()
    }

    #[test]
    fn sinc_values() {
        let s = ElementarySignal::unit();
        let (v, im) = s.eval_signal(&q("0"), 30).unwrap();
        assert!(v.contains(&Dyadic::one()) && im.contains_zero());
        let (v, _) = s.eval_signal(&q("5"), 30).unwrap();
        assert!(v.contains_zero() && v.width_at_most(-30));
        let (v, _) = s.eval_signal(&q("1/2"), 40).unwrap();
        let x = 2.0 / std::f64::consts::PI;
        assert!(v.lo_f64() <= x && x <= v.hi_f64());
    }

    #[test]
    fn derivative_at_half() {
        let s = ElementarySignal::unit();
        let (d, _) = s.derivative().eval(&q("1/2"), 30).unwrap();
        let x = -4.0 / std::f64::consts::PI;
        assert!(d.lo_f64() <= x && x <= d.hi_f64(), "{d}");
        let (d0, _) = s.derivative().eval(&q("0"), 30).unwrap();
        assert!(d0.contains_zero());
    }

    #[test]
    fn sampling_is_coefficient_copy() {
        let f = ElementarySignal::from_values(-1, &[q("2"), q("0"), q("-2")]);
        let x = f.sample();
        assert_eq!(x.at(-1).0, Coef::Exact(q("2")));
        assert_eq!(x.at(0).0, Coef::zero());
        assert_eq!(x.interpolate(), f);
        assert_eq!(f.l(), 1);
    }

    #[test]
    fn padding_is_symmetric() {
        let f = ElementarySignal::from_values(1, &[q("1"), q("1"), q("1"), q("1")]);
        assert_eq!(f.l(), 4);
        assert_eq!(f.support(), Some((1, 4)));
    }

    #[test]
    fn combine_and_convolve() {
        let f = ElementarySignal::from_values(-2, &[q("1/3"), q("1"), q("-5")]);
        let d = ElementarySignal::combine(&(Coef::one(), Coef::zero()), &f, &(Coef::int(-1), Coef::zero()), &f);
        assert!(d.is_zero());
        let h = ElementarySequence::from_values(0, &[q("1"), q("1")]);
        let x = ElementarySequence::from_values(0, &[q("1"), q("-1")]);
        let y = ElementarySequence::discrete_convolution(&h, &x);
        assert_eq!(y, ElementarySequence::from_exact(2, vec![(0, q("1")), (2, q("-1"))]).unwrap());
        let i = ElementarySequence::combine(&(Coef::zero(), Coef::one()), &h, &(Coef::zero(), Coef::zero()), &h);
        assert!(i.re().is_empty() && i.im().len() == 2);
    }

    #[test]
    fn product_form_matches_direct_sum() {
        let f = ElementarySignal::from_values(-3, &[q("1"), q("-2/3"), q("1/5"), q("3"), q("-1"), q("1/7"), q("2")]);
        let p = f.prepare::<F64Iv>((), Part::Re);
        for t in [0.1, 0.3, 0.5, 2.26, -3.9, 10.5, 0.0, 1.0] {
            let v = p.eval(&F64Iv::point(t));
            let mut d = 0.0;
            for (k, c) in [(-3, 1.0), (-2, -2.0 / 3.0), (-1, 0.2), (0, 3.0), (1, -1.0), (2, 1.0 / 7.0), (3, 2.0)] {
                let x = std::f64::consts::PI * (t - k as f64);
                d += c * if x == 0.0 { 1.0 } else { x.sin() / x };
            }
            assert!((v.lo_f64() - 1e-12..=v.hi_f64() + 1e-12).contains(&d), "{t}");
            let w = p.eval(&F64Iv::new(t - 1e-3, t + 1e-3));
            assert!(w.lo_f64() <= v.lo_f64() && w.hi_f64() >= v.hi_f64());
        }
    }
}
