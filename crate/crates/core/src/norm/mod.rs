//! Certified norms of elementary sequences and signals, and of the limit
//! objects of descriptions.
//!
//! Signals are handled cell by cell: on `[m - 1/2, m + 1/2]` the signal is
//! replaced by a Taylor polynomial with a rigorous remainder, and the far
//! field beyond the support is handled with a moment expansion of
//! `sum_k a_k / (t - k)`.

mod cell;
mod peak;
mod quad;

use std::f64::consts::PI;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;

use crate::desc::{Description, Exponent, Instance, InstantiateOptions};
use crate::dyadic::{Dyadic, Round};
use crate::elementary::pow;
use crate::error::{Error, Result};
use crate::exact::ExactRational;
use crate::interval::{Arith, DyadicIv, Enclosure, F64Iv};
use crate::signal::{Coef, ElementarySequence, ElementarySignal, Part};

use cell::{moments, up, Field};
use peak::Piece;
use quad::Adapt;

/// Knobs shared by the signal norms.
#[derive(Clone, Copy, Debug)]
pub struct NormOptions {
    /// Truncation radius override; must exceed the window half-width.
    pub t: Option<u64>,
    /// Initial pieces per cell for quadrature and peak search.
    pub mesh: u32,
    /// Budget for coefficient-term evaluations while building cell models.
    pub max_work: u64,
    /// Budget for branch-and-bound splits.
    pub max_boxes: usize,
    /// Fail with `ResourceLimit` when the width target is missed.
    pub strict: bool,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions {
            t: None,
            mesh: 1,
            max_work: 1 << 32,
            max_boxes: 1 << 21,
            strict: true,
        }
    }
}

/// What a [`TailBound`] controls outside `[-T, T]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailKind {
    Sup,
    L1,
    L2,
}

/// `sup |f|`, `int |f|` or `int |f|^2` over `|t| > radius` is at most `bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TailBound {
    pub radius: Dyadic,
    pub bound: Dyadic,
    pub kind: TailKind,
}

fn pow2(m: u32) -> f64 {
    (-(m as f64)).exp2()
}

fn check_width(e: Enclosure, m: u32, strict: bool, what: &str) -> Result<Enclosure> {
    if !strict || e.width_at_most(-(m as i64)) {
        Ok(e)
    } else {
        Err(Error::resource(format!(
            "{what}: enclosure {e} is wider than 2^-{m}"
        )))
    }
}

fn to_enc<A: Arith>(v: &A) -> Result<Enclosure> {
    v.to_enclosure()
        .ok_or_else(|| Error::gen("non-finite enclosure"))
}

fn bits(n: usize) -> u32 {
    64 - (n as u64).leading_zeros()
}

// ---------------------------------------------------------------- sequences

/// Moduli `|x_k|` of the entries, gain included.
fn moduli(x: &ElementarySequence, prec: u32) -> Vec<DyadicIv> {
    let g: DyadicIv = x.gain().to_arith(prec);
    let mut out = Vec::new();
    let (re, im) = (x.re(), x.im());
    let (mut i, mut j) = (0, 0);
    while i < re.len() || j < im.len() {
        let ki = re.get(i).map_or(i64::MAX, |p| p.0);
        let kj = im.get(j).map_or(i64::MAX, |p| p.0);
        let v = if ki < kj {
            i += 1;
            re[i - 1].1.to_arith::<DyadicIv>(prec).abs()
        } else if kj < ki {
            j += 1;
            im[j - 1].1.to_arith::<DyadicIv>(prec).abs()
        } else {
            i += 1;
            j += 1;
            let a = re[i - 1].1.to_arith::<DyadicIv>(prec);
            let b = im[j - 1].1.to_arith::<DyadicIv>(prec);
            a.sqr().add(&b.sqr()).sqrt().expect("nonnegative")
        };
        out.push(g.abs().mul(&v));
    }
    out
}

/// `||x||_p` for an elementary sequence.
pub fn lp_norm_sequence(x: &ElementarySequence, p: &Exponent, m: u32) -> Result<Enclosure> {
    let mut prec = m + 24 + 2 * bits(x.nnz());
    for _ in 0..5 {
        let xs = moduli(x, prec);
        let v = match p {
            Exponent::Inf => xs.iter().fold(DyadicIv::zero(prec), |s, v| s.max(v)),
            Exponent::Finite(q) if q.is_one() => {
                xs.iter().fold(DyadicIv::zero(prec), |s, v| s.add(v))
            }
            Exponent::Finite(q) if *q == 2 => xs
                .iter()
                .fold(DyadicIv::zero(prec), |s, v| s.add(&v.sqr()))
                .sqrt()
                .expect("nonnegative"),
            Exponent::Finite(q) => {
                let mut s = DyadicIv::zero(prec);
                for v in &xs {
                    s = s.add(&pow(v, q).ok_or_else(|| Error::gen("power of a negative value"))?);
                }
                pow(&s, &q.recip()?).ok_or_else(|| Error::gen("root of a negative value"))?
            }
        };
        let e = to_enc(&v)?;
        if e.width_at_most(-(m as i64)) {
            return Ok(e);
        }
        prec *= 2;
    }
    Err(Error::gen(format!(
        "coefficient enclosures are too wide for width 2^-{m}"
    )))
}

/// Exact `||x||_1` or `||x||_inf` for a real sequence with exact entries.
pub fn lp_norm_sequence_exact(x: &ElementarySequence, p: &Exponent) -> Option<ExactRational> {
    if !x.is_real() {
        return None;
    }
    let g = x.gain().exact()?.abs();
    let mut acc = ExactRational::zero();
    for (_, c) in x.re() {
        let v = c.exact()?.abs();
        acc = match p {
            Exponent::Inf if v.sub(&acc).is_negative() => acc,
            Exponent::Inf => v,
            Exponent::Finite(q) if q.is_one() => acc.add(&v),
            _ => return None,
        };
    }
    Some(acc.mul(&g))
}

// ------------------------------------------------------------------ signals

fn parts(f: &ElementarySignal) -> Vec<Part> {
    [Part::Re, Part::Im]
        .into_iter()
        .filter(|p| !f.part(*p).is_empty())
        .collect()
}

/// Upper bound of `sum_k |c_k|` over both parts, gain included.
fn sum_abs(f: &ElementarySignal) -> f64 {
    let s: f64 = f
        .re()
        .iter()
        .chain(f.im())
        .map(|(_, c)| c.abs_hi())
        .sum();
    up(s * f.gain().abs_hi())
}

/// Certified lower bound of `max |f(k)|` over integers `k` with `keep(k)`.
fn sample_floor(f: &ElementarySignal, keep: impl Fn(i64) -> bool) -> Dyadic {
    let prec = 64;
    let g: DyadicIv = f.gain().to_arith(prec);
    let mut best = Dyadic::zero();
    for (k, c) in f.re().iter().chain(f.im()) {
        if keep(*k) {
            let v = g.mul(&c.to_arith::<DyadicIv>(prec)).abs().lo();
            if v > best {
                best = v;
            }
        }
    }
    best
}

fn support(f: &ElementarySignal) -> (i64, i64) {
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for (k, _) in f.re().iter().chain(f.im()) {
        lo = lo.min(*k);
        hi = hi.max(*k);
    }
    (lo, hi)
}

/// Runs `body` with a fast `f64` backend for modest precision, else with
/// arbitrary-precision intervals.
macro_rules! dispatch {
    ($m:expr, $extra:expr, |$ctx:ident : $A:ident| $body:expr) => {{
        let m: u32 = $m;
        let fast = {
            type $A = F64Iv;
            let $ctx = ();
            (|| -> Result<Enclosure> { $body })()
        };
        match fast {
            Ok(e) if m <= F64_BITS || e.width_at_most(-(m as i64)) => Ok(e),
            Err(e) if m <= F64_BITS => Err(e),
            _ => {
                type $A = DyadicIv;
                let $ctx: u32 = m + 40 + $extra;
                (|| -> Result<Enclosure> { $body })()
            }
        }
    }};
}

/// Precisions served by hardware intervals alone. Above this the f64 pass is
/// still tried first and kept when it is narrow enough.
const F64_BITS: u32 = 30;

/// `sup_t |f(t)|`.
pub fn peak_value(f: &ElementarySignal, m: u32) -> Result<Enclosure> {
    peak_value_with(f, m, &NormOptions::default())
}

pub fn peak_value_with(f: &ElementarySignal, m: u32, opts: &NormOptions) -> Result<Enclosure> {
    if f.is_zero() {
        return Ok(Enclosure::zero());
    }
    let e = dispatch!(m, bits(f.nnz()), |ctx: A| peak_impl::<A>(ctx, f, m, opts))?;
    check_width(e, m, opts.strict, "peak value")
}

fn peak_impl<A: Arith>(
    ctx: A::Ctx,
    f: &ElementarySignal,
    m: u32,
    opts: &NormOptions,
) -> Result<Enclosure> {
    let s = sum_abs(f);
    let floor = sample_floor(f, |_| true);
    let fl = floor.to_f64_dir(Round::Down);
    let x = if fl > 0.0 {
        (s / (std::f64::consts::PI * fl)).ceil() + 1.0
    } else {
        f64::INFINITY
    };
    let (kmin, kmax) = support(f);
    let cells = (kmax - kmin + 1) as f64 + 2.0 * x;
    let cost: u64 = (f.nnz() as u64 + 1) * 24;
    if !(cells * cost as f64 <= opts.max_work as f64) {
        return Err(Error::resource(format!(
            "peak search over {cells} cells exceeds the work budget; bracket {}",
            peak_bracket(f)?
        )));
    }
    let x = x as i64;
    let tol = pow2(m + 3);
    let fields: Vec<Field<A>> = parts(f)
        .into_iter()
        .map(|p| Field::new(ctx, f, p, tol, 1.0))
        .collect();
    let pieces: Vec<Piece> = (kmin - x..=kmax + x).map(|c| (c, -0.5, 0.5)).collect();
    let tol_d = Dyadic::pow2(-(m as i64)).sub(&Dyadic::pow2(-(m as i64) - 2));
    let e = peak::sup(&fields, &pieces, opts.mesh, &tol_d, &floor, opts.max_boxes)?;
    // outside the searched region |f| <= s / (pi x) <= floor
    Ok(e)
}

/// A cheap certified bracket for the peak value: the largest sample below,
/// `min(sum |c_k|, max |c_k| (2 + (2/pi)(1 + ln W)))` above.
pub fn peak_bracket(f: &ElementarySignal) -> Result<Enclosure> {
    if f.is_zero() {
        return Ok(Enclosure::zero());
    }
    let floor = sample_floor(f, |_| true);
    let mut hi = 0.0;
    for p in parts(f) {
        let field = Field::<F64Iv>::new((), f, p, 1.0, 1.0);
        hi += field.u_bound;
    }
    let hi = Dyadic::from_f64(up(hi)).ok_or_else(|| Error::gen("non-finite bound"))?;
    Enclosure::new(floor, hi)
}

/// Checks `sum (-1)^k c_k = 0`, the condition for `f` to be integrable.
pub fn integrability(f: &ElementarySignal, m: u32) -> Result<()> {
    if !f.is_real() {
        return Err(Error::Inconclusive(
            "L1 norms of signals with an imaginary part are not supported".into(),
        ));
    }
    let alt: Vec<Coef> = f
        .re()
        .iter()
        .map(|(k, c)| if k.rem_euclid(2) == 1 { c.neg() } else { c.clone() })
        .collect();
    let exact: Option<Vec<ExactRational>> = alt.iter().map(|c| c.exact().cloned()).collect();
    let gain = f.gain().to_enclosure(m + 8);
    let gain_zero_possible = gain.contains_zero();
    match exact {
        Some(v) => {
            let s = v.iter().fold(ExactRational::zero(), |a, b| a.add(b));
            if s.is_zero() {
                Ok(())
            } else if gain_zero_possible {
                Err(Error::Inconclusive(
                    "the gain enclosure contains 0; raise the precision".into(),
                ))
            } else {
                Err(Error::NotIntegrable(format!("alternating coefficient sum is {s}")))
            }
        }
        None => {
            let prec = m + 8 + 2 * bits(f.nnz());
            let s = alt.iter().fold(DyadicIv::zero(prec), |a, c| a.add(&c.to_arith(prec)));
            let e = to_enc(&s)?;
            if !e.contains_zero() && !gain_zero_possible {
                Err(Error::NotIntegrable(format!("alternating coefficient sum lies in {e}")))
            } else {
                Err(Error::Inconclusive(format!(
                    "alternating coefficient sum lies in {e}, which contains 0; raise the precision"
                )))
            }
        }
    }
}

/// `int |f(t)| dt`.
pub fn l1_norm_signal(f: &ElementarySignal, m: u32) -> Result<Enclosure> {
    l1_norm_signal_with(f, m, &NormOptions::default())
}

pub fn l1_norm_signal_with(f: &ElementarySignal, m: u32, opts: &NormOptions) -> Result<Enclosure> {
    if f.is_zero() {
        return Ok(Enclosure::zero());
    }
    integrability(f, m)?;
    if let Some(t) = opts.t {
        if t <= f.l() {
            return Err(Error::Validation(format!(
                "truncation radius {t} must exceed the window half-width {}",
                f.l()
            )));
        }
    }
    let e = dispatch!(m, bits(f.nnz()), |ctx: A| l1_impl::<A>(ctx, f, m, opts))?;
    check_width(e, m, opts.strict, "L1 norm")
}

/// The BIBO norm of the filter with impulse response `h`.
pub fn bibo_norm(h: &ElementarySignal, m: u32) -> Result<Enclosure> {
    l1_norm_signal(h, m)
}

fn l1_impl<A: Arith>(
    ctx: A::Ctx,
    f: &ElementarySignal,
    m: u32,
    opts: &NormOptions,
) -> Result<Enclosure> {
    let tol = pow2(m);
    let mom = moments::<A>(ctx, f, Part::Re, Field::<A>::order(ctx))
        .ok_or_else(|| Error::gen("moment computation failed"))?;
    let left_mom = mom.reflect();
    let k2 = mom.kappa2;
    let rho = mom.rho;
    let max_cells = (opts.max_work / (f.nnz() as u64 * 24 + 1)).max(64) as f64;
    let mut big_u = (2.0 * rho + 2.0).ceil();
    let (tl, tr, lt, rt) = loop {
        let (tl, tr) = match opts.t {
            Some(t) => (-(t as i64), t as i64),
            None => (
                ((k2 as f64) / 2.0 - big_u).floor() as i64,
                ((k2 as f64) / 2.0 + big_u).ceil() as i64,
            ),
        };
        let (rt, _) = quad::l1_tail(ctx, &mom, 2 * tr - k2);
        let (lt, _) = quad::l1_tail(ctx, &left_mom, k2 - 2 * tl);
        let w = rt.width_f64() + lt.width_f64();
        if opts.t.is_some() || w <= tol / 8.0 || ((tr - tl) as f64) * 2.0 > max_cells {
            break (tl, tr, lt, rt);
        }
        big_u *= 2.0;
    };
    let ncells = (tr - tl + 1) as f64;
    let near = {
        let lo = (k2 as f64 / 2.0 - 2.0 * rho - 2.0).max(tl as f64);
        let hi = (k2 as f64 / 2.0 + 2.0 * rho + 2.0).min(tr as f64);
        (hi - lo + 1.0).max(0.0)
    };
    let work = near * (f.nnz() as f64) * 24.0 + ncells * 400.0;
    if work > opts.max_work as f64 {
        return Err(Error::resource(format!(
            "L1 quadrature over {ncells} cells exceeds the work budget"
        )));
    }
    let field = Field::with_moments(ctx, f, Part::Re, tol / 8.0, ncells, Some(mom));
    let ad = Adapt {
        mesh: opts.mesh,
        max_depth: 48,
        piece_tol: tol / (16.0 * ncells),
    };
    let mut acc = lt.add(&rt);
    for c in tl..=tr {
        let sa = if c == tl { 0.0 } else { -0.5 };
        let sb = if c == tr { 0.0 } else { 0.5 };
        let cell = field.cell(c);
        acc = acc.add(&quad::int_abs(&cell, sa, sb, &ad));
    }
    to_enc(&acc.max(&A::zero(ctx)))
}

/// `(int |f|^2)^(1/2) = (sum |c_k|^2)^(1/2)`.
pub fn l2_norm_signal(f: &ElementarySignal, m: u32) -> Result<Enclosure> {
    lp_norm_sequence(&f.sample(), &Exponent::two(), m)
}

/// `||f||_2` by quadrature of `|f|^2` on `[-T, T]` plus a tail bound; an
/// independent check of [`l2_norm_signal`].
pub fn l2_norm_quadrature(f: &ElementarySignal, m: u32, t: u64) -> Result<Enclosure> {
    if f.is_zero() {
        return Ok(Enclosure::zero());
    }
    if t <= f.l() {
        return Err(Error::Validation(format!(
            "truncation radius {t} must exceed the window half-width {}",
            f.l()
        )));
    }
    let tail = tail_bound(f, t, TailKind::L2)?;
    dispatch!(m, bits(f.nnz()), |ctx: A| {
        let ncells = 2.0 * t as f64 + 1.0;
        let fields: Vec<Field<A>> = parts(f)
            .into_iter()
            .map(|p| Field::new(ctx, f, p, pow2(m + 4), ncells))
            .collect();
        let mut acc = A::zero(ctx);
        let t = t as i64;
        for c in -t..=t {
            let sa = if c == -t { 0.0 } else { -0.5 };
            let sb = if c == t { 0.0 } else { 0.5 };
            for fl in &fields {
                acc = acc.add(&quad::int_sq(&fl.cell(c), sa, sb, fl.u_bound));
            }
        }
        let tb = A::from_dyadic(ctx, &tail.bound);
        let total = acc.add(&A::zero(ctx).hull(&tb)).max(&A::zero(ctx));
        to_enc(&total.sqrt().expect("nonnegative"))
    })
}

/// `||f||_p` on the real line.
pub fn lp_norm_signal(f: &ElementarySignal, p: &Exponent, m: u32) -> Result<Enclosure> {
    lp_norm_signal_with(f, p, m, &NormOptions::default())
}

pub fn lp_norm_signal_with(
    f: &ElementarySignal,
    p: &Exponent,
    m: u32,
    opts: &NormOptions,
) -> Result<Enclosure> {
    match p {
        Exponent::Inf => peak_value_with(f, m, opts),
        Exponent::Finite(q) if q.is_one() => l1_norm_signal_with(f, m, opts),
        Exponent::Finite(q) if *q == 2 => l2_norm_signal(f, m),
        Exponent::Finite(q) => general_norm(f, q, m, opts),
    }
}

/// Rational `1 < p < inf`, `p != 2`: midpoint quadrature of `|f|^p` on
/// `[-T, T]` plus the envelope tail. The width target is not guaranteed.
fn general_norm(
    f: &ElementarySignal,
    p: &ExactRational,
    m: u32,
    opts: &NormOptions,
) -> Result<Enclosure> {
    if f.is_zero() {
        return Ok(Enclosure::zero());
    }
    if !f.is_real() {
        return Err(Error::Inconclusive(
            "general exponents are supported for real signals only".into(),
        ));
    }
    let l = f.l();
    let s = sum_abs(f);
    let s1 = f
        .re()
        .iter()
        .map(|(k, c)| c.abs_hi() * k.unsigned_abs() as f64)
        .sum::<f64>()
        * f.gain().abs_hi();
    let integrable = integrability(f, m).is_ok();
    let pf = p.to_f64();
    let t = match opts.t {
        Some(t) if t <= l => {
            return Err(Error::Validation(format!(
                "truncation radius {t} must exceed the window half-width {l}"
            )))
        }
        Some(t) => t,
        None => {
            // both tails below tol / 8
            let tol = pow2(m);
            let gap = if integrable {
                (16.0 * (s1 / PI).powf(pf) / ((2.0 * pf - 1.0) * tol)).powf(1.0 / (2.0 * pf - 1.0))
            } else {
                (16.0 * (s / PI).powf(pf) / ((pf - 1.0) * tol)).powf(1.0 / (pf - 1.0))
            };
            if !(gap < 1e12) {
                return Err(Error::resource(format!(
                    "tail radius for p = {p} at 2^-{m} is out of reach"
                )));
            }
            l + 20u64.max(gap.ceil() as u64)
        }
    };
    let ncells = 2.0 * t as f64 + 1.0;
    if ncells * (f.nnz() as f64 + 64.0) * 24.0 > opts.max_work as f64 {
        return Err(Error::resource(format!(
            "quadrature over {ncells} cells exceeds the work budget"
        )));
    }
    let e = dispatch!(m, bits(f.nnz()), |ctx: A| {
        let tol = pow2(m);
        // |P|^p moves by at most p max(|f|, |P|)^(p-1) eps
        let field_tol = tol / (8.0 * pf * s.max(1.0).powf(pf - 1.0));
        let field = Field::<A>::new(ctx, f, Part::Re, field_tol, ncells);
        let ad = Adapt {
            mesh: opts.mesh,
            max_depth: 30,
            piece_tol: tol / (16.0 * ncells),
        };
        let density = tol / (4.0 * ncells);
        let mut acc = A::zero(ctx);
        let ti = t as i64;
        for c in -ti..=ti {
            let sa = if c == -ti { 0.0 } else { -0.5 };
            let sb = if c == ti { 0.0 } else { 0.5 };
            acc = acc.add(
                &quad::int_pow(&field.cell(c), sa, sb, p, density, &ad)
                    .ok_or_else(|| Error::gen("power of an enclosure failed"))?,
            );
        }
        // tails on both sides
        let pi = A::pi(ctx);
        let gap = A::from_i64(ctx, (t - l) as i64);
        let one = ExactRational::one();
        let tail = if integrable {
            // (s1/pi)^p (T - L)^(1 - 2p) / (2p - 1)
            let two_p = p.add(p);
            let base = A::from_f64(ctx, up(s1)).div(&pi).expect("pi");
            let g = pow(&gap, &two_p.sub(&one)).expect("positive").recip().expect("positive");
            pow(&base, p)
                .expect("nonnegative")
                .mul(&g)
                .div(&A::from_rational(ctx, &two_p.sub(&one)))
                .expect("positive")
        } else {
            let base = A::from_f64(ctx, s).div(&pi).expect("pi");
            let g = pow(&gap, &p.sub(&one)).expect("positive").recip().expect("positive");
            pow(&base, p)
                .expect("nonnegative")
                .mul(&g)
                .div(&A::from_rational(ctx, &p.sub(&one)))
                .expect("positive")
        };
        let total = acc.add(&A::zero(ctx).hull(&tail.mul_i64(2))).max(&A::zero(ctx));
        let root = pow(&total, &p.recip()?).ok_or_else(|| Error::gen("root failed"))?;
        to_enc(&root)
    })?;
    Ok(e)
}

/// `int_{-Lc}^{Lc} |f|^p` for finite `p`, `max_{|t| <= Lc} |f(t)|` for `p = inf`.
pub fn time_concentration(
    f: &ElementarySignal,
    lc: &Dyadic,
    p: &Exponent,
    m: u32,
) -> Result<Enclosure> {
    time_concentration_with(f, lc, p, m, &NormOptions::default())
}

pub fn time_concentration_with(
    f: &ElementarySignal,
    lc: &Dyadic,
    p: &Exponent,
    m: u32,
    opts: &NormOptions,
) -> Result<Enclosure> {
    if !lc.is_positive() {
        return Err(Error::Validation("Lc must be positive".into()));
    }
    let lcf = lc.to_f64();
    if Dyadic::from_f64(lcf).as_ref() != Some(lc) || lcf > 1e12 {
        return Err(Error::Validation(format!("Lc = {lc} is not supported")));
    }
    if f.is_zero() {
        return Ok(Enclosure::zero());
    }
    let lo = (-lcf - 0.5).ceil() as i64;
    let hi = (lcf + 0.5).floor() as i64;
    let mut pieces: Vec<Piece> = Vec::new();
    for c in lo..=hi {
        let sa = (-lcf - c as f64).max(-0.5);
        let sb = (lcf - c as f64).min(0.5);
        if sa < sb {
            pieces.push((c, sa, sb));
        }
    }
    let ncells = pieces.len() as f64;
    if ncells * (f.nnz() as f64 + 1.0) * 24.0 > opts.max_work as f64 {
        return Err(Error::resource("time window exceeds the work budget"));
    }
    let real = f.is_real();
    let e = dispatch!(m, bits(f.nnz()), |ctx: A| {
        let tol = pow2(m);
        match p {
            Exponent::Inf => {
                let fields: Vec<Field<A>> = parts(f)
                    .into_iter()
                    .map(|pt| Field::new(ctx, f, pt, pow2(m + 3), 1.0))
                    .collect();
                let floor = sample_floor(f, |k| (k as f64).abs() <= lcf);
                let tol_d = Dyadic::pow2(-(m as i64)).sub(&Dyadic::pow2(-(m as i64) - 2));
                peak::sup(&fields, &pieces, opts.mesh, &tol_d, &floor, opts.max_boxes)
            }
            Exponent::Finite(q) if *q == 2 => {
                let mut acc = A::zero(ctx);
                for pt in parts(f) {
                    let field = Field::<A>::new(ctx, f, pt, tol / 8.0, ncells);
                    for &(c, sa, sb) in &pieces {
                        acc = acc.add(&quad::int_sq(&field.cell(c), sa, sb, field.u_bound));
                    }
                }
                to_enc(&acc.max(&A::zero(ctx)))
            }
            Exponent::Finite(q) => {
                if !real {
                    return Err(Error::Inconclusive(
                        "time concentration for complex signals needs p = 2 or inf".into(),
                    ));
                }
                let field = Field::<A>::new(ctx, f, Part::Re, tol / 8.0, ncells);
                let ad = Adapt {
                    mesh: opts.mesh,
                    max_depth: if q.is_one() { 48 } else { 30 },
                    piece_tol: tol / (16.0 * ncells),
                };
                let mut acc = A::zero(ctx);
                for &(c, sa, sb) in &pieces {
                    let cell = field.cell(c);
                    let v = if q.is_one() {
                        quad::int_abs(&cell, sa, sb, &ad)
                    } else {
                        quad::int_pow(&cell, sa, sb, q, tol / (4.0 * ncells), &ad)
                            .ok_or_else(|| Error::gen("power of an enclosure failed"))?
                    };
                    acc = acc.add(&v);
                }
                to_enc(&acc.max(&A::zero(ctx)))
            }
        }
    })?;
    let general = matches!(p, Exponent::Finite(q) if !q.is_one() && *q != 2);
    check_width(e, m, opts.strict && !general, "time concentration")
}

/// Tail control outside `[-t, t]`, `t > L`.
///
/// `|f(t)| <= sum|c_k| / (pi (|t| - L))` always, and
/// `|f(t)| <= sum|c_k||k| / (pi |t| (|t| - L))` when `sum (-1)^k c_k = 0`.
pub fn tail_bound(f: &ElementarySignal, t: u64, kind: TailKind) -> Result<TailBound> {
    let l = f.l();
    if t <= l {
        return Err(Error::Validation(format!(
            "tail radius {t} must exceed the window half-width {l}"
        )));
    }
    let gap = (t - l) as f64;
    let s = sum_abs(f);
    let s1 = up(f
        .re()
        .iter()
        .chain(f.im())
        .map(|(k, c)| c.abs_hi() * k.unsigned_abs() as f64)
        .sum::<f64>()
        * f.gain().abs_hi());
    let zero_sum = f.is_real() && integrability(f, 32).is_ok();
    let pi = std::f64::consts::PI * (1.0 - 1e-15);
    let b = match kind {
        TailKind::Sup => {
            let mut b = s / (pi * gap);
            if zero_sum {
                b = b.min(s1 / (pi * t as f64 * gap));
            }
            b
        }
        TailKind::L1 => {
            if !zero_sum {
                return Err(Error::NotIntegrable(
                    "no L1 tail bound without a vanishing alternating sum".into(),
                ));
            }
            2.0 * s1 / (pi * gap)
        }
        TailKind::L2 => {
            let mut b = 2.0 * (s / pi) * (s / pi) / gap;
            if zero_sum {
                b = b.min(2.0 * (s1 / pi) * (s1 / pi) / (t as f64 * t as f64 * gap));
            }
            b
        }
    };
    Ok(TailBound {
        radius: Dyadic::from_int(t as i64),
        bound: Dyadic::from_f64(up(up(b))).ok_or_else(|| Error::gen("non-finite tail bound"))?,
        kind,
    })
}

/// The pointwise envelope at `|t| > L` used by [`TailKind::Sup`] bounds.
pub fn tail_envelope(f: &ElementarySignal, t: f64) -> Option<f64> {
    let l = f.l() as f64;
    let at = t.abs();
    if at <= l {
        return None;
    }
    let s = sum_abs(f);
    let mut b = s / (std::f64::consts::PI * (1.0 - 1e-15) * (at - l));
    if f.is_real() && integrability(f, 32).is_ok() {
        let s1: f64 = f
            .re()
            .iter()
            .map(|(k, c)| c.abs_hi() * k.unsigned_abs() as f64)
            .sum::<f64>()
            * f.gain().abs_hi();
        b = b.min(up(s1) / (std::f64::consts::PI * (1.0 - 1e-15) * at * (at - l)));
    }
    Some(up(up(b)))
}

// ------------------------------------------------------------- descriptions

/// Norm of the limit object of a description, width at most `2^-m`.
pub fn norm_of_description(d: &Description, m: u32) -> Result<Enclosure> {
    norm_of_description_with(d, m, &NormOptions::default(), &InstantiateOptions::default())
}

pub fn norm_of_description_with(
    d: &Description,
    m: u32,
    opts: &NormOptions,
    limits: &InstantiateOptions,
) -> Result<Enclosure> {
    let n = d.modulus_of(m as u64 + 2)?;
    let inst = d.instantiate_with(n, limits)?;
    let e = match &inst {
        Instance::Sequence(x) => lp_norm_sequence(x, &d.p, m + 2)?,
        Instance::Signal(f) => lp_norm_signal_with(f, &d.p, m + 2, opts)?,
    };
    Ok(e.widen(&Dyadic::pow2(-(m as i64) - 1)))
}

// ------------------------------------------------------------------- l1q

/// `q_N(t) = sinc(t) - (1/N) sum_{k=1}^{N} sinc(t + 2k)`.
pub fn q_signal(n: u64) -> Result<ElementarySignal> {
    if n == 0 {
        return Err(Error::Validation("q_N needs N >= 1".into()));
    }
    let neg = ExactRational::new(BigInt::from(-1), BigInt::from(n))?;
    let mut c = Vec::with_capacity(n as usize + 1);
    for k in (1..=n as i64).rev() {
        c.push((-2 * k, neg.clone()));
    }
    c.push((0, ExactRational::one()));
    ElementarySignal::from_exact(2 * n, c)
}

/// Precision of the cached `||q_N||_1` enclosures.
pub const L1Q_BITS: u32 = 30;

/// `||q_N||_1`, cached per `N`.
pub fn l1q(n: u64) -> Result<Enclosure> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Enclosure>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(e) = cache.lock().expect("l1q cache").get(&n) {
        return Ok(e.clone());
    }
    let e = l1_norm_signal(&q_signal(n)?, L1Q_BITS)?;
    cache.lock().expect("l1q cache").insert(n, e.clone());
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sinc() -> ElementarySignal {
        ElementarySignal::unit()
    }

    #[test]
    fn sinc_peak_and_l1() {
        let p = peak_value(&sinc(), 20).unwrap();
        assert!(p.contains(&Dyadic::one()) && p.width_at_most(-20), "{p}");
        let two = sinc().scale(&Coef::int(2));
        let p = peak_value(&two, 20).unwrap();
        assert!(p.contains(&Dyadic::from_int(2)), "{p}");
        assert!(matches!(l1_norm_signal(&sinc(), 10), Err(Error::NotIntegrable(_))));
    }

    #[test]
    fn q4_sandwich() {
        let e = l1_norm_signal(&q_signal(4).unwrap(), 10).unwrap();
        let pi = std::f64::consts::PI;
        let lo = (2f64).ln() / (6.0 * pi) - 1.0 / pi;
        let hi = 4.0 + 5.0 / pi * 9f64.ln();
        assert!(e.lo_f64() > lo && e.hi_f64() < hi, "{e}");
        assert!(e.width_at_most(-10));
    }

    #[test]
    fn three_four_five() {
        let f = ElementarySignal::from_exact(
            1,
            vec![(0, ExactRational::from_int(3)), (1, ExactRational::from_int(4))],
        )
        .unwrap();
        let e = l2_norm_signal(&f, 20).unwrap();
        assert!(e.contains(&Dyadic::from_int(5)), "{e}");
        let q = l2_norm_quadrature(&f, 12, 200).unwrap();
        assert!(q.intersect(&e).is_some(), "{q} {e}");
    }
}
