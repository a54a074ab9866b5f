//! Taylor models of `f` on unit cells `[m - 1/2, m + 1/2]`.
//!
//! On a cell, `f(m + s) = c_m sinc(s) + s sinc(s) g(s)` with
//! `g(s) = (-1)^m sum_{k != m} a_k / (m - k + s)`; the degree `D - 1`
//! Taylor polynomial of `f` is exact up to `pi^D U |s|^D / D!`
//! (Bernstein's inequality with `U >= sup |f|`).

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::dyadic::Dyadic;
use crate::exact::ExactRational;
use crate::interval::{Arith, DyadicIv};
use crate::signal::{ElementarySignal, Part, Prepared};

const U64: f64 = f64::EPSILON * 0.5;

/// `x` pushed up by a few relative ulps; for nonnegative `x`.
pub(crate) fn up(x: f64) -> f64 {
    (x * (1.0 + 16.0 * f64::EPSILON)).next_up()
}

/// `1/1, 1/2, ..., 1/n`.
pub(crate) fn inv_ints<A: Arith>(ctx: A::Ctx, n: usize) -> Vec<A> {
    (1..=n as i64)
        .map(|i| A::from_i64(ctx, i).recip().expect("nonzero"))
        .collect()
}

pub(crate) fn horner<A: Arith>(p: &[A], x: &A) -> A {
    let mut acc = p.last().cloned().unwrap_or_else(|| A::zero(x.ctx()));
    for c in p.iter().rev().skip(1) {
        acc = acc.mul(x).add(c);
    }
    acc
}

/// Moment expansion of `G(t) = sum a_k / (t - k)` about `kappa`.
///
/// Moments are stored scaled: `nu_j = mu_j / 2^(e j)` where `2^e >= rho`.
#[derive(Clone, Debug)]
pub(crate) struct Moments<A: Arith> {
    /// Twice the expansion centre.
    pub kappa2: i64,
    pub rho: f64,
    pub e: i64,
    pub nu: Vec<A>,
    /// `nu_j` is exactly zero.
    pub zero: Vec<bool>,
    /// Upper bound of `sum |a_k|`.
    pub sum_abs: f64,
}

impl<A: Arith> Moments<A> {
    pub fn order(&self) -> usize {
        self.nu.len()
    }

    /// Mirror image `t -> -t`.
    pub fn reflect(&self) -> Self {
        let nu = self
            .nu
            .iter()
            .enumerate()
            .map(|(j, v)| if j % 2 == 1 { v.neg() } else { v.clone() })
            .collect();
        Moments {
            kappa2: -self.kappa2,
            nu,
            ..self.clone()
        }
    }
}

/// Moments of one part of `f`, exact when the raw coefficients are.
pub(crate) fn moments<A: Arith>(
    ctx: A::Ctx,
    f: &ElementarySignal,
    part: Part,
    order: usize,
) -> Option<Moments<A>> {
    let src = f.part(part);
    let kmin = src.first()?.0;
    let kmax = src.last()?.0;
    let kappa2 = kmin + kmax;
    let rho = (kmax - kmin) as f64 / 2.0;
    let e = if rho <= 1.0 { 0 } else { (rho.log2().ceil() as i64).max(0) + 1 };
    let gain: A = f.gain().to_arith(ctx);
    let prec = A::precision(ctx) + 64;

    let exact: Option<Vec<&ExactRational>> = src.iter().map(|(_, c)| c.exact()).collect();
    let mut nu = Vec::with_capacity(order);
    let mut zero = Vec::with_capacity(order);
    let lcm_ok = exact.as_ref().map_or(false, |qs| {
        let mut l = BigInt::one();
        for q in qs {
            l = num_integer::Integer::lcm(&l, q.denom());
            if l.bits() > 4096 {
                return false;
            }
        }
        true
    });
    if let (Some(qs), true) = (exact, lcm_ok) {
        let mut l = BigInt::one();
        for q in &qs {
            l = num_integer::Integer::lcm(&l, q.denom());
        }
        let mut pw: Vec<BigInt> = src
            .iter()
            .zip(&qs)
            .map(|((k, _), q)| {
                let v = q.numer() * (&l / q.denom());
                if k.rem_euclid(2) == 1 {
                    -v
                } else {
                    v
                }
            })
            .collect();
        let base: Vec<i64> = src.iter().map(|(k, _)| 2 * k - kappa2).collect();
        for j in 0..order {
            let s: BigInt = pw.iter().sum();
            zero.push(s.is_zero());
            // mu_j = s / (l 2^j); nu_j = mu_j / 2^(e j)
            let q = ExactRational::new(s, l.clone()).expect("nonzero lcm");
            let v = A::from_rational(ctx, &q).mul_pow2(-((1 + e) * j as i64));
            nu.push(gain.mul(&v));
            for (p, b) in pw.iter_mut().zip(&base) {
                *p *= *b;
            }
        }
    } else {
        let raw: Vec<DyadicIv> = src
            .iter()
            .map(|(k, c)| {
                let v = c.to_arith::<DyadicIv>(prec);
                if k.rem_euclid(2) == 1 {
                    v.neg()
                } else {
                    v
                }
            })
            .collect();
        let d: Vec<DyadicIv> = src
            .iter()
            .map(|(k, _)| DyadicIv::from_dyadic(prec, &Dyadic::new(BigInt::from(2 * k - kappa2), -1 - e)))
            .collect();
        let mut pw = raw;
        for _ in 0..order {
            let s = pw.iter().fold(DyadicIv::zero(prec), |acc, v| acc.add(v));
            zero.push(false);
            let v = match s.to_enclosure() {
                Some(enc) => A::from_enclosure(ctx, &enc),
                None => return None,
            };
            nu.push(gain.mul(&v));
            for (p, b) in pw.iter_mut().zip(&d) {
                *p = p.mul(b);
            }
        }
    }
    let sum_abs = up(f
        .part(part)
        .iter()
        .map(|(_, c)| c.abs_hi())
        .sum::<f64>()
        * f.gain().abs_hi());
    Some(Moments {
        kappa2,
        rho,
        e,
        nu,
        zero,
        sum_abs,
    })
}

/// Everything needed to build cell models for one real part.
pub(crate) struct Field<A: Arith> {
    pub ctx: A::Ctx,
    pub prep: Prepared<A>,
    pub mom: Option<Moments<A>>,
    pub deg: usize,
    /// Taylor remainder bound on a full cell.
    pub eps: f64,
    /// `sup |f| <= u_bound`.
    pub u_bound: f64,
    /// Allowed absolute error per `g` coefficient from far-field truncation.
    coef_tol: f64,
    sigma: Vec<A>,
    fast: Option<(Vec<f64>, Vec<f64>)>,
}

/// Polynomial model of `f(m + s)` for `|s| <= 1/2`.
#[derive(Clone, Debug)]
pub(crate) struct Cell<A: Arith> {
    pub m: i64,
    pub p: Vec<A>,
    pub dp: Vec<A>,
    pub phi: Vec<A>,
    /// `sup |P''|` on the cell.
    pub b2: f64,
    pub eps: f64,
}

impl<A: Arith> Field<A> {
    /// `tol` bounds `eps * cells`, the total remainder over `cells` cells.
    pub fn new(ctx: A::Ctx, f: &ElementarySignal, part: Part, tol: f64, cells: f64) -> Self {
        let mom = if f.part(part).len() > 48 {
            moments::<A>(ctx, f, part, Self::order(ctx))
        } else {
            None
        };
        Self::with_moments(ctx, f, part, tol, cells, mom)
    }

    /// Moment order used for far fields and tails.
    pub fn order(ctx: A::Ctx) -> usize {
        (A::precision(ctx) as usize + 16).min(300)
    }

    pub fn with_moments(
        ctx: A::Ctx,
        f: &ElementarySignal,
        part: Part,
        tol: f64,
        cells: f64,
        mom: Option<Moments<A>>,
    ) -> Self {
        let prep = f.prepare::<A>(ctx, part);
        let sum_abs = prep.sum_abs().hi_f64();
        let max_abs = prep.max_abs().hi_f64();
        let width = match (f.part(part).first(), f.part(part).last()) {
            (Some(a), Some(b)) => (b.0 - a.0 + 1) as u64,
            _ => 1,
        };
        let lnw = (64 - width.leading_zeros()) as f64 * 0.693_148;
        let u_bound = up(sum_abs.min(max_abs * (2.0 + 0.636_62 * (1.0 + lnw))));
        let target = tol / cells.max(1.0);
        let mut deg = 6;
        let mut eps = remainder(deg, u_bound);
        while eps > target && deg < 90 {
            deg += 1;
            eps = remainder(deg, u_bound);
        }
        let pi = A::pi(ctx);
        let pi2 = pi.sqr();
        let mut sigma = Vec::with_capacity(deg / 2 + 1);
        let mut s = A::one(ctx);
        for j in 0..=deg / 2 {
            sigma.push(s.clone());
            let d = A::from_i64(ctx, ((2 * j + 2) * (2 * j + 3)) as i64);
            s = s.mul(&pi2).neg().div(&d).expect("nonzero");
        }
        let fast = (A::precision(ctx) <= 53).then(|| {
            let mut mid = Vec::with_capacity(prep.a.len());
            let mut rad = Vec::with_capacity(prep.a.len());
            for a in &prep.a {
                let (lo, hi) = (a.lo_f64(), a.hi_f64());
                let m = 0.5 * lo + 0.5 * hi;
                mid.push(m);
                rad.push(up((hi - m).max(m - lo)));
            }
            (mid, rad)
        });
        Field {
            ctx,
            prep,
            mom,
            deg,
            eps,
            u_bound,
            coef_tol: target * 0.25,
            sigma,
            fast,
        }
    }

    /// `y_i = sum_{k != m} a_k (-1)^i (m - k)^-(i + 1)` for `i < n`.
    fn local(&self, m: i64, n: usize) -> Vec<A> {
        if let Some(y) = self.far(m, n) {
            return y;
        }
        if let Some((mid, rad)) = &self.fast {
            return self.local_fast(m, n, mid, rad);
        }
        let ctx = self.ctx;
        let mut y = vec![A::zero(ctx); n];
        for (idx, k) in self.prep.ks.iter().enumerate() {
            if *k == m {
                continue;
            }
            let r = A::from_i64(ctx, m - k).recip().expect("nonzero");
            let nr = r.neg();
            let mut x = self.prep.a[idx].mul(&r);
            for yi in y.iter_mut() {
                *yi = yi.add(&x);
                x = x.mul(&nr);
            }
        }
        y
    }

    fn local_fast(&self, m: i64, n: usize, mid: &[f64], rad: &[f64]) -> Vec<A> {
        let cap = self.prep.ks.len();
        let mut xs = Vec::with_capacity(cap);
        let mut nr = Vec::with_capacity(cap);
        let mut rp = Vec::new();
        let mut ar = Vec::new();
        let any_rad = rad.iter().any(|r| *r != 0.0);
        for (idx, k) in self.prep.ks.iter().enumerate() {
            if *k == m {
                continue;
            }
            let r = 1.0 / (m - k) as f64;
            xs.push(mid[idx] * r);
            nr.push(-r);
            if any_rad {
                rp.push(rad[idx] * r.abs());
                ar.push(r.abs());
            }
        }
        let terms = xs.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let (y, s) = if i + 1 < n {
                sums_scale(&mut xs, &nr)
            } else {
                sums(&xs)
            };
            let g = (terms + 2 * i + 6) as f64 * U64 * 1.01;
            let mut err = s * g + terms as f64 * 1e-300;
            if any_rad {
                let (rr, _) = sums(&rp);
                err += rr * (1.0 + g);
                for (p, a) in rp.iter_mut().zip(&ar) {
                    *p *= *a;
                }
            }
            let err = up(err);
            out.push(A::from_f64_bounds(self.ctx, (y - err).next_down(), (y + err).next_up()));
        }
        out
    }

    /// Far-field coefficients from the moment expansion, when accurate enough.
    fn far(&self, m: i64, n: usize) -> Option<Vec<A>> {
        let mom = self.mom.as_ref()?;
        let u = m as f64 - mom.kappa2 as f64 / 2.0;
        let au = u.abs();
        if au < 2.0 * mom.rho + 2.0 {
            return None;
        }
        let q = mom.rho / (au - 1.0);
        let order = mom.order();
        let err = up(mom.sum_abs * q.powi(order as i32) / (au - 1.0 - mom.rho));
        if !(err <= self.coef_tol) {
            return None;
        }
        // Cost J n against the direct n * nnz.
        if order >= self.prep.ks.len() {
            return None;
        }
        let ctx = self.ctx;
        // v = u / 2^e; y_i = 2^(-e (1 + i)) sum_j nu_j (-1)^i C(j + i, i) v^-(j + 1 + i)
        let two_u = 2 * m - mom.kappa2;
        let vinv = A::from_i64(ctx, two_u)
            .mul_pow2(-1 - mom.e)
            .recip()
            .expect("far cell");
        let inv = inv_ints::<A>(ctx, n);
        let mut y = vec![A::zero(ctx); n];
        let mut vpow = vinv.clone();
        for j in 0..order {
            if !mom.zero[j] {
                let mut t = mom.nu[j].mul(&vpow);
                for i in 0..n {
                    y[i] = y[i].add(&t);
                    if i + 1 < n {
                        t = t
                            .mul_i64(-((j + 1 + i) as i64))
                            .mul(&inv[i])
                            .mul(&vinv);
                    }
                }
            }
            vpow = vpow.mul(&vinv);
        }
        let e = A::from_f64(ctx, err);
        Some(
            y.into_iter()
                .enumerate()
                .map(|(i, v)| v.mul_pow2(-mom.e * (1 + i as i64)).inflate(&e))
                .collect(),
        )
    }

    pub fn cell(&self, m: i64) -> Cell<A> {
        let ctx = self.ctx;
        let d = self.deg;
        let mut g = self.local(m, d - 1);
        if m.rem_euclid(2) == 1 {
            for v in g.iter_mut() {
                *v = v.neg();
            }
        }
        let cm = self
            .prep
            .index_of(m)
            .map(|i| self.prep.c[i].clone());
        let mut p = vec![A::zero(ctx); d];
        for (e, pe) in p.iter_mut().enumerate() {
            let mut acc = match (&cm, e % 2) {
                (Some(c), 0) => c.mul(&self.sigma[e / 2]),
                _ => A::zero(ctx),
            };
            let mut j = 0;
            while 2 * j + 1 <= e {
                acc = acc.add(&self.sigma[j].mul(&g[e - 2 * j - 1]));
                j += 1;
            }
            *pe = acc;
        }
        Cell::from_poly(m, p, self.eps)
    }
}

impl<A: Arith> Cell<A> {
    pub fn from_poly(m: i64, p: Vec<A>, eps: f64) -> Self {
        let ctx = p[0].ctx();
        let dp: Vec<A> = p.iter().enumerate().skip(1).map(|(j, c)| c.mul_i64(j as i64)).collect();
        let inv = inv_ints::<A>(ctx, p.len());
        let mut phi = vec![A::zero(ctx)];
        phi.extend(p.iter().zip(&inv).map(|(c, r)| c.mul(r)));
        let mut b2 = 0.0;
        let mut h = 1.0;
        for j in 2..p.len() {
            b2 += (j * (j - 1)) as f64 * p[j].abs().hi_f64() * h;
            h *= 0.5;
        }
        Cell {
            m,
            p,
            dp,
            phi,
            b2: up(b2),
            eps,
        }
    }

    /// `P(c)` and a range of `P` on `[c - r, c + r]`, both without the remainder.
    pub fn range(&self, c: f64, r: f64) -> (A, A) {
        let (v, _, rng) = self.range_d(c, r);
        (v, rng)
    }

    /// Like `range`, also returning `P'(c)`.
    pub fn range_d(&self, c: f64, r: f64) -> (A, A, A) {
        let ctx = self.p[0].ctx();
        let x = A::from_f64(ctx, c);
        let v = horner(&self.p, &x);
        let dv = horner(&self.dp, &x);
        let spread = dv
            .abs()
            .mul(&A::from_f64(ctx, r))
            .add(&A::from_f64(ctx, up(self.b2 * r * r * 0.5)));
        let rng = v.inflate(&spread);
        (v, dv, rng)
    }

    /// `int_a^b P`.
    pub fn integral(&self, a: f64, b: f64) -> A {
        let ctx = self.p[0].ctx();
        horner(&self.phi, &A::from_f64(ctx, b)).sub(&horner(&self.phi, &A::from_f64(ctx, a)))
    }
}

/// `(sum x, sum |x|)` with four interleaved accumulators.
fn sums(xs: &[f64]) -> (f64, f64) {
    let mut a = [0f64; 4];
    let mut b = [0f64; 4];
    let chunks = xs.chunks_exact(4);
    let rest = chunks.remainder();
    for c in chunks {
        for l in 0..4 {
            a[l] += c[l];
            b[l] += c[l].abs();
        }
    }
    for (l, v) in rest.iter().enumerate() {
        a[l] += v;
        b[l] += v.abs();
    }
    ((a[0] + a[1]) + (a[2] + a[3]), (b[0] + b[1]) + (b[2] + b[3]))
}

/// Like `sums`, then multiplies each `x` by the matching `r`.
fn sums_scale(xs: &mut [f64], rs: &[f64]) -> (f64, f64) {
    let mut a = [0f64; 4];
    let mut b = [0f64; 4];
    let n4 = xs.len() / 4 * 4;
    let (head, tail) = xs.split_at_mut(n4);
    let (rh, rt) = rs.split_at(n4);
    for (c, r) in head.chunks_exact_mut(4).zip(rh.chunks_exact(4)) {
        for l in 0..4 {
            a[l] += c[l];
            b[l] += c[l].abs();
            c[l] *= r[l];
        }
    }
    for (l, (v, r)) in tail.iter_mut().zip(rt).enumerate() {
        a[l] += *v;
        b[l] += v.abs();
        *v *= *r;
    }
    ((a[0] + a[1]) + (a[2] + a[3]), (b[0] + b[1]) + (b[2] + b[3]))
}

/// `pi^D u / (2^D D!)`, rounded up.
fn remainder(d: usize, u: f64) -> f64 {
    let mut v = u;
    for i in 1..=d {
        v *= std::f64::consts::FRAC_PI_2 / i as f64;
    }
    up(v * (1.0 + 1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::F64Iv;

    fn q(n: i64) -> ElementarySignal {
        let mut v = vec![(0, ExactRational::one())];
        for k in 1..=n {
            v.push((-2 * k, ExactRational::ratio(-1, n).unwrap()));
        }
        ElementarySignal::from_exact(2 * n as u64, v).unwrap()
    }

    #[test]
    fn cell_model_matches_direct_evaluation() {
        let f = q(64);
        let field = Field::<F64Iv>::new((), &f, Part::Re, 1e-12, 1.0);
        let prep = f.prepare::<F64Iv>((), Part::Re);
        for m in [-300i64, -129, -64, -1, 0, 3, 200] {
            let cell = field.cell(m);
            for s in [-0.5, -0.2, 0.0, 0.31, 0.5] {
                let v = horner(&cell.p, &F64Iv::point(s)).inflate(&F64Iv::point(cell.eps));
                let d = prep.eval(&F64Iv::point(m as f64 + s));
                assert!(v.intersect(&d).is_some(), "m={m} s={s} {v:?} {d:?}");
                assert!(v.width_f64() < 1e-9, "{v:?}");
            }
        }
    }

    #[test]
    fn exact_moments_vanish() {
        let f = q(64);
        let mom = moments::<F64Iv>((), &f, Part::Re, 10).unwrap();
        assert!(mom.zero[0]);
        assert!(!mom.zero[1]);
        assert_eq!(mom.kappa2, -128);
    }
}
