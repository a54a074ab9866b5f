//! Interval quadrature on cell models and the far-field tails.

use crate::elementary::pow;
use crate::exact::ExactRational;
use crate::interval::Arith;

use super::cell::{horner, up, Cell, Moments};

/// Pieces processed per cell and the depth cap for one adaptive integral.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Adapt {
    pub mesh: u32,
    pub max_depth: u32,
    /// Accept an undecided piece once its contribution width is below this.
    pub piece_tol: f64,
}

fn initial(sa: f64, sb: f64, mesh: u32) -> Vec<(f64, f64, u32)> {
    let n = mesh.max(1).next_power_of_two();
    let h = (sb - sa) / n as f64;
    (0..n).map(|i| (sa + h * i as f64, sa + h * (i + 1) as f64, 0)).collect()
}

/// Enclosure of `int_sa^sb |f(m + s)| ds` using the cell model.
pub(crate) fn int_abs<A: Arith>(cell: &Cell<A>, sa: f64, sb: f64, ad: &Adapt) -> A {
    let ctx = cell.p[0].ctx();
    let mut acc = A::zero(ctx);
    let mut stack = initial(sa, sb, ad.mesh);
    while let Some((a, b, depth)) = stack.pop() {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        let (_, dv, rng) = cell.range_d(c, r);
        let i = cell.integral(a, b);
        if rng.is_pos() || rng.is_neg() {
            acc = acc.add(&i.abs());
            continue;
        }
        let slope = dv.inflate(&A::from_f64(ctx, up(cell.b2 * r)));
        if slope.is_pos() || slope.is_neg() {
            if let Some(v) = split_at_root(cell, a, b, &slope, ad.piece_tol, depth >= ad.max_depth) {
                acc = acc.add(&v);
                continue;
            }
        }
        let sup = rng.abs().hi_f64();
        let hi = up(2.0 * r * sup);
        if hi <= ad.piece_tol || depth >= ad.max_depth {
            let lo = i.abs().lo_f64().max(0.0);
            acc = acc.add(&A::from_f64_bounds(ctx, lo.min(hi), hi));
        } else {
            stack.push((c, b, depth + 1));
            stack.push((a, c, depth + 1));
        }
    }
    acc.inflate(&A::from_f64(ctx, up(cell.eps * (sb - sa))))
}

/// `int_a^b |P|` for `P` monotone on `[a, b]`, split at a Newton estimate `x`
/// of the root. With `S = |int_a^x P| + |int_x^b P|` the integral lies in
/// `[S, S + 2 |P(x)| d]` where `d` bounds the distance from `x` to the root.
fn split_at_root<A: Arith>(cell: &Cell<A>, a: f64, b: f64, slope: &A, tol: f64, force: bool) -> Option<A> {
    let ctx = cell.p[0].ctx();
    let mid = |v: &A| 0.5 * (v.lo_f64() + v.hi_f64());
    let mut x = 0.5 * (a + b);
    for _ in 0..8 {
        let xa = A::from_f64(ctx, x);
        let d = mid(&horner(&cell.dp, &xa));
        if d == 0.0 {
            break;
        }
        let nx = (x - mid(&horner(&cell.p, &xa)) / d).clamp(a, b);
        if nx == x {
            break;
        }
        x = nx;
    }
    let px = horner(&cell.p, &A::from_f64(ctx, x)).abs().hi_f64();
    let dmin = slope.abs().lo_f64();
    let dist = if dmin > 0.0 { (px / dmin * (1.0 + 1e-12)).min(b - a) } else { b - a };
    let e = up(2.0 * px * dist);
    if e > tol && !force {
        return None;
    }
    let s = cell.integral(a, x).abs().add(&cell.integral(x, b).abs());
    Some(s.add(&A::from_f64_bounds(ctx, 0.0, e)))
}

/// Enclosure of `int_sa^sb f(m + s)^2 ds`.
pub(crate) fn int_sq<A: Arith>(cell: &Cell<A>, sa: f64, sb: f64, u_bound: f64) -> A {
    let ctx = cell.p[0].ctx();
    let n = cell.p.len();
    let mut sq = vec![A::zero(ctx); 2 * n - 1];
    for i in 0..n {
        for j in 0..n {
            sq[i + j] = sq[i + j].add(&cell.p[i].mul(&cell.p[j]));
        }
    }
    let anti = Cell::from_poly(cell.m, sq, 0.0);
    let v = anti.integral(sa, sb);
    // |f^2 - P^2| <= eps (2 |f| + eps)
    let e = up(cell.eps * (2.0 * u_bound + 2.0 * cell.eps) * (sb - sa));
    v.inflate(&A::from_f64(ctx, e))
}

/// Enclosure of `int_sa^sb |f(m + s)|^p ds` for real `f` and rational `p > 1`,
/// by the midpoint rule with a bound on the second derivative of `|P|^p`.
pub(crate) fn int_pow<A: Arith>(
    cell: &Cell<A>,
    sa: f64,
    sb: f64,
    p: &ExactRational,
    density: f64,
    ad: &Adapt,
) -> Option<A> {
    let ctx = cell.p[0].ctx();
    let pf = p.to_f64();
    let pa: A = A::from_rational(ctx, p);
    let pm1 = p.sub(&ExactRational::one());
    let pm2 = pm1.sub(&ExactRational::one());
    let eps = A::from_f64(ctx, cell.eps);
    let mut acc = A::zero(ctx);
    let mut stack = initial(sa, sb, ad.mesh);
    while let Some((a, b, depth)) = stack.pop() {
        let c = 0.5 * (a + b);
        let r = 0.5 * (b - a);
        let len = A::from_f64(ctx, b - a);
        let (v, dv, rng) = cell.range_d(c, r);
        let mag = rng.abs();
        let hi_e = mag.add(&eps).hi_f64();
        if rng.is_pos() || rng.is_neg() {
            let lo = A::from_f64(ctx, mag.lo_f64());
            let hi = A::from_f64(ctx, mag.hi_f64());
            let h = pow(&v.abs(), p)?;
            // |P|'' = p (p - 1) |P|^(p-2) P'^2 + p |P|^(p-1) P'' sgn
            let b2 = A::from_f64(ctx, cell.b2);
            let d1 = dv.abs().add(&b2.mul(&A::from_f64(ctx, r)));
            let t1 = spow(&lo, &pm2)?.max(&spow(&hi, &pm2)?);
            let hmax = pa
                .mul(&A::from_rational(ctx, &pm1))
                .abs()
                .mul(&t1)
                .mul(&d1.sqr())
                .add(&pa.mul(&pow(&hi, &pm1)?).mul(&b2));
            let quad_err = hmax.mul(&len.mul(&len).mul(&len)).mul_pow2(-3).div(&A::from_i64(ctx, 3))?;
            let eps_err = pa
                .mul(&pow(&A::from_f64(ctx, hi_e), &pm1)?)
                .mul(&eps)
                .mul(&len);
            if quad_err.abs().hi_f64() <= density * (b - a) || depth >= ad.max_depth {
                let err = quad_err.add(&eps_err).abs().hi_f64();
                acc = acc.add(&h.mul(&len).inflate(&A::from_f64(ctx, up(err))));
                continue;
            }
        } else {
            let hi = up(hi_e.powf(pf) * (1.0 + 1e-9)) * (b - a);
            if hi <= ad.piece_tol || depth >= ad.max_depth {
                let top = pow(&A::from_f64(ctx, hi_e), p)?.mul(&len).hi_f64();
                acc = acc.add(&A::from_f64_bounds(ctx, 0.0, top));
                continue;
            }
        }
        stack.push((c, b, depth + 1));
        stack.push((a, c, depth + 1));
    }
    Some(acc)
}

/// `x^q` for positive `x` and any sign of `q`.
fn spow<A: Arith>(x: &A, q: &ExactRational) -> Option<A> {
    if q.is_negative() {
        pow(x, &q.neg())?.recip()
    } else {
        pow(x, q)
    }
}

/// `int_T^inf |f|` beyond a boundary at distance `u2 / 2` from the expansion
/// centre, assuming `sum a_k = 0`.
///
/// Returns the enclosure and whether the leading moment dominated (otherwise
/// only an upper bound is known).
pub(crate) fn l1_tail<A: Arith>(ctx: A::Ctx, mom: &Moments<A>, u2: i64) -> (A, bool) {
    let pi = A::pi(ctx);
    let u = A::from_i64(ctx, u2).mul_pow2(-1);
    let v = u.mul_pow2(-mom.e);
    let vinv = v.recip().expect("positive distance");
    let j = mom.order();
    let rho = A::from_f64(ctx, mom.rho);
    let ratio = rho.div(&u).expect("positive distance");
    let sum_a = A::from_f64(ctx, mom.sum_abs);
    let gap = u.sub(&rho);
    // int_T^inf sum|a| rho^J / (u^J (u - rho)) du
    let tail_e = sum_a
        .mul(&ratio.powi(j as u32 - 1))
        .mul(&rho)
        .div(&gap.mul_i64(j as i64 - 1))
        .expect("u > rho");
    // pointwise remainder at u, times u
    let point_e = sum_a.mul(&ratio.powi(j as u32)).mul(&u).div(&gap).expect("u > rho");

    let mut vp = vec![A::one(ctx); j];
    for i in 1..j {
        vp[i] = vp[i - 1].mul(&vinv);
    }
    let terms: Vec<A> = (0..j).map(|i| mom.nu[i].mul(&vp[i])).collect();

    let lead = (1..j).find(|&i| !mom.zero[i]);
    let dominant = lead.map_or(false, |j0| {
        if (1..j0).any(|i| !mom.zero[i]) || terms[j0].contains_zero() {
            return false;
        }
        let rest = terms[j0 + 1..]
            .iter()
            .fold(point_e.clone(), |s, t| s.add(&t.abs()));
        terms[j0].abs().sub(&rest).is_pos()
    });

    if !dominant {
        let mut s = tail_e.clone();
        for (i, t) in terms.iter().enumerate().skip(1) {
            s = s.add(&t.abs().div(&A::from_i64(ctx, i as i64)).expect("nonzero"));
        }
        let hi = s.div(&pi).expect("pi");
        return (A::zero(ctx).hull(&hi.abs()), false);
    }

    let two_pi = A::from_i64(ctx, 2).div(&pi).expect("pi");
    let six = A::one(ctx).div(&A::from_i64(ctx, 6)).expect("six");
    let k2 = six
        .sub(&two_pi.mul(&pi.recip().expect("pi")))
        .div(&pi)
        .expect("pi");
    let unit = A::zero(ctx).hull(&A::one(ctx));
    let u2i = u.sqr().recip().expect("u > 0");
    let u3i = u2i.div(&u).expect("u > 0");
    let mut s = A::zero(ctx);
    for (i, t) in terms.iter().enumerate().skip(1) {
        if mom.zero[i] {
            continue;
        }
        let si = (i + 1) as i64;
        let main = two_pi.div(&A::from_i64(ctx, i as i64)).expect("nonzero");
        let corr = u3i
            .mul_i64(si * (si + 1))
            .add(&u2i.mul_i64(si))
            .mul(&k2)
            .mul(&unit);
        s = s.add(&t.mul(&main.sub(&corr)));
    }
    let s = s.inflate(&tail_e);
    (s.abs().div(&pi).expect("pi"), true)
}
