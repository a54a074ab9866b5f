use shannon_core::desc::Exponent;
use shannon_core::dyadic::Dyadic;
use shannon_core::error::Error;
use shannon_core::exact::ExactRational;
use shannon_core::fuzz;
use shannon_core::interval::Enclosure;
use shannon_core::norm::*;
use shannon_core::signal::ElementarySignal;

use rand::Rng;

fn r(n: i64, d: i64) -> ExactRational {
    ExactRational::ratio(n, d).unwrap()
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (std::f64::consts::PI * x).sin() / (std::f64::consts::PI * x)
    }
}

fn coeffs(f: &ElementarySignal) -> Vec<(i64, f64)> {
    f.re().iter().map(|(k, c)| (*k, c.exact().unwrap().to_f64())).collect()
}

fn eval(cs: &[(i64, f64)], t: f64) -> f64 {
    cs.iter().map(|(k, c)| c * sinc(t - *k as f64)).sum()
}

/// Composite trapezoid of `|f|` on `[-t, t]` with step `1/steps`.
fn trapezoid_l1(f: &ElementarySignal, t: f64, steps: u32) -> f64 {
    let cs = coeffs(f);
    let h = 1.0 / steps as f64;
    let n = (2.0 * t / h).round() as i64;
    let mut s = 0.5 * (eval(&cs, -t).abs() + eval(&cs, t).abs());
    for i in 1..n {
        s += eval(&cs, -t + i as f64 * h).abs();
    }
    s * h
}

fn near(e: &Enclosure, v: f64, tol: f64) -> bool {
    e.lo_f64() - tol <= v && v <= e.hi_f64() + tol
}

/// A random exact signal with vanishing alternating sum.
fn integrable(rng: &mut impl Rng, max_l: u64) -> ElementarySignal {
    loop {
        let f = fuzz::signal(rng, max_l);
        let mut cs: Vec<(i64, ExactRational)> =
            f.re().iter().map(|(k, c)| (*k, c.exact().unwrap().clone())).collect();
        if cs.len() < 2 {
            continue;
        }
        let alt = cs[1..].iter().fold(ExactRational::zero(), |a, (k, c)| {
            if k.rem_euclid(2) == 1 {
                a.sub(c)
            } else {
                a.add(c)
            }
        });
        let k0 = cs[0].0;
        cs[0].1 = if k0.rem_euclid(2) == 1 { alt } else { alt.neg() };
        let g = ElementarySignal::from_exact(f.l(), cs).unwrap();
        if !g.is_zero() && integrability(&g, 20).is_ok() {
            return g;
        }
    }
}

#[test]
fn sinc_norms() {
    let s = ElementarySignal::unit();
    let one = Dyadic::one();
    assert!(l2_norm_signal(&s, 40).unwrap().contains(&one));
    assert!(lp_norm_signal(&s, &Exponent::Inf, 20).unwrap().contains(&one));
    assert!(matches!(l1_norm_signal(&s, 10), Err(Error::NotIntegrable(_))));
    // Parseval for the sinc basis, checked by direct quadrature
    let q = l2_norm_quadrature(&s, 10, 200).unwrap();
    assert!(q.contains(&one), "{q}");
}

#[test]
fn q_norms_against_reference_values() {
    // dense trapezoid with Richardson extrapolation plus analytic tails
    // (numpy/mpmath), frozen
    let q4 = l1q(4).unwrap();
    assert!(near(&q4, 2.987475312655, 4e-11), "{q4}");
    let q8 = l1q(8).unwrap();
    assert!(near(&q8, 3.1441468136, 2e-10), "{q8}");
    assert!(near(&l1q(64).unwrap(), 3.84882079, 1e-8));
    assert!(near(&l1q(512).unwrap(), 4.66822752, 1e-8));
    assert!(q4.width_at_most(-30) && q8.width_at_most(-30));
}

#[test]
fn q8_other_exponents() {
    let f = q_signal(8).unwrap();
    let two = lp_norm_signal(&f, &Exponent::two(), 30).unwrap();
    // ||q_8||_2^2 = 1 + 8/64
    assert!(two.mul(&two).contains_rational(&r(9, 8)));
    let p32 = lp_norm_signal(&f, &"3/2".parse().unwrap(), 12).unwrap();
    assert!(near(&p32, 1.36878, 1e-4), "{p32}");
    let p3 = lp_norm_signal(&f, &"3".parse().unwrap(), 12).unwrap();
    assert!(near(&p3, 0.93173, 1e-4), "{p3}");
}

#[test]
fn l1_against_trapezoid() {
    let mut rng = fuzz::rng(7);
    for _ in 0..6 {
        let f = integrable(&mut rng, 4);
        let e = l1_norm_signal(&f, 16).unwrap();
        let t = 300.0;
        let tail = tail_bound(&f, t as u64, TailKind::L1).unwrap().bound.to_f64();
        let v = trapezoid_l1(&f, t, 64);
        assert!(near(&e, v, tail + 1e-3 * (1.0 + v)), "{e} vs {v} (tail {tail})");
        assert!(e.width_at_most(-16));
    }
}

#[test]
fn mesh_refinement_stays_consistent() {
    let mut rng = fuzz::rng(11);
    for _ in 0..20 {
        let f = integrable(&mut rng, 3);
        let coarse = NormOptions::default();
        let fine = NormOptions { mesh: 2, ..coarse };
        let a = l1_norm_signal_with(&f, 12, &coarse).unwrap();
        let b = l1_norm_signal_with(&f, 12, &fine).unwrap();
        assert!(a.intersect(&b).is_some(), "{a} vs {b}");
        let pa = peak_value_with(&f, 12, &coarse).unwrap();
        let pb = peak_value_with(&f, 12, &fine).unwrap();
        assert!(pa.intersect(&pb).is_some(), "{pa} vs {pb}");
    }
}

#[test]
fn tail_envelope_holds() {
    let mut rng = fuzz::rng(13);
    for _ in 0..10 {
        let f = fuzz::signal(&mut rng, 5);
        let l = f.l() as i64;
        for j in 0..50i64 {
            let t = r((l + 1) * 8 + 3 * j + 1, 8);
            let t = if j % 2 == 0 { t } else { t.neg() };
            let env = tail_envelope(&f, t.to_f64()).unwrap();
            let v = f.eval_signal(&t, 40).unwrap().0;
            assert!(v.abs().hi_f64() <= env, "|f({t})| = {v} above {env}");
        }
    }
}

#[test]
fn parseval_quadrature_agrees() {
    let mut rng = fuzz::rng(17);
    for _ in 0..10 {
        let f = fuzz::signal(&mut rng, 4);
        let a = l2_norm_signal(&f, 30).unwrap();
        let b = l2_norm_quadrature(&f, 10, 100).unwrap();
        assert!(a.intersect(&b).is_some(), "{a} vs {b}");
    }
}

#[test]
fn peak_of_sinc_and_shift() {
    let s = ElementarySignal::unit();
    assert!(peak_value(&s, 20).unwrap().contains(&Dyadic::one()));
    // sinc(t) + sinc(t - 1) peaks at t = 1/2 with value 4/pi
    let d = ElementarySignal::from_exact(1, vec![(0, r(1, 1)), (1, r(1, 1))]).unwrap();
    let p = peak_value(&d, 20).unwrap();
    assert!(near(&p, 4.0 / std::f64::consts::PI, 1e-12) && p.width_at_most(-20), "{p}");
    let b = peak_bracket(&d).unwrap();
    assert!(p.subset_of(&b) || p.intersect(&b).is_some());
}

#[test]
fn sequence_norms_exact() {
    let x = shannon_core::signal::ElementarySequence::from_values(-1, &[r(3, 1), r(-4, 1), r(0, 1)]);
    assert_eq!(lp_norm_sequence_exact(&x, &Exponent::one()), Some(r(7, 1)));
    assert_eq!(lp_norm_sequence_exact(&x, &Exponent::Inf), Some(r(4, 1)));
    assert!(lp_norm_sequence(&x, &Exponent::two(), 30).unwrap().contains(&Dyadic::from_int(5)));
}

#[test]
fn complex_l1_is_inconclusive() {
    let f = ElementarySignal::new(
        1,
        shannon_core::signal::Coef::one(),
        vec![(0, shannon_core::signal::Coef::one()), (1, shannon_core::signal::Coef::one())],
        vec![(1, shannon_core::signal::Coef::one())],
    )
    .unwrap();
    assert!(matches!(l1_norm_signal(&f, 8), Err(Error::Inconclusive(_))));
}
