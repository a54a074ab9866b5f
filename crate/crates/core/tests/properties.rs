use proptest::prelude::*;

use shannon_core::desc::Description;
use shannon_core::dyadic::Dyadic;
use shannon_core::error::Error;
use shannon_core::exact::{rational_arith, ArithOp, ExactRational};
use shannon_core::fuzz;
use shannon_core::interval::Enclosure;
use shannon_core::norm::peak_value;
use shannon_core::real::{approximate, RealDescription};
use shannon_core::verify::Oracle;

const TOKENS: &[&str] = &[
    "space", "Bpi", "lp", "p", "kind", "continuous", "discrete", "generator", "modulus", "gate",
    "h", "frozen", "partial", "L(n)", "c(n, k)", "gain(n)", "xi(M)", "=", ";", "{", "}", "(", ")",
    "[", "]", ",", "n", "k", "M", "1", "2", "3/2", "inf", "+", "-", "*", "/", "^", "%", "if",
    "sum", "limit", "pi", "hsum", "where", "==", "&&", "<", "!", "0", "x", "#",
];

fn well_formed(e: &Error) -> bool {
    matches!(e, Error::Syntax { .. } | Error::Validation(_))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn parser_is_total_on_token_soup(toks in prop::collection::vec(prop::sample::select(TOKENS), 0..48)) {
        let text = toks.join(" ");
        match Description::parse(&text) {
            Ok(d) => prop_assert_eq!(Description::parse(&d.serialize()).unwrap(), d),
            Err(e) => prop_assert!(well_formed(&e), "{e:?} on {text}"),
        }
    }

    #[test]
    fn parser_is_total_on_mutations(seed in any::<u64>(), cut in any::<prop::sample::Index>(),
                                    len in 0usize..6, ins in prop::sample::select(TOKENS)) {
        let mut r = fuzz::rng(seed);
        let text = fuzz::description_text(&mut r, seed % 2 == 0, "2");
        let chars: Vec<char> = text.chars().collect();
        let at = cut.index(chars.len());
        let end = (at + len).min(chars.len());
        let mutated: String = chars[..at].iter().chain(ins.chars().collect::<Vec<_>>().iter())
            .chain(chars[end..].iter()).collect();
        match Description::parse(&mutated) {
            Ok(d) => prop_assert_eq!(Description::parse(&d.serialize()).unwrap(), d),
            Err(e) => prop_assert!(well_formed(&e), "{e:?} on {mutated}"),
        }
    }

    #[test]
    fn serialization_is_stable(seed in any::<u64>()) {
        let mut r = fuzz::rng(seed);
        let d = fuzz::description(&mut r, seed % 3 != 0, "2");
        let s = d.serialize();
        let back = Description::parse(&s).unwrap();
        prop_assert_eq!(back.serialize(), s);
        prop_assert_eq!(back, d);
    }
}

/// `a/b` as an i128 pair in lowest terms with positive denominator.
fn frac(n: i128, d: i128) -> (i128, i128) {
    fn gcd(a: i128, b: i128) -> i128 {
        if b == 0 { a.abs() } else { gcd(b, a % b) }
    }
    let g = gcd(n, d).max(1);
    let s = if d < 0 { -1 } else { 1 };
    (s * n / g, s * d / g)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn rational_arith_matches_i128(a in -10_000i64..10_000, b in 1i64..10_000,
                                   c in -10_000i64..10_000, d in 1i64..10_000, op in 0u8..4) {
        let x = ExactRational::ratio(a, b).unwrap();
        let y = ExactRational::ratio(c, d).unwrap();
        let (a, b, c, d) = (a as i128, b as i128, c as i128, d as i128);
        let (op, want) = match op {
            0 => (ArithOp::Add, Some(frac(a * d + c * b, b * d))),
            1 => (ArithOp::Sub, Some(frac(a * d - c * b, b * d))),
            2 => (ArithOp::Mul, Some(frac(a * c, b * d))),
            _ => (ArithOp::Div, (c != 0).then(|| frac(a * d, b * c))),
        };
        match (rational_arith(&x, &y, op), want) {
            (Ok(v), Some((n, m))) => {
                prop_assert_eq!(v.numer().to_string(), n.to_string());
                prop_assert_eq!(v.denom().to_string(), m.to_string());
            }
            (Err(Error::DivisionByZero), None) => {}
            (got, want) => prop_assert!(false, "{got:?} vs {want:?}"),
        }
    }
}

#[test]
fn oracle_detects_shifted_enclosures() {
    // a check that cannot fail is worthless: nudging an endpoint past the
    // true value must be caught
    let mut o = Oracle::new();
    let mut r = fuzz::rng(3);
    for _ in 0..50 {
        let f = fuzz::signal(&mut r, 5);
        let t = ExactRational::ratio(7, 3).unwrap();
        let e = f.eval_signal(&t, 60).unwrap().0;
        let coeffs: Vec<(i64, ExactRational)> =
            f.re().iter().map(|(k, c)| (*k, c.exact().unwrap().clone())).collect();
        let v = o.signal(&coeffs, &t);
        assert!(o.contains(&e, &v));
        let w = e.width();
        let above = Enclosure::new(e.hi().add(&w), e.hi().add(&w).add(&w)).unwrap();
        let below = Enclosure::new(e.lo().sub(&w).sub(&w), e.lo().sub(&w)).unwrap();
        if !w.is_zero() {
            assert!(!o.contains(&above, &v) && !o.contains(&below, &v));
        }
    }
}

#[test]
fn bernstein_inequality_at_sample_points() {
    // |f'(t)| <= pi sup |f| on B_pi^inf
    let mut r = fuzz::rng(21);
    for _ in 0..20 {
        let f = fuzz::signal(&mut r, 4);
        if f.is_zero() {
            continue;
        }
        let sup = peak_value(&f, 16).unwrap();
        let bound = sup.hi_f64() * std::f64::consts::PI;
        for j in -40..=40 {
            let t = ExactRational::ratio(j, 7).unwrap();
            let d = f.eval_derivative(&t, 30).unwrap().0;
            assert!(d.abs().lo_f64() <= bound, "f'({t}) = {d}, bound {bound}");
        }
    }
}

#[test]
fn real_descriptions_enclose_known_values() {
    let pi = Dyadic::from_f64(std::f64::consts::PI).unwrap();
    for m in [4u32, 8, 16, 32] {
        assert!(approximate(&RealDescription::zero(), m).unwrap().contains(&Dyadic::zero()));
        let third = ExactRational::ratio(1, 3).unwrap();
        assert!(approximate(&RealDescription::constant(&third), m).unwrap().contains_rational(&third));
        let p = approximate(&RealDescription::pi(), m).unwrap();
        // f64 pi is within 2^-51 of pi; the enclosure has radius >= 2^-m
        assert!(p.widen(&Dyadic::pow2(-50)).contains(&pi), "{p}");
        let c = approximate(&RealDescription::c_of(256), m).unwrap();
        assert!(c.lo_f64() <= -2.3900896 && -2.3900897 <= c.hi_f64(), "{c}");
    }
}
