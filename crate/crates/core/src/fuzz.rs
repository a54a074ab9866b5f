//! Seeded random descriptions, signals and rationals for the verification
//! suites and tests.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::desc::Description;
use crate::exact::ExactRational;
use crate::signal::ElementarySignal;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// `a / b` with `|a| <= num`, `1 <= b <= den`.
pub fn rational(r: &mut impl Rng, num: i64, den: i64) -> ExactRational {
    ExactRational::ratio(r.gen_range(-num..=num), r.gen_range(1..=den)).expect("den >= 1")
}

fn pick<'a>(r: &mut impl Rng, xs: &[&'a str]) -> &'a str {
    xs[r.gen_range(0..xs.len())]
}

/// A coefficient expression in `n` and `k`.
fn coef_expr(r: &mut impl Rng, depth: u32) -> String {
    let leaves = [
        "1", "k", "n", "1/2", "-3/4", "(-1)^k", "1/(1 + k^2)", "1/(n + 1)", "k/(n + 2)",
    ];
    if depth == 0 || r.gen_bool(0.3) {
        let c = rational(r, 9, 7);
        return if r.gen_bool(0.5) {
            pick(r, &leaves).to_string()
        } else {
            format!("({c})")
        };
    }
    let a = coef_expr(r, depth - 1);
    let b = coef_expr(r, depth - 1);
    match r.gen_range(0..6) {
        0 => format!("{a} + {b}"),
        1 => format!("{a} - {b}"),
        2 => format!("({a}) * ({b})"),
        3 => format!("({a}) / (2 + k^2)"),
        4 => format!("if(k >= 0, {a}, {b})"),
        _ => format!("if(k % 2 == 0, {a}, 0)"),
    }
}

/// Document text for a random description with exact coefficients.
pub fn description_text(r: &mut impl Rng, continuous: bool, p: &str) -> String {
    let (space, kind) = if continuous {
        ("Bpi", "continuous")
    } else {
        ("lp", "discrete")
    };
    let l = match r.gen_range(0..3) {
        0 => format!("{}", r.gen_range(0..6)),
        1 => format!("n + {}", r.gen_range(0..3)),
        _ => format!("min(n, {})", r.gen_range(1..8)),
    };
    let gain = if r.gen_bool(0.3) {
        format!(" gain(n) = {};", rational(r, 5, 4))
    } else {
        String::new()
    };
    let c = coef_expr(r, 3);
    let cim = if r.gen_bool(0.15) {
        format!(" cim(n, k) = {};", coef_expr(r, 1))
    } else {
        String::new()
    };
    let xi = format!("{} * M + {}", r.gen_range(1..4), r.gen_range(0..5));
    format!(
        "space {space}; p {p}; kind {kind};\n\
         generator {{ L(n) = {l};{gain} c(n, k) = {c};{cim} }}\n\
         modulus {{ xi(M) = {xi} }}"
    )
}

/// A random valid description.
pub fn description(r: &mut impl Rng, continuous: bool, p: &str) -> Description {
    let text = description_text(r, continuous, p);
    Description::parse(&text).unwrap_or_else(|e| panic!("fuzzed document failed: {e}\n{text}"))
}

/// A random real signal with exact coefficients on `[-l, l]`.
pub fn signal(r: &mut impl Rng, max_l: u64) -> ElementarySignal {
    let l = r.gen_range(0..=max_l);
    let li = l as i64;
    let mut cs = Vec::new();
    for k in -li..=li {
        if r.gen_bool(0.7) {
            cs.push((k, rational(r, 12, 8)));
        }
    }
    ElementarySignal::from_exact(l, cs).expect("window fits")
}
