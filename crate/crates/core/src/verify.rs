//! Named verification suites. Each suite returns a [`Report`] of individual
//! checks; a suite that cannot finish within its limits returns the error
//! instead of a partial pass.

use std::fmt;
use std::str::FromStr;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use rand::Rng;
use serde::Serialize;

use crate::compile::{compile_interpolation, roundtrip_check, ConstantTable};
use crate::desc::Exponent;
use crate::dyadic::Dyadic;
use crate::elementary::{exp, ln, pow, sin_cos_pi, sinc};
use crate::error::{Error, Result};
use crate::exact::ExactRational;
use crate::fuzz;
use crate::interval::{Arith, DyadicIv, Enclosure, F64Iv};
use crate::machine::{counter_program, Machine, LOOP_PROGRAM};
use crate::norm::{l2_norm_quadrature, l2_norm_signal, lp_norm_sequence_exact, q_signal};
use crate::witness::{
    build_g_witness, build_gated_family, build_normalized_q, build_q_witness, GateMode, QSchedule,
    WitnessOptions,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Lemma1,
    Lemma3,
    Lemma4Scaled,
    RoundtripP2,
    Soundness,
    Refusal,
    Gated,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Lemma1,
        Suite::Lemma3,
        Suite::Lemma4Scaled,
        Suite::RoundtripP2,
        Suite::Soundness,
        Suite::Refusal,
        Suite::Gated,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemma1 => "lemma1",
            Suite::Lemma3 => "lemma3",
            Suite::Lemma4Scaled => "lemma4-scaled",
            Suite::RoundtripP2 => "roundtrip-p2",
            Suite::Soundness => "soundness",
            Suite::Refusal => "refusal",
            Suite::Gated => "gated",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Suite::ALL.iter().map(|x| x.name()).collect();
                Error::Validation(format!("unknown suite '{s}'; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub suite: Suite,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl Report {
    fn new(suite: Suite, checks: Vec<Check>) -> Self {
        let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
        Report { suite, checks, pass }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        write!(
            f,
            "{} {} ({}/{} checks)",
            self.suite,
            if self.pass { "passed" } else { "FAILED" },
            self.checks.iter().filter(|c| c.pass).count(),
            self.checks.len()
        )
    }
}

fn check(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        pass,
        detail: detail.into(),
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Random cases in the soundness battery.
    pub cases: usize,
    /// Fuzzed documents in the round-trip and refusal suites.
    pub fuzz: usize,
    pub witness: WitnessOptions,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0x5eed,
            cases: 1000,
            fuzz: 50,
            witness: WitnessOptions::default(),
        }
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<Report> {
    let checks = match suite {
        Suite::Lemma1 => lemma1(opts)?,
        Suite::Lemma3 => lemma3(opts)?,
        Suite::Lemma4Scaled => lemma4_scaled(opts)?,
        Suite::RoundtripP2 => roundtrip_p2(opts)?,
        Suite::Soundness => soundness(opts)?,
        Suite::Refusal => refusal(opts)?,
        Suite::Gated => gated(opts)?,
    };
    Ok(Report::new(suite, checks))
}

fn dec(e: &Enclosure) -> String {
    let (a, b) = e.decimal_bounds(10);
    format!("[{a}, {b}]")
}

fn dec_d(d: &Dyadic) -> String {
    Enclosure::point(d.clone()).decimal_bounds(6).0
}

// ------------------------------------------------------------------ lemma 1

fn lemma1(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for n in 1..=3u64 {
        let w = build_g_witness(n, 20, &opts.witness)?;
        out.push(check(
            format!("f{n}(1/2) = 1 within 2^-20"),
            w.value_ok(20),
            format!("N = 2^{}, {} ({})", w.log2_n, dec(&w.value_at_half), w.method),
        ));
        out.push(check(
            format!("||S f{n}||_inf = 1/|C(N)| < 1/{n}"),
            w.sample_ok(),
            dec(&w.sample_sup),
        ));
        out.push(check(
            format!("|C(N)| > log2(N)/4 for n = {n}"),
            w.c_ok(),
            format!("|C(N)| in {}, log2(N)/4 = {}", dec(&w.c.abs()), w.log2_n as f64 / 4.0),
        ));
        let ratio = w.value_at_half.lo().div(w.sample_sup.hi(), 64, crate::dyadic::Round::Down);
        let n_d = Dyadic::from_int(n as i64);
        out.push(check(
            format!("divergence ratio >= {n}"),
            ratio.as_ref().is_some_and(|r| *r >= n_d),
            ratio.as_ref().map_or("n/a".into(), |r| format!("ratio_lo = {}", dec_d(r))),
        ));
    }
    Ok(out)
}

// ------------------------------------------------------------------ lemma 3

pub const LEMMA3_N: [u64; 3] = [8, 64, 512];

fn lemma3(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for big_n in LEMMA3_N {
        let w = build_q_witness(big_n, 10, &opts.witness)?;
        out.push(check(
            format!("||q_{big_n}||_1 inside the sandwich"),
            w.inside() && w.l1.width_at_most(-10),
            format!("{} < {} < {}", dec(&w.lower), dec(&w.l1), dec(&w.upper)),
        ));
    }
    let two = ExactRational::from_int(2);
    let bad: Vec<u64> = (2..=512u64)
        .filter(|&n| {
            let s = q_signal(n).map(|q| q.sample());
            !matches!(s.map(|s| lp_norm_sequence_exact(&s, &Exponent::one())), Ok(Some(v)) if v == two)
        })
        .collect();
    out.push(check(
        "||S q_N||_1 = 2 exactly for N = 2..512",
        bad.is_empty(),
        if bad.is_empty() {
            "511 exact sums".to_string()
        } else {
            format!("differs at N = {bad:?}")
        },
    ));
    Ok(out)
}

// ------------------------------------------------------------ lemma 4 scaled

pub const LEMMA4_N: [u64; 3] = [64, 512, 4096];

fn lemma4_scaled(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut prev: Option<Enclosure> = None;
    for (i, big_n) in LEMMA4_N.into_iter().enumerate() {
        let w = build_normalized_q(i as u64 + 1, QSchedule::Fixed(big_n), 10, &opts.witness)?;
        out.push(check(
            format!("||f||_1 = 1 for N = {big_n}"),
            w.norm.contains(&Dyadic::one()) && w.norm.width_at_most(-10),
            dec(&w.norm),
        ));
        if let Some(p) = &prev {
            out.push(check(
                format!("sample norm decreases at N = {big_n}"),
                w.sample_l1.hi() < p.lo() && w.sample_l1.width_at_most(-10),
                format!("{} < {}", dec(&w.sample_l1), dec(p)),
            ));
        }
        prev = Some(w.sample_l1);
    }
    Ok(out)
}

// ------------------------------------------------------------- round trip

fn roundtrip_p2(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let table = ConstantTable::default();
    let mut r = fuzz::rng(opts.seed);
    let mut out = Vec::new();
    for i in 0..opts.fuzz {
        let d = fuzz::description(&mut r, i % 2 == 0, "2");
        let rep = roundtrip_check(&d, &table, 4, 20)?;
        let worst = rep
            .rows
            .iter()
            .map(|x| x.distance.hi().clone())
            .max()
            .unwrap_or_else(Dyadic::zero);
        out.push(check(
            format!("round trip #{i} ({:?})", d.kind),
            rep.pass && rep.shift == 0,
            format!(
                "shift {}, moduli {}, max distance {}",
                rep.shift,
                if rep.modulus_ok { "equal" } else { "differ" },
                dec_d(&worst)
            ),
        ));
    }
    Ok(out)
}

fn refusal(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let table = ConstantTable::default();
    let mut r = fuzz::rng(opts.seed ^ 0x1f);
    let mut refused = [0usize; 2];
    let mut other = Vec::new();
    let per = opts.fuzz.max(1);
    for (j, p) in ["1", "inf"].into_iter().enumerate() {
        for _ in 0..per {
            let d = fuzz::description(&mut r, false, p);
            match compile_interpolation(&d, &table) {
                Err(Error::UnsupportedExponent(_)) => refused[j] += 1,
                x => other.push(format!("p = {p}: {:?}", x.map(|c| c.report))),
            }
        }
    }
    Ok(vec![
        check("interpolation refused on l^1", refused[0] == per, format!("{}/{per}", refused[0])),
        check("interpolation refused on l^inf", refused[1] == per, format!("{}/{per}", refused[1])),
        check(
            "no other outcome",
            other.is_empty(),
            other.first().cloned().unwrap_or_else(|| "none".into()),
        ),
    ])
}

// ------------------------------------------------------------------ gated

fn gated(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let halt = Machine::parse(&counter_program(37))?;
    let fam = build_gated_family(&halt, GateMode::PointValue, 6, 20, &opts.witness)?;
    let value_ok = fam
        .frozen_value
        .as_ref()
        .is_some_and(|v| v.contains(&Dyadic::one()) && v.width_at_most(-16));
    let mut out = vec![
        check(
            "halt37 freezes at k = 4",
            fam.freeze_k == Some(4),
            format!("h = {:?}, freeze at {:?}", fam.h, fam.freeze_k),
        ),
        check(
            "frozen value at 1/2 encloses 1",
            value_ok,
            fam.frozen_value.as_ref().map_or("none".into(), dec),
        ),
    ];
    let lp = Machine::parse(LOOP_PROGRAM)?;
    let fam = build_gated_family(&lp, GateMode::PointValue, 6, 20, &opts.witness)?;
    for row in &fam.rows {
        out.push(check(
            format!("loop row k = {}", row.k),
            row.ok() && row.bound.is_some() && row.sample_norm.width_at_most(-16),
            format!(
                "h = {}, norm {} <= {}",
                row.h,
                dec(&row.sample_norm),
                row.bound.as_ref().map_or("none".into(), dec_d)
            ),
        ));
    }
    Ok(out)
}

// -------------------------------------------------------------- soundness

/// Working precision of the floating oracle.
pub const ORACLE_BITS: usize = 256;

/// A 256-bit floating reference for the quantities the interval code
/// encloses. Its error is far below anything a containment check can see.
pub struct Oracle {
    cc: Consts,
    pi: BigFloat,
}

const RM: RoundingMode = RoundingMode::ToEven;
const P: usize = ORACLE_BITS;

impl Default for Oracle {
    fn default() -> Self {
        Self::new()
    }
}

impl Oracle {
    pub fn new() -> Self {
        let mut cc = Consts::new().expect("oracle constants");
        let pi = cc.pi(P, RM);
        Oracle { cc, pi }
    }

    fn int(&mut self, v: &BigInt) -> BigFloat {
        BigFloat::parse(&v.to_string(), Radix::Dec, P, RM, &mut self.cc)
    }

    pub fn rational(&mut self, q: &ExactRational) -> BigFloat {
        let (n, d) = (self.int(q.numer()), self.int(q.denom()));
        n.div(&d, P, RM)
    }

    pub fn dyadic(&mut self, d: &Dyadic) -> BigFloat {
        let m = self.int(d.mantissa());
        let e = d.exponent();
        let two = BigFloat::from_word(2, P);
        let s = two.powi(e.unsigned_abs() as usize, P, RM);
        if e >= 0 {
            m.mul(&s, P, RM)
        } else {
            m.div(&s, P, RM)
        }
    }

    pub fn sinc(&mut self, x: &BigFloat) -> BigFloat {
        if x.is_zero() {
            return BigFloat::from_word(1, P);
        }
        let a = x.mul(&self.pi, P, RM);
        a.sin(P, RM, &mut self.cc).div(&a, P, RM)
    }

    pub fn sin_pi(&mut self, x: &BigFloat) -> BigFloat {
        x.mul(&self.pi, P, RM).sin(P, RM, &mut self.cc)
    }

    pub fn cos_pi(&mut self, x: &BigFloat) -> BigFloat {
        x.mul(&self.pi, P, RM).cos(P, RM, &mut self.cc)
    }

    pub fn exp(&mut self, x: &BigFloat) -> BigFloat {
        x.exp(P, RM, &mut self.cc)
    }

    pub fn ln(&mut self, x: &BigFloat) -> BigFloat {
        x.ln(P, RM, &mut self.cc)
    }

    /// `x^p` for `x > 0`.
    pub fn pow(&mut self, x: &BigFloat, p: &ExactRational) -> BigFloat {
        let l = self.ln(x).mul(&self.rational(p), P, RM);
        self.exp(&l)
    }

    /// `sum_k c_k sinc(t - k)`.
    pub fn signal(&mut self, coeffs: &[(i64, ExactRational)], t: &ExactRational) -> BigFloat {
        let mut acc = BigFloat::from_word(0, P);
        for (k, c) in coeffs {
            let x = self.rational(&t.sub(&ExactRational::from_int(*k)));
            let term = self.rational(c).mul(&self.sinc(&x), P, RM);
            acc = acc.add(&term, P, RM);
        }
        acc
    }

    /// `lo - slack <= v <= hi + slack` with `slack = 2^-200 (1 + |v|)`.
    pub fn contains(&mut self, e: &Enclosure, v: &BigFloat) -> bool {
        let tiny = self.dyadic(&Dyadic::pow2(-200));
        let mag = if v.is_negative() { v.neg() } else { v.clone() };
        let slack = tiny.mul(&BigFloat::from_word(1, P).add(&mag, P, RM), P, RM);
        let lo = self.dyadic(e.lo()).sub(&slack, P, RM);
        let hi = self.dyadic(e.hi()).add(&slack, P, RM);
        matches!(lo.cmp(v), Some(c) if c <= 0) && matches!(v.cmp(&hi), Some(c) if c <= 0)
    }
}

fn enc<A: Arith>(x: &A) -> Option<Enclosure> {
    x.to_enclosure()
}

/// One random elementary-function case on both backends.
fn elementary_case(r: &mut impl Rng, o: &mut Oracle) -> (String, bool) {
    let q = fuzz::rational(r, 40, 16);
    let bits = [53u32, 64, 96, 128, 180][r.gen_range(0..5)];
    let x = o.rational(&q);
    let which = r.gen_range(0..5);
    let (name, reference) = match which {
        0 => ("sinc", o.sinc(&x)),
        1 => ("sin(pi x)", o.sin_pi(&x)),
        2 => ("cos(pi x)", o.cos_pi(&x)),
        3 => ("exp", o.exp(&x)),
        _ => ("ln", {
            let a = o.rational(&q.abs().add(&ExactRational::ratio(1, 8).expect("1/8")));
            o.ln(&a)
        }),
    };
    let arg = |ctx_q: &ExactRational| -> ExactRational {
        if which == 4 {
            ctx_q.abs().add(&ExactRational::ratio(1, 8).expect("1/8"))
        } else {
            ctx_q.clone()
        }
    };
    let eval = |v: &dyn Fn() -> Option<Enclosure>| v();
    let dy = eval(&|| {
        let xv = DyadicIv::from_rational(bits, &arg(&q));
        match which {
            0 => enc(&sinc(&xv)),
            1 => enc(&sin_cos_pi(&xv).0),
            2 => enc(&sin_cos_pi(&xv).1),
            3 => enc(&exp(&xv)),
            _ => ln(&xv).and_then(|v| enc(&v)),
        }
    });
    let fl = eval(&|| {
        let xv = F64Iv::from_rational((), &arg(&q));
        match which {
            0 => enc(&sinc(&xv)),
            1 => enc(&sin_cos_pi(&xv).0),
            2 => enc(&sin_cos_pi(&xv).1),
            3 => enc(&exp(&xv)),
            _ => ln(&xv).and_then(|v| enc(&v)),
        }
    });
    let ok = match (dy, fl) {
        (Some(a), Some(b)) => o.contains(&a, &reference) && o.contains(&b, &reference),
        _ => false,
    };
    (format!("{name}({q}) at {bits} bits"), ok)
}

/// `x^p` for random positive `x` and rational `p >= 1`.
fn pow_case(r: &mut impl Rng, o: &mut Oracle) -> (String, bool) {
    let x = ExactRational::ratio(r.gen_range(1..=60), r.gen_range(1..=12)).expect("den");
    let p = ExactRational::ratio(r.gen_range(4..=16), r.gen_range(2..=4)).expect("den");
    let bits = [64u32, 128][r.gen_range(0..2)];
    let xb = o.rational(&x);
    let reference = o.pow(&xb, &p);
    let ok = pow(&DyadicIv::from_rational(bits, &x), &p)
        .and_then(|v| enc(&v))
        .is_some_and(|e| o.contains(&e, &reference));
    (format!("{x}^{p} at {bits} bits"), ok)
}

/// `eval_signal` at a random rational point.
fn signal_case(r: &mut impl Rng, o: &mut Oracle) -> Result<(String, bool)> {
    let f = fuzz::signal(r, 8);
    let l = f.l() as i64;
    let t = ExactRational::ratio(r.gen_range(-(l + 3) * 16..=(l + 3) * 16), r.gen_range(1..=16))?;
    let m = [10u32, 20, 40, 60][r.gen_range(0..4)];
    let coeffs: Vec<(i64, ExactRational)> = f
        .re()
        .iter()
        .map(|(k, c)| (*k, c.exact().expect("exact").clone()))
        .collect();
    let reference = o.signal(&coeffs, &t);
    let (re, _) = f.eval_signal(&t, m)?;
    let ok = o.contains(&re, &reference) && re.width_at_most(-(m as i64));
    Ok((format!("f(t) at t = {t}, {} terms, M = {m}", coeffs.len()), ok))
}

fn soundness(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut r = fuzz::rng(opts.seed ^ 0xa11ce);
    let mut o = Oracle::new();
    let n = opts.cases;
    let (mut fails, mut kinds) = (Vec::new(), [0usize; 3]);
    for i in 0..n {
        let (what, ok) = match i % 10 {
            0..=5 => {
                kinds[0] += 1;
                signal_case(&mut r, &mut o)?
            }
            6..=8 => {
                kinds[1] += 1;
                elementary_case(&mut r, &mut o)
            }
            _ => {
                kinds[2] += 1;
                pow_case(&mut r, &mut o)
            }
        };
        if !ok {
            fails.push(what);
        }
    }
    let mut out = vec![check(
        format!("{n} interval cases against a {ORACLE_BITS}-bit oracle"),
        fails.is_empty(),
        if fails.is_empty() {
            format!(
                "{} signal, {} elementary, {} power cases contained",
                kinds[0], kinds[1], kinds[2]
            )
        } else {
            format!("{} failures, first: {}", fails.len(), fails[0])
        },
    )];

    // Parseval: ||f||_2^2 = sum c_k^2 exactly, and independent quadrature agrees.
    let mut bad_exact = Vec::new();
    let mut bad_quad = Vec::new();
    let signals = opts.fuzz.max(1);
    for i in 0..signals {
        let f = fuzz::signal(&mut r, 6);
        let sum_sq = |xs: &[(i64, crate::signal::Coef)]| {
            xs.iter().fold(ExactRational::zero(), |a, (_, c)| {
                a.add(&c.exact().expect("exact").powi(2).expect("square"))
            })
        };
        let coef_sq = sum_sq(f.re());
        let sample_sq = sum_sq(f.sample().re());
        let l2 = l2_norm_signal(&f, 40)?;
        let sq = l2.mul(&l2);
        let exact_ok = coef_sq == sample_sq && sq.contains_rational(&coef_sq);
        if !exact_ok {
            bad_exact.push(i);
        }
        if i < 10 {
            let q = l2_norm_quadrature(&f, 12, 64)?;
            if q.intersect(&l2).is_none() {
                bad_quad.push(i);
            }
        }
    }
    out.push(check(
        format!("Parseval on {signals} fuzzed signals"),
        bad_exact.is_empty(),
        if bad_exact.is_empty() {
            "||f||_2^2 encloses sum c_k^2 in every case".into()
        } else {
            format!("fails for signals {bad_exact:?}")
        },
    ));
    out.push(check(
        "Parseval against direct quadrature",
        bad_quad.is_empty(),
        if bad_quad.is_empty() {
            "10 signals agree".into()
        } else {
            format!("disjoint for signals {bad_quad:?}")
        },
    ));
    Ok(out)
}
