//! Program-to-program compilers between continuous and discrete descriptions.
//!
//! Both directions are coefficient copies on the generated elements, so the
//! generator program is carried over unchanged and only the header and the
//! modulus are rewritten: `xi'(M) = xi(c + M)`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::desc::{Description, Exponent, Instance, Kind, Space};
use crate::elementary::{ln, pow};
use crate::error::{Error, Result};
use crate::exact::ExactRational;
use crate::expr::{BinOp, Expr};
use crate::interval::{Arith, DyadicIv, Enclosure};
use crate::norm::{lp_norm_sequence, lp_norm_signal};
use crate::signal::{Coef, Elementary};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Sample,
    Interpolate,
}

/// What a compiler run did, serialized next to its output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompilerReport {
    pub direction: Direction,
    /// SHA-256 of the canonical input text.
    pub input_sha256: String,
    pub output_sha256: String,
    pub p: String,
    /// `c` in `xi'(M) = xi(c + M)`.
    pub shift: u32,
    /// The constant `c` was derived from, as text.
    pub constant: String,
    pub notes: Vec<String>,
}

/// Compiled description plus its report.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub description: Description,
    pub report: CompilerReport,
}

pub fn sha256_hex(text: &str) -> String {
    let mut out = String::with_capacity(64);
    for b in Sha256::digest(text.as_bytes()) {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// `C_1(p) = 2^(1 - 1/p) (1 + pi^p)^(1/p)` bounds the sampling operator on
/// `B_pi^p` for finite `p`; it follows from `|f(k)| <= |f(t)| + int |f'|`
/// over a unit cell and Bernstein's inequality. Exact value 1 at `p = 2`
/// (Parseval) and `p = inf`.
pub fn sampling_shift(p: &Exponent) -> Result<(u32, String)> {
    let q = match p {
        Exponent::Inf => return Ok((0, "1".into())),
        Exponent::Finite(q) if *q == 2 => return Ok((0, "1".into())),
        Exponent::Finite(q) => q,
    };
    let ctx = 96u32;
    let one = DyadicIv::one(ctx);
    let pi_p = pow(&DyadicIv::pi(ctx), q).ok_or_else(|| Error::gen("pi^p failed"))?;
    let inv = DyadicIv::from_rational(ctx, &q.recip()?);
    // log2 C_1 = (1 - 1/p) + ln(1 + pi^p) / (p ln 2)
    let l = ln(&one.add(&pi_p)).ok_or_else(|| Error::gen("log failed"))?;
    let lg = one
        .sub(&inv)
        .add(&l.mul(&inv).div(&DyadicIv::ln2(ctx)).ok_or_else(|| Error::gen("ln 2"))?);
    let c = lg
        .to_enclosure()
        .ok_or_else(|| Error::gen("non-finite shift"))?
        .hi()
        .ceil();
    let shift = u32::try_from(c.max(0.into())).map_err(|_| Error::gen("shift out of range"))?;
    Ok((shift, format!("C1(p) = 2^(1 - 1/p) (1 + pi^p)^(1/p), log2 <= {}", lg.hi_f64())))
}

/// A reconstruction constant `C_R(p)` with where it came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstantEntry {
    pub p: String,
    pub c_r: String,
    pub citation: String,
}

/// Table of `C_R(p)` values for the interpolation compiler.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstantTable {
    #[serde(default, rename = "constant")]
    pub entries: Vec<ConstantEntry>,
}

impl Default for ConstantTable {
    fn default() -> Self {
        ConstantTable {
            entries: vec![ConstantEntry {
                p: "2".into(),
                c_r: "1".into(),
                citation: "Parseval: sum |f(k)|^2 = ||f||_2^2".into(),
            }],
        }
    }
}

impl ConstantTable {
    /// Parses a TOML table of `[[constant]]` entries with `p`, `c_r`,
    /// `citation`. The built-in `p = 2` entry is kept unless overridden.
    pub fn from_toml(text: &str) -> Result<Self> {
        let extra: ConstantTable =
            toml::from_str(text).map_err(|e| Error::Validation(format!("constant table: {e}")))?;
        let mut t = ConstantTable::default();
        for e in extra.entries {
            let p = parse_p(&e.p)?;
            let c = parse_c(&e.c_r)?;
            if e.citation.trim().is_empty() {
                return Err(Error::Validation(format!("constant for p = {p} has no citation")));
            }
            if c.is_negative() || c.is_zero() {
                return Err(Error::Validation(format!("C_R for p = {p} must be positive")));
            }
            t.entries.retain(|x| parse_p(&x.p).ok() != Some(p.clone()));
            t.entries.push(e);
        }
        Ok(t)
    }

    pub fn lookup(&self, p: &ExactRational) -> Option<(ExactRational, &ConstantEntry)> {
        self.entries.iter().find_map(|e| match (parse_p(&e.p), parse_c(&e.c_r)) {
            (Ok(q), Ok(c)) if q == *p => Some((c, e)),
            _ => None,
        })
    }
}

fn parse_p(s: &str) -> Result<ExactRational> {
    s.trim()
        .parse()
        .map_err(|_| Error::Validation(format!("invalid exponent {s:?} in constant table")))
}

fn parse_c(s: &str) -> Result<ExactRational> {
    s.trim()
        .parse()
        .map_err(|_| Error::Validation(format!("invalid constant {s:?} in constant table")))
}

/// `ceil(log2 c)` for rational `c > 0`, at least 0.
fn ceil_log2(c: &ExactRational) -> u32 {
    let mut k = 0u32;
    let mut pw = ExactRational::one();
    while pw.sub(c).is_negative() {
        pw = pw.add(&pw);
        k += 1;
    }
    k
}

fn shifted_modulus(xi: &Expr, c: u32) -> Expr {
    if c == 0 {
        return xi.clone();
    }
    xi.substitute("M", &Expr::bin(BinOp::Add, Expr::int(c), Expr::var("M")))
}

/// Continuous description to the discrete description of its samples.
pub fn compile_sampling(d: &Description) -> Result<Compiled> {
    d.validate()?;
    if d.kind != Kind::Continuous {
        return Err(Error::Validation("sampling compiler expects a continuous description".into()));
    }
    let (shift, constant) = sampling_shift(&d.p)?;
    let out = Description {
        space: Space::Lp,
        p: d.p.clone(),
        kind: Kind::Discrete,
        gates: d.gates.clone(),
        generator: d.generator.clone(),
        modulus: shifted_modulus(&d.modulus, shift),
    };
    out.validate()?;
    let report = CompilerReport {
        direction: Direction::Sample,
        input_sha256: sha256_hex(&d.serialize()),
        output_sha256: sha256_hex(&out.serialize()),
        p: d.p.to_string(),
        shift,
        constant,
        notes: vec!["element n is the sample sequence of element n".into()],
    };
    Ok(Compiled { description: out, report })
}

/// Discrete description to the continuous description interpolating it.
///
/// Refused for `p` in `{1, inf}`, where no such compiler exists.
pub fn compile_interpolation(d: &Description, table: &ConstantTable) -> Result<Compiled> {
    d.validate()?;
    if d.kind != Kind::Discrete {
        return Err(Error::Validation(
            "interpolation compiler expects a discrete description".into(),
        ));
    }
    let p = match &d.p {
        Exponent::Finite(p) if !p.is_one() => p,
        other => {
            return Err(Error::UnsupportedExponent(format!(
                "interpolation is not computable on l^{other}; only 1 < p < inf is compiled"
            )))
        }
    };
    let (c_r, entry) = table.lookup(p).ok_or_else(|| {
        Error::MissingConstant(format!(
            "no reconstruction constant C_R configured for p = {p}; add one with a citation"
        ))
    })?;
    let shift = ceil_log2(&c_r);
    let out = Description {
        space: Space::Bpi,
        p: d.p.clone(),
        kind: Kind::Continuous,
        gates: d.gates.clone(),
        generator: d.generator.clone(),
        modulus: shifted_modulus(&d.modulus, shift),
    };
    out.validate()?;
    let report = CompilerReport {
        direction: Direction::Interpolate,
        input_sha256: sha256_hex(&d.serialize()),
        output_sha256: sha256_hex(&out.serialize()),
        p: d.p.to_string(),
        shift,
        constant: format!("C_R = {} ({})", entry.c_r, entry.citation),
        notes: vec!["element n is the sinc series through element n".into()],
    };
    Ok(Compiled { description: out, report })
}

/// One row of a [`RoundtripReport`].
#[derive(Clone, Debug, PartialEq)]
pub struct RoundtripRow {
    pub n: u64,
    pub coefficients_equal: bool,
    /// Norm of the difference of the two elements.
    pub distance: Enclosure,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundtripReport {
    pub rows: Vec<RoundtripRow>,
    /// Total shift applied to the modulus by the two compilers.
    pub shift: u32,
    /// `xi''(M) = xi(shift + M)` for `M = 0..=32`.
    pub modulus_ok: bool,
    pub pass: bool,
}

fn same_coefficients<K: Clone>(a: &Elementary<K>, b: &Elementary<K>) -> bool {
    let (a, b) = (a.fold_gain(), b.fold_gain());
    a.re() == b.re() && a.im() == b.im()
}

/// Compiles `d` through both compilers and compares elements `0..=depth`
/// and the moduli. Passes when every distance is at most `2^-m`.
pub fn roundtrip_check(
    d: &Description,
    table: &ConstantTable,
    depth: u64,
    m: u32,
) -> Result<RoundtripReport> {
    let (back, shift) = match d.kind {
        Kind::Continuous => {
            let s = compile_sampling(d)?;
            let i = compile_interpolation(&s.description, table)?;
            (i.description, s.report.shift + i.report.shift)
        }
        Kind::Discrete => {
            let i = compile_interpolation(d, table)?;
            let s = compile_sampling(&i.description)?;
            (s.description, s.report.shift + i.report.shift)
        }
    };
    let mut rows = Vec::new();
    let one = (Coef::one(), Coef::zero());
    let minus = (Coef::int(-1), Coef::zero());
    for n in 0..=depth {
        let (a, b) = (d.instantiate(n)?, back.instantiate(n)?);
        let (equal, distance) = match (&a, &b) {
            (Instance::Signal(x), Instance::Signal(y)) => {
                let diff = Elementary::combine(&one, x, &minus, y);
                (same_coefficients(x, y), lp_norm_signal(&diff, &d.p, m)?)
            }
            (Instance::Sequence(x), Instance::Sequence(y)) => {
                let diff = Elementary::combine(&one, x, &minus, y);
                (same_coefficients(x, y), lp_norm_sequence(&diff, &d.p, m)?)
            }
            _ => return Err(Error::gen("round trip changed the kind")),
        };
        rows.push(RoundtripRow {
            n,
            coefficients_equal: equal,
            distance,
        });
    }
    let mut modulus_ok = true;
    for mm in 0..=32u64 {
        if back.modulus_of(mm)? != d.modulus_of(mm + shift as u64)? {
            modulus_ok = false;
        }
    }
    let bound = crate::dyadic::Dyadic::pow2(-(m as i64));
    let pass = modulus_ok && rows.iter().all(|r| r.coefficients_equal && *r.distance.hi() <= bound);
    Ok(RoundtripReport {
        rows,
        shift,
        modulus_ok,
        pass,
    })
}
