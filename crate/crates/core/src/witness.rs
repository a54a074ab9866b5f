//! Witness objects: the `g` family, `q_N` and its normalized family, gated
//! families driven by machine runtimes, and divergence tables.

use std::fmt::Write as _;

use num_bigint::BigInt;
use serde::Serialize;

use crate::desc::{Description, Exponent, Instance};
use crate::dyadic::{Dyadic, Round};
use crate::elementary::{hsum_big, ln};
use crate::error::{Error, Result};
use crate::exact::ExactRational;
use crate::interval::{Arith, DyadicIv, Enclosure};
use crate::machine::{gate_table, Machine};
use crate::norm::{l1_norm_signal, l1q, lp_norm_sequence, lp_norm_sequence_exact, lp_norm_signal, q_signal, L1Q_BITS};
use crate::signal::{Coef, ElementarySignal};

/// Size limits for witness construction.
#[derive(Clone, Copy, Debug)]
pub struct WitnessOptions {
    /// Largest `log2 N` for closed-form `g` witnesses.
    pub max_log2_n: u64,
    /// Largest `N` whose `g` signal is built and evaluated term by term.
    pub max_direct: u64,
    /// Largest `N` for `q_N` quadrature.
    pub max_q: u64,
}

impl Default for WitnessOptions {
    fn default() -> Self {
        WitnessOptions {
            max_log2_n: 1 << 14,
            max_direct: 1 << 16,
            max_q: 1 << 16,
        }
    }
}

fn enc(v: &DyadicIv) -> Result<Enclosure> {
    v.to_enclosure().ok_or_else(|| Error::gen("non-finite enclosure"))
}

fn prec_for(m: u32) -> u32 {
    m + 64
}

// ---------------------------------------------------------------- g family

/// `f_j = g(., 2^(8j))`: coefficients `(-1)^k / C(N)` on `1..=N` with
/// `C(N) = -(1/pi) sum_{k=1}^{N} 1/(k - 1/2)`.
#[derive(Clone, Debug)]
pub struct GWitness {
    pub n: u64,
    /// `log2 N = 8n`.
    pub log2_n: u64,
    /// `C(N)`.
    pub c: Enclosure,
    /// `f_n(1/2)`.
    pub value_at_half: Enclosure,
    /// `||S f_n||_inf = 1 / |C(N)|`.
    pub sample_sup: Enclosure,
    /// Upper bound on `sup |f_n|`: `(2 + (2/pi)(1 + ln N)) / |C(N)|`.
    pub peak_upper: Dyadic,
    /// `"direct"` when `f_n(1/2)` was summed term by term, else `"closed form"`.
    pub method: &'static str,
}

impl GWitness {
    /// `f_n(1/2)` encloses 1 with width at most `2^-m`.
    pub fn value_ok(&self, m: u32) -> bool {
        self.value_at_half.contains(&Dyadic::one()) && self.value_at_half.width_at_most(-(m as i64))
    }

    /// Upper end of `||S f_n||_inf` below `1/n`.
    pub fn sample_ok(&self) -> bool {
        let n = Dyadic::from_int(self.n as i64);
        self.n > 0 && self.sample_sup.hi().mul(&n) < Dyadic::one()
    }

    /// Lower end of `|C(N)|` above `log2(N) / 4`.
    pub fn c_ok(&self) -> bool {
        let q = Dyadic::new(BigInt::from(self.log2_n), -2);
        self.c.abs().lo() > &q
    }
}

/// Family document for `f_n = g(., 2^(8n))`. The family is a sequence of
/// elements rather than a convergent description; its modulus is nominal.
pub fn g_description() -> Description {
    Description::parse(
        "space Bpi; p inf; kind continuous;\n\
         generator { L(n) = 2^(8*n); c(n, k) = if(k >= 1, (-1)^k / C, 0) where C = -(1/pi) * hsum(2^(8*n)) }\n\
         modulus { xi(M) = M }",
    )
    .expect("built-in g document")
}

/// The `g` element with `N = 2^(8 j)` certified to `2^-m`.
pub fn build_g_witness(j: u64, m: u32, opts: &WitnessOptions) -> Result<GWitness> {
    let log2_n = j
        .checked_mul(8)
        .filter(|&b| b <= opts.max_log2_n)
        .ok_or_else(|| Error::resource(format!("N = 2^(8*{j}) exceeds the configured limit")))?;
    let ctx = prec_for(m) + 8;
    let big_n = BigInt::from(1) << log2_n;
    let pi = DyadicIv::pi(ctx);
    let h = hsum_big::<DyadicIv>(ctx, &big_n);
    let c = h.div(&pi).expect("pi").neg();
    let inv_c = c.recip().ok_or_else(|| Error::gen("C(N) contains 0"))?;
    let direct = log2_n < 64 && (1u64 << log2_n) <= opts.max_direct;
    let value = if direct {
        let n = 1u64 << log2_n;
        let coef = Coef::Approx(enc(&inv_c)?);
        let re = (1..=n as i64)
            .map(|k| (k, if k % 2 == 0 { coef.clone() } else { coef.neg() }))
            .collect();
        let f = ElementarySignal::new(n, Coef::one(), re, Vec::new())?;
        f.eval_signal(&ExactRational::ratio(1, 2)?, m + 2)?.0
    } else {
        // sinc(1/2 - k) = (-1)^k / (pi (1/2 - k)), so f(1/2) = -hsum(N) / (pi C)
        enc(&h.neg().div(&pi.mul(&c)).expect("C != 0"))?
    };
    let ln_n = DyadicIv::ln2(ctx).mul(&DyadicIv::from_i64(ctx, log2_n as i64));
    let two_pi = DyadicIv::from_i64(ctx, 2).div(&pi).expect("pi");
    let peak = DyadicIv::from_i64(ctx, 2)
        .add(&two_pi.mul(&DyadicIv::one(ctx).add(&ln_n)))
        .mul(&inv_c.abs());
    Ok(GWitness {
        n: j,
        log2_n,
        c: enc(&c)?,
        value_at_half: value,
        sample_sup: enc(&inv_c.abs())?,
        peak_upper: peak.hi(),
        method: if direct { "direct" } else { "closed form" },
    })
}

// ---------------------------------------------------------------- q family

/// `q_N` with its certified `L1` norm.
#[derive(Clone, Debug)]
pub struct QWitness {
    pub big_n: u64,
    pub signal: ElementarySignal,
    pub l1: Enclosure,
    /// `||S q_N||_1`, exact.
    pub sample_l1: ExactRational,
    /// `(1/(6 pi)) ln(N/2) - 1/pi`.
    pub lower: Enclosure,
    /// `4 + (5/pi) ln(2N + 1)`.
    pub upper: Enclosure,
}

impl QWitness {
    /// The enclosure lies strictly between the two bounds.
    pub fn inside(&self) -> bool {
        self.lower.hi() < self.l1.lo() && self.l1.hi() < self.upper.lo()
    }
}

/// `(lower, upper)` bounds for `||q_N||_1`.
pub fn q_bounds(big_n: u64) -> Result<(Enclosure, Enclosure)> {
    let ctx = 128u32;
    let pi = DyadicIv::pi(ctx);
    let half = DyadicIv::from_rational(ctx, &ExactRational::ratio(big_n as i64, 2)?);
    let lo = ln(&half)
        .ok_or_else(|| Error::gen("ln(N/2)"))?
        .div(&pi.mul_i64(6))
        .expect("pi")
        .sub(&pi.recip().expect("pi"));
    let two_n1 = DyadicIv::from_i64(ctx, 2 * big_n as i64 + 1);
    let hi = DyadicIv::from_i64(ctx, 4).add(
        &ln(&two_n1)
            .ok_or_else(|| Error::gen("ln(2N+1)"))?
            .mul_i64(5)
            .div(&pi)
            .expect("pi"),
    );
    Ok((enc(&lo)?, enc(&hi)?))
}

/// Lower bound `(1/(6 pi)) ln(N/2) - 1/pi` for `N = 2^log2_n`, any size.
fn q_lower_pow2(log2_n: u64, ctx: u32) -> DyadicIv {
    let pi = DyadicIv::pi(ctx);
    DyadicIv::ln2(ctx)
        .mul(&DyadicIv::from_i64(ctx, log2_n as i64 - 1))
        .div(&pi.mul_i64(6))
        .expect("pi")
        .sub(&pi.recip().expect("pi"))
}

pub fn build_q_witness(big_n: u64, m: u32, opts: &WitnessOptions) -> Result<QWitness> {
    if big_n < 2 {
        return Err(Error::Validation("q_N needs N >= 2".into()));
    }
    if big_n > opts.max_q {
        return Err(Error::resource(format!("N = {big_n} exceeds the q limit {}", opts.max_q)));
    }
    let signal = q_signal(big_n)?;
    let l1 = if m <= L1Q_BITS {
        l1q(big_n)?
    } else {
        l1_norm_signal(&signal, m)?
    };
    let sample_l1 = lp_norm_sequence_exact(&signal.sample(), &Exponent::one())
        .ok_or_else(|| Error::gen("q_N samples are not exact"))?;
    let (lower, upper) = q_bounds(big_n)?;
    Ok(QWitness {
        big_n,
        signal,
        l1,
        sample_l1,
        lower,
        upper,
    })
}

/// Which `N` the `n`-th normalized element uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QSchedule {
    /// `N(n) = 2 * 4^(n+4)`.
    Scaled,
    /// `N(n) = 2 * 2^(96 n + 96)`; out of reach numerically.
    Steep,
    /// The same `N` for every `n`.
    Fixed(u64),
}

impl QSchedule {
    /// `log2 N(n)`, or `N` itself for `Fixed`.
    fn n_expr(self) -> String {
        match self {
            QSchedule::Scaled => "2*4^(n+4)".into(),
            QSchedule::Steep => "2*2^(96*n+96)".into(),
            QSchedule::Fixed(v) => v.to_string(),
        }
    }

    pub fn big_n(self, n: u64) -> Result<u64> {
        let too_big = || Error::resource(format!("N({n}) does not fit in 64 bits"));
        match self {
            QSchedule::Scaled => 4u64
                .checked_pow((n + 4) as u32)
                .and_then(|v| v.checked_mul(2))
                .ok_or_else(too_big),
            QSchedule::Steep => {
                let e = 96 * n + 97;
                if e < 64 {
                    Ok(1 << e)
                } else {
                    Err(too_big())
                }
            }
            QSchedule::Fixed(v) => Ok(v),
        }
    }
}

/// Family document for `f_n = q_N(n) / ||q_N(n)||_1`.
pub fn q_family_description(s: QSchedule) -> Description {
    let n = s.n_expr();
    let text = format!(
        "space Bpi; p 1; kind continuous;\n\
         generator {{ L(n) = 2*({n}); gain(n) = 1 / l1q({n}); \
         c(n, k) = if(k == 0, 1, if(k < 0 && k % 2 == 0, -1 / ({n}), 0)) }}\n\
         modulus {{ xi(M) = M }}"
    );
    Description::parse(&text).expect("built-in q document")
}

/// A normalized `q` element with its norm certificate.
#[derive(Clone, Debug)]
pub struct NormalizedQ {
    pub n: u64,
    pub big_n: u64,
    pub description: Description,
    /// `||f_n||_1`, computed on the normalized element.
    pub norm: Enclosure,
    /// `||S f_n||_1 = 2 / ||q_N||_1`.
    pub sample_l1: Enclosure,
}

pub fn build_normalized_q(
    n: u64,
    schedule: QSchedule,
    m: u32,
    opts: &WitnessOptions,
) -> Result<NormalizedQ> {
    let big_n = schedule.big_n(n)?;
    if big_n < 2 || big_n > opts.max_q {
        return Err(Error::resource(format!(
            "N = {big_n} is outside 2..={} for q quadrature",
            opts.max_q
        )));
    }
    let description = q_family_description(schedule);
    let inst = description.instantiate(n)?;
    let f = inst.as_signal().ok_or_else(|| Error::gen("expected a signal"))?;
    let norm = l1_norm_signal(f, m)?;
    let sample_l1 = lp_norm_sequence(&f.sample(), &Exponent::one(), m)?;
    Ok(NormalizedQ {
        n,
        big_n,
        description,
        norm,
        sample_l1,
    })
}

// ------------------------------------------------------------ gated family

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GateMode {
    /// Base family `g`; the limit has value `1_A(m)` at `t = 1/2`.
    PointValue,
    /// Base family normalized `q` at `N(j) = 2 * 2^(96 j + 96)`; the limit
    /// has `B^1` norm `1_A(m)`.
    Norm,
}

#[derive(Clone, Debug)]
pub struct GatedRow {
    pub k: u32,
    pub h: u64,
    /// Enclosure of the sample norm of `f_{h(m,k)}` (`l^inf` or `l^1`).
    pub sample_norm: Enclosure,
    /// `2^-(k+2)` while the machine has not halted, `None` once frozen.
    pub bound: Option<Dyadic>,
}

impl GatedRow {
    pub fn ok(&self) -> bool {
        self.bound.as_ref().map_or(true, |b| self.sample_norm.hi() <= b)
    }
}

#[derive(Clone, Debug)]
pub struct GatedFamily {
    pub machine: String,
    pub mode: GateMode,
    pub kmax: u32,
    pub h: Vec<u64>,
    pub halting_step: Option<u64>,
    /// First `k` with `h(m, k)` equal to the halting step.
    pub freeze_k: Option<u32>,
    /// Value at `1/2` (point mode) or `B^1` norm (norm mode) of the frozen
    /// element.
    pub frozen_value: Option<Enclosure>,
    pub rows: Vec<GatedRow>,
    pub description: Description,
}

impl GatedFamily {
    /// The table does not reach a halt, so the document only covers
    /// `k <= kmax`.
    pub fn partial(&self) -> bool {
        self.halting_step.is_none()
    }
}

fn gated_description(mode: GateMode, h: &[u64], halt: Option<u64>) -> Description {
    let table: Vec<String> = h.iter().map(u64::to_string).collect();
    let tail = match halt {
        Some(s) => format!("frozen {s}"),
        None => "partial".into(),
    };
    let body = match mode {
        GateMode::PointValue => "space Bpi; p inf; kind continuous;\n\
             GATE\
             generator { L(n) = 2^(8*gated(A, n)); \
             c(n, k) = if(k >= 1, (-1)^k / C, 0) where C = -(1/pi) * hsum(2^(8*gated(A, n))) }\n\
             modulus { xi(M) = M }"
            .to_string(),
        GateMode::Norm => {
            let n = "2*2^(96*gated(A, n)+96)";
            format!(
                "space Bpi; p 1; kind continuous;\n\
                 GATE\
                 generator {{ L(n) = 2*({n}); gain(n) = 1 / l1q({n}); \
                 c(n, k) = if(k == 0, 1, if(k < 0 && k % 2 == 0, -1 / ({n}), 0)) }}\n\
                 modulus {{ xi(M) = M }}"
            )
        }
    };
    let gate = format!("gate A {{ h [{}]; {tail} }}\n", table.join(", "));
    Description::parse(&body.replace("GATE", &gate)).expect("built-in gated document")
}

/// `f_{m,k} = f_{h(m,k)}` for `k = 0..=kmax`, certified to `2^-m_bits`.
pub fn build_gated_family(
    machine: &Machine,
    mode: GateMode,
    kmax: u32,
    m_bits: u32,
    opts: &WitnessOptions,
) -> Result<GatedFamily> {
    let (h, halt) = gate_table(machine, kmax)?;
    let freeze_k = halt.and_then(|s| h.iter().position(|&v| v == s).map(|k| k as u32));
    let ctx = prec_for(m_bits);
    let mut rows = Vec::with_capacity(h.len());
    for (k, &hk) in h.iter().enumerate() {
        let k = k as u32;
        let sample_norm = match mode {
            GateMode::PointValue => build_g_witness(hk, m_bits, opts)?.sample_sup,
            GateMode::Norm => {
                // 2 / ||q_N||_1 with ||q_N||_1 above its logarithmic lower bound
                let lo = q_lower_pow2(96 * hk + 97, ctx);
                if !lo.lo().is_positive() {
                    return Err(Error::gen("lower bound for ||q_N||_1 is not positive"));
                }
                let up = DyadicIv::from_i64(ctx, 2).div(&lo).expect("positive").hi();
                Enclosure::new(Dyadic::zero(), up)?
            }
        };
        let frozen = freeze_k.is_some_and(|f| k >= f);
        rows.push(GatedRow {
            k,
            h: hk,
            sample_norm,
            bound: (!frozen).then(|| Dyadic::pow2(-(k as i64) - 2)),
        });
    }
    let frozen_value = match (mode, halt) {
        (GateMode::PointValue, Some(s)) => Some(build_g_witness(s, m_bits, opts)?.value_at_half),
        (GateMode::Norm, Some(_)) => Some(Enclosure::point(Dyadic::one())),
        _ => None,
    };
    Ok(GatedFamily {
        machine: machine.name.clone(),
        mode,
        kmax,
        description: gated_description(mode, &h, halt),
        h,
        halting_step: halt,
        freeze_k,
        frozen_value,
        rows,
    })
}

// -------------------------------------------------------- divergence table

/// Families a divergence table can be built for.
#[derive(Clone, Debug)]
pub enum Family {
    /// `f_n = g(., 2^(8n))`, `B_pi^inf` against `l^inf`.
    G,
    /// Normalized `q`, `B_pi^1` against `l^1`.
    Q(QSchedule),
    /// Any description: element norms against sample norms.
    Description(Description),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceRow {
    pub n: u64,
    /// `N` as text; it can exceed 64 bits.
    pub big_n: String,
    pub norm: Enclosure,
    pub sample_norm: Enclosure,
    /// `norm.lo / sample_norm.hi` rounded down; `None` when the sample norm
    /// may vanish.
    pub ratio_lo: Option<Dyadic>,
}

fn ratio_lo(norm: &Enclosure, sample: &Enclosure) -> Option<Dyadic> {
    if !sample.hi().is_positive() {
        return None;
    }
    norm.lo().div(sample.hi(), 64, Round::Down)
}

/// Rows for `n = 1..=n_max` with enclosures of width at most `2^-m`.
pub fn divergence_table(
    family: &Family,
    n_max: u64,
    m: u32,
    opts: &WitnessOptions,
) -> Result<Vec<DivergenceRow>> {
    let mut rows = Vec::new();
    for n in 1..=n_max {
        let (big_n, norm, sample) = match family {
            Family::G => {
                let w = build_g_witness(n, m, opts)?;
                // sup |f| >= f(1/2)
                let norm = Enclosure::new(w.value_at_half.lo().clone(), w.peak_upper.clone())?;
                (format!("2^{}", w.log2_n), norm, w.sample_sup)
            }
            Family::Q(s) => {
                let w = build_normalized_q(n, *s, m, opts)?;
                (w.big_n.to_string(), w.norm, w.sample_l1)
            }
            Family::Description(d) => {
                let inst = d.instantiate(n)?;
                let sample = lp_norm_sequence(&inst.samples(), &d.p, m)?;
                let norm = match &inst {
                    Instance::Signal(f) => lp_norm_signal(f, &d.p, m)?,
                    Instance::Sequence(x) => lp_norm_sequence(x, &d.p, m)?,
                };
                let l = d.window(n)?;
                ((2 * l + 1).to_string(), norm, sample)
            }
        };
        rows.push(DivergenceRow {
            n,
            big_n,
            ratio_lo: ratio_lo(&norm, &sample),
            norm,
            sample_norm: sample,
        });
    }
    Ok(rows)
}

pub const DIVERGENCE_COLUMNS: [&str; 7] = [
    "n",
    "N",
    "norm_lo",
    "norm_hi",
    "sample_norm_lo",
    "sample_norm_hi",
    "ratio_lo",
];

fn cells(r: &DivergenceRow, digits: usize) -> [String; 7] {
    let (a, b) = r.norm.decimal_bounds(digits);
    let (c, d) = r.sample_norm.decimal_bounds(digits);
    let ratio = r.ratio_lo.as_ref().map_or("n/a".to_string(), |q| {
        Enclosure::point(q.clone()).decimal_bounds(digits).0
    });
    [r.n.to_string(), r.big_n.clone(), a, b, c, d, ratio]
}

/// CSV with outward-rounded decimals.
pub fn divergence_csv(rows: &[DivergenceRow], digits: usize) -> String {
    let mut s = DIVERGENCE_COLUMNS.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&cells(r, digits).join(","));
        s.push('\n');
    }
    s
}

/// Aligned text table.
pub fn divergence_text(rows: &[DivergenceRow], digits: usize) -> String {
    let body: Vec<[String; 7]> = rows.iter().map(|r| cells(r, digits)).collect();
    let mut w = DIVERGENCE_COLUMNS.map(str::len);
    for row in &body {
        for (i, c) in row.iter().enumerate() {
            w[i] = w[i].max(c.len());
        }
    }
    let mut s = String::new();
    let line = |s: &mut String, cols: &[String]| {
        let parts: Vec<String> = cols.iter().zip(w).map(|(c, w)| format!("{c:>w$}")).collect();
        let _ = writeln!(s, "{}", parts.join("  ").trim_end());
    };
    line(&mut s, &DIVERGENCE_COLUMNS.map(String::from));
    for row in &body {
        line(&mut s, row);
    }
    s
}
