//! `shannon`: validate, compile and measure signal descriptions, build
//! witnesses and run verification suites.
//!
//! Exit codes: 0 ok, 1 parse or validation error, 2 unsupported exponent,
//! 3 missing constant, 4 not integrable, 5 inconclusive, 6 resource limit,
//! 7 generator failure, 8 I/O error, 9 usage error, 10 verification failed.

mod config;
mod render;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use shannon_core::compile::{compile_interpolation, compile_sampling, roundtrip_check, Compiled};
use shannon_core::desc::{Description, Exponent, Instance, Kind};
use shannon_core::dyadic::Dyadic;
use shannon_core::error::Error;
use shannon_core::machine::Machine;
use shannon_core::norm::{
    l1_norm_signal_with, lp_norm_sequence, lp_norm_signal_with, norm_of_description_with,
    peak_value_with, time_concentration_with,
};
use shannon_core::verify::{run_suite, Suite, VerifyOptions};
use shannon_core::witness::{
    build_g_witness, build_gated_family, build_normalized_q, build_q_witness, divergence_csv,
    divergence_table, divergence_text, g_description, q_family_description, DivergenceRow, Family,
    GateMode, QSchedule,
};

use config::{Config, Format, Overrides};
use render::{emit, enclosure, enclosure_text};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
    #[error("{0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Failed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                Error::Syntax { .. } | Error::Validation(_) | Error::MalformedProgram(_) => 1,
                Error::UnsupportedExponent(_) => 2,
                Error::MissingConstant(_) => 3,
                Error::NotIntegrable(_) => 4,
                Error::Inconclusive(_) => 5,
                Error::ResourceLimit(_) => 6,
                Error::GeneratorFailure(_) | Error::DivisionByZero => 7,
            },
            CliError::Io(..) => 8,
            CliError::Usage(_) => 9,
            CliError::Failed(_) => 10,
        }
    }
}

type Res<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "shannon", version, about = "Certified descriptions, compilers and norms for band-limited signals")]
struct Cli {
    /// TOML settings file; defaults to $SHANNON_CONFIG when set
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Target enclosure width 2^-M, 1..=64 (default 20)
    #[arg(short = 'M', long = "precision", global = true, value_name = "M")]
    precision: Option<u32>,
    /// Output format
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// TOML table of reconstruction constants
    #[arg(long, global = true, value_name = "PATH")]
    constants: Option<PathBuf>,
    /// Largest window 2L+1 an element may have
    #[arg(long, global = true)]
    max_window: Option<u64>,
    /// Largest step budget for machines
    #[arg(long, global = true)]
    max_steps: Option<u64>,
    /// Largest log2 N for closed-form witnesses
    #[arg(long, global = true)]
    max_log2_n: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Parse and validate a description document
    Validate {
        path: PathBuf,
        /// Print the canonical serialization
        #[arg(long)]
        canonical: bool,
    },
    /// Compile a description between its continuous and discrete forms
    Compile(CompileArgs),
    /// Certified norms and related quantities
    Norm(NormArgs),
    /// Build witness objects and tables
    #[command(subcommand)]
    Witness(WitnessCmd),
    /// Run a machine program for a number of steps
    Run {
        path: PathBuf,
        #[arg(long)]
        steps: u64,
    },
    /// Run a verification suite; exit 0 iff every check passes
    Verify {
        #[arg(value_parser = parse_suite)]
        suite: Suite,
        #[arg(long, default_value_t = VerifyOptions::default().seed)]
        seed: u64,
        /// Random cases for the soundness battery
        #[arg(long)]
        cases: Option<usize>,
        /// Fuzzed documents for round-trip and refusal suites
        #[arg(long)]
        fuzz: Option<usize>,
    },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Direction {
    Sample,
    Interpolate,
}

#[derive(Args, Debug)]
struct CompileArgs {
    path: PathBuf,
    #[arg(long, short = 'd', value_enum)]
    direction: Direction,
    /// Output document; stdout when absent
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
    /// Report file; `<out>.report.json` with --out, else stderr
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also run the round trip through both compilers to this depth
    #[arg(long)]
    roundtrip: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Quantity {
    Norm,
    Peak,
    Bibo,
    Concentration,
}

#[derive(Args, Debug)]
struct NormArgs {
    path: PathBuf,
    #[arg(long, short = 'q', value_enum, default_value = "norm")]
    quantity: Quantity,
    /// Exponent override, e.g. 1, 3/2, inf
    #[arg(long, short = 'p')]
    p: Option<String>,
    /// Element index. When absent, norm (and peak at p = inf) describe the
    /// limit; other quantities use element xi(M + 2)
    #[arg(long, short = 'n')]
    n: Option<u64>,
    /// Half-width of the concentration interval, a dyadic such as 3 or 5*2^-1
    #[arg(long = "L", short = 'L')]
    lc: Option<String>,
    /// Truncation radius override
    #[arg(long, short = 't')]
    t: Option<u64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    #[value(name = "pointvalue", alias = "point-value")]
    PointValue,
    Norm,
}

#[derive(Subcommand, Debug)]
enum WitnessCmd {
    /// g element with N = 2^(8n)
    G {
        #[arg(long, short = 'n')]
        n: u64,
        #[arg(long, short = 'o')]
        out: Option<PathBuf>,
    },
    /// q_N and its norm sandwich
    Q {
        #[arg(long = "N")]
        big_n: u64,
        #[arg(long, short = 'o')]
        out: Option<PathBuf>,
    },
    /// Normalized q element of the scaled family
    NormalizedQ {
        #[arg(long, short = 'n')]
        n: u64,
        /// Fixed N instead of the scaled schedule 2*4^(n+4)
        #[arg(long = "N")]
        big_n: Option<u64>,
        #[arg(long, short = 'o')]
        out: Option<PathBuf>,
    },
    /// Family gated by a machine's running time
    Gated {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long, value_enum, default_value = "pointvalue")]
        mode: Mode,
        #[arg(long, default_value_t = 6)]
        kmax: u32,
        #[arg(long, short = 'o')]
        out: Option<PathBuf>,
    },
    /// Element norms against sample norms
    Divergence {
        /// g, q, or a description file
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 3)]
        n_max: u64,
    },
}

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))
}

fn write(path: &Path, text: &str) -> Res<()> {
    fs::write(path, text).map_err(|e| CliError::Io(path.display().to_string(), e))
}

fn load(path: &Path) -> Res<Description> {
    Description::parse(&read(path)?).map_err(|e| match e {
        Error::Syntax { pos, msg } => CliError::Core(Error::Syntax {
            pos,
            msg: format!("{msg} (in {})", path.display()),
        }),
        other => other.into(),
    })
}

fn kind_name(k: Kind) -> &'static str {
    match k {
        Kind::Continuous => "continuous",
        Kind::Discrete => "discrete",
    }
}

fn cmd_validate(cfg: &Config, path: &Path, canonical: bool) -> Res<String> {
    let d = load(path)?;
    let rec = json!({
        "path": path.display().to_string(),
        "valid": true,
        "p": d.p.to_string(),
        "kind": kind_name(d.kind),
        "gates": d.gates.len(),
        "sha256": shannon_core::compile::sha256_hex(&d.serialize()),
    });
    let mut text = format!(
        "ok: {} ({} description, p = {}, {} gate(s))",
        path.display(),
        kind_name(d.kind),
        d.p,
        d.gates.len()
    );
    if canonical {
        text = d.serialize();
    }
    Ok(emit(cfg.format, &text, &[rec]))
}

fn cmd_compile(cfg: &Config, a: &CompileArgs) -> Res<String> {
    let d = load(&a.path)?;
    let Compiled { description, report } = match a.direction {
        Direction::Sample => compile_sampling(&d)?,
        Direction::Interpolate => compile_interpolation(&d, &cfg.table)?,
    };
    let mut rep = serde_json::to_value(&report).expect("report serializes");
    if let Some(depth) = a.roundtrip {
        let rt = roundtrip_check(&d, &cfg.table, depth, cfg.m)?;
        rep["roundtrip"] = json!({
            "depth": depth,
            "shift": rt.shift,
            "modulus_ok": rt.modulus_ok,
            "pass": rt.pass,
            "max_distance": rt.rows.iter().map(|r| r.distance.hi().clone()).max().map(|x| x.to_string()),
        });
        if !rt.pass {
            return Err(CliError::Failed("round trip changed the description".into()));
        }
    }
    let rep_text = format!("{}\n", serde_json::to_string_pretty(&rep).expect("json"));
    let doc = description.serialize();
    match &a.out {
        Some(out) => {
            write(out, &doc)?;
            let rp = a.report.clone().unwrap_or_else(|| {
                let mut s = out.as_os_str().to_owned();
                s.push(".report.json");
                PathBuf::from(s)
            });
            write(&rp, &rep_text)?;
            Ok(String::new())
        }
        None => {
            match &a.report {
                Some(rp) => write(rp, &rep_text)?,
                None => eprint!("{rep_text}"),
            }
            Ok(doc)
        }
    }
}

fn cmd_norm(cfg: &Config, a: &NormArgs) -> Res<String> {
    let mut d = load(&a.path)?;
    if let Some(p) = &a.p {
        d.p = p.parse::<Exponent>()?;
    }
    let mut opts = cfg.norm;
    opts.t = a.t;
    let m = cfg.m;
    let (n, inst) = match a.n {
        Some(n) => (n, d.instantiate_with(n, &cfg.instantiate)?),
        None => {
            let n = d.modulus_of(m as u64 + 2)?;
            (n, d.instantiate_with(n, &cfg.instantiate)?)
        }
    };
    // the modulus bounds distances in the description's own norm only, so
    // other quantities are reported for element xi(M + 2) itself
    let limit = a.n.is_none()
        && (a.quantity == Quantity::Norm || (a.quantity == Quantity::Peak && d.p.is_inf()));
    let inf = Exponent::Inf;
    let e = match (a.quantity, &inst) {
        _ if limit => norm_of_description_with(&d, m, &opts, &cfg.instantiate)?,
        (Quantity::Norm, Instance::Signal(f)) => lp_norm_signal_with(f, &d.p, m, &opts)?,
        (Quantity::Norm, Instance::Sequence(x)) => lp_norm_sequence(x, &d.p, m)?,
        (Quantity::Peak, Instance::Signal(f)) => peak_value_with(f, m, &opts)?,
        (Quantity::Peak, Instance::Sequence(x)) => lp_norm_sequence(x, &inf, m)?,
        (Quantity::Bibo, Instance::Signal(f)) => l1_norm_signal_with(f, m, &opts)?,
        (Quantity::Bibo, Instance::Sequence(x)) => lp_norm_sequence(x, &Exponent::one(), m)?,
        (Quantity::Concentration, Instance::Signal(f)) => {
            let lc = a
                .lc
                .as_deref()
                .ok_or_else(|| CliError::Usage("concentration needs --L".into()))?;
            let lc: Dyadic = lc.parse()?;
            time_concentration_with(f, &lc, &d.p, m, &opts)?
        }
        (Quantity::Concentration, Instance::Sequence(_)) => {
            return Err(CliError::Usage("concentration applies to continuous descriptions".into()))
        }
    };
    let q = format!("{:?}", a.quantity).to_lowercase();
    let rec = json!({
        "quantity": q,
        "p": d.p.to_string(),
        "element": if limit { Value::Null } else { json!(n) },
        "index": n,
        "M": m,
        "enclosure": enclosure(&e),
    });
    let what = if limit { "limit".to_string() } else { format!("element {n}") };
    let text = format!("{q} (p = {}, {what}, M = {m})\n{}", d.p, enclosure_text(&e));
    Ok(emit(cfg.format, &text, &[rec]))
}

/// Writes `document` and `certificate` under `out` (`<out>.shn`,
/// `<out>.cert.json`), or returns both for stdout.
fn deliver(cfg: &Config, out: Option<&Path>, document: &str, cert: Value, text: &str) -> Res<String> {
    match out {
        Some(base) => {
            let with = |ext: &str| {
                let mut s = base.as_os_str().to_owned();
                s.push(ext);
                PathBuf::from(s)
            };
            write(&with(".shn"), document)?;
            write(&with(".cert.json"), &format!("{}\n", serde_json::to_string_pretty(&cert).expect("json")))?;
            Ok(String::new())
        }
        None => {
            let text = format!("{text}\n\n{document}");
            Ok(emit(cfg.format, &text, &[cert]))
        }
    }
}

fn pass_mark(b: bool) -> &'static str {
    if b {
        "holds"
    } else {
        "FAILS"
    }
}

fn cmd_witness(cfg: &Config, w: &WitnessCmd) -> Res<String> {
    let m = cfg.m;
    let wo = &cfg.witness;
    match w {
        WitnessCmd::G { n, out } => {
            let g = build_g_witness(*n, m, wo)?;
            let cert = json!({
                "witness": "g",
                "n": n,
                "log2_N": g.log2_n,
                "C": enclosure(&g.c),
                "value_at_half": enclosure(&g.value_at_half),
                "sample_sup": enclosure(&g.sample_sup),
                "peak_upper": render::dyadic(&g.peak_upper),
                "method": g.method,
                "value_is_one": g.value_ok(m),
                "sample_below_1_over_n": g.sample_ok(),
                "c_above_log2n_over_4": g.c_ok(),
            });
            let text = format!(
                "g witness n = {n}, N = 2^{}\n\
                 f(1/2) = 1 within 2^-{m}: {} {}\n\
                 ||S f||_inf = 1/|C| < 1/{n}: {} {}\n\
                 |C(N)| > log2(N)/4: {} {}",
                g.log2_n,
                pass_mark(g.value_ok(m)),
                g.value_at_half,
                pass_mark(g.sample_ok()),
                g.sample_sup,
                pass_mark(g.c_ok()),
                g.c.abs()
            );
            deliver(cfg, out.as_deref(), &g_description().serialize(), cert, &text)
        }
        WitnessCmd::Q { big_n, out } => {
            let q = build_q_witness(*big_n, m, wo)?;
            let cert = json!({
                "witness": "q",
                "N": big_n,
                "l1": enclosure(&q.l1),
                "lower": enclosure(&q.lower),
                "upper": enclosure(&q.upper),
                "inside": q.inside(),
                "sample_l1": q.sample_l1.to_string(),
            });
            let text = format!(
                "q_{big_n}: ||q||_1 in {}\n  lower {}\n  upper {}\n  inside: {}\n||S q||_1 = {}",
                q.l1,
                q.lower,
                q.upper,
                pass_mark(q.inside()),
                q.sample_l1
            );
            let doc = q_family_description(QSchedule::Fixed(*big_n)).serialize();
            deliver(cfg, out.as_deref(), &doc, cert, &text)
        }
        WitnessCmd::NormalizedQ { n, big_n, out } => {
            let s = big_n.map_or(QSchedule::Scaled, QSchedule::Fixed);
            let q = build_normalized_q(*n, s, m, wo)?;
            let cert = json!({
                "witness": "normalized-q",
                "n": n,
                "N": q.big_n,
                "norm": enclosure(&q.norm),
                "norm_is_one": q.norm.contains(&Dyadic::one()),
                "sample_l1": enclosure(&q.sample_l1),
            });
            let text = format!(
                "normalized q, n = {n}, N = {}\n||f||_1 in {}\n||S f||_1 in {}",
                q.big_n, q.norm, q.sample_l1
            );
            deliver(cfg, out.as_deref(), &q.description.serialize(), cert, &text)
        }
        WitnessCmd::Gated { machine, mode, kmax, out } => {
            let mach = Machine::parse(&read(machine)?)?;
            let need = 1u64.checked_shl(kmax + 2).unwrap_or(u64::MAX);
            if *kmax > 40 || need > cfg.max_steps {
                return Err(Error::ResourceLimit(format!(
                    "kmax = {kmax} needs {need} steps, above max_steps = {}",
                    cfg.max_steps
                ))
                .into());
            }
            let mode = match mode {
                Mode::PointValue => GateMode::PointValue,
                Mode::Norm => GateMode::Norm,
            };
            let f = build_gated_family(&mach, mode, *kmax, m, wo)?;
            let rows: Vec<Value> = f
                .rows
                .iter()
                .map(|r| {
                    json!({
                        "k": r.k,
                        "h": r.h,
                        "sample_norm": enclosure(&r.sample_norm),
                        "bound": r.bound.as_ref().map(render::dyadic),
                        "ok": r.ok(),
                    })
                })
                .collect();
            let cert = json!({
                "witness": "gated",
                "machine": f.machine,
                "mode": f.mode,
                "kmax": kmax,
                "h": f.h,
                "halting_step": f.halting_step,
                "freeze_k": f.freeze_k,
                "frozen_value": f.frozen_value.as_ref().map(enclosure),
                "partial": f.partial(),
                "rows": rows,
            });
            let mut text = format!(
                "gated family for machine '{}' ({:?}), h = {:?}\n",
                f.machine, f.mode, f.h
            );
            match (f.freeze_k, &f.frozen_value) {
                (Some(k), Some(v)) => text.push_str(&format!("frozen from k = {k}, value {v}\n")),
                _ => text.push_str("no halt within the budget; document is partial\n"),
            }
            for r in &f.rows {
                text.push_str(&format!(
                    "k = {}: h = {}, sample norm <= {}{}\n",
                    r.k,
                    r.h,
                    r.sample_norm.hi(),
                    r.bound.as_ref().map_or(String::new(), |b| format!(" (bound {b}: {})", pass_mark(r.ok())))
                ));
            }
            deliver(cfg, out.as_deref(), &f.description.serialize(), cert, text.trim_end())
        }
        WitnessCmd::Divergence { family, n_max } => {
            let fam = match family.as_str() {
                "g" => Family::G,
                "q" => Family::Q(QSchedule::Scaled),
                path => Family::Description(load(Path::new(path))?),
            };
            let rows = divergence_table(&fam, *n_max, m, wo)?;
            Ok(match cfg.format {
                Format::Csv => divergence_csv(&rows, render::DIGITS),
                Format::Text => divergence_text(&rows, render::DIGITS),
                Format::JsonLines => render::jsonl(&rows.iter().map(divergence_record).collect::<Vec<_>>()),
            })
        }
    }
}

fn divergence_record(r: &DivergenceRow) -> Value {
    json!({
        "n": r.n,
        "N": r.big_n,
        "norm": enclosure(&r.norm),
        "sample_norm": enclosure(&r.sample_norm),
        "ratio_lo": r.ratio_lo.as_ref().map(render::dyadic),
    })
}

fn cmd_run(cfg: &Config, path: &Path, steps: u64) -> Res<String> {
    if steps > cfg.max_steps {
        return Err(Error::ResourceLimit(format!("{steps} steps exceed max_steps = {}", cfg.max_steps)).into());
    }
    let mach = Machine::parse(&read(path)?)?;
    let s = mach.halting_step(steps);
    let rec = json!({ "machine": mach.name, "steps": steps, "halted": s.is_some(), "halting_step": s });
    let text = match s {
        Some(s) => format!("{} halts after {s} step(s)", mach.name),
        None => format!("{} still running after {steps} step(s)", mach.name),
    };
    Ok(emit(cfg.format, &text, &[rec]))
}

fn cmd_verify(cfg: &Config, suite: Suite, seed: u64, cases: Option<usize>, fuzz: Option<usize>) -> Res<(String, bool)> {
    let mut o = VerifyOptions { seed, witness: cfg.witness, ..Default::default() };
    if let Some(c) = cases {
        o.cases = c;
    }
    if let Some(f) = fuzz {
        o.fuzz = f;
    }
    let r = run_suite(suite, &o)?;
    let out = match cfg.format {
        Format::Text => format!("{r}\n"),
        Format::JsonLines => format!("{}\n", serde_json::to_string(&r).expect("json")),
        Format::Csv => render::csv(
            &r.checks
                .iter()
                .map(|c| json!({ "suite": suite.name(), "check": c.name, "pass": c.pass, "detail": c.detail }))
                .collect::<Vec<_>>(),
        ),
    };
    Ok((out, r.pass))
}

fn run(cli: &Cli) -> Res<String> {
    let flags = Overrides {
        precision: cli.precision,
        format: cli.format,
        constants: cli.constants.clone(),
        max_window: cli.max_window,
        max_steps: cli.max_steps,
        max_log2_n: cli.max_log2_n,
    };
    let cfg = Config::load(cli.config.as_deref(), &flags)?;
    match &cli.cmd {
        Cmd::Validate { path, canonical } => cmd_validate(&cfg, path, *canonical),
        Cmd::Compile(a) => cmd_compile(&cfg, a),
        Cmd::Norm(a) => cmd_norm(&cfg, a),
        Cmd::Witness(w) => cmd_witness(&cfg, w),
        Cmd::Run { path, steps } => cmd_run(&cfg, path, *steps),
        Cmd::Verify { suite, seed, cases, fuzz } => {
            let (out, pass) = cmd_verify(&cfg, *suite, *seed, *cases, *fuzz)?;
            print!("{out}");
            if pass {
                Ok(String::new())
            } else {
                Err(CliError::Failed(format!("suite {suite} has failing checks")))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 9 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(out) => {
            let mut so = std::io::stdout().lock();
            let _ = so.write_all(out.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
