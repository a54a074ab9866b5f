use std::cell::Cell;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{BinOp, Expr, Func};
use crate::dyadic::Dyadic;
use crate::elementary::hsum_big;
use crate::error::{Error, Result};
use crate::exact::ExactRational;
use crate::interval::{piq, Arith, DyadicIv, Enclosure};

/// Value of an expression: booleans from comparisons, exact rationals, or
/// dyadic enclosures once an irrational quantity is involved.
#[derive(Clone, Debug, PartialEq)]
pub enum Val {
    Bool(bool),
    Exact(ExactRational),
    Approx(DyadicIv),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    /// Rational results only; `pi` and friends are errors.
    Exact,
    /// Exact where possible, enclosures of the given precision otherwise.
    Approx(u32),
}

#[derive(Clone, Copy, Debug)]
pub struct Limits {
    /// Total summation terms across one evaluation.
    pub max_sum_terms: u64,
    /// Exact intermediate results larger than this (in bits) are
    /// rounded to enclosures, or refused in exact mode.
    pub max_exact_bits: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_sum_terms: 1 << 22,
            max_exact_bits: 1 << 16,
        }
    }
}

/// What a gate yields past its last tabulated `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GateTail {
    /// The machine halted; the table is constant from here on.
    Frozen(BigInt),
    /// Unknown beyond the table.
    Partial,
}

/// Lookup table `k -> h(m, k)` for a machine `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gate {
    pub name: String,
    pub h: Vec<BigInt>,
    pub tail: GateTail,
}

impl Gate {
    pub fn kmax(&self) -> usize {
        self.h.len().saturating_sub(1)
    }

    pub fn lookup(&self, k: &BigInt) -> Result<BigInt> {
        if k.is_negative() {
            return Err(Error::gen(format!("gate {}: negative index {k}", self.name)));
        }
        if let Some(v) = k.to_usize().and_then(|i| self.h.get(i)) {
            return Ok(v.clone());
        }
        match &self.tail {
            GateTail::Frozen(v) => Ok(v.clone()),
            GateTail::Partial => Err(Error::gen(format!(
                "gate {} is tabulated only up to k = {}",
                self.name,
                self.kmax()
            ))),
        }
    }
}

pub struct EvalEnv<'a> {
    pub mode: EvalMode,
    pub limits: Limits,
    pub gates: &'a [Gate],
    vars: Vec<(String, Val)>,
    terms: Cell<u64>,
}

impl<'a> EvalEnv<'a> {
    pub fn new(mode: EvalMode) -> Self {
        EvalEnv {
            mode,
            limits: Limits::default(),
            gates: &[],
            vars: Vec::new(),
            terms: Cell::new(0),
        }
    }

    pub fn with_gates(mut self, gates: &'a [Gate]) -> Self {
        self.gates = gates;
        self
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    pub fn bind(&mut self, name: &str, v: Val) {
        self.vars.push((name.to_string(), v));
    }

    pub fn bind_int(&mut self, name: &str, v: impl Into<BigInt>) {
        self.bind(name, Val::Exact(ExactRational::from_bigint(v.into())));
    }

    pub fn unbind(&mut self) {
        self.vars.pop();
    }

    /// Overwrites the innermost binding of `name`, or adds one.
    pub fn set(&mut self, name: &str, v: Val) {
        match self.vars.iter_mut().rev().find(|(n, _)| n == name) {
            Some(slot) => slot.1 = v,
            None => self.bind(name, v),
        }
    }

    fn lookup(&self, name: &str) -> Result<Val> {
        self.vars
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| Error::gen(format!("unbound variable {name}")))
    }

    fn prec(&self) -> Result<u32> {
        match self.mode {
            EvalMode::Approx(p) => Ok(p),
            EvalMode::Exact => Err(Error::gen("irrational value in an exact-only program")),
        }
    }

    fn approx(&self, q: &ExactRational) -> Result<DyadicIv> {
        Ok(DyadicIv::from_rational(self.prec()?, q))
    }

    fn to_iv(&self, v: &Val) -> Result<DyadicIv> {
        match v {
            Val::Exact(q) => self.approx(q),
            Val::Approx(a) => Ok(a.clone()),
            Val::Bool(_) => Err(Error::gen("boolean used as a number")),
        }
    }

    /// Keeps exact values exact unless they grow beyond the size limit.
    fn exact(&self, q: ExactRational) -> Result<Val> {
        if q.bits() <= self.limits.max_exact_bits {
            return Ok(Val::Exact(q));
        }
        match self.mode {
            EvalMode::Approx(p) => Ok(Val::Approx(DyadicIv::from_rational(p, &q))),
            EvalMode::Exact => Err(Error::resource(format!(
                "exact intermediate of {} bits",
                q.bits()
            ))),
        }
    }

    fn count_terms(&self, n: u64) -> Result<()> {
        let t = self.terms.get().saturating_add(n);
        if t > self.limits.max_sum_terms {
            return Err(Error::resource(format!(
                "more than {} summation terms",
                self.limits.max_sum_terms
            )));
        }
        self.terms.set(t);
        Ok(())
    }
}

/// Evaluates `e` under `env`.
pub fn eval(e: &Expr, env: &mut EvalEnv) -> Result<Val> {
    match e {
        Expr::Int(v) => Ok(Val::Exact(ExactRational::from_bigint(v.clone()))),
        Expr::Var(name) => env.lookup(name),
        Expr::Pi => Ok(Val::Approx(DyadicIv::pi(env.prec()?))),
        Expr::Neg(a) => match eval(a, env)? {
            Val::Exact(q) => Ok(Val::Exact(q.neg())),
            Val::Approx(x) => Ok(Val::Approx(x.neg())),
            Val::Bool(_) => Err(Error::gen("cannot negate a boolean")),
        },
        Expr::Not(a) => Ok(Val::Bool(!as_bool(&eval(a, env)?)?)),
        Expr::Bin(op, a, b) => binary(*op, a, b, env),
        Expr::If(c, a, b) => {
            if as_bool(&eval(c, env)?)? {
                eval(a, env)
            } else {
                eval(b, env)
            }
        }
        Expr::Call(f, args) => call(*f, args, env),
        Expr::Sum { var, lo, hi, body } => {
            let lo = as_int(&eval(lo, env)?)?;
            let hi = as_int(&eval(hi, env)?)?;
            if hi < lo {
                return Ok(Val::Exact(ExactRational::zero()));
            }
            let count = (&hi - &lo + 1u32)
                .to_u64()
                .ok_or_else(|| Error::resource("summation range too large"))?;
            env.count_terms(count)?;
            let mut acc = Val::Exact(ExactRational::zero());
            let mut j = lo;
            env.bind(var, Val::Exact(ExactRational::zero()));
            let res = (|| {
                while j <= hi {
                    env.set(var, Val::Exact(ExactRational::from_bigint(j.clone())));
                    let t = eval(body, env)?;
                    acc = add(&acc, &t, env)?;
                    j += 1;
                }
                Ok(acc)
            })();
            env.unbind();
            res
        }
        Expr::Limit {
            var,
            seq,
            mvar,
            modulus,
        } => {
            let prec = env.prec()?;
            let m = prec as i64 + 2;
            env.bind_int(mvar, m);
            let n = eval(modulus, env).and_then(|v| as_int(&v));
            env.unbind();
            let n = n?;
            if n.is_negative() {
                return Err(Error::gen(format!("modulus returned negative index {n}")));
            }
            env.bind_int(var, n);
            let v = eval(seq, env);
            env.unbind();
            let x = env.to_iv(&v?)?;
            let r = DyadicIv::from_dyadic(prec, &Dyadic::pow2(-m));
            let out = DyadicIv::from_bounds(prec, &x.sub(&r).lo(), &x.add(&r).hi());
            Ok(Val::Approx(out))
        }
        Expr::Gated { gate, k } => {
            let k = as_int(&eval(k, env)?)?;
            let g = env
                .gates
                .iter()
                .find(|g| &g.name == gate)
                .ok_or_else(|| Error::gen(format!("unknown gate {gate}")))?;
            Ok(Val::Exact(ExactRational::from_bigint(g.lookup(&k)?)))
        }
    }
}

/// Encloses the value of a closed numeric expression with precision `m` bits.
pub fn interval_eval(e: &Expr, m: u32) -> Result<Enclosure> {
    let mut env = EvalEnv::new(EvalMode::Approx(m.max(8) + 8));
    match eval(e, &mut env)? {
        Val::Exact(q) => match exact_dyadic(&q) {
            Some(d) => Ok(Enclosure::point(d)),
            None => Ok(Enclosure::from_rational(&q, m.max(8) + 8)),
        },
        Val::Approx(x) => x
            .to_enclosure()
            .ok_or_else(|| Error::gen("non-finite enclosure")),
        Val::Bool(_) => Err(Error::gen("expression is boolean")),
    }
}

/// `q` as a dyadic when its denominator is a power of two.
pub(crate) fn exact_dyadic(q: &ExactRational) -> Option<Dyadic> {
    let d = q.denom();
    let one = BigInt::one();
    if (d & (d - &one)).is_zero() {
        Some(Dyadic::new(q.numer().clone(), -(d.bits() as i64 - 1)))
    } else {
        None
    }
}

fn as_bool(v: &Val) -> Result<bool> {
    match v {
        Val::Bool(b) => Ok(*b),
        _ => Err(Error::gen("number used as a condition")),
    }
}

/// Integer value; enclosures qualify only when their floor is determined
/// and they sit on an integer.
pub(crate) fn as_int(v: &Val) -> Result<BigInt> {
    match v {
        Val::Exact(q) => q
            .to_integer()
            .ok_or_else(|| Error::gen(format!("expected an integer, got {q}"))),
        Val::Approx(x) => {
            let lo = x.lo().ceil();
            let hi = x.hi().floor();
            if lo == hi {
                Ok(lo)
            } else {
                Err(Error::gen("integer value not determined by enclosure"))
            }
        }
        Val::Bool(_) => Err(Error::gen("boolean used as a number")),
    }
}

fn add(a: &Val, b: &Val, env: &EvalEnv) -> Result<Val> {
    match (a, b) {
        (Val::Exact(x), Val::Exact(y)) => env.exact(x.add(y)),
        _ => Ok(Val::Approx(env.to_iv(a)?.add(&env.to_iv(b)?))),
    }
}

/// Three-valued comparison of `a - b` against zero.
fn sign_of_diff(a: &Val, b: &Val, env: &EvalEnv) -> Result<i32> {
    match (a, b) {
        (Val::Exact(x), Val::Exact(y)) => Ok(x.sub(y).signum()),
        _ => {
            let d = env.to_iv(a)?.sub(&env.to_iv(b)?);
            if d.is_pos() {
                Ok(1)
            } else if d.is_neg() {
                Ok(-1)
            } else if d.is_point() {
                Ok(0)
            } else {
                Err(Error::gen("comparison undecided at working precision"))
            }
        }
    }
}

fn binary(op: BinOp, a: &Expr, b: &Expr, env: &mut EvalEnv) -> Result<Val> {
    match op {
        BinOp::And => {
            return Ok(Val::Bool(
                as_bool(&eval(a, env)?)? && as_bool(&eval(b, env)?)?,
            ))
        }
        BinOp::Or => {
            return Ok(Val::Bool(
                as_bool(&eval(a, env)?)? || as_bool(&eval(b, env)?)?,
            ))
        }
        _ => {}
    }
    let x = eval(a, env)?;
    let y = eval(b, env)?;
    if matches!(x, Val::Bool(_)) || matches!(y, Val::Bool(_)) {
        return match (op, &x, &y) {
            (BinOp::Eq, Val::Bool(p), Val::Bool(q)) => Ok(Val::Bool(p == q)),
            (BinOp::Ne, Val::Bool(p), Val::Bool(q)) => Ok(Val::Bool(p != q)),
            _ => Err(Error::gen("boolean used as a number")),
        };
    }
    match op {
        BinOp::Add => add(&x, &y, env),
        BinOp::Sub => add(&x, &neg(&y), env),
        BinOp::Mul => match (&x, &y) {
            (Val::Exact(p), Val::Exact(q)) => env.exact(p.mul(q)),
            (Val::Exact(p), _) | (_, Val::Exact(p)) if p.is_zero() => {
                Ok(Val::Exact(ExactRational::zero()))
            }
            _ => Ok(Val::Approx(env.to_iv(&x)?.mul(&env.to_iv(&y)?))),
        },
        BinOp::Div => match (&x, &y) {
            (Val::Exact(p), Val::Exact(q)) => env.exact(p.div(q)?),
            _ => {
                let d = env.to_iv(&y)?;
                if d.contains_zero() {
                    return Err(Error::DivisionByZero);
                }
                let n = env.to_iv(&x)?;
                n.div(&d).map(Val::Approx).ok_or(Error::DivisionByZero)
            }
        },
        BinOp::Rem => {
            let p = as_int(&x)?;
            let q = as_int(&y)?;
            if q.is_zero() {
                return Err(Error::DivisionByZero);
            }
            // Euclidean remainder, always in [0, |q|).
            let r = ((p % &q) + q.abs()) % q.abs();
            Ok(Val::Exact(ExactRational::from_bigint(r)))
        }
        BinOp::Pow => power(&x, &y, env),
        BinOp::Eq => Ok(Val::Bool(sign_of_diff(&x, &y, env)? == 0)),
        BinOp::Ne => Ok(Val::Bool(sign_of_diff(&x, &y, env)? != 0)),
        BinOp::Lt => Ok(Val::Bool(sign_of_diff(&x, &y, env)? < 0)),
        BinOp::Le => Ok(Val::Bool(sign_of_diff(&x, &y, env)? <= 0)),
        BinOp::Gt => Ok(Val::Bool(sign_of_diff(&x, &y, env)? > 0)),
        BinOp::Ge => Ok(Val::Bool(sign_of_diff(&x, &y, env)? >= 0)),
        BinOp::And | BinOp::Or => unreachable!(),
    }
}

fn neg(v: &Val) -> Val {
    match v {
        Val::Exact(q) => Val::Exact(q.neg()),
        Val::Approx(x) => Val::Approx(x.neg()),
        Val::Bool(b) => Val::Bool(*b),
    }
}

fn power(x: &Val, y: &Val, env: &EvalEnv) -> Result<Val> {
    let e = as_int(y).map_err(|_| Error::gen("exponent must be an integer"))?;
    let mag = e.abs();
    if let Val::Exact(b) = x {
        if b.is_zero() {
            return if e.is_negative() {
                Err(Error::DivisionByZero)
            } else if e.is_zero() {
                Ok(Val::Exact(ExactRational::one()))
            } else {
                Ok(Val::Exact(ExactRational::zero()))
            };
        }
        if b.abs().is_one() {
            let odd = (&mag % 2u32).is_one();
            return Ok(Val::Exact(if odd { b.clone() } else { ExactRational::one() }));
        }
        let est = mag
            .to_u64()
            .and_then(|m| m.checked_mul(b.bits()))
            .unwrap_or(u64::MAX);
        if est <= env.limits.max_exact_bits {
            let v = b.powi(e.to_i64().expect("bounded by size check"))?;
            return Ok(Val::Exact(v));
        }
    }
    let m = mag
        .to_u32()
        .ok_or_else(|| Error::resource(format!("exponent {e} too large")))?;
    let base = env.to_iv(x)?;
    let p = base.powi(m);
    if e.is_negative() {
        if p.contains_zero() {
            return Err(Error::DivisionByZero);
        }
        p.recip().map(Val::Approx).ok_or(Error::DivisionByZero)
    } else {
        Ok(Val::Approx(p))
    }
}

fn call(f: Func, args: &[Expr], env: &mut EvalEnv) -> Result<Val> {
    if f == Func::Table {
        let i = as_int(&eval(&args[0], env)?)?;
        let lo = as_int(&eval(&args[1], env)?)?;
        let idx = &i - &lo;
        let entries = &args[2..];
        return match idx.to_usize().filter(|&j| !idx.is_negative() && j < entries.len()) {
            Some(j) => eval(&entries[j], env),
            None => Ok(Val::Exact(ExactRational::zero())),
        };
    }
    let vals = args
        .iter()
        .map(|a| eval(a, env))
        .collect::<Result<Vec<_>>>()?;
    match f {
        Func::Abs => match &vals[0] {
            Val::Exact(q) => Ok(Val::Exact(q.abs())),
            Val::Approx(x) => Ok(Val::Approx(x.abs())),
            Val::Bool(_) => Err(Error::gen("boolean used as a number")),
        },
        Func::Min | Func::Max => {
            let (a, b) = (&vals[0], &vals[1]);
            if let (Val::Exact(p), Val::Exact(q)) = (a, b) {
                let pick_a = (p.sub(q).signum() <= 0) == (f == Func::Min);
                return Ok(Val::Exact(if pick_a { p.clone() } else { q.clone() }));
            }
            let (x, y) = (env.to_iv(a)?, env.to_iv(b)?);
            Ok(Val::Approx(if f == Func::Min { x.min(&y) } else { x.max(&y) }))
        }
        Func::Floor => match &vals[0] {
            Val::Exact(q) => Ok(Val::Exact(ExactRational::from_bigint(q.floor()))),
            Val::Approx(x) => {
                let lo = x.lo().floor();
                if lo == x.hi().floor() {
                    Ok(Val::Exact(ExactRational::from_bigint(lo)))
                } else {
                    Err(Error::gen("floor undecided at working precision"))
                }
            }
            Val::Bool(_) => Err(Error::gen("boolean used as a number")),
        },
        Func::Hsum => {
            let n = as_int(&vals[0])?;
            if n <= BigInt::from(512) || env.mode == EvalMode::Exact {
                let count = n.to_u64().unwrap_or(u64::MAX);
                env.count_terms(count)?;
                let mut acc = ExactRational::zero();
                for k in 1..=count {
                    let t = ExactRational::new(BigInt::from(2), BigInt::from(2 * k - 1))?;
                    acc = acc.add(&t);
                }
                return env.exact(acc);
            }
            Ok(Val::Approx(hsum_big::<DyadicIv>(env.prec()?, &n)))
        }
        Func::Piq => {
            let j = as_int(&vals[0])?;
            let j = j
                .to_u32()
                .filter(|&j| j <= 1 << 20)
                .ok_or_else(|| Error::resource(format!("piq({j}) out of range")))?;
            Ok(Val::Exact(piq(j)))
        }
        Func::L1q => {
            let n = as_int(&vals[0])?;
            let n = n
                .to_u64()
                .filter(|&n| n >= 1)
                .ok_or_else(|| Error::gen(format!("l1q({n}) needs 1 <= N < 2^64")))?;
            let prec = env.prec()?;
            let e = crate::norm::l1q(n)?;
            Ok(Val::Approx(DyadicIv::from_enclosure(prec, &e)))
        }
        Func::Table => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str) -> Result<Val> {
        let e = Expr::parse(s).unwrap();
        eval(&e, &mut EvalEnv::new(EvalMode::Approx(64)))
    }

    fn q(s: &str) -> Val {
        Val::Exact(s.parse().unwrap())
    }

    #[test]
    fn exact_arithmetic() {
        assert_eq!(ev("1/2 + 1/3").unwrap(), q("5/6"));
        assert_eq!(ev("(-1)^7").unwrap(), q("-1"));
        assert_eq!(ev("2^-3").unwrap(), q("1/8"));
        assert_eq!(ev("-7 % 3").unwrap(), q("2"));
        assert_eq!(ev("sum(j, 1, 4, j)").unwrap(), q("10"));
        assert_eq!(ev("hsum(2)").unwrap(), q("8/3"));
        assert_eq!(ev("table(-2, -3, 5, 6, 7)").unwrap(), q("6"));
        assert_eq!(ev("table(9, -3, 5, 6, 7)").unwrap(), q("0"));
        assert_eq!(ev("if(2 > 1 && !(1 == 2), 1, 0)").unwrap(), q("1"));
        assert_eq!(ev("min(1/3, 1/4) + max(-1, 2)").unwrap(), q("9/4"));
        assert_eq!(ev("floor(-7/2)").unwrap(), q("-4"));
    }

    #[test]
    fn approximate_values() {
        let e = interval_eval(&Expr::parse("pi * (1/4)").unwrap(), 20).unwrap();
        assert!(e.lo_f64() <= 0.785_398_163_397_449 && e.hi_f64() >= 0.785_398_163_397_448);
        assert!(e.width_at_most(-20));
        assert_eq!(ev("floor(pi)").unwrap(), q("3"));
        assert_eq!(ev("pi > 3").unwrap(), Val::Bool(true));
    }

    #[test]
    fn errors() {
        assert_eq!(ev("1/(1 - 1)"), Err(Error::DivisionByZero));
        assert_eq!(ev("1/(pi - pi)"), Err(Error::DivisionByZero));
        assert!(matches!(ev("x + 1"), Err(Error::GeneratorFailure(_))));
        assert!(matches!(ev("pi == pi"), Err(Error::GeneratorFailure(_))));
        assert!(matches!(ev("sum(j, 1, 10^9, j)"), Err(Error::ResourceLimit(_))));
        let e = Expr::parse("pi").unwrap();
        assert!(eval(&e, &mut EvalEnv::new(EvalMode::Exact)).is_err());
    }

    #[test]
    fn limit_node() {
        let v = ev("limit(j, piq(j), M, M)").unwrap();
        match v {
            Val::Approx(x) => {
                assert!(x.lo_f64() <= std::f64::consts::PI && x.hi_f64() >= std::f64::consts::PI)
            }
            _ => panic!(),
        }
    }

    #[test]
    fn gates() {
        let g = Gate {
            name: "A".into(),
            h: vec![BigInt::from(5), BigInt::from(9)],
            tail: GateTail::Partial,
        };
        let gs = [g];
        let e = Expr::parse("gated(A, k)").unwrap();
        let mut env = EvalEnv::new(EvalMode::Exact).with_gates(&gs);
        env.bind_int("k", 1);
        assert_eq!(eval(&e, &mut env).unwrap(), q("9"));
        env.set("k", q("2"));
        assert!(eval(&e, &mut env).is_err());
    }
}
