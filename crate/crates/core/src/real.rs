//! Computable reals given by a rational sequence and a modulus of convergence.

use std::fmt;

use num_bigint::BigInt;

use crate::dyadic::{Dyadic, Round};
use crate::error::{Error, Result};
use crate::exact::ExactRational;
use crate::expr::{as_int, eval, EvalEnv, EvalMode, Expr, Val};
use crate::interval::Enclosure;

/// `x = lim seq(n)` with `|x - seq(n)| <= 2^-M` whenever `n >= modulus(M)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RealDescription {
    /// Program in the variable `n`; must evaluate to a rational.
    pub seq: Expr,
    /// Program in the variable `M`; must evaluate to a natural number.
    pub modulus: Expr,
}

impl RealDescription {
    pub fn new(seq: Expr, modulus: Expr) -> Result<Self> {
        check_vars(&seq, "n", "sequence")?;
        check_vars(&modulus, "M", "modulus")?;
        Ok(RealDescription { seq, modulus })
    }

    /// Parses the two programs from source text.
    pub fn parse(seq: &str, modulus: &str) -> Result<Self> {
        Self::new(Expr::parse(seq)?, Expr::parse(modulus)?)
    }

    pub fn zero() -> Self {
        Self::constant(&ExactRational::zero())
    }

    pub fn constant(q: &ExactRational) -> Self {
        RealDescription {
            seq: Expr::rational(q),
            modulus: Expr::int(0),
        }
    }

    /// pi through the rational approximations `piq(n)`.
    pub fn pi() -> Self {
        Self::parse("piq(n)", "M").expect("static program")
    }

    /// `C(N) = -(1/pi) hsum(N)`.
    ///
    /// `|hsum(N)/pi - hsum(N)/piq(n)| <= hsum(N) 2^-n / 9`, and
    /// `hsum(N) <= 3 + log2 N`, so a shift of `bits(3 + log2 N)` suffices.
    pub fn c_of(n: u64) -> Self {
        let shift = 64 - (3 + 63 - n.max(1).leading_zeros() as u64).leading_zeros();
        Self::parse(&format!("-hsum({n}) / piq(n)"), &format!("M + {shift}"))
            .expect("static program")
    }

    /// Evaluates the modulus program at `m`.
    pub fn modulus_at(&self, m: u32) -> Result<BigInt> {
        let mut env = EvalEnv::new(EvalMode::Exact);
        env.bind_int("M", m);
        let n = as_int(&eval(&self.modulus, &mut env)?)?;
        if n < BigInt::from(0) {
            return Err(Error::gen(format!("modulus returned negative index {n}")));
        }
        Ok(n)
    }

    /// Evaluates the sequence program at `n`.
    pub fn term(&self, n: &BigInt) -> Result<ExactRational> {
        let mut env = EvalEnv::new(EvalMode::Exact);
        env.bind_int("n", n.clone());
        match eval(&self.seq, &mut env)? {
            Val::Exact(q) => Ok(q),
            _ => Err(Error::gen("sequence term is not a rational number")),
        }
    }
}

fn check_vars(e: &Expr, allowed: &str, what: &str) -> Result<()> {
    e.check_shape().map_err(Error::Validation)?;
    if let Some(v) = e.free_vars().into_iter().find(|v| v != allowed) {
        return Err(Error::Validation(format!("{what} program uses unbound variable {v}")));
    }
    if !e.gates_used().is_empty() {
        return Err(Error::Validation(format!("{what} program refers to a gate")));
    }
    Ok(())
}

impl fmt::Display for RealDescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "seq(n) = {}; xi(M) = {}", self.seq, self.modulus)
    }
}

/// `[r - 2^-M, r + 2^-M]` with `r = seq(modulus(M))`, endpoints rounded
/// outward to multiples of `2^-(M+2)`.
pub fn approximate(x: &RealDescription, m: u32) -> Result<Enclosure> {
    let n = x.modulus_at(m)?;
    let r = x.term(&n)?;
    let rad = ExactRational::new(BigInt::from(1), BigInt::from(1) << m)?;
    let e = -(m as i64) - 2;
    let lo = Dyadic::from_rational_exp(&r.sub(&rad), e, Round::Down);
    let hi = Dyadic::from_rational_exp(&r.add(&rad), e, Round::Up);
    Enclosure::new(lo, hi)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ComplexDescription {
    pub re: RealDescription,
    pub im: RealDescription,
}

impl ComplexDescription {
    pub fn real(re: RealDescription) -> Self {
        ComplexDescription {
            re,
            im: RealDescription::zero(),
        }
    }

    pub fn approximate(&self, m: u32) -> Result<(Enclosure, Enclosure)> {
        Ok((approximate(&self.re, m)?, approximate(&self.im, m)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_and_pi() {
        let z = approximate(&RealDescription::zero(), 10).unwrap();
        assert!(z.contains_zero() && z.width_at_most(-8));
        let p = approximate(&RealDescription::pi(), 20).unwrap();
        assert!(p.lo_f64() <= 3.141_592_653 && p.hi_f64() >= 3.141_592_654);
        assert!(p.width_at_most(-18));
    }

    #[test]
    fn c_of_two() {
        let c = approximate(&RealDescription::c_of(2), 16).unwrap();
        let v = -(8.0 / 3.0) / std::f64::consts::PI;
        assert!(c.lo_f64() <= v && v <= c.hi_f64(), "{c}");
    }

    #[test]
    fn validation() {
        assert!(RealDescription::parse("n + k", "M").is_err());
        assert!(RealDescription::parse("1", "n").is_err());
        let bad = RealDescription::parse("pi", "M").unwrap();
        assert!(matches!(approximate(&bad, 4), Err(Error::GeneratorFailure(_))));
    }
}
