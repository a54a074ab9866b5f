//! Description documents: a header, optional gate tables, a generator
//! program `n -> elementary object` and a modulus program `M -> n`.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::exact::ExactRational;
use crate::expr::{as_int, eval, lex, EvalEnv, EvalMode, Expr, Gate, GateTail, Limits, Parser, Val, RESERVED};
use crate::signal::{Coef, ElementarySequence, ElementarySignal};

/// Norm exponent: a rational `p >= 1` or infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Exponent {
    Finite(ExactRational),
    Inf,
}

impl Exponent {
    pub fn one() -> Self {
        Exponent::Finite(ExactRational::one())
    }

    pub fn two() -> Self {
        Exponent::Finite(ExactRational::from_int(2))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Exponent::Finite(p) if p.is_one())
    }

    pub fn is_two(&self) -> bool {
        matches!(self, Exponent::Finite(p) if *p == 2)
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, Exponent::Inf)
    }

    pub fn finite(&self) -> Option<&ExactRational> {
        match self {
            Exponent::Finite(p) => Some(p),
            Exponent::Inf => None,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Inf => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "inf" || s == "infinity" {
            return Ok(Exponent::Inf);
        }
        let p: ExactRational = s
            .parse()
            .map_err(|_| Error::Validation(format!("invalid exponent {s:?}")))?;
        if p.sub(&ExactRational::one()).is_negative() {
            return Err(Error::Validation(format!("exponent {p} is below 1")));
        }
        Ok(Exponent::Finite(p))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    /// Band-limited signals `B_pi^p`.
    Bpi,
    /// Sequences `l^p`.
    Lp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kind {
    Continuous,
    Discrete,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    /// Window half-width, in `n`.
    pub l: Expr,
    /// Common factor, in `n`.
    pub gain: Option<Expr>,
    /// Real part of the coefficient, in `n`, `k` and the bindings.
    pub c: Expr,
    /// Bindings evaluated once per `n`, in order.
    pub bindings: Vec<(String, Expr)>,
    /// Imaginary part of the coefficient.
    pub cim: Option<Expr>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Description {
    pub space: Space,
    pub p: Exponent,
    pub kind: Kind,
    pub gates: Vec<Gate>,
    pub generator: Generator,
    /// `xi(M)`.
    pub modulus: Expr,
}

/// Result of [`Description::instantiate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instance {
    Signal(ElementarySignal),
    Sequence(ElementarySequence),
}

impl Instance {
    pub fn as_signal(&self) -> Option<&ElementarySignal> {
        match self {
            Instance::Signal(s) => Some(s),
            Instance::Sequence(_) => None,
        }
    }

    pub fn as_sequence(&self) -> Option<&ElementarySequence> {
        match self {
            Instance::Sequence(s) => Some(s),
            Instance::Signal(_) => None,
        }
    }

    /// The integer samples, whichever the kind.
    pub fn samples(&self) -> ElementarySequence {
        match self {
            Instance::Signal(s) => s.sample(),
            Instance::Sequence(s) => s.clone(),
        }
    }
}

/// Limits for [`Description::instantiate`].
#[derive(Clone, Copy, Debug)]
pub struct InstantiateOptions {
    /// Bits of precision for coefficients involving irrational values.
    pub prec: u32,
    /// Largest allowed window size `2L + 1`.
    pub max_window: u64,
    pub limits: Limits,
}

impl Default for InstantiateOptions {
    fn default() -> Self {
        InstantiateOptions {
            prec: 128,
            max_window: 1 << 20,
            limits: Limits::default(),
        }
    }
}

fn to_coef(v: Val, what: &str) -> Result<Coef> {
    match v {
        Val::Exact(q) => Ok(Coef::Exact(q)),
        Val::Approx(x) => Ok(Coef::Approx(
            crate::interval::Arith::to_enclosure(&x)
                .ok_or_else(|| Error::gen(format!("{what}: non-finite value")))?,
        )),
        Val::Bool(_) => Err(Error::gen(format!("{what}: boolean where a number is required"))),
    }
}

impl Description {
    /// Parses and validates a document.
    pub fn parse(text: &str) -> Result<Self> {
        let toks = lex(text)?;
        let mut p = Parser::new(&toks);
        let mut space = None;
        let mut exponent = None;
        let mut kind = None;
        let mut gates = Vec::new();
        let mut generator = None;
        let mut modulus = None;
        while !p.at_end() {
            if p.eat_sym(";") {
                continue;
            }
            let pos = p.pos();
            let key = p.ident()?;
            let dup = |seen: bool| -> Result<()> {
                if seen {
                    Err(Error::Syntax {
                        pos,
                        msg: format!("duplicate field '{key}'"),
                    })
                } else {
                    Ok(())
                }
            };
            match key.as_str() {
                "space" => {
                    dup(space.is_some())?;
                    space = Some(match p.ident()?.as_str() {
                        "Bpi" => Space::Bpi,
                        "lp" => Space::Lp,
                        other => return p.err(format!("unknown space '{other}'; expected Bpi or lp")),
                    });
                }
                "p" => {
                    dup(exponent.is_some())?;
                    exponent = Some(parse_exponent(&mut p)?);
                }
                "kind" => {
                    dup(kind.is_some())?;
                    kind = Some(match p.ident()?.as_str() {
                        "continuous" => Kind::Continuous,
                        "discrete" => Kind::Discrete,
                        other => {
                            return p.err(format!("unknown kind '{other}'; expected continuous or discrete"))
                        }
                    });
                }
                "gate" => gates.push(parse_gate(&mut p)?),
                "generator" => {
                    dup(generator.is_some())?;
                    generator = Some(parse_generator(&mut p)?);
                }
                "modulus" => {
                    dup(modulus.is_some())?;
                    p.expect_sym("{")?;
                    skip_semis(&mut p);
                    head(&mut p, "xi", &["M"])?;
                    modulus = Some(p.expr()?);
                    skip_semis(&mut p);
                    p.expect_sym("}")?;
                }
                other => {
                    return Err(Error::Syntax {
                        pos,
                        msg: format!("unknown field '{other}'"),
                    })
                }
            }
            if !p.at_end() && !p.at_sym(";") && !matches!(key.as_str(), "gate" | "generator" | "modulus") {
                return p.err(format!("expected ';' after '{key}', found {}", p.describe()));
            }
        }
        let missing = |f: &str| Error::Validation(format!("missing field '{f}'"));
        let d = Description {
            space: space.ok_or_else(|| missing("space"))?,
            p: exponent.ok_or_else(|| missing("p"))?,
            kind: kind.ok_or_else(|| missing("kind"))?,
            gates,
            generator: generator.ok_or_else(|| missing("generator"))?,
            modulus: modulus.ok_or_else(|| missing("modulus"))?,
        };
        d.validate()?;
        Ok(d)
    }

    /// Checks the invariants that parsing alone does not enforce.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validation(m));
        match (self.space, self.kind) {
            (Space::Bpi, Kind::Continuous) | (Space::Lp, Kind::Discrete) => {}
            (s, k) => return bad(format!("space {s:?} does not match kind {k:?}")),
        }
        if let Exponent::Finite(p) = &self.p {
            if p.sub(&ExactRational::one()).is_negative() {
                return bad(format!("exponent {p} is below 1"));
            }
        }
        let mut names = BTreeSet::new();
        for g in &self.gates {
            if !names.insert(g.name.clone()) {
                return bad(format!("duplicate gate '{}'", g.name));
            }
            if g.h.is_empty() {
                return bad(format!("gate '{}' has an empty table", g.name));
            }
            if g.h.iter().any(|v| v.is_negative()) {
                return bad(format!("gate '{}' has a negative entry", g.name));
            }
        }
        let gen = &self.generator;
        let scope_n: BTreeSet<String> = ["n".to_string()].into();
        check(&gen.l, &scope_n, &names, "L(n)")?;
        if let Some(g) = &gen.gain {
            check(g, &scope_n, &names, "gain(n)")?;
        }
        let mut scope = scope_n.clone();
        for (name, e) in &gen.bindings {
            if RESERVED.contains(&name.as_str()) || name == "n" || name == "k" {
                return bad(format!("binding name '{name}' is reserved"));
            }
            check(e, &scope, &names, &format!("binding {name}"))?;
            if !scope.insert(name.clone()) {
                return bad(format!("binding '{name}' defined twice"));
            }
        }
        scope.insert("k".into());
        check(&gen.c, &scope, &names, "c(n, k)")?;
        if let Some(ci) = &gen.cim {
            check(ci, &scope, &names, "cim(n, k)")?;
        }
        check(&self.modulus, &["M".to_string()].into(), &BTreeSet::new(), "xi(M)")?;
        Ok(())
    }

    /// Canonical text; stable byte for byte.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let space = match self.space {
            Space::Bpi => "Bpi",
            Space::Lp => "lp",
        };
        let kind = match self.kind {
            Kind::Continuous => "continuous",
            Kind::Discrete => "discrete",
        };
        let _ = writeln!(s, "space {space};\np {};\nkind {kind};", self.p);
        for g in &self.gates {
            let h: Vec<String> = g.h.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "gate {} {{\n  h [{}];", g.name, h.join(", "));
            match &g.tail {
                GateTail::Frozen(v) => {
                    let _ = writeln!(s, "  frozen {v};");
                }
                GateTail::Partial => s.push_str("  partial;\n"),
            }
            s.push_str("}\n");
        }
        let gen = &self.generator;
        let _ = writeln!(s, "generator {{\n  L(n) = {};", gen.l);
        if let Some(g) = &gen.gain {
            let _ = writeln!(s, "  gain(n) = {g};");
        }
        let _ = write!(s, "  c(n, k) = {}", gen.c);
        for (i, (name, e)) in gen.bindings.iter().enumerate() {
            let sep = if i == 0 { " where " } else { ", " };
            let _ = write!(s, "{sep}{name} = {e}");
        }
        s.push_str(";\n");
        if let Some(ci) = &gen.cim {
            let _ = writeln!(s, "  cim(n, k) = {ci};");
        }
        let _ = writeln!(s, "}}\nmodulus {{\n  xi(M) = {};\n}}", self.modulus);
        s
    }

    /// Window half-width `L(n)`.
    pub fn window(&self, n: u64) -> Result<u64> {
        let mut env = EvalEnv::new(EvalMode::Approx(64)).with_gates(&self.gates);
        env.bind_int("n", n);
        let l = as_int(&eval(&self.generator.l, &mut env)?)?;
        if l.is_negative() {
            return Err(Error::gen(format!("L({n}) = {l} is negative")));
        }
        l.to_u64()
            .ok_or_else(|| Error::resource(format!("L({n}) = {l} does not fit in 64 bits")))
    }

    /// The `n`-th element of the generated family.
    pub fn instantiate(&self, n: u64) -> Result<Instance> {
        self.instantiate_with(n, &InstantiateOptions::default())
    }

    pub fn instantiate_with(&self, n: u64, opts: &InstantiateOptions) -> Result<Instance> {
        let l = self.window(n)?;
        let size = l.checked_mul(2).and_then(|v| v.checked_add(1)).unwrap_or(u64::MAX);
        if size > opts.max_window {
            return Err(Error::resource(format!(
                "window of size {size} exceeds the limit {}",
                opts.max_window
            )));
        }
        let gen = &self.generator;
        let mut env = EvalEnv::new(EvalMode::Approx(opts.prec))
            .with_gates(&self.gates)
            .with_limits(opts.limits);
        env.bind_int("n", n);
        let gain = match &gen.gain {
            Some(g) => to_coef(eval(g, &mut env)?, "gain")?,
            None => Coef::one(),
        };
        for (name, e) in &gen.bindings {
            let v = eval(e, &mut env)?;
            env.bind(name, v);
        }
        let l_i = l as i64;
        let mut re = Vec::new();
        let mut im = Vec::new();
        env.bind_int("k", 0);
        for k in -l_i..=l_i {
            env.set("k", Val::Exact(ExactRational::from_int(k)));
            let c = to_coef(eval(&gen.c, &mut env)?, "c(n, k)")?;
            if !c.is_exact_zero() {
                re.push((k, c));
            }
            if let Some(ci) = &gen.cim {
                let c = to_coef(eval(ci, &mut env)?, "cim(n, k)")?;
                if !c.is_exact_zero() {
                    im.push((k, c));
                }
            }
        }
        Ok(match self.kind {
            Kind::Continuous => Instance::Signal(ElementarySignal::new(l, gain, re, im)?),
            Kind::Discrete => Instance::Sequence(ElementarySequence::new(l, gain, re, im)?),
        })
    }

    /// `xi(M)`.
    pub fn modulus_of(&self, m: u64) -> Result<u64> {
        let mut env = EvalEnv::new(EvalMode::Exact);
        env.bind_int("M", m);
        let v = as_int(&eval(&self.modulus, &mut env)?)?;
        if v.is_negative() {
            return Err(Error::gen(format!("xi({m}) = {v} is negative")));
        }
        v.to_u64()
            .ok_or_else(|| Error::resource(format!("xi({m}) = {v} does not fit in 64 bits")))
    }
}

impl fmt::Display for Description {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

impl FromStr for Description {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Description::parse(s)
    }
}

fn check(e: &Expr, scope: &BTreeSet<String>, gates: &BTreeSet<String>, what: &str) -> Result<()> {
    e.check_shape()
        .map_err(|m| Error::Validation(format!("{what}: {m}")))?;
    if let Some(v) = e.free_vars().iter().find(|v| !scope.contains(*v)) {
        return Err(Error::Validation(format!("{what}: unbound variable '{v}'")));
    }
    if let Some(g) = e.gates_used().iter().find(|g| !gates.contains(*g)) {
        return Err(Error::Validation(format!("{what}: undeclared gate '{g}'")));
    }
    Ok(())
}

fn skip_semis(p: &mut Parser) {
    while p.eat_sym(";") {}
}

/// `name(v1, v2, ...) =` with the exact parameter names given.
fn head(p: &mut Parser, name: &str, params: &[&str]) -> Result<()> {
    p.expect_ident(name)?;
    p.expect_sym("(")?;
    for (i, v) in params.iter().enumerate() {
        if i > 0 {
            p.expect_sym(",")?;
        }
        p.expect_ident(v)?;
    }
    p.expect_sym(")")?;
    p.expect_sym("=")
}

fn parse_exponent(p: &mut Parser) -> Result<Exponent> {
    if p.at_ident("inf") {
        p.ident()?;
        return Ok(Exponent::Inf);
    }
    let pos = p.pos();
    let num = p.integer()?;
    let den = if p.eat_sym("/") { p.integer()? } else { BigInt::from(1) };
    let q = ExactRational::new(num, den).map_err(|_| Error::Syntax {
        pos,
        msg: "zero denominator in exponent".into(),
    })?;
    if q.sub(&ExactRational::one()).is_negative() {
        return Err(Error::Validation(format!("exponent {q} is below 1")));
    }
    Ok(Exponent::Finite(q))
}

fn parse_gate(p: &mut Parser) -> Result<Gate> {
    let name = p.ident()?;
    if RESERVED.contains(&name.as_str()) {
        return p.err(format!("reserved word '{name}' used as a gate name"));
    }
    p.expect_sym("{")?;
    let mut h = None;
    let mut tail = None;
    loop {
        skip_semis(p);
        if p.eat_sym("}") {
            break;
        }
        let key = p.ident()?;
        match key.as_str() {
            "h" if h.is_none() => {
                p.expect_sym("[")?;
                let mut v = Vec::new();
                if !p.at_sym("]") {
                    v.push(p.integer()?);
                    while p.eat_sym(",") {
                        v.push(p.integer()?);
                    }
                }
                p.expect_sym("]")?;
                h = Some(v);
            }
            "frozen" if tail.is_none() => tail = Some(GateTail::Frozen(p.integer()?)),
            "partial" if tail.is_none() => tail = Some(GateTail::Partial),
            _ => return p.err(format!("unexpected '{key}' in gate {name}")),
        }
    }
    Ok(Gate {
        name,
        h: h.ok_or_else(|| Error::Validation("gate without h table".into()))?,
        tail: tail.ok_or_else(|| Error::Validation("gate needs 'frozen V' or 'partial'".into()))?,
    })
}

fn parse_generator(p: &mut Parser) -> Result<Generator> {
    p.expect_sym("{")?;
    let mut l = None;
    let mut gain = None;
    let mut c = None;
    let mut cim = None;
    loop {
        skip_semis(p);
        if p.eat_sym("}") {
            break;
        }
        let pos = p.pos();
        let dup = |seen: bool, what: &str| -> Result<()> {
            if seen {
                Err(Error::Syntax {
                    pos,
                    msg: format!("duplicate program '{what}'"),
                })
            } else {
                Ok(())
            }
        };
        if p.at_ident("L") {
            dup(l.is_some(), "L")?;
            head(p, "L", &["n"])?;
            l = Some(p.expr()?);
        } else if p.at_ident("gain") {
            dup(gain.is_some(), "gain")?;
            head(p, "gain", &["n"])?;
            gain = Some(p.expr()?);
        } else if p.at_ident("cim") {
            dup(cim.is_some(), "cim")?;
            head(p, "cim", &["n", "k"])?;
            cim = Some(p.expr()?);
        } else if p.at_ident("c") {
            dup(c.is_some(), "c")?;
            head(p, "c", &["n", "k"])?;
            let body = p.expr()?;
            let mut bindings = Vec::new();
            if p.at_ident("where") {
                p.ident()?;
                loop {
                    let name = p.ident()?;
                    p.expect_sym("=")?;
                    bindings.push((name, p.expr()?));
                    if !p.eat_sym(",") {
                        break;
                    }
                }
            }
            c = Some((body, bindings));
        } else {
            return p.err(format!("expected L, gain, c or cim, found {}", p.describe()));
        }
        if !p.at_sym(";") && !p.at_sym("}") {
            return p.err(format!("expected ';', found {}", p.describe()));
        }
    }
    let (c, bindings) = c.ok_or_else(|| Error::Validation("generator lacks c(n, k)".into()))?;
    Ok(Generator {
        l: l.ok_or_else(|| Error::Validation("generator lacks L(n)".into()))?,
        gain,
        c,
        bindings,
        cim,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const LEMMA1: &str = "space Bpi; p inf; kind continuous; generator { L(n) = 2^(8*n); \
        c(n,k) = if(k >= 1, (-1)^k / C, 0) where C = -(1/pi) * sum(j,1,2^(8*n), 1/(j - 1/2)) }; \
        modulus { xi(M) = M }";

    #[test]
    fn skeleton_parses_and_instantiates() {
        let d = Description::parse(LEMMA1).unwrap();
        let f = d.instantiate(1).unwrap();
        let f = f.as_signal().unwrap();
        assert_eq!(f.l(), 256);
        assert_eq!(f.support(), Some((1, 256)));
        assert_eq!(d.modulus_of(5).unwrap(), 5);
    }

    #[test]
    fn canonical_roundtrip() {
        let d = Description::parse(LEMMA1).unwrap();
        let s = d.serialize();
        let d2 = Description::parse(&s).unwrap();
        assert_eq!(d, d2);
        assert_eq!(d2.serialize(), s);
    }

    #[test]
    fn field_order_is_normalized() {
        let a = Description::parse("kind discrete; p 3/2; space lp; modulus { xi(M) = M + 3 }; generator { c(n,k) = 1; L(n) = 0 }").unwrap();
        assert!(a.serialize().starts_with("space lp;\np 3/2;\nkind discrete;\n"));
        assert_eq!(a.modulus_of(5).unwrap(), 8);
    }

    #[test]
    fn validation_errors() {
        let unbound = "space Bpi; p 2; kind continuous; generator { L(n) = 1; c(n,k) = j }; modulus { xi(M) = 0 }";
        assert!(matches!(Description::parse(unbound), Err(Error::Validation(_))));
        let missing = "space Bpi; p 2; kind continuous; modulus { xi(M) = 0 }";
        assert!(matches!(Description::parse(missing), Err(Error::Validation(_))));
        let mismatch = "space lp; p 2; kind continuous; generator { L(n) = 1; c(n,k) = 0 }; modulus { xi(M) = 0 }";
        assert!(matches!(Description::parse(mismatch), Err(Error::Validation(_))));
        let syntax = "space Bpi; p 2 kind continuous;";
        assert!(matches!(Description::parse(syntax), Err(Error::Syntax { .. })));
        let gate = "space Bpi; p 2; kind continuous; generator { L(n) = gated(A, n); c(n,k) = 0 }; modulus { xi(M) = M }";
        assert!(matches!(Description::parse(gate), Err(Error::Validation(_))));
    }

    #[test]
    fn gates_roundtrip() {
        let text = "space Bpi; p inf; kind continuous; gate A { h [1, 2, 3]; partial }; \
            generator { L(n) = gated(A, n); c(n,k) = if(k == 0, 1, 0) }; modulus { xi(M) = M }";
        let d = Description::parse(text).unwrap();
        assert_eq!(Description::parse(&d.serialize()).unwrap(), d);
        assert_eq!(d.instantiate(2).unwrap().as_signal().unwrap().l(), 3);
        assert!(matches!(d.instantiate(3), Err(Error::GeneratorFailure(_))));
    }
}
