//! Coefficient expressions: AST, canonical printer, parser and evaluator.

mod eval;
pub(crate) mod lexer;
mod parser;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Signed;

use crate::exact::ExactRational;

pub use eval::{eval, interval_eval, EvalEnv, EvalMode, Gate, GateTail, Limits, Val};
pub(crate) use eval::{as_int, exact_dyadic};
pub(crate) use lexer::lex;
pub use lexer::{Tok, Token};
pub(crate) use parser::Parser;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Pow,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Pow => "^",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    fn level(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 5,
            BinOp::Pow => 7,
        }
    }
}

/// Built-in functions with ordinary argument lists.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Abs,
    Min,
    Max,
    Floor,
    /// `hsum(N) = sum_{k=1}^{N} 1/(k - 1/2)`
    Hsum,
    /// `piq(j)`: a rational within `2^-j` of pi.
    Piq,
    /// `l1q(N)`: the L1 norm of the signal `q_N`.
    L1q,
    /// `table(i, lo, e0, e1, ...)`: `e_{i-lo}` inside the table, 0 outside.
    Table,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
            Func::Floor => "floor",
            Func::Hsum => "hsum",
            Func::Piq => "piq",
            Func::L1q => "l1q",
            Func::Table => "table",
        }
    }

    pub fn from_name(s: &str) -> Option<Func> {
        Some(match s {
            "abs" => Func::Abs,
            "min" => Func::Min,
            "max" => Func::Max,
            "floor" => Func::Floor,
            "hsum" => Func::Hsum,
            "piq" => Func::Piq,
            "l1q" => Func::L1q,
            "table" => Func::Table,
            _ => return None,
        })
    }

    /// Allowed argument counts `(min, max)`.
    fn arity(self) -> (usize, usize) {
        match self {
            Func::Abs | Func::Floor | Func::Hsum | Func::Piq | Func::L1q => (1, 1),
            Func::Min | Func::Max => (2, 2),
            Func::Table => (3, usize::MAX),
        }
    }
}

/// Reserved words that cannot be used as variable names.
pub const RESERVED: &[&str] = &[
    "pi", "if", "sum", "limit", "gated", "abs", "min", "max", "floor", "hsum", "piq", "l1q",
    "table", "where",
];

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    /// Non-negative integer literal.
    Int(BigInt),
    Var(String),
    Pi,
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
    /// `sum(var, lo, hi, body)`, inclusive bounds.
    Sum {
        var: String,
        lo: Box<Expr>,
        hi: Box<Expr>,
        body: Box<Expr>,
    },
    /// `limit(var, seq, mvar, modulus)`: the real number with rational
    /// approximations `seq` and modulus of convergence `modulus`.
    Limit {
        var: String,
        seq: Box<Expr>,
        mvar: String,
        modulus: Box<Expr>,
    },
    /// `gated(gate, k)`: table lookup `h(m, k)` for a declared gate.
    Gated { gate: String, k: Box<Expr> },
}

impl Expr {
    /// Integer constant; negative values become `Neg(Int)`.
    pub fn int(v: impl Into<BigInt>) -> Expr {
        let v: BigInt = v.into();
        if v.is_negative() {
            Expr::Neg(Box::new(Expr::Int(-v)))
        } else {
            Expr::Int(v)
        }
    }

    /// Rational constant as `a / b` (or an integer).
    pub fn rational(q: &ExactRational) -> Expr {
        let (neg, n, d) = q.parts();
        let body = if q.is_integer() {
            Expr::Int(n)
        } else {
            Expr::Bin(BinOp::Div, Box::new(Expr::Int(n)), Box::new(Expr::Int(d)))
        };
        if neg {
            Expr::Neg(Box::new(body))
        } else {
            body
        }
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    /// Replaces every free occurrence of `name` by `with`.
    pub fn substitute(&self, name: &str, with: &Expr) -> Expr {
        let s = |e: &Expr| Box::new(e.substitute(name, with));
        match self {
            Expr::Var(v) if v == name => with.clone(),
            Expr::Int(_) | Expr::Var(_) | Expr::Pi => self.clone(),
            Expr::Neg(a) => Expr::Neg(s(a)),
            Expr::Not(a) => Expr::Not(s(a)),
            Expr::Bin(op, a, b) => Expr::Bin(*op, s(a), s(b)),
            Expr::If(c, a, b) => Expr::If(s(c), s(a), s(b)),
            Expr::Call(f, args) => {
                Expr::Call(*f, args.iter().map(|a| a.substitute(name, with)).collect())
            }
            Expr::Sum { var, lo, hi, body } => Expr::Sum {
                var: var.clone(),
                lo: s(lo),
                hi: s(hi),
                body: if var == name { body.clone() } else { s(body) },
            },
            Expr::Limit {
                var,
                seq,
                mvar,
                modulus,
            } => Expr::Limit {
                var: var.clone(),
                seq: if var == name { seq.clone() } else { s(seq) },
                mvar: mvar.clone(),
                modulus: if mvar == name { modulus.clone() } else { s(modulus) },
            },
            Expr::Gated { gate, k } => Expr::Gated {
                gate: gate.clone(),
                k: s(k),
            },
        }
    }

    /// Free variables of the expression.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Expr::Int(_) | Expr::Pi => {}
            Expr::Var(v) => {
                if !bound.contains(v) {
                    out.insert(v.clone());
                }
            }
            Expr::Neg(a) | Expr::Not(a) => a.collect_free(bound, out),
            Expr::Bin(_, a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Expr::If(c, a, b) => {
                c.collect_free(bound, out);
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.collect_free(bound, out)),
            Expr::Sum { var, lo, hi, body } => {
                lo.collect_free(bound, out);
                hi.collect_free(bound, out);
                bound.push(var.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            Expr::Limit {
                var,
                seq,
                mvar,
                modulus,
            } => {
                bound.push(var.clone());
                seq.collect_free(bound, out);
                bound.pop();
                bound.push(mvar.clone());
                modulus.collect_free(bound, out);
                bound.pop();
            }
            Expr::Gated { k, .. } => k.collect_free(bound, out),
        }
    }

    /// Names of gates referenced by `gated(..)` nodes.
    pub fn gates_used(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Gated { gate, .. } = e {
                out.insert(gate.clone());
            }
        });
        out
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Int(_) | Expr::Var(_) | Expr::Pi => {}
            Expr::Neg(a) | Expr::Not(a) => a.visit(f),
            Expr::Bin(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::If(c, a, b) => {
                c.visit(f);
                a.visit(f);
                b.visit(f);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.visit(f)),
            Expr::Sum { lo, hi, body, .. } => {
                lo.visit(f);
                hi.visit(f);
                body.visit(f);
            }
            Expr::Limit { seq, modulus, .. } => {
                seq.visit(f);
                modulus.visit(f);
            }
            Expr::Gated { k, .. } => k.visit(f),
        }
    }

    /// Structural checks independent of scope: arities and binder names.
    pub fn check_shape(&self) -> Result<(), String> {
        let mut err = None;
        self.visit(&mut |e| {
            if err.is_some() {
                return;
            }
            match e {
                Expr::Call(func, args) => {
                    let (lo, hi) = func.arity();
                    if args.len() < lo || args.len() > hi {
                        err = Some(format!("{} takes {} arguments, got {}", func.name(), arity_text(lo, hi), args.len()));
                    }
                }
                Expr::Sum { var, .. } | Expr::Limit { var, .. } if RESERVED.contains(&var.as_str()) => {
                    err = Some(format!("reserved word {var:?} used as a bound variable"));
                }
                Expr::Limit { mvar, .. } if RESERVED.contains(&mvar.as_str()) => {
                    err = Some(format!("reserved word {mvar:?} used as a bound variable"));
                }
                _ => {}
            }
        });
        err.map_or(Ok(()), Err)
    }

    fn level(&self) -> u8 {
        match self {
            Expr::Bin(op, _, _) => op.level(),
            Expr::Neg(_) | Expr::Not(_) => 6,
            _ => 8,
        }
    }

    pub fn parse(text: &str) -> crate::error::Result<Expr> {
        let toks = lex(text)?;
        let mut p = Parser::new(&toks);
        let e = p.expr()?;
        p.expect_end()?;
        e.check_shape().map_err(crate::error::Error::Validation)?;
        Ok(e)
    }
}

fn arity_text(lo: usize, hi: usize) -> String {
    if lo == hi {
        lo.to_string()
    } else if hi == usize::MAX {
        format!("at least {lo}")
    } else {
        format!("{lo} to {hi}")
    }
}

fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Canonical text; `Expr::parse` of the output gives back the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Pi => write!(f, "pi"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                wrap(f, a, a.level() < 6)
            }
            Expr::Not(a) => {
                write!(f, "!")?;
                wrap(f, a, a.level() < 6)
            }
            Expr::Bin(op, a, b) => {
                let p = op.level();
                let (lp, rp) = match op {
                    BinOp::Pow => (a.level() < 8, b.level() < 6),
                    _ if p == 3 => (a.level() <= p, b.level() <= p),
                    _ => (a.level() < p, b.level() <= p),
                };
                wrap(f, a, lp)?;
                if *op == BinOp::Pow {
                    write!(f, "^")?;
                } else {
                    write!(f, " {} ", op.symbol())?;
                }
                wrap(f, b, rp)
            }
            Expr::If(c, a, b) => write!(f, "if({c}, {a}, {b})"),
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Expr::Sum { var, lo, hi, body } => write!(f, "sum({var}, {lo}, {hi}, {body})"),
            Expr::Limit {
                var,
                seq,
                mvar,
                modulus,
            } => write!(f, "limit({var}, {seq}, {mvar}, {modulus})"),
            Expr::Gated { gate, k } => write!(f, "gated({gate}, {k})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rt(s: &str) -> String {
        Expr::parse(s).unwrap().to_string()
    }

    #[test]
    fn canonical_printing() {
        assert_eq!(rt("(-1)^k/C"), "(-1)^k / C");
        assert_eq!(rt("a-(b-c)"), "a - (b - c)");
        assert_eq!(rt("(a-b)-c"), "a - b - c");
        assert_eq!(rt("2^(8*n)"), "2^(8 * n)");
        assert_eq!(rt("-(1/pi)*sum(j,1,N,1/(j-1/2))"), "-(1 / pi) * sum(j, 1, N, 1 / (j - 1 / 2))");
        assert_eq!(rt("2^3^2"), "2^3^2");
        assert_eq!(rt("(2^3)^2"), "(2^3)^2");
        assert_eq!(rt("-x^2"), "-x^2");
        assert_eq!(rt("(-x)^2"), "(-x)^2");
        assert_eq!(rt("k >= 1 && k <= N"), "k >= 1 && k <= N");
        assert_eq!(rt("(a < b) == (c < d)"), "(a < b) == (c < d)");
        assert_eq!(rt("if(k==0,1,-1/4)"), "if(k == 0, 1, -1 / 4)");
    }

    #[test]
    fn reparse_is_identity() {
        for s in [
            "(-1)^k / C",
            "-(1 / 4)",
            "2^-1",
            "table(k, -2, 1/2, 3, -7)",
            "limit(j, piq(j), M, M)",
            "gated(A, n) + 1",
            "!(k % 2 == 0) || k < -3",
        ] {
            let e = Expr::parse(s).unwrap();
            assert_eq!(Expr::parse(&e.to_string()).unwrap(), e, "{s}");
        }
    }

    #[test]
    fn free_variables() {
        let e = Expr::parse("sum(j, 1, n, j * k) + limit(i, i, M, M + q)").unwrap();
        let fv: Vec<_> = e.free_vars().into_iter().collect();
        assert_eq!(fv, vec!["k", "n", "q"]);
    }

    #[test]
    fn arity_is_checked() {
        assert!(Expr::parse("abs(1, 2)").is_err());
        assert!(Expr::parse("table(1, 2)").is_err());
    }

    #[test]
    fn rational_constructor() {
        let q = ExactRational::ratio(-3, 4).unwrap();
        assert_eq!(Expr::rational(&q).to_string(), "-(3 / 4)");
        assert_eq!(Expr::int(-5).to_string(), "-5");
    }
}
