use num_bigint::BigInt;

use super::lexer::{Tok, Token};
use super::{BinOp, Expr, Func, RESERVED};
use crate::error::{Error, Pos, Result};

/// Recursive-descent parser over a token slice; shared with the document parser.
pub struct Parser<'a> {
    toks: &'a [Token],
    i: usize,
}

impl<'a> Parser<'a> {
    pub fn new(toks: &'a [Token]) -> Self {
        Parser { toks, i: 0 }
    }

    pub fn pos(&self) -> Pos {
        match self.toks.get(self.i) {
            Some(t) => t.pos,
            None => self.toks.last().map_or(Pos { line: 1, col: 1 }, |t| Pos {
                line: t.pos.line,
                col: t.pos.col + 1,
            }),
        }
    }

    pub fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.tok)
    }

    pub fn at_end(&self) -> bool {
        self.i >= self.toks.len()
    }

    pub fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(x)) if *x == s)
    }

    pub fn at_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(x)) if x == s)
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected '{s}', found {}", self.describe()))
        }
    }

    pub fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.i += 1;
                Ok(s)
            }
            _ => self.err(format!("expected a name, found {}", self.describe())),
        }
    }

    pub fn expect_ident(&mut self, s: &str) -> Result<()> {
        if self.at_ident(s) {
            self.i += 1;
            Ok(())
        } else {
            self.err(format!("expected '{s}', found {}", self.describe()))
        }
    }

    pub fn integer(&mut self) -> Result<BigInt> {
        match self.peek() {
            Some(Tok::Int(v)) => {
                let v = v.clone();
                self.i += 1;
                Ok(v)
            }
            _ => self.err(format!("expected an integer, found {}", self.describe())),
        }
    }

    pub fn expect_end(&self) -> Result<()> {
        if self.at_end() {
            Ok(())
        } else {
            self.err(format!("unexpected {}", self.describe()))
        }
    }

    pub fn describe(&self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(Tok::Int(v)) => format!("integer {v}"),
            Some(Tok::Ident(s)) => format!("'{s}'"),
            Some(Tok::Sym(s)) => format!("'{s}'"),
        }
    }

    pub fn expr(&mut self) -> Result<Expr> {
        self.binary(1)
    }

    fn binop_at(&self, level: u8) -> Option<BinOp> {
        let s = match self.peek() {
            Some(Tok::Sym(s)) => *s,
            _ => return None,
        };
        let op = match s {
            "||" => BinOp::Or,
            "&&" => BinOp::And,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            "<" => BinOp::Lt,
            "<=" => BinOp::Le,
            ">" => BinOp::Gt,
            ">=" => BinOp::Ge,
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            "%" => BinOp::Rem,
            _ => return None,
        };
        (op.level() == level).then_some(op)
    }

    fn binary(&mut self, level: u8) -> Result<Expr> {
        if level > 5 {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        while let Some(op) = self.binop_at(level) {
            self.i += 1;
            let rhs = self.binary(level + 1)?;
            lhs = Expr::bin(op, lhs, rhs);
            if level == 3 {
                if self.binop_at(3).is_some() {
                    return self.err("comparisons do not chain; add parentheses");
                }
                break;
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat_sym("-") {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat_sym("!") {
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        let base = self.primary()?;
        if self.eat_sym("^") {
            let e = self.unary()?;
            return Ok(Expr::bin(BinOp::Pow, base, e));
        }
        Ok(base)
    }

    fn binder(&mut self) -> Result<String> {
        let v = self.ident()?;
        if RESERVED.contains(&v.as_str()) {
            return self.err(format!("reserved word '{v}' cannot be bound"));
        }
        Ok(v)
    }

    fn primary(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.i += 1;
                Ok(Expr::Int(v))
            }
            Some(Tok::Sym("(")) => {
                self.i += 1;
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.i += 1;
                match name.as_str() {
                    "pi" => Ok(Expr::Pi),
                    "if" => {
                        self.expect_sym("(")?;
                        let c = self.expr()?;
                        self.expect_sym(",")?;
                        let a = self.expr()?;
                        self.expect_sym(",")?;
                        let b = self.expr()?;
                        self.expect_sym(")")?;
                        Ok(Expr::If(Box::new(c), Box::new(a), Box::new(b)))
                    }
                    "sum" => {
                        self.expect_sym("(")?;
                        let var = self.binder()?;
                        self.expect_sym(",")?;
                        let lo = self.expr()?;
                        self.expect_sym(",")?;
                        let hi = self.expr()?;
                        self.expect_sym(",")?;
                        let body = self.expr()?;
                        self.expect_sym(")")?;
                        Ok(Expr::Sum {
                            var,
                            lo: Box::new(lo),
                            hi: Box::new(hi),
                            body: Box::new(body),
                        })
                    }
                    "limit" => {
                        self.expect_sym("(")?;
                        let var = self.binder()?;
                        self.expect_sym(",")?;
                        let seq = self.expr()?;
                        self.expect_sym(",")?;
                        let mvar = self.binder()?;
                        self.expect_sym(",")?;
                        let modulus = self.expr()?;
                        self.expect_sym(")")?;
                        Ok(Expr::Limit {
                            var,
                            seq: Box::new(seq),
                            mvar,
                            modulus: Box::new(modulus),
                        })
                    }
                    "gated" => {
                        self.expect_sym("(")?;
                        let gate = self.ident()?;
                        self.expect_sym(",")?;
                        let k = self.expr()?;
                        self.expect_sym(")")?;
                        Ok(Expr::Gated {
                            gate,
                            k: Box::new(k),
                        })
                    }
                    _ => {
                        if let Some(func) = Func::from_name(&name) {
                            self.expect_sym("(")?;
                            let mut args = vec![self.expr()?];
                            while self.eat_sym(",") {
                                args.push(self.expr()?);
                            }
                            self.expect_sym(")")?;
                            Ok(Expr::Call(func, args))
                        } else if RESERVED.contains(&name.as_str()) {
                            Err(Error::Syntax {
                                pos,
                                msg: format!("unexpected keyword '{name}'"),
                            })
                        } else {
                            Ok(Expr::Var(name))
                        }
                    }
                }
            }
            _ => self.err(format!("expected an expression, found {}", self.describe())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let e = Expr::parse("1 + 2 * 3 ^ 2").unwrap();
        match e {
            Expr::Bin(BinOp::Add, _, r) => assert!(matches!(*r, Expr::Bin(BinOp::Mul, _, _))),
            _ => panic!(),
        }
        let e = Expr::parse("-2^2").unwrap();
        assert!(matches!(e, Expr::Neg(_)));
    }

    #[test]
    fn errors_carry_positions() {
        match Expr::parse("1 +\n  * 2") {
            Err(Error::Syntax { pos, .. }) => assert_eq!(pos, Pos { line: 2, col: 3 }),
            other => panic!("{other:?}"),
        }
        assert!(Expr::parse("a < b < c").is_err());
        assert!(Expr::parse("sum(pi, 1, 2, 3)").is_err());
        assert!(Expr::parse("(1").is_err());
        assert!(Expr::parse("").is_err());
    }
}
