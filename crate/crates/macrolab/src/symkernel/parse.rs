// SPDX-License-Identifier: Apache-2.0

//! Recursive-descent reader for polynomial expressions.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := atom ('^' integer)?
//! atom   := integer | 'I' | symbol | '(' expr ')' | '-' factor
//! ```
//!
//! Division is allowed only by nonzero constants. Symbols are the ASCII names
//! of [`Sym`]; `I` is the imaginary unit.

use super::gauss::GaussRational;
use super::poly::{Sym, SymExpr};
use crate::error::{MacrolabError, Result};
use num::BigInt;

/// Parses an expression such as `-8*n1*l^2*(tau - I*l) - L1*l^2`.
pub fn parse_expr(src: &str) -> Result<SymExpr> {
    let mut p = Parser { s: src.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.s.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> MacrolabError {
        MacrolabError::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<SymExpr> {
        let mut acc = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                -self.term()?
            }
            Some(b'+') => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<SymExpr> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = &acc * &self.factor()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let d = self.factor()?;
                    let c = match d.leading() {
                        Some((m, c)) if d.len() == 1 && m.degree() == 0 => c.clone(),
                        _ => return Err(self.err("division only by nonzero constants")),
                    };
                    acc = acc.scale(&c.inv().ok_or_else(|| self.err("division by zero"))?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<SymExpr> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let e = self.integer()?;
            let e: u32 = e.try_into().map_err(|_| self.err("exponent too large"))?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<BigInt> {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected an integer"));
        }
        let txt = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii digits");
        txt.parse::<BigInt>().map_err(|_| self.err("bad integer"))
    }

    fn atom(&mut self) -> Result<SymExpr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.factor()?)
            }
            Some(c) if c.is_ascii_digit() => {
                let k = self.integer()?;
                Ok(SymExpr::constant(GaussRational::new(
                    num::BigRational::from_integer(k),
                    num::BigRational::from_integer(BigInt::from(0)),
                )))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
                if name == "I" {
                    return Ok(SymExpr::i());
                }
                Sym::from_name(name).map(SymExpr::var).ok_or_else(|| MacrolabError::Parse {
                    pos: start,
                    msg: format!("unknown symbol `{}`", name),
                })
            }
            _ => Err(self.err("expected an operand")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symkernel::poly::v;

    #[test]
    fn parses_display_output() {
        let e = parse_expr("-8*n1*l^2*(tau - I*l) - L1*l^2 + 1/2").unwrap();
        let back = parse_expr(&e.to_string()).unwrap();
        assert_eq!(e, back);
    }

    #[test]
    fn precedence() {
        let e = parse_expr("2*tau^2 - -tau").unwrap();
        let expect = &v(Sym::Tau).pow(2).scale(&GaussRational::from_int(2)) + &v(Sym::Tau);
        assert_eq!(e, expect);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_expr("tau +").is_err());
        assert!(parse_expr("foo").is_err());
        assert!(parse_expr("tau/l").is_err());
        assert!(parse_expr("(tau").is_err());
    }
}
