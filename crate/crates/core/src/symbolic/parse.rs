//! Parser for the expression grammar used in model files and reports.
//!
//! Grammar: rational numbers, parameter names, envelope-function names with
//! derivative ticks (`g`, `g'`, `g''`), `+`, `-`, `*`, `^` with a nonnegative
//! integer exponent, parentheses, and the imaginary unit `i`. Division is
//! allowed only by constant subexpressions so everything stays inside the
//! Gaussian-rational ring. `hbar` is accepted as a reserved word equal to 1,
//! so printed reports (which restore explicit hbar factors) re-parse.

use super::{Atom, EnvelopeExpr};
use crate::error::{Error, Result};
use crate::scalar::GaussRational;
use std::collections::BTreeSet;

/// Declares which identifiers are parameters and which are envelope
/// functions, so the parser can classify atoms.
#[derive(Clone, Debug, Default)]
pub struct AtomContext {
    pub params: BTreeSet<String>,
    pub envelopes: BTreeSet<String>,
}

impl AtomContext {
    pub fn new<P, E>(params: P, envelopes: E) -> Self
    where
        P: IntoIterator<Item = String>,
        E: IntoIterator<Item = String>,
    {
        Self {
            params: params.into_iter().collect(),
            envelopes: envelopes.into_iter().collect(),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    ctx: &'a AtomContext,
}

pub fn parse_expr(input: &str, ctx: &AtomContext) -> Result<EnvelopeExpr> {
    let mut p = Parser {
        src: input.as_bytes(),
        pos: 0,
        ctx,
    };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        let consumed = &self.src[..self.pos];
        let line = consumed.iter().filter(|&&b| b == b'\n').count() + 1;
        let col = self.pos - consumed.iter().rposition(|&b| b == b'\n').map_or(0, |p| p + 1) + 1;
        Error::Parse {
            line,
            col,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<EnvelopeExpr> {
        let mut acc = self.term()?;
        loop {
            self.skip_ws();
            if self.eat(b'+') {
                self.skip_ws();
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                self.skip_ws();
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<EnvelopeExpr> {
        let mut acc = self.factor()?;
        loop {
            self.skip_ws();
            if self.eat(b'*') {
                self.skip_ws();
                acc = acc.mul(&self.factor()?);
            } else if self.eat(b'/') {
                self.skip_ws();
                let divisor = self.factor()?;
                if !divisor.is_constant() {
                    return Err(self.err("division is only allowed by constants"));
                }
                let c = divisor.constant_part();
                if c.is_zero() {
                    return Err(self.err("division by zero"));
                }
                acc = acc.scale(&c.inv());
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<EnvelopeExpr> {
        let base = self.base()?;
        self.skip_ws();
        if self.eat(b'^') {
            self.skip_ws();
            let n = self.integer()?;
            if n < 0 {
                return Err(self.err("negative exponent"));
            }
            return Ok(base.pow(n as u32));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<EnvelopeExpr> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.skip_ws();
                if !self.eat(b')') {
                    return Err(self.err("expected `)`"));
                }
                Ok(e)
            }
            Some(b'-') => {
                self.pos += 1;
                Ok(self.factor()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.factor()
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(EnvelopeExpr::from_int(n))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            _ => Err(self.err("expected a number, name, or `(`")),
        }
    }

    fn integer(&mut self) -> Result<i64> {
        let start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected an integer"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse::<i64>()
            .map_err(|_| self.err("integer out of range"))
    }

    fn identifier(&mut self) -> Result<EnvelopeExpr> {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|b| b.is_ascii_alphanumeric() || b == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if name == "i" {
            return Ok(EnvelopeExpr::constant(GaussRational::i()));
        }
        if name == "hbar" {
            return Ok(EnvelopeExpr::one());
        }
        let mut ticks = 0u32;
        while self.eat(b'\'') {
            ticks += 1;
        }
        if self.ctx.envelopes.contains(name) {
            return Ok(EnvelopeExpr::atom(Atom::envelope(name, ticks)));
        }
        if ticks > 0 {
            return Err(self.err(&format!("`{name}` is not an envelope function")));
        }
        if self.ctx.params.contains(name) {
            return Ok(EnvelopeExpr::atom(Atom::param(name)));
        }
        Err(self.err(&format!("unknown name `{name}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::print_expr;

    fn ctx() -> AtomContext {
        AtomContext::new(
            ["Delta".to_string(), "cosphi".to_string()],
            ["g".to_string()],
        )
    }

    #[test]
    fn parses_rational_and_params() {
        let e = parse_expr("Delta/2 + 3/16*g*g", &ctx()).unwrap();
        let expected = EnvelopeExpr::param("Delta")
            .scale(&GaussRational::from_ratio(1, 2))
            .add(
                &EnvelopeExpr::envelope("g", 0)
                    .pow(2)
                    .scale(&GaussRational::from_ratio(3, 16)),
            );
        assert_eq!(e, expected);
    }

    #[test]
    fn parses_ticks_powers_imaginary() {
        let e = parse_expr("-1/4*i*g''^2 * cosphi", &ctx()).unwrap();
        let expected = EnvelopeExpr::envelope("g", 2)
            .pow(2)
            .mul(&EnvelopeExpr::param("cosphi"))
            .scale(&GaussRational::from_parts((0, 1), (-1, 4)));
        assert_eq!(e, expected);
    }

    #[test]
    fn rejects_unknown_and_bad_division() {
        assert!(parse_expr("nosuch", &ctx()).is_err());
        assert!(parse_expr("1/g", &ctx()).is_err());
        assert!(parse_expr("Delta'", &ctx()).is_err());
        let err = parse_expr("Delta +\n 2*)", &ctx()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn print_parse_round_trip() {
        let src = "(1/2+1/3*i)*g'*g + Delta^2 - 2*cosphi";
        let e = parse_expr(src, &ctx()).unwrap();
        let printed = print_expr(&e);
        let back = parse_expr(&printed, &ctx()).unwrap();
        assert_eq!(e, back, "printed form `{printed}` did not round-trip");
    }
}
