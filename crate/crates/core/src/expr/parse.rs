//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := factor (("*" | "/") factor)*
//! factor := "-" factor | power
//! power  := atom ("^" exponent)?
//! atom   := NUMBER | "x" | NAME "(" expr ")" | "(" expr ")"
//! ```
//!
//! Exponents are exact rationals: `2`, `-1`, `0.5`, `1/2`, `(-3/2)`, or a
//! right-nested integer power of those.

use std::collections::BTreeSet;

use num_rational::Ratio;
use num_traits::{Signed, Zero};

use super::{Expr, Func};
use crate::error::{Error, Result};

/// Parse a single-variable expression.
pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, furthest: 0, expected: BTreeSet::new() };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        p.expect_fail("end of input");
        return Err(p.error());
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    furthest: usize,
    expected: BTreeSet<String>,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn expect_fail(&mut self, what: &str) {
        if self.pos > self.furthest {
            self.furthest = self.pos;
            self.expected.clear();
        }
        if self.pos == self.furthest {
            self.expected.insert(what.to_string());
        }
    }

    fn error(&self) -> Error {
        Error::Syntax { offset: self.furthest, expected: self.expected.iter().cloned().collect() }
    }

    /// Consume `c` if it is next; otherwise record it as expected here.
    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            self.expect_fail(&(c as char).to_string());
            false
        }
    }

    fn require(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error())
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::add(lhs, self.term()?);
            } else if self.eat(b'-') {
                lhs = Expr::sub(lhs, self.term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::mul(lhs, self.factor()?);
            } else if self.eat(b'/') {
                lhs = Expr::div(lhs, self.factor()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::neg(self.factor()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let q = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), q));
        }
        Ok(base)
    }

    /// `["-"] (NUMBER ["/" NUMBER] | "(" exponent ")") ["^" exponent]`
    fn exponent(&mut self) -> Result<Ratio<i64>> {
        if self.eat(b'-') {
            return Ok(-self.exponent()?);
        }
        let base = if self.eat(b'(') {
            let q = self.exponent()?;
            self.require(b')')?;
            q
        } else {
            self.skip_ws();
            let num = self.rational_literal()?;
            if self.fraction_bar() {
                let den_at = self.pos;
                let den = self.rational_literal()?;
                if den.is_zero() {
                    self.pos = den_at;
                    self.skip_ws();
                    self.expect_fail("non-zero denominator");
                    return Err(self.error());
                }
                num / den
            } else {
                num
            }
        };
        if self.eat(b'^') {
            let at = self.pos;
            let e = self.exponent()?;
            if !e.is_integer() || e.numer().abs() > 64 || (base.is_zero() && e.is_negative()) {
                self.pos = at;
                self.expect_fail("integer exponent of a rational exponent");
                return Err(self.error());
            }
            return Ok(base.pow(*e.numer() as i32));
        }
        Ok(base)
    }

    /// A `/` directly followed by a number continues a rational exponent;
    /// any other `/` is left for the enclosing division.
    fn fraction_bar(&mut self) -> bool {
        let at = self.pos;
        if self.eat(b'/') {
            self.skip_ws();
            if matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'.') {
                return true;
            }
        }
        self.pos = at;
        false
    }

    /// Scan a numeric literal; returns its text span.
    fn number_span(&mut self) -> Option<(usize, usize)> {
        self.skip_ws();
        let start = self.pos;
        let s = self.src;
        let mut i = self.pos;
        let digits = |i: &mut usize| {
            let b = *i;
            while *i < s.len() && s[*i].is_ascii_digit() {
                *i += 1;
            }
            *i - b
        };
        let int = digits(&mut i);
        let mut frac = 0;
        if i < s.len() && s[i] == b'.' {
            let mut j = i + 1;
            frac = digits(&mut j);
            if int + frac > 0 {
                i = j;
            }
        }
        if int + frac == 0 {
            self.expect_fail("number");
            return None;
        }
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut j = i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            if digits(&mut j) > 0 {
                i = j;
            }
        }
        self.pos = i;
        Some((start, i))
    }

    fn rational_literal(&mut self) -> Result<Ratio<i64>> {
        let (a, b) = self.number_span().ok_or_else(|| self.error())?;
        let text = std::str::from_utf8(&self.src[a..b]).expect("ascii literal");
        exact_ratio(text).ok_or_else(|| {
            self.pos = a;
            self.expect_fail("exponent representable as a ratio of 64-bit integers");
            self.error()
        })
    }

    fn atom(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let (a, b) = self.number_span().ok_or_else(|| self.error())?;
                let text = std::str::from_utf8(&self.src[a..b]).expect("ascii literal");
                let v: f64 = text.parse().map_err(|_| self.error())?;
                Ok(Expr::Const(v))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let mut i = self.pos;
                while i < self.src.len() && (self.src[i].is_ascii_alphanumeric() || self.src[i] == b'_') {
                    i += 1;
                }
                let name = std::str::from_utf8(&self.src[self.pos..i]).expect("ascii name");
                if name == "x" {
                    self.pos = i;
                    return Ok(Expr::Var);
                }
                match Func::from_name(name) {
                    Some(f) => {
                        self.pos = i;
                        self.require(b'(')?;
                        let arg = self.expr()?;
                        self.require(b')')?;
                        Ok(Expr::call(f, arg))
                    }
                    None => {
                        self.pos = start;
                        self.expect_fail("x");
                        self.expect_fail("function name");
                        Err(self.error())
                    }
                }
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.require(b')')?;
                Ok(e)
            }
            _ => {
                for what in ["number", "x", "function name", "("] {
                    self.expect_fail(what);
                }
                Err(self.error())
            }
        }
    }
}

/// Exact value of a decimal literal such as `2`, `0.25` or `1.5e-1`.
fn exact_ratio(text: &str) -> Option<Ratio<i64>> {
    let (mant, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (int, frac) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    let digits = format!("{int}{frac}");
    let digits = digits.trim_start_matches('0');
    let n: i64 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    let scale = exp - frac.len() as i32;
    let ten = |k: u32| 10i64.checked_pow(k);
    let q = if scale >= 0 {
        Ratio::from_integer(n.checked_mul(ten(scale as u32)?)?)
    } else {
        Ratio::new(n, ten(scale.unsigned_abs())?)
    };
    Some(q)
}
