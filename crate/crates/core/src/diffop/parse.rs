//! Parser for operator expressions in `t` and `D` (the Euler operator).
//!
//! Accepts the canonical sum of `c*t^i*D^j` terms as well as factored forms
//! such as `D^3 - t*(2*D+1)*(17*D^2+17*D+5)`; products are composed in the
//! order written.

use rug::{Integer, Rational};

use super::DiffOperator;
use crate::error::{Error, Result};

pub(super) fn parse_operator(text: &str) -> Result<DiffOperator> {
    let mut p = Parser {
        s: text.chars().filter(|c| !c.is_whitespace()).collect(),
        pos: 0,
    };
    if p.s.is_empty() {
        return Err(Error::parse(0, "empty operator"));
    }
    let op = p.expr()?;
    if p.pos != p.s.len() {
        return Err(Error::parse(0, format!("unexpected '{}' in operator", p.s[p.pos])));
    }
    Ok(op)
}

struct Parser {
    s: Vec<char>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.s.get(self.pos).copied()
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::parse(0, format!("{msg} at position {}", self.pos)))
    }

    fn expr(&mut self) -> Result<DiffOperator> {
        let mut neg = false;
        match self.peek() {
            Some('-') => {
                neg = true;
                self.pos += 1;
            }
            Some('+') => self.pos += 1,
            _ => {}
        }
        let mut acc = self.term()?;
        if neg {
            acc = acc.scale(&Rational::from(-1));
        }
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let t = self.term()?;
            acc = if c == '+' { acc.add(&t) } else { acc.sub(&t) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<DiffOperator> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    let f = self.power()?;
                    acc = acc.compose(&f);
                }
                Some('(') | Some('t') | Some('D') => {
                    let f = self.power()?;
                    acc = acc.compose(&f);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<DiffOperator> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let k = self.natural()?;
            let k = u32::try_from(k).map_err(|_| Error::parse(0, "exponent too large"))?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn natural(&mut self) -> Result<Integer> {
        let start = self.pos;
        while self.peek().map_or(false, |c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a number");
        }
        Ok(self.s[start..self.pos].iter().collect::<String>().parse().unwrap())
    }

    fn atom(&mut self) -> Result<DiffOperator> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(e)
            }
            Some('t') => {
                self.pos += 1;
                Ok(DiffOperator::t())
            }
            Some('D') => {
                self.pos += 1;
                Ok(DiffOperator::delta())
            }
            Some(c) if c.is_ascii_digit() => {
                let num = self.natural()?;
                // a rational literal p/q binds tighter than composition
                if self.peek() == Some('/') {
                    self.pos += 1;
                    let den = self.natural()?;
                    if den == 0 {
                        return self.err("zero denominator");
                    }
                    return Ok(DiffOperator::constant(Rational::from((num, den))));
                }
                Ok(DiffOperator::constant(num))
            }
            _ => self.err("unexpected token"),
        }
    }
}
