//! Elements a + b√D of a quadratic field (or of ℚ when b = 0).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::numerics::real::{BigComplex, Provenance};

/// `a + b√d` with `d` square-free; rationals use `d = 1, b = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlgebraicNumber {
    a: Rational,
    b: Rational,
    d: Integer,
}

/// Writes n = f²·s with s square-free; returns (f, s).
fn squarefree_part(n: &Integer) -> (Integer, Integer) {
    if *n == 0 {
        return (Integer::new(), Integer::new());
    }
    let sign = if *n < 0 { -1 } else { 1 };
    let mut m = Integer::from(n.abs_ref());
    let mut f = Integer::from(1);
    let mut s = Integer::from(1);
    let mut p = Integer::from(2);
    while Integer::from(&p * &p) <= m {
        let mut e = 0u32;
        while m.is_divisible(&p) {
            m /= &p;
            e += 1;
        }
        for _ in 0..e / 2 {
            f *= &p;
        }
        if e % 2 == 1 {
            s *= &p;
        }
        p += 1;
    }
    s *= m;
    (f, s * sign)
}

impl AlgebraicNumber {
    pub fn new(a: Rational, b: Rational, d: Integer) -> Self {
        if b == 0 || d == 1 || d == 0 {
            let a = if d == 1 { a + b } else { a };
            return AlgebraicNumber {
                a,
                b: Rational::new(),
                d: Integer::from(1),
            };
        }
        let (f, s) = squarefree_part(&d);
        if s == 1 {
            return AlgebraicNumber::rational(a + b * f);
        }
        AlgebraicNumber { a, b: b * f, d: s }
    }

    pub fn rational(a: impl Into<Rational>) -> Self {
        AlgebraicNumber {
            a: a.into(),
            b: Rational::new(),
            d: Integer::from(1),
        }
    }

    /// √n
    pub fn sqrt(n: impl Into<Integer>) -> Self {
        AlgebraicNumber::new(Rational::new(), Rational::from(1), n.into())
    }

    pub fn zero() -> Self {
        Self::rational(0)
    }

    pub fn one() -> Self {
        Self::rational(1)
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn d(&self) -> &Integer {
        &self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b == 0
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        if self.is_rational() {
            Some(&self.a)
        } else {
            None
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn is_real(&self) -> bool {
        self.b == 0 || self.d > 0
    }

    pub fn conjugate(&self) -> Self {
        AlgebraicNumber {
            a: self.a.clone(),
            b: Rational::from(-&self.b),
            d: self.d.clone(),
        }
    }

    /// Field norm a² − d b².
    pub fn norm(&self) -> Rational {
        Rational::from(self.a.square_ref()) - Rational::from(self.b.square_ref()) * &self.d
    }

    fn common_d(&self, other: &Self) -> Result<Integer> {
        match (self.is_rational(), other.is_rational()) {
            (true, true) => Ok(Integer::from(1)),
            (true, false) => Ok(other.d.clone()),
            (false, true) => Ok(self.d.clone()),
            (false, false) if self.d == other.d => Ok(self.d.clone()),
            _ => Err(Error::domain(format!(
                "numbers from different quadratic fields (√{} and √{})",
                self.d, other.d
            ))),
        }
    }

    pub fn try_add(&self, o: &Self) -> Result<Self> {
        let d = self.common_d(o)?;
        Ok(Self::new(
            Rational::from(&self.a + &o.a),
            Rational::from(&self.b + &o.b),
            d,
        ))
    }

    pub fn try_sub(&self, o: &Self) -> Result<Self> {
        self.try_add(&-o)
    }

    pub fn try_mul(&self, o: &Self) -> Result<Self> {
        let d = self.common_d(o)?;
        let a = Rational::from(&self.a * &o.a) + Rational::from(&self.b * &o.b) * &d;
        let b = Rational::from(&self.a * &o.b) + Rational::from(&self.b * &o.a);
        Ok(Self::new(a, b, d))
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::domain("division by zero"));
        }
        let n = self.norm();
        let c = self.conjugate();
        Ok(Self::new(
            Rational::from(&c.a / &n),
            Rational::from(&c.b / &n),
            c.d,
        ))
    }

    pub fn try_div(&self, o: &Self) -> Result<Self> {
        self.try_mul(&o.recip()?)
    }

    pub fn scale(&self, q: &Rational) -> Self {
        Self::new(
            Rational::from(&self.a * q),
            Rational::from(&self.b * q),
            self.d.clone(),
        )
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Complex embedding with the principal square root.
    pub fn to_complex(&self, prec: u32) -> BigComplex {
        let a = Float::with_val(prec, &self.a);
        if self.is_rational() {
            return BigComplex::new(a, Float::new(prec), Provenance::ExactCast);
        }
        let root = Float::with_val(prec, Integer::from(self.d.abs_ref())).sqrt();
        let bv = Float::with_val(prec, &self.b) * root;
        if self.d > 0 {
            BigComplex::new(a + bv, Float::new(prec), Provenance::ExactCast)
        } else {
            BigComplex::new(a, bv, Provenance::ExactCast)
        }
    }

    pub fn modulus(&self, prec: u32) -> Float {
        self.to_complex(prec).abs()
    }

    /// Parses forms such as `-11/8 + 5/8*sqrt(5)`, `1/sqrt(-3)`, `9*sqrt(-3)`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = AlgParser {
            s: text.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
        };
        let v = p.expr()?;
        if p.pos != p.s.len() {
            return Err(Error::parse(0, format!("trailing input in '{text}'")));
        }
        Ok(v)
    }

    /// Orders by complex embedding (real part, then imaginary part).
    pub fn embedding_cmp(&self, other: &Self) -> Ordering {
        let x = self.to_complex(128);
        let y = other.to_complex(128);
        x.re.partial_cmp(&y.re)
            .unwrap_or(Ordering::Equal)
            .then(x.im.partial_cmp(&y.im).unwrap_or(Ordering::Equal))
    }
}

impl fmt::Display for AlgebraicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", self.a);
        }
        let root = format!("sqrt({})", self.d);
        let babs = Rational::from(self.b.abs_ref());
        let bpart = if babs == 1 {
            root
        } else {
            format!("{babs}*{root}")
        };
        if self.a == 0 {
            if self.b < 0 {
                write!(f, "-{bpart}")
            } else {
                write!(f, "{bpart}")
            }
        } else {
            let sign = if self.b < 0 { "-" } else { "+" };
            write!(f, "{} {sign} {bpart}", self.a)
        }
    }
}

impl Add for &AlgebraicNumber {
    type Output = AlgebraicNumber;
    fn add(self, o: &AlgebraicNumber) -> AlgebraicNumber {
        self.try_add(o).expect("same quadratic field")
    }
}

impl Sub for &AlgebraicNumber {
    type Output = AlgebraicNumber;
    fn sub(self, o: &AlgebraicNumber) -> AlgebraicNumber {
        self.try_sub(o).expect("same quadratic field")
    }
}

impl Mul for &AlgebraicNumber {
    type Output = AlgebraicNumber;
    fn mul(self, o: &AlgebraicNumber) -> AlgebraicNumber {
        self.try_mul(o).expect("same quadratic field")
    }
}

impl Div for &AlgebraicNumber {
    type Output = AlgebraicNumber;
    fn div(self, o: &AlgebraicNumber) -> AlgebraicNumber {
        self.try_div(o).expect("nonzero divisor in the same field")
    }
}

impl Neg for &AlgebraicNumber {
    type Output = AlgebraicNumber;
    fn neg(self) -> AlgebraicNumber {
        self.scale(&Rational::from(-1))
    }
}

struct AlgParser {
    s: Vec<char>,
    pos: usize,
}

impl AlgParser {
    fn peek(&self) -> Option<char> {
        self.s.get(self.pos).copied()
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::parse(0, format!("{msg} at position {}", self.pos)))
    }

    fn expr(&mut self) -> Result<AlgebraicNumber> {
        let mut neg = false;
        if self.peek() == Some('-') {
            neg = true;
            self.pos += 1;
        } else if self.peek() == Some('+') {
            self.pos += 1;
        }
        let mut acc = self.term()?;
        if neg {
            acc = -&acc;
        }
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let t = self.term()?;
            acc = if c == '+' { acc.try_add(&t)? } else { acc.try_sub(&t)? };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<AlgebraicNumber> {
        let mut acc = self.atom()?;
        while let Some(c @ ('*' | '/')) = self.peek() {
            self.pos += 1;
            let f = self.atom()?;
            acc = if c == '*' { acc.try_mul(&f)? } else { acc.try_div(&f)? };
        }
        Ok(acc)
    }

    fn integer(&mut self) -> Result<Integer> {
        let neg = if self.peek() == Some('-') {
            self.pos += 1;
            true
        } else {
            false
        };
        let start = self.pos;
        while self.peek().map_or(false, |c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected integer");
        }
        let v: Integer = self.s[start..self.pos].iter().collect::<String>().parse().unwrap();
        Ok(if neg { -v } else { v })
    }

    fn atom(&mut self) -> Result<AlgebraicNumber> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => Ok(AlgebraicNumber::rational(self.integer()?)),
            Some('s') => {
                let word: String = self.s[self.pos..].iter().take(5).collect();
                if word != "sqrt(" {
                    return self.err("expected sqrt(");
                }
                self.pos += 5;
                let n = self.integer()?;
                if self.peek() != Some(')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(AlgebraicNumber::sqrt(n))
            }
            _ => self.err("unexpected token"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_forms() {
        let x = AlgebraicNumber::new(Rational::from(1), Rational::from(1), Integer::from(8));
        assert_eq!(x.d(), &Integer::from(2));
        assert_eq!(x.b(), &Rational::from(2));
        let y = AlgebraicNumber::new(Rational::from(1), Rational::new(), Integer::from(5));
        assert_eq!(y.d(), &Integer::from(1));
        assert_eq!(AlgebraicNumber::sqrt(9), AlgebraicNumber::rational(3));
    }

    #[test]
    fn arithmetic() {
        let s5 = AlgebraicNumber::sqrt(5);
        assert_eq!(&s5 * &s5, AlgebraicNumber::rational(5));
        let sigma = AlgebraicNumber::parse("-11/8 + 5/8*sqrt(5)").unwrap();
        // 16σ² + 44σ − 1 = 0
        let v = &(&(&sigma * &sigma).scale(&Rational::from(16)) + &sigma.scale(&Rational::from(44)))
            - &AlgebraicNumber::one();
        assert!(v.is_zero());
        let r = AlgebraicNumber::parse("1/sqrt(-3)").unwrap();
        assert_eq!(r, AlgebraicNumber::new(Rational::new(), Rational::from((-1, 3)), Integer::from(-3)));
        assert!(AlgebraicNumber::sqrt(2).try_add(&AlgebraicNumber::sqrt(3)).is_err());
    }

    #[test]
    fn display_parse_round_trip() {
        for s in ["-11/8 + 5/8*sqrt(5)", "9*sqrt(-3)", "17 - 12*sqrt(2)", "1/2", "-sqrt(3)"] {
            let v = AlgebraicNumber::parse(s).unwrap();
            assert_eq!(v.to_string(), s);
            assert_eq!(AlgebraicNumber::parse(&v.to_string()).unwrap(), v);
        }
    }

    #[test]
    fn embedding() {
        let k = AlgebraicNumber::parse("9*sqrt(-3)").unwrap();
        let c = k.to_complex(128);
        assert!(c.re.is_zero());
        assert!((c.im.to_f64() - 9.0 * 3f64.sqrt()).abs() < 1e-12);
    }
}
