//! Dense univariate polynomials over ℚ.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};

/// Coefficients stored from the constant term upward, with no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Default, Hash)]
pub struct QPoly {
    c: Vec<Rational>,
}

impl QPoly {
    pub fn new(mut c: Vec<Rational>) -> Self {
        while c.last().map_or(false, |x| *x == 0) {
            c.pop();
        }
        QPoly { c }
    }

    pub fn zero() -> Self {
        QPoly { c: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::from(1))
    }

    pub fn constant(c: impl Into<Rational>) -> Self {
        Self::new(vec![c.into()])
    }

    /// The variable T.
    pub fn x() -> Self {
        Self::monomial(1, Rational::from(1))
    }

    pub fn monomial(k: usize, c: impl Into<Rational>) -> Self {
        let mut v = vec![Rational::new(); k + 1];
        v[k] = c.into();
        Self::new(v)
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| Rational::from(x)).collect())
    }

    /// T(T-1)...(T-k+1)
    pub fn falling(k: usize) -> Self {
        (0..k).fold(Self::one(), |acc, i| {
            &acc * &Self::new(vec![Rational::from(-(i as i64)), Rational::from(1)])
        })
    }

    /// (T+1)(T+2)...(T+k)
    pub fn rising_from_one(k: usize) -> Self {
        (1..=k).fold(Self::one(), |acc, i| {
            &acc * &Self::new(vec![Rational::from(i as i64), Rational::from(1)])
        })
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.c.is_empty() {
            None
        } else {
            Some(self.c.len() - 1)
        }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.c
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.c.get(i).cloned().unwrap_or_default()
    }

    pub fn leading(&self) -> Rational {
        self.c.last().cloned().unwrap_or_default()
    }

    pub fn scale(&self, s: &Rational) -> Self {
        Self::new(self.c.iter().map(|x| Rational::from(x * s)).collect())
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.c.iter().rev() {
            acc *= t;
            acc += c;
        }
        acc
    }

    pub fn eval_i64(&self, t: i64) -> Rational {
        self.eval(&Rational::from(t))
    }

    pub fn eval_float(&self, t: &Float) -> Float {
        let mut acc = Float::new(t.prec());
        for c in self.c.iter().rev() {
            acc *= t;
            acc += c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, x)| Rational::from(x * i as u32))
                .collect(),
        )
    }

    /// P(T + s)
    pub fn shift(&self, s: &Rational) -> Self {
        let lin = Self::new(vec![s.clone(), Rational::from(1)]);
        let mut acc = Self::zero();
        for c in self.c.iter().rev() {
            acc = &(&acc * &lin) + &Self::constant(c.clone());
        }
        acc
    }

    /// P(a·T)
    pub fn scale_var(&self, a: &Rational) -> Self {
        let mut pow = Rational::from(1);
        let mut out = Vec::with_capacity(self.c.len());
        for c in &self.c {
            out.push(Rational::from(c * &pow));
            pow *= a;
        }
        Self::new(out)
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&Rational::from(self.leading().recip_ref()))
    }

    pub fn div_rem(&self, d: &Self) -> Result<(Self, Self)> {
        if d.is_zero() {
            return Err(Error::domain("polynomial division by zero"));
        }
        let dd = d.degree().unwrap();
        let lead_inv = Rational::from(d.leading().recip_ref());
        let mut r = self.c.clone();
        if r.len() <= dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut q = vec![Rational::new(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let coef = Rational::from(&r[i + dd] * &lead_inv);
            if coef != 0 {
                for (j, dc) in d.c.iter().enumerate() {
                    r[i + j] -= Rational::from(&coef * dc);
                }
            }
            q[i] = coef;
        }
        r.truncate(dd);
        Ok((Self::new(q), Self::new(r)))
    }

    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("nonzero divisor");
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Yun's square-free decomposition: pairs (factor, multiplicity), factors monic.
    pub fn squarefree_decomposition(&self) -> Vec<(QPoly, usize)> {
        let mut out = Vec::new();
        if self.degree().map_or(true, |d| d == 0) {
            return out;
        }
        let f = self.monic();
        let fp = f.derivative();
        let a = f.gcd(&fp);
        let mut b = f.div_rem(&a).unwrap().0;
        let mut c = fp.div_rem(&a).unwrap().0;
        let mut d = &c - &b.derivative();
        let mut i = 1;
        loop {
            let g = b.gcd(&d);
            if g.degree().unwrap_or(0) > 0 {
                out.push((g.clone(), i));
            }
            b = b.div_rem(&g).unwrap().0;
            if b.degree().unwrap_or(0) == 0 {
                break;
            }
            c = d.div_rem(&g).unwrap().0;
            d = &c - &b.derivative();
            i += 1;
        }
        out
    }

    /// Integer coefficients after clearing denominators and content, with
    /// positive leading coefficient.
    pub fn primitive_integer(&self) -> Vec<Integer> {
        if self.is_zero() {
            return Vec::new();
        }
        let den = self.c.iter().fold(Integer::from(1), |acc, x| acc.lcm(x.denom()));
        let mut v: Vec<Integer> = self
            .c
            .iter()
            .map(|x| Rational::from(x * &den).into_numer_denom().0)
            .collect();
        let g = v.iter().fold(Integer::new(), |acc, x| acc.gcd(x));
        for x in &mut v {
            *x /= &g;
        }
        if *v.last().unwrap() < 0 {
            for x in &mut v {
                *x = -x.clone();
            }
        }
        v
    }

    pub fn display_var(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, c) in self.c.iter().enumerate().rev() {
            if *c == 0 {
                continue;
            }
            let neg = *c < 0;
            let abs = Rational::from(c.abs_ref());
            if s.is_empty() {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mon = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            if mon.is_empty() {
                s.push_str(&abs.to_string());
            } else if abs == 1 {
                s.push_str(&mon);
            } else {
                s.push_str(&format!("{abs}*{mon}"));
            }
        }
        s
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_var("T"))
    }
}

impl Add for &QPoly {
    type Output = QPoly;
    fn add(self, o: &QPoly) -> QPoly {
        let n = self.c.len().max(o.c.len());
        QPoly::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }
}

impl Sub for &QPoly {
    type Output = QPoly;
    fn sub(self, o: &QPoly) -> QPoly {
        let n = self.c.len().max(o.c.len());
        QPoly::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }
}

impl Mul for &QPoly {
    type Output = QPoly;
    fn mul(self, o: &QPoly) -> QPoly {
        if self.is_zero() || o.is_zero() {
            return QPoly::zero();
        }
        let mut v = vec![Rational::new(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                v[i + j] += Rational::from(a * b);
            }
        }
        QPoly::new(v)
    }
}

impl Neg for &QPoly {
    type Output = QPoly;
    fn neg(self) -> QPoly {
        self.scale(&Rational::from(-1))
    }
}

/// The k-th cyclotomic polynomial.
pub fn cyclotomic(k: usize) -> QPoly {
    assert!(k >= 1);
    let mut p = &QPoly::monomial(k, 1) - &QPoly::one();
    for d in 1..k {
        if k % d == 0 {
            p = p.div_rem(&cyclotomic(d)).unwrap().0;
        }
    }
    p
}

/// True iff `f` is a nonzero constant times a product of cyclotomic polynomials.
pub fn is_cyclotomic_product(f: &QPoly) -> bool {
    let Some(deg) = f.degree() else { return false };
    if f.coeff(0) == 0 {
        return false;
    }
    let mut g = f.monic();
    // Φ_k has degree φ(k) ≥ √(k/2), so k ≤ 2·deg² bounds every possible factor.
    let bound = 2 * deg * deg;
    for k in 1..=bound.max(1) {
        if g.degree() == Some(0) {
            break;
        }
        let phi = cyclotomic(k);
        if phi.degree().unwrap() > g.degree().unwrap() {
            continue;
        }
        loop {
            let (q, r) = g.div_rem(&phi).unwrap();
            if r.is_zero() {
                g = q;
            } else {
                break;
            }
        }
    }
    g.degree() == Some(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_small() {
        assert_eq!(cyclotomic(1), QPoly::from_i64(&[-1, 1]));
        assert_eq!(cyclotomic(6), QPoly::from_i64(&[1, -1, 1]));
        assert_eq!(cyclotomic(12), QPoly::from_i64(&[1, 0, -1, 0, 1]));
    }

    #[test]
    fn cyclotomic_products() {
        assert!(is_cyclotomic_product(&QPoly::from_i64(&[1, 3, 3, 1])));
        assert!(is_cyclotomic_product(&QPoly::from_i64(&[2, 0, 0, 2])));
        assert!(!is_cyclotomic_product(&QPoly::from_i64(&[16, -3])));
        assert!(!is_cyclotomic_product(&QPoly::from_i64(&[1, 4, 3, 1])));
        assert!(!is_cyclotomic_product(&QPoly::from_i64(&[0, 1])));
    }

    #[test]
    fn division_and_shift() {
        let p = QPoly::from_i64(&[-1, 0, 1]);
        let (q, r) = p.div_rem(&QPoly::from_i64(&[-1, 1])).unwrap();
        assert_eq!(q, QPoly::from_i64(&[1, 1]));
        assert!(r.is_zero());
        assert_eq!(p.shift(&Rational::from(1)), QPoly::from_i64(&[0, 2, 1]));
    }

    #[test]
    fn squarefree() {
        // (T-1)^2 (T+2)^3 T
        let a = QPoly::from_i64(&[-1, 1]);
        let b = QPoly::from_i64(&[2, 1]);
        let p = &(&(&(&a * &a) * &b) * &(&b * &b)) * &QPoly::x();
        let d = p.squarefree_decomposition();
        assert_eq!(d, vec![(QPoly::x(), 1), (a, 2), (b, 3)]);
    }

    #[test]
    fn falling_and_rising() {
        assert_eq!(QPoly::falling(3).eval_i64(5), 60);
        assert_eq!(QPoly::falling(2).eval_i64(1), 0);
        assert_eq!(QPoly::rising_from_one(3).eval_i64(0), 6);
    }
}
