//! Fourier–Laplace regularization: û_k = u_k/k! on sequences, and
//! ∂_t → −s, t → ∂_s on operators.

use std::collections::BTreeMap;
use std::fmt;

use rug::{Integer, Rational};

use super::DiffOperator;
use crate::laurent::RationalSequence;
use crate::poly::QPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// u_k ↦ u_k / k!
    Forward,
    /// û_k ↦ k! û_k
    Inverse,
}

pub fn regularize_sequence(u: &RationalSequence, direction: Direction) -> RationalSequence {
    let mut fact = Integer::from(1);
    let out = u
        .terms()
        .iter()
        .enumerate()
        .map(|(k, x)| {
            if k > 0 {
                fact *= k as u32;
            }
            match direction {
                Direction::Forward => Rational::from(x / &fact),
                Direction::Inverse => Rational::from(x * &fact),
            }
        })
        .collect();
    RationalSequence::new(out)
}

fn binomial(n: usize, k: usize) -> Integer {
    Integer::from(Integer::binomial_u(n as u32, k as u32))
}

fn falling_int(x: usize, l: usize) -> Integer {
    (0..l).fold(Integer::from(1), |acc, i| {
        if x < i {
            Integer::new()
        } else {
            acc * (x - i) as u64
        }
    })
}

/// Operator Σ c_{ij} s^i ∂_s^j in normal order (s to the left).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WeylOperator {
    terms: BTreeMap<(usize, usize), Rational>,
}

impl WeylOperator {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn monomial(i: usize, j: usize, c: impl Into<Rational>) -> Self {
        let mut w = Self::zero();
        w.add_term(i, j, c.into());
        w
    }

    pub fn add_term(&mut self, i: usize, j: usize, c: Rational) {
        if c == 0 {
            return;
        }
        let e = self.terms.entry((i, j)).or_default();
        *e += c;
        if *e == 0 {
            self.terms.remove(&(i, j));
        }
    }

    pub fn coeff(&self, i: usize, j: usize) -> Rational {
        self.terms.get(&(i, j)).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(usize, usize), &Rational)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(i, j), c) in &other.terms {
            out.add_term(i, j, c.clone());
        }
        out
    }

    /// Product with ∂^b s^c = Σ_l C(b,l) c^{(l)} s^{c−l} ∂^{b−l}.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&(a, b), x) in &self.terms {
            for (&(c, e), y) in &other.terms {
                let xy = Rational::from(x * y);
                for l in 0..=b.min(c) {
                    let k = binomial(b, l) * falling_int(c, l);
                    out.add_term(a + c - l, b - l + e, Rational::from(&xy * &k));
                }
            }
        }
        out
    }

    /// Coefficients of the operator applied to Σ û_k s^k, for the indices m
    /// at which every contributing û_k is known.
    pub fn apply_to_series(&self, u: &RationalSequence) -> RationalSequence {
        let u = u.terms();
        let lag = self.terms.keys().map(|&(i, j)| j.saturating_sub(i)).max().unwrap_or(0);
        let len = u.len().saturating_sub(lag);
        let out = (0..len)
            .map(|m| {
                let mut g = Rational::new();
                for (&(i, j), c) in &self.terms {
                    if m + j < i {
                        continue;
                    }
                    let k = m + j - i;
                    g += Rational::from(c * &u[k]) * falling_int(k, j);
                }
                g
            })
            .collect();
        RationalSequence::new(out)
    }

    /// (shift, s^shift · W) in δ_s-form, using s^j ∂^j = δ(δ−1)⋯(δ−j+1).
    pub fn to_diff_operator(&self) -> (usize, DiffOperator) {
        let shift = self.terms.keys().map(|&(i, j)| j.saturating_sub(i)).max().unwrap_or(0);
        let top = self.terms.keys().map(|&(i, j)| i + shift - j).max().unwrap_or(0);
        let mut rows = vec![QPoly::zero(); top + 1];
        for (&(i, j), c) in &self.terms {
            let row = i + shift - j;
            rows[row] = &rows[row] + &QPoly::falling(j).scale(c);
        }
        (shift, DiffOperator::new(rows))
    }
}

impl fmt::Display for WeylOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        let mut keys: Vec<_> = self.terms.iter().collect();
        keys.sort_by(|a, b| (b.0 .1, b.0 .0).cmp(&(a.0 .1, a.0 .0)));
        for (&(i, j), c) in keys {
            let neg = *c < 0;
            let abs = Rational::from(c.abs_ref());
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let mut parts = Vec::new();
            if abs != 1 || (i == 0 && j == 0) {
                parts.push(abs.to_string());
            }
            match i {
                0 => {}
                1 => parts.push("s".into()),
                _ => parts.push(format!("s^{i}")),
            }
            match j {
                0 => {}
                1 => parts.push("Ds".into()),
                _ => parts.push(format!("Ds^{j}")),
            }
            f.write_str(&parts.join("*"))?;
        }
        Ok(())
    }
}

/// Literal substitution ∂_t → −s, t → ∂_s in the ∂_t-form of L, normal ordered.
pub fn fl_transform_operator(l: &DiffOperator) -> WeylOperator {
    let mut out = WeylOperator::zero();
    for (j, c) in l.to_d_form().iter().enumerate() {
        let sign = if j % 2 == 0 { 1 } else { -1 };
        for (k, coeff) in c.coeffs().iter().enumerate() {
            if *coeff == 0 {
                continue;
            }
            // t^k ∂_t^j ↦ ∂_s^k (−s)^j
            let term = WeylOperator::monomial(0, k, 1).mul(&WeylOperator::monomial(j, 0, Rational::from(coeff * sign)));
            out = out.add(&term);
        }
    }
    out
}

/// Operator in (s, δ_s) annihilating Σ (u_k/k!) s^k whenever L annihilates
/// Σ u_k t^k: rows P_i(T)·T(T−1)⋯(T−d+i+1).
pub fn deregularize_operator(l: &DiffOperator) -> DiffOperator {
    let d = l.degree();
    DiffOperator::new(
        l.rows()
            .iter()
            .enumerate()
            .map(|(i, p)| p * &QPoly::falling(d - i))
            .collect(),
    )
}

/// Inverse direction: from an annihilator of Σ û_k s^k to one of
/// Σ k!·û_k t^k, with rows P̂_i(T)·(T+1)⋯(T+i).
pub fn regularize_operator(l: &DiffOperator) -> DiffOperator {
    DiffOperator::new(
        l.rows()
            .iter()
            .enumerate()
            .map(|(i, p)| p * &QPoly::rising_from_one(i))
            .collect(),
    )
}
