//! Differential operators in ℚ[t, δ] with δ = t·d/dt, stored as
//! L = Σ_i t^i P_i(δ).

mod algebraic;
mod fl;
mod local;
mod parse;

pub use algebraic::AlgebraicNumber;
pub use fl::{deregularize_operator, fl_transform_operator, regularize_operator, regularize_sequence, Direction, WeylOperator};
pub use local::{local_exponents, polynomial_roots, singular_locus, Point, Root, SingularLocus, SingularPoint};

use std::fmt;
use std::str::FromStr;

use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::laurent::RationalSequence;
use crate::poly::QPoly;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiffOperator {
    /// P_0, …, P_d; the last one is nonzero unless the operator is zero.
    rows: Vec<QPoly>,
}

/// Stirling numbers of the second kind S(j, i) for j ≤ n.
fn stirling2(n: usize) -> Vec<Vec<Integer>> {
    let mut s = vec![vec![Integer::new(); n + 1]; n + 1];
    s[0][0] = Integer::from(1);
    for j in 1..=n {
        for i in 1..=j {
            let v = Integer::from(&s[j - 1][i] * i as u32) + &s[j - 1][i - 1];
            s[j][i] = v;
        }
    }
    s
}

impl DiffOperator {
    pub fn new(mut rows: Vec<QPoly>) -> Self {
        while rows.last().map_or(false, |r| r.is_zero()) {
            rows.pop();
        }
        DiffOperator { rows }
    }

    pub fn zero() -> Self {
        DiffOperator { rows: Vec::new() }
    }

    /// δ (the Euler operator)
    pub fn delta() -> Self {
        Self::new(vec![QPoly::x()])
    }

    /// Multiplication by t.
    pub fn t() -> Self {
        Self::new(vec![QPoly::zero(), QPoly::one()])
    }

    pub fn constant(c: impl Into<Rational>) -> Self {
        Self::new(vec![QPoly::constant(c)])
    }

    /// Builds from β_ij (row i = power of t, column j = power of δ).
    pub fn from_matrix(beta: &[Vec<Rational>]) -> Self {
        Self::new(beta.iter().map(|r| QPoly::new(r.clone())).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    /// Degree in t.
    pub fn degree(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }

    /// Order in δ.
    pub fn order(&self) -> usize {
        self.rows.iter().filter_map(|r| r.degree()).max().unwrap_or(0)
    }

    pub fn row(&self, i: usize) -> QPoly {
        self.rows.get(i).cloned().unwrap_or_default()
    }

    pub fn rows(&self) -> &[QPoly] {
        &self.rows
    }

    pub fn beta(&self, i: usize, j: usize) -> Rational {
        self.row(i).coeff(j)
    }

    /// (d+1)×(r+1) coefficient matrix.
    pub fn matrix(&self) -> Vec<Vec<Rational>> {
        let r = self.order();
        (0..=self.degree())
            .map(|i| (0..=r).map(|j| self.beta(i, j)).collect())
            .collect()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.rows.iter().map(|r| r.scale(c)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.rows.len().max(other.rows.len());
        Self::new((0..n).map(|i| &self.row(i) + &other.row(i)).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&Rational::from(-1)))
    }

    /// Composition self ∘ other, normal ordered with δ t^b = t^b (δ + b).
    pub fn compose(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut rows = vec![QPoly::zero(); self.rows.len() + other.rows.len() - 1];
        for (a, p) in self.rows.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            for (b, q) in other.rows.iter().enumerate() {
                if q.is_zero() {
                    continue;
                }
                let shifted = p.shift(&Rational::from(b as i64));
                rows[a + b] = &rows[a + b] + &(&shifted * q);
            }
        }
        Self::new(rows)
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(1), |acc, _| acc.compose(self))
    }

    /// Scaled so that β_{0,r} = 1 when P₀ has full degree r; otherwise
    /// primitive integer coefficients.
    pub fn normalized(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let r = self.order();
        let lead = self.beta(0, r);
        if lead != 0 && self.row(0).degree() == Some(r) {
            return self.scale(&Rational::from(lead.recip_ref()));
        }
        self.primitive()
    }

    /// Scaled to coprime integer coefficients, with the first nonzero
    /// coefficient (in row-major order from the top δ-power of P₀) positive.
    pub fn primitive(&self) -> Self {
        let all: Vec<&Rational> = self.rows.iter().flat_map(|r| r.coeffs()).collect();
        if all.is_empty() {
            return self.clone();
        }
        let den = all.iter().fold(Integer::from(1), |acc, x| acc.lcm(x.denom()));
        let num_gcd = all
            .iter()
            .map(|x| Rational::from(*x * &den).into_numer_denom().0)
            .fold(Integer::new(), |g, x| g.gcd(&x));
        let mut s = Rational::from((den, num_gcd));
        let first = self
            .rows
            .iter()
            .flat_map(|r| r.coeffs().iter().rev())
            .find(|x| **x != 0)
            .expect("nonzero");
        if *first < 0 {
            s = -s;
        }
        self.scale(&s)
    }

    /// g_m = Σ_{i ≤ min(m,d)} P_i(m−i) u_{m−i} for m < len(u).
    pub fn apply_to_series(&self, u: &RationalSequence) -> RationalSequence {
        let u = u.terms();
        let out = (0..u.len())
            .map(|m| {
                let mut g = Rational::new();
                for (i, p) in self.rows.iter().enumerate().take(m + 1) {
                    if !p.is_zero() && u[m - i] != 0 {
                        g += p.eval_i64((m - i) as i64) * &u[m - i];
                    }
                }
                g
            })
            .collect();
        RationalSequence::new(out)
    }

    pub fn to_recurrence(&self) -> RecurrenceScheme {
        RecurrenceScheme {
            offsets: self
                .rows
                .iter()
                .enumerate()
                .map(|(i, p)| p.shift(&Rational::from(-(i as i64))))
                .collect(),
        }
    }

    /// Coefficients c_k(t) of the ∂_t-form Σ_k c_k(t) ∂_t^k.
    pub fn to_d_form(&self) -> Vec<QPoly> {
        let r = self.order();
        let s = stirling2(r);
        let mut c: Vec<Vec<Rational>> = vec![vec![Rational::new(); self.rows.len() + r]; r + 1];
        for (a, p) in self.rows.iter().enumerate() {
            for (j, beta) in p.coeffs().iter().enumerate() {
                if *beta == 0 {
                    continue;
                }
                for (k, sjk) in s[j].iter().enumerate().take(j + 1) {
                    if *sjk != 0 {
                        c[k][a + k] += Rational::from(beta * sjk);
                    }
                }
            }
        }
        c.into_iter().map(QPoly::new).collect()
    }

    /// Canonical text: terms `c*t^i*D^j`, t-power ascending, δ-power descending.
    pub fn to_text(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, p) in self.rows.iter().enumerate() {
            for (j, c) in p.coeffs().iter().enumerate().rev() {
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
                let mut parts = Vec::new();
                if abs != 1 || (i == 0 && j == 0) {
                    parts.push(abs.to_string());
                }
                match i {
                    0 => {}
                    1 => parts.push("t".into()),
                    _ => parts.push(format!("t^{i}")),
                }
                match j {
                    0 => {}
                    1 => parts.push("D".into()),
                    _ => parts.push(format!("D^{j}")),
                }
                s.push_str(&parts.join("*"));
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse::parse_operator(text)
    }
}

impl fmt::Display for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for DiffOperator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// Σ_i Q_i(m) u_{m−i} = g_m with Q_i(m) = P_i(m−i).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecurrenceScheme {
    pub offsets: Vec<QPoly>,
}

impl RecurrenceScheme {
    pub fn span(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    /// Left-hand side evaluated at every index m < len(u).
    pub fn apply(&self, u: &RationalSequence) -> RationalSequence {
        let u = u.terms();
        RationalSequence::new(
            (0..u.len())
                .map(|m| {
                    let mut g = Rational::new();
                    for (i, q) in self.offsets.iter().enumerate() {
                        if i > m {
                            break;
                        }
                        g += q.eval_i64(m as i64) * &u[m - i];
                    }
                    g
                })
                .collect(),
        )
    }

    /// Human-readable recurrence in n.
    pub fn to_text(&self) -> String {
        let mut parts = Vec::new();
        for (i, q) in self.offsets.iter().enumerate() {
            if q.is_zero() {
                continue;
            }
            let idx = if i == 0 { "u(n)".to_string() } else { format!("u(n-{i})") };
            parts.push(format!("({})*{idx}", q.display_var("n")));
        }
        format!("{} = 0", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(s: &str) -> DiffOperator {
        DiffOperator::parse(s).unwrap()
    }

    const A3: &str = "D^3 - t*(2*D+1)*(17*D^2+17*D+5) + t^2*(D+1)^3";
    const B3: &str = "D^3 - 2*t*(2*D+1)*(11*D^2+11*D+3) - 4*t^2*(D+1)*(2*D+3)*(2*D+1)";

    #[test]
    fn delta_on_sequences() {
        let u = RationalSequence::from_i64(&[3, 3, 3, 3]);
        assert_eq!(DiffOperator::delta().apply_to_series(&u), RationalSequence::from_i64(&[0, 3, 6, 9]));
    }

    #[test]
    fn a3_annihilates_apery_numbers() {
        let a = RationalSequence::from_i64(&[1, 5, 73, 1445]);
        assert!(op(A3).apply_to_series(&a).is_zero());
        let b = RationalSequence::new(vec![Rational::new(), Rational::from(1), Rational::from((117, 8))]);
        assert_eq!(op(A3).apply_to_series(&b), RationalSequence::from_i64(&[0, 1, 0]));
    }

    #[test]
    fn a3_recurrence_coefficients() {
        let rec = op(A3).to_recurrence();
        assert_eq!(rec.offsets[0], QPoly::from_i64(&[0, 0, 0, 1]));
        assert_eq!(rec.offsets[1], QPoly::from_i64(&[5, -27, 51, -34]));
        assert_eq!(rec.offsets[2], QPoly::from_i64(&[-1, 3, -3, 1]));
    }

    #[test]
    fn b3_recurrence_coefficients() {
        let rec = op(B3).to_recurrence();
        assert_eq!(rec.offsets[1], QPoly::from_i64(&[6, -34, 66, -44]));
        // −16 (n−3/2)(n−1)(n−1/2) = −16n³ + 48n² − 44n + 12
        assert_eq!(rec.offsets[2], QPoly::from_i64(&[12, -44, 48, -16]));
        assert!(op(B3).apply_to_series(&RationalSequence::from_i64(&[1, 6, 114, 2940])).is_zero());
    }

    #[test]
    fn delta_recurrence() {
        let rec = DiffOperator::delta().to_recurrence();
        assert_eq!(rec.offsets, vec![QPoly::x()]);
    }

    #[test]
    fn composition_with_delta_minus_one() {
        // (δ − 1)·t = t·δ
        let l = op("D - 1").compose(&DiffOperator::t());
        assert_eq!(l, op("t*D"));
        let a3 = op(A3);
        let m = op("D - 1").compose(&a3);
        assert_eq!(m.order(), 4);
        let a = RationalSequence::from_i64(&[1, 5, 73, 1445, 33001]);
        assert!(m.apply_to_series(&a).is_zero());
    }

    #[test]
    fn text_round_trip() {
        for s in [A3, B3, "D", "t", "3/2*t^2*D - 7", "D^2 - 3*t*(3*D+1)*(3*D+2)"] {
            let l = op(s);
            assert_eq!(op(&l.to_text()), l);
        }
        assert_eq!(op("t*D").to_text(), "t*D");
        assert_eq!(op("D*t").to_text(), "t*D + t");
    }

    #[test]
    fn d_form_of_delta_squared() {
        // δ² = t∂ + t²∂²
        let c = op("D^2").to_d_form();
        assert_eq!(c[0], QPoly::zero());
        assert_eq!(c[1], QPoly::from_i64(&[0, 1]));
        assert_eq!(c[2], QPoly::from_i64(&[0, 0, 1]));
    }

    #[test]
    fn normalization() {
        let l = op(A3).scale(&Rational::from(-6));
        assert_eq!(l.normalized(), op(A3));
        let p = op("2*t*D + 4*t^2").primitive();
        assert_eq!(p, op("t*D + 2*t^2"));
    }
}
