//! Sparse Laurent polynomials with exact rational coefficients and the
//! constant-term period sequence.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticePolytope;

pub type Exponent = Vec<i32>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentPolynomial {
    num_vars: usize,
    terms: BTreeMap<Exponent, Rational>,
}

impl LaurentPolynomial {
    pub fn zero(num_vars: usize) -> Self {
        LaurentPolynomial {
            num_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_vars: usize, c: impl Into<Rational>) -> Self {
        let mut p = Self::zero(num_vars);
        p.add_term(vec![0; num_vars], c.into());
        p
    }

    pub fn one(num_vars: usize) -> Self {
        Self::constant(num_vars, 1)
    }

    /// The monomial x_i (0-based).
    pub fn var(num_vars: usize, i: usize) -> Self {
        let mut e = vec![0; num_vars];
        e[i] = 1;
        Self::monomial(e, Rational::from(1))
    }

    pub fn monomial(exp: Exponent, c: Rational) -> Self {
        let mut p = Self::zero(exp.len());
        p.add_term(exp, c);
        p
    }

    pub fn from_terms<I>(num_vars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, Rational)>,
    {
        let mut p = Self::zero(num_vars);
        for (e, c) in terms {
            if e.len() != num_vars {
                return Err(Error::domain(format!(
                    "exponent vector of length {} in a {}-variable polynomial",
                    e.len(),
                    num_vars
                )));
            }
            p.add_term(e, c);
        }
        Ok(p)
    }

    /// Adds `c * x^e` in place, dropping zero coefficients.
    pub fn add_term(&mut self, e: Exponent, c: Rational) {
        debug_assert_eq!(e.len(), self.num_vars);
        if c == 0 {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if *o.get() == 0 {
                    o.remove();
                }
            }
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &[i32]) -> Rational {
        self.terms.get(e).cloned().unwrap_or_default()
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&vec![0; self.num_vars])
    }

    pub fn support(&self) -> Vec<Exponent> {
        self.terms.keys().cloned().collect()
    }

    pub fn has_integer_coefficients(&self) -> bool {
        self.terms.values().all(|c| *c.denom() == 1)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.num_vars != other.num_vars {
            return Err(Error::domain(format!(
                "mismatched variable counts {} and {}",
                self.num_vars, other.num_vars
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&Rational::from(-1)))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.num_vars);
        if *c == 0 {
            return out;
        }
        for (e, v) in &self.terms {
            out.terms.insert(e.clone(), Rational::from(v * c));
        }
        out
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let mut acc: HashMap<Exponent, Rational> = HashMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Exponent = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_default() += Rational::from(c1 * c2);
            }
        }
        Self::from_terms(self.num_vars, acc)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.num_vars);
        for _ in 0..k {
            out = out.multiply(self).expect("same variable count");
        }
        out
    }

    /// Divides by a single-term polynomial.
    pub fn divide_by_monomial(&self, m: &Self) -> Result<Self> {
        self.check_same(m)?;
        if m.terms.len() != 1 {
            return Err(Error::domain("division only by a monomial"));
        }
        let (me, mc) = m.terms.iter().next().expect("one term");
        let inv = Rational::from(mc.recip_ref());
        let mut out = Self::zero(self.num_vars);
        for (e, c) in &self.terms {
            let ne: Exponent = e.iter().zip(me).map(|(a, b)| a - b).collect();
            out.terms.insert(ne, Rational::from(c * &inv));
        }
        Ok(out)
    }

    /// Terms of `self^k` constant in variable `var`, as a polynomial in the
    /// remaining variables (in their original order).
    pub fn partial_constant_term(&self, k: u32, var: usize) -> Result<Self> {
        if var >= self.num_vars {
            return Err(Error::domain(format!(
                "variable index {var} out of range for {} variables",
                self.num_vars
            )));
        }
        let p = self.pow(k);
        let mut out = Self::zero(self.num_vars - 1);
        for (e, c) in p.terms {
            if e[var] == 0 {
                let mut r = e;
                r.remove(var);
                out.terms.insert(r, c);
            }
        }
        Ok(out)
    }

    /// Inserts a new variable at position `var` that does not occur.
    pub fn embed(&self, num_vars: usize, positions: &[usize]) -> Result<Self> {
        if positions.len() != self.num_vars {
            return Err(Error::domain("embedding needs one position per variable"));
        }
        let mut out = Self::zero(num_vars);
        for (e, c) in &self.terms {
            let mut ne = vec![0; num_vars];
            for (i, p) in positions.iter().enumerate() {
                if *p >= num_vars {
                    return Err(Error::domain("embedding position out of range"));
                }
                ne[*p] += e[i];
            }
            out.add_term(ne, c.clone());
        }
        Ok(out)
    }

    /// Largest absolute negative exponent over all variables.
    pub fn max_negative_degree(&self) -> u32 {
        self.terms
            .keys()
            .flat_map(|e| e.iter())
            .map(|&x| if x < 0 { (-x) as u32 } else { 0 })
            .max()
            .unwrap_or(0)
    }

    /// Variables that actually occur.
    pub fn occurring_vars(&self) -> Vec<usize> {
        (0..self.num_vars)
            .filter(|&i| self.terms.keys().any(|e| e[i] != 0))
            .collect()
    }

    pub fn eval_rational(&self, point: &[Rational]) -> Result<Rational> {
        if point.len() != self.num_vars {
            return Err(Error::domain("point has wrong dimension"));
        }
        let mut sum = Rational::new();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                if k != 0 {
                    if *x == 0 && k < 0 {
                        return Err(Error::domain("negative power of zero"));
                    }
                    t *= Rational::from(x.pow(k));
                }
            }
            sum += t;
        }
        Ok(sum)
    }

    /// Prepares a fast floating-point evaluator at the given precision.
    pub fn compile(&self, prec: u32) -> CompiledLaurent {
        let mut lo = vec![0i32; self.num_vars];
        let mut hi = vec![0i32; self.num_vars];
        for e in self.terms.keys() {
            for i in 0..self.num_vars {
                lo[i] = lo[i].min(e[i]);
                hi[i] = hi[i].max(e[i]);
            }
        }
        CompiledLaurent {
            prec,
            lo,
            hi,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), Float::with_val(prec, c)))
                .collect(),
        }
    }

    /// Parses an expression such as `(1+x+y)^3/(x*y)` or `1 - x2`.
    ///
    /// Variables are `x1..xn`; for n ≤ 3 the names `x, y, z` are accepted too.
    pub fn parse(text: &str, num_vars: usize) -> Result<Self> {
        let mut p = ExprParser {
            chars: text.chars().filter(|c| !c.is_whitespace()).collect(),
            pos: 0,
            num_vars,
        };
        let out = p.expr()?;
        if p.pos != p.chars.len() {
            return Err(Error::parse(0, format!("trailing input in '{text}'")));
        }
        Ok(out)
    }
}

pub fn var_name(i: usize) -> String {
    format!("x{}", i + 1)
}

impl fmt::Display for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
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
            let mut factors = Vec::new();
            if abs != 1 || e.iter().all(|&k| k == 0) {
                factors.push(abs.to_string());
            }
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => factors.push(var_name(i)),
                    _ => factors.push(format!("{}^{}", var_name(i), k)),
                }
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}

/// Floating-point evaluator for a fixed polynomial.
#[derive(Clone, Debug)]
pub struct CompiledLaurent {
    prec: u32,
    lo: Vec<i32>,
    hi: Vec<i32>,
    terms: Vec<(Exponent, Float)>,
}

impl CompiledLaurent {
    pub fn eval(&self, point: &[Float]) -> Float {
        let prec = self.prec;
        // power tables per variable, indexed from lo
        let tables: Vec<Vec<Float>> = (0..self.lo.len())
            .map(|i| {
                let (lo, hi) = (self.lo[i], self.hi[i]);
                let mut t = vec![Float::new(prec); (hi - lo + 1) as usize];
                let x = Float::with_val(prec, &point[i]);
                t[(-lo) as usize] = Float::with_val(prec, 1);
                if hi > 0 {
                    for k in 1..=hi as usize {
                        let v = Float::with_val(prec, &t[(-lo) as usize + k - 1] * &x);
                        t[(-lo) as usize + k] = v;
                    }
                }
                if lo < 0 {
                    let inv = Float::with_val(prec, 1) / &x;
                    for k in 1..=(-lo) as usize {
                        let v = Float::with_val(prec, &t[(-lo) as usize - k + 1] * &inv);
                        t[(-lo) as usize - k] = v;
                    }
                }
                t
            })
            .collect();
        let mut sum = Float::new(prec);
        let mut term = Float::new(prec);
        for (e, c) in &self.terms {
            term.assign_from(c);
            for (i, &k) in e.iter().enumerate() {
                if k != 0 {
                    term *= &tables[i][(k - self.lo[i]) as usize];
                }
            }
            sum += &term;
        }
        sum
    }
}

trait AssignFrom {
    fn assign_from(&mut self, other: &Float);
}

impl AssignFrom for Float {
    fn assign_from(&mut self, other: &Float) {
        use rug::Assign;
        self.assign(other);
    }
}

struct ExprParser {
    chars: Vec<char>,
    pos: usize,
    num_vars: usize,
}

impl ExprParser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::parse(0, format!("{msg} at position {}", self.pos)))
    }

    fn expr(&mut self) -> Result<LaurentPolynomial> {
        let mut neg = false;
        if self.peek() == Some('-') {
            self.pos += 1;
            neg = true;
        } else if self.peek() == Some('+') {
            self.pos += 1;
        }
        let mut acc = self.term()?;
        if neg {
            acc = acc.scale(&Rational::from(-1));
        }
        while let Some(c) = self.peek() {
            if c == '+' || c == '-' {
                self.pos += 1;
                let t = self.term()?;
                acc = if c == '+' { acc.add(&t)? } else { acc.sub(&t)? };
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<LaurentPolynomial> {
        let mut acc = self.power()?;
        while let Some(c) = self.peek() {
            if c == '*' {
                self.pos += 1;
                let f = self.power()?;
                acc = acc.multiply(&f)?;
            } else if c == '/' {
                self.pos += 1;
                let f = self.power()?;
                acc = acc.divide_by_monomial(&f)?;
            } else if c == '(' || c.is_alphanumeric() {
                // implicit multiplication
                let f = self.power()?;
                acc = acc.multiply(&f)?;
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<LaurentPolynomial> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let mut neg = false;
            let paren = self.peek() == Some('(');
            if paren {
                self.pos += 1;
            }
            if self.peek() == Some('-') {
                neg = true;
                self.pos += 1;
            }
            let k = self.integer()?;
            if paren {
                if self.peek() != Some(')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
            }
            let k = u32::try_from(k).map_err(|_| Error::parse(0, "exponent too large"))?;
            let p = base.pow(k);
            if neg {
                if p.len() != 1 {
                    return self.err("negative power of a non-monomial");
                }
                return LaurentPolynomial::one(self.num_vars).divide_by_monomial(&p);
            }
            return Ok(p);
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<Integer> {
        let start = self.pos;
        while self.peek().map_or(false, |c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected integer");
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        Ok(s.parse::<Integer>().expect("digits"))
    }

    fn atom(&mut self) -> Result<LaurentPolynomial> {
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
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(LaurentPolynomial::constant(self.num_vars, n))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                self.pos += 1;
                while self.peek().map_or(false, |c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                let idx = match name.as_str() {
                    "x" if self.num_vars <= 3 => 0,
                    "y" if self.num_vars <= 3 => 1,
                    "z" if self.num_vars <= 3 => 2,
                    _ => match name.strip_prefix('x').and_then(|r| r.parse::<usize>().ok()) {
                        Some(i) if i >= 1 => i - 1,
                        _ => return self.err(&format!("unknown variable '{name}'")),
                    },
                };
                if idx >= self.num_vars {
                    return self.err(&format!("variable '{name}' out of range"));
                }
                Ok(LaurentPolynomial::var(self.num_vars, idx))
            }
            _ => self.err("unexpected token"),
        }
    }
}

/// Exact sequence of rationals indexed from 0.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct RationalSequence {
    terms: Vec<Rational>,
}

impl RationalSequence {
    pub fn new(terms: Vec<Rational>) -> Self {
        RationalSequence { terms }
    }

    pub fn from_i64(values: &[i64]) -> Self {
        RationalSequence::new(values.iter().map(|&v| Rational::from(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[Rational] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<Rational> {
        self.terms
    }

    pub fn get(&self, i: usize) -> Option<&Rational> {
        self.terms.get(i)
    }

    pub fn truncate(&self, len: usize) -> Self {
        RationalSequence::new(self.terms.iter().take(len).cloned().collect())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        RationalSequence::new(self.terms.iter().map(|t| Rational::from(t * c)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| *t == 0)
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.terms.iter().map(|t| t.to_string()).collect()
    }

    /// Binomial transform a'_k = Σ_j C(k,j) c^{k-j} a_j, the effect of φ ↦ φ + c.
    pub fn binomial_transform(&self, c: &Rational) -> Self {
        let mut out = Vec::with_capacity(self.len());
        for k in 0..self.len() {
            let mut s = Rational::new();
            let mut cpow = Rational::from(1);
            for j in (0..=k).rev() {
                let b = Integer::from(Integer::binomial_u(k as u32, j as u32));
                s += Rational::from(&self.terms[j] * &cpow) * b;
                cpow *= c;
            }
            out.push(s);
        }
        RationalSequence::new(out)
    }
}

impl fmt::Display for RationalSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.to_strings();
        f.write_str(&parts.join(" "))
    }
}

impl Serialize for RationalSequence {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalSequence {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<String> = Vec::deserialize(d)?;
        v.iter()
            .map(|s| s.parse::<Rational>().map_err(serde::de::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(RationalSequence::new)
    }
}

const PACK_BITS: u32 = 21;
const PACK_BIAS: i64 = 1 << 20;

fn pack(e: &[i32]) -> u64 {
    let mut key = 0u64;
    for &x in e {
        key = (key << PACK_BITS) | ((x as i64 + PACK_BIAS) as u64);
    }
    key
}

fn unpack(mut key: u64, n: usize) -> Vec<i64> {
    let mut out = vec![0i64; n];
    for i in (0..n).rev() {
        out[i] = (key & ((1 << PACK_BITS) - 1)) as i64 - PACK_BIAS;
        key >>= PACK_BITS;
    }
    out
}

/// a_k = [φ^k]₀ for k = 0..=K.
///
/// With `prune` (which must be the Newton polytope of φ), monomials of the
/// partial power φ^j that cannot reach the origin within the remaining K−j
/// factors are dropped.
pub fn constant_term_sequence(
    phi: &LaurentPolynomial,
    k_max: i64,
    prune: Option<&LatticePolytope>,
) -> Result<RationalSequence> {
    if k_max < 0 {
        return Err(Error::domain("number of terms must be non-negative"));
    }
    let k_max = k_max as usize;
    let n = phi.num_vars();
    if n > 3 {
        let mut p = LaurentPolynomial::one(n);
        let mut out = vec![Rational::from(1)];
        for _ in 0..k_max {
            p = p.multiply(phi)?;
            out.push(p.constant_term());
        }
        return Ok(RationalSequence::new(out));
    }
    if let Some(poly) = prune {
        if poly.dimension() != n {
            return Err(Error::domain("pruning polytope has the wrong dimension"));
        }
    }
    let max_abs = phi
        .terms()
        .flat_map(|(e, _)| e.iter().map(|x| x.unsigned_abs() as i64))
        .max()
        .unwrap_or(0);
    if max_abs * (k_max as i64) >= PACK_BIAS {
        return Err(Error::domain("exponents too large for packed representation"));
    }
    // φ = ψ / den with ψ integral
    let den = phi
        .terms()
        .fold(Integer::from(1), |acc, (_, c)| acc.lcm(c.denom()));
    let psi: Vec<(u64, Vec<i64>, Integer)> = phi
        .terms()
        .map(|(e, c)| {
            let ci = Rational::from(c * &den).into_numer_denom().0;
            (pack(e), e.iter().map(|&x| x as i64).collect(), ci)
        })
        .collect();
    let zero_key = pack(&vec![0; n]);
    let facets: Vec<(Vec<i64>, i64)> = prune
        .map(|p| {
            p.facets()
                .iter()
                .map(|f| (f.normal.clone(), f.offset))
                .collect()
        })
        .unwrap_or_default();
    let origin_in_hull = match prune {
        Some(p) => p.contains(&vec![0; n]),
        None => true,
    };
    let mut current: HashMap<u64, Integer> = HashMap::new();
    current.insert(zero_key, Integer::from(1));
    let mut out = vec![Rational::from(1)];
    let mut den_pow = Integer::from(1);
    for j in 1..=k_max {
        den_pow *= &den;
        if !origin_in_hull {
            out.push(Rational::new());
            continue;
        }
        let mut next: HashMap<u64, Integer> = HashMap::with_capacity(current.len() * 2);
        let remaining = (k_max - j) as i64;
        for (key, v) in &current {
            let m = unpack(*key, n);
            for (_, e, c) in &psi {
                let nm: Vec<i64> = m.iter().zip(e).map(|(a, b)| a + b).collect();
                if !facets.is_empty()
                    && !facets.iter().all(|(normal, offset)| {
                        // keep iff -nm ∈ remaining·Δ: <normal, -nm> >= -remaining·offset
                        let dot: i64 = normal.iter().zip(&nm).map(|(a, b)| a * b).sum();
                        -dot >= -remaining * offset
                    })
                {
                    continue;
                }
                let nk = nm
                    .iter()
                    .fold(0u64, |k, &x| (k << PACK_BITS) | ((x + PACK_BIAS) as u64));
                let slot = next.entry(nk).or_insert_with(Integer::new);
                *slot += c * v;
            }
        }
        next.retain(|_, v| *v != 0);
        current = next;
        let ct = current.get(&zero_key).cloned().unwrap_or_default();
        out.push(Rational::from((ct, den_pow.clone())));
    }
    Ok(RationalSequence::new(out))
}
