//! Integer relations by lattice reduction, and recognition of limits as
//! rational combinations of known periods.

use std::fmt;

use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::error::{Error, Result};
use crate::numerics::real::digits_for_bits;
use crate::numerics::NamedConstant;

pub const DEFAULT_MAX_HEIGHT: u64 = 10_000;

/// Digits a residual must beat beyond the working precision.
const SAFETY_DIGITS: u32 = 10;
/// Extra digits demanded beyond the (n−1)·log10(H) needed to separate relations.
const MARGIN_DIGITS: f64 = 20.0;

#[derive(Clone, Debug)]
pub struct ConstantBasis {
    constants: Vec<NamedConstant>,
}

impl Default for ConstantBasis {
    fn default() -> Self {
        ConstantBasis {
            constants: vec![
                NamedConstant::One,
                NamedConstant::Zeta2,
                NamedConstant::Zeta3,
                NamedConstant::Pi3Sqrt3,
                NamedConstant::Log2,
            ],
        }
    }
}

impl ConstantBasis {
    pub fn new(constants: Vec<NamedConstant>) -> Result<Self> {
        if constants.is_empty() {
            return Err(Error::domain("empty constant basis"));
        }
        let basis = ConstantBasis { constants };
        basis.check_nonproportional()?;
        Ok(basis)
    }

    pub fn parse_list(text: &str) -> Result<Self> {
        Self::new(text.split(',').map(|s| s.parse()).collect::<Result<_>>()?)
    }

    pub fn labels(&self) -> Vec<String> {
        self.constants.iter().map(|c| c.label()).collect()
    }

    pub fn constants(&self) -> &[NamedConstant] {
        &self.constants
    }

    pub fn values(&self, prec: u32) -> Result<Vec<Float>> {
        self.constants
            .iter()
            .map(|c| c.value(prec).map(|v| v.into_float()))
            .collect()
    }

    fn check_nonproportional(&self) -> Result<()> {
        let v = self.values(256)?;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                if integer_relation(&[v[i].clone(), v[j].clone()], DEFAULT_MAX_HEIGHT, None)?.is_some() {
                    return Err(Error::domain(format!(
                        "basis constants {} and {} are proportional",
                        self.constants[i], self.constants[j]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// LLL reduction (δ = 0.99) of integer row vectors, with floating
/// Gram–Schmidt data updated in place.
fn lll(b: &mut [Vec<Integer>], prec: u32) {
    let n = b.len();
    let dot = |x: &[Integer], y: &[Integer]| {
        x.iter().zip(y).fold(Integer::new(), |acc, (p, q)| acc + Integer::from(p * q))
    };
    let gram_schmidt = |b: &[Vec<Integer>]| {
        let mut mu = vec![vec![Float::new(prec); n]; n];
        let mut bn = vec![Float::new(prec); n];
        for i in 0..n {
            for j in 0..i {
                let mut s = Float::with_val(prec, &dot(&b[i], &b[j]));
                for k in 0..j {
                    s -= Float::with_val(prec, &mu[j][k] * &mu[i][k]) * &bn[k];
                }
                mu[i][j] = s / &bn[j];
            }
            let mut s = Float::with_val(prec, &dot(&b[i], &b[i]));
            for k in 0..i {
                s -= Float::with_val(prec, mu[i][k].square_ref()) * &bn[k];
            }
            bn[i] = s;
        }
        (mu, bn)
    };
    let delta = Float::with_val(prec, 0.99);
    for _round in 0..4 {
        let (mut mu, mut bn) = gram_schmidt(b);
        let mut k = 1;
        let mut changed = false;
        while k < n {
            for j in (0..k).rev() {
                let q = Float::with_val(prec, mu[k][j].round_ref());
                if q.is_zero() {
                    continue;
                }
                let qi = q.to_integer().unwrap();
                let (head, tail) = b.split_at_mut(k);
                for (x, y) in tail[0].iter_mut().zip(&head[j]) {
                    *x -= Integer::from(&qi * y);
                }
                for l in 0..j {
                    let t = Float::with_val(prec, &q * &mu[j][l]);
                    mu[k][l] -= t;
                }
                mu[k][j] -= &q;
                changed = true;
            }
            let lhs = bn[k].clone();
            let rhs = (Float::with_val(prec, &delta) - Float::with_val(prec, mu[k][k - 1].square_ref())) * &bn[k - 1];
            if lhs >= rhs {
                k += 1;
                continue;
            }
            b.swap(k, k - 1);
            changed = true;
            let m = mu[k][k - 1].clone();
            let big = Float::with_val(prec, &bn[k] + Float::with_val(prec, m.square_ref()) * &bn[k - 1]);
            mu[k][k - 1] = Float::with_val(prec, &m * &bn[k - 1]) / &big;
            bn[k] = Float::with_val(prec, &bn[k - 1] * &bn[k]) / &big;
            bn[k - 1] = big;
            for j in 0..k - 1 {
                let t = mu[k][j].clone();
                mu[k][j] = mu[k - 1][j].clone();
                mu[k - 1][j] = t;
            }
            for i in k + 1..n {
                let t = mu[i][k].clone();
                mu[i][k] = Float::with_val(prec, &mu[i][k - 1] - Float::with_val(prec, &m * &t));
                mu[i][k - 1] = t + Float::with_val(prec, &mu[k][k - 1] * &mu[i][k]);
            }
            k = (k - 1).max(1);
        }
        if !changed {
            break;
        }
    }
}

fn residual(c: &[Integer], x: &[Float]) -> Float {
    let prec = x[0].prec();
    c.iter()
        .zip(x)
        .fold(Float::new(prec), |acc, (ci, xi)| acc + Float::with_val(prec, xi * ci))
        .abs()
}

fn height_ok(c: &[Integer], max_height: u64) -> bool {
    c.iter().all(|ci| *ci.as_abs() <= max_height) && c.iter().any(|ci| *ci != 0)
}

fn threshold(prec: u32) -> Float {
    let digits = digits_for_bits(prec).saturating_sub(SAFETY_DIGITS);
    Float::with_val(prec, 10).pow(-(digits as i32))
}

/// All short relations found by one reduction, sign-normalized and
/// filtered by height and residual at the working precision.
fn candidate_relations(x: &[Float], max_height: u64) -> Result<Vec<Vec<Integer>>> {
    let n = x.len();
    if n < 2 {
        return Err(Error::domain("need at least two numbers"));
    }
    let prec = x.iter().map(|v| v.prec()).min().unwrap();
    let need = (n as f64 - 1.0) * (max_height as f64).log10() + MARGIN_DIGITS;
    if (digits_for_bits(prec) as f64) < need {
        return Err(Error::domain(format!(
            "{} digits are too few for height {max_height} with {n} numbers (need {need:.0})",
            digits_for_bits(prec)
        )));
    }
    let scale = Float::with_val(prec, 2).pow(prec as i32 - 8);
    let mut b: Vec<Vec<Integer>> = (0..n)
        .map(|i| {
            let mut row = vec![Integer::new(); n + 1];
            row[i] = Integer::from(1);
            row[n] = Float::with_val(prec, &x[i] * &scale).round().to_integer().unwrap();
            row
        })
        .collect();
    lll(&mut b, 2 * prec + 64);
    let thr = threshold(prec);
    let mut out = Vec::new();
    for row in b {
        let mut c: Vec<Integer> = row[..n].to_vec();
        if !height_ok(&c, max_height) || residual(&c, x) >= thr {
            continue;
        }
        let g = c.iter().fold(Integer::new(), |g, ci| g.gcd(ci));
        for ci in c.iter_mut() {
            ci.div_exact_mut(&g);
        }
        if let Some(first) = c.iter().find(|ci| **ci != 0) {
            if *first < 0 {
                c.iter_mut().for_each(|ci| *ci = Integer::from(-&*ci));
            }
        }
        out.push(c);
    }
    Ok(out)
}

/// Integer vector c with |Σ c_i x_i| below 10^{−(digits − 10)} and
/// max |c_i| ≤ max_height. When `check` holds the same numbers at a higher
/// precision, the relation must also vanish there.
pub fn integer_relation(x: &[Float], max_height: u64, check: Option<&[Float]>) -> Result<Option<Vec<Integer>>> {
    let candidates = candidate_relations(x, max_height)?;
    for c in candidates {
        match check {
            Some(y) => {
                let prec = y.iter().map(|v| v.prec()).min().unwrap();
                if residual(&c, y) < threshold(prec) {
                    return Ok(Some(c));
                }
            }
            None => return Ok(Some(c)),
        }
    }
    Ok(None)
}

/// x = Σ coeffs_i · basis_i.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearCombination {
    pub terms: Vec<(NamedConstant, Rational)>,
}

impl LinearCombination {
    pub fn coefficient(&self, c: &NamedConstant) -> Rational {
        self.terms
            .iter()
            .find(|(k, _)| k == c)
            .map(|(_, q)| q.clone())
            .unwrap_or_default()
    }

    pub fn scale(&self, q: &Rational) -> Self {
        LinearCombination {
            terms: self
                .terms
                .iter()
                .map(|(c, v)| (c.clone(), Rational::from(v * q)))
                .filter(|(_, v)| *v != 0)
                .collect(),
        }
    }

    /// Parses forms such as `1/10 * zeta2`, `-10 + 6*zeta2` or `zeta3/6`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut terms: Vec<(NamedConstant, Rational)> = Vec::new();
        let src = text.replace(' ', "");
        if src.is_empty() {
            return Err(Error::domain("empty combination"));
        }
        // split at + and − that are not inside sqrt(...)
        let mut pieces = Vec::new();
        let mut depth = 0;
        let mut cur = String::new();
        for ch in src.chars() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                '+' | '-' if depth == 0 && !cur.is_empty() => pieces.push(std::mem::take(&mut cur)),
                _ => {}
            }
            cur.push(ch);
        }
        pieces.push(cur);
        for piece in pieces {
            let (sign, body) = match piece.strip_prefix('-') {
                Some(rest) => (-1, rest),
                None => (1, piece.strip_prefix('+').unwrap_or(&piece)),
            };
            let mut coeff = Rational::from(sign);
            let mut constant = NamedConstant::One;
            let mut divide = false;
            let mut rest = body;
            loop {
                let cut = rest.find(['*', '/']).unwrap_or(rest.len());
                let factor = &rest[..cut];
                if factor.is_empty() {
                    return Err(Error::domain(format!("bad term '{piece}'")));
                }
                if let Ok(n) = factor.parse::<Integer>() {
                    if !divide {
                        coeff *= n;
                    } else if n == 0 {
                        return Err(Error::domain("division by zero"));
                    } else {
                        coeff /= n;
                    }
                } else if divide || constant != NamedConstant::One {
                    return Err(Error::domain(format!("bad term '{piece}'")));
                } else {
                    constant = factor.parse()?;
                }
                if cut == rest.len() {
                    break;
                }
                divide = rest.as_bytes()[cut] == b'/';
                rest = &rest[cut + 1..];
            }
            match terms.iter_mut().find(|(c, _)| *c == constant) {
                Some((_, q)) => *q += coeff,
                None => terms.push((constant, coeff)),
            }
        }
        terms.retain(|(_, q)| *q != 0);
        Ok(LinearCombination { terms })
    }

    /// Same combination regardless of term order.
    pub fn same_as(&self, other: &Self) -> bool {
        self.terms.len() == other.terms.len()
            && self.terms.iter().all(|(c, q)| other.coefficient(c) == *q)
    }

    /// Largest entry of the primitive integer relation x·n − Σ m_i b_i = 0.
    pub fn relation_height(&self) -> Integer {
        let mut den = Integer::from(1);
        for (_, q) in &self.terms {
            den.lcm_mut(q.denom());
        }
        let mut h = den.clone();
        for (_, q) in &self.terms {
            let m = Integer::from(q.numer() * &den) / q.denom();
            if m.clone().abs() > h {
                h = m.abs();
            }
        }
        h
    }

    pub fn evaluate(&self, prec: u32) -> Result<Float> {
        let mut acc = Float::new(prec);
        for (c, q) in &self.terms {
            acc += Float::with_val(prec, c.value(prec)?.value() * q);
        }
        Ok(acc)
    }
}

impl fmt::Display for LinearCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (c, q)) in self.terms.iter().enumerate() {
            let neg = *q < 0;
            let abs = Rational::from(q.abs_ref());
            if i == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            match c {
                NamedConstant::One => write!(f, "{abs}")?,
                _ if abs == 1 => write!(f, "{c}")?,
                _ => write!(f, "{abs} * {c}")?,
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub enum Recognition {
    Found(LinearCombination),
    Ambiguous(Vec<LinearCombination>),
    NotFound,
}

/// Writes x as a rational combination of the basis. `x_check`, when given,
/// is x at a higher precision; the basis is always re-evaluated at doubled
/// precision before a combination is accepted.
pub fn recognize_constant(
    x: &Float,
    x_check: Option<&Float>,
    basis: &ConstantBasis,
    max_height: u64,
) -> Result<Recognition> {
    let prec = x.prec();
    let mut v = vec![x.clone()];
    v.extend(basis.values(prec)?);
    let candidates = candidate_relations(&v, max_height)?;
    let check_x = x_check.cloned().unwrap_or_else(|| x.clone());
    let check_prec = check_x.prec();
    let check_basis = basis.values(2 * prec.max(check_prec))?;
    let mut found: Vec<LinearCombination> = Vec::new();
    for c in candidates {
        if c[0] == 0 {
            continue;
        }
        let comb = LinearCombination {
            terms: basis
                .constants()
                .iter()
                .zip(&c[1..])
                .filter(|(_, ci)| **ci != 0)
                .map(|(k, ci)| (k.clone(), Rational::from((Integer::from(-ci), c[0].clone()))))
                .collect(),
        };
        // x − Σ q_i b_i at the check precision
        let mut r = Float::with_val(check_prec, &check_x);
        for (k, q) in &comb.terms {
            let idx = basis.constants().iter().position(|b| b == k).unwrap();
            r -= Float::with_val(check_prec, &check_basis[idx] * q);
        }
        if r.abs() < threshold(check_prec) && !found.contains(&comb) {
            found.push(comb);
        }
    }
    Ok(match found.len() {
        0 => Recognition::NotFound,
        1 => Recognition::Found(found.pop().unwrap()),
        _ => Recognition::Ambiguous(found),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::named_constant;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn val(c: NamedConstant, prec: u32) -> Float {
        named_constant(&c, prec).unwrap().into_float()
    }

    #[test]
    fn rational_relation() {
        let x = [Float::with_val(200, 1), Float::with_val(200, 0.5)];
        let c = integer_relation(&x, 1000, None).unwrap().unwrap();
        assert_eq!(c, [Integer::from(1), Integer::from(-2)]);
    }

    #[test]
    fn pi_has_no_small_relation() {
        let prec = 340;
        let x = [Float::with_val(prec, 1), val(NamedConstant::Pi, prec)];
        let y = [Float::with_val(2 * prec, 1), val(NamedConstant::Pi, 2 * prec)];
        assert!(integer_relation(&x, 1_000_000, Some(&y)).unwrap().is_none());
    }

    #[test]
    fn too_little_precision() {
        let x = [Float::with_val(40, 1), Float::with_val(40, 0.5), Float::with_val(40, 0.25)];
        assert!(matches!(integer_relation(&x, 10_000, None), Err(Error::Domain(_))));
    }

    #[test]
    fn recognizes_mixed_bases() {
        let prec = 400;
        let basis = ConstantBasis::default();
        let x = Float::with_val(prec, val(NamedConstant::Zeta2, prec) / 10u32);
        let Recognition::Found(c) = recognize_constant(&x, None, &basis, DEFAULT_MAX_HEIGHT).unwrap() else {
            panic!()
        };
        assert_eq!(c.to_string(), "1/10 * zeta2");
        let x = val(NamedConstant::LChi3_3, prec) / 3u32;
        let Recognition::Found(c) = recognize_constant(&x, None, &basis, DEFAULT_MAX_HEIGHT).unwrap() else {
            panic!()
        };
        assert_eq!(c.to_string(), "4/243 * pi3_sqrt3");
        let x = Float::with_val(prec, val(NamedConstant::Zeta2, prec) * 114u32) - 187.5;
        let Recognition::Found(c) = recognize_constant(&x, None, &basis, DEFAULT_MAX_HEIGHT).unwrap() else {
            panic!()
        };
        assert_eq!(c.to_string(), "-375/2 + 114 * zeta2");
    }

    #[test]
    fn unrelated_value() {
        let prec = 400;
        let x = Float::with_val(prec, 2).cbrt();
        let r = recognize_constant(&x, None, &ConstantBasis::default(), DEFAULT_MAX_HEIGHT).unwrap();
        assert!(matches!(r, Recognition::NotFound));
    }

    #[test]
    fn planted_relations() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let prec = 300;
        for _ in 0..100 {
            let n = rng.gen_range(2..=4);
            let xs: Vec<Float> = (0..n)
                .map(|_| {
                    let a: u64 = rng.gen();
                    let b: u64 = rng.gen();
                    Float::with_val(prec, Rational::from((Integer::from(a) * Integer::from(b), 1u32)))
                        .sqrt()
                        .ln()
                })
                .collect();
            let c: Vec<i64> = (0..n).map(|_| rng.gen_range(-1000..=1000)).collect();
            let s = xs.iter().zip(&c).fold(Float::new(prec), |acc, (x, ci)| acc + Float::with_val(prec, x * *ci));
            let mut v = vec![s];
            v.extend(xs);
            let r = integer_relation(&v, 1000, None).unwrap().expect("planted relation");
            let mut expect: Vec<Integer> = std::iter::once(Integer::from(1))
                .chain(c.iter().map(|ci| Integer::from(-ci)))
                .collect();
            let g = expect.iter().fold(Integer::new(), |g, x| g.gcd(x));
            expect.iter_mut().for_each(|x| x.div_exact_mut(&g));
            assert_eq!(r, expect);
        }
    }

    #[test]
    fn parse_combinations() {
        let c = LinearCombination::parse("1/10 * zeta2").unwrap();
        assert_eq!(c.to_string(), "1/10 * zeta2");
        let c = LinearCombination::parse("-10 + 6*zeta2").unwrap();
        assert_eq!(c.to_string(), "-10 + 6 * zeta2");
        assert!(c.same_as(&LinearCombination::parse("6*zeta2 - 10").unwrap()));
        assert_eq!(LinearCombination::parse("zeta3/6").unwrap().to_string(), "1/6 * zeta3");
        assert_eq!(LinearCombination::parse("-375/2 + 114 * zeta2").unwrap().to_string(), "-375/2 + 114 * zeta2");
        assert!(LinearCombination::parse("zeta2*zeta3").is_err());
        assert!(LinearCombination::parse("1/0").is_err());
    }

    #[test]
    fn basis_rejects_proportional() {
        assert!(ConstantBasis::parse_list("zeta2,pi3_sqrt3,L_chi3_3").is_err());
        assert!(ConstantBasis::parse_list("one,zeta2,zeta3").is_ok());
    }
}
