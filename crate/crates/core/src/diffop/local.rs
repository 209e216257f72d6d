//! Singular loci, polynomial roots and Frobenius local exponents.

use std::fmt;

use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use super::{AlgebraicNumber, DiffOperator};
use crate::error::{Error, Result};
use crate::numerics::real::{float_to_fixed, BigComplex, Provenance};
use crate::poly::QPoly;

/// A root: exact when it lies in ℚ or a quadratic field, numeric otherwise.
#[derive(Clone, Debug)]
pub enum Root {
    Exact(AlgebraicNumber),
    Numeric(BigComplex),
}

impl Root {
    pub fn to_complex(&self, prec: u32) -> BigComplex {
        match self {
            Root::Exact(a) => a.to_complex(prec),
            Root::Numeric(z) => BigComplex::new(
                Float::with_val(prec, &z.re),
                Float::with_val(prec, &z.im),
                z.provenance,
            ),
        }
    }

    pub fn exact(&self) -> Option<&AlgebraicNumber> {
        match self {
            Root::Exact(a) => Some(a),
            Root::Numeric(_) => None,
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.exact().and_then(|a| a.as_rational())
    }
}

impl fmt::Display for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Root::Exact(a) => write!(f, "{a}"),
            Root::Numeric(z) => {
                if z.im.is_zero() {
                    write!(f, "{}", float_to_fixed(&z.re, 30))
                } else {
                    write!(f, "{:.30}", z)
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum Point {
    Zero,
    Infinity,
    Finite(AlgebraicNumber),
}

/// Durand-Kerner iteration for the roots of Σ c_i z^i (complex coefficients).
fn numeric_roots(coeffs: &[BigComplex], prec: u32) -> Result<Vec<BigComplex>> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let wp = prec + 32;
    let coeffs: Vec<BigComplex> = coeffs
        .iter()
        .map(|c| BigComplex::new(Float::with_val(wp, &c.re), Float::with_val(wp, &c.im), c.provenance))
        .collect();
    let lead = coeffs[n].clone();
    let monic: Vec<BigComplex> = coeffs.iter().map(|c| c / &lead).collect();
    let radius = monic[..n]
        .iter()
        .map(|c| c.abs())
        .fold(Float::with_val(wp, 0), |m, x| if x > m { x } else { m })
        + 1u32;
    let seed = BigComplex::from_parts_f(0.4, 0.9, wp);
    let mut z: Vec<BigComplex> = (0..n).map(|k| seed.powi(k as u32 + 1).scale(&radius)).collect();
    let eval = |x: &BigComplex| {
        let mut acc = BigComplex::zero(wp);
        for c in monic.iter().rev() {
            acc = &(&acc * x) + c;
        }
        acc
    };
    let tol = Float::with_val(wp, 2).pow(-(wp as i32) + 16);
    for _ in 0..2000 {
        let mut max_step = Float::new(wp);
        for i in 0..n {
            let mut den = BigComplex::from_parts_f(1.0, 0.0, wp);
            for j in 0..n {
                if i != j {
                    den = &den * &(&z[i] - &z[j]);
                }
            }
            if den.is_zero() {
                den = BigComplex::new(tol.clone(), tol.clone(), Provenance::Derived);
            }
            let step = &eval(&z[i]) / &den;
            let size = step.abs() / (z[i].abs() + 1u32);
            if size > max_step {
                max_step = size;
            }
            z[i] = &z[i] - &step;
        }
        if max_step < tol {
            return Ok(z
                .into_iter()
                .map(|c| BigComplex::new(Float::with_val(prec, &c.re), Float::with_val(prec, &c.im), Provenance::Series))
                .collect());
        }
    }
    Err(Error::NoConvergence("polynomial root iteration".into()))
}

fn divisors(n: &Integer) -> Vec<Integer> {
    let n = Integer::from(n.abs_ref());
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = Integer::from(1);
    while Integer::from(&d * &d) <= n {
        if n.is_divisible(&d) {
            small.push(d.clone());
            let q = Integer::from(&n / &d);
            if q != d {
                large.push(q);
            }
        }
        d += 1;
        if d > 2_000_000 {
            break;
        }
    }
    large.reverse();
    small.extend(large);
    small
}

fn qpoly_complex(p: &QPoly, prec: u32) -> Vec<BigComplex> {
    p.coeffs()
        .iter()
        .map(|c| BigComplex::from_real(Float::with_val(prec, c)))
        .collect()
}

/// Roots of a square-free rational polynomial.
fn squarefree_roots(f: &QPoly, prec: u32) -> Result<Vec<Root>> {
    let mut f = f.clone();
    let mut out = Vec::new();
    while f.degree().unwrap_or(0) > 0 && f.coeff(0) == 0 {
        out.push(Root::Exact(AlgebraicNumber::zero()));
        f = f.div_rem(&QPoly::x())?.0;
    }
    if f.degree().unwrap_or(0) > 2 {
        // rational roots, located numerically and confirmed exactly
        let approx = numeric_roots(&qpoly_complex(&f, 128), 128)?;
        let lc = f.primitive_integer().last().cloned().unwrap();
        let dens = divisors(&lc);
        for z in approx {
            if Float::with_val(128, z.im.abs_ref()) > Float::with_val(128, z.re.abs_ref()) * 1e-20 + 1e-20 {
                continue;
            }
            for q in &dens {
                let p = Float::with_val(128, &z.re * q).round().to_integer().unwrap();
                let cand = Rational::from((p, q.clone()));
                if f.eval(&cand) == 0 {
                    out.push(Root::Exact(AlgebraicNumber::rational(cand.clone())));
                    f = f.div_rem(&QPoly::new(vec![-cand, Rational::from(1)]))?.0;
                    break;
                }
            }
        }
    }
    let mut quadratics = Vec::new();
    if f.degree().unwrap_or(0) > 2 {
        // rational quadratic factors, found by pairing numeric roots
        let lc = f.primitive_integer().last().cloned().unwrap();
        let mut approx = numeric_roots(&qpoly_complex(&f, 128), 128)?;
        let mut i = 0;
        while i < approx.len() && f.degree().unwrap_or(0) > 2 {
            let mut found = None;
            for j in i + 1..approx.len() {
                let sum = &approx[i] + &approx[j];
                let prod = &approx[i] * &approx[j];
                let near = |x: &Float| {
                    let y = Float::with_val(128, x * &lc);
                    let r = y.clone().round();
                    (Float::with_val(128, &y - &r).abs() < 1e-20).then(|| r.to_integer().unwrap())
                };
                if Float::with_val(128, sum.im.abs_ref()) > 1e-20 || Float::with_val(128, prod.im.abs_ref()) > 1e-20 {
                    continue;
                }
                if let (Some(b), Some(c)) = (near(&sum.re), near(&prod.re)) {
                    let q = QPoly::new(vec![
                        Rational::from((c, lc.clone())),
                        -Rational::from((b, lc.clone())),
                        Rational::from(1),
                    ]);
                    let (quot, rem) = f.div_rem(&q)?;
                    if rem.is_zero() {
                        found = Some((j, q, quot));
                        break;
                    }
                }
            }
            match found {
                Some((j, q, quot)) => {
                    approx.remove(j);
                    approx.remove(i);
                    quadratics.push(q);
                    f = quot;
                }
                None => i += 1,
            }
        }
    }
    for q in quadratics {
        out.extend(squarefree_roots(&q, prec)?);
    }
    match f.degree() {
        None | Some(0) => {}
        Some(1) => {
            let r = Rational::from(-f.coeff(0) / f.coeff(1));
            out.push(Root::Exact(AlgebraicNumber::rational(r)));
        }
        Some(2) => {
            let (a, b, c) = (f.coeff(2), f.coeff(1), f.coeff(0));
            let disc = Rational::from(b.square_ref()) - Rational::from(&a * &c) * 4u32;
            let two_a = Rational::from(&a * 2u32);
            let re = Rational::from(-Rational::from(&b / &two_a));
            // √(n/d) = √(n d)/d
            let (n, d) = disc.into_numer_denom();
            let nd = Integer::from(&n * &d);
            let root = AlgebraicNumber::sqrt(nd).scale(&Rational::from((Integer::from(1), d)));
            let half = root.scale(&Rational::from(two_a.recip_ref()));
            let base = AlgebraicNumber::rational(re);
            out.push(Root::Exact(&base + &half));
            out.push(Root::Exact(&base - &half));
        }
        Some(_) => {
            for z in numeric_roots(&qpoly_complex(&f, prec), prec)? {
                out.push(Root::Numeric(z));
            }
        }
    }
    Ok(out)
}

fn sort_roots(roots: &mut [Root]) {
    roots.sort_by(|x, y| {
        let a = x.to_complex(128);
        let b = y.to_complex(128);
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

/// All roots with multiplicity, exact where the factor is linear or quadratic.
pub fn polynomial_roots(p: &QPoly, prec: u32) -> Result<Vec<Root>> {
    let mut out = Vec::new();
    for (factor, mult) in p.squarefree_decomposition() {
        let roots = squarefree_roots(&factor, prec)?;
        for _ in 0..mult {
            out.extend(roots.iter().cloned());
        }
    }
    sort_roots(&mut out);
    Ok(out)
}

/// Local exponents at 0, ∞ or a finite algebraic point.
pub fn local_exponents(l: &DiffOperator, point: &Point, prec: u32) -> Result<Vec<Root>> {
    if l.is_zero() {
        return Err(Error::domain("zero operator"));
    }
    let r = l.order();
    match point {
        Point::Finite(s) if s.is_zero() => local_exponents(l, &Point::Zero, prec),
        Point::Zero => {
            let p = l.rows().iter().find(|p| !p.is_zero()).expect("nonzero operator");
            if p.degree() != Some(r) {
                return Err(Error::Irregular("0".into()));
            }
            polynomial_roots(p, prec)
        }
        Point::Infinity => {
            let p = l.row(l.degree());
            if p.degree() != Some(r) {
                return Err(Error::Irregular("infinity".into()));
            }
            polynomial_roots(&p.scale_var(&Rational::from(-1)), prec)
        }
        Point::Finite(sigma) => finite_exponents(l, sigma, prec),
    }
}

/// Coefficients of c(σ + u) in u.
fn recenter(c: &QPoly, sigma: &AlgebraicNumber) -> Result<Vec<AlgebraicNumber>> {
    let mut acc: Vec<AlgebraicNumber> = Vec::new();
    for coeff in c.coeffs().iter().rev() {
        // acc ← acc·(σ + u) + coeff
        let mut next = vec![AlgebraicNumber::zero(); acc.len() + 1];
        for (i, a) in acc.iter().enumerate() {
            next[i] = next[i].try_add(&a.try_mul(sigma)?)?;
            next[i + 1] = next[i + 1].try_add(a)?;
        }
        next[0] = next[0].try_add(&AlgebraicNumber::rational(coeff.clone()))?;
        acc = next;
    }
    Ok(acc)
}

fn finite_exponents(l: &DiffOperator, sigma: &AlgebraicNumber, prec: u32) -> Result<Vec<Root>> {
    let c = l.to_d_form();
    let r = l.order();
    // (order of vanishing, leading coefficient) of each c_k at σ
    let mut lowest: Vec<Option<(i64, AlgebraicNumber)>> = Vec::new();
    for ck in &c {
        let shifted = recenter(ck, sigma)?;
        lowest.push(
            shifted
                .iter()
                .enumerate()
                .find(|(_, a)| !a.is_zero())
                .map(|(i, a)| (i as i64, a.clone())),
        );
    }
    let nu = lowest
        .iter()
        .enumerate()
        .filter_map(|(k, o)| o.as_ref().map(|(ord, _)| ord - k as i64))
        .min()
        .ok_or_else(|| Error::domain("zero operator"))?;
    match &lowest[r] {
        Some((ord, _)) if ord - r as i64 == nu => {}
        _ => return Err(Error::Irregular(sigma.to_string())),
    }
    // I(ρ) = Σ_{k: ord_k − k = ν} lead_k · ρ(ρ−1)…(ρ−k+1)
    let mut indicial = vec![AlgebraicNumber::zero(); r + 1];
    for (k, o) in lowest.iter().enumerate() {
        if let Some((ord, lead)) = o {
            if ord - k as i64 == nu {
                for (j, f) in QPoly::falling(k).coeffs().iter().enumerate() {
                    indicial[j] = indicial[j].try_add(&lead.scale(f))?;
                }
            }
        }
    }
    let top = indicial[r].clone();
    let monic: Vec<AlgebraicNumber> = indicial
        .iter()
        .map(|a| a.try_div(&top))
        .collect::<Result<_>>()?;
    if monic.iter().all(|a| a.is_rational()) {
        let q = QPoly::new(monic.iter().map(|a| a.as_rational().unwrap().clone()).collect());
        return polynomial_roots(&q, prec);
    }
    let coeffs: Vec<BigComplex> = monic.iter().map(|a| a.to_complex(prec + 32)).collect();
    let mut roots: Vec<Root> = numeric_roots(&coeffs, prec)?.into_iter().map(Root::Numeric).collect();
    sort_roots(&mut roots);
    Ok(roots)
}

#[derive(Clone, Debug)]
pub struct SingularPoint {
    pub value: Root,
    pub modulus: Float,
}

#[derive(Clone, Debug)]
pub struct SingularLocus {
    /// Finite nonzero singular points, by increasing modulus.
    pub points: Vec<SingularPoint>,
    pub zero: bool,
    pub infinity: bool,
}

impl SingularLocus {
    /// Exactly one finite singular point has the largest modulus.
    pub fn is_normal_conifold(&self) -> bool {
        match self.points.len() {
            0 => false,
            1 => true,
            n => {
                let a = &self.points[n - 1].modulus;
                let b = &self.points[n - 2].modulus;
                let gap = Float::with_val(a.prec(), a - b);
                gap > Float::with_val(a.prec(), a * 1e-20)
            }
        }
    }

    /// Ratio of the two smallest moduli (the expected geometric rate of the
    /// Apéry ratio convergence).
    pub fn modulus_ratio(&self) -> Option<Float> {
        if self.points.len() < 2 {
            return None;
        }
        let a = &self.points[0].modulus;
        let b = &self.points[1].modulus;
        Some(Float::with_val(a.prec(), a / b))
    }
}

/// Roots of the leading ∂_t-coefficient, i.e. of Σ_i β_{i,r} t^i.
pub fn singular_locus(l: &DiffOperator, prec: u32) -> Result<SingularLocus> {
    let r = l.order();
    let mut lead = QPoly::new((0..=l.degree()).map(|i| l.beta(i, r)).collect());
    while lead.degree().unwrap_or(0) > 0 && lead.coeff(0) == 0 {
        lead = lead.div_rem(&QPoly::x())?.0;
    }
    let mut points = Vec::new();
    for (factor, _) in lead.squarefree_decomposition() {
        for root in squarefree_roots(&factor, prec)? {
            let modulus = root.to_complex(prec).abs();
            points.push(SingularPoint { value: root, modulus });
        }
    }
    points.sort_by(|a, b| a.modulus.partial_cmp(&b.modulus).unwrap_or(std::cmp::Ordering::Equal));
    Ok(SingularLocus {
        points,
        zero: true,
        infinity: true,
    })
}
