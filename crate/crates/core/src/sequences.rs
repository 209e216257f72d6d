//! Exact recurrence solutions, Apéry limits and the inhomogeneous constant.

use rug::ops::Pow;
use rug::{Float, Integer, Rational};

use crate::diffop::{AlgebraicNumber, DiffOperator};
use crate::error::{Error, Result};
use crate::laurent::RationalSequence;
use crate::numerics::real::{BigComplex, BigReal, Provenance};
use crate::opfit::fit_operator;
use crate::poly::QPoly;

/// Increments used by the tail model.
const TAIL: usize = 20;

fn solve(l: &DiffOperator, g: &QPoly, seed: Option<usize>, k: usize) -> Result<RationalSequence> {
    let rows = l.rows();
    let p0 = l.row(0);
    let mut u: Vec<Rational> = Vec::with_capacity(k + 1);
    for m in 0..=k {
        if let Some(s) = seed {
            if m == s {
                u.push(Rational::from(1));
                continue;
            }
        }
        let mut rhs = g.coeff(m);
        for (i, p) in rows.iter().enumerate().skip(1).take(m) {
            let prev = &u[m - i];
            if *prev != 0 && !p.is_zero() {
                rhs -= p.eval_i64((m - i) as i64) * prev;
            }
        }
        let lead = p0.eval_i64(m as i64);
        if lead == 0 {
            if rhs != 0 || (seed.is_none() && m > 0 && u.iter().any(|x| *x != 0)) {
                return Err(Error::Obstructed(m as i64));
            }
            u.push(Rational::new());
        } else {
            u.push(rhs / lead);
        }
    }
    Ok(RationalSequence::new(u))
}

/// a_0 = 1 and P_0(m) a_m = −Σ_{i≥1} P_i(m−i) a_{m−i}; returns a_0..a_K.
pub fn solve_homogeneous(l: &DiffOperator, k: usize) -> Result<RationalSequence> {
    for m in 1..=k {
        if l.row(0).eval_i64(m as i64) == 0 {
            return Err(Error::Obstructed(m as i64));
        }
    }
    solve(l, &QPoly::zero(), Some(0), k)
}

/// Solution of L(Σ b_m t^m) = g with b_m = 0 below the lowest degree of g.
pub fn solve_inhomogeneous(l: &DiffOperator, g: &QPoly, k: usize) -> Result<RationalSequence> {
    let Some(m0) = (0..g.coeffs().len()).find(|&i| g.coeff(i) != 0) else {
        return Ok(RationalSequence::new(vec![Rational::new(); k + 1]));
    };
    for m in m0..=k {
        if l.row(0).eval_i64(m as i64) == 0 {
            return Err(Error::Obstructed(m as i64));
        }
    }
    solve(l, g, None, k)
}

#[derive(Clone, Debug)]
pub struct AperyLimitResult {
    pub value: BigReal,
    pub terms_used: usize,
    pub error_estimate: BigReal,
    /// Fitted |x_n − x_{n−1}| / |x_{n−1} − x_{n−2}| on the tail.
    pub convergence_ratio: BigReal,
    pub accelerated: bool,
}

/// x_n − x_{n−1} for x = b/a, exactly.
fn increment(a: &[Rational], b: &[Rational], n: usize) -> Rational {
    Rational::from(&b[n] / &a[n]) - Rational::from(&b[n - 1] / &a[n - 1])
}

/// lim b_K / a_K with a geometric tail error model.
pub fn apery_limit(a: &RationalSequence, b: &RationalSequence, prec: u32) -> Result<AperyLimitResult> {
    if a.len() != b.len() {
        return Err(Error::domain("sequences differ in length"));
    }
    if a.len() < TAIL {
        return Err(Error::domain(format!("need at least {TAIL} terms, got {}", a.len())));
    }
    if let Some(k) = a.terms().iter().position(|x| *x == 0) {
        return Err(Error::domain(format!("a_{k} is zero")));
    }
    let (at, bt) = (a.terms(), b.terms());
    let last = a.len() - 1;
    let wp = prec + 32;
    let raw = Rational::from(&bt[last] / &at[last]);
    let value = Float::with_val(wp, &raw);
    let floor = Float::with_val(wp, value.abs_ref()) * Float::with_val(wp, 2).pow(-(prec as i32));

    // log|δ_n| for the last TAIL increments, skipping exact zeros
    let start = last + 1 - TAIL.min(last);
    let pts: Vec<(f64, Float)> = (start.max(1)..=last)
        .filter_map(|n| {
            let d = increment(at, bt, n);
            (d != 0).then(|| (n as f64, Float::with_val(wp, &d)))
        })
        .collect();
    let zero = |p| BigReal::new(Float::with_val(p, 0), Provenance::Derived);
    if pts.len() < 3 {
        return Ok(AperyLimitResult {
            value: BigReal::new(Float::with_val(prec, &value), Provenance::ExactCast),
            terms_used: a.len(),
            error_estimate: BigReal::new(Float::with_val(prec, &floor), Provenance::Derived),
            convergence_ratio: zero(prec),
            accelerated: false,
        });
    }
    // least squares slope of ln|δ_n| against n
    let logs: Vec<f64> = pts
        .iter()
        .map(|(_, d)| {
            let (m, e) = d.to_f64_exp();
            m.abs().ln() + e as f64 * std::f64::consts::LN_2
        })
        .collect();
    let ns: Vec<f64> = pts.iter().map(|(n, _)| *n).collect();
    let nbar = ns.iter().sum::<f64>() / ns.len() as f64;
    let lbar = logs.iter().sum::<f64>() / logs.len() as f64;
    let num: f64 = ns.iter().zip(&logs).map(|(n, l)| (n - nbar) * (l - lbar)).sum();
    let den: f64 = ns.iter().map(|n| (n - nbar).powi(2)).sum();
    let rho = (num / den).exp();
    let last_delta = &pts.last().unwrap().1;

    // signed successive ratios; accelerate only if they are stable to 1%
    let ratios: Vec<Float> = pts
        .windows(2)
        .rev()
        .take(4)
        .map(|w| Float::with_val(wp, &w[1].1 / &w[0].1))
        .collect();
    let r0 = ratios[0].clone();
    let stable = rho < 1.0
        && ratios
            .iter()
            .all(|r| Float::with_val(wp, r - &r0).abs() < Float::with_val(wp, r0.abs_ref()) * 0.01);
    let tail_err = Float::with_val(wp, last_delta.abs_ref()) * (rho / (1.0 - rho).max(1e-300));
    let (value, accelerated) = if stable && rho < 1.0 {
        let corr = Float::with_val(wp, last_delta * &r0) / Float::with_val(wp, 1 - &r0);
        (value + corr, true)
    } else {
        (value, false)
    };
    let err = if rho < 1.0 {
        tail_err + &floor
    } else {
        Float::with_val(wp, f64::INFINITY)
    };
    Ok(AperyLimitResult {
        value: BigReal::new(Float::with_val(prec, &value), Provenance::Series),
        terms_used: a.len(),
        error_estimate: BigReal::new(Float::with_val(53, &err), Provenance::Derived),
        convergence_ratio: BigReal::new(Float::with_val(53, rho), Provenance::Derived),
        accelerated,
    })
}

/// Coefficient of t^m in L·V for a series V with (numeric) coefficients v.
pub fn series_coefficient(l: &DiffOperator, v: &[BigComplex], m: usize) -> BigComplex {
    let prec = v.first().map_or(64, |x| x.prec());
    let mut acc = BigComplex::zero(prec);
    for (i, p) in l.rows().iter().enumerate().take(m + 1) {
        if let Some(x) = v.get(m - i) {
            let c = Float::with_val(prec, &p.eval_i64((m - i) as i64));
            acc = &acc + &x.scale(&c);
        }
    }
    acc
}

/// v_m forced by the vanishing of the t^m-coefficient of L·V.
pub fn predicted_coefficient(l: &DiffOperator, v: &[BigComplex], m: usize) -> Result<BigComplex> {
    let lead = l.row(0).eval_i64(m as i64);
    if lead == 0 {
        return Err(Error::Obstructed(m as i64));
    }
    let known: Vec<BigComplex> = v.iter().take(m).cloned().collect();
    let rest = series_coefficient(l, &known, m);
    let prec = rest.prec();
    Ok((-&rest).scale(&Float::with_val(prec, &Rational::from(lead.recip_ref()))))
}

#[derive(Clone, Debug)]
pub struct KappaResult {
    pub value: BigComplex,
    /// Nearest element of ℚ or ℚ(√D) with small denominators, when certified.
    pub exact: Option<AlgebraicNumber>,
    /// |value − exact|.
    pub distance: Option<Float>,
}

const MAX_DENOMINATOR: u32 = 10_000;

/// Best continued-fraction convergent with denominator ≤ MAX_DENOMINATOR.
pub fn small_rational(x: &Float) -> Option<Rational> {
    let mut rest = x.to_rational()?;
    let (mut h0, mut h1) = (Integer::from(0), Integer::from(1));
    let (mut k0, mut k1) = (Integer::from(1), Integer::from(0));
    let mut best = None;
    for _ in 0..64 {
        let a = rest.clone().floor().into_numer_denom().0;
        let h2 = Integer::from(&a * &h1) + &h0;
        let k2 = Integer::from(&a * &k1) + &k0;
        if k2 > MAX_DENOMINATOR {
            break;
        }
        best = Some(Rational::from((h2.clone(), k2.clone())));
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = rest - a;
        if frac == 0 {
            break;
        }
        rest = frac.recip();
    }
    best
}

/// Recognizes x as q or ±√q with q rational of small height, within tol.
fn small_quadratic(x: &Float, tol: &Float) -> Option<AlgebraicNumber> {
    let prec = x.prec();
    // distinct fractions with denominators ≤ N are 1/N² apart; demand a 10³ margin
    let sep = Float::with_val(prec, 1) / (f64::from(MAX_DENOMINATOR).powi(2) * 1e3);
    if *tol > sep {
        return None;
    }
    let q = small_rational(x)?;
    if Float::with_val(prec, x - &q).abs() <= *tol {
        return Some(AlgebraicNumber::rational(q));
    }
    let sq = Float::with_val(prec, x.square_ref());
    let sq_tol = Float::with_val(prec, x.abs_ref()) * tol * 2u32 + Float::with_val(prec, tol.square_ref());
    if sq_tol > sep {
        return None;
    }
    let q = small_rational(&sq)?;
    if Float::with_val(prec, &sq - &q).abs() > sq_tol || q <= 0 {
        return None;
    }
    // √(n/d) = √(n d) / d
    let (n, d) = q.into_numer_denom();
    let root = AlgebraicNumber::sqrt(Integer::from(&n * &d)).scale(&Rational::from((Integer::from(1), d)));
    Some(if *x < 0 { root.scale(&Rational::from(-1)) } else { root })
}

fn imaginary_unit_times(x: &AlgebraicNumber) -> Option<AlgebraicNumber> {
    // i·b√D = b√(−D) for D > 0; i·a with a rational is b√−1
    if x.is_zero() {
        return Some(AlgebraicNumber::zero());
    }
    if let Some(a) = x.as_rational() {
        return Some(AlgebraicNumber::new(Rational::new(), a.clone(), Integer::from(-1)));
    }
    (*x.a() == 0 && *x.d() > 0).then(|| AlgebraicNumber::new(Rational::new(), x.b().clone(), Integer::from(-x.d())))
}

/// 𝔨 := −(t^{d−1}-coefficient of L·V) from v = (v_0, …, v_{d−1}).
pub fn inhomogeneous_constant(l: &DiffOperator, v: &[BigComplex], tol: &Float) -> Result<KappaResult> {
    let d = l.degree();
    if d == 0 || v.len() < d {
        return Err(Error::domain(format!("need {d} Taylor coefficients, got {}", v.len())));
    }
    let value = -&series_coefficient(l, &v[..d], d - 1);
    let re = small_quadratic(&value.re, tol);
    let im = small_quadratic(&value.im, tol);
    let exact = match (re, im) {
        (Some(r), Some(i)) if i.is_zero() => Some(r),
        (Some(r), Some(i)) if r.is_zero() => imaginary_unit_times(&i),
        (Some(r), Some(i)) => r.as_rational().and(imaginary_unit_times(&i)).and_then(|ii| ii.try_add(&r).ok()),
        _ => None,
    };
    let distance = exact.as_ref().map(|e| {
        let z = e.to_complex(value.prec());
        (&z - &value).abs()
    });
    Ok(KappaResult { value, exact, distance })
}

/// V̂ = (P_0(d−1)/𝔨)·V termwise.
pub fn normalize_thnf(v: &[BigComplex], kappa: &BigComplex, l: &DiffOperator) -> Result<Vec<BigComplex>> {
    if kappa.is_zero() {
        return Err(Error::domain("inhomogeneous constant is zero (torsion normal function)"));
    }
    let d = l.degree();
    let prec = kappa.prec();
    let p0 = Float::with_val(prec, &l.row(0).eval_i64(d.saturating_sub(1) as i64));
    let factor = &BigComplex::from_real(p0) / kappa;
    Ok(v.iter().map(|x| x * &factor).collect())
}

#[derive(Clone, Debug)]
pub struct ShiftedLimit {
    pub operator: DiffOperator,
    pub inhomogeneity: QPoly,
    pub limit: AperyLimitResult,
}

/// Apéry limit after φ → φ + c: the periods become binomial transforms,
/// an operator is refitted from `fit_terms` of them, the inhomogeneous
/// term is read off L'·b', and both recurrences are re-solved to `k`.
pub fn shifted_apery_limit(
    a: &RationalSequence,
    b: &RationalSequence,
    c: &Rational,
    fit_terms: usize,
    k: usize,
    prec: u32,
) -> Result<ShiftedLimit> {
    let a1 = a.truncate(fit_terms).binomial_transform(c);
    let b1 = b.truncate(fit_terms).binomial_transform(c);
    let mut operator = None;
    'scan: for d in 1..=6 {
        for r in 1..=4 {
            if (d + 1) * (r + 1) + 4 > fit_terms {
                continue;
            }
            match fit_operator(&a1, r, d, fit_terms - (d + 1) * (r + 1)) {
                Ok(l) => {
                    operator = Some(l);
                    break 'scan;
                }
                Err(Error::NotFound) | Err(Error::AmbiguousFit(..)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    let fitted = operator.ok_or(Error::NotFound)?;
    // L'·b' is t times a power of 1/(1 − c t); clear it by left multiplication
    let one_minus = DiffOperator::new(vec![QPoly::one(), QPoly::constant(-c.clone())]);
    let mut l = fitted;
    let mut found = None;
    for _ in 0..=8 {
        let g = l.apply_to_series(&b1);
        let deg = g.terms().iter().rposition(|x| *x != 0).unwrap_or(0);
        if deg + 4 < fit_terms {
            found = Some(QPoly::new(g.terms()[..=deg].to_vec()));
            break;
        }
        l = one_minus.compose(&l);
    }
    let g = found.ok_or_else(|| Error::Consistency("shifted inhomogeneity is not a short polynomial".into()))?;
    let a2 = solve_homogeneous(&l, k)?;
    let b2 = solve_inhomogeneous(&l, &g, k)?;
    if a2.truncate(fit_terms) != a1 || b2.truncate(fit_terms) != b1 {
        return Err(Error::Consistency("re-solved shifted sequences disagree with the transform".into()));
    }
    let limit = apery_limit(&a2, &b2, prec)?;
    Ok(ShiftedLimit {
        operator: l,
        inhomogeneity: g,
        limit,
    })
}
