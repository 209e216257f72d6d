//! Taylor coefficients v_k of the truncated higher normal function, and the
//! directly computed values V(0) for the cases without coefficient integrals.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Rational};

use super::polylog::polylog;
use super::quad::{integrate_components, tanh_sinh_integrate, IntegrationRegion, QuadOptions};
use super::real::{bits_for_digits, BigComplex, BigReal, Provenance};
use crate::error::{Error, Result};
use crate::laurent::LaurentPolynomial;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ThnfMethod {
    /// ∫_region [φ^k]_{x_e^0} ∏ dx_i/x_i over a graph-bounded planar region.
    Quadrature2d { eliminate: usize, region: IntegrationRegion },
    /// ∫_{[0,1]³} ∏ X_i^k (1−X_i)^k / (1 − X₃(1 − X₁X₂))^{k+1} dX.
    Quadrature3d,
    /// V(0) = 4 ∫₀¹ log²u / (1 − u²) du.
    ClosedForm1d,
    /// V(0) = [4Li₃(u) − 4Li₂(u) log u + (1/3) log³u] from e^{−πi/3} to e^{πi/3}.
    Contour,
}

impl ThnfMethod {
    pub fn label(&self) -> &'static str {
        match self {
            ThnfMethod::Quadrature2d { .. } => "quadrature-2d",
            ThnfMethod::Quadrature3d => "quadrature-3d",
            ThnfMethod::ClosedForm1d => "closed-form-1d",
            ThnfMethod::Contour => "contour",
        }
    }

    /// Whether the method yields Taylor coefficients (otherwise only V(0)).
    pub fn has_coefficients(&self) -> bool {
        matches!(self, ThnfMethod::Quadrature2d { .. } | ThnfMethod::Quadrature3d)
    }
}

#[derive(Clone, Debug)]
pub struct ThnfValue {
    pub value: BigComplex,
    pub error: BigReal,
    /// Independent evaluation where one exists (closed form or quadrature).
    pub cross_check: Option<BigComplex>,
}

/// Computes v_k (or V(0) for the closed-form and contour methods).
pub fn thnf_coefficient(
    method: &ThnfMethod,
    phi: Option<&LaurentPolynomial>,
    k: u32,
    digits: u32,
) -> Result<ThnfValue> {
    if k > 3 {
        return Err(Error::domain("coefficients are supported for k ≤ 3"));
    }
    match method {
        ThnfMethod::Quadrature2d { eliminate, region } => {
            let phi = phi.ok_or_else(|| Error::domain("quadrature-2d needs a Laurent polynomial"))?;
            log_measure_coefficient(phi, *eliminate, region, k, digits)
        }
        ThnfMethod::Quadrature3d => cube_coefficient(k, digits),
        ThnfMethod::ClosedForm1d | ThnfMethod::Contour if k > 0 => Err(Error::domain(format!(
            "{} computes V(0) only",
            method.label()
        ))),
        ThnfMethod::ClosedForm1d => log_squared_value(digits),
        ThnfMethod::Contour => contour_value(digits),
    }
}

fn real_value(r: super::quad::QuadResult) -> ThnfValue {
    ThnfValue {
        value: BigComplex::from_real(r.value.value().clone()).with(Provenance::Quadrature),
        error: r.error,
        cross_check: None,
    }
}

trait WithProvenance {
    fn with(self, p: Provenance) -> Self;
}

impl WithProvenance for BigComplex {
    fn with(mut self, p: Provenance) -> Self {
        self.provenance = p;
        self
    }
}

fn log_measure_coefficient(
    phi: &LaurentPolynomial,
    eliminate: usize,
    region: &IntegrationRegion,
    k: u32,
    digits: u32,
) -> Result<ThnfValue> {
    let integrand = phi.partial_constant_term(k, eliminate)?;
    if integrand.num_vars() != region.num_vars {
        return Err(Error::domain("region does not match the reduced variables"));
    }
    let n = integrand.num_vars();
    // divide by the product of all variables for the logarithmic measure
    let mut monomial = vec![0; n];
    for ax in &region.axes {
        monomial[ax.var] = 1;
    }
    let integrand = integrand.divide_by_monomial(&LaurentPolynomial::monomial(monomial, Rational::from(1)))?;
    // near the corners individual monomials blow up like x^{-neg}; carry enough
    // bits for their cancellation at the smallest node distance
    let neg = integrand.max_negative_degree();
    let prec = bits_for_digits(digits + 8) * (neg + 1) + 64;
    let compiled = integrand.compile(prec);
    let r = tanh_sinh_integrate(|x| compiled.eval(x), region, digits, prec)?;
    Ok(real_value(r))
}

/// ∫₀¹ X^k (1−X)^k / (1 − cX)^{k+1} dX for 0 ≤ c < 1.
fn inner_cube_integral(k: u32, c: &Float, prec: u32) -> Float {
    if *c < 0.125 {
        // Σ_n C(n+k, k) B(n+k+1, k+1) c^n; the term ratio is c·(n+k+1)²/((n+1)(n+2k+2))
        let mut term = Float::with_val(prec, 1);
        for j in 1..=k {
            term *= j;
            term /= k + j;
        }
        term /= 2 * k + 1;
        let mut sum = term.clone();
        let eps = Float::with_val(prec, 2).pow(-(prec as i32));
        for n in 0u32.. {
            term *= c;
            term *= (n + k + 1) * (n + k + 1);
            term /= (n + 1) * (n + 2 * k + 2);
            sum += &term;
            if Float::with_val(prec, term.abs_ref()) < Float::with_val(prec, &sum * &eps) {
                break;
            }
        }
        return sum;
    }
    // u = 1 − cX: ∫_s^1 ((1−u)(u−s))^k u^{−k−1} du / c^{2k+1} with s = 1 − c
    let s = Float::with_val(prec, 1 - c);
    let factor = [Float::with_val(prec, -&s), Float::with_val(prec, 1 + &s), Float::with_val(prec, -1)];
    let mut poly = vec![Float::with_val(prec, 1)];
    for _ in 0..k {
        let mut next = vec![Float::new(prec); poly.len() + 2];
        for (i, a) in poly.iter().enumerate() {
            for (j, b) in factor.iter().enumerate() {
                next[i + j] += Float::with_val(prec, a * b);
            }
        }
        poly = next;
    }
    let mut acc = Float::new(prec);
    for (j, a) in poly.iter().enumerate() {
        let e = j as i32 - k as i32;
        let piece = if e == 0 {
            -Float::with_val(prec, s.ln_ref())
        } else {
            (Float::with_val(prec, 1) - Float::with_val(prec, (&s).pow(e))) / e
        };
        acc += piece * a;
    }
    acc / Float::with_val(prec, c.pow(2 * k + 1))
}

fn cube_coefficient(k: u32, digits: u32) -> Result<ThnfValue> {
    // the X₃ integral is done in closed form, leaving a square
    let prec = bits_for_digits(digits + 8) * 2 + 32;
    let region = IntegrationRegion::cube(2);
    let r = tanh_sinh_integrate(
        |x| {
            let xy = Float::with_val(prec, &x[0] * &x[1]);
            let c = Float::with_val(prec, 1 - xy);
            let mut weight = Float::with_val(prec, 1);
            for xi in x {
                let one_minus = Float::with_val(prec, 1 - xi);
                weight *= Float::with_val(prec, xi * &one_minus).pow(k);
            }
            weight * inner_cube_integral(k, &c, prec)
        },
        &region,
        digits,
        prec,
    )?;
    Ok(real_value(r))
}

fn log_squared_value(digits: u32) -> Result<ThnfValue> {
    let prec = bits_for_digits(digits + 8) * 2 + 32;
    let region = IntegrationRegion::interval(Rational::new(), Rational::from(1));
    let r = tanh_sinh_integrate(
        |x| {
            let u = &x[0];
            let l = Float::with_val(prec, u.ln_ref());
            let den = Float::with_val(prec, 1 - Float::with_val(prec, u.square_ref()));
            l.square() * 4u32 / den
        },
        &region,
        digits,
        prec,
    )?;
    let z3 = Float::with_val(prec, Float::zeta_u(3)) * 7u32;
    let mut out = real_value(r);
    out.cross_check = Some(BigComplex::from_real(z3));
    Ok(out)
}

/// Antiderivative 4Li₃(u) − 4Li₂(u) log u + (1/3) log³u.
fn contour_antiderivative(u: &BigComplex, prec: u32) -> Result<BigComplex> {
    let li3 = polylog(3, u, prec)?;
    let li2 = polylog(2, u, prec)?;
    let l = u.ln();
    let four = Float::with_val(prec, 4);
    let third = Float::with_val(prec, 1) / 3u32;
    let a = li3.scale(&four);
    let b = (&li2 * &l).scale(&four);
    let c = l.powi(3).scale(&third);
    Ok(&(&a - &b) + &c)
}

fn contour_value(digits: u32) -> Result<ThnfValue> {
    let prec = bits_for_digits(digits + 8) + 64;
    let third_pi = Float::with_val(prec, Constant::Pi) / 3u32;
    let upper = BigComplex::cis(&third_pi);
    let lower = BigComplex::cis(&(-third_pi.clone()));
    let closed = &contour_antiderivative(&upper, prec)? - &contour_antiderivative(&lower, prec)?;

    // path u = e^{iθ}, θ = (π/3)s; integrand (4 log(1−u) + log u) log u du/u
    // becomes −θ (4 log(1 − e^{iθ}) + iθ) dθ; split at the log singularity θ = 0
    let qprec = bits_for_digits(digits + 8) * 2 + 32;
    let tp = Float::with_val(qprec, Constant::Pi) / 3u32;
    let integrand = |s: &[Float]| -> Vec<Float> {
        let theta = Float::with_val(qprec, &s[0] * &tp);
        let half = Float::with_val(qprec, &theta / 2u32);
        let sin_half = Float::with_val(qprec, half.sin_ref());
        let one_minus = BigComplex::new(
            Float::with_val(qprec, sin_half.square_ref()) * 2u32,
            -Float::with_val(qprec, theta.sin_ref()),
            Provenance::Derived,
        );
        let l = one_minus.ln();
        let inner_re = Float::with_val(qprec, &l.re * 4u32);
        let inner_im = Float::with_val(qprec, &l.im * 4u32) + &theta;
        // −θ (inner) · (π/3)
        let scale = Float::with_val(qprec, -(theta.clone()) * &tp);
        vec![inner_re * &scale, inner_im * &scale]
    };
    let mut total = vec![Float::new(qprec), Float::new(qprec)];
    let mut error = Float::new(qprec);
    for (a, b) in [(-1, 0), (0, 1)] {
        let region = IntegrationRegion::interval(Rational::from(a), Rational::from(b));
        let r = integrate_components(integrand, 2, &region, QuadOptions::new(digits, qprec))?;
        for (t, v) in total.iter_mut().zip(r.values) {
            *t += v;
        }
        error += r.error;
    }
    let quad = BigComplex::new(total[0].clone(), total[1].clone(), Provenance::Quadrature);
    let disagreement = (&quad - &closed).abs();
    let tol = Float::with_val(qprec, 10).pow(-(digits as i32) + 2) + &error;
    if disagreement > tol {
        return Err(Error::Consistency(format!(
            "contour closed form and quadrature disagree by {}",
            disagreement.to_f64()
        )));
    }
    let err = Float::with_val(prec, 2).pow(-(prec as i32) + 16);
    Ok(ThnfValue {
        value: closed.with(Provenance::Series),
        error: BigReal::new(err, Provenance::Series),
        cross_check: Some(quad),
    })
}
