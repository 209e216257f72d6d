//! Precision-tagged wrappers around MPFR floats.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where a numeric value came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Series,
    Quadrature,
    ExactCast,
    Derived,
}

impl Provenance {
    fn combine(self, other: Provenance) -> Provenance {
        if self == other {
            self
        } else {
            Provenance::Derived
        }
    }
}

/// Bits needed to carry `digits` decimal digits.
pub fn bits_for_digits(digits: u32) -> u32 {
    ((digits as f64) * std::f64::consts::LOG2_10).ceil() as u32
}

/// Decimal digits carried by `bits` bits.
pub fn digits_for_bits(bits: u32) -> u32 {
    ((bits as f64) / std::f64::consts::LOG2_10).floor() as u32
}

/// `10^-digits` at the given precision.
pub fn ten_pow_neg(digits: i32, prec: u32) -> Float {
    Float::with_val(prec, 10).pow(-digits)
}

/// Fixed-point decimal rendering of `x` with exactly `digits` fractional digits.
pub fn float_to_fixed(x: &Float, digits: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x.is_sign_negative() { "-inf".into() } else { "inf".into() };
    }
    let scale = Integer::from(10).pow(digits as u32);
    let scaled = Float::with_val(x.prec() + 64, x * &scale);
    let n = scaled.to_integer().unwrap_or_default();
    let neg = n < 0;
    let s = n.abs().to_string();
    let s = if s.len() <= digits {
        format!("{}{}", "0".repeat(digits + 1 - s.len()), s)
    } else {
        s
    };
    let (int, frac) = s.split_at(s.len() - digits);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

/// Parses a plain decimal or scientific literal.
pub fn parse_float(text: &str, prec: u32) -> Result<Float> {
    let parsed = Float::parse(text.trim())
        .map_err(|e| Error::domain(format!("bad decimal '{}': {e}", text.trim())))?;
    Ok(Float::with_val(prec, parsed))
}

#[derive(Clone, Debug)]
pub struct BigReal {
    value: Float,
    provenance: Provenance,
}

impl BigReal {
    pub fn new(value: Float, provenance: Provenance) -> Self {
        BigReal { value, provenance }
    }

    pub fn zero(prec: u32) -> Self {
        BigReal::new(Float::new(prec), Provenance::ExactCast)
    }

    pub fn from_rational(q: &Rational, prec: u32) -> Self {
        BigReal::new(Float::with_val(prec, q), Provenance::ExactCast)
    }

    pub fn from_i64(n: i64, prec: u32) -> Self {
        BigReal::new(Float::with_val(prec, n), Provenance::ExactCast)
    }

    pub fn pi(prec: u32) -> Self {
        BigReal::new(Float::with_val(prec, Constant::Pi), Provenance::Series)
    }

    pub fn parse(text: &str, prec: u32) -> Result<Self> {
        Ok(BigReal::new(parse_float(text, prec)?, Provenance::ExactCast))
    }

    pub fn prec(&self) -> u32 {
        self.value.prec()
    }

    pub fn value(&self) -> &Float {
        &self.value
    }

    pub fn into_float(self) -> Float {
        self.value
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn abs(&self) -> Self {
        BigReal::new(self.value.clone().abs(), self.provenance)
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }

    /// Rounds to a new precision (explicit, never implicit).
    pub fn round_to(&self, prec: u32) -> Self {
        BigReal::new(Float::with_val(prec, &self.value), self.provenance)
    }

    pub fn to_fixed(&self, digits: usize) -> String {
        float_to_fixed(&self.value, digits)
    }

    /// Fixed-point rendering with all digits the precision supports.
    pub fn to_fixed_full(&self) -> String {
        self.to_fixed(digits_for_bits(self.prec()) as usize)
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match f.precision() {
            Some(p) => f.write_str(&self.to_fixed(p)),
            None => f.write_str(&self.to_fixed_full()),
        }
    }
}

macro_rules! real_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&BigReal> for &BigReal {
            type Output = BigReal;
            fn $method(self, rhs: &BigReal) -> BigReal {
                let prec = self.prec().min(rhs.prec());
                BigReal::new(
                    Float::with_val(prec, &self.value $op &rhs.value),
                    self.provenance.combine(rhs.provenance),
                )
            }
        }
        impl $trait<BigReal> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                (&self).$method(&rhs)
            }
        }
    };
}

real_binop!(Add, add, +);
real_binop!(Sub, sub, -);
real_binop!(Mul, mul, *);
real_binop!(Div, div, /);

impl Neg for &BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal::new(-self.value.clone(), self.provenance)
    }
}

impl Neg for BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        -&self
    }
}

/// Complex value as a pair of MPFR floats of equal precision.
#[derive(Clone, Debug)]
pub struct BigComplex {
    pub re: Float,
    pub im: Float,
    pub provenance: Provenance,
}

impl BigComplex {
    pub fn new(re: Float, im: Float, provenance: Provenance) -> Self {
        BigComplex { re, im, provenance }
    }

    pub fn zero(prec: u32) -> Self {
        BigComplex::new(Float::new(prec), Float::new(prec), Provenance::ExactCast)
    }

    pub fn from_real(re: Float) -> Self {
        let prec = re.prec();
        BigComplex::new(re, Float::new(prec), Provenance::ExactCast)
    }

    pub fn from_parts_f(re: impl Into<f64>, im: impl Into<f64>, prec: u32) -> Self {
        BigComplex::new(
            Float::with_val(prec, re.into()),
            Float::with_val(prec, im.into()),
            Provenance::ExactCast,
        )
    }

    /// `e^{iθ}`.
    pub fn cis(theta: &Float) -> Self {
        let prec = theta.prec();
        let (s, c) = theta.clone().sin_cos(Float::new(prec));
        BigComplex::new(c, s, Provenance::Derived)
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().min(self.im.prec())
    }

    pub fn real_part(&self) -> BigReal {
        BigReal::new(self.re.clone(), self.provenance)
    }

    pub fn imag_part(&self) -> BigReal {
        BigReal::new(self.im.clone(), self.provenance)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn arg(&self) -> Float {
        Float::with_val(self.prec(), self.im.atan2_ref(&self.re))
    }

    pub fn conj(&self) -> Self {
        BigComplex::new(self.re.clone(), -self.im.clone(), self.provenance)
    }

    pub fn scale(&self, s: &Float) -> Self {
        let p = self.prec();
        BigComplex::new(
            Float::with_val(p, &self.re * s),
            Float::with_val(p, &self.im * s),
            self.provenance,
        )
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Self {
        BigComplex::new(self.abs().ln(), self.arg(), Provenance::Derived)
    }

    pub fn exp(&self) -> Self {
        let r = self.re.clone().exp();
        let (s, c) = self.im.clone().sin_cos(Float::new(self.prec()));
        BigComplex::new(r.clone() * c, r * s, Provenance::Derived)
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut acc = BigComplex::from_parts_f(1.0, 0.0, self.prec());
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_fixed(&self, digits: usize) -> (String, String) {
        (float_to_fixed(&self.re, digits), float_to_fixed(&self.im, digits))
    }
}

impl fmt::Display for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = f.precision().unwrap_or(digits_for_bits(self.prec()) as usize);
        let (re, im) = self.to_fixed(d);
        if im.starts_with('-') {
            write!(f, "{re} - {}i", &im[1..])
        } else {
            write!(f, "{re} + {im}i")
        }
    }
}

impl Add<&BigComplex> for &BigComplex {
    type Output = BigComplex;
    fn add(self, rhs: &BigComplex) -> BigComplex {
        let p = self.prec().min(rhs.prec());
        BigComplex::new(
            Float::with_val(p, &self.re + &rhs.re),
            Float::with_val(p, &self.im + &rhs.im),
            self.provenance.combine(rhs.provenance),
        )
    }
}

impl Sub<&BigComplex> for &BigComplex {
    type Output = BigComplex;
    fn sub(self, rhs: &BigComplex) -> BigComplex {
        let p = self.prec().min(rhs.prec());
        BigComplex::new(
            Float::with_val(p, &self.re - &rhs.re),
            Float::with_val(p, &self.im - &rhs.im),
            self.provenance.combine(rhs.provenance),
        )
    }
}

impl Mul<&BigComplex> for &BigComplex {
    type Output = BigComplex;
    fn mul(self, rhs: &BigComplex) -> BigComplex {
        let p = self.prec().min(rhs.prec());
        let re = Float::with_val(p, &self.re * &rhs.re) - Float::with_val(p, &self.im * &rhs.im);
        let im = Float::with_val(p, &self.re * &rhs.im) + Float::with_val(p, &self.im * &rhs.re);
        BigComplex::new(re, im, self.provenance.combine(rhs.provenance))
    }
}

impl Div<&BigComplex> for &BigComplex {
    type Output = BigComplex;
    fn div(self, rhs: &BigComplex) -> BigComplex {
        let p = self.prec().min(rhs.prec());
        let den = Float::with_val(p, rhs.re.square_ref()) + Float::with_val(p, rhs.im.square_ref());
        let num = self * &rhs.conj();
        BigComplex::new(num.re / &den, num.im / &den, num.provenance)
    }
}

impl Neg for &BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex::new(-self.re.clone(), -self.im.clone(), self.provenance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point_rendering() {
        let x = Float::with_val(128, 1) / 3u32;
        assert_eq!(float_to_fixed(&x, 5), "0.33333");
        let y = Float::with_val(128, -2.5);
        assert_eq!(float_to_fixed(&y, 2), "-2.50");
        assert_eq!(float_to_fixed(&Float::with_val(64, 0.004), 2), "0.00");
        assert_eq!(float_to_fixed(&Float::with_val(64, 12), 0), "12");
    }

    #[test]
    fn mixed_precision_takes_minimum() {
        let a = BigReal::from_i64(1, 200);
        let b = BigReal::from_i64(3, 100);
        let c = &a / &b;
        assert_eq!(c.prec(), 100);
        assert_eq!(c.provenance(), Provenance::ExactCast);
    }

    #[test]
    fn complex_log_exp_round_trip() {
        let z = BigComplex::from_parts_f(0.3, -1.7, 200);
        let w = z.ln().exp();
        let diff = (&w - &z).abs();
        assert!(diff < 1e-55);
    }
}
