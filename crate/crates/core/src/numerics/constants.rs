//! Named constants, each evaluated by two independent methods that must agree.

use std::fmt;
use std::str::FromStr;

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer};

use super::real::{BigReal, Provenance};
use crate::error::{Error, Result};

const GUARD_BITS: u32 = 32;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum NamedConstant {
    One,
    Pi,
    Zeta2,
    Zeta3,
    Log2,
    /// π³/√3
    Pi3Sqrt3,
    /// Dirichlet L-value L(χ₃, 3) for the character mod 3.
    LChi3_3,
    Sqrt(u32),
}

impl NamedConstant {
    pub fn label(&self) -> String {
        match self {
            NamedConstant::One => "one".into(),
            NamedConstant::Pi => "pi".into(),
            NamedConstant::Zeta2 => "zeta2".into(),
            NamedConstant::Zeta3 => "zeta3".into(),
            NamedConstant::Log2 => "log2".into(),
            NamedConstant::Pi3Sqrt3 => "pi3_sqrt3".into(),
            NamedConstant::LChi3_3 => "L_chi3_3".into(),
            NamedConstant::Sqrt(n) => format!("sqrt({n})"),
        }
    }

    pub fn value(&self, prec: u32) -> Result<BigReal> {
        named_constant(self, prec)
    }
}

impl fmt::Display for NamedConstant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for NamedConstant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Ok(match s {
            "one" | "1" => NamedConstant::One,
            "pi" => NamedConstant::Pi,
            "zeta2" => NamedConstant::Zeta2,
            "zeta3" => NamedConstant::Zeta3,
            "log2" => NamedConstant::Log2,
            "pi3_sqrt3" => NamedConstant::Pi3Sqrt3,
            "L_chi3_3" => NamedConstant::LChi3_3,
            _ => {
                let inner = s
                    .strip_prefix("sqrt(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| Error::domain(format!("unknown constant '{s}'")))?;
                let n: u32 = inner
                    .parse()
                    .map_err(|_| Error::domain(format!("bad sqrt argument '{inner}'")))?;
                NamedConstant::Sqrt(n)
            }
        })
    }
}

/// Evaluates a named constant by two methods and checks agreement to 4 ulps.
pub fn named_constant(c: &NamedConstant, prec: u32) -> Result<BigReal> {
    let wp = prec + GUARD_BITS;
    let (a, b) = match c {
        NamedConstant::One => return Ok(BigReal::from_i64(1, prec)),
        NamedConstant::Pi => (Float::with_val(wp, Constant::Pi), pi_machin(wp)),
        NamedConstant::Zeta2 => {
            let pi = Float::with_val(wp, Constant::Pi);
            (pi.square() / 6u32, zeta2_central_binomial(wp))
        }
        NamedConstant::Zeta3 => (Float::with_val(wp, Float::zeta_u(3)), zeta3_central_binomial(wp)),
        NamedConstant::Log2 => (Float::with_val(wp, Constant::Log2), log2_series(wp)),
        NamedConstant::Pi3Sqrt3 => {
            let s3 = Float::with_val(wp, 3).sqrt();
            let a = Float::with_val(wp, Constant::Pi).pow(3u32) / &s3;
            let b = pi_machin(wp).pow(3u32) / s3;
            (a, b)
        }
        NamedConstant::LChi3_3 => {
            let closed = Float::with_val(wp, Constant::Pi).pow(3u32) * 4u32
                / (Float::with_val(wp, 3).sqrt() * 81u32);
            (l_chi3_dirichlet(3, wp), closed)
        }
        NamedConstant::Sqrt(n) => {
            let a = Float::with_val(wp, *n).sqrt();
            (a.clone(), sqrt_newton(*n, wp))
        }
    };
    let tol = Float::with_val(wp, a.clone().abs()) * Float::with_val(wp, 2).pow(-(prec as i32) + 2);
    let diff = Float::with_val(wp, &a - &b).abs();
    if diff > tol {
        return Err(Error::Consistency(format!(
            "two evaluations of {} disagree by {}",
            c.label(),
            diff.to_f64()
        )));
    }
    Ok(BigReal::new(Float::with_val(prec, &a), Provenance::Series))
}

/// Convenience wrapper parsing the label.
pub fn named_constant_str(label: &str, prec: u32) -> Result<BigReal> {
    named_constant(&label.parse()?, prec)
}

fn arctan_inv(n: u32, prec: u32) -> Float {
    // atan(1/n) = Σ (-1)^k / ((2k+1) n^{2k+1})
    let n2 = Integer::from(n) * n;
    let mut pow = Integer::from(n);
    let mut sum = Float::new(prec);
    let eps = Float::with_val(prec, 2).pow(-(prec as i32) - 8);
    let mut k = 0u32;
    loop {
        let term = Float::with_val(prec, 1) / (Float::with_val(prec, &pow) * (2 * k + 1));
        if k % 2 == 0 {
            sum += &term;
        } else {
            sum -= &term;
        }
        if term < eps {
            return sum;
        }
        pow *= &n2;
        k += 1;
    }
}

fn pi_machin(prec: u32) -> Float {
    arctan_inv(5, prec) * 16u32 - arctan_inv(239, prec) * 4u32
}

/// ζ(2) = 3 Σ 1/(n² C(2n,n)).
fn zeta2_central_binomial(prec: u32) -> Float {
    central_binomial_sum(prec, 2, false) * 3u32
}

/// ζ(3) = (5/2) Σ (-1)^{n+1} / (n³ C(2n,n)).
fn zeta3_central_binomial(prec: u32) -> Float {
    central_binomial_sum(prec, 3, true) * 5u32 / 2u32
}

fn central_binomial_sum(prec: u32, power: u32, alternating: bool) -> Float {
    let eps = Float::with_val(prec, 2).pow(-(prec as i32) - 8);
    let mut binom = Integer::from(1);
    let mut sum = Float::new(prec);
    let mut n = 1u32;
    loop {
        binom = binom * (2 * n) * (2 * n - 1) / (n * n);
        let den = Integer::from(n).pow(power) * &binom;
        let term = Float::with_val(prec, 1) / Float::with_val(prec, &den);
        if alternating && n % 2 == 0 {
            sum -= &term;
        } else {
            sum += &term;
        }
        if term < eps {
            return sum;
        }
        n += 1;
    }
}

fn log2_series(prec: u32) -> Float {
    let eps = Float::with_val(prec, 2).pow(-(prec as i32) - 8);
    let mut sum = Float::new(prec);
    let mut k = 1u32;
    loop {
        let term = Float::with_val(prec, 2).pow(-(k as i32)) / k;
        sum += &term;
        if term < eps {
            return sum;
        }
        k += 1;
    }
}

fn sqrt_newton(n: u32, prec: u32) -> Float {
    let target = Float::with_val(prec, n);
    let mut x = Float::with_val(prec, (n as f64).sqrt().max(1.0));
    let mut steps = 0;
    while steps < 2 * (prec as usize).ilog2() as usize + 8 {
        x = (x.clone() + Float::with_val(prec, &target / &x)) / 2u32;
        steps += 1;
    }
    x
}

/// Even Bernoulli number B_{2j} (j ≥ 1) as a float, from ζ(2j).
pub fn bernoulli_even(j: u32, prec: u32) -> Float {
    let wp = prec + 16;
    let two_pi = Float::with_val(wp, Constant::Pi) * 2u32;
    let fact = Float::with_val(wp, Integer::from(Integer::factorial(2 * j)));
    let z = Float::with_val(wp, Float::zeta_u(2 * j));
    let mut b = z * fact * 2u32 / two_pi.pow(2 * j);
    if j % 2 == 0 {
        b = -b;
    }
    Float::with_val(prec, b)
}

/// ζ(s) for integer s, including s ≤ 0.
pub fn zeta_int(s: i64, prec: u32) -> Result<Float> {
    if s == 1 {
        return Err(Error::domain("zeta has a pole at s = 1"));
    }
    if s >= 2 {
        return Ok(Float::with_val(prec, Float::zeta_u(s as u32)));
    }
    if s == 0 {
        return Ok(Float::with_val(prec, -0.5));
    }
    let m = (-s) as u32;
    if m % 2 == 0 {
        return Ok(Float::new(prec));
    }
    // ζ(-m) = -B_{m+1}/(m+1)
    Ok(-bernoulli_even((m + 1) / 2, prec) / (m + 1))
}

/// Hurwitz zeta ζ(s, a) for integer s ≥ 2 and a > 0 by Euler-Maclaurin.
pub fn hurwitz_zeta(s: u32, a: &Float, prec: u32) -> Result<Float> {
    if s < 2 {
        return Err(Error::domain("hurwitz_zeta needs s >= 2"));
    }
    if *a <= 0 {
        return Err(Error::domain("hurwitz_zeta needs a > 0"));
    }
    let wp = prec + 32;
    let n_terms = (prec / 2).max(20);
    let m_terms = (prec / 4).max(10);
    let a = Float::with_val(wp, a);
    let mut sum = Float::new(wp);
    for n in 0..n_terms {
        let x = Float::with_val(wp, &a + n);
        sum += x.pow(-(s as i32));
    }
    let big_n = Float::with_val(wp, &a + n_terms);
    sum += Float::with_val(wp, big_n.clone().pow(1 - s as i32)) / (s - 1);
    sum += Float::with_val(wp, big_n.clone().pow(-(s as i32))) / 2u32;
    let mut rising = Float::with_val(wp, s); // s (s+1) ... (s+2j-2)
    let mut fact = Float::with_val(wp, 2); // (2j)!
    let mut npow = Float::with_val(wp, big_n.clone().pow(-(s as i32) - 1));
    let n2 = Float::with_val(wp, big_n.square_ref());
    for j in 1..=m_terms {
        if j > 1 {
            rising *= (s + 2 * j - 3) * (s + 2 * j - 2);
            fact *= (2 * j - 1) * (2 * j);
            npow /= &n2;
        }
        let b = bernoulli_even(j, wp);
        sum += b / &fact * &rising * &npow;
    }
    Ok(Float::with_val(prec, sum))
}

/// L(χ₃, s) = 3^{-s} (ζ(s,1/3) - ζ(s,2/3)).
fn l_chi3_dirichlet(s: u32, prec: u32) -> Float {
    let third = Float::with_val(prec, 1) / 3u32;
    let two_thirds = Float::with_val(prec, 2) / 3u32;
    let a = hurwitz_zeta(s, &third, prec).expect("valid arguments");
    let b = hurwitz_zeta(s, &two_thirds, prec).expect("valid arguments");
    (a - b) / Float::with_val(prec, 3).pow(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &Float, b: &str, digits: i32) -> bool {
        let b = Float::with_val(a.prec(), Float::parse(b).unwrap());
        Float::with_val(a.prec(), a - &b).abs() < Float::with_val(64, 10).pow(-digits)
    }

    #[test]
    fn known_decimal_values() {
        let z2 = named_constant(&NamedConstant::Zeta2, 256).unwrap();
        assert!(close(z2.value(), "1.64493406684822643647", 20));
        let z3 = named_constant(&NamedConstant::Zeta3, 256).unwrap();
        assert!(close(z3.value(), "1.20205690315959428540", 20));
        let l2 = named_constant(&NamedConstant::Log2, 256).unwrap();
        assert!(close(l2.value(), "0.69314718055994530942", 20));
    }

    #[test]
    fn l_chi3_both_methods_at_high_precision() {
        let l = named_constant(&NamedConstant::LChi3_3, 1024).unwrap();
        // L(χ₃,3) = 0.8840238117500798567...
        assert!(close(l.value(), "0.88402381175007985674", 20));
    }

    #[test]
    fn zeta_negative_integers() {
        assert!(close(&zeta_int(-1, 128).unwrap(), "-0.0833333333333333333333", 20));
        assert!(close(&zeta_int(-3, 128).unwrap(), "0.00833333333333333333333", 20));
        assert!(zeta_int(-2, 128).unwrap().is_zero());
        assert!(zeta_int(1, 128).is_err());
    }

    #[test]
    fn hurwitz_at_one_is_riemann() {
        let one = Float::with_val(256, 1);
        let h = hurwitz_zeta(3, &one, 256).unwrap();
        let z = Float::with_val(256, Float::zeta_u(3));
        assert!(Float::with_val(256, h - z).abs() < Float::with_val(64, 2).pow(-240));
    }

    #[test]
    fn labels_round_trip() {
        for c in [
            NamedConstant::One,
            NamedConstant::Pi,
            NamedConstant::Zeta2,
            NamedConstant::Zeta3,
            NamedConstant::Log2,
            NamedConstant::Pi3Sqrt3,
            NamedConstant::LChi3_3,
            NamedConstant::Sqrt(5),
        ] {
            assert_eq!(c.label().parse::<NamedConstant>().unwrap(), c);
        }
        assert!("zeta7".parse::<NamedConstant>().is_err());
    }
}
