//! Polylogarithms Li_n(z) on the closed unit disc.

use rug::ops::Pow;
use rug::Float;

use super::constants::zeta_int;
use super::real::{BigComplex, Provenance};
use crate::error::{Error, Result};

/// Li_n(z) for n ≥ 2 and |z| ≤ 1, principal branch.
///
/// Small arguments use the defining series; the rest of the disc uses the
/// expansion in w = log z, which converges for |w| < 2π.
pub fn polylog(n: u32, z: &BigComplex, prec: u32) -> Result<BigComplex> {
    if n < 2 {
        return Err(Error::domain("polylog order must be at least 2"));
    }
    let wp = prec + 24;
    let z = BigComplex::new(Float::with_val(wp, &z.re), Float::with_val(wp, &z.im), z.provenance);
    let modulus = z.abs();
    let slack = Float::with_val(wp, 2).pow(-(prec as i32) + 4);
    if modulus > Float::with_val(wp, 1) + &slack {
        return Err(Error::domain("polylog argument outside the closed unit disc"));
    }
    let out = if z.is_zero() {
        BigComplex::zero(wp)
    } else if modulus <= 0.5 {
        direct_series(n, &z, wp)
    } else {
        log_expansion(n, &z, wp)?
    };
    Ok(BigComplex::new(
        Float::with_val(prec, &out.re),
        Float::with_val(prec, &out.im),
        Provenance::Series,
    ))
}

fn direct_series(n: u32, z: &BigComplex, wp: u32) -> BigComplex {
    let eps = Float::with_val(wp, 2).pow(-(wp as i32));
    let mut pow = z.clone();
    let mut sum = BigComplex::zero(wp);
    let mut k = 1u32;
    loop {
        let denom = Float::with_val(wp, k).pow(n);
        let term = BigComplex::new(
            Float::with_val(wp, &pow.re / &denom),
            Float::with_val(wp, &pow.im / &denom),
            Provenance::Series,
        );
        sum = &sum + &term;
        if term.abs() < eps {
            return sum;
        }
        pow = &pow * z;
        k += 1;
    }
}

fn log_expansion(n: u32, z: &BigComplex, wp: u32) -> Result<BigComplex> {
    let w = z.ln();
    if w.is_zero() {
        return Ok(BigComplex::from_real(zeta_int(n as i64, wp)?));
    }
    let eps = Float::with_val(wp, 2).pow(-(wp as i32));
    let mut sum = BigComplex::zero(wp);
    // w^k / k!
    let mut wk = BigComplex::from_parts_f(1.0, 0.0, wp);
    let nm1 = n - 1;
    let mut k = 0u32;
    let mut small_run = 0;
    loop {
        if k == nm1 {
            let mut harmonic = Float::new(wp);
            for j in 1..=nm1 {
                harmonic += Float::with_val(wp, 1) / j;
            }
            let log_neg_w = (-&w).ln();
            let factor = BigComplex::new(harmonic - log_neg_w.re, -log_neg_w.im, Provenance::Series);
            sum = &sum + &(&factor * &wk);
        } else {
            let zeta = zeta_int(n as i64 - k as i64, wp)?;
            if !zeta.is_zero() {
                let term = wk.scale(&zeta);
                let small = term.abs() < eps;
                sum = &sum + &term;
                if k > nm1 && small {
                    small_run += 1;
                    if small_run >= 2 {
                        return Ok(sum);
                    }
                } else {
                    small_run = 0;
                }
            }
        }
        k += 1;
        wk = (&wk * &w).scale(&(Float::with_val(wp, 1) / k));
        if k > 20 * wp {
            return Err(Error::NoConvergence("polylog log-expansion".into()));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::constants::{named_constant, NamedConstant};

    fn real(x: f64, prec: u32) -> BigComplex {
        BigComplex::from_parts_f(x, 0.0, prec)
    }

    fn tiny(prec: u32) -> Float {
        Float::with_val(prec, 2).pow(-(prec as i32) + 8)
    }

    #[test]
    fn li2_at_one_is_zeta2() {
        let v = polylog(2, &real(1.0, 256), 256).unwrap();
        let z2 = named_constant(&NamedConstant::Zeta2, 256).unwrap();
        assert!(Float::with_val(256, &v.re - z2.value()).abs() < tiny(256));
        assert!(v.im.is_zero());
    }

    #[test]
    fn li3_difference_at_plus_minus_one() {
        let a = polylog(3, &real(1.0, 256), 256).unwrap();
        let b = polylog(3, &real(-1.0, 256), 256).unwrap();
        let z3 = named_constant(&NamedConstant::Zeta3, 256).unwrap();
        let expect = Float::with_val(256, z3.value() * 7u32) / 4u32;
        let got = Float::with_val(256, &a.re - &b.re);
        assert!(Float::with_val(256, got - expect).abs() < tiny(256));
    }

    #[test]
    fn zero_argument() {
        assert!(polylog(2, &real(0.0, 64), 64).unwrap().is_zero());
        assert!(polylog(3, &real(0.0, 64), 64).unwrap().is_zero());
    }

    #[test]
    fn agrees_across_the_method_switch() {
        // |z| = 0.5 boundary, evaluate just inside and outside with both methods
        let z = BigComplex::from_parts_f(0.3, 0.4, 200);
        let a = direct_series(3, &z, 224);
        let b = log_expansion(3, &z, 224).unwrap();
        assert!((&a - &b).abs() < tiny(200));
    }

    #[test]
    fn outside_disc_is_rejected() {
        assert!(polylog(2, &real(1.5, 64), 64).is_err());
    }

    #[test]
    fn li2_at_minus_one_and_i() {
        // Li2(-1) = -π²/12, Im Li2(i) = Catalan
        let v = polylog(2, &real(-1.0, 200), 200).unwrap();
        let pi = named_constant(&NamedConstant::Pi, 200).unwrap();
        let expect = -Float::with_val(200, pi.value().square_ref()) / 12u32;
        assert!(Float::with_val(200, &v.re - expect).abs() < tiny(200));
        let c = polylog(2, &BigComplex::from_parts_f(0.0, 1.0, 200), 200).unwrap();
        let catalan = Float::with_val(200, rug::float::Constant::Catalan);
        assert!(Float::with_val(200, &c.im - catalan).abs() < tiny(200));
    }
}
