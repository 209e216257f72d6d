//! Recovering an annihilating operator of given order and degree from a
//! series prefix by exact nullspace computation.

use rug::{Integer, Rational};

use crate::diffop::DiffOperator;
use crate::error::{Error, Result};
use crate::laurent::RationalSequence;
use crate::poly::QPoly;

pub const DEFAULT_GUARD: usize = 10;

const SCREEN_PRIME: u64 = 0x3fff_ffff_ffff_ffc7;

/// Linear constraints Σ_{i,j} β_ij (m−i)^j u_{m−i} = 0, one row per m,
/// each scaled to integers. Column index is i·(r+1) + j.
fn constraint_rows(u: &[Rational], r: usize, d: usize, count: usize) -> Vec<Vec<Integer>> {
    let n = (d + 1) * (r + 1);
    (0..count)
        .map(|m| {
            let mut row = vec![Rational::new(); n];
            for i in 0..=d.min(m) {
                let k = (m - i) as i64;
                let mut pw = Rational::from(1);
                for j in 0..=r {
                    row[i * (r + 1) + j] = Rational::from(&pw * &u[m - i]);
                    pw *= k;
                }
            }
            let den = row
                .iter()
                .fold(Integer::from(1), |acc, x| acc.lcm(x.denom()));
            row.into_iter()
                .map(|x| Integer::from(x.numer() * Integer::from(&den / x.denom())))
                .collect()
        })
        .collect()
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    acc
}

/// Rank modulo a word-size prime; a lower bound for the rank over ℚ.
fn rank_mod_p(rows: &[Vec<Integer>], p: u64) -> usize {
    let modulus = Integer::from(p);
    let mut m: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| r.iter().map(|x| <(Integer, Integer)>::from(x.div_rem_euc_ref(&modulus)).1.to_u64().unwrap()).collect())
        .collect();
    let ncols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..ncols {
        let Some(piv) = (rank..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let inv = powmod(m[rank][c], p - 2, p);
        for i in rank + 1..m.len() {
            if m[i][c] == 0 {
                continue;
            }
            let f = mulmod(m[i][c], inv, p);
            for j in c..ncols {
                let sub = mulmod(f, m[rank][j], p);
                m[i][j] = (m[i][j] + p - sub) % p;
            }
        }
        rank += 1;
    }
    rank
}

/// Basis of the rational nullspace via fraction-free (Bareiss) elimination.
fn nullspace(mut m: Vec<Vec<Integer>>, ncols: usize) -> Vec<Vec<Rational>> {
    let mut pivots = Vec::new();
    let mut prev = Integer::from(1);
    let mut row = 0;
    for c in 0..ncols {
        let Some(piv) = (row..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(row, piv);
        for i in row + 1..m.len() {
            for j in c + 1..ncols {
                let v = Integer::from(&m[row][c] * &m[i][j]) - Integer::from(&m[i][c] * &m[row][j]);
                m[i][j] = v.div_exact(&prev);
            }
            m[i][c] = Integer::new();
        }
        prev = m[row][c].clone();
        pivots.push(c);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![Rational::new(); ncols];
            x[f] = Rational::from(1);
            for (k, &pc) in pivots.iter().enumerate().rev() {
                let mut s = Rational::new();
                for j in pc + 1..ncols {
                    if x[j] != 0 && m[k][j] != 0 {
                        s += Rational::from(&x[j] * &m[k][j]);
                    }
                }
                x[pc] = -s / &m[k][pc];
            }
            x
        })
        .collect()
}

fn operator_from(x: &[Rational], r: usize, d: usize) -> DiffOperator {
    DiffOperator::new(
        (0..=d)
            .map(|i| QPoly::new(x[i * (r + 1)..(i + 1) * (r + 1)].to_vec()))
            .collect(),
    )
}

/// Operator of order ≤ r and degree ≤ d annihilating Σ u_k t^k through the
/// whole prefix, normalized.
pub fn fit_operator(u: &RationalSequence, r: usize, d: usize, guard: usize) -> Result<DiffOperator> {
    let n = (d + 1) * (r + 1);
    let needed = n + guard;
    if u.len() < needed {
        return Err(Error::domain(format!(
            "fit with order {r}, degree {d} and guard {guard} needs {needed} terms, got {}",
            u.len()
        )));
    }
    if u.terms()[0] == 0 {
        return Err(Error::domain("leading term u_0 is zero"));
    }
    let rows = constraint_rows(u.terms(), r, d, needed);
    if rank_mod_p(&rows, SCREEN_PRIME) == n {
        return Err(Error::NotFound);
    }
    let basis = nullspace(rows, n);
    match basis.len() {
        0 => Err(Error::NotFound),
        1 => {
            let l = operator_from(&basis[0], r, d).normalized();
            if l.apply_to_series(u).is_zero() {
                Ok(l)
            } else {
                Err(Error::NotFound)
            }
        }
        k => Err(Error::AmbiguousFit(
            k,
            basis.iter().map(|x| operator_from(x, r, d).normalized().to_text()).collect(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn seq(len: usize, next: impl Fn(usize, &Rational) -> Rational) -> RationalSequence {
        let mut v = vec![Rational::from(1)];
        for m in 1..len {
            let x = next(m, &v[m - 1]);
            v.push(x);
        }
        RationalSequence::new(v)
    }

    fn trinomial(len: usize) -> RationalSequence {
        seq(len, |m, prev| {
            let m = m as i64;
            Rational::from(prev * Integer::from(3 * (3 * m - 1) * (3 * m - 2))) / (m * m)
        })
    }

    #[test]
    fn trinomial_operator() {
        let l = fit_operator(&trinomial(30), 2, 1, 10).unwrap();
        assert_eq!(l, DiffOperator::parse("D^2 - 3*t*(3*D+1)*(3*D+2)").unwrap());
    }

    #[test]
    fn scale_invariant() {
        let u = trinomial(30);
        let a = fit_operator(&u, 2, 1, 10).unwrap();
        let b = fit_operator(&u.scale(&Rational::from((-7, 3))), 2, 1, 10).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn random_is_not_found() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = RationalSequence::new(
            (0..30)
                .map(|_| Rational::from((rng.gen_range(-1000i64..1000), rng.gen_range(1i64..50))))
                .map(|x| if x == 0 { Rational::from(1) } else { x })
                .collect(),
        );
        assert!(matches!(fit_operator(&u, 2, 1, 10), Err(Error::NotFound)));
    }

    #[test]
    fn too_short() {
        assert!(matches!(fit_operator(&trinomial(10), 2, 1, 10), Err(Error::Domain(_))));
    }

    #[test]
    fn oversized_fit_is_ambiguous() {
        // the order-2 operator times (δ − a) for every a, so the space is 2-dimensional
        assert!(matches!(fit_operator(&trinomial(40), 3, 1, 10), Err(Error::AmbiguousFit(2, _))));
    }
}
