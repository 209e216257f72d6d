//! Randomized property suites shared by the property and acceptance targets.
//! Each suite runs `trials` seeded trials and returns the first failure.

#![allow(dead_code)]

use apery_core::diffop::{deregularize_operator, regularize_operator, regularize_sequence, DiffOperator, Direction};
use apery_core::lattice::{is_reflexive, newton_polytope, polar_dual, LatticePolytope};
use apery_core::laurent::{constant_term_sequence, LaurentPolynomial, RationalSequence};
use apery_core::poly::QPoly;
use apery_core::recognize::integer_relation;
use apery_core::sequences::{apery_limit, shifted_apery_limit, solve_homogeneous, solve_inhomogeneous};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Float, Integer, Rational};

pub const TRIALS: usize = 100;

pub type Outcome = Result<(), String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_poly(r: &mut ChaCha8Rng, deg: usize) -> QPoly {
    QPoly::new((0..=deg).map(|_| Rational::from(r.gen_range(-9i64..=9))).collect())
}

/// L with P_0(m) = c·∏(m + a_j), a_j ≥ 0, so the recurrence never stalls.
fn random_operator(r: &mut ChaCha8Rng) -> DiffOperator {
    let order = r.gen_range(1..=4);
    let degree = r.gen_range(1..=3);
    let mut p0 = QPoly::one();
    for _ in 0..order {
        p0 = &p0 * &QPoly::from_i64(&[r.gen_range(0..=3), 1]);
    }
    let mut rows = vec![p0];
    for _ in 0..degree {
        rows.push(random_poly(r, order));
    }
    if rows[degree].is_zero() {
        rows[degree] = QPoly::one();
    }
    DiffOperator::new(rows)
}

/// Operator/recurrence round trip on random operators and sequences.
pub fn round_trip(trials: usize) -> Outcome {
    let mut r = rng(1);
    for t in 0..trials {
        let l = random_operator(&mut r);
        let u = RationalSequence::new((0..30).map(|_| Rational::from((r.gen_range(-50i64..=50), r.gen_range(1u64..=7)))).collect());
        if l.apply_to_series(&u) != l.to_recurrence().apply(&u) {
            return Err(format!("trial {t}: {l}"));
        }
        let back = DiffOperator::parse(&l.to_text()).map_err(|e| format!("trial {t}: {e}"))?;
        if back != l {
            return Err(format!("trial {t}: text round trip of {l}"));
        }
    }
    Ok(())
}

/// Σ_k c_k(s) ∂^k applied to a power series, independent of the δ-form.
fn apply_d_form(l: &DiffOperator, u: &RationalSequence) -> RationalSequence {
    let u = u.terms();
    let n = u.len();
    let mut out = vec![Rational::new(); n];
    for (k, c) in l.to_d_form().iter().enumerate() {
        // ∂^k u: coefficient m is (m+1)⋯(m+k)·u_{m+k}
        let dk: Vec<Rational> = (0..n)
            .map(|m| {
                if m + k >= n {
                    return Rational::new();
                }
                let f = (1..=k).fold(Integer::from(1), |acc, j| acc * (m + j) as u64);
                Rational::from(&u[m + k] * f)
            })
            .collect();
        for (i, ci) in c.coeffs().iter().enumerate() {
            for m in i..n {
                out[m] += Rational::from(ci * &dk[m - i]);
            }
        }
    }
    // the top k coefficients of each ∂^k are unknown; keep the reliable part
    let r = l.order();
    out.truncate(n.saturating_sub(r));
    RationalSequence::new(out)
}

/// If L annihilates Σu_k t^k, the de-regularized operator annihilates
/// Σ(u_k/k!) s^k (checked with a ∂_s-form oracle), and regularizing it back
/// annihilates u again.
pub fn fl_consistency(trials: usize) -> Outcome {
    let mut r = rng(2);
    for t in 0..trials {
        let l = random_operator(&mut r);
        let u = solve_homogeneous(&l, 25).map_err(|e| format!("trial {t}: {e}"))?;
        let hat = regularize_sequence(&u, Direction::Forward);
        let lh = deregularize_operator(&l);
        let via_delta = lh.apply_to_series(&hat);
        let via_d = apply_d_form(&lh, &hat);
        if !via_delta.is_zero() || !via_d.is_zero() {
            return Err(format!("trial {t}: {lh} does not annihilate the regularized series"));
        }
        if !regularize_operator(&lh).apply_to_series(&u).is_zero() {
            return Err(format!("trial {t}: regularized operator fails on u"));
        }
        if regularize_sequence(&hat, Direction::Inverse) != u {
            return Err(format!("trial {t}: sequence round trip"));
        }
    }
    Ok(())
}

fn sorted_vertices(p: &LatticePolytope) -> Vec<Vec<i64>> {
    let mut v = p.vertices().to_vec();
    v.sort();
    v
}

/// Random unimodular matrix as a product of elementary moves.
fn unimodular(r: &mut ChaCha8Rng, n: usize) -> Vec<Vec<i64>> {
    let mut m: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    for _ in 0..6 {
        let (i, j) = (r.gen_range(0..n), r.gen_range(0..n));
        if i == j {
            continue;
        }
        let c = r.gen_range(-1..=1);
        for k in 0..n {
            m[i][k] += c * m[j][k];
        }
    }
    m
}

/// polar_dual ∘ polar_dual = id on reflexive polytopes, sampled from random
/// point sets and from unimodular images of reflexive seeds.
pub fn polar_involution(trials: usize) -> Outcome {
    let mut r = rng(3);
    let seeds: Vec<Vec<Vec<i64>>> = vec![
        vec![vec![1, 0], vec![0, 1], vec![-1, -1]],
        vec![vec![1, 0], vec![0, 1], vec![-1, 0], vec![0, -1]],
        vec![vec![-1, -1], vec![2, -1], vec![-1, 2]],
        vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![-1, -1, -1]],
        vec![vec![1, 0, 0], vec![-1, 0, 0], vec![0, 1, 0], vec![0, -1, 0], vec![0, 0, 1], vec![0, 0, -1]],
    ];
    let mut done = 0;
    let mut attempts = 0;
    while done < trials {
        attempts += 1;
        if attempts > 200 * trials {
            return Err(format!("only {done} reflexive samples"));
        }
        let pts: Vec<Vec<i64>> = if attempts % 2 == 0 {
            let s = &seeds[r.gen_range(0..seeds.len())];
            let m = unimodular(&mut r, s[0].len());
            s.iter().map(|v| m.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()).collect()
        } else {
            let n = r.gen_range(3..=6);
            (0..n).map(|_| vec![r.gen_range(-2..=2), r.gen_range(-2..=2)]).collect()
        };
        let Ok(p) = LatticePolytope::from_points(&pts) else { continue };
        if !p.is_full_dimensional() || !is_reflexive(&p).unwrap_or(false) {
            continue;
        }
        let dual = polar_dual(&p).map_err(|e| e.to_string())?;
        let q = dual.polytope.ok_or("dual of a reflexive polytope is not a lattice polytope")?;
        let back = polar_dual(&q).map_err(|e| e.to_string())?;
        let back = back.polytope.ok_or("second dual is not a lattice polytope")?;
        if sorted_vertices(&back) != sorted_vertices(&p) {
            return Err(format!("involution fails on {:?}", p.vertices()));
        }
        done += 1;
    }
    Ok(())
}

fn random_laurent(r: &mut ChaCha8Rng) -> LaurentPolynomial {
    let n = r.gen_range(2..=3);
    let len = r.gen_range(n + 1..=n + 4);
    let terms: Vec<(Vec<i32>, Rational)> = (0..len)
        .map(|_| {
            let e = (0..n).map(|_| r.gen_range(-1..=1)).collect();
            let c = Rational::from((r.gen_range(-3i64..=3), r.gen_range(1u64..=2)));
            (e, c)
        })
        .collect();
    LaurentPolynomial::from_terms(n, terms).unwrap()
}

/// Newton-polytope pruning does not change constant terms.
pub fn pruning_agreement(trials: usize) -> Outcome {
    let mut r = rng(4);
    let mut done = 0;
    while done < trials {
        let phi = random_laurent(&mut r);
        let Ok(hull) = newton_polytope(&phi) else { continue };
        if !hull.is_full_dimensional() {
            continue;
        }
        let k = if phi.num_vars() == 2 { 10 } else { 6 };
        let a = constant_term_sequence(&phi, k, Some(&hull)).map_err(|e| e.to_string())?;
        let b = constant_term_sequence(&phi, k, None).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("{phi}: pruned {a} vs unpruned {b}"));
        }
        done += 1;
    }
    Ok(())
}

/// A random relation (height ≤ 10³) planted among random reals is recovered up to sign.
pub fn planted_relations(trials: usize) -> Outcome {
    let mut r = rng(5);
    let prec = 256;
    for t in 0..trials {
        let n = r.gen_range(2..=5);
        let xs: Vec<Float> = (0..n)
            .map(|_| Float::with_val(prec, Float::parse(format!("0.{}", (0..80).map(|_| r.gen_range(0..10).to_string()).collect::<String>())).unwrap()) + r.gen_range(0..3))
            .collect();
        let c: Vec<i64> = (0..n).map(|_| r.gen_range(-1000..=1000)).collect();
        if c.iter().all(|x| *x == 0) {
            continue;
        }
        let y = xs.iter().zip(&c).fold(Float::new(prec), |acc, (x, ci)| acc + Float::with_val(prec, x * ci));
        let mut v = vec![y];
        v.extend(xs);
        let rel = integer_relation(&v, 1000, None).map_err(|e| format!("trial {t}: {e}"))?;
        let Some(rel) = rel else { return Err(format!("trial {t}: no relation for {c:?}")) };
        let mut want: Vec<Integer> = vec![Integer::from(1)];
        want.extend(c.iter().map(|ci| Integer::from(-ci)));
        let g = want.iter().fold(Integer::new(), |g, x| g.gcd(x));
        let want: Vec<Integer> = want.into_iter().map(|x| x / &g).collect();
        let neg: Vec<Integer> = want.iter().map(|x| Integer::from(-x)).collect();
        if rel != want && rel != neg {
            return Err(format!("trial {t}: found {rel:?}, planted {want:?}"));
        }
    }
    Ok(())
}

const SHIFT_OPERATORS: &[&str] = &[
    "D^3 - t*(2*D+1)*(17*D^2+17*D+5) + t^2*(D+1)^3",
    "D^2 - t*(11*D^2+11*D+3) - t^2*(D+1)^2",
    "D^3 - 2*t*(2*D+1)*(11*D^2+11*D+3) - 4*t^2*(D+1)*(2*D+3)*(2*D+1)",
    "D^3 - t*(1+2*D)*(13*D^2+13*D+4) - 3*t^2*(D+1)*(3*D+4)*(3*D+2)",
];

/// The Apéry limit is unchanged when φ is shifted by a constant c.
pub fn constant_shift(trials: usize) -> Outcome {
    let mut r = rng(6);
    let prec = 200;
    let bases: Vec<_> = SHIFT_OPERATORS
        .iter()
        .map(|s| {
            let l = DiffOperator::parse(s).unwrap();
            let a = solve_homogeneous(&l, 120).unwrap();
            let b = solve_inhomogeneous(&l, &QPoly::x(), 120).unwrap();
            let lim = apery_limit(&a, &b, prec).unwrap().value.into_float();
            (a.truncate(30), b.truncate(30), lim)
        })
        .collect();
    for t in 0..trials {
        let (a, b, lim) = &bases[r.gen_range(0..bases.len())];
        let c = loop {
            // |c| ≤ 2 keeps the shifted singularities well separated, so 120 terms suffice
            let d = r.gen_range(1i64..=3);
            let q = Rational::from((r.gen_range(-2 * d..=2 * d), d));
            if q != 0 {
                break q;
            }
        };
        let s = shifted_apery_limit(a, b, &c, 30, 120, prec).map_err(|e| format!("trial {t}, c = {c}: {e}"))?;
        let diff = Float::with_val(prec, s.limit.value.value() - lim).abs();
        if diff > 1e-40 {
            return Err(format!("trial {t}, c = {c}: limits differ by {}", diff.to_f64()));
        }
    }
    Ok(())
}
