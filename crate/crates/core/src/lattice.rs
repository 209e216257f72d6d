//! Lattice polytopes in dimension ≤ 3: hulls, polar duality, reflexivity,
//! normalized volume and the two-variable temperedness test.

use std::collections::BTreeSet;

use rug::{Integer, Rational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laurent::LaurentPolynomial;
use crate::poly::{is_cyclotomic_product, QPoly};

pub type LatticePoint = Vec<i64>;

/// Half-space {x : <normal, x> ≥ -offset} with primitive normal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Facet {
    pub normal: Vec<i64>,
    pub offset: i64,
}

impl Facet {
    pub fn value(&self, x: &[i64]) -> i64 {
        dot(&self.normal, x) + self.offset
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticePolytope {
    dimension: usize,
    vertices: Vec<LatticePoint>,
    facets: Vec<Facet>,
    affine_rank: usize,
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn sub(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn gcd_vec(v: &[i64]) -> i64 {
    v.iter().fold(0i64, |g, &x| num_gcd(g, x.abs()))
}

fn num_gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        num_gcd(b, a % b)
    }
}

fn primitive(v: &[i64]) -> Option<Vec<i64>> {
    let g = gcd_vec(v);
    if g == 0 {
        None
    } else {
        Some(v.iter().map(|x| x / g).collect())
    }
}

fn cross(a: &[i64], b: &[i64]) -> Vec<i64> {
    vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Integer vector orthogonal to the n−1 given vectors in ℤⁿ (n ≤ 3).
fn orthogonal(vecs: &[Vec<i64>], n: usize) -> Vec<i64> {
    match n {
        1 => vec![1],
        2 => vec![-vecs[0][1], vecs[0][0]],
        3 => cross(&vecs[0], &vecs[1]),
        _ => unreachable!("dimension checked by caller"),
    }
}

/// Rank of a list of integer vectors (exact, fraction-free).
fn rank(vecs: &[Vec<i64>]) -> usize {
    let mut rows: Vec<Vec<Integer>> = vecs
        .iter()
        .map(|v| v.iter().map(|&x| Integer::from(x)).collect())
        .collect();
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for col in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][col] != 0) else {
            continue;
        };
        rows.swap(r, p);
        for i in 0..rows.len() {
            if i != r && rows[i][col] != 0 {
                let a = rows[r][col].clone();
                let b = rows[i][col].clone();
                for j in 0..ncols {
                    let v = Integer::from(&rows[i][j] * &a) - Integer::from(&rows[r][j] * &b);
                    rows[i][j] = v;
                }
            }
        }
        r += 1;
    }
    r
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

impl LatticePolytope {
    /// Convex hull of the given lattice points.
    pub fn from_points(points: &[LatticePoint]) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::domain("convex hull of an empty point set"));
        };
        let n = first.len();
        if n == 0 || n > 3 {
            return Err(Error::domain(format!("dimension {n} not supported (1..=3)")));
        }
        if points.iter().any(|p| p.len() != n) {
            return Err(Error::domain("points of mixed dimension"));
        }
        let pts: Vec<LatticePoint> = points.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let p0 = pts[0].clone();
        let diffs: Vec<Vec<i64>> = pts.iter().skip(1).map(|p| sub(p, &p0)).collect();
        let r = if diffs.is_empty() { 0 } else { rank(&diffs) };

        // integer basis of the orthogonal complement of the affine span
        let span = independent_subset(&diffs, r);
        let complement = complement_basis(&span, n);

        let mut facets = BTreeSet::new();
        for w in &complement {
            let w = primitive(w).expect("nonzero complement vector");
            let c = dot(&w, &p0);
            facets.insert(Facet { normal: w.clone(), offset: -c });
            facets.insert(Facet { normal: w.iter().map(|x| -x).collect(), offset: c });
        }
        if r >= 1 {
            for subset in subsets(pts.len(), r) {
                let base = &pts[subset[0]];
                let mut vecs = complement.clone();
                for &i in &subset[1..] {
                    vecs.push(sub(&pts[i], base));
                }
                let w = orthogonal(&vecs, n);
                let Some(w) = primitive(&w) else { continue };
                let vals: Vec<i64> = pts.iter().map(|p| dot(&w, p)).collect();
                let at = dot(&w, base);
                let min = *vals.iter().min().unwrap();
                let max = *vals.iter().max().unwrap();
                if min == at {
                    facets.insert(Facet { normal: w.clone(), offset: -min });
                }
                if max == at {
                    facets.insert(Facet { normal: w.iter().map(|x| -x).collect(), offset: max });
                }
            }
        }
        let facets: Vec<Facet> = facets.into_iter().collect();
        let vertices: Vec<LatticePoint> = pts
            .iter()
            .filter(|p| {
                let tight: Vec<Vec<i64>> = facets
                    .iter()
                    .filter(|f| f.value(p) == 0)
                    .map(|f| f.normal.clone())
                    .collect();
                !tight.is_empty() && rank(&tight) == n
            })
            .cloned()
            .collect();
        let poly = LatticePolytope {
            dimension: n,
            vertices,
            facets,
            affine_rank: r,
        };
        // cross-check: every input point satisfies every facet, every vertex is an input point
        debug_assert!(pts.iter().all(|p| poly.contains(p)));
        Ok(poly)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vertices(&self) -> &[LatticePoint] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.affine_rank == self.dimension
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        self.facets.iter().all(|f| f.value(x) >= 0)
    }

    pub fn contains_strictly(&self, x: &[i64]) -> bool {
        self.is_full_dimensional() && self.facets.iter().all(|f| f.value(x) > 0)
    }

    fn bounding_box(&self) -> (Vec<i64>, Vec<i64>) {
        let n = self.dimension;
        let mut lo = vec![i64::MAX; n];
        let mut hi = vec![i64::MIN; n];
        for v in &self.vertices {
            for i in 0..n {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        (lo, hi)
    }

    fn box_points(&self) -> Vec<LatticePoint> {
        let (lo, hi) = self.bounding_box();
        let mut out = vec![Vec::new()];
        for i in 0..self.dimension {
            let mut next = Vec::new();
            for p in &out {
                for x in lo[i]..=hi[i] {
                    let mut q = p.clone();
                    q.push(x);
                    next.push(q);
                }
            }
            out = next;
        }
        out
    }

    pub fn lattice_points(&self) -> Vec<LatticePoint> {
        self.box_points().into_iter().filter(|p| self.contains(p)).collect()
    }

    pub fn interior_lattice_points(&self) -> Vec<LatticePoint> {
        self.box_points()
            .into_iter()
            .filter(|p| self.contains_strictly(p))
            .collect()
    }

    /// Image under x ↦ M x for an integer matrix M (rows).
    pub fn transform(&self, m: &[Vec<i64>]) -> Result<Self> {
        let pts: Vec<LatticePoint> = self
            .vertices
            .iter()
            .map(|v| m.iter().map(|row| dot(row, v)).collect())
            .collect();
        Self::from_points(&pts)
    }

    /// Vertices of the facet as a cyclically ordered list (dimension 3) or
    /// the two endpoints (dimension 2).
    fn facet_vertices(&self, f: &Facet) -> Vec<LatticePoint> {
        let vs: Vec<LatticePoint> = self.vertices.iter().filter(|v| f.value(v) == 0).cloned().collect();
        if self.dimension == 3 {
            order_cyclic(&vs, &f.normal)
        } else {
            vs
        }
    }
}

fn independent_subset(vecs: &[Vec<i64>], r: usize) -> Vec<Vec<i64>> {
    let mut chosen: Vec<Vec<i64>> = Vec::new();
    for v in vecs {
        if chosen.len() == r {
            break;
        }
        let mut trial = chosen.clone();
        trial.push(v.clone());
        if rank(&trial) == trial.len() {
            chosen = trial;
        }
    }
    chosen
}

fn complement_basis(span: &[Vec<i64>], n: usize) -> Vec<Vec<i64>> {
    let unit = |i: usize| {
        let mut e = vec![0; n];
        e[i] = 1;
        e
    };
    match (n, span.len()) {
        (_, r) if r == n => Vec::new(),
        (_, 0) => (0..n).map(unit).collect(),
        (2, 1) => vec![vec![-span[0][1], span[0][0]]],
        (3, 2) => vec![cross(&span[0], &span[1])],
        (3, 1) => {
            let d = &span[0];
            let mut out: Vec<Vec<i64>> = Vec::new();
            for i in 0..3 {
                let c = cross(d, &unit(i));
                if c.iter().any(|&x| x != 0) {
                    let mut trial = out.clone();
                    trial.push(c.clone());
                    if rank(&trial) == trial.len() {
                        out = trial;
                    }
                }
                if out.len() == 2 {
                    break;
                }
            }
            out
        }
        _ => unreachable!(),
    }
}

fn order_cyclic(vs: &[LatticePoint], normal: &[i64]) -> Vec<LatticePoint> {
    if vs.len() < 3 {
        return vs.to_vec();
    }
    let c: Vec<f64> = (0..3)
        .map(|i| vs.iter().map(|v| v[i] as f64).sum::<f64>() / vs.len() as f64)
        .collect();
    let nf: Vec<f64> = normal.iter().map(|&x| x as f64).collect();
    let a: Vec<f64> = (0..3).map(|i| vs[0][i] as f64 - c[i]).collect();
    let b = vec![
        nf[1] * a[2] - nf[2] * a[1],
        nf[2] * a[0] - nf[0] * a[2],
        nf[0] * a[1] - nf[1] * a[0],
    ];
    let mut keyed: Vec<(f64, LatticePoint)> = vs
        .iter()
        .map(|v| {
            let d: Vec<f64> = (0..3).map(|i| v[i] as f64 - c[i]).collect();
            let x: f64 = d.iter().zip(&a).map(|(p, q)| p * q).sum();
            let y: f64 = d.iter().zip(&b).map(|(p, q)| p * q).sum();
            (y.atan2(x), v.clone())
        })
        .collect();
    keyed.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    keyed.into_iter().map(|(_, v)| v).collect()
}

fn det(rows: &[Vec<i64>]) -> i64 {
    match rows.len() {
        1 => rows[0][0],
        2 => rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0],
        3 => dot(&rows[0], &cross(&rows[1], &rows[2])),
        _ => unreachable!(),
    }
}

/// Newton polytope of φ.
pub fn newton_polytope(phi: &LaurentPolynomial) -> Result<LatticePolytope> {
    if phi.is_zero() {
        return Err(Error::domain("Newton polytope of the zero polynomial"));
    }
    let pts: Vec<LatticePoint> = phi
        .support()
        .iter()
        .map(|e| e.iter().map(|&x| x as i64).collect())
        .collect();
    LatticePolytope::from_points(&pts)
}

/// Result of polar duality; lattice only when all dual vertices are integral.
#[derive(Clone, Debug)]
pub struct PolarDual {
    pub rational_vertices: Vec<Vec<Rational>>,
    pub polytope: Option<LatticePolytope>,
}

impl PolarDual {
    pub fn is_lattice(&self) -> bool {
        self.polytope.is_some()
    }
}

/// {y : <x,y> ≥ -1 for all x ∈ P}.
pub fn polar_dual(p: &LatticePolytope) -> Result<PolarDual> {
    let origin = vec![0; p.dimension()];
    if !p.contains_strictly(&origin) {
        return Err(Error::domain("origin is not strictly interior"));
    }
    let rational_vertices: Vec<Vec<Rational>> = p
        .facets()
        .iter()
        .map(|f| f.normal.iter().map(|&x| Rational::from((x, f.offset))).collect())
        .collect();
    let integral = rational_vertices.iter().all(|v| v.iter().all(|x| *x.denom() == 1));
    let polytope = if integral {
        let pts: Vec<LatticePoint> = rational_vertices
            .iter()
            .map(|v| v.iter().map(|x| x.numer().to_i64().expect("small")).collect())
            .collect();
        Some(LatticePolytope::from_points(&pts)?)
    } else {
        None
    };
    Ok(PolarDual {
        rational_vertices,
        polytope,
    })
}

pub fn is_reflexive(p: &LatticePolytope) -> Result<bool> {
    if !p.is_full_dimensional() {
        return Err(Error::domain("reflexivity needs a full-dimensional polytope"));
    }
    let origin = vec![0; p.dimension()];
    if !p.contains_strictly(&origin) {
        return Ok(false);
    }
    let reflexive = polar_dual(p)?.is_lattice();
    if reflexive {
        let interior = p.interior_lattice_points();
        if interior != vec![origin] {
            return Err(Error::Consistency(format!(
                "reflexive polytope with interior points {interior:?}"
            )));
        }
    }
    Ok(reflexive)
}

/// n!·vol(P) by a pulling triangulation from the first vertex.
pub fn normalized_volume(p: &LatticePolytope) -> Result<u64> {
    if !p.is_full_dimensional() {
        return Err(Error::domain("volume of a degenerate polytope"));
    }
    let v0 = &p.vertices()[0];
    let total: i64 = match p.dimension() {
        1 => {
            let xs: Vec<i64> = p.vertices().iter().map(|v| v[0]).collect();
            xs.iter().max().unwrap() - xs.iter().min().unwrap()
        }
        2 => p
            .facets()
            .iter()
            .filter(|f| f.value(v0) != 0)
            .map(|f| {
                let e = p.facet_vertices(f);
                det(&[sub(&e[0], v0), sub(&e[1], v0)]).abs()
            })
            .sum(),
        3 => p
            .facets()
            .iter()
            .filter(|f| f.value(v0) != 0)
            .map(|f| {
                let fv = p.facet_vertices(f);
                (1..fv.len() - 1)
                    .map(|i| det(&[sub(&fv[0], v0), sub(&fv[i], v0), sub(&fv[i + 1], v0)]).abs())
                    .sum::<i64>()
            })
            .sum(),
        _ => unreachable!(),
    };
    Ok(total as u64)
}

#[derive(Clone, Debug, Serialize)]
pub struct EdgeReport {
    pub normal: Vec<i64>,
    pub polynomial: String,
    pub cyclotomic: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TemperedReport {
    pub tempered: bool,
    pub edges: Vec<EdgeReport>,
}

/// Restriction of φ to the edge with the given facet, as a polynomial in the
/// primitive edge direction starting from one endpoint.
pub fn edge_polynomial(phi: &LaurentPolynomial, f: &Facet) -> QPoly {
    let d = vec![-f.normal[1], f.normal[0]];
    let on_edge: Vec<(Vec<i64>, Rational)> = phi
        .terms()
        .map(|(e, c)| (e.iter().map(|&x| x as i64).collect::<Vec<_>>(), c.clone()))
        .filter(|(e, _)| f.value(e) == 0)
        .collect();
    let start = on_edge.iter().map(|(e, _)| dot(&d, e)).min().unwrap_or(0);
    let step = dot(&d, &d);
    let mut coeffs = Vec::new();
    for (e, c) in on_edge {
        let j = ((dot(&d, &e) - start) / step) as usize;
        if coeffs.len() <= j {
            coeffs.resize(j + 1, Rational::new());
        }
        coeffs[j] += c;
    }
    QPoly::new(coeffs)
}

/// Two-variable temperedness: every edge polynomial is cyclotomic.
pub fn is_tempered_2d(phi: &LaurentPolynomial) -> Result<TemperedReport> {
    if phi.num_vars() != 2 {
        return Err(Error::domain("temperedness test needs exactly two variables"));
    }
    let p = newton_polytope(phi)?;
    if !p.is_full_dimensional() || !is_reflexive(&p)? {
        return Err(Error::domain("Newton polygon is not reflexive"));
    }
    let edges: Vec<EdgeReport> = p
        .facets()
        .iter()
        .map(|f| {
            let q = edge_polynomial(phi, f);
            EdgeReport {
                normal: f.normal.clone(),
                polynomial: q.display_var("u"),
                cyclotomic: is_cyclotomic_product(&q),
            }
        })
        .collect();
    Ok(TemperedReport {
        tempered: edges.iter().all(|e| e.cyclotomic),
        edges,
    })
}
