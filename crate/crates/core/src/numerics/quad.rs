//! Nested tanh-sinh quadrature over regions bounded by polynomial graphs.

use rayon::prelude::*;
use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Rational};

use super::real::{bits_for_digits, BigReal, Provenance};
use crate::error::{Error, Result};
use crate::laurent::{CompiledLaurent, LaurentPolynomial};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RegionKind {
    Cube,
    GraphBounded2d,
    Named(String),
}

/// One integration axis: variable `var` runs from `lower` to `upper`, both
/// polynomials in the variables of earlier axes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionAxis {
    pub var: usize,
    pub lower: LaurentPolynomial,
    pub upper: LaurentPolynomial,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegrationRegion {
    pub kind: RegionKind,
    pub num_vars: usize,
    /// Outermost axis first.
    pub axes: Vec<RegionAxis>,
}

impl IntegrationRegion {
    pub fn new(kind: RegionKind, num_vars: usize, axes: Vec<RegionAxis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(Error::domain("regions have 1 to 3 axes"));
        }
        let mut seen = Vec::new();
        for ax in &axes {
            if ax.var >= num_vars || seen.contains(&ax.var) {
                return Err(Error::domain(format!("bad or repeated axis variable {}", ax.var)));
            }
            for b in [&ax.lower, &ax.upper] {
                if b.num_vars() != num_vars {
                    return Err(Error::domain("bound has the wrong number of variables"));
                }
                if b.max_negative_degree() > 0 {
                    return Err(Error::domain("bounds must be polynomials"));
                }
                if b.occurring_vars().iter().any(|v| !seen.contains(v)) {
                    return Err(Error::domain("bound depends on a later or unknown axis"));
                }
            }
            seen.push(ax.var);
        }
        let region = IntegrationRegion { kind, num_vars, axes };
        region.check_ordered()?;
        Ok(region)
    }

    /// The unit cube in `n` variables, axes in variable order.
    pub fn cube(n: usize) -> Self {
        let axes = (0..n)
            .map(|var| RegionAxis {
                var,
                lower: LaurentPolynomial::zero(n),
                upper: LaurentPolynomial::one(n),
            })
            .collect();
        IntegrationRegion {
            kind: RegionKind::Cube,
            num_vars: n,
            axes,
        }
    }

    /// One-dimensional interval [a, b].
    pub fn interval(a: Rational, b: Rational) -> Self {
        IntegrationRegion {
            kind: RegionKind::Named("interval".into()),
            num_vars: 1,
            axes: vec![RegionAxis {
                var: 0,
                lower: LaurentPolynomial::constant(1, a),
                upper: LaurentPolynomial::constant(1, b),
            }],
        }
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    fn check_ordered(&self) -> Result<()> {
        // probe the nested midpoints and quarter points of every axis
        let fractions = [Rational::from((1, 4)), Rational::from((1, 2)), Rational::from((3, 4))];
        let mut stack = vec![vec![Rational::new(); self.num_vars]];
        for ax in &self.axes {
            let mut next = Vec::new();
            for pt in &stack {
                let lo = ax.lower.eval_rational(pt)?;
                let hi = ax.upper.eval_rational(pt)?;
                if lo > hi {
                    return Err(Error::domain(format!(
                        "lower bound exceeds upper bound on axis x{}",
                        ax.var + 1
                    )));
                }
                for f in &fractions {
                    let mut q = pt.clone();
                    q[ax.var] = Rational::from(&lo + Rational::from(&hi - &lo) * f);
                    next.push(q);
                }
            }
            stack = next;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct QuadResult {
    pub value: BigReal,
    pub error: BigReal,
    pub level: u32,
    pub evaluations: u64,
}

#[derive(Clone, Debug)]
pub struct QuadVecResult {
    pub values: Vec<Float>,
    pub error: Float,
    pub level: u32,
    pub evaluations: u64,
}

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub target_digits: u32,
    pub prec: u32,
    pub min_level: u32,
    pub max_level: u32,
}

impl QuadOptions {
    pub fn new(target_digits: u32, prec: u32) -> Self {
        QuadOptions {
            target_digits,
            prec,
            min_level: 3,
            max_level: 12,
        }
    }
}

struct Node {
    /// distance to the nearer endpoint as a fraction of the interval width
    c: Float,
    /// weight including the step size, per unit interval width
    w: Float,
    side: i8,
}

fn node_table(level: u32, target_digits: u32, prec: u32) -> Vec<Node> {
    let h = Float::with_val(prec, 2).pow(-(level as i32));
    let half_pi = Float::with_val(prec, Constant::Pi) / 2u32;
    // smallest endpoint distance kept
    let tail_digits = target_digits as f64 + 8.0;
    let u_max = tail_digits * std::f64::consts::LN_10 / 2.0;
    let t_max = (2.0 * u_max / std::f64::consts::PI).asinh();
    let n = (t_max * (1u64 << level) as f64).ceil() as i64;
    let mut out = Vec::with_capacity(2 * n as usize + 1);
    for k in 0..=n {
        let t = Float::with_val(prec, &h * k);
        let u = Float::with_val(prec, t.sinh_ref()) * &half_pi;
        let cosh_u = Float::with_val(prec, u.cosh_ref());
        let w = Float::with_val(prec, t.cosh_ref()) * &half_pi / cosh_u.square() * &h / 2u32;
        if k == 0 {
            out.push(Node {
                c: Float::with_val(prec, 0.5),
                w,
                side: 0,
            });
            continue;
        }
        let e2u = Float::with_val(prec, Float::with_val(prec, &u * 2u32).exp_ref());
        let c = Float::with_val(prec, 1) / (e2u + 1u32);
        for side in [1i8, -1] {
            out.push(Node {
                c: c.clone(),
                w: w.clone(),
                side,
            });
        }
    }
    out
}

struct Compiled {
    var: usize,
    lower: CompiledLaurent,
    upper: CompiledLaurent,
}

fn axis_sum<F>(
    f: &F,
    axes: &[Compiled],
    depth: usize,
    coords: &mut Vec<Float>,
    nodes: &[Node],
    ncomp: usize,
    prec: u32,
) -> (Vec<Float>, u64)
where
    F: Fn(&[Float]) -> Vec<Float> + Sync,
{
    let ax = &axes[depth];
    let a = ax.lower.eval(coords);
    let b = ax.upper.eval(coords);
    let width = Float::with_val(prec, &b - &a);
    let mut sum = vec![Float::new(prec); ncomp];
    let mut evals = 0u64;
    if width.is_zero() {
        return (sum, 0);
    }
    for node in nodes {
        let offset = Float::with_val(prec, &width * &node.c);
        coords[ax.var] = match node.side {
            1 => Float::with_val(prec, &b - &offset),
            -1 => Float::with_val(prec, &a + &offset),
            _ => Float::with_val(prec, &a + &offset),
        };
        let (vals, n) = if depth + 1 == axes.len() {
            (f(coords), 1)
        } else {
            axis_sum(f, axes, depth + 1, coords, nodes, ncomp, prec)
        };
        evals += n;
        for (s, v) in sum.iter_mut().zip(vals) {
            *s += v * &node.w;
        }
    }
    for s in &mut sum {
        *s *= &width;
    }
    (sum, evals)
}

fn level_sum<F>(f: &F, axes: &[Compiled], nodes: &[Node], num_vars: usize, ncomp: usize, prec: u32) -> (Vec<Float>, u64)
where
    F: Fn(&[Float]) -> Vec<Float> + Sync,
{
    let outer = &axes[0];
    let zero = vec![Float::new(prec); num_vars];
    let a = outer.lower.eval(&zero);
    let b = outer.upper.eval(&zero);
    let width = Float::with_val(prec, &b - &a);
    let parts: Vec<(Vec<Float>, u64)> = nodes
        .par_iter()
        .map(|node| {
            let mut coords = vec![Float::new(prec); num_vars];
            let offset = Float::with_val(prec, &width * &node.c);
            coords[outer.var] = if node.side == 1 {
                Float::with_val(prec, &b - &offset)
            } else {
                Float::with_val(prec, &a + &offset)
            };
            let (vals, n) = if axes.len() == 1 {
                (f(&coords), 1)
            } else {
                axis_sum(f, axes, 1, &mut coords, nodes, ncomp, prec)
            };
            (vals.into_iter().map(|v| v * &node.w).collect(), n)
        })
        .collect();
    // fixed-order reduction
    let mut sum = vec![Float::new(prec); ncomp];
    let mut evals = 0;
    for (vals, n) in parts {
        evals += n;
        for (s, v) in sum.iter_mut().zip(vals) {
            *s += v;
        }
    }
    for s in &mut sum {
        *s *= &width;
    }
    (sum, evals)
}

/// Vector-valued nested tanh-sinh quadrature. Levels double until the
/// error bound (10× the gap between successive levels) meets the target.
pub fn integrate_components<F>(
    f: F,
    ncomp: usize,
    region: &IntegrationRegion,
    opts: QuadOptions,
) -> Result<QuadVecResult>
where
    F: Fn(&[Float]) -> Vec<Float> + Sync,
{
    let prec = opts.prec.max(bits_for_digits(opts.target_digits) + 32);
    let axes: Vec<Compiled> = region
        .axes
        .iter()
        .map(|ax| Compiled {
            var: ax.var,
            lower: ax.lower.compile(prec),
            upper: ax.upper.compile(prec),
        })
        .collect();
    let target = Float::with_val(prec, 10).pow(-(opts.target_digits as i32));
    let mut prev: Option<Vec<Float>> = None;
    let mut evaluations = 0;
    let mut last_err = None;
    for level in opts.min_level.saturating_sub(1)..=opts.max_level {
        let nodes = node_table(level, opts.target_digits, prec);
        let (vals, n) = level_sum(&f, &axes, &nodes, region.num_vars, ncomp, prec);
        evaluations += n;
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::NoConvergence(format!("non-finite integrand sum at level {level}")));
        }
        if let Some(p) = &prev {
            let gap = vals
                .iter()
                .zip(p)
                .map(|(a, b)| Float::with_val(prec, a - b).abs())
                .fold(Float::new(prec), |m, x| if x > m { x } else { m });
            let scale = vals
                .iter()
                .map(|v| Float::with_val(prec, v.abs_ref()))
                .fold(Float::with_val(prec, 1), |m, x| if x > m { x } else { m });
            let err = gap * 10u32;
            if err <= Float::with_val(prec, &target * &scale) {
                return Ok(QuadVecResult {
                    values: vals,
                    error: err,
                    level,
                    evaluations,
                });
            }
            last_err = Some(err.to_f64());
        }
        prev = Some(vals);
    }
    Err(Error::NoConvergence(format!(
        "no agreement to {} digits after level {} (last error estimate {:?}, {} evaluations)",
        opts.target_digits, opts.max_level, last_err, evaluations
    )))
}

/// Real-valued quadrature; see [`integrate_components`].
pub fn tanh_sinh_integrate<F>(f: F, region: &IntegrationRegion, target_digits: u32, prec: u32) -> Result<QuadResult>
where
    F: Fn(&[Float]) -> Float + Sync,
{
    let mut opts = QuadOptions::new(target_digits, prec);
    opts.max_level = match region.dimension() {
        1 => 12,
        2 => 9,
        _ => 7,
    };
    let r = integrate_components(|x| vec![f(x)], 1, region, opts)?;
    let value = r.values.into_iter().next().unwrap();
    let p = value.prec();
    Ok(QuadResult {
        value: BigReal::new(Float::with_val(prec.min(p), value), Provenance::Quadrature),
        error: BigReal::new(r.error, Provenance::Quadrature),
        level: r.level,
        evaluations: r.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::constants::{named_constant, NamedConstant};

    fn unit() -> IntegrationRegion {
        IntegrationRegion::interval(Rational::new(), Rational::from(1))
    }

    #[test]
    fn constant_integrand() {
        let r = tanh_sinh_integrate(|_| Float::with_val(128, 1), &unit(), 30, 128).unwrap();
        assert!(Float::with_val(128, r.value.value() - 1u32).abs() < 1e-30);
    }

    #[test]
    fn log_singular_integrand_gives_zeta2() {
        let prec = 256;
        let r = tanh_sinh_integrate(
            |x| {
                let one_minus = Float::with_val(prec, 1 - &x[0]);
                -one_minus.ln() / &x[0]
            },
            &unit(),
            30,
            prec,
        )
        .unwrap();
        let z2 = named_constant(&NamedConstant::Zeta2, prec).unwrap();
        let diff = Float::with_val(prec, r.value.value() - z2.value()).abs();
        assert!(diff < 1e-30, "diff {}", diff.to_f64());
        assert!(r.error.to_f64() < 2e-30);
    }

    #[test]
    fn graph_bounded_area() {
        // area of {0 ≤ y ≤ 1, 1-y ≤ x ≤ 1} is 1/2
        let lower = LaurentPolynomial::parse("1 - x2", 2).unwrap();
        let region = IntegrationRegion::new(
            RegionKind::GraphBounded2d,
            2,
            vec![
                RegionAxis { var: 1, lower: LaurentPolynomial::zero(2), upper: LaurentPolynomial::one(2) },
                RegionAxis { var: 0, lower, upper: LaurentPolynomial::one(2) },
            ],
        )
        .unwrap();
        let r = tanh_sinh_integrate(|_| Float::with_val(128, 1), &region, 20, 128).unwrap();
        assert!(Float::with_val(128, r.value.value() - 0.5f64).abs() < 1e-20);
    }

    #[test]
    fn region_validation() {
        let bad = IntegrationRegion::new(
            RegionKind::GraphBounded2d,
            2,
            vec![RegionAxis {
                var: 0,
                lower: LaurentPolynomial::parse("x2", 2).unwrap(),
                upper: LaurentPolynomial::one(2),
            }],
        );
        assert!(bad.is_err());
        let reversed = IntegrationRegion::new(
            RegionKind::Named("r".into()),
            1,
            vec![RegionAxis { var: 0, lower: LaurentPolynomial::one(1), upper: LaurentPolynomial::zero(1) }],
        );
        assert!(reversed.is_err());
    }
}
