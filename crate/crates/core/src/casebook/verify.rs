//! End-to-end verification of a case.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use rug::{Float, Rational};

use super::report::*;
use super::{CaseKind, CaseSpec};
use crate::diffop::{local_exponents, singular_locus, AlgebraicNumber, DiffOperator, Point, Root};
use crate::error::{Error, Result};
use crate::lattice::{is_reflexive, is_tempered_2d, newton_polytope, normalized_volume};
use crate::laurent::{constant_term_sequence, RationalSequence};
use crate::numerics::real::{bits_for_digits, digits_for_bits, float_to_fixed, ten_pow_neg};
use crate::numerics::{thnf_coefficient, BigComplex};
use crate::opfit::{fit_operator, DEFAULT_GUARD};
use crate::poly::QPoly;
use crate::recognize::{recognize_constant, ConstantBasis, Recognition, DEFAULT_MAX_HEIGHT};
use crate::sequences::{apery_limit, inhomogeneous_constant, normalize_thnf, predicted_coefficient, solve_homogeneous, solve_inhomogeneous};

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Terms of a and b used for the limit.
    pub terms: usize,
    /// Working precision in bits for the limit.
    pub precision: u32,
    /// Period terms used for operator fitting.
    pub fit_terms: usize,
    pub guard: usize,
    /// Decimal digits requested from the normal-function evaluations.
    pub thnf_digits: u32,
    /// Decimal digits used for recognizing the limit.
    pub recognition_digits: u32,
    /// |limit − V̂(0)| must stay below 10^-tolerance_digits.
    pub tolerance_digits: u32,
    pub max_height: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            terms: 500,
            precision: 256,
            fit_terms: 40,
            guard: DEFAULT_GUARD,
            thnf_digits: 25,
            recognition_digits: 60,
            tolerance_digits: 20,
            max_height: DEFAULT_MAX_HEIGHT,
        }
    }
}

/// Digits shown for values derived from the normal function.
fn thnf_shown(o: &VerifyOptions) -> usize {
    o.thnf_digits as usize
}

struct Run<'a> {
    spec: &'a CaseSpec,
    o: &'a VerifyOptions,
    checks: Vec<Check>,
    timings: BTreeMap<String, u64>,
    clock: Instant,
}

impl Run<'_> {
    fn record(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        let status = if ok { CheckStatus::Pass } else { CheckStatus::Fail };
        self.checks.push(Check { name: name.into(), status, detail: detail.into() });
    }

    fn skip(&mut self, name: &str, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), status: CheckStatus::Skip, detail: detail.into() });
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.timings.insert(stage.into(), (now - self.clock).as_millis() as u64);
        self.clock = now;
    }
}

fn fmt_f(x: &Float) -> String {
    format!("{:.3e}", x.to_f64())
}

fn strings(v: &[Root]) -> Vec<String> {
    v.iter().map(|r| r.to_string()).collect()
}

/// Runs every applicable stage. Failures of individual checks are recorded
/// in the report; only malformed inputs produce an error.
pub fn verify_case(spec: &CaseSpec, o: &VerifyOptions) -> Result<AperyReport> {
    if o.terms < 30 || o.precision < 64 {
        return Err(Error::domain("verification needs at least 30 terms and 64 bits"));
    }
    let mut run = Run { spec, o, checks: Vec::new(), timings: BTreeMap::new(), clock: Instant::now() };
    let mut report = AperyReport {
        case: spec.id.clone(),
        kind: match spec.kind {
            CaseKind::Period => "period",
            CaseKind::Recurrence => "recurrence",
            CaseKind::Polytope => "polytope",
        }
        .into(),
        passed: false,
        precision_bits: o.precision,
        terms: o.terms,
        period_prefix: Vec::new(),
        operator: None,
        recurrence: None,
        singular_locus: None,
        b_prefix: Vec::new(),
        limit: None,
        thnf: None,
        kappa: None,
        metadata: None,
        vhat: Vec::new(),
        vhat_imaginary_residue: None,
        difference: None,
        recognized: None,
        polytope: None,
        checks: Vec::new(),
        timings_ms: BTreeMap::new(),
    };

    let periods = periods_stage(&mut run, &mut report)?;
    polytope_stage(&mut run, &mut report)?;
    if let Some(l) = spec.operator.clone() {
        fit_stage(&mut run, &mut report, &l, periods.as_ref());
        locus_stage(&mut run, &mut report, &l);
        let alpha = limit_stage(&mut run, &mut report, &l)?;
        let vhat0 = thnf_stage(&mut run, &mut report, &l)?;
        if let (Some(alpha), Some(vhat0)) = (&alpha, &vhat0) {
            let tol = ten_pow_neg(o.tolerance_digits as i32, 64);
            let re = Float::with_val(alpha.prec(), alpha - &vhat0.re).abs();
            let im = Float::with_val(64, vhat0.im.abs_ref());
            report.difference = Some(fmt_f(&re));
            run.record(
                "limit_equals_vhat0",
                re < tol && im < tol,
                format!("|limit - Re V^(0)| = {}, |Im V^(0)| = {}", fmt_f(&re), fmt_f(&im)),
            );
        } else if alpha.is_some() && spec.thnf.is_some() {
            run.record("limit_equals_vhat0", false, "V^(0) unavailable");
        }
        run.lap("compare");
    }

    report.passed = run.checks.iter().all(|c| c.status != CheckStatus::Fail);
    report.checks = run.checks;
    report.timings_ms = run.timings;
    Ok(report)
}

/// Verifies several cases in parallel; results keep the input order.
pub fn verify_all(specs: &[CaseSpec], o: &VerifyOptions) -> Vec<Result<AperyReport>> {
    specs.par_iter().map(|s| verify_case(s, o)).collect()
}

fn periods_stage(run: &mut Run, report: &mut AperyReport) -> Result<Option<RationalSequence>> {
    let Some(phi) = &run.spec.phi else {
        run.skip("period_sequence", "recurrence-only case");
        return Ok(None);
    };
    let hull = newton_polytope(phi)?;
    let prune = hull.is_full_dimensional().then_some(&hull);
    let a = constant_term_sequence(phi, run.o.fit_terms as i64 - 1, prune)?;
    report.period_prefix = a.truncate(10).to_strings();
    if let Some(s) = &run.spec.expect.sequence {
        let ok = a.truncate(s.len()) == *s;
        run.record("period_sequence", ok, format!("expected {s}"));
    }
    run.lap("periods");
    Ok(Some(a))
}

fn polytope_stage(run: &mut Run, report: &mut AperyReport) -> Result<()> {
    let Some(phi) = &run.spec.phi else {
        return Ok(());
    };
    let p = newton_polytope(phi)?;
    let reflexive = p.is_full_dimensional() && is_reflexive(&p)?;
    let volume = if p.is_full_dimensional() { normalized_volume(&p)? } else { 0 };
    let mut tempered = None;
    let mut edges = Vec::new();
    if phi.num_vars() == 2 && reflexive {
        let t = is_tempered_2d(phi)?;
        tempered = Some(t.tempered);
        edges = t.edges.iter().map(|e| e.polynomial.clone()).collect();
    }
    let e = &run.spec.expect;
    if let Some(want) = e.reflexive {
        run.record("reflexive", want == reflexive, format!("reflexive = {reflexive}"));
    }
    if let Some(want) = e.volume {
        run.record("normalized_volume", want == volume, format!("volume = {volume}, expected {want}"));
    }
    if let Some(want) = e.tempered {
        let ok = tempered == Some(want);
        run.record("tempered", ok, format!("tempered = {tempered:?}, expected {want}"));
    }
    report.polytope = Some(PolytopeReport {
        dimension: p.dimension(),
        vertices: p.vertices().to_vec(),
        reflexive,
        normalized_volume: volume,
        tempered,
        edge_polynomials: edges,
    });
    run.lap("polytope");
    Ok(())
}

fn fit_stage(run: &mut Run, report: &mut AperyReport, l: &DiffOperator, periods: Option<&RationalSequence>) {
    report.operator = Some(l.to_text());
    report.recurrence = Some(l.to_recurrence().to_text());
    let stated_normal = l.normalized() == *l;
    run.record("operator_normalized", stated_normal, "leading coefficient of P_0 is 1");
    let Some(a) = periods else {
        run.skip("operator_fit", "no Laurent polynomial");
        return;
    };
    let (r, d) = (l.order(), l.degree());
    match fit_operator(a, r, d, run.o.guard) {
        Ok(fitted) => {
            let ok = fitted == l.normalized();
            run.record("operator_fit", ok, format!("fitted {}", fitted.to_text()));
        }
        Err(e) => run.record("operator_fit", false, e.to_string()),
    }
    // no operator of a smaller shape exists
    let mut smaller = Vec::new();
    for (rr, dd) in [(r.wrapping_sub(1), d), (r, d.wrapping_sub(1)), (r.wrapping_sub(1), d.wrapping_sub(1))] {
        if rr >= 1 && rr <= r && dd >= 1 && dd <= d {
            smaller.push((rr, dd));
        }
    }
    for (rr, dd) in smaller {
        let name = format!("minimal_{rr}_{dd}");
        match fit_operator(a, rr, dd, run.o.guard) {
            Err(Error::NotFound) => run.record(&name, true, "no operator"),
            Ok(found) => run.record(&name, false, format!("found {}", found.to_text())),
            Err(e) => run.record(&name, false, e.to_string()),
        }
    }
    run.lap("fit");
}

fn locus_stage(run: &mut Run, report: &mut AperyReport, l: &DiffOperator) {
    let prec = run.o.precision;
    let locus = match singular_locus(l, prec) {
        Ok(s) => s,
        Err(e) => {
            run.record("singular_locus", false, e.to_string());
            return;
        }
    };
    let at_zero = local_exponents(l, &Point::Zero, prec);
    let at_inf = local_exponents(l, &Point::Infinity, prec);
    let mut points = Vec::new();
    let mut all_exact = true;
    for p in &locus.points {
        let exps = match &p.value {
            Root::Exact(a) => match local_exponents(l, &Point::Finite(a.clone()), prec) {
                Ok(e) => strings(&e),
                Err(e) => vec![e.to_string()],
            },
            Root::Numeric(_) => {
                all_exact = false;
                Vec::new()
            }
        };
        points.push(SingularPointReport { value: p.value.to_string(), modulus: float_to_fixed(&p.modulus, 30), exponents: exps });
    }
    let expect = &run.spec.expect;
    if !expect.singular.is_empty() {
        let found: Vec<Option<&AlgebraicNumber>> = locus.points.iter().map(|p| p.value.exact()).collect();
        let ok = found.len() == expect.singular.len()
            && expect.singular.iter().all(|s| found.iter().any(|f| *f == Some(s)));
        let shown: Vec<String> = locus.points.iter().map(|p| p.value.to_string()).collect();
        run.record("singular_locus", ok, shown.join(", "));
    }
    let mum = at_zero.as_ref().is_ok_and(|e| e.iter().all(|r| r.as_rational().is_some_and(|q| *q == 0)));
    run.record("maximal_unipotent_monodromy", mum, "all exponents at t = 0 vanish");
    match &at_inf {
        Ok(e) => {
            if !expect.exponents_infinity.is_empty() {
                let got: Vec<Option<&Rational>> = e.iter().map(|r| r.as_rational()).collect();
                let ok = got.len() == expect.exponents_infinity.len()
                    && got.iter().zip(&expect.exponents_infinity).all(|(g, w)| *g == Some(w));
                run.record("exponents_infinity", ok, strings(e).join(" "));
            }
        }
        Err(err) => run.record("exponents_infinity", false, err.to_string()),
    }
    if expect.limit.is_some() {
        run.record("normal_conifold", locus.is_normal_conifold(), "one singular point of largest modulus");
        run.record("exact_singular_points", all_exact, "singular points lie in quadratic fields");
    }
    report.singular_locus = Some(LocusReport {
        points,
        normal_conifold: locus.is_normal_conifold(),
        exponents_zero: at_zero.map(|e| strings(&e)).unwrap_or_default(),
        exponents_infinity: at_inf.map(|e| strings(&e)).unwrap_or_default(),
    });
    if let Some(ratio) = locus.modulus_ratio() {
        report.limit = Some(LimitReport {
            value: String::new(),
            error_estimate: String::new(),
            convergence_ratio: String::new(),
            expected_ratio: Some(float_to_fixed(&ratio, 12)),
            terms_used: 0,
            accelerated: false,
        });
    }
    run.lap("locus");
}

/// Second solution with L·b = t.
fn rhs_t() -> QPoly {
    QPoly::new(vec![Rational::new(), Rational::from(1)])
}

fn limit_stage(run: &mut Run, report: &mut AperyReport, l: &DiffOperator) -> Result<Option<Float>> {
    let Some(expected) = run.spec.expect.limit.clone() else {
        return Ok(None);
    };
    let o = run.o;
    let k = o.terms - 1;
    let (a, b) = match (solve_homogeneous(l, k), solve_inhomogeneous(l, &rhs_t(), k)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            run.record("apery_limit", false, e.to_string());
            return Ok(None);
        }
    };
    if let Some(s) = &run.spec.expect.sequence {
        run.record("recurrence_sequence", a.truncate(s.len()) == *s, format!("expected {s}"));
    }
    if report.period_prefix.is_empty() {
        report.period_prefix = a.truncate(10).to_strings();
    }
    report.b_prefix = b.truncate(10).to_strings();
    let lim = apery_limit(&a, &b, o.precision)?;
    let shown = digits_for_bits(o.precision) as usize;
    let expected_ratio = report.limit.take().and_then(|r| r.expected_ratio);
    let rho = lim.convergence_ratio.to_f64();
    if let Some(er) = &expected_ratio {
        let want: f64 = er.parse().unwrap_or(f64::NAN);
        let ok = (rho - want).abs() <= 0.1 * want;
        run.record("convergence_ratio", ok, format!("fitted {rho:.6}, expected {want:.6}"));
    }
    let err_ok = *lim.error_estimate.value() < ten_pow_neg(shown as i32 - 5, 64);
    run.record("limit_converged", err_ok, format!("error estimate {}", fmt_f(lim.error_estimate.value())));
    report.limit = Some(LimitReport {
        value: lim.value.to_fixed(shown),
        error_estimate: fmt_f(lim.error_estimate.value()),
        convergence_ratio: format!("{rho:.12}"),
        expected_ratio,
        terms_used: lim.terms_used,
        accelerated: lim.accelerated,
    });
    run.lap("limit");

    // recognition at the requested digits, checked at twice the precision
    let bits = bits_for_digits(o.recognition_digits);
    let x = apery_limit(&a, &b, bits)?.value.into_float();
    let x_check = apery_limit(&a, &b, 2 * bits)?.value.into_float();
    match recognize_constant(&x, Some(&x_check), &ConstantBasis::default(), o.max_height)? {
        Recognition::Found(c) => {
            let h = c.relation_height();
            report.recognized = Some(c.to_string());
            run.record("recognized_limit", c.same_as(&expected), format!("{c} (height {h}), expected {expected}"));
        }
        Recognition::Ambiguous(cs) => {
            let all: Vec<String> = cs.iter().map(|c| c.to_string()).collect();
            run.record("recognized_limit", false, format!("ambiguous: {}", all.join("; ")));
        }
        Recognition::NotFound => run.record("recognized_limit", false, "no relation"),
    }
    let want = expected.evaluate(o.precision)?;
    let diff = Float::with_val(o.precision, lim.value.value() - &want).abs();
    run.record(
        "limit_matches_expected",
        diff < ten_pow_neg(shown as i32 - 5, 64),
        format!("|limit - {expected}| = {}", fmt_f(&diff)),
    );
    run.lap("recognize");
    Ok(Some(lim.value.into_float()))
}

fn close(z: &BigComplex, want: &Float, tol: &Float) -> (bool, Float) {
    let re = Float::with_val(z.prec(), &z.re - want).abs();
    let im = Float::with_val(z.prec(), z.im.abs_ref());
    let d = Float::with_val(z.prec(), re.max(&im));
    (d < *tol, d)
}

fn thnf_stage(run: &mut Run, report: &mut AperyReport, l: &DiffOperator) -> Result<Option<BigComplex>> {
    let spec = run.spec;
    if let Some(m) = &spec.metadata {
        let c_n = AlgebraicNumber::rational(m.m_n.clone()).try_mul(&m.r_n)?;
        report.metadata = Some(MetadataReport {
            d_n: m.d_n,
            m_n: m.m_n.to_string(),
            r_n: m.r_n.to_string(),
            c_n: c_n.to_string(),
            kappa: m.kappa.to_string(),
        });
    }
    let Some(method) = &spec.thnf else {
        if spec.expect.limit.is_some() {
            run.skip("thnf", "no normal-function method");
        }
        return Ok(None);
    };
    let o = run.o;
    let digits = o.thnf_digits;
    let shown = thnf_shown(o);
    let d = l.degree();
    let want_next = spec.expect.v.len() > d;
    let count = if method.has_coefficients() { d + usize::from(want_next) } else { 1 };
    let mut values = Vec::new();
    let mut errors = Vec::new();
    for k in 0..count {
        let v = match thnf_coefficient(method, spec.phi.as_ref(), k as u32, digits) {
            Ok(v) => v,
            Err(e) => {
                run.record("thnf", false, e.to_string());
                return Ok(None);
            }
        };
        if let Some(cc) = &v.cross_check {
            let diff = (&v.value - cc).abs();
            run.record("thnf_cross_check", diff < ten_pow_neg(digits as i32 - 3, 64), format!("difference {}", fmt_f(&diff)));
        }
        errors.push(fmt_f(v.error.value()));
        values.push(v.value);
    }
    run.lap("thnf");
    let vtol = ten_pow_neg(digits as i32 - 5, 64);
    let prec = values[0].prec();
    for (k, (v, want)) in values.iter().zip(&spec.expect.v).enumerate() {
        let (ok, dist) = close(v, &want.evaluate(prec)?, &vtol);
        run.record(&format!("v{k}"), ok, format!("{} vs {want}: {}", v.re.to_f64(), fmt_f(&dist)));
    }
    let mut overdetermined = None;
    if want_next && method.has_coefficients() {
        let predicted = predicted_coefficient(l, &values[..d], d)?;
        let dist = (&predicted - &values[d]).abs();
        run.record("overdetermined_coefficient", dist < 1e-6, format!("quadrature vs forced: {}", fmt_f(&dist)));
        overdetermined = Some((ComplexReport::new(&values[d], shown), ComplexReport::new(&predicted, shown)));
        values.truncate(d);
    }
    report.thnf = Some(ThnfReport {
        method: method.label().into(),
        digits,
        v: values.iter().map(|v| ComplexReport::new(v, shown)).collect(),
        errors,
        overdetermined,
    });

    // inhomogeneous constant
    let kappa_prec = prec;
    let stated = spec.metadata.as_ref().map(|m| m.kappa.clone()).or_else(|| spec.expect.kappa.clone());
    let (kappa, kreport) = if method.has_coefficients() {
        let tol = ten_pow_neg(digits as i32 - 3, prec);
        let k = inhomogeneous_constant(l, &values, &tol)?;
        let sep = Float::with_val(prec, 1e-8);
        let margin = k.distance.as_ref().map(|dist| {
            let unc = Float::with_val(prec, dist.clone().max(&tol));
            Float::with_val(prec, &sep / &unc)
        });
        let kr = KappaReport {
            value: ComplexReport::new(&k.value, shown),
            exact: k.exact.as_ref().map(|e| e.to_string()),
            distance: k.distance.as_ref().map(fmt_f),
            margin: margin.as_ref().map(fmt_f),
            source: "taylor".into(),
        };
        let certified = k.exact.is_some() && margin.as_ref().is_some_and(|m| *m >= 1e3);
        run.record("kappa_rounded", certified, format!("{} -> {:?}", k.value.re.to_f64(), kr.exact));
        if let (Some(s), Some(e)) = (&stated, &k.exact) {
            run.record("kappa_matches_stated", s == e, format!("stated {s}, computed {e}"));
        }
        let value = k.exact.as_ref().map(|e| e.to_complex(kappa_prec)).unwrap_or(k.value);
        (value, kr)
    } else {
        let Some(s) = stated else {
            run.record("kappa_rounded", false, "no Taylor coefficients and no stated value");
            return Ok(None);
        };
        let z = s.to_complex(kappa_prec);
        let kr = KappaReport {
            value: ComplexReport::new(&z, shown),
            exact: Some(s.to_string()),
            distance: None,
            margin: None,
            source: "metadata".into(),
        };
        (z, kr)
    };
    report.kappa = Some(kreport);
    let vhat = normalize_thnf(&values, &kappa, l)?;
    for (k, (v, want)) in vhat.iter().zip(&spec.expect.vhat).enumerate() {
        let (ok, dist) = close(v, &want.evaluate(prec)?, &vtol);
        run.record(&format!("vhat{k}"), ok, format!("vs {want}: {}", fmt_f(&dist)));
    }
    report.vhat = vhat.iter().map(|v| float_to_fixed(&v.re, shown)).collect();
    let residue = vhat.iter().map(|v| Float::with_val(64, v.im.abs_ref())).fold(Float::new(64), |a, b| a.max(&b));
    report.vhat_imaginary_residue = Some(fmt_f(&residue));
    run.lap("kappa");
    Ok(vhat.into_iter().next())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::casebook::registered_case;

    fn quick() -> VerifyOptions {
        VerifyOptions { terms: 120, precision: 160, thnf_digits: 15, recognition_digits: 40, tolerance_digits: 12, ..Default::default() }
    }

    #[test]
    fn recurrence_case_passes() {
        let r = verify_case(&registered_case("a3").unwrap(), &quick()).unwrap();
        assert!(r.passed, "{:#?}", r.checks);
        assert_eq!(r.recognized.as_deref(), Some("1/6 * zeta3"));
    }

    #[test]
    fn polygon_case_passes() {
        let r = verify_case(&registered_case("ex32-2").unwrap(), &quick()).unwrap();
        assert!(r.passed, "{:#?}", r.checks);
        assert_eq!(r.polytope.unwrap().tempered, Some(false));
    }

    #[test]
    fn contour_case_passes() {
        let r = verify_case(&registered_case("v18").unwrap(), &quick()).unwrap();
        assert!(r.passed, "{:#?}", r.checks);
        assert_eq!(r.metadata.unwrap().c_n, "1/81*sqrt(-3)");
    }

    #[test]
    fn wrong_expectation_fails() {
        let mut c = registered_case("a3").unwrap();
        c.expect.limit = Some(crate::recognize::LinearCombination::parse("1/5 * zeta3").unwrap());
        let r = verify_case(&c, &quick()).unwrap();
        assert!(!r.passed);
        assert_eq!(r.check("recognized_limit").unwrap().status, CheckStatus::Fail);
    }
}
