//! Line-oriented case file parser.

use std::collections::BTreeMap;

use rug::{Integer, Rational};

use super::{CaseKind, CaseSpec, Expectations, Metadata, LOAD_CHECK_TERMS};
use crate::diffop::{AlgebraicNumber, DiffOperator};
use crate::error::{Error, Result};
use crate::lattice::newton_polytope;
use crate::laurent::{constant_term_sequence, LaurentPolynomial, RationalSequence};
use crate::numerics::quad::{IntegrationRegion, RegionAxis, RegionKind};
use crate::numerics::ThnfMethod;
use crate::recognize::LinearCombination;

const SECTIONS: &[&str] = &["case", "phi", "operator", "expect", "thnf", "metadata"];

struct Section {
    /// (line number, text) with comments and blank lines removed.
    lines: Vec<(usize, String)>,
}

impl Section {
    fn keys(&self) -> Result<BTreeMap<String, (usize, String)>> {
        let mut out = BTreeMap::new();
        for (n, line) in &self.lines {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(*n, format!("expected 'key = value', got '{line}'")))?;
            let key = k.trim().to_string();
            if key == "axis" {
                // repeated; numbered in order of appearance
                let idx = out.keys().filter(|k: &&String| k.starts_with("axis")).count();
                out.insert(format!("axis{idx}"), (*n, v.trim().to_string()));
                continue;
            }
            if out.insert(key.clone(), (*n, v.trim().to_string())).is_some() {
                return Err(Error::parse(*n, format!("duplicate key '{key}'")));
            }
        }
        Ok(out)
    }
}

fn split_sections(text: &str) -> Result<BTreeMap<String, Section>> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            if !SECTIONS.contains(&name) {
                return Err(Error::parse(n, format!("unknown section [{name}]")));
            }
            if sections.contains_key(name) {
                return Err(Error::parse(n, format!("repeated section [{name}]")));
            }
            sections.insert(name.to_string(), Section { lines: Vec::new() });
            current = Some(name.to_string());
            continue;
        }
        let name = current
            .as_ref()
            .ok_or_else(|| Error::parse(n, "content before the first section"))?;
        sections.get_mut(name).unwrap().lines.push((n, line.to_string()));
    }
    Ok(sections)
}

fn at_line<T>(n: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Parse { msg, .. } => Error::parse(n, msg),
        other => Error::parse(n, other.to_string()),
    })
}

fn parse_phi(section: &Section, num_vars: usize) -> Result<LaurentPolynomial> {
    let mut terms = Vec::new();
    for (n, line) in &section.lines {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != num_vars + 1 {
            return Err(Error::parse(*n, format!("expected a coefficient and {num_vars} exponents")));
        }
        let c: Rational = fields[0]
            .parse()
            .map_err(|_| Error::parse(*n, format!("bad coefficient '{}'", fields[0])))?;
        let e = fields[1..]
            .iter()
            .map(|f| f.parse::<i32>().map_err(|_| Error::parse(*n, format!("bad exponent '{f}'"))))
            .collect::<Result<Vec<_>>>()?;
        terms.push((e, c));
    }
    if terms.is_empty() {
        return Err(Error::parse(0, "[phi] has no monomials"));
    }
    LaurentPolynomial::from_terms(num_vars, terms)
}

fn parse_bool(n: usize, v: &str) -> Result<bool> {
    match v {
        "yes" | "true" => Ok(true),
        "no" | "false" => Ok(false),
        _ => Err(Error::parse(n, format!("expected yes/no, got '{v}'"))),
    }
}

fn parse_list<T>(n: usize, v: &str, sep: char, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    v.split(sep)
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| at_line(n, f(s)))
        .collect()
}

fn parse_rational(s: &str) -> Result<Rational> {
    s.parse().map_err(|_| Error::domain(format!("bad rational '{s}'")))
}

fn parse_expect(section: &Section) -> Result<Expectations> {
    let mut e = Expectations::default();
    for (key, (n, v)) in section.keys()? {
        let n = n;
        match key.as_str() {
            "sequence" => {
                e.sequence = Some(RationalSequence::new(parse_list(n, &v, ' ', parse_rational)?));
            }
            "limit" => e.limit = Some(at_line(n, LinearCombination::parse(&v))?),
            "kappa" => e.kappa = Some(at_line(n, AlgebraicNumber::parse(&v))?),
            "singular" => e.singular = parse_list(n, &v, ',', AlgebraicNumber::parse)?,
            "exponents_infinity" => e.exponents_infinity = parse_list(n, &v, ' ', parse_rational)?,
            "tempered" => e.tempered = Some(parse_bool(n, &v)?),
            "reflexive" => e.reflexive = Some(parse_bool(n, &v)?),
            "volume" => {
                e.volume = Some(v.parse().map_err(|_| Error::parse(n, format!("bad volume '{v}'")))?)
            }
            k if k.starts_with('v') && k[1..].parse::<usize>().is_ok() => {
                let i: usize = k[1..].parse().unwrap();
                set_indexed(&mut e.v, i, at_line(n, LinearCombination::parse(&v))?, n)?;
            }
            k if k.starts_with("vhat") && k[4..].parse::<usize>().is_ok() => {
                let i: usize = k[4..].parse().unwrap();
                set_indexed(&mut e.vhat, i, at_line(n, LinearCombination::parse(&v))?, n)?;
            }
            _ => return Err(Error::parse(n, format!("unknown [expect] key '{key}'"))),
        }
    }
    Ok(e)
}

fn set_indexed(list: &mut Vec<LinearCombination>, i: usize, value: LinearCombination, n: usize) -> Result<()> {
    if i != list.len() {
        return Err(Error::parse(n, format!("coefficient {i} given out of order")));
    }
    list.push(value);
    Ok(())
}

fn var_index(n: usize, name: &str, num_vars: usize) -> Result<usize> {
    name.strip_prefix('x')
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&i| i >= 1 && i <= num_vars)
        .map(|i| i - 1)
        .ok_or_else(|| Error::parse(n, format!("bad variable '{name}'")))
}

/// Drops variable `skip` (which must not occur) from a polynomial.
fn without_var(p: &LaurentPolynomial, skip: usize) -> Result<LaurentPolynomial> {
    if p.occurring_vars().contains(&skip) {
        return Err(Error::domain("region bound mentions the eliminated variable"));
    }
    LaurentPolynomial::from_terms(
        p.num_vars() - 1,
        p.terms().map(|(e, c)| {
            let mut e = e.clone();
            e.remove(skip);
            (e, c.clone())
        }),
    )
}

fn parse_thnf(section: &Section, num_vars: usize) -> Result<ThnfMethod> {
    let keys = section.keys()?;
    let (n, method) = keys
        .get("method")
        .cloned()
        .ok_or_else(|| Error::parse(0, "[thnf] needs a method"))?;
    match method.as_str() {
        "quadrature-3d" => Ok(ThnfMethod::Quadrature3d),
        "closed-form-1d" => Ok(ThnfMethod::ClosedForm1d),
        "contour" => Ok(ThnfMethod::Contour),
        "quadrature-2d" => {
            let (en, ename) = keys
                .get("eliminate")
                .cloned()
                .ok_or_else(|| Error::parse(n, "quadrature-2d needs 'eliminate'"))?;
            let eliminate = var_index(en, &ename, num_vars)?;
            let mut axes = Vec::new();
            for (key, (an, spec)) in &keys {
                if !key.starts_with("axis") {
                    continue;
                }
                let (var, range) = spec
                    .split_once(':')
                    .ok_or_else(|| Error::parse(*an, "axis must read 'x : lower .. upper'"))?;
                let (lo, hi) = range
                    .split_once("..")
                    .ok_or_else(|| Error::parse(*an, "axis must read 'x : lower .. upper'"))?;
                let v = var_index(*an, var.trim(), num_vars)?;
                if v == eliminate {
                    return Err(Error::parse(*an, "axis runs over the eliminated variable"));
                }
                let bound = |s: &str| -> Result<LaurentPolynomial> {
                    at_line(*an, LaurentPolynomial::parse(s.trim(), num_vars).and_then(|p| without_var(&p, eliminate)))
                };
                let reduced = if v > eliminate { v - 1 } else { v };
                axes.push((key.clone(), RegionAxis { var: reduced, lower: bound(lo)?, upper: bound(hi)? }));
            }
            axes.sort_by_key(|(k, _)| k[4..].parse::<usize>().unwrap_or(0));
            let region = at_line(
                n,
                IntegrationRegion::new(RegionKind::GraphBounded2d, num_vars - 1, axes.into_iter().map(|(_, a)| a).collect()),
            )?;
            Ok(ThnfMethod::Quadrature2d { eliminate, region })
        }
        other => Err(Error::parse(n, format!("unknown method '{other}'"))),
    }
}

fn parse_metadata(section: &Section) -> Result<Metadata> {
    let keys = section.keys()?;
    let get = |k: &str| {
        keys.get(k)
            .cloned()
            .ok_or_else(|| Error::parse(0, format!("[metadata] needs '{k}'")))
    };
    let (n, d) = get("D_N")?;
    let d_n = d.parse().map_err(|_| Error::parse(n, format!("bad D_N '{d}'")))?;
    let (n, m) = get("M_N")?;
    let m_n = at_line(n, parse_rational(&m))?;
    let (n, r) = get("r_N")?;
    let r_n = at_line(n, AlgebraicNumber::parse(&r))?;
    let (n, k) = get("kappa")?;
    let kappa = at_line(n, AlgebraicNumber::parse(&k))?;
    Ok(Metadata { d_n, m_n, r_n, kappa })
}

/// Parses a case document and runs the on-load checks.
pub fn parse_case(text: &str) -> Result<CaseSpec> {
    let sections = split_sections(text)?;
    let case = sections
        .get("case")
        .ok_or_else(|| Error::parse(0, "missing [case] section"))?
        .keys()?;
    let (_, id) = case.get("id").cloned().ok_or_else(|| Error::parse(0, "[case] needs an id"))?;
    let num_vars = match case.get("num_vars") {
        Some((n, v)) => Some(
            v.parse::<usize>()
                .ok()
                .filter(|&k| (1..=6).contains(&k))
                .ok_or_else(|| Error::parse(*n, format!("bad num_vars '{v}'")))?,
        ),
        None => None,
    };
    let phi = match (sections.get("phi"), num_vars) {
        (Some(s), Some(n)) => Some(parse_phi(s, n)?),
        (Some(_), None) => return Err(Error::parse(0, "[phi] needs num_vars in [case]")),
        _ => None,
    };
    let operator = match sections.get("operator") {
        Some(s) => {
            let first = s.lines.first().map_or(0, |(n, _)| *n);
            let joined: Vec<&str> = s.lines.iter().map(|(_, l)| l.as_str()).collect();
            Some(at_line(first, DiffOperator::parse(&joined.join(" ")))?)
        }
        None => None,
    };
    let expect = match sections.get("expect") {
        Some(s) => parse_expect(s)?,
        None => Expectations::default(),
    };
    let thnf = match sections.get("thnf") {
        Some(s) => Some(parse_thnf(s, num_vars.unwrap_or(0))?),
        None => None,
    };
    let metadata = sections.get("metadata").map(parse_metadata).transpose()?;
    let kind = match (&phi, &operator) {
        (Some(_), Some(_)) => CaseKind::Period,
        (None, Some(_)) => CaseKind::Recurrence,
        (Some(_), None) => CaseKind::Polytope,
        (None, None) => return Err(Error::parse(0, "a case needs [phi] or [operator]")),
    };
    let spec = CaseSpec { id, kind, phi, operator, expect, thnf, metadata };
    check_on_load(&spec)?;
    Ok(spec)
}

fn load_error(id: &str, check: &str, detail: impl std::fmt::Display) -> Error {
    Error::Consistency(format!("case {id}: on-load check '{check}' failed: {detail}"))
}

fn check_on_load(c: &CaseSpec) -> Result<()> {
    if let (Some(phi), Some(l)) = (&c.phi, &c.operator) {
        let hull = newton_polytope(phi)?;
        let prune = hull.is_full_dimensional().then_some(&hull);
        let a = constant_term_sequence(phi, LOAD_CHECK_TERMS - 1, prune)?;
        if !l.apply_to_series(&a).is_zero() {
            return Err(load_error(&c.id, "operator annihilates periods", "nonzero residual"));
        }
        if let Some(s) = &c.expect.sequence {
            if a.truncate(s.len()) != *s {
                return Err(load_error(&c.id, "expected sequence", format!("periods are {}", a.truncate(s.len()))));
            }
        }
    }
    if let (None, Some(l), Some(s)) = (&c.phi, &c.operator, &c.expect.sequence) {
        if !l.apply_to_series(s).is_zero() {
            return Err(load_error(&c.id, "operator annihilates expected sequence", "nonzero residual"));
        }
    }
    if let Some(m) = &c.metadata {
        let derived = AlgebraicNumber::rational(Integer::from(m.d_n)).try_div(&m.r_n)?;
        if derived != m.kappa {
            return Err(load_error(&c.id, "kappa = D_N / r_N", format!("D_N / r_N = {derived}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn malformed_files() {
        assert!(matches!(parse_case("id = x"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_case("[case]\nid = x\n[bogus]\n"), Err(Error::Parse { line: 3, .. })));
        assert!(parse_case("[case]\nid = x\n").is_err());
        let bad_phi = "[case]\nid = x\nnum_vars = 2\n[phi]\n1 1\n";
        assert!(matches!(parse_case(bad_phi), Err(Error::Parse { line: 5, .. })));
        let bad_op = "[case]\nid = x\n[operator]\nD^3 - t*(\n";
        assert!(matches!(parse_case(bad_op), Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn wrong_operator_is_rejected_on_load() {
        let text = "[case]\nid = x\nnum_vars = 2\n[phi]\n1 1 0\n1 0 1\n1 -1 -1\n[operator]\nD^2 - 27*t^3*(D+1)*(D+3)\n";
        let err = parse_case(text).unwrap_err();
        assert!(err.to_string().contains("operator annihilates periods"), "{err}");
    }

    #[test]
    fn region_is_reindexed() {
        let text = "[case]\nid = y\nnum_vars = 3\n[phi]\n1 1 0 0\n1 0 1 0\n1 0 0 1\n1 -1 -1 -1\n[thnf]\nmethod = quadrature-2d\neliminate = x1\naxis = x3 : 0 .. 1\naxis = x2 : (1 - x3)^2 .. 1 - x3\n";
        let c = parse_case(text).unwrap();
        let Some(ThnfMethod::Quadrature2d { eliminate, region }) = c.thnf else { panic!() };
        assert_eq!(eliminate, 0);
        assert_eq!(region.axes[0].var, 1);
        assert_eq!(region.axes[1].var, 0);
        assert_eq!(region.axes[1].upper.to_string(), "1 - x2");
    }
}
