//! Registered cases: Laurent polynomials, operators, expected values and the
//! end-to-end verification pipeline.

mod format;
mod report;
mod verify;

pub use format::parse_case;
pub use report::{AperyReport, Check, CheckStatus, ComplexReport, KappaReport, LimitReport, LocusReport, PolytopeReport, ThnfReport};
pub use verify::{verify_all, verify_case, VerifyOptions};

use std::path::Path;

use rug::Rational;

use crate::diffop::{AlgebraicNumber, DiffOperator};
use crate::error::{Error, Result};
use crate::laurent::{LaurentPolynomial, RationalSequence};
use crate::numerics::ThnfMethod;
use crate::recognize::LinearCombination;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CaseKind {
    /// φ with an operator and an Apéry limit.
    Period,
    /// Operator and limit only.
    Recurrence,
    /// φ only; lattice and temperedness checks.
    Polytope,
}

#[derive(Clone, Debug, Default)]
pub struct Expectations {
    pub sequence: Option<RationalSequence>,
    pub limit: Option<LinearCombination>,
    /// v_0, v_1, … as far as given.
    pub v: Vec<LinearCombination>,
    pub vhat: Vec<LinearCombination>,
    pub kappa: Option<AlgebraicNumber>,
    pub singular: Vec<AlgebraicNumber>,
    pub exponents_infinity: Vec<Rational>,
    pub tempered: Option<bool>,
    pub reflexive: Option<bool>,
    pub volume: Option<u64>,
}

#[derive(Clone, Debug)]
pub struct Metadata {
    pub d_n: i64,
    pub m_n: Rational,
    pub r_n: AlgebraicNumber,
    pub kappa: AlgebraicNumber,
}

#[derive(Clone, Debug)]
pub struct CaseSpec {
    pub id: String,
    pub kind: CaseKind,
    pub phi: Option<LaurentPolynomial>,
    pub operator: Option<DiffOperator>,
    pub expect: Expectations,
    pub thnf: Option<ThnfMethod>,
    pub metadata: Option<Metadata>,
}

/// Number of period terms the stated operator must annihilate on load.
pub const LOAD_CHECK_TERMS: i64 = 25;

const REGISTRY: &[(&str, &str)] = &[
    ("v10", include_str!("../../cases/v10.case")),
    ("v12", include_str!("../../cases/v12.case")),
    ("v14", include_str!("../../cases/v14.case")),
    ("v16", include_str!("../../cases/v16.case")),
    ("v18", include_str!("../../cases/v18.case")),
    ("a2", include_str!("../../cases/a2.case")),
    ("a3", include_str!("../../cases/a3.case")),
    ("b3", include_str!("../../cases/b3.case")),
    ("p2-elliptic", include_str!("../../cases/p2-elliptic.case")),
    ("ex32-1", include_str!("../../cases/ex32-1.case")),
    ("ex32-2", include_str!("../../cases/ex32-2.case")),
    ("ex32-3", include_str!("../../cases/ex32-3.case")),
    ("ex32-4", include_str!("../../cases/ex32-4.case")),
    ("ex32-5", include_str!("../../cases/ex32-5.case")),
    ("ex32-6", include_str!("../../cases/ex32-6.case")),
];

/// The five Fano cases with a computed higher normal function.
pub const FANO_CASES: &[&str] = &["v10", "v12", "v14", "v16", "v18"];

pub fn registered_ids() -> Vec<&'static str> {
    REGISTRY.iter().map(|(id, _)| *id).collect()
}

/// A registered case by id.
pub fn registered_case(id: &str) -> Result<CaseSpec> {
    let (_, text) = REGISTRY
        .iter()
        .find(|(k, _)| *k == id)
        .ok_or_else(|| Error::domain(format!("unknown case '{id}'")))?;
    parse_case(text)
}

/// A case file from disk.
pub fn load_case(path: &Path) -> Result<CaseSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::domain(format!("cannot read {}: {e}", path.display())))?;
    parse_case(&text)
}

/// A registered id or, failing that, a path to a case file.
pub fn resolve_case(name: &str) -> Result<CaseSpec> {
    if REGISTRY.iter().any(|(k, _)| *k == name) {
        return registered_case(name);
    }
    let path = Path::new(name);
    if path.exists() {
        return load_case(path);
    }
    Err(Error::domain(format!("unknown case '{name}'")))
}
