//! Serializable verification report. Keys are stable; timings live in their
//! own map so that two runs can be compared with it removed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::numerics::BigComplex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skip,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexReport {
    pub re: String,
    pub im: String,
}

impl ComplexReport {
    pub fn new(z: &BigComplex, digits: usize) -> Self {
        let (re, im) = z.to_fixed(digits);
        ComplexReport { re, im }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SingularPointReport {
    pub value: String,
    pub modulus: String,
    pub exponents: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocusReport {
    pub points: Vec<SingularPointReport>,
    pub normal_conifold: bool,
    pub exponents_zero: Vec<String>,
    pub exponents_infinity: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LimitReport {
    pub value: String,
    pub error_estimate: String,
    pub convergence_ratio: String,
    pub expected_ratio: Option<String>,
    pub terms_used: usize,
    pub accelerated: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ThnfReport {
    pub method: String,
    pub digits: u32,
    /// v_0, v_1, … (V(0) alone for the direct methods).
    pub v: Vec<ComplexReport>,
    pub errors: Vec<String>,
    /// v_d from quadrature next to the value forced by L·V = 𝔨t^{d−1}.
    pub overdetermined: Option<(ComplexReport, ComplexReport)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KappaReport {
    pub value: ComplexReport,
    pub exact: Option<String>,
    pub distance: Option<String>,
    /// Separation of small-height candidates over the numeric uncertainty.
    pub margin: Option<String>,
    /// "taylor" (from v_0..v_{d−1}) or "metadata".
    pub source: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetadataReport {
    pub d_n: i64,
    pub m_n: String,
    pub r_n: String,
    pub c_n: String,
    pub kappa: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolytopeReport {
    pub dimension: usize,
    pub vertices: Vec<Vec<i64>>,
    pub reflexive: bool,
    pub normalized_volume: u64,
    pub tempered: Option<bool>,
    pub edge_polynomials: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AperyReport {
    pub case: String,
    pub kind: String,
    pub passed: bool,
    pub precision_bits: u32,
    pub terms: usize,
    pub period_prefix: Vec<String>,
    pub operator: Option<String>,
    pub recurrence: Option<String>,
    pub singular_locus: Option<LocusReport>,
    pub b_prefix: Vec<String>,
    pub limit: Option<LimitReport>,
    pub thnf: Option<ThnfReport>,
    pub kappa: Option<KappaReport>,
    pub metadata: Option<MetadataReport>,
    /// Re V̂(0), Re V̂'(0), …; the imaginary parts are asserted negligible.
    pub vhat: Vec<String>,
    pub vhat_imaginary_residue: Option<String>,
    pub difference: Option<String>,
    pub recognized: Option<String>,
    pub polytope: Option<PolytopeReport>,
    pub checks: Vec<Check>,
    pub timings_ms: BTreeMap<String, u64>,
}

impl AperyReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Parses and re-validates a serialized report.
    pub fn from_json(text: &str) -> crate::error::Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::error::Error::parse(e.line(), e.to_string()))
    }

    /// The report as JSON without the timing map.
    pub fn to_json_without_timings(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(m) = v.as_object_mut() {
            m.remove("timings_ms");
        }
        v
    }
}
