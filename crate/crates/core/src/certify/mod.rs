//! Exact combinatorial certificates: Spark, D-Spark, RIP and D-RIP constants,
//! and the uniqueness / stability predicates built on them.
//!
//! All certifiers enumerate supports exhaustively. A per-call budget bounds the
//! number of supports evaluated; running out is an error, never a silent
//! approximation.

mod bounds;
mod rip;
mod spark;

use serde::Serialize;

pub use bounds::{
    check_uniqueness_representation, check_uniqueness_signal, stability_bound, BoundInputs,
    BoundKind, BoundReport, RecoveryDomain, Verdict,
};
pub use rip::{drip_constant, drip_delta_on_support, rip_constant, rip_delta_on_support};
pub use spark::{d_spark, dspark_condition, spark, spark_condition};

use crate::enumerate::DEFAULT_BUDGET;
use crate::linalg::DEFAULT_REL_TOL;
use crate::model::Support;
use crate::scalar::Scalar;

/// Rank tolerance and enumeration ceiling shared by every certifier call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyConfig<T> {
    pub rel_tol: T,
    pub budget: u64,
}

impl<T: Scalar> Default for CertifyConfig<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(DEFAULT_REL_TOL),
            budget: DEFAULT_BUDGET,
        }
    }
}

impl<T: Scalar> CertifyConfig<T> {
    pub fn with_rel_tol(rel_tol: T) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateKind {
    Spark,
    DSpark,
}

/// A Spark-type value; `Infinite` means no qualifying set exists up to the enumerated size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SparkValue {
    Finite(usize),
    Infinite,
}

impl SparkValue {
    pub fn finite(self) -> Option<usize> {
        match self {
            Self::Finite(v) => Some(v),
            Self::Infinite => None,
        }
    }
}

impl Serialize for SparkValue {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Finite(v) => s.serialize_u64(*v as u64),
            Self::Infinite => s.serialize_str("infinite"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparkCertificate {
    pub kind: CertificateKind,
    pub value: SparkValue,
    /// Lexicographically smallest minimal set, when `value` is finite.
    pub witness: Option<Support>,
    /// Largest support size that was enumerated completely.
    pub exhausted_up_to: usize,
    pub rel_tol: f64,
    /// Supports charged against the budget: all smaller sizes plus the witness's lexicographic position.
    pub budget_used: u64,
}

impl SparkCertificate {
    pub fn is_infinite(&self) -> bool {
        self.value == SparkValue::Infinite
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serialises")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RipFlavor {
    Rip,
    DRip,
}

/// A restricted-isometry constant over all size-`k` supports, with the attaining support.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct RipConstant<T> {
    #[serde(rename = "kind")]
    pub flavor: RipFlavor,
    pub k: usize,
    #[serde(serialize_with = "ser_scalar")]
    pub delta: T,
    #[serde(rename = "witness")]
    pub witness_support: Support,
    pub rel_tol: f64,
    pub budget_used: u64,
}

impl<T: Scalar> RipConstant<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serialises")
    }
}

fn ser_scalar<T: Scalar, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(v.to_f64_lossy())
}
