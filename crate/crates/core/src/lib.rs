//! Sparse recovery in the synthesis model `y = M·D·α + e`.
//!
//! Combinatorial certificates (spark, D-spark, RIP and D-RIP constants) for
//! small matrices, an exhaustive `ℓ0` oracle, `ℓ1` basis pursuit, and the
//! phase-grid and theorem-verification harnesses built on them.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64` (or `f32` where suffixed).

pub mod certify;
pub mod enumerate;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod model;
pub mod scalar;
pub mod solvers;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix = linalg::DenseMatrix<f64>;
pub type Matrix32 = linalg::DenseMatrix<f32>;
pub type Vector = Vec<f64>;
pub type Vector32 = Vec<f32>;
pub type Dictionary = model::Dictionary<f64>;
pub type Dictionary32 = model::Dictionary<f32>;
pub type MeasurementOperator = model::MeasurementOperator<f64>;
pub type MeasurementOperator32 = model::MeasurementOperator<f32>;
pub type SparseCoefficients = model::SparseCoefficients<f64>;
pub type ProblemInstance = model::ProblemInstance<f64>;
pub type ProblemInstance32 = model::ProblemInstance<f32>;
pub type CertifyConfig = certify::CertifyConfig<f64>;
pub type RipConstant = certify::RipConstant<f64>;
pub type L0Solution = solvers::L0Solution<f64>;
pub type L1Solution = solvers::L1Solution<f64>;
pub type RecoveryOutcome = solvers::RecoveryOutcome<f64>;
