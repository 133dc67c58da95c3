//! The `ℓ0` oracle, `ℓ1` basis pursuit, and recovery assessment.

mod l0;
mod primal_dual;
mod simplex;

pub use l0::{solve_l0, solve_l0_with_budget, L0Solution, FEASIBILITY_SLACK};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{distance, norm1, norm2, DenseMatrix};
use crate::model::ProblemInstance;
use crate::scalar::Scalar;

/// Default relative success threshold for both recovery domains.
pub const DEFAULT_RECOVERY_RTOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    pub feas_tol: f64,
    pub obj_tol: f64,
    pub max_iterations: usize,
    /// Radius of the residual ball; `0` selects the equality-constrained problem.
    pub epsilon: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            obj_tol: 1e-7,
            max_iterations: 50_000,
            epsilon: 0.0,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.feas_tol > 0.0 && self.feas_tol.is_finite()) {
            return Err(invalid("feas_tol must be positive"));
        }
        if !(self.obj_tol > 0.0 && self.obj_tol.is_finite()) {
            return Err(invalid("obj_tol must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(invalid("max_iterations must be positive"));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(invalid("epsilon must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L1Solution<T> {
    pub alpha_hat: Vec<T>,
    pub objective: T,
    pub feasibility_residual: T,
    pub iterations: usize,
    pub converged: bool,
}

/// `min ‖α‖₁` subject to `Aα = y` (or `‖Aα − y‖₂ ≤ ε` when `params.epsilon > 0`).
///
/// The equality problem is solved exactly by the simplex method on the split
/// `α = u − v`; the ball-constrained problem by a primal–dual iteration.
/// `converged` requires the residual to be within `feas_tol` (plus `ε`).
pub fn solve_l1<T: Scalar>(a: &DenseMatrix<T>, y: &[T], params: &SolverParams) -> Result<L1Solution<T>> {
    params.validate()?;
    if y.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            context: "l1 right-hand side",
            expected: a.rows(),
            got: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(invalid("right-hand side contains non-finite values"));
    }
    let feas_tol = T::lit(params.feas_tol);
    let epsilon = T::lit(params.epsilon);

    let (alpha, iterations, finished) = if params.epsilon == 0.0 {
        let out = simplex::basis_pursuit(a, y, params.max_iterations)?;
        (out.alpha, out.iterations, out.optimal)
    } else {
        let out = primal_dual::ball_basis_pursuit(
            a,
            y,
            epsilon,
            feas_tol,
            T::lit(params.obj_tol),
            params.max_iterations,
        );
        (out.alpha, out.iterations, out.converged)
    };
    let residual = distance(&a.matvec(&alpha)?, y);
    Ok(L1Solution {
        objective: norm1(&alpha),
        feasibility_residual: residual,
        converged: finished && residual <= epsilon + feas_tol,
        alpha_hat: alpha,
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecoveryOutcome<T> {
    pub rep_error: T,
    pub sig_error: T,
    pub rep_success: bool,
    pub sig_success: bool,
    /// Absolute thresholds actually applied.
    pub rep_threshold: T,
    pub sig_threshold: T,
}

/// Representation and signal errors of `alpha_hat` against the ground truth,
/// with success meaning `error ≤ rtol · max(1, ‖truth‖₂)`.
pub fn assess_recovery<T: Scalar>(
    alpha_hat: &[T],
    instance: &ProblemInstance<T>,
    rep_rtol: T,
    sig_rtol: T,
) -> Result<RecoveryOutcome<T>> {
    let dict = instance.dictionary();
    if alpha_hat.len() != dict.n() {
        return Err(Error::DimensionMismatch {
            context: "recovered representation length",
            expected: dict.n(),
            got: alpha_hat.len(),
        });
    }
    if !(rep_rtol > T::zero() && sig_rtol > T::zero()) {
        return Err(invalid("recovery tolerances must be positive"));
    }
    let alpha0 = instance.alpha0().densify();
    let x0 = instance.x0();
    let rep_error = distance(alpha_hat, &alpha0);
    let sig_error = distance(&dict.matrix().matvec(alpha_hat)?, x0);
    let rep_threshold = rep_rtol * T::one().max(norm2(&alpha0));
    let sig_threshold = sig_rtol * T::one().max(norm2(x0));
    Ok(RecoveryOutcome {
        rep_error,
        sig_error,
        rep_success: rep_error <= rep_threshold,
        sig_success: sig_error <= sig_threshold,
        rep_threshold,
        sig_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gen_duplicated_dictionary, MeasurementOperator, SparseCoefficients, Support};

    #[test]
    fn identity_echoes_measurements() {
        let a = DenseMatrix::<f64>::identity(4);
        let y = [1.5, -2.0, 0.0, 3.25];
        let sol = solve_l1(&a, &y, &SolverParams::default()).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.alpha_hat, y.to_vec());
        assert_eq!(sol.objective, 6.75);
    }

    #[test]
    fn hand_checked_lp() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0]]).unwrap();
        let sol = solve_l1(&a, &[1.0, 1.0], &SolverParams::default()).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.alpha_hat, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn noisy_variant_respects_the_ball() {
        let a = DenseMatrix::<f64>::identity(3);
        let params = SolverParams {
            epsilon: 0.5,
            ..SolverParams::default()
        };
        let sol = solve_l1(&a, &[2.0, 0.3, -0.1], &params).unwrap();
        assert!(sol.converged);
        assert!(sol.feasibility_residual <= 0.5 + 1e-8);
        // Shrinking the largest entry alone already saves ε; spreading the shrinkage saves at most ε√3.
        assert!(sol.objective <= 1.9 + 1e-6);
        assert!(sol.objective >= 2.4 - 0.5 * 3f64.sqrt() - 1e-6);
    }

    #[test]
    fn params_parse_with_defaults() {
        let p: SolverParams = serde_json::from_str(r#"{"max_iterations": 10}"#).unwrap();
        assert_eq!(p.max_iterations, 10);
        assert_eq!(p.feas_tol, 1e-8);
        assert!(serde_json::from_str::<SolverParams>(r#"{"bogus": 1}"#).is_err());
    }

    fn duplicated_instance() -> ProblemInstance<f64> {
        let z = vec![1.0, 2.0, 2.0];
        let dict = gen_duplicated_dictionary(&z, 3).unwrap();
        let m = MeasurementOperator::new(DenseMatrix::identity(3)).unwrap();
        let alpha0 = SparseCoefficients::new(3, Support::new(vec![0], 3).unwrap(), vec![1.0]).unwrap();
        ProblemInstance::noiseless(dict, m, alpha0).unwrap()
    }

    #[test]
    fn exact_recovery_succeeds() {
        let inst = duplicated_instance();
        let out = assess_recovery(&[1.0, 0.0, 0.0], &inst, 1e-4, 1e-4).unwrap();
        assert!(out.rep_success && out.sig_success);
        assert_eq!(out.rep_error, 0.0);
        assert_eq!(out.sig_error, 0.0);
    }

    #[test]
    fn different_atom_recovers_signal_only() {
        let inst = duplicated_instance();
        let out = assess_recovery(&[0.0, 0.0, 1.0], &inst, 1e-4, 1e-4).unwrap();
        assert!(!out.rep_success);
        assert!(out.sig_success);
    }

    #[test]
    fn zero_estimate_fails_both() {
        let inst = duplicated_instance();
        let out = assess_recovery(&[0.0; 3], &inst, 1e-4, 1e-4).unwrap();
        assert!(!out.rep_success && !out.sig_success);
        assert!(assess_recovery(&[0.0; 2], &inst, 1e-4, 1e-4).is_err());
    }
}
