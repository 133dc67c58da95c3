use crate::enumerate::{arg_max, collect_all, find_first, Budget, DEFAULT_BUDGET};
use crate::error::{invalid, Error, Result};
use crate::linalg::{least_squares, norm2, DenseMatrix};
use crate::model::{SparseCoefficients, Support};
use crate::scalar::Scalar;

/// Absolute slack on the feasibility test `‖y − Aα‖₂ ≤ ε`, absorbing round-off at `ε = 0`.
pub const FEASIBILITY_SLACK: f64 = 1e-12;

/// Sparsest solutions of `min ‖α‖₀ s.t. ‖y − Aα‖₂ ≤ ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct L0Solution<T> {
    /// All minimizers (or the lexicographically first one), in lexicographic support order.
    pub minimizers: Vec<SparseCoefficients<T>>,
    pub cardinality: usize,
    /// `‖y − Aα‖₂` for each minimizer.
    pub residuals: Vec<T>,
    pub budget_used: u64,
}

/// Least-squares coefficients on a support and their residual norm.
type Fit<T> = (Vec<T>, T);

pub fn solve_l0<T: Scalar>(
    a: &DenseMatrix<T>,
    y: &[T],
    epsilon: T,
    k_max: usize,
    enumerate_all: bool,
) -> Result<L0Solution<T>> {
    solve_l0_with_budget(a, y, epsilon, k_max, enumerate_all, DEFAULT_BUDGET)
}

/// Exhaustive support search: for `t = 0, 1, …, k_max` fit every size-`t`
/// support by least squares; the first size with a feasible support is the
/// minimal cardinality. Coefficients are the (minimum-norm) least-squares fits.
pub fn solve_l0_with_budget<T: Scalar>(
    a: &DenseMatrix<T>,
    y: &[T],
    epsilon: T,
    k_max: usize,
    enumerate_all: bool,
    budget: u64,
) -> Result<L0Solution<T>> {
    let n = a.cols();
    if y.len() != a.rows() {
        return Err(Error::DimensionMismatch {
            context: "l0 right-hand side",
            expected: a.rows(),
            got: y.len(),
        });
    }
    if k_max > n {
        return Err(invalid(format!("k_max {k_max} exceeds column count {n}")));
    }
    if epsilon.is_nan() || epsilon < T::zero() {
        return Err(invalid("epsilon must be nonnegative"));
    }
    let limit = epsilon + T::lit(FEASIBILITY_SLACK);
    let fit = |s: &[usize]| -> (Vec<T>, T) {
        if s.is_empty() {
            return (Vec::new(), norm2(y));
        }
        let ls = least_squares(&a.select_columns(s), y).expect("dimensions validated");
        (ls.solution, ls.residual_norm)
    };

    let mut budget = Budget::new(budget);
    for t in 0..=k_max {
        budget.charge_size(n, t)?;
        let found: Vec<(Vec<usize>, Fit<T>)> = if enumerate_all {
            collect_all(n, t, |s| {
                let (coef, res) = fit(s);
                (res <= limit).then_some((coef, res))
            })
        } else {
            find_first(n, t, |s| fit(s).1 <= limit)
                .map(|s| {
                    let r = fit(&s);
                    vec![(s, r)]
                })
                .unwrap_or_default()
        };
        if found.is_empty() {
            continue;
        }
        let (minimizers, residuals) = found
            .into_iter()
            .map(|(s, (coef, res))| {
                let coeffs = SparseCoefficients::new(n, Support::from_sorted_unchecked(s), coef)
                    .expect("least-squares output is finite");
                (coeffs, res)
            })
            .unzip();
        return Ok(L0Solution {
            minimizers,
            cardinality: t,
            residuals,
            budget_used: budget.used(),
        });
    }

    let best = arg_max(n, k_max, |s| -fit(s).1).map_or_else(|| norm2(y), |(_, v)| -v);
    Err(Error::Infeasible {
        k_max,
        best_residual: best.to_f64_lossy(),
        epsilon: epsilon.to_f64_lossy(),
    })
}
