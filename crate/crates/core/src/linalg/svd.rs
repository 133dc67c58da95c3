//! One-sided Jacobi SVD and the rank / range / least-squares kernels built on it.
//!
//! Hestenes' one-sided Jacobi is used throughout: it computes small singular
//! values to high relative accuracy, which matters for rank decisions on
//! exactly dependent column sets.

use super::matrix::{distance, dot, norm2, DenseMatrix};
use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Default relative rank tolerance (relative to the largest singular value).
pub const DEFAULT_REL_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 80;

/// Thin SVD `A = U diag(s) Vᵀ` with `p = min(rows, cols)` singular values sorted
/// in descending order. `u` is rows×p and `v` is cols×p; columns of `u` that
/// belong to zero singular values are zero.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    pub u: DenseMatrix<T>,
    pub s: Vec<T>,
    pub v: DenseMatrix<T>,
}

/// Orthogonalises the columns in place; returns the accumulated right rotations (p×p, column-major).
fn jacobi_columns<T: Scalar>(cols: &mut [Vec<T>]) -> Vec<Vec<T>> {
    let p = cols.len();
    let mut v: Vec<Vec<T>> = (0..p)
        .map(|j| {
            let mut e = vec![T::zero(); p];
            e[j] = T::one();
            e
        })
        .collect();
    let eps = T::epsilon();
    let tiny = T::min_positive_value();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..p {
            for j in (i + 1)..p {
                let alpha = dot(&cols[i], &cols[i]);
                let beta = dot(&cols[j], &cols[j]);
                let gamma = dot(&cols[i], &cols[j]);
                if alpha <= tiny || beta <= tiny {
                    continue;
                }
                if gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (gamma + gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(cols, i, j, c, s);
                rotate(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            break;
        }
    }
    v
}

#[inline]
fn rotate<T: Scalar>(cols: &mut [Vec<T>], i: usize, j: usize, c: T, s: T) {
    let (lo, hi) = cols.split_at_mut(j);
    for (a, b) in lo[i].iter_mut().zip(hi[0].iter_mut()) {
        let x = *a;
        let y = *b;
        *a = c * x - s * y;
        *b = s * x + c * y;
    }
}

/// Thin SVD of a tall or square matrix given as columns.
fn svd_tall<T: Scalar>(rows: usize, mut cols: Vec<Vec<T>>) -> (Vec<Vec<T>>, Vec<T>, Vec<Vec<T>>) {
    let v = jacobi_columns(&mut cols);
    let mut order: Vec<(T, usize)> = cols.iter().map(|c| norm2(c)).zip(0..).collect();
    // Stable descending sort keeps the output deterministic on ties.
    order.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut u = Vec::with_capacity(order.len());
    let mut s = Vec::with_capacity(order.len());
    let mut vs = Vec::with_capacity(order.len());
    for &(sigma, j) in &order {
        let col = if sigma > T::zero() {
            cols[j].iter().map(|&x| x / sigma).collect()
        } else {
            vec![T::zero(); rows]
        };
        u.push(col);
        s.push(sigma);
        vs.push(v[j].clone());
    }
    (u, s, vs)
}

fn columns_of<T: Scalar>(a: &DenseMatrix<T>) -> Vec<Vec<T>> {
    (0..a.cols()).map(|j| a.column(j)).collect()
}

fn require_nonempty<T: Scalar>(a: &DenseMatrix<T>) -> Result<()> {
    if a.is_empty() {
        return Err(invalid(format!(
            "matrix with a zero dimension ({}x{})",
            a.rows(),
            a.cols()
        )));
    }
    Ok(())
}

pub fn svd<T: Scalar>(a: &DenseMatrix<T>) -> Result<Svd<T>> {
    require_nonempty(a)?;
    let (rows, cols) = a.shape();
    if rows >= cols {
        let (u, s, v) = svd_tall(rows, columns_of(a));
        Ok(Svd {
            u: DenseMatrix::from_columns(rows, &u)?,
            s,
            v: DenseMatrix::from_columns(cols, &v)?,
        })
    } else {
        // Aᵀ = U' S V'ᵀ  =>  A = V' S U'ᵀ
        let (u, s, v) = svd_tall(cols, columns_of(&a.transpose()));
        Ok(Svd {
            u: DenseMatrix::from_columns(rows, &v)?,
            s,
            v: DenseMatrix::from_columns(cols, &u)?,
        })
    }
}

/// All `min(rows, cols)` singular values, descending.
pub fn singular_values<T: Scalar>(a: &DenseMatrix<T>) -> Result<Vec<T>> {
    require_nonempty(a)?;
    let mut cols = if a.rows() >= a.cols() {
        columns_of(a)
    } else {
        columns_of(&a.transpose())
    };
    jacobi_columns(&mut cols);
    let mut s: Vec<T> = cols.iter().map(|c| norm2(c)).collect();
    s.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    Ok(s)
}

/// `(σ_max, σ_min)` where `σ_min` is the `min(rows, cols)`-th singular value.
pub fn extremal_singular_values<T: Scalar>(a: &DenseMatrix<T>) -> Result<(T, T)> {
    let s = singular_values(a)?;
    Ok((s[0], s[s.len() - 1]))
}

/// Number of singular values strictly above `threshold`.
pub fn rank_above<T: Scalar>(a: &DenseMatrix<T>, threshold: T) -> Result<usize> {
    if a.is_empty() {
        return Ok(0);
    }
    Ok(singular_values(a)?
        .into_iter()
        .filter(|&s| s > threshold)
        .count())
}

/// Count of singular values strictly greater than `rel_tol · σ_max(A)`; zero for the zero matrix.
pub fn numeric_rank<T: Scalar>(a: &DenseMatrix<T>, rel_tol: T) -> Result<usize> {
    check_rel_tol(rel_tol)?;
    if a.is_empty() {
        return Ok(0);
    }
    let s = singular_values(a)?;
    let cutoff = rel_tol * s[0];
    Ok(s.into_iter().filter(|&x| x > cutoff).count())
}

fn check_rel_tol<T: Scalar>(rel_tol: T) -> Result<()> {
    if !(rel_tol > T::zero() && rel_tol < T::one()) {
        return Err(invalid(format!("rel_tol must lie in (0, 1), got {rel_tol}")));
    }
    Ok(())
}

/// Orthonormal basis (as columns) of the column space of `A` at rank tolerance `rel_tol`.
/// A zero matrix yields a `rows × 0` basis.
pub fn orthonormal_range_basis<T: Scalar>(a: &DenseMatrix<T>, rel_tol: T) -> Result<DenseMatrix<T>> {
    check_rel_tol(rel_tol)?;
    require_nonempty(a)?;
    let dec = svd(a)?;
    let cutoff = rel_tol * dec.s[0];
    let r = dec.s.iter().filter(|&&s| s > cutoff && s > T::zero()).count();
    let mut basis: Vec<Vec<T>> = (0..r).map(|j| dec.u.column(j)).collect();
    reorthonormalize(&mut basis);
    DenseMatrix::from_columns(a.rows(), &basis)
}

/// One pass of modified Gram-Schmidt; the input is already nearly orthonormal.
fn reorthonormalize<T: Scalar>(basis: &mut [Vec<T>]) {
    for j in 0..basis.len() {
        let (done, rest) = basis.split_at_mut(j);
        let col = &mut rest[0];
        for q in done.iter() {
            let c = dot(q, col);
            for (x, &qv) in col.iter_mut().zip(q) {
                *x -= c * qv;
            }
        }
        let n = norm2(col);
        for x in col.iter_mut() {
            *x /= n;
        }
    }
}

/// Minimum-norm least-squares solution and its residual norm `‖Av − y‖₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares<T> {
    pub solution: Vec<T>,
    pub residual_norm: T,
}

pub fn least_squares<T: Scalar>(a: &DenseMatrix<T>, y: &[T]) -> Result<LeastSquares<T>> {
    least_squares_with_tol(a, y, T::lit(DEFAULT_REL_TOL))
}

/// Least squares via the thin SVD, discarding singular values at or below `rel_tol · σ_max`.
pub fn least_squares_with_tol<T: Scalar>(
    a: &DenseMatrix<T>,
    y: &[T],
    rel_tol: T,
) -> Result<LeastSquares<T>> {
    check_rel_tol(rel_tol)?;
    if a.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "least squares right-hand side",
            expected: a.rows(),
            got: y.len(),
        });
    }
    let mut solution = vec![T::zero(); a.cols()];
    if !a.is_empty() {
        let dec = svd(a)?;
        let cutoff = rel_tol * dec.s[0];
        for (j, &sigma) in dec.s.iter().enumerate() {
            if !(sigma > cutoff && sigma > T::zero()) {
                break;
            }
            let coef = dot(&dec.u.column(j), y) / sigma;
            for (i, x) in solution.iter_mut().enumerate() {
                *x += coef * dec.v[(i, j)];
            }
        }
    }
    let fitted = if a.cols() == 0 {
        vec![T::zero(); a.rows()]
    } else {
        a.matvec(&solution)?
    };
    Ok(LeastSquares {
        residual_norm: distance(&fitted, y),
        solution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> DenseMatrix<f64> {
        DenseMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn extremal_values_of_simple_matrices() {
        let (hi, lo) = extremal_singular_values(&DenseMatrix::<f64>::identity(3)).unwrap();
        assert!((hi - 1.0).abs() < 1e-15 && (lo - 1.0).abs() < 1e-15);
        let (hi, lo) = extremal_singular_values(&DenseMatrix::from_diagonal(&[2.0, 0.5])).unwrap();
        assert_eq!((hi, lo), (2.0, 0.5));
        // One singular value for a 1x2 matrix: both extremes are √2.
        let (hi, lo) = extremal_singular_values(&m(&[&[1.0, 1.0]])).unwrap();
        assert!((hi - 2f64.sqrt()).abs() < 1e-15);
        assert!((lo - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_dimension_is_rejected() {
        let empty = DenseMatrix::<f64>::zeros(0, 3);
        assert!(matches!(
            extremal_singular_values(&empty),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numeric_rank(&DenseMatrix::<f64>::identity(4), 1e-10).unwrap(), 4);
        assert_eq!(numeric_rank(&DenseMatrix::<f64>::zeros(3, 3), 1e-10).unwrap(), 0);
        assert_eq!(numeric_rank(&m(&[&[1.0, 1.0], &[1.0, 1.0]]), 1e-10).unwrap(), 1);
        assert!(numeric_rank(&DenseMatrix::<f64>::identity(2), 1.5).is_err());
    }

    #[test]
    fn range_basis_examples() {
        let q = orthonormal_range_basis(&m(&[&[1.0], &[0.0]]), 1e-10).unwrap();
        assert_eq!(q.shape(), (2, 1));
        assert!((q[(0, 0)].abs() - 1.0).abs() < 1e-15 && q[(1, 0)] == 0.0);

        let q = orthonormal_range_basis(&m(&[&[1.0, 2.0], &[1.0, 2.0]]), 1e-10).unwrap();
        assert_eq!(q.shape(), (2, 1));
        let h = 0.5f64.sqrt();
        assert!((q[(0, 0)].abs() - h).abs() < 1e-15);
        assert!((q[(1, 0)] - q[(0, 0)]).abs() < 1e-15);

        let q = orthonormal_range_basis(&DenseMatrix::<f64>::identity(3), 1e-10).unwrap();
        let gram = q.transpose().matmul(&q).unwrap();
        assert!(gram.max_abs_diff(&DenseMatrix::identity(3)).unwrap() < 1e-12);

        let q = orthonormal_range_basis(&DenseMatrix::<f64>::zeros(3, 2), 1e-10).unwrap();
        assert_eq!(q.shape(), (3, 0));
    }

    #[test]
    fn least_squares_examples() {
        let ls = least_squares(&DenseMatrix::identity(2), &[1.0, 2.0]).unwrap();
        assert_eq!(ls.solution, vec![1.0, 2.0]);
        assert_eq!(ls.residual_norm, 0.0);

        let ls = least_squares(&m(&[&[1.0], &[1.0]]), &[0.0, 2.0]).unwrap();
        assert!((ls.solution[0] - 1.0).abs() < 1e-15);
        assert!((ls.residual_norm - 2f64.sqrt()).abs() < 1e-15);

        let ls = least_squares(&DenseMatrix::zeros(2, 2), &[1.0, 0.0]).unwrap();
        assert_eq!(ls.solution, vec![0.0, 0.0]);
        assert_eq!(ls.residual_norm, 1.0);

        assert!(matches!(
            least_squares(&DenseMatrix::<f64>::identity(2), &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn minimum_norm_on_duplicated_columns() {
        let ls = least_squares(&m(&[&[1.0, 1.0], &[0.0, 0.0]]), &[2.0, 0.0]).unwrap();
        assert!((ls.solution[0] - 1.0).abs() < 1e-14 && (ls.solution[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn wide_matrix_svd_reconstructs() {
        let a = m(&[&[1.0, 2.0, 0.0, -1.0], &[0.5, -1.0, 3.0, 2.0]]);
        let dec = svd(&a).unwrap();
        assert_eq!(dec.u.shape(), (2, 2));
        assert_eq!(dec.v.shape(), (4, 2));
        let us = dec
            .u
            .matmul(&DenseMatrix::from_diagonal(&dec.s))
            .unwrap()
            .matmul(&dec.v.transpose())
            .unwrap();
        assert!(us.max_abs_diff(&a).unwrap() < 1e-13);
    }

    #[test]
    fn works_in_single_precision() {
        let a = DenseMatrix::<f32>::from_rows(&[vec![3.0, 0.0], vec![0.0, 4.0]]).unwrap();
        let (hi, lo) = extremal_singular_values(&a).unwrap();
        assert_eq!((hi, lo), (4.0, 3.0));
        assert_eq!(numeric_rank(&a, 1e-5).unwrap(), 2);
    }
}
