//! Dense real linear-algebra kernel: matrices, SVD, rank, range bases, least squares, text I/O.

mod matrix;
mod svd;
pub mod text;

pub use matrix::{add, distance, dot, norm1, norm2, sub, DenseMatrix};
pub use svd::{
    extremal_singular_values, least_squares, least_squares_with_tol, numeric_rank,
    orthonormal_range_basis, rank_above, singular_values, svd, LeastSquares, Svd,
    DEFAULT_REL_TOL,
};
