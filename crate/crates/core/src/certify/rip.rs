use super::spark::check_tol;
use super::{CertifyConfig, RipConstant, RipFlavor};
use crate::enumerate::{arg_max, Budget};
use crate::error::{invalid, Error, Result};
use crate::linalg::{orthonormal_range_basis, singular_values, DenseMatrix};
use crate::model::{Dictionary, MeasurementOperator, Support};
use crate::scalar::Scalar;

/// `max(σ_max² − 1, 1 − σ_min²)` for an operator restricted to an `r`-dimensional
/// coordinate space. When `r` exceeds the row count some direction is annihilated,
/// so the lower isometry constant is zero.
fn isometry_gap<T: Scalar>(b: &DenseMatrix<T>) -> T {
    if b.cols() == 0 {
        return T::zero();
    }
    let s = singular_values(b).expect("nonempty operator");
    let upper = s[0] * s[0];
    let lower = if b.cols() > b.rows() {
        T::zero()
    } else {
        let last = s[s.len() - 1];
        last * last
    };
    (upper - T::one()).max(T::one() - lower)
}

/// The RIP gap of `A_T` for one support.
pub fn rip_delta_on_support<T: Scalar>(a: &DenseMatrix<T>, support: &[usize]) -> T {
    isometry_gap(&a.select_columns(support))
}

/// The D-RIP gap over `range(D_T)` for one support: the gap of `M·Q_T`
/// where `Q_T` is an orthonormal basis of `range(D_T)`.
pub fn drip_delta_on_support<T: Scalar>(
    m: &MeasurementOperator<T>,
    dict: &Dictionary<T>,
    support: &[usize],
    rel_tol: T,
) -> Result<T> {
    let q = orthonormal_range_basis(&dict.matrix().select_columns(support), rel_tol)?;
    Ok(isometry_gap(&m.matrix().matmul(&q)?))
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(invalid(format!("sparsity k must lie in [1, {n}], got {k}")));
    }
    Ok(())
}

/// `δ_k` of `a`: the largest isometry gap over all size-`k` column subsets.
/// Smaller supports sit inside some size-`k` superset, so one size suffices.
pub fn rip_constant<T: Scalar>(
    a: &DenseMatrix<T>,
    k: usize,
    config: &CertifyConfig<T>,
) -> Result<RipConstant<T>> {
    check_k(k, a.cols())?;
    let mut budget = Budget::new(config.budget);
    budget.charge_size(a.cols(), k)?;
    let (w, delta) = arg_max(a.cols(), k, |s| rip_delta_on_support(a, s)).expect("k <= n");
    Ok(RipConstant {
        flavor: RipFlavor::Rip,
        k,
        delta,
        witness_support: Support::from_sorted_unchecked(w),
        rel_tol: config.rel_tol.to_f64_lossy(),
        budget_used: budget.used(),
    })
}

/// `δ_k^D` of `m`: the largest isometry gap of `M` over `range(D_T)`, `|T| = k`.
pub fn drip_constant<T: Scalar>(
    m: &MeasurementOperator<T>,
    dict: &Dictionary<T>,
    k: usize,
    config: &CertifyConfig<T>,
) -> Result<RipConstant<T>> {
    if m.d() != dict.d() {
        return Err(Error::DimensionMismatch {
            context: "measurement columns vs dictionary rows",
            expected: dict.d(),
            got: m.d(),
        });
    }
    check_k(k, dict.n())?;
    check_tol(config.rel_tol)?;
    let mut budget = Budget::new(config.budget);
    budget.charge_size(dict.n(), k)?;
    let (w, delta) = arg_max(dict.n(), k, |s| {
        drip_delta_on_support(m, dict, s, config.rel_tol).expect("validated dimensions")
    })
    .expect("k <= n");
    Ok(RipConstant {
        flavor: RipFlavor::DRip,
        k,
        delta,
        witness_support: Support::from_sorted_unchecked(w),
        rel_tol: config.rel_tol.to_f64_lossy(),
        budget_used: budget.used(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gen_gaussian_measurement, RngStream};

    fn cfg() -> CertifyConfig<f64> {
        CertifyConfig::default()
    }

    #[test]
    fn orthonormal_columns_have_zero_delta() {
        let c = rip_constant(&DenseMatrix::<f64>::identity(5), 3, &cfg()).unwrap();
        assert!(c.delta.abs() < 1e-15);
    }

    #[test]
    fn scaled_identity() {
        let c = rip_constant(&DenseMatrix::<f64>::identity(3).scale(2.0), 1, &cfg()).unwrap();
        assert!((c.delta - 3.0).abs() < 1e-14);
    }

    #[test]
    fn row_of_ones() {
        // Gram [[1,1],[1,1]] has eigenvalues 2 and 0.
        let a = DenseMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let c = rip_constant(&a, 2, &cfg()).unwrap();
        assert!((c.delta - 1.0).abs() < 1e-14);
        assert_eq!(c.witness_support.indices(), &[0, 1]);
    }

    #[test]
    fn isometric_measurement_gives_zero_drip() {
        // Orthogonal M: a 2-D rotation.
        let (c, s) = (0.6, 0.8);
        let m = MeasurementOperator::new(DenseMatrix::from_rows(&[vec![c, -s], vec![s, c]]).unwrap()).unwrap();
        let dict = Dictionary::new(
            DenseMatrix::from_rows(&[vec![1.0, 3.0, -1.0], vec![2.0, 0.5, 4.0]]).unwrap(),
        )
        .unwrap();
        for k in 1..=3 {
            let r = drip_constant(&m, &dict, k, &cfg()).unwrap();
            assert!(r.delta.abs() < 1e-14, "k={k} delta={}", r.delta);
        }
    }

    #[test]
    fn witness_reproduces_delta() {
        let m = gen_gaussian_measurement::<f64>(4, 6, &mut RngStream::new(1, 1)).unwrap();
        let c = rip_constant(m.matrix(), 2, &cfg()).unwrap();
        let again = rip_delta_on_support(m.matrix(), c.witness_support.indices());
        assert!((again - c.delta).abs() <= 1e-10);
    }

    #[test]
    fn k_is_validated() {
        let a = DenseMatrix::<f64>::identity(3);
        assert!(rip_constant(&a, 0, &cfg()).is_err());
        assert!(rip_constant(&a, 4, &cfg()).is_err());
    }
}
