use super::{CertificateKind, CertifyConfig, SparkCertificate, SparkValue};
use crate::enumerate::{find_first, lex_rank, binomial, Budget};
use crate::error::{invalid, Error, Result};
use crate::linalg::{singular_values, DenseMatrix};
use crate::model::{Dictionary, MeasurementOperator, Support};
use crate::scalar::Scalar;

/// Smallest number of linearly dependent columns of `a`, searched up to `cap`.
///
/// A size-`t` column set is dependent when its numeric rank (relative to its
/// own largest singular value) is below `t`.
pub fn spark<T: Scalar>(a: &DenseMatrix<T>, cap: usize, config: &CertifyConfig<T>) -> Result<SparkCertificate> {
    check_cap(cap, a.cols())?;
    check_tol(config.rel_tol)?;
    search(
        CertificateKind::Spark,
        a.cols(),
        cap,
        config,
        |s| spark_condition(a, s, config.rel_tol),
    )
}

/// Smallest `|T|` such that `range(D_T) ∩ Null(M) ≠ {0}`, searched up to `cap`.
///
/// Tested as `rank(M·D_T) < rank(D_T)`; the rank of `M·D_T` counts singular
/// values above `rel_tol · ‖M‖₂ · ‖D_T‖₂`, so a product that collapses to
/// round-off counts as rank zero.
pub fn d_spark<T: Scalar>(
    m: &MeasurementOperator<T>,
    dict: &Dictionary<T>,
    cap: usize,
    config: &CertifyConfig<T>,
) -> Result<SparkCertificate> {
    if m.d() != dict.d() {
        return Err(Error::DimensionMismatch {
            context: "measurement columns vs dictionary rows",
            expected: dict.d(),
            got: m.d(),
        });
    }
    check_cap(cap, dict.n())?;
    check_tol(config.rel_tol)?;
    let m_norm = singular_values(m.matrix())?[0];
    let md = m.compose(dict)?;
    search(CertificateKind::DSpark, dict.n(), cap, config, |s| {
        dspark_condition_with(dict.matrix(), &md, m_norm, s, config.rel_tol)
    })
}

/// Whether the columns `support` of `a` are numerically dependent.
pub fn spark_condition<T: Scalar>(a: &DenseMatrix<T>, support: &[usize], rel_tol: T) -> bool {
    let s = singular_values(&a.select_columns(support)).expect("nonempty submatrix");
    let cutoff = rel_tol * s[0];
    s.iter().filter(|&&x| x > cutoff).count() < support.len()
}

/// Whether `range(D_T)` meets `Null(M)` nontrivially for `T = support`.
pub fn dspark_condition<T: Scalar>(
    m: &MeasurementOperator<T>,
    dict: &Dictionary<T>,
    support: &[usize],
    rel_tol: T,
) -> Result<bool> {
    let m_norm = singular_values(m.matrix())?[0];
    let md = m.compose(dict)?;
    Ok(dspark_condition_with(dict.matrix(), &md, m_norm, support, rel_tol))
}

fn dspark_condition_with<T: Scalar>(
    d: &DenseMatrix<T>,
    md: &DenseMatrix<T>,
    m_norm: T,
    support: &[usize],
    rel_tol: T,
) -> bool {
    let sd = singular_values(&d.select_columns(support)).expect("nonempty submatrix");
    let rank_d = sd.iter().filter(|&&x| x > rel_tol * sd[0]).count();
    let threshold = rel_tol * m_norm * sd[0];
    let smd = singular_values(&md.select_columns(support)).expect("nonempty submatrix");
    let rank_md = smd.iter().filter(|&&x| x > threshold).count();
    rank_md < rank_d
}

fn search<T: Scalar>(
    kind: CertificateKind,
    n: usize,
    cap: usize,
    config: &CertifyConfig<T>,
    condition: impl Fn(&[usize]) -> bool + Sync,
) -> Result<SparkCertificate> {
    let mut budget = Budget::new(config.budget);
    for size in 1..=cap {
        budget.charge_size(n, size)?;
        if let Some(w) = find_first(n, size, &condition) {
            budget.refund(binomial(n, size) - (lex_rank(n, &w) + 1));
            return Ok(SparkCertificate {
                kind,
                value: SparkValue::Finite(size),
                witness: Some(Support::from_sorted_unchecked(w)),
                exhausted_up_to: size - 1,
                rel_tol: config.rel_tol.to_f64_lossy(),
                budget_used: budget.used(),
            });
        }
    }
    Ok(SparkCertificate {
        kind,
        value: SparkValue::Infinite,
        witness: None,
        exhausted_up_to: cap,
        rel_tol: config.rel_tol.to_f64_lossy(),
        budget_used: budget.used(),
    })
}

fn check_cap(cap: usize, n: usize) -> Result<()> {
    if cap == 0 || cap > n {
        return Err(invalid(format!("cap must lie in [1, {n}], got {cap}")));
    }
    Ok(())
}

pub(super) fn check_tol<T: Scalar>(rel_tol: T) -> Result<()> {
    if !(rel_tol > T::zero() && rel_tol < T::one()) {
        return Err(invalid(format!("rel_tol must lie in (0, 1), got {rel_tol}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{gen_duplicated_dictionary, gen_gaussian_measurement, RngStream};

    fn cfg() -> CertifyConfig<f64> {
        CertifyConfig::default()
    }

    #[test]
    fn identity_has_infinite_spark() {
        let c = spark(&DenseMatrix::<f64>::identity(5), 5, &cfg()).unwrap();
        assert!(c.is_infinite());
        assert_eq!(c.exhausted_up_to, 5);
        assert_eq!(c.witness, None);
        assert_eq!(c.budget_used, 31);
    }

    #[test]
    fn duplicated_atoms_have_spark_two() {
        let d = gen_duplicated_dictionary(&[1.0, -0.5, 2.0], 4).unwrap();
        let c = spark(d.matrix(), 4, &cfg()).unwrap();
        assert_eq!(c.value, SparkValue::Finite(2));
        assert_eq!(c.witness.unwrap().indices(), &[0, 1]);
        assert_eq!(c.exhausted_up_to, 1);
        // 4 singletons + the first pair.
        assert_eq!(c.budget_used, 5);
    }

    #[test]
    fn zero_column_gives_spark_one() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let c = spark(&a, 2, &cfg()).unwrap();
        assert_eq!(c.value, SparkValue::Finite(1));
        assert_eq!(c.witness.unwrap().indices(), &[1]);
    }

    #[test]
    fn dspark_of_duplicated_atom() {
        let z = vec![1.0, 2.0, -1.0];
        let d = gen_duplicated_dictionary(&z, 5).unwrap();
        let m = gen_gaussian_measurement::<f64>(2, 3, &mut RngStream::new(0, 0)).unwrap();
        let c = d_spark(&m, &d, 5, &cfg()).unwrap();
        assert!(c.is_infinite());

        // Rows orthogonal to z put z in the nullspace.
        let m0 = MeasurementOperator::new(
            DenseMatrix::from_rows(&[vec![2.0, -1.0, 0.0], vec![1.0, 0.0, 1.0]]).unwrap(),
        )
        .unwrap();
        let c = d_spark(&m0, &d, 5, &cfg()).unwrap();
        assert_eq!(c.value, SparkValue::Finite(1));
    }

    #[test]
    fn budget_is_loud() {
        let a = DenseMatrix::<f64>::identity(30);
        let tight = CertifyConfig {
            budget: 1000,
            ..cfg()
        };
        match spark(&a, 4, &tight) {
            Err(Error::BudgetExceeded { n: 30, size: 3, .. }) => {}
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn cap_and_tolerance_are_validated() {
        let a = DenseMatrix::<f64>::identity(3);
        assert!(spark(&a, 0, &cfg()).is_err());
        assert!(spark(&a, 4, &cfg()).is_err());
        assert!(spark(&a, 2, &CertifyConfig::with_rel_tol(0.0)).is_err());
    }
}
