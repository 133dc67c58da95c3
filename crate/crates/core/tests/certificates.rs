use proptest::prelude::*;
use sigrec::certify::{
    d_spark, drip_constant, rip_constant, rip_delta_on_support, spark, spark_condition, CertifyConfig, SparkValue,
};
use sigrec::linalg::DenseMatrix;
use sigrec::model::{gen_gaussian_measurement, gen_paper_dictionary, Dictionary, MeasurementOperator, RngStream};
use sigrec::Matrix;

fn gaussian(rows: usize, cols: usize, rng: &mut RngStream) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.normal()).collect();
    DenseMatrix::from_row_major(rows, cols, data).unwrap()
}

/// Gaussian matrix whose last column is sometimes a combination of the first `t`.
fn planted(rows: usize, cols: usize, rng: &mut RngStream) -> Matrix {
    let mut a = gaussian(rows, cols, rng);
    let t = rng.below(rows + 1);
    if t > 0 {
        let mut cols_v: Vec<Vec<f64>> = (0..cols).map(|j| a.column(j)).collect();
        let w: Vec<f64> = (0..t).map(|_| rng.normal()).collect();
        cols_v[cols - 1] = (0..rows).map(|i| (0..t).map(|j| w[j] * cols_v[j][i]).sum()).collect();
        a = DenseMatrix::from_columns(rows, &cols_v).unwrap();
    }
    a
}

fn spark_of(v: SparkValue) -> usize {
    v.finite().unwrap_or(usize::MAX)
}

#[test]
fn dspark_with_identity_equals_spark() {
    let cfg = CertifyConfig::default();
    for seed in 0..50 {
        let mut rng = RngStream::new(11, seed);
        let rows = 2 + rng.below(3);
        let cols = rows + 3;
        let a = planted(rows, cols, &mut rng);
        let s = spark(&a, cols, &cfg).unwrap();
        let op = MeasurementOperator::new(a.clone()).unwrap();
        let ds = d_spark(&op, &Dictionary::identity(cols).unwrap(), cols, &cfg).unwrap();
        assert_eq!(s.value, ds.value, "seed {seed}");
        assert_eq!(s.witness, ds.witness, "seed {seed}");
    }
}

#[test]
fn drip_with_identity_equals_rip() {
    let cfg = CertifyConfig::default();
    for seed in 0..20 {
        let mut rng = RngStream::new(12, seed);
        let a = gaussian(4, 7, &mut rng).scale(0.5);
        let op = MeasurementOperator::new(a.clone()).unwrap();
        let id = Dictionary::identity(7).unwrap();
        for k in 1..=3 {
            let r = rip_constant(&a, k, &cfg).unwrap();
            let dr = drip_constant(&op, &id, k, &cfg).unwrap();
            assert!((r.delta - dr.delta).abs() <= 1e-10, "seed {seed} k {k}");
        }
    }
}

#[test]
fn small_drip_forces_k_below_dspark() {
    let cfg = CertifyConfig::default();
    let mut tested = 0;
    for seed in 0..30 {
        let mut rng = RngStream::new(13, seed);
        let dict = Dictionary::new(planted(6, 9, &mut rng)).unwrap();
        let m = gen_gaussian_measurement::<f64>(4, 6, &mut rng).unwrap();
        let m = MeasurementOperator::new(m.matrix().scale(0.45)).unwrap();
        let ds = d_spark(&m, &dict, 9, &cfg).unwrap();
        for k in 1..=4 {
            let delta = drip_constant(&m, &dict, k, &cfg).unwrap().delta;
            if delta < 1.0 {
                tested += 1;
                assert!(k < spark_of(ds.value), "seed {seed} k {k} delta {delta}");
            }
        }
    }
    assert!(tested > 0);
}

#[test]
fn spark_witness_is_a_minimal_dependent_set() {
    let cfg = CertifyConfig::default();
    for seed in 0..20 {
        let mut rng = RngStream::new(14, seed);
        let a = planted(4, 7, &mut rng);
        let cert = spark(&a, 7, &cfg).unwrap();
        let Some(v) = cert.value.finite() else { continue };
        let w = cert.witness.unwrap();
        assert_eq!(w.len(), v);
        assert!(spark_condition(&a, w.indices(), cfg.rel_tol));
        for drop in 0..v {
            let sub: Vec<usize> = w.indices().iter().enumerate().filter(|&(i, _)| i != drop).map(|(_, &j)| j).collect();
            assert!(sub.is_empty() || !spark_condition(&a, &sub, cfg.rel_tol));
        }
    }
}

#[test]
fn paper_dictionary_has_spark_four() {
    let cfg = CertifyConfig::default();
    let mut rng = RngStream::new(5, 0);
    let dict = gen_paper_dictionary::<f64>(12, &mut rng).unwrap();
    assert_eq!(spark(dict.matrix(), 5, &cfg).unwrap().value, SparkValue::Finite(4));
}

fn permute_columns(a: &Matrix, perm: &[usize]) -> Matrix {
    let cols: Vec<Vec<f64>> = perm.iter().map(|&j| a.column(j)).collect();
    DenseMatrix::from_columns(a.rows(), &cols).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn certificates_ignore_column_order(seed in 0u64..1000, perm in Just((0..6).collect::<Vec<usize>>()).prop_shuffle()) {
        let cfg = CertifyConfig::default();
        let mut rng = RngStream::new(15, seed);
        let a = planted(3, 6, &mut rng);
        let b = permute_columns(&a, &perm);
        prop_assert_eq!(spark(&a, 6, &cfg).unwrap().value, spark(&b, 6, &cfg).unwrap().value);
        for k in 1..=3 {
            let da = rip_constant(&a, k, &cfg).unwrap().delta;
            let db = rip_constant(&b, k, &cfg).unwrap().delta;
            prop_assert!((da - db).abs() <= 1e-10 * da.max(1.0));
        }
    }

    #[test]
    fn rip_is_monotone_in_k(seed in 0u64..1000) {
        let cfg = CertifyConfig::default();
        let mut rng = RngStream::new(16, seed);
        let a = gaussian(4, 7, &mut rng).scale(0.5);
        let deltas: Vec<f64> = (1..=4).map(|k| rip_constant(&a, k, &cfg).unwrap().delta).collect();
        for w in deltas.windows(2) {
            prop_assert!(w[0] <= w[1] + 1e-12);
        }
        let top = rip_constant(&a, 3, &cfg).unwrap();
        prop_assert!((rip_delta_on_support(&a, top.witness_support.indices()) - top.delta).abs() <= 1e-14);
    }
}
