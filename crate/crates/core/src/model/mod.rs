//! Synthesis-model data types and seeded instance generators.

mod bundle;
mod rng;
mod types;

pub use bundle::{read_bundle, write_bundle, GeneratorNames, InstanceBundle, InstanceMeta};
pub use rng::RngStream;
pub use types::{Dictionary, MeasurementOperator, ProblemInstance, SparseCoefficients, Support};

use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, norm2, numeric_rank, DenseMatrix, DEFAULT_REL_TOL};
use crate::scalar::Scalar;

/// `x = Dα`.
pub fn synthesize<T: Scalar>(dict: &Dictionary<T>, alpha: &SparseCoefficients<T>) -> Result<Vec<T>> {
    if alpha.n() != dict.n() {
        return Err(Error::DimensionMismatch {
            context: "coefficient length vs atom count",
            expected: dict.n(),
            got: alpha.n(),
        });
    }
    let mut x = vec![T::zero(); dict.d()];
    let a = dict.matrix();
    for (&j, &v) in alpha.support().indices().iter().zip(alpha.values()) {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += a[(i, j)] * v;
        }
    }
    Ok(x)
}

/// `y = Mx + e`.
pub fn measure<T: Scalar>(op: &MeasurementOperator<T>, x: &[T], e: &[T]) -> Result<Vec<T>> {
    let mx = op.matrix().matvec(x)?;
    types::checked_add(&mx, e, "noise length vs measurement count")
}

/// The coherent two-block dictionary `[D1, D2]` together with the generator
/// triple behind each `D2` column.
#[derive(Debug, Clone)]
pub struct PaperDictionary<T> {
    pub dictionary: Dictionary<T>,
    /// `generators[j]` are the `D1` columns combined into column `d + j`.
    pub generators: Vec<[usize; 3]>,
}

const MAX_REDRAWS: usize = 10_000;

/// `D = [D1, D2]`, `d × 2d`.
///
/// Each `D1` column has two nonzero entries, `±1` with equal probability, on
/// two distinct uniformly chosen rows. A candidate `D1` column that would be
/// linearly dependent with one or two earlier `D1` columns is redrawn, so the
/// smallest dependent set in `D` is always a `D2` column with its generators.
/// Each `D2` column combines three distinct uniformly chosen `D1` columns with
/// independent standard-normal weights; numerically zero combinations are
/// redrawn.
pub fn gen_paper_dictionary<T: Scalar>(d: usize, rng: &mut RngStream) -> Result<Dictionary<T>> {
    gen_paper_dictionary_detailed(d, rng).map(|p| p.dictionary)
}

pub fn gen_paper_dictionary_detailed<T: Scalar>(
    d: usize,
    rng: &mut RngStream,
) -> Result<PaperDictionary<T>> {
    if d < 4 {
        return Err(invalid(format!("paper dictionary needs d >= 4, got {d}")));
    }
    let mut d1: Vec<Vec<T>> = Vec::with_capacity(d);
    let mut rows_of: Vec<[usize; 2]> = Vec::with_capacity(d);
    for j in 0..d {
        let mut attempts = 0;
        loop {
            attempts += 1;
            if attempts > MAX_REDRAWS {
                return Err(invalid(format!(
                    "could not place D1 column {j} without a short dependency (d = {d})"
                )));
            }
            let rows = rng.subset(d, 2);
            let mut col = vec![T::zero(); d];
            for &r in &rows {
                col[r] = if rng.coin() { T::one() } else { -T::one() };
            }
            if !closes_short_dependency(&d1, &rows_of, &col, [rows[0], rows[1]])? {
                d1.push(col);
                rows_of.push([rows[0], rows[1]]);
                break;
            }
        }
    }

    let floor = T::lit(1e-12);
    let mut d2 = Vec::with_capacity(d);
    let mut generators = Vec::with_capacity(d);
    for j in 0..d {
        let mut attempts = 0;
        loop {
            attempts += 1;
            if attempts > MAX_REDRAWS {
                return Err(invalid(format!("D2 column {j} kept coming out zero")));
            }
            let g = rng.subset(d, 3);
            let mut col = vec![T::zero(); d];
            for &gi in &g {
                let w = T::lit(rng.normal());
                for (c, &v) in col.iter_mut().zip(&d1[gi]) {
                    *c += w * v;
                }
            }
            if norm2(&col) > floor {
                d2.push(col);
                generators.push([g[0], g[1], g[2]]);
                break;
            }
        }
    }

    d1.extend(d2);
    Ok(PaperDictionary {
        dictionary: Dictionary::new(DenseMatrix::from_columns(d, &d1)?)?,
        generators,
    })
}

/// Would `cand` be dependent with one or two existing two-sparse columns?
/// Only columns sharing a row with `cand` can take part in such a set.
fn closes_short_dependency<T: Scalar>(
    existing: &[Vec<T>],
    rows_of: &[[usize; 2]],
    cand: &[T],
    rows: [usize; 2],
) -> Result<bool> {
    let touching: Vec<usize> = rows_of
        .iter()
        .enumerate()
        .filter(|(_, r)| r.iter().any(|x| rows.contains(x)))
        .map(|(i, _)| i)
        .collect();
    let d = cand.len();
    let tol = T::lit(DEFAULT_REL_TOL);
    for (pos, &a) in touching.iter().enumerate() {
        let pair = DenseMatrix::from_columns(d, &[existing[a].clone(), cand.to_vec()])?;
        if numeric_rank(&pair, tol)? < 2 {
            return Ok(true);
        }
        for &b in &touching[pos + 1..] {
            let triple = DenseMatrix::from_columns(
                d,
                &[existing[a].clone(), existing[b].clone(), cand.to_vec()],
            )?;
            if numeric_rank(&triple, tol)? < 3 {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// `[z, z, …, z]` with `n` copies.
pub fn gen_duplicated_dictionary<T: Scalar>(z: &[T], n: usize) -> Result<Dictionary<T>> {
    if n == 0 {
        return Err(invalid("duplicated dictionary needs n >= 1"));
    }
    if z.iter().all(|v| *v == T::zero()) {
        return Err(invalid("duplicated atom must be nonzero"));
    }
    let cols = vec![z.to_vec(); n];
    Dictionary::new(DenseMatrix::from_columns(z.len(), &cols)?)
}

/// `m × d` matrix of i.i.d. standard normals, drawn row by row.
pub fn gen_gaussian_measurement<T: Scalar>(
    m: usize,
    d: usize,
    rng: &mut RngStream,
) -> Result<MeasurementOperator<T>> {
    let data = (0..m * d).map(|_| T::lit(rng.normal())).collect();
    MeasurementOperator::new(DenseMatrix::from_row_major(m, d, data)?)
}

/// Uniformly random size-`k` support of `[0, n)` with i.i.d. standard-normal
/// values (an exact zero is redrawn).
pub fn gen_sparse_representation<T: Scalar>(
    n: usize,
    k: usize,
    rng: &mut RngStream,
) -> Result<SparseCoefficients<T>> {
    if k > n {
        return Err(invalid(format!("sparsity {k} exceeds ambient dimension {n}")));
    }
    let support = rng.subset(n, k);
    let values = (0..k)
        .map(|_| loop {
            let v = rng.normal();
            if v != 0.0 {
                break T::lit(v);
            }
        })
        .collect();
    SparseCoefficients::new(n, Support::from_sorted_unchecked(support), values)
}

/// Noise vector of norm `epsilon` (shrunk by a few ulps if rounding overshoots),
/// uniformly distributed on the sphere.
pub fn gen_sphere_noise<T: Scalar>(m: usize, epsilon: T, rng: &mut RngStream) -> Vec<T> {
    let g: Vec<T> = (0..m).map(|_| T::lit(rng.normal())).collect();
    let n = norm2(&g);
    if epsilon == T::zero() || n == T::zero() {
        return vec![T::zero(); m];
    }
    let mut scale = epsilon / n;
    let mut e: Vec<T> = g.iter().map(|&v| v * scale).collect();
    while norm2(&e) > epsilon {
        scale *= T::one() - T::lit(4.0) * T::epsilon();
        e = g.iter().map(|&v| v * scale).collect();
    }
    e
}

/// Largest normalised inner product between two distinct atoms.
pub fn mutual_coherence<T: Scalar>(dict: &Dictionary<T>) -> Result<T> {
    let n = dict.n();
    if n < 2 {
        return Err(invalid("mutual coherence needs at least two atoms"));
    }
    let cols: Vec<Vec<T>> = (0..n).map(|j| dict.matrix().column(j)).collect();
    let norms: Vec<T> = cols.iter().map(|c| norm2(c)).collect();
    let mut mu = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            let c = dot(&cols[i], &cols[j]).abs() / (norms[i] * norms[j]);
            mu = mu.max(c);
        }
    }
    Ok(mu.min(T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::least_squares;

    #[test]
    fn synthesize_identity_and_duplicated() {
        let id = Dictionary::<f64>::identity(3).unwrap();
        let a = SparseCoefficients::new(3, Support::new(vec![1], 3).unwrap(), vec![5.0]).unwrap();
        assert_eq!(synthesize(&id, &a).unwrap(), vec![0.0, 5.0, 0.0]);

        let z = vec![1.0, -2.0, 0.5];
        let dup = gen_duplicated_dictionary(&z, 3).unwrap();
        for j in 0..3 {
            let a = SparseCoefficients::new(3, Support::new(vec![j], 3).unwrap(), vec![1.0]).unwrap();
            assert_eq!(synthesize(&dup, &a).unwrap(), z);
        }
        let bad = SparseCoefficients::<f64>::zero(4);
        assert!(synthesize(&id, &bad).is_err());
    }

    #[test]
    fn synthesize_matches_dense_product() {
        let mut rng = RngStream::new(3, 0);
        let d = DenseMatrix::from_row_major(4, 6, (0..24).map(|_| rng.normal()).collect()).unwrap();
        let dict = Dictionary::new(d.clone()).unwrap();
        let a = SparseCoefficients::new(6, Support::new(vec![0, 3], 6).unwrap(), vec![1.5, -0.25]).unwrap();
        let oracle = d.matvec(&a.densify()).unwrap();
        let got = synthesize(&dict, &a).unwrap();
        for (g, o) in got.iter().zip(&oracle) {
            assert!((g - o).abs() < 1e-15);
        }
    }

    #[test]
    fn measure_examples() {
        let m = MeasurementOperator::new(DenseMatrix::<f64>::identity(2)).unwrap();
        assert_eq!(measure(&m, &[1.0, 1.0], &[0.0, 0.0]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(measure(&m, &[1.0, 1.0], &[0.1, 0.0]).unwrap(), vec![1.1, 1.0]);
        assert!(measure(&m, &[1.0, 1.0], &[0.1]).is_err());

        let mut rng = RngStream::new(4, 0);
        let op = gen_gaussian_measurement::<f64>(3, 5, &mut rng).unwrap();
        let x: Vec<f64> = (0..5).map(|_| rng.normal()).collect();
        let e: Vec<f64> = (0..3).map(|_| rng.normal()).collect();
        let y = measure(&op, &x, &e).unwrap();
        for i in 0..3 {
            let oracle: f64 = (0..5).map(|j| op.matrix()[(i, j)] * x[j]).sum::<f64>() + e[i];
            assert!((y[i] - oracle).abs() < 1e-14);
        }
    }

    #[test]
    fn paper_dictionary_structure() {
        for seed in 0..5 {
            let p = gen_paper_dictionary_detailed::<f64>(12, &mut RngStream::new(seed, 0)).unwrap();
            let a = p.dictionary.matrix();
            assert_eq!(a.shape(), (12, 24));
            for j in 0..12 {
                let col = a.column(j);
                assert_eq!(col.iter().filter(|v| **v != 0.0).count(), 2);
                assert!(col.iter().all(|v| *v == 0.0 || v.abs() == 1.0));
            }
            for (j, g) in p.generators.iter().enumerate() {
                let basis = a.select_columns(g);
                let ls = least_squares(&basis, &a.column(12 + j)).unwrap();
                assert!(ls.residual_norm <= 1e-10);
            }
        }
    }

    #[test]
    fn paper_dictionary_is_deterministic_and_small_d_rejected() {
        let a = gen_paper_dictionary::<f64>(10, &mut RngStream::new(9, 2)).unwrap();
        let b = gen_paper_dictionary::<f64>(10, &mut RngStream::new(9, 2)).unwrap();
        assert_eq!(a, b);
        assert!(gen_paper_dictionary::<f64>(3, &mut RngStream::new(0, 0)).is_err());
        let d4 = gen_paper_dictionary::<f64>(4, &mut RngStream::new(0, 0)).unwrap();
        assert_eq!(d4.matrix().shape(), (4, 8));
    }

    #[test]
    fn duplicated_dictionary_examples() {
        let d = gen_duplicated_dictionary(&[1.0, 0.0], 3).unwrap();
        assert_eq!(d.matrix().row(0), &[1.0, 1.0, 1.0]);
        assert_eq!(d.matrix().row(1), &[0.0, 0.0, 0.0]);
        assert_eq!(gen_duplicated_dictionary(&[2.0, 3.0], 1).unwrap().n(), 1);
        assert!(gen_duplicated_dictionary(&[0.0, 0.0], 2).is_err());
    }

    #[test]
    fn gaussian_measurement_statistics_and_shape() {
        let m = gen_gaussian_measurement::<f64>(200, 100, &mut RngStream::new(7, 0)).unwrap();
        let v = m.matrix().as_slice();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64;
        assert!(mean.abs() <= 0.03, "mean {mean}");
        assert!((0.95..=1.05).contains(&var), "var {var}");

        let again = gen_gaussian_measurement::<f64>(200, 100, &mut RngStream::new(7, 0)).unwrap();
        assert_eq!(m, again);

        let gamma: f64 = 0.3;
        let rows = (gamma * 100.0 + 1e-9).floor() as usize;
        let sized = gen_gaussian_measurement::<f64>(rows, 100, &mut RngStream::new(7, 1)).unwrap();
        assert_eq!((sized.m(), sized.d()), (30, 100));
    }

    #[test]
    fn sparse_representation_examples() {
        let mut rng = RngStream::new(1, 1);
        let z = gen_sparse_representation::<f64>(10, 0, &mut rng).unwrap();
        assert!(z.support().is_empty() && z.densify() == vec![0.0; 10]);
        let full = gen_sparse_representation::<f64>(10, 10, &mut rng).unwrap();
        assert_eq!(full.support().indices(), &(0..10).collect::<Vec<_>>()[..]);
        assert!(full.values().iter().all(|v| *v != 0.0));
        assert!(gen_sparse_representation::<f64>(3, 4, &mut rng).is_err());
    }

    #[test]
    fn sparse_support_is_uniform() {
        let (n, k, trials) = (1000, 5, 10_000);
        let mut counts = vec![0usize; n];
        let mut rng = RngStream::new(2024, 0);
        for _ in 0..trials {
            let a = gen_sparse_representation::<f64>(n, k, &mut rng).unwrap();
            for &i in a.support().indices() {
                counts[i] += 1;
            }
        }
        let expected = k as f64 / n as f64;
        for &c in &counts {
            let freq = c as f64 / trials as f64;
            assert!((freq - expected).abs() <= 0.004, "freq {freq}");
        }
        // Averaged over blocks of 50 indices the deviation must sit inside the stated ±0.002.
        for block in counts.chunks(50) {
            let freq = block.iter().sum::<usize>() as f64 / (50 * trials) as f64;
            assert!((freq - expected).abs() <= 0.002, "block freq {freq}");
        }
    }

    #[test]
    fn sphere_noise_respects_epsilon() {
        let mut rng = RngStream::new(8, 8);
        for _ in 0..100 {
            let e = gen_sphere_noise(6, 0.1f64, &mut rng);
            let n = norm2(&e);
            assert!(n <= 0.1 && n > 0.1 * (1.0 - 1e-12));
        }
        assert_eq!(gen_sphere_noise(3, 0.0f64, &mut rng), vec![0.0; 3]);
    }

    #[test]
    fn coherence_examples() {
        let q = Dictionary::<f64>::identity(4).unwrap();
        assert_eq!(mutual_coherence(&q).unwrap(), 0.0);
        let dup = gen_duplicated_dictionary(&[1.0f64, 2.0], 3).unwrap();
        assert!((mutual_coherence(&dup).unwrap() - 1.0).abs() < 1e-15);
        let h = 0.5f64.sqrt();
        let two = Dictionary::new(DenseMatrix::from_rows(&[vec![1.0, h], vec![0.0, h]]).unwrap()).unwrap();
        assert!((mutual_coherence(&two).unwrap() - h).abs() < 1e-15);
        assert!(mutual_coherence(&Dictionary::<f64>::identity(1).unwrap()).is_err());
    }
}
