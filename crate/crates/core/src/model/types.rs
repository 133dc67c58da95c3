use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{add, norm2, DenseMatrix};
use crate::scalar::Scalar;

/// Synthesis dictionary `D` (d×n); its columns are the atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary<T> {
    matrix: DenseMatrix<T>,
}

impl<T: Scalar> Dictionary<T> {
    /// Wraps a matrix, rejecting empty matrices and all-zero atoms.
    pub fn new(matrix: DenseMatrix<T>) -> Result<Self> {
        if matrix.is_empty() {
            return Err(invalid("dictionary must have at least one row and one atom"));
        }
        for j in 0..matrix.cols() {
            if (0..matrix.rows()).all(|i| matrix[(i, j)] == T::zero()) {
                return Err(invalid(format!("atom {j} is the zero vector")));
            }
        }
        Ok(Self { matrix })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::new(DenseMatrix::identity(n))
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DenseMatrix<T> {
        self.matrix
    }

    /// Signal dimension.
    pub fn d(&self) -> usize {
        self.matrix.rows()
    }

    /// Atom count.
    pub fn n(&self) -> usize {
        self.matrix.cols()
    }

    pub fn atoms(&self, support: &Support) -> DenseMatrix<T> {
        self.matrix.select_columns(support.indices())
    }

    /// Same atoms in a different order: new column `j` is old column `perm[j]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        Self::new(self.matrix.select_columns(perm))
    }
}

/// Measurement matrix `M` (m×d).
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOperator<T> {
    matrix: DenseMatrix<T>,
}

impl<T: Scalar> MeasurementOperator<T> {
    pub fn new(matrix: DenseMatrix<T>) -> Result<Self> {
        if matrix.is_empty() {
            return Err(invalid("measurement operator needs m >= 1 and d >= 1"));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.matrix
    }

    pub fn m(&self) -> usize {
        self.matrix.rows()
    }

    pub fn d(&self) -> usize {
        self.matrix.cols()
    }

    /// The effective synthesis operator `M·D`.
    pub fn compose(&self, dict: &Dictionary<T>) -> Result<DenseMatrix<T>> {
        self.matrix.matmul(dict.matrix())
    }
}

/// Strictly increasing list of atom indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Support(Vec<usize>);

impl Support {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid(format!(
                "support indices must be strictly increasing: {indices:?}"
            )));
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return Err(invalid(format!("support index {last} out of range for n = {n}")));
            }
        }
        Ok(Self(indices))
    }

    /// Caller guarantees strictly increasing indices.
    pub(crate) fn from_sorted_unchecked(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self(indices)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Image of the support under an index map, re-sorted.
    pub fn mapped(&self, map: impl Fn(usize) -> usize) -> Self {
        let mut v: Vec<usize> = self.0.iter().map(|&i| map(i)).collect();
        v.sort_unstable();
        Self(v)
    }
}

/// A sparse coefficient vector `α`: a support plus the values on it.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseCoefficients<T> {
    n: usize,
    support: Support,
    values: Vec<T>,
}

impl<T: Scalar> SparseCoefficients<T> {
    pub fn new(n: usize, support: Support, values: Vec<T>) -> Result<Self> {
        if support.len() != values.len() {
            return Err(Error::DimensionMismatch {
                context: "sparse values vs support",
                expected: support.len(),
                got: values.len(),
            });
        }
        if support.indices().last().is_some_and(|&i| i >= n) {
            return Err(invalid("support exceeds ambient dimension"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("non-finite coefficient"));
        }
        Ok(Self { n, support, values })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            support: Support::empty(),
            values: Vec::new(),
        }
    }

    /// Keeps entries with `|v_i| > tol`.
    pub fn from_dense(v: &[T], tol: T) -> Self {
        let (idx, vals): (Vec<usize>, Vec<T>) = v
            .iter()
            .enumerate()
            .filter(|(_, x)| x.abs() > tol)
            .map(|(i, &x)| (i, x))
            .unzip();
        Self {
            n: v.len(),
            support: Support(idx),
            values: vals,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// `‖α‖₀`: stored values that are nonzero.
    pub fn l0(&self) -> usize {
        self.values.iter().filter(|v| **v != T::zero()).count()
    }

    pub fn densify(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.n];
        for (&i, &v) in self.support.indices().iter().zip(&self.values) {
            out[i] = v;
        }
        out
    }
}

/// One noisy synthesis-model problem: `x₀ = Dα₀`, `y = Mx₀ + e`, `‖e‖₂ ≤ ε`.
#[derive(Debug, Clone)]
pub struct ProblemInstance<T> {
    dictionary: Dictionary<T>,
    measurement: MeasurementOperator<T>,
    alpha0: SparseCoefficients<T>,
    x0: Vec<T>,
    noise: Vec<T>,
    y: Vec<T>,
    epsilon: T,
}

impl<T: Scalar> ProblemInstance<T> {
    pub fn new(
        dictionary: Dictionary<T>,
        measurement: MeasurementOperator<T>,
        alpha0: SparseCoefficients<T>,
        noise: Vec<T>,
        epsilon: T,
    ) -> Result<Self> {
        if epsilon.is_nan() || epsilon < T::zero() {
            return Err(invalid("epsilon must be nonnegative"));
        }
        if measurement.d() != dictionary.d() {
            return Err(Error::DimensionMismatch {
                context: "measurement columns vs dictionary rows",
                expected: dictionary.d(),
                got: measurement.d(),
            });
        }
        let x0 = super::synthesize(&dictionary, &alpha0)?;
        let y = super::measure(&measurement, &x0, &noise)?;
        let e_norm = norm2(&noise);
        if e_norm > epsilon {
            return Err(invalid(format!(
                "noise norm {e_norm} exceeds epsilon {epsilon}"
            )));
        }
        Ok(Self {
            dictionary,
            measurement,
            alpha0,
            x0,
            noise,
            y,
            epsilon,
        })
    }

    pub fn noiseless(
        dictionary: Dictionary<T>,
        measurement: MeasurementOperator<T>,
        alpha0: SparseCoefficients<T>,
    ) -> Result<Self> {
        let m = measurement.m();
        Self::new(dictionary, measurement, alpha0, vec![T::zero(); m], T::zero())
    }

    pub fn dictionary(&self) -> &Dictionary<T> {
        &self.dictionary
    }

    pub fn measurement(&self) -> &MeasurementOperator<T> {
        &self.measurement
    }

    pub fn alpha0(&self) -> &SparseCoefficients<T> {
        &self.alpha0
    }

    pub fn x0(&self) -> &[T] {
        &self.x0
    }

    pub fn noise(&self) -> &[T] {
        &self.noise
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    /// `M·D`, the matrix the solvers operate on.
    pub fn effective_operator(&self) -> Result<DenseMatrix<T>> {
        self.measurement.compose(&self.dictionary)
    }

    /// `y − Mx₀`, which reproduces the stored noise exactly.
    pub fn measurement_residual(&self) -> Result<Vec<T>> {
        let mx = self.measurement.matrix().matvec(&self.x0)?;
        Ok(self.y.iter().zip(&mx).map(|(&a, &b)| a - b).collect())
    }
}

/// `x + e` helper with a length check.
pub(crate) fn checked_add<T: Scalar>(x: &[T], e: &[T], context: &'static str) -> Result<Vec<T>> {
    if x.len() != e.len() {
        return Err(Error::DimensionMismatch {
            context,
            expected: x.len(),
            got: e.len(),
        });
    }
    Ok(add(x, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dictionary_rejects_zero_atom() {
        let m = DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![2.0, 0.0]]).unwrap();
        assert!(Dictionary::new(m).is_err());
    }

    #[test]
    fn support_validation() {
        assert!(Support::new(vec![0, 2, 5], 6).is_ok());
        assert!(Support::new(vec![0, 0], 6).is_err());
        assert!(Support::new(vec![3, 1], 6).is_err());
        assert!(Support::new(vec![6], 6).is_err());
    }

    #[test]
    fn sparse_l0_counts_nonzero_values_only() {
        let s = SparseCoefficients::new(5, Support::new(vec![1, 3], 5).unwrap(), vec![0.0, 2.0]).unwrap();
        assert_eq!(s.l0(), 1);
        assert_eq!(s.densify(), vec![0.0, 0.0, 0.0, 2.0, 0.0]);
    }

    #[test]
    fn instance_reproduces_noise_exactly() {
        let d = Dictionary::<f64>::identity(3).unwrap();
        let m = MeasurementOperator::new(DenseMatrix::identity(3)).unwrap();
        let a = SparseCoefficients::new(3, Support::new(vec![1], 3).unwrap(), vec![5.0]).unwrap();
        let inst = ProblemInstance::new(d, m, a, vec![0.1, 0.0, -0.2], 0.3).unwrap();
        assert_eq!(inst.x0(), &[0.0, 5.0, 0.0]);
        assert_eq!(inst.measurement_residual().unwrap(), inst.noise());
    }

    #[test]
    fn instance_rejects_noise_above_epsilon() {
        let d = Dictionary::<f64>::identity(2).unwrap();
        let m = MeasurementOperator::new(DenseMatrix::identity(2)).unwrap();
        let a = SparseCoefficients::zero(2);
        assert!(ProblemInstance::new(d, m, a, vec![1.0, 0.0], 0.5).is_err());
    }

    proptest! {
        #[test]
        fn densify_then_sparsify_is_identity(
            n in 1usize..30,
            picks in proptest::collection::vec((0usize..30, 0.1f64..10.0, any::<bool>()), 0..10),
        ) {
            let mut dense = vec![0.0; n];
            for (i, v, neg) in picks {
                dense[i % n] = if neg { -v } else { v };
            }
            let s = SparseCoefficients::from_dense(&dense, 0.0);
            prop_assert_eq!(s.densify(), dense.clone());
            let again = SparseCoefficients::from_dense(&s.densify(), 0.0);
            prop_assert_eq!(again, s);
        }
    }
}
