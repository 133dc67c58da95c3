use serde::Serialize;

use super::{SparkCertificate, SparkValue};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    UniquenessRepresentation,
    UniquenessSignal,
    StabilityRepresentation,
    StabilitySignal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RecoveryDomain {
    Representation,
    Signal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    /// The certificate did not enumerate far enough to decide.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundInputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spark: Option<SparkValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exhausted_up_to: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub verdict: Verdict,
    /// Present only for stability kinds whose hypothesis `δ < 1` holds.
    pub bound_value: Option<f64>,
    pub inputs: BoundInputs,
}

impl BoundReport {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }
}

/// `k < value / 2`, with an infinite certificate counting as `+∞` once it has
/// been enumerated through size `2k`.
fn spark_half_test(k: usize, cert: &SparkCertificate) -> Verdict {
    if k == 0 {
        return Verdict::Holds;
    }
    match cert.value {
        SparkValue::Finite(v) if 2 * k < v => Verdict::Holds,
        SparkValue::Finite(_) => Verdict::Fails,
        SparkValue::Infinite if cert.exhausted_up_to >= 2 * k => Verdict::Holds,
        SparkValue::Infinite => Verdict::Inconclusive,
    }
}

fn uniqueness(kind: BoundKind, k: usize, cert: &SparkCertificate) -> BoundReport {
    BoundReport {
        kind,
        verdict: spark_half_test(k, cert),
        bound_value: None,
        inputs: BoundInputs {
            k: Some(k),
            spark: Some(cert.value),
            exhausted_up_to: Some(cert.exhausted_up_to),
            delta: None,
            epsilon: None,
        },
    }
}

/// A `k`-sparse representation is the unique `ℓ0` solution when `k < spark(MD)/2`.
pub fn check_uniqueness_representation(k: usize, spark_md: &SparkCertificate) -> BoundReport {
    uniqueness(BoundKind::UniquenessRepresentation, k, spark_md)
}

/// Every `ℓ0` solution synthesises the true signal when `k < D-spark(M)/2`.
pub fn check_uniqueness_signal(k: usize, dspark_m: &SparkCertificate) -> BoundReport {
    uniqueness(BoundKind::UniquenessSignal, k, dspark_m)
}

/// Error bound `2ε / √(1 − δ_{2k})`, defined when `δ_{2k} < 1`.
pub fn stability_bound<T: Scalar>(epsilon: T, delta_2k: T, domain: RecoveryDomain) -> BoundReport {
    let kind = match domain {
        RecoveryDomain::Representation => BoundKind::StabilityRepresentation,
        RecoveryDomain::Signal => BoundKind::StabilitySignal,
    };
    let holds = delta_2k < T::one();
    let bound_value = holds.then(|| {
        let two = T::one() + T::one();
        (two * epsilon / (T::one() - delta_2k).sqrt()).to_f64_lossy()
    });
    BoundReport {
        kind,
        verdict: if holds { Verdict::Holds } else { Verdict::Fails },
        bound_value,
        inputs: BoundInputs {
            k: None,
            spark: None,
            exhausted_up_to: None,
            delta: Some(delta_2k.to_f64_lossy()),
            epsilon: Some(epsilon.to_f64_lossy()),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::super::CertificateKind;
    use super::*;

    fn cert(value: SparkValue, exhausted: usize) -> SparkCertificate {
        SparkCertificate {
            kind: CertificateKind::Spark,
            value,
            witness: None,
            exhausted_up_to: exhausted,
            rel_tol: 1e-10,
            budget_used: 0,
        }
    }

    #[test]
    fn representation_uniqueness_examples() {
        let four = cert(SparkValue::Finite(4), 3);
        assert!(check_uniqueness_representation(1, &four).holds());
        let two = cert(SparkValue::Finite(2), 1);
        assert_eq!(check_uniqueness_representation(1, &two).verdict, Verdict::Fails);
        assert!(check_uniqueness_representation(0, &cert(SparkValue::Finite(1), 0)).holds());
    }

    #[test]
    fn signal_uniqueness_examples() {
        let four = cert(SparkValue::Finite(4), 3);
        assert_eq!(check_uniqueness_signal(2, &four).verdict, Verdict::Fails);
        assert!(check_uniqueness_signal(1, &four).holds());
        assert!(check_uniqueness_signal(3, &cert(SparkValue::Infinite, 6)).holds());
        assert_eq!(
            check_uniqueness_signal(3, &cert(SparkValue::Infinite, 5)).verdict,
            Verdict::Inconclusive
        );
    }

    #[test]
    fn stability_examples() {
        let r = stability_bound(0.0, 0.5, RecoveryDomain::Signal);
        assert_eq!(r.bound_value, Some(0.0));
        let r = stability_bound(1.0, 0.0, RecoveryDomain::Representation);
        assert_eq!(r.bound_value, Some(2.0));
        let r = stability_bound(1.0, 0.75, RecoveryDomain::Signal);
        assert_eq!(r.bound_value, Some(4.0));
        let r = stability_bound(1.0, 1.0, RecoveryDomain::Signal);
        assert_eq!(r.verdict, Verdict::Fails);
        assert_eq!(r.bound_value, None);
    }
}
