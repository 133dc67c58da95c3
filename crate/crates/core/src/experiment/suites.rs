use rayon::prelude::*;
use serde::Serialize;

use crate::certify::{
    check_uniqueness_representation, check_uniqueness_signal, d_spark, drip_constant, rip_constant, spark,
    stability_bound, CertifyConfig, RecoveryDomain, Verdict,
};
use crate::error::{invalid, Result};
use crate::linalg::{distance, singular_values, DenseMatrix};
use crate::model::{
    gen_duplicated_dictionary, gen_gaussian_measurement, gen_paper_dictionary, gen_sparse_representation,
    gen_sphere_noise, Dictionary, MeasurementOperator, ProblemInstance, RngStream, SparseCoefficients,
};
use crate::solvers::solve_l0;

/// Signal dimension of suite instances.
pub const SUITE_D: usize = 8;
/// Atom count of suite instances.
pub const SUITE_N: usize = 12;
/// Measurement count of suite instances.
pub const SUITE_M: usize = 6;
/// Pairwise agreement demanded of synthesised signals in the uniqueness checks.
pub const SIGNAL_AGREEMENT_TOL: f64 = 1e-8;
/// Absolute slack on the stability bound, covering least-squares round-off.
pub const STABILITY_SLACK: f64 = 1e-10;
/// Measurement operators are scaled so that `σ_max(M)² = 1.5`, which keeps the
/// upper isometry gap below one and makes the stability hypothesis attainable.
pub const SUITE_SIGMA_MAX_SQ: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteKind {
    Uniqueness,
    Stability,
    Representation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SuiteSeeds {
    pub master_seed: u64,
    pub streams: u64,
}

/// Outcome of a verification suite. Each instance contributes one check per
/// tested statement; a check is either asserted (hypothesis met), skipped
/// (`hypothesis_not_met`), or skipped because the certificate could not decide.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: SuiteKind,
    pub instances: usize,
    pub checks_asserted: usize,
    pub hypothesis_not_met: usize,
    pub inconclusive: usize,
    pub violations: usize,
    /// Largest observed quantity over its allowed value; a violation has ratio above one.
    pub max_ratio: f64,
    pub epsilon: f64,
    pub seeds: SuiteSeeds,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serialisable")
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Default)]
struct Tally {
    asserted: usize,
    not_met: usize,
    inconclusive: usize,
    violations: usize,
    max_ratio: f64,
}

impl Tally {
    fn skip(&mut self, verdict: Verdict) {
        match verdict {
            Verdict::Inconclusive => self.inconclusive += 1,
            _ => self.not_met += 1,
        }
    }

    fn record(&mut self, ratio: f64, violated: bool) {
        self.asserted += 1;
        self.violations += violated as usize;
        self.max_ratio = self.max_ratio.max(ratio);
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.asserted += other.asserted;
        self.not_met += other.not_met;
        self.inconclusive += other.inconclusive;
        self.violations += other.violations;
        self.max_ratio = self.max_ratio.max(other.max_ratio);
        self
    }
}

/// Gaussian `m × d` operator rescaled to `σ_max² = SUITE_SIGMA_MAX_SQ`.
fn suite_measurement(m: usize, d: usize, rng: &mut RngStream) -> Result<MeasurementOperator<f64>> {
    let g = gen_gaussian_measurement::<f64>(m, d, rng)?;
    let smax = singular_values(g.matrix())?[0];
    MeasurementOperator::new(g.matrix().scale(SUITE_SIGMA_MAX_SQ.sqrt() / smax))
}

/// Cycles through three dictionary families: Gaussian, the coherent two-block
/// construction (first `SUITE_N` atoms at `d = SUITE_D`), and a duplicated
/// Gaussian atom.
fn suite_dictionary(index: u64, rng: &mut RngStream) -> Result<Dictionary<f64>> {
    match index % 3 {
        0 => {
            let data = (0..SUITE_D * SUITE_N).map(|_| rng.normal()).collect();
            Dictionary::new(DenseMatrix::from_row_major(SUITE_D, SUITE_N, data)?)
        }
        1 => {
            let full = gen_paper_dictionary::<f64>(SUITE_D, rng)?;
            let keep: Vec<usize> = (0..SUITE_N).collect();
            Dictionary::new(full.matrix().select_columns(&keep))
        }
        _ => {
            let z: Vec<f64> = (0..SUITE_D).map(|_| rng.normal()).collect();
            gen_duplicated_dictionary(&z, SUITE_N)
        }
    }
}

/// Sparsity alternates `1, 2` every three instances so each family meets both.
fn suite_sparsity(index: u64) -> usize {
    1 + ((index / 3) % 2) as usize
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(invalid("epsilon must be nonnegative"));
    }
    Ok(())
}

fn run_suite(
    kind: SuiteKind,
    n_instances: usize,
    master_seed: u64,
    epsilon: f64,
    one: impl Fn(u64) -> Result<Tally> + Sync + Send,
) -> Result<SuiteReport> {
    let tallies: Vec<Tally> = (0..n_instances as u64).into_par_iter().map(one).collect::<Result<_>>()?;
    let total = tallies.into_iter().fold(Tally::default(), Tally::merge);
    Ok(SuiteReport {
        suite: kind,
        instances: n_instances,
        checks_asserted: total.asserted,
        hypothesis_not_met: total.not_met,
        inconclusive: total.inconclusive,
        violations: total.violations,
        max_ratio: total.max_ratio,
        epsilon,
        seeds: SuiteSeeds {
            master_seed,
            streams: n_instances as u64,
        },
    })
}

/// Largest pairwise distance among `signals`.
fn max_pairwise(signals: &[Vec<f64>]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in signals.iter().enumerate() {
        for b in &signals[i + 1..] {
            worst = worst.max(distance(a, b));
        }
    }
    worst
}

fn synthesize_all(dict: &Dictionary<f64>, minimizers: &[SparseCoefficients<f64>]) -> Result<Vec<Vec<f64>>> {
    minimizers
        .iter()
        .map(|a| dict.matrix().matvec(&a.densify()))
        .collect()
}

/// Signal-domain uniqueness: whenever `k < D-spark(M)/2` is certified, every
/// sparsest solution of the noiseless problem synthesises the true signal.
pub fn verify_uniqueness_suite(n_instances: usize, master_seed: u64) -> Result<SuiteReport> {
    let config = CertifyConfig::<f64>::default();
    run_suite(SuiteKind::Uniqueness, n_instances, master_seed, 0.0, |i| {
        let mut rng = RngStream::new(master_seed, i);
        let k = suite_sparsity(i);
        let dict = suite_dictionary(i, &mut rng)?;
        let op = suite_measurement(SUITE_M, SUITE_D, &mut rng)?;
        let alpha0 = gen_sparse_representation(SUITE_N, k, &mut rng)?;

        let mut tally = Tally::default();
        let cert = d_spark(&op, &dict, 2 * k, &config)?;
        let report = check_uniqueness_signal(k, &cert);
        if !report.holds() {
            tally.skip(report.verdict);
            return Ok(tally);
        }
        let instance = ProblemInstance::noiseless(dict, op, alpha0)?;
        let sol = solve_l0(&instance.effective_operator()?, instance.y(), 0.0, k, true)?;
        let mut signals = synthesize_all(instance.dictionary(), &sol.minimizers)?;
        signals.push(instance.x0().to_vec());
        let gap = max_pairwise(&signals);
        tally.record(gap / SIGNAL_AGREEMENT_TOL, gap > SIGNAL_AGREEMENT_TOL);
        Ok(tally)
    })
}

/// Ratio of an observed error to its bound; a zero bound admits only round-off.
fn bound_ratio(error: f64, bound: f64) -> (f64, bool) {
    let violated = error > bound + STABILITY_SLACK;
    let ratio = if bound > 0.0 {
        error / bound
    } else if violated {
        f64::MAX
    } else {
        0.0
    };
    (ratio, violated)
}

/// Signal-domain stability: with `‖e‖₂ = ε` and `δ_{2k}^D < 1`, every sparsest
/// feasible solution satisfies `‖x₀ − Dα̂‖₂ ≤ 2ε / √(1 − δ_{2k}^D)`.
pub fn verify_stability_suite(n_instances: usize, master_seed: u64, epsilon: f64) -> Result<SuiteReport> {
    check_epsilon(epsilon)?;
    let config = CertifyConfig::<f64>::default();
    run_suite(SuiteKind::Stability, n_instances, master_seed, epsilon, |i| {
        let mut rng = RngStream::new(master_seed, i);
        let k = suite_sparsity(i);
        let dict = suite_dictionary(i, &mut rng)?;
        let op = suite_measurement(SUITE_M, SUITE_D, &mut rng)?;
        let alpha0 = gen_sparse_representation(SUITE_N, k, &mut rng)?;
        let noise = gen_sphere_noise(SUITE_M, epsilon, &mut rng);

        let mut tally = Tally::default();
        let delta = drip_constant(&op, &dict, 2 * k, &config)?.delta;
        let report = stability_bound(epsilon, delta, RecoveryDomain::Signal);
        let Some(bound) = report.bound_value else {
            tally.skip(report.verdict);
            return Ok(tally);
        };
        let instance = ProblemInstance::new(dict, op, alpha0, noise, epsilon)?;
        let sol = solve_l0(&instance.effective_operator()?, instance.y(), epsilon, k, true)?;
        for signal in synthesize_all(instance.dictionary(), &sol.minimizers)? {
            let (ratio, violated) = bound_ratio(distance(&signal, instance.x0()), bound);
            tally.record(ratio, violated);
        }
        Ok(tally)
    })
}

/// Representation-domain analogues with `D = I`: spark-certified uniqueness
/// of the noiseless sparsest solution, and the `δ_{2k}` stability bound on a
/// noisy copy of the same instance. Each instance contributes two checks.
pub fn verify_representation_suite(n_instances: usize, master_seed: u64, epsilon: f64) -> Result<SuiteReport> {
    check_epsilon(epsilon)?;
    let config = CertifyConfig::<f64>::default();
    run_suite(SuiteKind::Representation, n_instances, master_seed, epsilon, |i| {
        let mut rng = RngStream::new(master_seed, i);
        let k = suite_sparsity(i);
        let op = suite_measurement(SUITE_M, SUITE_N, &mut rng)?;
        let alpha0 = gen_sparse_representation(SUITE_N, k, &mut rng)?;
        let noise = gen_sphere_noise(SUITE_M, epsilon, &mut rng);
        let dict = Dictionary::identity(SUITE_N)?;
        let a = op.matrix().clone();
        let truth = alpha0.densify();

        let mut tally = Tally::default();
        let cert = spark(&a, 2 * k, &config)?;
        let report = check_uniqueness_representation(k, &cert);
        if report.holds() {
            let clean = ProblemInstance::noiseless(dict.clone(), op.clone(), alpha0.clone())?;
            let sol = solve_l0(&a, clean.y(), 0.0, k, true)?;
            let gap = sol
                .minimizers
                .iter()
                .map(|s| distance(&s.densify(), &truth))
                .fold(0.0, f64::max);
            let violated = sol.minimizers.len() != 1 || gap > SIGNAL_AGREEMENT_TOL;
            let ratio = if violated && gap <= SIGNAL_AGREEMENT_TOL {
                f64::MAX
            } else {
                gap / SIGNAL_AGREEMENT_TOL
            };
            tally.record(ratio, violated);
        } else {
            tally.skip(report.verdict);
        }

        let delta = rip_constant(&a, 2 * k, &config)?.delta;
        let report = stability_bound(epsilon, delta, RecoveryDomain::Representation);
        let Some(bound) = report.bound_value else {
            tally.skip(report.verdict);
            return Ok(tally);
        };
        let noisy = ProblemInstance::new(dict, op, alpha0, noise, epsilon)?;
        let sol = solve_l0(&a, noisy.y(), epsilon, k, true)?;
        for s in &sol.minimizers {
            let (ratio, violated) = bound_ratio(distance(&s.densify(), &truth), bound);
            tally.record(ratio, violated);
        }
        Ok(tally)
    })
}
