use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::{gen_gaussian_measurement, gen_paper_dictionary, gen_sparse_representation, ProblemInstance, RngStream};
use crate::solvers::{assess_recovery, solve_l1, SolverParams, DEFAULT_RECOVERY_RTOL};

/// Guards `⌊γd⌋` and `⌊ρm⌋` against products like `0.3 · 100 = 29.999…`.
const FLOOR_GUARD: f64 = 1e-9;

pub const CSV_HEADER: &str = "gamma,rho,m,k,trials,rep_rate,sig_rate,mean_rep_err,mean_sig_err,solver_dnf";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseGridConfig {
    pub d: usize,
    pub gamma_list: Vec<f64>,
    pub rho_list: Vec<f64>,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default = "default_rtol")]
    pub rep_rtol: f64,
    #[serde(default = "default_rtol")]
    pub sig_rtol: f64,
    #[serde(default)]
    pub solver: SolverParams,
}

fn default_rtol() -> f64 {
    DEFAULT_RECOVERY_RTOL
}

impl Default for PhaseGridConfig {
    /// `d = 100`, `γ ∈ {0.1, …, 1.0}`, `ρ ∈ {0.02, …, 0.20}`, 25 trials per cell.
    fn default() -> Self {
        Self {
            d: 100,
            gamma_list: (1..=10).map(|i| i as f64 / 10.0).collect(),
            rho_list: (1..=10).map(|i| (2 * i) as f64 / 100.0).collect(),
            trials: 25,
            master_seed: 1,
            rep_rtol: DEFAULT_RECOVERY_RTOL,
            sig_rtol: DEFAULT_RECOVERY_RTOL,
            solver: SolverParams::default(),
        }
    }
}

impl PhaseGridConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn measurements(&self, gamma: f64) -> usize {
        (gamma * self.d as f64 + FLOOR_GUARD).floor() as usize
    }

    pub fn sparsity(rho: f64, m: usize) -> usize {
        (rho * m as f64 + FLOOR_GUARD).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 4 {
            return Err(invalid(format!("d must be at least 4, got {}", self.d)));
        }
        if self.gamma_list.is_empty() || self.rho_list.is_empty() {
            return Err(invalid("gamma_list and rho_list must be nonempty"));
        }
        if self.trials == 0 {
            return Err(invalid("trials must be positive"));
        }
        if !(self.rep_rtol > 0.0 && self.sig_rtol > 0.0) {
            return Err(invalid("recovery tolerances must be positive"));
        }
        self.solver.validate()?;
        if self.solver.epsilon != 0.0 {
            return Err(invalid("the phase grid is noiseless; solver.epsilon must be 0"));
        }
        for &g in &self.gamma_list {
            if !(g > 0.0 && g <= 1.0) {
                return Err(invalid(format!("gamma {g} outside (0, 1]")));
            }
            if self.measurements(g) == 0 {
                return Err(invalid(format!("gamma {g} gives m = 0 at d = {}", self.d)));
            }
        }
        if let Some(r) = self.rho_list.iter().find(|&&r| !(r > 0.0 && r < 1.0)) {
            return Err(invalid(format!("rho {r} outside (0, 1)")));
        }
        Ok(())
    }

    fn cell_index(&self, gamma: f64, rho: f64) -> Result<usize> {
        let gi = self.gamma_list.iter().position(|&g| g == gamma);
        let ri = self.rho_list.iter().position(|&r| r == rho);
        match (gi, ri) {
            (Some(gi), Some(ri)) => Ok(gi * self.rho_list.len() + ri),
            _ => Err(invalid(format!("({gamma}, {rho}) is not a configured grid cell"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellResult {
    pub gamma: f64,
    pub rho: f64,
    pub m: usize,
    pub k: usize,
    pub trials_run: usize,
    pub rep_success_rate: f64,
    pub sig_success_rate: f64,
    pub mean_rep_error: f64,
    pub mean_sig_error: f64,
    pub solver_dnf_count: usize,
}

struct Trial {
    rep_success: bool,
    sig_success: bool,
    rep_error: f64,
    sig_error: f64,
    dnf: bool,
}

fn run_trial(config: &PhaseGridConfig, m: usize, k: usize, stream: u64) -> Result<Trial> {
    let mut rng = RngStream::new(config.master_seed, stream);
    let dict = gen_paper_dictionary::<f64>(config.d, &mut rng)?;
    let op = gen_gaussian_measurement(m, config.d, &mut rng)?;
    let alpha0 = gen_sparse_representation(dict.n(), k, &mut rng)?;
    let instance = ProblemInstance::noiseless(dict, op, alpha0)?;
    let a = instance.effective_operator()?;

    // A solver error leaves the zero vector as the estimate.
    let (alpha_hat, converged) = match solve_l1(&a, instance.y(), &config.solver) {
        Ok(sol) => (sol.alpha_hat, sol.converged),
        Err(_) => (vec![0.0; instance.dictionary().n()], false),
    };
    let out = assess_recovery(&alpha_hat, &instance, config.rep_rtol, config.sig_rtol)?;
    Ok(Trial {
        rep_success: converged && out.rep_success,
        sig_success: converged && out.sig_success,
        rep_error: out.rep_error,
        sig_error: out.sig_error,
        dnf: !converged,
    })
}

/// One grid cell: `trials` independent noiseless realisations, each drawing
/// `D`, `M` and `α₀` (in that order) from stream `cell_index · trials + i`.
/// A trial counts as a success only if the solver converged.
pub fn run_phase_cell(config: &PhaseGridConfig, gamma: f64, rho: f64) -> Result<CellResult> {
    config.validate()?;
    let cell = config.cell_index(gamma, rho)?;
    let m = config.measurements(gamma);
    let k = PhaseGridConfig::sparsity(rho, m);
    let base = (cell as u64) * (config.trials as u64);
    let trials: Vec<Trial> = (0..config.trials as u64)
        .into_par_iter()
        .map(|i| run_trial(config, m, k, base + i))
        .collect::<Result<_>>()?;

    let count = |f: fn(&Trial) -> bool| trials.iter().filter(|t| f(t)).count();
    let mean = |f: fn(&Trial) -> f64| trials.iter().map(f).sum::<f64>() / trials.len() as f64;
    let n = trials.len() as f64;
    Ok(CellResult {
        gamma,
        rho,
        m,
        k,
        trials_run: trials.len(),
        rep_success_rate: count(|t| t.rep_success) as f64 / n,
        sig_success_rate: count(|t| t.sig_success) as f64 / n,
        mean_rep_error: mean(|t| t.rep_error),
        mean_sig_error: mean(|t| t.sig_error),
        solver_dnf_count: count(|t| t.dnf),
    })
}

/// Every cell, ordered by `(gamma, rho)` as listed in the config.
pub fn run_phase_grid(config: &PhaseGridConfig) -> Result<Vec<CellResult>> {
    config.validate()?;
    let cells: Vec<(f64, f64)> = config
        .gamma_list
        .iter()
        .flat_map(|&g| config.rho_list.iter().map(move |&r| (g, r)))
        .collect();
    cells
        .into_par_iter()
        .map(|(g, r)| run_phase_cell(config, g, r))
        .collect()
}

pub fn format_phase_csv(cells: &[CellResult]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for c in cells {
        let _ = writeln!(
            out,
            "{:.16e},{:.16e},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            c.gamma,
            c.rho,
            c.m,
            c.k,
            c.trials_run,
            c.rep_success_rate,
            c.sig_success_rate,
            c.mean_rep_error,
            c.mean_sig_error,
            c.solver_dnf_count
        );
    }
    out
}

pub fn write_phase_csv(path: impl AsRef<Path>, cells: &[CellResult]) -> Result<()> {
    std::fs::write(path, format_phase_csv(cells))?;
    Ok(())
}
