//! On-disk instance bundle: a directory holding `D.mat`, `M.mat`, `alpha0.vec`,
//! `y.vec` and `meta.json`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Dictionary, MeasurementOperator, ProblemInstance, SparseCoefficients};
use crate::error::{invalid, Result};
use crate::linalg::text::{read_matrix, read_vector, write_matrix, write_vector};
use crate::linalg::sub;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorNames {
    pub dictionary: String,
    pub measurement: String,
    pub representation: String,
    pub noise: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub d: usize,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub epsilon: f64,
    pub master_seed: u64,
    pub stream_id: u64,
    pub generators: GeneratorNames,
}

#[derive(Debug, Clone)]
pub struct InstanceBundle {
    pub instance: ProblemInstance<f64>,
    pub meta: InstanceMeta,
}

pub fn write_bundle(dir: impl AsRef<Path>, bundle: &InstanceBundle) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let inst = &bundle.instance;
    write_matrix(dir.join("D.mat"), inst.dictionary().matrix())?;
    write_matrix(dir.join("M.mat"), inst.measurement().matrix())?;
    write_vector(dir.join("alpha0.vec"), &inst.alpha0().densify())?;
    write_vector(dir.join("y.vec"), inst.y())?;
    let mut meta = serde_json::to_string_pretty(&bundle.meta)?;
    meta.push('\n');
    std::fs::write(dir.join("meta.json"), meta)?;
    Ok(())
}

/// Reads a bundle back. The noise is recovered as `y − M·D·α₀` and must fit inside `epsilon`.
pub fn read_bundle(dir: impl AsRef<Path>) -> Result<InstanceBundle> {
    let dir = dir.as_ref();
    let meta: InstanceMeta = serde_json::from_str(&std::fs::read_to_string(dir.join("meta.json"))?)?;
    let dict = Dictionary::new(read_matrix(dir.join("D.mat"))?)?;
    let op = MeasurementOperator::new(read_matrix(dir.join("M.mat"))?)?;
    let alpha0 = SparseCoefficients::from_dense(&read_vector::<f64>(dir.join("alpha0.vec"))?, 0.0);
    let y: Vec<f64> = read_vector(dir.join("y.vec"))?;
    let x0 = super::synthesize(&dict, &alpha0)?;
    let clean = op.matrix().matvec(&x0)?;
    if clean.len() != y.len() {
        return Err(invalid("y.vec length does not match M.mat rows"));
    }
    let noise = sub(&y, &clean);
    // Text round-off can push a noise vector sitting on the ε-sphere a hair outside it.
    let epsilon = meta.epsilon.max(crate::linalg::norm2(&noise));
    if epsilon > meta.epsilon * (1.0 + 1e-9) + 1e-12 {
        return Err(invalid(format!(
            "y - M D alpha0 has norm {epsilon:e}, above epsilon {:e}",
            meta.epsilon
        )));
    }
    let instance = ProblemInstance::new(dict, op, alpha0, noise, epsilon)?;
    Ok(InstanceBundle { instance, meta })
}
