//! Run manifest: resolved config, derived constants and output hashes.

use std::collections::BTreeMap;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use dwmix::model::Model;
use dwmix::spsolver::DoubletModes;
use dwmix::twomode::OverlapTensor;
use dwmix::units::{Species, UnitSystem};
use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

/// One file produced by a subcommand.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: &str, contents: impl Into<Vec<u8>>) -> Self {
        Self {
            name: name.to_string(),
            bytes: contents.into(),
        }
    }

    pub fn sha256(&self) -> String {
        hex::encode(Sha256::digest(&self.bytes))
    }
}

#[derive(Debug, Serialize)]
struct OutputEntry {
    file: String,
    bytes: usize,
    sha256: String,
}

fn unix_seconds(t: SystemTime) -> f64 {
    t.duration_since(UNIX_EPOCH).unwrap_or_default().as_secs_f64()
}

fn tensor_json(entries: impl IntoIterator<Item = (String, f64)>) -> Value {
    Value::Object(entries.into_iter().map(|(k, v)| (k, json!(v))).collect())
}

fn intra(u: &OverlapTensor) -> Value {
    tensor_json(u.distinct_intra().into_iter().map(|(k, v)| (k.to_string(), v)))
}

fn species_block(model: &Model, modes: &DoubletModes, u: &OverlapTensor, kappa: f64) -> Value {
    let basis = model.basis.species(modes.species);
    json!({
        "kappa": kappa,
        "energy_s": modes.energy_s,
        "energy_a": modes.energy_a,
        "guard_energies": modes.guard_energies,
        "omega": modes.bohr_frequency(),
        "period": std::f64::consts::TAU / modes.bohr_frequency(),
        "onsite_energy": modes.onsite(),
        "tunneling": modes.tunneling(),
        "gap_ratio": modes.gap_ratio(),
        "right_mode_mass": modes.right_mass(),
        "eigen_residual": modes.eigen_residual,
        "overlap_tensor": intra(u),
        "basis_labels": basis.labels(),
    })
}

/// Coupling-independent quantities of a built model.
pub fn derived(cfg: &RunConfig, model: &Model) -> Value {
    json!({
        "boson": species_block(model, &model.modes_b, &model.u_b, cfg.species.kinetic_prefactor(Species::Boson)),
        "fermion": species_block(model, &model.modes_f, &model.u_f, cfg.species.kinetic_prefactor(Species::Fermion)),
        "cross_overlap_tensor": tensor_json(model.u_bf.distinct_cross()),
        "quadrature_error_estimate": {
            "boson": model.u_b.quadrature_error_estimate,
            "fermion": model.u_f.quadrature_error_estimate,
            "cross": model.u_bf.quadrature_error_estimate,
        },
        "basis": {
            "tag": model.basis.tag(),
            "dim": model.basis.dim(),
            "labels": model.basis.labels(),
        },
        "grid_spacing_um": model.grid.spacing(),
        "time_unit_s": UnitSystem::default().time_unit(),
    })
}

/// Everything a manifest records besides the outputs themselves.
pub struct RunRecord<'a> {
    pub command: &'a str,
    pub config: &'a RunConfig,
    pub derived: Option<Value>,
    pub results: Value,
    pub workers: usize,
    pub started: SystemTime,
    pub elapsed: Duration,
}

/// Manifest JSON with keys in sorted order and one hash per output.
pub fn manifest(rec: &RunRecord, outputs: &[Artifact]) -> String {
    let mut files: Vec<OutputEntry> = outputs
        .iter()
        .map(|a| OutputEntry {
            file: a.name.clone(),
            bytes: a.bytes.len(),
            sha256: a.sha256(),
        })
        .collect();
    files.sort_by(|a, b| a.file.cmp(&b.file));
    let config: BTreeMap<_, _> = rec.config.resolved.iter().collect();
    let mut m = Map::new();
    m.insert("command".into(), json!(rec.command));
    m.insert("config".into(), json!(config));
    m.insert("derived".into(), rec.derived.clone().unwrap_or(Value::Null));
    m.insert("outputs".into(), json!(files));
    m.insert("results".into(), rec.results.clone());
    m.insert(
        "run".into(),
        json!({
            "started_unix_s": unix_seconds(rec.started),
            "finished_unix_s": unix_seconds(rec.started + rec.elapsed),
            "wall_time_s": rec.elapsed.as_secs_f64(),
            "workers": rec.workers,
        }),
    );
    m.insert(
        "tool".into(),
        json!({ "name": "dwmix", "version": env!("CARGO_PKG_VERSION") }),
    );
    let mut s = serde_json::to_string_pretty(&Value::Object(m)).expect("manifest serializes");
    s.push('\n');
    s
}
