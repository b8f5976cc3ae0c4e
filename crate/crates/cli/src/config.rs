//! Flat `section.key = value` run configuration.
//!
//! Parsing is strict: every key must be known, appear once and carry a value
//! that passes the owning module's checks. The resolved configuration keeps
//! every effective value, defaults included, so a manifest can replay a run.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use dwmix::manybody::{CouplingParams, FermionScheme, FermionSchemeRegistry};
use dwmix::model::{ModelSpec, DEFAULT_MIN_GAP_RATIO};
use dwmix::potential::{
    Grid, Potential, PotentialParams, PotentialRegistry, DEFAULT_EDGE_SMOOTHING, DEFAULT_N_POINTS,
    DEFAULT_WELL_DEPTH, DEFAULT_WELL_SEPARATION, DEFAULT_WELL_WIDTH, DEFAULT_X_MAX,
};
use dwmix::sweep::{Axis, EntropyState, Plane, SweepSpec};
use dwmix::units::{constants, SpeciesConstants};
use dwmix::{Error, Result};

/// Keys outside the `potential` section, with their defaults.
fn fixed_keys() -> Vec<(&'static str, Option<String>)> {
    let f = |v: f64| Some(v.to_string());
    vec![
        ("potential.kind", Some("double_square_well".into())),
        ("grid.x_max_um", f(DEFAULT_X_MAX)),
        ("grid.n_points", Some(DEFAULT_N_POINTS.to_string())),
        ("species.mass_boson_u", f(constants::YB170_MASS_U)),
        ("species.mass_fermion_u", f(constants::YB171_MASS_U)),
        ("couplings.lambda_bb", f(0.0)),
        ("couplings.lambda_ff", f(0.0)),
        ("couplings.lambda_bf", f(0.0)),
        (
            "dynamics.samples",
            Some(dwmix::dynamics::DEFAULT_SAMPLES.to_string()),
        ),
        ("dynamics.periods", f(dwmix::dynamics::DEFAULT_PERIODS)),
        ("dynamics.t_max", None),
        ("sweep.plane", Some("ff_bf".into())),
        ("sweep.x_min", f(0.0)),
        ("sweep.x_max", f(1e-3)),
        ("sweep.nx", Some("64".into())),
        ("sweep.y_min", f(0.0)),
        ("sweep.y_max", f(1e-3)),
        ("sweep.ny", Some("64".into())),
        ("sweep.ref_lambda_bb", None),
        ("sweep.ref_lambda_ff", None),
        ("sweep.ref_lambda_bf", None),
        ("sweep.entropy_state", Some("ground".into())),
        ("sweep.entropy_tau", f(0.0)),
        ("sweep.single_particle_entropy", Some("false".into())),
        ("output.dir", Some("out".into())),
        ("output.hamiltonian_csv", Some("false".into())),
        ("model.fermion_basis", Some("antisymmetric".into())),
        ("model.min_gap_ratio", f(DEFAULT_MIN_GAP_RATIO)),
    ]
}

/// Defaults of the variant keys of the built-in potentials.
fn potential_default(key: &str) -> Option<String> {
    let v = match key {
        "well_separation_um" => DEFAULT_WELL_SEPARATION,
        "well_width_um" => DEFAULT_WELL_WIDTH,
        "well_depth" => DEFAULT_WELL_DEPTH,
        "edge_smoothing_um" => DEFAULT_EDGE_SMOOTHING,
        "barrier_height" => DEFAULT_WELL_DEPTH,
        "minima_half_separation_um" => 0.5 * DEFAULT_WELL_SEPARATION,
        _ => return None,
    };
    Some(v.to_string())
}

/// Every key the parser accepts.
pub fn known_keys(potentials: &PotentialRegistry) -> BTreeSet<String> {
    let mut keys: BTreeSet<String> = fixed_keys().into_iter().map(|(k, _)| k.to_string()).collect();
    for name in potentials.names() {
        for k in potentials.keys(name).unwrap_or(&[]) {
            keys.insert(format!("potential.{k}"));
        }
    }
    keys
}

/// Closest known key, if any is plausibly what was meant.
pub fn suggest(key: &str, known: &BTreeSet<String>) -> Option<String> {
    let tail = |k: &str| k.rsplit('.').next().unwrap_or(k).to_string();
    known
        .iter()
        .map(|k| {
            let full = strsim::levenshtein(key, k);
            let short = strsim::levenshtein(&tail(key), &tail(k));
            (full.min(short), k)
        })
        .filter(|(d, k)| *d <= 3.max(tail(k).len() / 3))
        .min_by_key(|(d, _)| *d)
        .map(|(_, k)| k.clone())
}

/// Key/value pairs in file order; rejects malformed lines, duplicates and
/// unknown keys.
pub fn parse(text: &str, known: &BTreeSet<String>) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = i + 1;
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::config(format!(
                "line {lineno}: expected `section.key = value`, got `{line}`"
            ))
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !known.contains(key) {
            let hint = suggest(key, known)
                .map(|s| format!("; did you mean `{s}`?"))
                .unwrap_or_default();
            return Err(Error::config(format!("line {lineno}: unknown key `{key}`{hint}")));
        }
        if value.is_empty() {
            return Err(Error::config(format!("line {lineno}: `{key}` has no value")));
        }
        if out.insert(key.to_string(), value.to_string()).is_some() {
            return Err(Error::config(format!("line {lineno}: `{key}` is set twice")));
        }
    }
    Ok(out)
}

/// Typed reads that record the effective value of every key.
struct Resolver {
    given: BTreeMap<String, String>,
    defaults: BTreeMap<&'static str, Option<String>>,
    resolved: BTreeMap<String, String>,
}

impl Resolver {
    fn raw(&mut self, key: &str) -> Option<String> {
        let v = self
            .given
            .get(key)
            .cloned()
            .or_else(|| self.defaults.get(key).cloned().flatten());
        if let Some(v) = &v {
            self.resolved.insert(key.to_string(), v.clone());
        }
        v
    }

    fn string(&mut self, key: &str) -> String {
        self.raw(key).unwrap_or_default()
    }

    fn opt_f64(&mut self, key: &str) -> Result<Option<f64>> {
        let Some(s) = self.raw(key) else { return Ok(None) };
        let v: f64 = s
            .parse()
            .map_err(|_| Error::config(format!("{key}: expected a number, got `{s}`")))?;
        if !v.is_finite() {
            return Err(Error::config(format!("{key}: must be finite, got `{s}`")));
        }
        self.resolved.insert(key.to_string(), v.to_string());
        Ok(Some(v))
    }

    fn f64(&mut self, key: &str) -> Result<f64> {
        self.opt_f64(key)?
            .ok_or_else(|| Error::config(format!("{key} is required")))
    }

    fn positive(&mut self, key: &str) -> Result<f64> {
        let v = self.f64(key)?;
        if !(v > 0.0) {
            return Err(Error::config(format!("{key} must be positive, got {v}")));
        }
        Ok(v)
    }

    fn usize(&mut self, key: &str) -> Result<usize> {
        let s = self.string(key);
        s.parse()
            .map_err(|_| Error::config(format!("{key}: expected a non-negative integer, got `{s}`")))
    }

    fn bool(&mut self, key: &str) -> Result<bool> {
        let s = self.string(key);
        s.parse()
            .map_err(|_| Error::config(format!("{key}: expected true or false, got `{s}`")))
    }
}

/// A fully validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub potential_kind: String,
    pub potential: Arc<dyn Potential>,
    pub grid: Grid,
    pub species: SpeciesConstants,
    pub couplings: CouplingParams,
    pub samples: usize,
    pub periods: f64,
    pub t_max: Option<f64>,
    pub sweep: SweepSpec,
    pub entropy_state: EntropyState,
    pub single_particle_entropy: bool,
    pub output_dir: PathBuf,
    pub hamiltonian_csv: bool,
    pub fermion_scheme: Arc<dyn FermionScheme>,
    pub min_gap_ratio: f64,
    /// Every effective key, defaults included.
    pub resolved: BTreeMap<String, String>,
}

impl RunConfig {
    /// Reads `path` (or starts from defaults) and applies `overrides` on top.
    pub fn load(path: Option<&Path>, overrides: &[(&str, String)]) -> Result<Self> {
        let text = match path {
            Some(p) => fs::read_to_string(p)
                .map_err(|e| Error::config(format!("cannot read config `{}`: {e}", p.display())))?,
            None => String::new(),
        };
        Self::parse_in(&text, overrides, path.and_then(Path::parent))
    }

    #[cfg(test)]
    pub fn from_text(text: &str, overrides: &[(&str, String)]) -> Result<Self> {
        Self::parse_in(text, overrides, None)
    }

    /// Relative table paths are taken relative to `base`.
    fn parse_in(text: &str, overrides: &[(&str, String)], base: Option<&Path>) -> Result<Self> {
        let potentials = PotentialRegistry::with_builtins();
        let known = known_keys(&potentials);
        let mut given = parse(text, &known)?;
        if let (Some(base), Some(table)) = (base, given.get_mut("potential.table_path")) {
            if Path::new(table.as_str()).is_relative() {
                *table = base.join(table.as_str()).to_string_lossy().into_owned();
            }
        }
        for (k, v) in overrides {
            given.insert(k.to_string(), v.clone());
        }
        Self::resolve(given, &potentials)
    }

    fn resolve(given: BTreeMap<String, String>, potentials: &PotentialRegistry) -> Result<Self> {
        let mut r = Resolver {
            given,
            defaults: fixed_keys().into_iter().collect(),
            resolved: BTreeMap::new(),
        };

        let potential_kind = r.string("potential.kind");
        let variant_keys = potentials.keys(&potential_kind).unwrap_or(&[]);
        let mut pp = PotentialParams::new();
        for (key, value) in &r.given {
            if let Some(k) = key.strip_prefix("potential.").filter(|k| *k != "kind") {
                pp.insert(k, value);
            }
        }
        let potential = potentials.build(&potential_kind, &pp)?;
        for k in variant_keys {
            let full = format!("potential.{k}");
            if let Some(v) = r.given.get(&full).cloned().or_else(|| potential_default(k)) {
                r.resolved.insert(full, v);
            }
        }

        let grid = Grid::new(r.f64("grid.x_max_um")?, r.usize("grid.n_points")?)?;
        let mass_b = r.positive("species.mass_boson_u")?;
        let mass_f = r.positive("species.mass_fermion_u")?;
        let species = SpeciesConstants::from_masses(
            mass_b * constants::ATOMIC_MASS_UNIT,
            mass_f * constants::ATOMIC_MASS_UNIT,
        )?;
        let couplings = CouplingParams::new(
            r.f64("couplings.lambda_bb")?,
            r.f64("couplings.lambda_ff")?,
            r.f64("couplings.lambda_bf")?,
        )?;

        let samples = r.usize("dynamics.samples")?;
        if samples < 2 {
            return Err(Error::config(format!(
                "dynamics.samples must be at least 2, got {samples}"
            )));
        }
        let periods = r.positive("dynamics.periods")?;
        let t_max = match r.opt_f64("dynamics.t_max")? {
            Some(t) if !(t > 0.0) => {
                return Err(Error::config(format!("dynamics.t_max must be positive, got {t}")))
            }
            t => t,
        };

        let plane: Plane = r.string("sweep.plane").parse()?;
        let axis = |r: &mut Resolver, lo: &str, hi: &str, n: &str| -> Result<Axis> {
            let (lo_v, hi_v, n_v) = (r.f64(lo)?, r.f64(hi)?, r.usize(n)?);
            Axis::new(lo_v, hi_v, n_v).map_err(|e| Error::config(format!("{lo}/{hi}/{n}: {}", strip(&e))))
        };
        let x = axis(&mut r, "sweep.x_min", "sweep.x_max", "sweep.nx")?;
        let y = axis(&mut r, "sweep.y_min", "sweep.y_max", "sweep.ny")?;
        let mut reference = couplings;
        for (key, slot) in [
            ("sweep.ref_lambda_bb", &mut reference.lambda_bb),
            ("sweep.ref_lambda_ff", &mut reference.lambda_ff),
            ("sweep.ref_lambda_bf", &mut reference.lambda_bf),
        ] {
            match r.opt_f64(key)? {
                Some(v) => *slot = v,
                None => {
                    r.resolved.insert(key.to_string(), slot.to_string());
                }
            }
        }
        reference
            .validate()
            .map_err(|e| Error::config(format!("sweep reference: {}", strip(&e))))?;
        let sweep = SweepSpec {
            plane,
            x,
            y,
            fixed: couplings,
            reference,
        };
        sweep.validate()?;

        let entropy_state = match r.string("sweep.entropy_state").as_str() {
            "ground" => {
                r.resolved.remove("sweep.entropy_tau");
                EntropyState::Ground
            }
            "evolved" => {
                let tau = r.f64("sweep.entropy_tau")?;
                if tau < 0.0 {
                    return Err(Error::config(format!(
                        "sweep.entropy_tau must be >= 0, got {tau}"
                    )));
                }
                EntropyState::Evolved { tau }
            }
            other => {
                return Err(Error::config(format!(
                    "sweep.entropy_state: expected ground or evolved, got `{other}`"
                )))
            }
        };
        let single_particle_entropy = r.bool("sweep.single_particle_entropy")?;

        let output_dir = PathBuf::from(r.string("output.dir"));
        let hamiltonian_csv = r.bool("output.hamiltonian_csv")?;
        let fermion_scheme = FermionSchemeRegistry::with_builtins().get(&r.string("model.fermion_basis"))?;
        let min_gap_ratio = r.positive("model.min_gap_ratio")?;

        Ok(Self {
            potential_kind,
            potential,
            grid,
            species,
            couplings,
            samples,
            periods,
            t_max,
            sweep,
            entropy_state,
            single_particle_entropy,
            output_dir,
            hamiltonian_csv,
            fermion_scheme,
            min_gap_ratio,
            resolved: r.resolved,
        })
    }

    pub fn model_spec(&self) -> ModelSpec {
        ModelSpec {
            potential: self.potential.clone(),
            grid: self.grid,
            species: self.species,
            fermion_scheme: self.fermion_scheme.clone(),
            sector: 0,
            min_gap_ratio: self.min_gap_ratio,
        }
    }

    /// The resolved configuration in the input format.
    pub fn to_text(&self) -> String {
        self.resolved
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}

/// Message of a config error without its category prefix.
fn strip(e: &Error) -> String {
    match e {
        Error::Config(m) | Error::InvalidArgument(m) => m.clone(),
        other => other.to_string(),
    }
}
