//! Even double-well potentials and the spatial grid they are sampled on.
//!
//! Potential shapes are strategies behind the [`Potential`] trait. A
//! [`PotentialRegistry`] maps variant names (as written in config files) to
//! builders, so new shapes plug in without touching the solver.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::{Error, Result};

/// Default well geometry (µm) and depth (units of ξ).
pub const DEFAULT_WELL_SEPARATION: f64 = 13.0;
pub const DEFAULT_WELL_WIDTH: f64 = 6.0;
pub const DEFAULT_WELL_DEPTH: f64 = 0.05;
pub const DEFAULT_EDGE_SMOOTHING: f64 = 0.5;
pub const DEFAULT_X_MAX: f64 = 14.5;
pub const DEFAULT_N_POINTS: usize = 2001;

/// Uniform grid on the symmetric box [-x_max, x_max] with an odd number of
/// nodes, so x = 0 is always a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_max: f64,
    n_points: usize,
}

impl Grid {
    pub fn new(x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_max > 0.0) || !x_max.is_finite() {
            return Err(Error::config(format!(
                "grid.x_max_um must be positive, got {x_max}"
            )));
        }
        if n_points < 5 || n_points.is_multiple_of(2) {
            return Err(Error::config(format!(
                "grid.n_points must be odd and >= 5, got {n_points}"
            )));
        }
        Ok(Self { x_max, n_points })
    }

    pub fn x_min(&self) -> f64 {
        -self.x_max
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.x_max / (self.n_points - 1) as f64
    }

    /// Index of the x = 0 node.
    pub fn center(&self) -> usize {
        self.n_points / 2
    }

    /// Node coordinate. Computed from the center so that x(i) = -x(n-1-i) exactly.
    pub fn x(&self, i: usize) -> f64 {
        let c = self.center() as isize;
        (i as isize - c) as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Same box with n -> 2n - 1 nodes (spacing halved).
    pub fn refined(&self) -> Self {
        Self {
            x_max: self.x_max,
            n_points: 2 * self.n_points - 1,
        }
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            x_max: DEFAULT_X_MAX,
            n_points: DEFAULT_N_POINTS,
        }
    }
}

/// An even external potential V(x), x in µm, V in units of ξ.
pub trait Potential: fmt::Debug + Send + Sync {
    /// Registry name of the variant.
    fn name(&self) -> &'static str;

    fn evaluate(&self, x: f64) -> f64;

    /// Interval on which the potential is defined, if bounded.
    fn domain(&self) -> Option<(f64, f64)> {
        None
    }

    /// Resolved parameters, for run manifests.
    fn parameters(&self) -> Vec<(&'static str, f64)>;

    /// Largest value of V, used as the reference barrier height.
    fn barrier_height(&self) -> f64;
}

/// Sample `potential` at every grid node.
pub fn sample_on_grid(potential: &dyn Potential, grid: &Grid) -> Result<Vec<f64>> {
    if let Some((lo, hi)) = potential.domain() {
        if grid.x_min() < lo - 1e-12 || grid.x_max() > hi + 1e-12 {
            return Err(Error::config(format!(
                "{} potential covers [{lo}, {hi}] but the grid spans [{}, {}]",
                potential.name(),
                grid.x_min(),
                grid.x_max()
            )));
        }
    }
    let values: Vec<f64> = (0..grid.n_points())
        .map(|i| potential.evaluate(grid.x(i)))
        .collect();
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::config(format!(
            "potential produced non-finite value {bad}"
        )));
    }
    Ok(values)
}

/// Largest |V(x_i) - V(x_{n-1-i})| over the grid.
pub fn evenness_residual(samples: &[f64]) -> f64 {
    samples
        .iter()
        .zip(samples.iter().rev())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// Two square wells of width `a` centred at ±d/2, depth V₀ below a flat
/// plateau, with optional cosine ramps of width σ at each well edge.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleSquareWell {
    pub well_separation: f64,
    pub well_width: f64,
    pub well_depth: f64,
    pub edge_smoothing: f64,
}

impl DoubleSquareWell {
    pub fn new(well_separation: f64, well_width: f64, well_depth: f64, edge_smoothing: f64) -> Result<Self> {
        let all = [well_separation, well_width, well_depth, edge_smoothing];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("double_square_well parameters must be finite"));
        }
        if !(well_width > 0.0) {
            return Err(Error::config(format!(
                "double_square_well requires a > 0, got a = {well_width}"
            )));
        }
        if !(well_separation > well_width) {
            return Err(Error::config(format!(
                "double_square_well requires d > a, got d = {well_separation}, a = {well_width}"
            )));
        }
        if well_depth < 0.0 {
            return Err(Error::config(format!(
                "double_square_well requires V0 >= 0, got {well_depth}"
            )));
        }
        if edge_smoothing < 0.0 {
            return Err(Error::config(format!(
                "double_square_well requires sigma >= 0, got {edge_smoothing}"
            )));
        }
        if edge_smoothing >= well_width.min(well_separation - well_width) {
            return Err(Error::config(format!(
                "double_square_well requires sigma < min(a, d - a), got sigma = {edge_smoothing}"
            )));
        }
        Ok(Self {
            well_separation,
            well_width,
            well_depth,
            edge_smoothing,
        })
    }
}

impl Default for DoubleSquareWell {
    fn default() -> Self {
        Self {
            well_separation: DEFAULT_WELL_SEPARATION,
            well_width: DEFAULT_WELL_WIDTH,
            well_depth: DEFAULT_WELL_DEPTH,
            edge_smoothing: DEFAULT_EDGE_SMOOTHING,
        }
    }
}

impl Potential for DoubleSquareWell {
    fn name(&self) -> &'static str {
        "double_square_well"
    }

    fn evaluate(&self, x: f64) -> f64 {
        // distance from the nearer well centre
        let r = (x.abs() - 0.5 * self.well_separation).abs();
        let half = 0.5 * self.well_width;
        let sigma = self.edge_smoothing;
        if sigma == 0.0 {
            return if r <= half { 0.0 } else { self.well_depth };
        }
        let inner = half - 0.5 * sigma;
        let outer = half + 0.5 * sigma;
        if r <= inner {
            0.0
        } else if r >= outer {
            self.well_depth
        } else {
            let phase = std::f64::consts::PI * (r - inner) / sigma;
            0.5 * self.well_depth * (1.0 - phase.cos())
        }
    }

    fn parameters(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("well_separation_um", self.well_separation),
            ("well_width_um", self.well_width),
            ("well_depth", self.well_depth),
            ("edge_smoothing_um", self.edge_smoothing),
        ]
    }

    fn barrier_height(&self) -> f64 {
        self.well_depth
    }
}

/// V(x) = B ((x/x₀)² - 1)², minima at ±x₀, barrier B at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Quartic {
    pub barrier_height: f64,
    pub minima_half_separation: f64,
}

impl Quartic {
    pub fn new(barrier_height: f64, minima_half_separation: f64) -> Result<Self> {
        if !barrier_height.is_finite() || barrier_height < 0.0 {
            return Err(Error::config(format!(
                "quartic requires barrier_height >= 0, got {barrier_height}"
            )));
        }
        if !(minima_half_separation > 0.0) || !minima_half_separation.is_finite() {
            return Err(Error::config(format!(
                "quartic requires minima_half_separation_um > 0, got {minima_half_separation}"
            )));
        }
        Ok(Self {
            barrier_height,
            minima_half_separation,
        })
    }
}

impl Potential for Quartic {
    fn name(&self) -> &'static str {
        "quartic"
    }

    fn evaluate(&self, x: f64) -> f64 {
        let s = x / self.minima_half_separation;
        let t = s * s - 1.0;
        self.barrier_height * t * t
    }

    fn parameters(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("barrier_height", self.barrier_height),
            ("minima_half_separation_um", self.minima_half_separation),
        ]
    }

    fn barrier_height(&self) -> f64 {
        self.barrier_height
    }
}

/// Piecewise-linear interpolation of (x, V) samples. The table must be even.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    xs: Vec<f64>,
    vs: Vec<f64>,
}

impl Tabulated {
    pub fn new(mut samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::config("tabulated potential needs at least two samples"));
        }
        if samples.iter().any(|(x, v)| !x.is_finite() || !v.is_finite()) {
            return Err(Error::config("tabulated potential contains non-finite values"));
        }
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::config("tabulated potential has duplicate x values"));
        }
        let (xs, vs): (Vec<f64>, Vec<f64>) = samples.into_iter().unzip();
        let table = Self { xs, vs };
        for &x in &table.xs {
            if !(table.contains(-x)) {
                return Err(Error::config(format!(
                    "tabulated potential is not defined at -x for x = {x}"
                )));
            }
            let diff = (table.evaluate(x) - table.evaluate(-x)).abs();
            if diff > 1e-12 {
                return Err(Error::config(format!(
                    "tabulated potential is not even: |V({x}) - V({})| = {diff:e}",
                    -x
                )));
            }
        }
        Ok(table)
    }

    /// Read a two-column CSV with header `x_um,V_xi`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_csv(&text)
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next().map(str::trim) {
            Some("x_um,V_xi") => {}
            other => {
                return Err(Error::config(format!(
                    "tabulated potential CSV must start with header `x_um,V_xi`, got {other:?}"
                )))
            }
        }
        let mut samples = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let mut cols = line.split(',').map(str::trim);
            let parse = |c: Option<&str>| -> Result<f64> {
                c.ok_or_else(|| Error::config(format!("row {}: missing column", lineno + 2)))?
                    .parse::<f64>()
                    .map_err(|e| Error::config(format!("row {}: {e}", lineno + 2)))
            };
            let x = parse(cols.next())?;
            let v = parse(cols.next())?;
            if cols.next().is_some() {
                return Err(Error::config(format!("row {}: expected two columns", lineno + 2)));
            }
            samples.push((x, v));
        }
        Self::new(samples)
    }

    fn contains(&self, x: f64) -> bool {
        x >= self.xs[0] - 1e-12 && x <= self.xs[self.xs.len() - 1] + 1e-12
    }
}

impl Potential for Tabulated {
    fn name(&self) -> &'static str {
        "tabulated"
    }

    fn evaluate(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.vs[0];
        }
        if x >= self.xs[n - 1] {
            return self.vs[n - 1];
        }
        let hi = self.xs.partition_point(|&xi| xi <= x);
        let lo = hi - 1;
        let t = (x - self.xs[lo]) / (self.xs[hi] - self.xs[lo]);
        self.vs[lo] + t * (self.vs[hi] - self.vs[lo])
    }

    fn domain(&self) -> Option<(f64, f64)> {
        Some((self.xs[0], self.xs[self.xs.len() - 1]))
    }

    fn parameters(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("samples", self.xs.len() as f64),
            ("x_min_um", self.xs[0]),
            ("x_max_um", self.xs[self.xs.len() - 1]),
        ]
    }

    fn barrier_height(&self) -> f64 {
        self.vs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// String-valued parameters for a potential builder, as read from the
/// `potential.*` section of a run config.
#[derive(Debug, Clone, Default)]
pub struct PotentialParams {
    values: BTreeMap<String, String>,
}

impl PotentialParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(mut self, key: &str, value: impl ToString) -> Self {
        self.values.insert(key.to_string(), value.to_string());
        self
    }

    pub fn insert(&mut self, key: &str, value: &str) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.values.get(key) {
            None => Ok(default),
            Some(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::config(format!("potential.{key}: expected a number, got `{s}`"))),
        }
    }
}

type Builder = fn(&PotentialParams) -> Result<Arc<dyn Potential>>;

struct Entry {
    keys: &'static [&'static str],
    build: Builder,
}

/// Name -> builder map for potential variants.
pub struct PotentialRegistry {
    entries: BTreeMap<&'static str, Entry>,
}

impl PotentialRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    /// Registry preloaded with `double_square_well`, `quartic` and `tabulated`.
    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register(
            "double_square_well",
            &[
                "well_separation_um",
                "well_width_um",
                "well_depth",
                "edge_smoothing_um",
            ],
            |p| {
                Ok(Arc::new(DoubleSquareWell::new(
                    p.f64_or("well_separation_um", DEFAULT_WELL_SEPARATION)?,
                    p.f64_or("well_width_um", DEFAULT_WELL_WIDTH)?,
                    p.f64_or("well_depth", DEFAULT_WELL_DEPTH)?,
                    p.f64_or("edge_smoothing_um", DEFAULT_EDGE_SMOOTHING)?,
                )?))
            },
        );
        reg.register("quartic", &["barrier_height", "minima_half_separation_um"], |p| {
            Ok(Arc::new(Quartic::new(
                p.f64_or("barrier_height", DEFAULT_WELL_DEPTH)?,
                p.f64_or("minima_half_separation_um", 0.5 * DEFAULT_WELL_SEPARATION)?,
            )?))
        });
        reg.register("tabulated", &["table_path"], |p| {
            let path = p
                .raw("table_path")
                .ok_or_else(|| Error::config("tabulated potential requires potential.table_path"))?;
            Ok(Arc::new(Tabulated::from_csv(Path::new(path)).map_err(
                |e| match e {
                    Error::Io(io) => Error::config(format!("potential.table_path `{path}`: {io}")),
                    other => other,
                },
            )?))
        });
        reg
    }

    pub fn register(&mut self, name: &'static str, keys: &'static [&'static str], build: Builder) {
        self.entries.insert(name, Entry { keys, build });
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    /// Parameter keys accepted by a variant.
    pub fn keys(&self, name: &str) -> Option<&'static [&'static str]> {
        self.entries.get(name).map(|e| e.keys)
    }

    pub fn build(&self, name: &str, params: &PotentialParams) -> Result<Arc<dyn Potential>> {
        let entry = self.entries.get(name).ok_or_else(|| {
            let known: Vec<_> = self.names().collect();
            Error::config(format!(
                "unknown potential variant `{name}` (known: {})",
                known.join(", ")
            ))
        })?;
        if let Some(key) = params.keys().find(|k| !entry.keys.contains(k)) {
            return Err(Error::config(format!(
                "potential variant `{name}` does not accept key `{key}` (accepts: {})",
                entry.keys.join(", ")
            )));
        }
        (entry.build)(params)
    }
}

impl Default for PotentialRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}
