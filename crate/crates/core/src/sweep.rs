//! Parameter-plane fidelity maps and entropy line scans.
//!
//! Grid points are independent; they run on a private rayon pool and are
//! gathered in row-major order (y outer, x inner), so output never depends on
//! the worker count.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;

use crate::dynamics::Propagator;
use crate::manybody::{CouplingParams, GroundState};
use crate::model::Model;
use crate::observables::{fidelity, single_particle_entropy, species_entropies};
use crate::units::Species;
use crate::{Error, Result};

/// Coupling plane or line to scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    /// x = λ_FF, y = λ_BF, λ_BB fixed.
    FfBf,
    /// x = λ_BB, y = λ_BF, λ_FF fixed.
    BbBf,
    /// x = λ_BB, y = λ_FF, λ_BF fixed.
    BbFf,
    /// x = λ_FF, λ_BB and λ_BF fixed.
    LineFf,
}

impl Plane {
    pub fn as_str(self) -> &'static str {
        match self {
            Plane::FfBf => "ff_bf",
            Plane::BbBf => "bb_bf",
            Plane::BbFf => "bb_ff",
            Plane::LineFf => "line_ff",
        }
    }

    /// Names of the x and y couplings.
    pub fn axis_names(self) -> (&'static str, Option<&'static str>) {
        match self {
            Plane::FfBf => ("lambda_ff", Some("lambda_bf")),
            Plane::BbBf => ("lambda_bb", Some("lambda_bf")),
            Plane::BbFf => ("lambda_bb", Some("lambda_ff")),
            Plane::LineFf => ("lambda_ff", None),
        }
    }

    pub fn is_line(self) -> bool {
        self == Plane::LineFf
    }

    /// Couplings at axis values (x, y), the rest taken from `fixed`.
    pub fn params(self, fixed: &CouplingParams, x: f64, y: f64) -> CouplingParams {
        let mut p = *fixed;
        match self {
            Plane::FfBf => {
                p.lambda_ff = x;
                p.lambda_bf = y;
            }
            Plane::BbBf => {
                p.lambda_bb = x;
                p.lambda_bf = y;
            }
            Plane::BbFf => {
                p.lambda_bb = x;
                p.lambda_ff = y;
            }
            Plane::LineFf => p.lambda_ff = x,
        }
        p
    }
}

impl fmt::Display for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Plane {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ff_bf" => Plane::FfBf,
            "bb_bf" => Plane::BbBf,
            "bb_ff" => Plane::BbFf,
            "line_ff" => Plane::LineFf,
            _ => {
                return Err(Error::config(format!(
                    "unknown sweep plane `{s}` (expected ff_bf, bb_bf, bb_ff or line_ff)"
                )))
            }
        })
    }
}

/// Uniform axis; a single point sits at `min`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("axis needs at least one point"));
        }
        if !min.is_finite() || !max.is_finite() || min < 0.0 {
            return Err(Error::config(format!(
                "axis range [{min}, {max}] must be finite and non-negative"
            )));
        }
        if n > 1 && !(max > min) {
            return Err(Error::config(format!("axis range [{min}, {max}] is degenerate")));
        }
        Ok(Self { min, max, n })
    }

    pub fn point(min: f64) -> Result<Self> {
        Self::new(min, min, 1)
    }

    pub fn values(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| {
                if i == self.n - 1 {
                    self.max
                } else {
                    self.min + i as f64 * step
                }
            })
            .collect()
    }
}

/// A plane or line scan.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub plane: Plane,
    pub x: Axis,
    /// Ignored for line scans.
    pub y: Axis,
    /// Supplies the coupling(s) not on an axis.
    pub fixed: CouplingParams,
    /// Reference point of a fidelity map.
    pub reference: CouplingParams,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.fixed.validate()?;
        self.reference.validate()?;
        for (axis, name) in [(&self.x, "x"), (&self.y, "y")] {
            if axis.max > crate::manybody::MAX_COUPLING {
                return Err(Error::config(format!("{name} axis exceeds the coupling bound")));
            }
        }
        Ok(())
    }

    fn y_values(&self) -> Vec<f64> {
        if self.plane.is_line() {
            vec![f64::NAN]
        } else {
            self.y.values()
        }
    }
}

/// Fidelity against the reference ground state over a plane.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelitySurface {
    pub plane: Plane,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Row-major, y outer: `values[iy * xs.len() + ix]`.
    pub values: Vec<f64>,
    pub degenerate: Vec<bool>,
    pub reference: CouplingParams,
    pub reference_energy: f64,
    pub reference_degenerate: bool,
}

impl FidelitySurface {
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.xs.len() + ix]
    }

    pub fn degenerate_cells(&self) -> usize {
        self.degenerate.iter().filter(|d| **d).count()
    }

    /// CSV with header `lambda_x,lambda_y,fidelity,degenerate_flag`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("lambda_x,lambda_y,fidelity,degenerate_flag\n");
        for (iy, y) in self.ys.iter().enumerate() {
            for (ix, x) in self.xs.iter().enumerate() {
                let k = iy * self.xs.len() + ix;
                let _ = writeln!(s, "{x},{y},{},{}", self.values[k], u8::from(self.degenerate[k]));
            }
        }
        s
    }
}

/// Which state the entropy scan looks at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntropyState {
    Ground,
    /// The both-right initial state evolved to time τ.
    Evolved {
        tau: f64,
    },
}

/// Species entropies along a λ_FF line.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyCurve {
    pub lambda_ff: Vec<f64>,
    pub s_bosons: Vec<f64>,
    pub s_fermions: Vec<f64>,
    pub degenerate: Vec<bool>,
    /// Mode entropy of a single boson and a single fermion, when requested.
    pub single_particle: Option<(Vec<f64>, Vec<f64>)>,
}

impl EntropyCurve {
    /// Index and value of the largest boson entropy; ties go to the first.
    pub fn argmax(&self) -> (usize, f64) {
        self.s_bosons.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc },
        )
    }

    /// True when the maximum is strictly inside the scanned range.
    pub fn has_interior_maximum(&self) -> bool {
        let (i, v) = self.argmax();
        let n = self.s_bosons.len();
        i > 0 && i + 1 < n && v > self.s_bosons[0] && v > self.s_bosons[n - 1]
    }

    /// CSV with header `lambda_ff,s_bosons,s_fermions,degenerate_flag`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("lambda_ff,s_bosons,s_fermions,degenerate_flag\n");
        for i in 0..self.lambda_ff.len() {
            let _ = writeln!(
                s,
                "{},{},{},{}",
                self.lambda_ff[i],
                self.s_bosons[i],
                self.s_fermions[i],
                u8::from(self.degenerate[i])
            );
        }
        s
    }

    /// CSV with header `lambda_ff,s1_bosons,s1_fermions`, if computed.
    pub fn single_particle_csv(&self) -> Option<String> {
        let (b, f) = self.single_particle.as_ref()?;
        let mut s = String::from("lambda_ff,s1_bosons,s1_fermions\n");
        for i in 0..self.lambda_ff.len() {
            let _ = writeln!(s, "{},{},{}", self.lambda_ff[i], b[i], f[i]);
        }
        Some(s)
    }
}

/// Evaluate `f(ix, iy, x, y)` on every grid point with `workers` threads and
/// return results in row-major order.
pub fn run_parallel<T, F>(xs: &[f64], ys: &[f64], workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, usize, f64, f64) -> Result<T> + Sync,
{
    if workers == 0 {
        return Err(Error::invalid("workers must be at least 1"));
    }
    let nx = xs.len();
    let points: Vec<(usize, usize)> = (0..ys.len())
        .flat_map(|iy| (0..nx).map(move |ix| (ix, iy)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Internal(format!("thread pool: {e}")))?;
    let results: Vec<Result<T>> = pool.install(|| {
        points
            .par_iter()
            .map(|&(ix, iy)| f(ix, iy, xs[ix], ys[iy]))
            .collect()
    });
    results
        .into_iter()
        .zip(&points)
        .map(|(r, &(ix, iy))| {
            r.map_err(|e| Error::SweepPoint {
                ix,
                iy,
                source: Box::new(e),
            })
        })
        .collect()
}

fn ground(model: &Model, p: &CouplingParams) -> Result<GroundState> {
    p.validate()?;
    model.ground_state(p)
}

pub fn fidelity_map(model: &Model, spec: &SweepSpec, workers: usize) -> Result<FidelitySurface> {
    spec.validate()?;
    if spec.plane.is_line() {
        return Err(Error::config("fidelity maps need a plane, not a line"));
    }
    let reference = model.ground_state(&spec.reference)?;
    let xs = spec.x.values();
    let ys = spec.y_values();
    let cells = run_parallel(&xs, &ys, workers, |_, _, x, y| {
        let g = ground(model, &spec.plane.params(&spec.fixed, x, y))?;
        Ok((fidelity(&reference.state, &g.state)?, g.degenerate))
    })?;
    Ok(FidelitySurface {
        plane: spec.plane,
        xs,
        ys,
        values: cells.iter().map(|c| c.0).collect(),
        degenerate: cells.iter().map(|c| c.1).collect(),
        reference: spec.reference,
        reference_energy: reference.energy,
        reference_degenerate: reference.degenerate,
    })
}

pub fn entropy_scan(
    model: &Model,
    spec: &SweepSpec,
    state: EntropyState,
    single_particle: bool,
    workers: usize,
) -> Result<EntropyCurve> {
    spec.validate()?;
    if !spec.plane.is_line() {
        return Err(Error::config("entropy scans run along line_ff"));
    }
    let xs = spec.x.values();
    let ys = [f64::NAN];
    let initial = model.initial_state()?;
    let rows = run_parallel(&xs, &ys, workers, |_, _, x, _| {
        let p = spec.plane.params(&spec.fixed, x, f64::NAN);
        p.validate()?;
        let h = model.hamiltonian(&p)?;
        let g = crate::manybody::ground_state(&h);
        let psi = match state {
            EntropyState::Ground => g.state,
            EntropyState::Evolved { tau } => Propagator::new(&h).state_at(&initial, tau)?,
        };
        let s = species_entropies(&psi, &model.basis)?;
        let sp = if single_particle {
            Some((
                single_particle_entropy(&psi, &model.basis, Species::Boson)?,
                single_particle_entropy(&psi, &model.basis, Species::Fermion)?,
            ))
        } else {
            None
        };
        Ok((s.bosons, s.fermions, g.degenerate, sp))
    })?;
    Ok(EntropyCurve {
        lambda_ff: xs,
        s_bosons: rows.iter().map(|r| r.0).collect(),
        s_fermions: rows.iter().map(|r| r.1).collect(),
        degenerate: rows.iter().map(|r| r.2).collect(),
        single_particle: single_particle.then(|| {
            (
                rows.iter().map(|r| r.3.map_or(0.0, |v| v.0)).collect(),
                rows.iter().map(|r| r.3.map_or(0.0, |v| v.1)).collect(),
            )
        }),
    })
}
