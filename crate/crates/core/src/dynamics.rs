//! Spectral time evolution, return probabilities, two-particle densities and
//! regime metrics of P_RR(τ).

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::linalg::SortedEigen;
use crate::manybody::{CompositeBasis, ManyBodyHamiltonian, SpeciesBasis};
use crate::potential::Grid;
use crate::quadrature::simpson_weights;
use crate::spsolver::DoubletModes;
use crate::units::Species;
use crate::{Error, Result};

/// |dP/dτ| below which a sample can belong to a plateau.
pub const PLATEAU_SLOPE_THRESHOLD: f64 = 1e-4;
/// Shortest reported plateau, in τ.
pub const PLATEAU_MIN_LENGTH: f64 = 50.0;
/// Plateaus must sit inside this band of P.
pub const PLATEAU_BAND: (f64, f64) = (0.2, 0.8);
/// Default number of time samples.
pub const DEFAULT_SAMPLES: usize = 4096;
/// Default window length in periods of the slower species.
pub const DEFAULT_PERIODS: f64 = 3.0;

const ZERO_PADDING: usize = 16;

/// Complex amplitudes over a composite basis, tagged with the basis and time.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub coefficients: DVector<Complex64>,
    pub basis_tag: String,
    pub time: f64,
}

impl StateVector {
    pub fn new(coefficients: DVector<Complex64>, basis_tag: &str) -> Self {
        Self {
            coefficients,
            basis_tag: basis_tag.to_string(),
            time: 0.0,
        }
    }

    pub fn from_real(v: &DVector<f64>, basis_tag: &str) -> Self {
        Self::new(v.map(|x| Complex64::new(x, 0.0)), basis_tag)
    }

    /// Unit vector on basis index `k`.
    pub fn basis_state(dim: usize, k: usize, basis_tag: &str) -> Self {
        let mut c = DVector::zeros(dim);
        c[k] = Complex64::new(1.0, 0.0);
        Self::new(c, basis_tag)
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn norm(&self) -> f64 {
        self.coefficients.norm()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.basis_tag != other.basis_tag || self.dim() != other.dim() {
            return Err(Error::invalid(format!(
                "states live in different bases ({} with dim {} vs {} with dim {})",
                self.basis_tag,
                self.dim(),
                other.basis_tag,
                other.dim()
            )));
        }
        Ok(self.coefficients.dotc(&other.coefficients))
    }

    /// Coefficients as an n_B × n_F matrix.
    pub fn as_matrix(&self, n_b: usize, n_f: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(n_b, n_f, |i, j| self.coefficients[i * n_f + j])
    }
}

/// Both bosons and both fermions in the right mode.
pub fn initial_state_rr(basis: &CompositeBasis) -> Result<StateVector> {
    let ib = basis
        .bosons
        .both_right_index()
        .ok_or_else(|| Error::config("boson basis has no both-right state"))?;
    let i_f = basis.fermions.both_right_index().ok_or_else(|| {
        Error::config(format!(
            "fermion basis {} has no both-right state in S_z = {}",
            basis.fermions.scheme, basis.fermions.sector
        ))
    })?;
    Ok(StateVector::basis_state(
        basis.dim(),
        basis.index(ib, i_f),
        &basis.tag(),
    ))
}

/// exp(-iHτ) through the eigendecomposition of H.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub eigen: SortedEigen,
    pub basis_tag: String,
}

impl Propagator {
    pub fn new(h: &ManyBodyHamiltonian) -> Self {
        Self {
            eigen: h.eigen(),
            basis_tag: h.basis_tag.clone(),
        }
    }

    pub fn energies(&self) -> &[f64] {
        &self.eigen.values
    }

    /// Amplitudes ⟨n|ψ⟩ in the eigenbasis.
    pub fn project(&self, psi: &StateVector) -> Result<DVector<Complex64>> {
        if psi.basis_tag != self.basis_tag || psi.dim() != self.eigen.values.len() {
            return Err(Error::invalid(format!(
                "state over {} cannot be evolved with a Hamiltonian over {}",
                psi.basis_tag, self.basis_tag
            )));
        }
        let vt = self.eigen.vectors.transpose().map(|x| Complex64::new(x, 0.0));
        Ok(vt * &psi.coefficients)
    }

    fn rebuild(&self, amps: &DVector<Complex64>, tau: f64) -> StateVector {
        let phased = DVector::from_iterator(
            amps.len(),
            amps.iter()
                .zip(&self.eigen.values)
                .map(|(a, e)| a * Complex64::from_polar(1.0, -e * tau)),
        );
        let v = self.eigen.vectors.map(|x| Complex64::new(x, 0.0));
        StateVector {
            coefficients: v * phased,
            basis_tag: self.basis_tag.clone(),
            time: tau,
        }
    }

    /// ψ(τ) = Σ_n e^{-iE_nτ} ⟨n|ψ₀⟩ |n⟩. Negative τ runs backwards.
    pub fn state_at(&self, psi0: &StateVector, tau: f64) -> Result<StateVector> {
        let amps = self.project(psi0)?;
        Ok(self.rebuild(&amps, tau))
    }

    pub fn evolve(&self, psi0: &StateVector, times: &[f64]) -> Result<Vec<StateVector>> {
        check_times(times)?;
        let n = psi0.norm();
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("initial state has norm {n}")));
        }
        let amps = self.project(psi0)?;
        Ok(times
            .iter()
            .map(|&t| {
                if t == 0.0 {
                    // identity, without the round trip through the eigenbasis
                    StateVector {
                        time: 0.0,
                        ..psi0.clone()
                    }
                } else {
                    self.rebuild(&amps, t)
                }
            })
            .collect())
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::invalid("times must be finite and non-negative"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("times must be ascending"));
    }
    Ok(())
}

pub fn evolve(h: &ManyBodyHamiltonian, psi0: &StateVector, times: &[f64]) -> Result<Vec<StateVector>> {
    Propagator::new(h).evolve(psi0, times)
}

/// Probability that both particles of `species` sit in the right mode.
pub fn return_probability(psi: &StateVector, basis: &CompositeBasis, species: Species) -> Result<f64> {
    if psi.basis_tag != basis.tag() || psi.dim() != basis.dim() {
        return Err(Error::invalid("state does not belong to this basis"));
    }
    let target = basis
        .species(species)
        .both_right_index()
        .ok_or_else(|| Error::config(format!("{species} basis has no both-right state")))?;
    Ok((0..basis.dim())
        .filter(|&k| {
            let (ib, i_f) = basis.split(k);
            match species {
                Species::Boson => ib == target,
                Species::Fermion => i_f == target,
            }
        })
        .map(|k| psi.coefficients[k].norm_sqr())
        .sum())
}

/// `linspace(0, periods · 2π/ω, samples)`.
pub fn time_grid(omega: f64, periods: f64, samples: usize) -> Result<Vec<f64>> {
    if !(omega > 0.0) || !(periods > 0.0) || samples < 2 {
        return Err(Error::invalid(format!(
            "bad time grid: omega {omega}, periods {periods}, samples {samples}"
        )));
    }
    let t_max = periods * 2.0 * PI / omega;
    Ok(linspace(t_max, samples))
}

pub fn linspace(t_max: f64, samples: usize) -> Vec<f64> {
    let dt = t_max / (samples - 1) as f64;
    (0..samples).map(|i| i as f64 * dt).collect()
}

/// P_RR of both species on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub p_rr_bosons: Vec<f64>,
    pub p_rr_fermions: Vec<f64>,
}

impl TimeSeries {
    pub fn species(&self, species: Species) -> &[f64] {
        match species {
            Species::Boson => &self.p_rr_bosons,
            Species::Fermion => &self.p_rr_fermions,
        }
    }

    /// CSV with header `tau,p_rr_b,p_rr_f`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("tau,p_rr_b,p_rr_f\n");
        for i in 0..self.times.len() {
            let _ = writeln!(
                s,
                "{},{},{}",
                self.times[i], self.p_rr_bosons[i], self.p_rr_fermions[i]
            );
        }
        s
    }
}

/// Evolve `psi0` and record both return probabilities.
pub fn return_series(
    h: &ManyBodyHamiltonian,
    basis: &CompositeBasis,
    psi0: &StateVector,
    times: &[f64],
) -> Result<TimeSeries> {
    let states = evolve(h, psi0, times)?;
    let mut b = Vec::with_capacity(times.len());
    let mut f = Vec::with_capacity(times.len());
    for s in &states {
        b.push(return_probability(s, basis, Species::Boson)?);
        f.push(return_probability(s, basis, Species::Fermion)?);
    }
    Ok(TimeSeries {
        times: times.to_vec(),
        p_rr_bosons: b,
        p_rr_fermions: f,
    })
}

/// |Ψ(x₁, x₂)|² of one species on grid × grid, row index x₁.
#[derive(Debug, Clone)]
pub struct DensityGrid {
    pub grid: Grid,
    pub values: DMatrix<f64>,
}

impl DensityGrid {
    fn integrate_with(&self, w: &[f64], from: usize) -> f64 {
        let n = self.grid.n_points();
        let mut total = 0.0;
        for i in from..n {
            let mut row = 0.0;
            for j in from..n {
                row += w[j - from] * self.values[(i, j)];
            }
            total += w[i - from] * row;
        }
        total
    }

    pub fn total(&self) -> f64 {
        let w = simpson_weights(self.grid.n_points(), self.grid.spacing());
        self.integrate_with(&w, 0)
    }

    /// Mass in the quadrant x₁ ≥ 0, x₂ ≥ 0.
    pub fn right_right(&self) -> f64 {
        let c = self.grid.center();
        let w = simpson_weights(self.grid.n_points() - c, self.grid.spacing());
        self.integrate_with(&w, c)
    }

    /// CSV with header `x1_um,x2_um,density`, every `stride`-th node.
    pub fn to_csv(&self, stride: usize) -> String {
        let stride = stride.max(1);
        let mut s = String::from("x1_um,x2_um,density\n");
        for i in (0..self.grid.n_points()).step_by(stride) {
            for j in (0..self.grid.n_points()).step_by(stride) {
                let _ = writeln!(s, "{},{},{}", self.grid.x(i), self.grid.x(j), self.values[(i, j)]);
            }
        }
        s
    }
}

/// Mode-space amplitude channels: for every configuration of the other species
/// and every spin pair, the 2×2 matrix M with Ψ(x₁,x₂) = Σ M_ab φ_a(x₁) φ_b(x₂).
fn channels(psi: &StateVector, basis: &CompositeBasis, species: Species) -> Vec<[[Complex64; 2]; 2]> {
    let own: &SpeciesBasis = basis.species(species);
    let other_dim = match species {
        Species::Boson => basis.fermions.dim(),
        Species::Fermion => basis.bosons.dim(),
    };
    let spins: Vec<u8> = {
        let mut s = own.orbital_spins.clone();
        s.sort_unstable();
        s.dedup();
        s
    };
    let n_orb = own.orbital_modes.len();
    let mut out = Vec::new();
    for o in 0..other_dim {
        for &s1 in &spins {
            for &s2 in &spins {
                let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
                for (k, state) in own.states.iter().enumerate() {
                    let idx = match species {
                        Species::Boson => basis.index(k, o),
                        Species::Fermion => basis.index(o, k),
                    };
                    let c = psi.coefficients[idx];
                    if c.norm_sqr() == 0.0 {
                        continue;
                    }
                    for p in (0..n_orb).filter(|&p| own.orbital_spins[p] == s1) {
                        for q in (0..n_orb).filter(|&q| own.orbital_spins[q] == s2) {
                            m[own.orbital_modes[p]][own.orbital_modes[q]] += c * state.amplitudes[(p, q)];
                        }
                    }
                }
                out.push(m);
            }
        }
    }
    out
}

/// Two-particle density of one species, traced over the other species and
/// over spin.
pub fn density_profile(
    psi: &StateVector,
    basis: &CompositeBasis,
    modes_b: &DoubletModes,
    modes_f: &DoubletModes,
    grid: &Grid,
    species: Species,
) -> Result<DensityGrid> {
    if psi.basis_tag != basis.tag() || psi.dim() != basis.dim() {
        return Err(Error::invalid("state does not belong to this basis"));
    }
    if modes_b.grid != *grid || modes_f.grid != *grid {
        return Err(Error::invalid("modes were computed on a different grid"));
    }
    let modes = match species {
        Species::Boson => modes_b.modes(),
        Species::Fermion => modes_f.modes(),
    };
    let n = grid.n_points();
    let mut values = DMatrix::<f64>::zeros(n, n);
    for m in channels(psi, basis, species) {
        if m.iter().flatten().all(|c| c.norm_sqr() == 0.0) {
            continue;
        }
        for i in 0..n {
            let u0 = m[0][0] * modes[0][i] + m[1][0] * modes[1][i];
            let u1 = m[0][1] * modes[0][i] + m[1][1] * modes[1][i];
            for j in 0..n {
                let amp = u0 * modes[0][j] + u1 * modes[1][j];
                values[(i, j)] += amp.norm_sqr();
            }
        }
    }
    Ok(DensityGrid { grid: *grid, values })
}

/// Summary of a P_RR(τ) series.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeMetrics {
    /// Dominant oscillation period; `None` for a series without oscillation.
    pub period_estimate: Option<f64>,
    /// Decay of the per-period maxima over one nominal period, ≥ 0.
    pub damping_estimate: f64,
    pub plateau_intervals: Vec<(f64, f64)>,
}

impl RegimeMetrics {
    pub fn plateau_total(&self) -> f64 {
        self.plateau_intervals
            .iter()
            .fold(0.0, |acc, (a, b)| acc + (b - a))
    }
}

/// Period, damping and plateaus of `values(times)`. `omega` is the
/// non-interacting Bohr frequency that sets the nominal period.
pub fn regime_metrics(times: &[f64], values: &[f64], omega: f64) -> Result<RegimeMetrics> {
    if times.len() != values.len() || times.len() < 8 {
        return Err(Error::invalid(
            "series needs at least 8 samples with matching times",
        ));
    }
    if !(omega > 0.0) {
        return Err(Error::invalid(format!(
            "nominal frequency must be positive, got {omega}"
        )));
    }
    check_times(times)?;
    let n = times.len();
    let span = times[n - 1] - times[0];
    let nominal = 2.0 * PI / omega;
    if span < 3.0 * nominal * (1.0 - 1e-9) {
        return Err(Error::invalid(format!(
            "series spans {span:.1} but at least three nominal periods ({:.1}) are needed",
            3.0 * nominal
        )));
    }
    let dt = span / (n - 1) as f64;
    if times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-6 * dt) {
        return Err(Error::invalid("series must be uniformly sampled"));
    }
    Ok(RegimeMetrics {
        period_estimate: dominant_period(values, dt),
        damping_estimate: damping(times, values, nominal),
        plateau_intervals: plateaus(times, values),
    })
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / (n - 1) as f64).cos())
        .collect()
}

fn dominant_period(values: &[f64], dt: f64) -> Option<f64> {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let w = hann(n);
    let x: Vec<f64> = values.iter().zip(&w).map(|(v, w)| (v - mean) * w).collect();
    if x.iter().all(|v| v.abs() < 1e-12) {
        return None;
    }
    let m = n * ZERO_PADDING;
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    buf.resize(m, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);

    let span = dt * (n - 1) as f64;
    // frequencies below one cycle per window are the mean's leakage
    let k_min = ((m as f64 * dt / span).ceil() as usize).max(1);
    let (k_best, _) = buf[k_min..m / 2]
        .iter()
        .enumerate()
        .map(|(i, c)| (i + k_min, c.norm_sqr()))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    if k_best == 0 {
        return None;
    }
    let df = 2.0 * PI / (m as f64 * dt);
    let amp = |omega: f64| {
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, v) in x.iter().enumerate() {
            let (s, c) = (omega * dt * k as f64).sin_cos();
            re += v * c;
            im -= v * s;
        }
        re * re + im * im
    };
    let (mut a, mut b) = ((k_best as f64 - 1.0) * df, (k_best as f64 + 1.0) * df);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (amp(c), amp(d));
    for _ in 0..60 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = amp(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = amp(d);
        }
    }
    Some(2.0 * PI / (0.5 * (a + b)))
}

fn damping(times: &[f64], values: &[f64], nominal: f64) -> f64 {
    let t0 = times[0];
    let windows = ((times[times.len() - 1] - t0) / nominal + 1e-9).floor() as usize;
    let mut maxima = vec![f64::NEG_INFINITY; windows];
    for (t, v) in times.iter().zip(values) {
        let k = ((t - t0) / nominal) as usize;
        if k < windows {
            maxima[k] = maxima[k].max(*v);
        }
    }
    let xs: Vec<f64> = (0..windows).map(|k| (k as f64 + 0.5) * nominal).collect();
    let ys: Vec<f64> = maxima.iter().map(|m| m.max(1e-300).ln()).collect();
    let xm = xs.iter().sum::<f64>() / windows as f64;
    let ym = ys.iter().sum::<f64>() / windows as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    (-(sxy / sxx) * nominal).max(0.0)
}

fn plateaus(times: &[f64], values: &[f64]) -> Vec<(f64, f64)> {
    let n = values.len();
    let slope = |i: usize| {
        let (a, b) = if i == 0 {
            (0, 1)
        } else if i == n - 1 {
            (n - 2, n - 1)
        } else {
            (i - 1, i + 1)
        };
        (values[b] - values[a]) / (times[b] - times[a])
    };
    let flat: Vec<bool> = (0..n)
        .map(|i| {
            slope(i).abs() < PLATEAU_SLOPE_THRESHOLD
                && values[i] >= PLATEAU_BAND.0
                && values[i] <= PLATEAU_BAND.1
        })
        .collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        if !flat[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < n && flat[i + 1] {
            i += 1;
        }
        if times[i] - times[start] >= PLATEAU_MIN_LENGTH {
            out.push((times[start], times[i]));
        }
        i += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cos4(omega: f64, times: &[f64]) -> Vec<f64> {
        times.iter().map(|t| (0.5 * omega * t).cos().powi(4)).collect()
    }

    #[test]
    fn cos4_metrics() {
        let omega = 1.3e-3;
        let t = time_grid(omega, 3.0, 4096).unwrap();
        let m = regime_metrics(&t, &cos4(omega, &t), omega).unwrap();
        let p = m.period_estimate.unwrap();
        assert!((p * omega / (2.0 * PI) - 1.0).abs() < 0.01, "{p}");
        assert!(m.damping_estimate < 1e-6, "{}", m.damping_estimate);
        assert!(m.plateau_intervals.is_empty());
    }

    #[test]
    fn constant_series_is_one_plateau() {
        let omega = 1e-2;
        let t = time_grid(omega, 4.0, 1000).unwrap();
        let m = regime_metrics(&t, &vec![0.5; 1000], omega).unwrap();
        assert_eq!(m.plateau_intervals, vec![(0.0, t[999])]);
        assert_eq!(m.period_estimate, None);
        assert_eq!(m.damping_estimate, 0.0);
    }

    #[test]
    fn damped_series_is_detected() {
        let omega = 1e-2;
        let t = time_grid(omega, 6.0, 3000).unwrap();
        let nominal = 2.0 * PI / omega;
        let gamma = 0.2 / nominal;
        let v: Vec<f64> = t
            .iter()
            .map(|t| (-gamma * t).exp() * (0.5 * omega * t).cos().powi(2))
            .collect();
        let m = regime_metrics(&t, &v, omega).unwrap();
        assert!((m.damping_estimate - 0.2).abs() < 0.02, "{}", m.damping_estimate);
    }

    #[test]
    fn short_series_rejected() {
        let omega = 1.0;
        let t = linspace(2.0 * 2.0 * PI, 100);
        let v = cos4(omega, &t);
        assert!(matches!(
            regime_metrics(&t, &v, omega),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn plateau_detected_between_ramps() {
        let omega = 0.05;
        let t = time_grid(omega, 3.0, 2000).unwrap();
        let v: Vec<f64> = t
            .iter()
            .map(|&t| {
                if t < 100.0 {
                    1.0 - t / 200.0
                } else if t < 250.0 {
                    0.5
                } else {
                    0.5 - (t - 250.0) / 200.0
                }
            })
            .map(|x: f64| x.clamp(0.0, 1.0))
            .collect();
        let m = regime_metrics(&t, &v, omega).unwrap();
        assert_eq!(m.plateau_intervals.len(), 1);
        let (a, b) = m.plateau_intervals[0];
        assert!((a - 100.0).abs() < 1.0 && (b - 250.0).abs() < 1.0, "{a} {b}");
    }

    #[test]
    fn time_validation() {
        assert!(check_times(&[0.0, 1.0, 0.5]).is_err());
        assert!(check_times(&[-1.0, 0.0]).is_err());
        assert!(time_grid(0.0, 3.0, 10).is_err());
    }

    #[test]
    fn state_inner_checks_basis() {
        let a = StateVector::basis_state(3, 0, "x");
        let b = StateVector::basis_state(3, 0, "y");
        assert!(a.inner(&b).is_err());
        assert_eq!(a.inner(&a).unwrap(), Complex64::new(1.0, 0.0));
    }
}
