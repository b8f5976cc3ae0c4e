//! Single-particle finite-difference solver and the tunneling doublet.
//!
//! The Hamiltonian -κ d²/dx² + V(x) is discretized with the three-point
//! stencil on the interior nodes of the grid; the wave function vanishes on the
//! two boundary nodes (hard walls). The lowest four states are computed: the
//! symmetric/antisymmetric doublet and two guard states used to measure the
//! gap that justifies the two-mode truncation.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;

use crate::linalg::SymTridiagonal;
use crate::potential::{sample_on_grid, Grid, Potential};
use crate::quadrature::Quadrature;
use crate::units::Species;
use crate::{Error, Result};

/// Largest reflection residue ‖ψ ∓ Rψ‖ accepted for a parity eigenstate.
pub const PARITY_TOLERANCE: f64 = 1e-6;
/// Minimum probability of the right mode on x > 0.
pub const LOCALIZATION_THRESHOLD: f64 = 0.9;

/// Finite-difference Hamiltonian on the interior nodes 1..n-1.
pub fn build_sp_hamiltonian(
    grid: &Grid,
    potential_samples: &[f64],
    kinetic_prefactor: f64,
) -> Result<SymTridiagonal> {
    let n = grid.n_points();
    if potential_samples.len() != n {
        return Err(Error::invalid(format!(
            "potential has {} samples but the grid has {n} nodes",
            potential_samples.len()
        )));
    }
    if !(kinetic_prefactor > 0.0) {
        return Err(Error::invalid(format!(
            "kinetic prefactor must be positive, got {kinetic_prefactor}"
        )));
    }
    let h = grid.spacing();
    let t = kinetic_prefactor / (h * h);
    let diag = potential_samples[1..n - 1].iter().map(|v| 2.0 * t + v).collect();
    let off = vec![-t; n - 3];
    SymTridiagonal::new(diag, off)
}

/// The lowest even/odd pair on the full grid, normalized under Simpson
/// quadrature, with sign conventions ψ_s(0) > 0 and ψ_a'(0) < 0.
#[derive(Debug, Clone)]
pub struct Doublet {
    pub grid: Grid,
    pub species: Species,
    pub psi_s: Vec<f64>,
    pub psi_a: Vec<f64>,
    pub energy_s: f64,
    pub energy_a: f64,
    /// Third and fourth eigenvalues.
    pub guard_energies: [f64; 2],
    /// Largest ‖Hψ - Eψ‖ over the doublet (unit-norm vectors).
    pub eigen_residual: f64,
}

impl Doublet {
    pub fn bohr_frequency(&self) -> f64 {
        self.energy_a - self.energy_s
    }

    /// (E₂ - E_a)/Ω₁.
    pub fn gap_ratio(&self) -> f64 {
        (self.guard_energies[0] - self.energy_a) / self.bohr_frequency()
    }
}

fn reflect(v: &[f64]) -> Vec<f64> {
    v.iter().rev().copied().collect()
}

fn norm2(v: impl Iterator<Item = f64>) -> f64 {
    v.map(|x| x * x).sum::<f64>().sqrt()
}

/// Lowest two eigenpairs of `h`, classified by parity.
pub fn lowest_doublet(h: &SymTridiagonal, grid: &Grid, species: Species) -> Result<Doublet> {
    let n = grid.n_points();
    if h.dim() + 2 != n {
        return Err(Error::invalid(format!(
            "Hamiltonian of dimension {} does not match a grid of {n} nodes",
            h.dim()
        )));
    }
    let pairs = h.lowest_eigenpairs(4)?;
    let embed = |v: &[f64]| {
        let mut full = vec![0.0; n];
        full[1..n - 1].copy_from_slice(v);
        full
    };

    let mut classified = Vec::with_capacity(2);
    for (k, (_, v)) in pairs.iter().take(2).enumerate() {
        let full = embed(v);
        let r = reflect(&full);
        let even = norm2(full.iter().zip(&r).map(|(a, b)| a - b));
        let odd = norm2(full.iter().zip(&r).map(|(a, b)| a + b));
        let parity = if even < PARITY_TOLERANCE {
            1.0
        } else if odd < PARITY_TOLERANCE {
            -1.0
        } else {
            return Err(Error::Solver(format!(
                "state {k} has no definite parity (even residue {even:.3e}, odd residue {odd:.3e}); \
                 the doublet is unresolved or the potential is not even"
            )));
        };
        // exact projection onto the parity sector
        let proj: Vec<f64> = full.iter().zip(&r).map(|(a, b)| 0.5 * (a + parity * b)).collect();
        classified.push((parity, proj));
    }
    if classified[0].0 < 0.0 || classified[1].0 > 0.0 {
        return Err(Error::Solver(format!(
            "expected even ground state and odd first excited state, got parities {:+} and {:+}",
            classified[0].0, classified[1].0
        )));
    }

    let quad = Quadrature::new(n, grid.spacing());
    let normalize = |v: &mut Vec<f64>| -> Result<()> {
        let nn = quad.inner(v, v).sqrt();
        if !(nn > 0.0) {
            return Err(Error::Solver("zero eigenvector".into()));
        }
        v.iter_mut().for_each(|x| *x /= nn);
        Ok(())
    };
    let mut psi_s = classified[0].1.clone();
    let mut psi_a = classified[1].1.clone();
    normalize(&mut psi_s)?;
    normalize(&mut psi_a)?;
    let c = grid.center();
    if psi_s[c] == 0.0 {
        return Err(Error::Solver("symmetric state vanishes at the origin".into()));
    }
    if psi_s[c] < 0.0 {
        psi_s.iter_mut().for_each(|x| *x = -*x);
    }
    if psi_a[c + 1] > 0.0 {
        psi_a.iter_mut().for_each(|x| *x = -*x);
    }

    let rayleigh = |full: &[f64]| {
        let v = &full[1..n - 1];
        let hv = h.apply(v);
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let e = hv.iter().zip(v).map(|(a, b)| a * b).sum::<f64>() / vv;
        let res = norm2(hv.iter().zip(v).map(|(a, b)| a - e * b)) / vv.sqrt();
        (e, res)
    };
    let (energy_s, res_s) = rayleigh(&psi_s);
    let (energy_a, res_a) = rayleigh(&psi_a);
    if !(energy_a > energy_s) {
        return Err(Error::Solver(format!(
            "doublet not resolved: E_s = {energy_s:.17e}, E_a = {energy_a:.17e}"
        )));
    }
    Ok(Doublet {
        grid: *grid,
        species,
        psi_s,
        psi_a,
        energy_s,
        energy_a,
        guard_energies: [pairs[2].0, pairs[3].0],
        eigen_residual: res_s.max(res_a),
    })
}

/// Doublet plus left/right localized modes.
#[derive(Debug, Clone)]
pub struct DoubletModes {
    pub grid: Grid,
    pub species: Species,
    pub psi_s: Vec<f64>,
    pub psi_a: Vec<f64>,
    pub energy_s: f64,
    pub energy_a: f64,
    pub guard_energies: [f64; 2],
    pub eigen_residual: f64,
    /// (ψ_s + ψ_a)/√2
    pub psi_l: Vec<f64>,
    /// (ψ_s - ψ_a)/√2
    pub psi_r: Vec<f64>,
}

impl DoubletModes {
    fn from_parts(d: Doublet) -> Self {
        let (psi_l, psi_r) = rotate(&d.psi_s, &d.psi_a);
        Self {
            grid: d.grid,
            species: d.species,
            psi_s: d.psi_s,
            psi_a: d.psi_a,
            energy_s: d.energy_s,
            energy_a: d.energy_a,
            guard_energies: d.guard_energies,
            eigen_residual: d.eigen_residual,
            psi_l,
            psi_r,
        }
    }

    /// Ω₁ = E_a - E_s.
    pub fn bohr_frequency(&self) -> f64 {
        self.energy_a - self.energy_s
    }

    /// Mode energy ε = (E_s + E_a)/2.
    pub fn onsite(&self) -> f64 {
        0.5 * (self.energy_s + self.energy_a)
    }

    /// Tunneling amplitude J = (E_a - E_s)/2.
    pub fn tunneling(&self) -> f64 {
        0.5 * (self.energy_a - self.energy_s)
    }

    /// (E₂ - E_a)/Ω₁.
    pub fn gap_ratio(&self) -> f64 {
        (self.guard_energies[0] - self.energy_a) / self.bohr_frequency()
    }

    /// ∫_{x>0} |ψ_R|².
    pub fn right_mass(&self) -> f64 {
        half_line_mass(&self.grid, &self.psi_r)
    }

    /// `[ψ_L, ψ_R]`, indexed by mode.
    pub fn modes(&self) -> [&[f64]; 2] {
        [&self.psi_l, &self.psi_r]
    }

    /// The same doublet with ψ_a → -ψ_a, as an eigensolver could have
    /// returned it. ψ_L and ψ_R trade places; no validation is applied.
    pub fn with_flipped_antisymmetric(&self) -> Self {
        let mut out = self.clone();
        out.psi_a.iter_mut().for_each(|x| *x = -*x);
        let (l, r) = rotate(&out.psi_s, &out.psi_a);
        out.psi_l = l;
        out.psi_r = r;
        out
    }

    /// CSV with header `x_um,psi_s,psi_a,psi_L,psi_R`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x_um,psi_s,psi_a,psi_L,psi_R\n");
        for i in 0..self.grid.n_points() {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                self.grid.x(i),
                self.psi_s[i],
                self.psi_a[i],
                self.psi_l[i],
                self.psi_r[i]
            );
        }
        s
    }
}

fn rotate(s: &[f64], a: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let l = s.iter().zip(a).map(|(s, a)| FRAC_1_SQRT_2 * (s + a)).collect();
    let r = s.iter().zip(a).map(|(s, a)| FRAC_1_SQRT_2 * (s - a)).collect();
    (l, r)
}

/// ∫_{x≥0} f² over the right half of the grid.
pub fn half_line_mass(grid: &Grid, f: &[f64]) -> f64 {
    let c = grid.center();
    let half: Vec<f64> = f[c..].iter().map(|x| x * x).collect();
    Quadrature::new(half.len(), grid.spacing()).integrate(&half)
}

/// Rotate the doublet into localized modes and check that ψ_R lives on x > 0.
pub fn localize(doublet: Doublet) -> Result<DoubletModes> {
    let modes = DoubletModes::from_parts(doublet);
    let mass = modes.right_mass();
    if !(mass > LOCALIZATION_THRESHOLD) {
        return Err(Error::validity(format!(
            "{} right mode carries only {mass:.4} of its probability on x > 0 \
             (need > {LOCALIZATION_THRESHOLD}); barrier too low for a two-mode treatment",
            modes.species
        )));
    }
    Ok(modes)
}

/// Sample, build, solve and localize in one step.
pub fn solve_modes(
    potential: &dyn Potential,
    grid: &Grid,
    kinetic_prefactor: f64,
    species: Species,
) -> Result<DoubletModes> {
    let samples = sample_on_grid(potential, grid)?;
    let h = build_sp_hamiltonian(grid, &samples, kinetic_prefactor)?;
    localize(lowest_doublet(&h, grid, species)?)
}
