//! Everything that does not depend on the couplings, built once.

use std::sync::Arc;

use crate::dynamics::{initial_state_rr, return_series, time_grid, StateVector, TimeSeries};
use crate::manybody::{
    ground_state, Antisymmetric, CompositeBasis, CouplingParams, FermionScheme, GroundState,
    HamiltonianTerms, ManyBodyHamiltonian,
};
use crate::potential::{DoubleSquareWell, Grid, Potential};
use crate::spsolver::{solve_modes, DoubletModes};
use crate::twomode::{cross_species_tensor, overlap_tensor, OverlapTensor};
use crate::units::{Species, SpeciesConstants};
use crate::{Error, Result};

/// Smallest accepted (E₂ - E_a)/Ω₁.
pub const DEFAULT_MIN_GAP_RATIO: f64 = 10.0;

/// Inputs of a model build.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub potential: Arc<dyn Potential>,
    pub grid: Grid,
    pub species: SpeciesConstants,
    pub fermion_scheme: Arc<dyn FermionScheme>,
    pub sector: i32,
    pub min_gap_ratio: f64,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            potential: Arc::new(DoubleSquareWell::default()),
            grid: Grid::default(),
            species: SpeciesConstants::ytterbium(),
            fermion_scheme: Arc::new(Antisymmetric),
            sector: 0,
            min_gap_ratio: DEFAULT_MIN_GAP_RATIO,
        }
    }
}

/// Modes, tensors, basis and coupling-independent Hamiltonian terms.
#[derive(Debug, Clone)]
pub struct Model {
    pub grid: Grid,
    pub modes_b: DoubletModes,
    pub modes_f: DoubletModes,
    pub u_b: OverlapTensor,
    pub u_f: OverlapTensor,
    pub u_bf: OverlapTensor,
    pub basis: CompositeBasis,
    pub terms: HamiltonianTerms,
}

fn check_gap(m: &DoubletModes, min_ratio: f64) -> Result<()> {
    let r = m.gap_ratio();
    if !(r >= min_ratio) {
        return Err(Error::validity(format!(
            "{} gap ratio (E2 - E_a)/Omega_1 = {r:.3} is below {min_ratio}; \
             the next level is too close for a two-mode truncation",
            m.species
        )));
    }
    Ok(())
}

impl Model {
    pub fn build(spec: &ModelSpec) -> Result<Self> {
        let grid = spec.grid;
        let pot = spec.potential.as_ref();
        let (mb, mf) = rayon::join(
            || solve_modes(pot, &grid, spec.species.kinetic_prefactor_boson, Species::Boson),
            || {
                solve_modes(
                    pot,
                    &grid,
                    spec.species.kinetic_prefactor_fermion,
                    Species::Fermion,
                )
            },
        );
        let (mb, mf) = (mb?, mf?);
        check_gap(&mb, spec.min_gap_ratio)?;
        check_gap(&mf, spec.min_gap_ratio)?;
        let basis = CompositeBasis::new(spec.fermion_scheme.as_ref(), spec.sector)?;
        Self::from_modes(mb, mf, basis)
    }

    /// Assemble from already solved modes, skipping validity checks.
    pub fn from_modes(modes_b: DoubletModes, modes_f: DoubletModes, basis: CompositeBasis) -> Result<Self> {
        let grid = modes_b.grid;
        let u_b = overlap_tensor(&modes_b, &grid)?;
        let u_f = overlap_tensor(&modes_f, &grid)?;
        let u_bf = cross_species_tensor(&modes_b, &modes_f, &grid)?;
        let terms = HamiltonianTerms::new(&modes_b, &modes_f, &u_b, &u_f, &u_bf, &basis)?;
        Ok(Self {
            grid,
            modes_b,
            modes_f,
            u_b,
            u_f,
            u_bf,
            basis,
            terms,
        })
    }

    /// The same model with ψ_a → -ψ_a for both species.
    pub fn with_flipped_antisymmetric(&self) -> Result<Self> {
        Self::from_modes(
            self.modes_b.with_flipped_antisymmetric(),
            self.modes_f.with_flipped_antisymmetric(),
            self.basis.clone(),
        )
    }

    pub fn modes(&self, species: Species) -> &DoubletModes {
        match species {
            Species::Boson => &self.modes_b,
            Species::Fermion => &self.modes_f,
        }
    }

    pub fn omega(&self, species: Species) -> f64 {
        self.modes(species).bohr_frequency()
    }

    pub fn omega_min(&self) -> f64 {
        self.modes_b.bohr_frequency().min(self.modes_f.bohr_frequency())
    }

    /// `periods` cycles of the slower species.
    pub fn default_times(&self, periods: f64, samples: usize) -> Result<Vec<f64>> {
        time_grid(self.omega_min(), periods, samples)
    }

    pub fn hamiltonian(&self, params: &CouplingParams) -> Result<ManyBodyHamiltonian> {
        self.terms.assemble(params)
    }

    pub fn ground_state(&self, params: &CouplingParams) -> Result<GroundState> {
        Ok(ground_state(&self.hamiltonian(params)?))
    }

    pub fn initial_state(&self) -> Result<StateVector> {
        initial_state_rr(&self.basis)
    }

    /// P_RR(τ) of both species starting from the both-right state.
    pub fn return_series(&self, params: &CouplingParams, times: &[f64]) -> Result<TimeSeries> {
        let h = self.hamiltonian(params)?;
        return_series(&h, &self.basis, &self.initial_state()?, times)
    }
}
