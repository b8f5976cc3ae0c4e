//! Dimensionless unit system: lengths in µm, energies in ξ = 1e-31 J,
//! times in ħ/ξ.

use crate::{Error, Result};

/// Pinned physical constants (CODATA 2018, 10 significant digits).
pub mod constants {
    /// Reduced Planck constant, J s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Planck constant, J s (exact).
    pub const PLANCK: f64 = 6.626_070_150e-34;
    /// Unified atomic mass unit, kg.
    pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_067e-27;
    /// Yb-170 atomic mass, u.
    pub const YB170_MASS_U: f64 = 169.934_761_8;
    /// Yb-171 atomic mass, u.
    pub const YB171_MASS_U: f64 = 170.936_325_8;
}

/// Length unit in meters.
pub const LENGTH_UNIT_M: f64 = 1.0e-6;
/// Energy scale ξ in joules.
pub const ENERGY_SCALE_J: f64 = 1.0e-31;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    pub length_unit: f64,
    pub energy_scale_xi: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self {
            length_unit: LENGTH_UNIT_M,
            energy_scale_xi: ENERGY_SCALE_J,
        }
    }
}

impl UnitSystem {
    /// ħ/ξ in seconds.
    pub fn time_unit(&self) -> f64 {
        constants::HBAR / self.energy_scale_xi
    }

    pub fn to_dimensionless_energy(&self, joules: f64) -> Result<f64> {
        if !joules.is_finite() {
            return Err(Error::invalid(format!("energy must be finite, got {joules}")));
        }
        Ok(joules / self.energy_scale_xi)
    }

    /// ħ²/(2 m l² ξ): the coefficient of -d²/dx² in dimensionless units.
    pub fn kinetic_prefactor(&self, mass_kg: f64) -> Result<f64> {
        if !(mass_kg > 0.0) || !mass_kg.is_finite() {
            return Err(Error::invalid(format!("mass must be positive, got {mass_kg}")));
        }
        let l2 = self.length_unit * self.length_unit;
        Ok(constants::HBAR * constants::HBAR / (2.0 * mass_kg * l2 * self.energy_scale_xi))
    }
}

/// Energy in joules to units of ξ using the default unit system.
pub fn to_dimensionless_energy(joules: f64) -> Result<f64> {
    UnitSystem::default().to_dimensionless_energy(joules)
}

/// Kinetic prefactor for a particle of the given mass, default unit system.
pub fn kinetic_prefactor(mass_kg: f64) -> Result<f64> {
    UnitSystem::default().kinetic_prefactor(mass_kg)
}

/// Particle species of the mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Species {
    Boson,
    Fermion,
}

impl Species {
    pub fn as_str(self) -> &'static str {
        match self {
            Species::Boson => "boson",
            Species::Fermion => "fermion",
        }
    }
}

impl std::fmt::Display for Species {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Masses and kinetic prefactors of the two species.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeciesConstants {
    pub mass_boson: f64,
    pub mass_fermion: f64,
    pub kinetic_prefactor_boson: f64,
    pub kinetic_prefactor_fermion: f64,
}

impl SpeciesConstants {
    pub fn from_masses(mass_boson: f64, mass_fermion: f64) -> Result<Self> {
        let units = UnitSystem::default();
        Ok(Self {
            mass_boson,
            mass_fermion,
            kinetic_prefactor_boson: units.kinetic_prefactor(mass_boson)?,
            kinetic_prefactor_fermion: units.kinetic_prefactor(mass_fermion)?,
        })
    }

    pub fn kinetic_prefactor(&self, species: Species) -> f64 {
        match species {
            Species::Boson => self.kinetic_prefactor_boson,
            Species::Fermion => self.kinetic_prefactor_fermion,
        }
    }

    /// Yb-170 bosons and Yb-171 fermions.
    pub fn ytterbium() -> Self {
        Self::from_masses(
            constants::YB170_MASS_U * constants::ATOMIC_MASS_UNIT,
            constants::YB171_MASS_U * constants::ATOMIC_MASS_UNIT,
        )
        .expect("pinned masses are positive")
    }
}

impl Default for SpeciesConstants {
    fn default() -> Self {
        Self::ytterbium()
    }
}
