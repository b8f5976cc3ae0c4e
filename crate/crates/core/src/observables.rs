//! Fidelity, reduced density matrices and Von Neumann entropy.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::dynamics::StateVector;
use crate::manybody::{CompositeBasis, SpeciesBasis};
use crate::units::Species;
use crate::{Error, Result};

/// Eigenvalues at or below this are dropped from the entropy sum.
pub const EIGEN_CLIP: f64 = 1e-14;
pub const TRACE_TOLERANCE: f64 = 1e-12;

/// |⟨ψ|φ⟩|, clamped to [0, 1].
pub fn fidelity(psi: &StateVector, phi: &StateVector) -> Result<f64> {
    Ok(psi.inner(phi)?.norm().min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    Bosons,
    Fermions,
    SingleParticle(Species),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub matrix: DMatrix<Complex64>,
    pub subsystem: Subsystem,
}

impl DensityMatrix {
    pub fn new(matrix: DMatrix<Complex64>, subsystem: Subsystem) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::invalid("density matrix must be square"));
        }
        Ok(Self { matrix, subsystem })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let mut v: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Partial trace of a pure composite state onto one species.
pub fn reduce(psi: &StateVector, basis: &CompositeBasis, keep: Species) -> Result<DensityMatrix> {
    if psi.basis_tag != basis.tag() || psi.dim() != basis.dim() {
        return Err(Error::invalid("state does not belong to this basis"));
    }
    let m = psi.as_matrix(basis.bosons.dim(), basis.fermions.dim());
    Ok(match keep {
        Species::Boson => DensityMatrix {
            matrix: &m * m.adjoint(),
            subsystem: Subsystem::Bosons,
        },
        Species::Fermion => DensityMatrix {
            matrix: (m.adjoint() * &m).transpose(),
            subsystem: Subsystem::Fermions,
        },
    })
}

/// -Σ λ log₂ λ over eigenvalues above the clip.
pub fn vn_entropy(rho: &DensityMatrix) -> Result<f64> {
    let tr = rho.trace();
    if (tr - 1.0).abs() > TRACE_TOLERANCE * rho.dim() as f64 {
        return Err(Error::invalid(format!("density matrix has trace {tr}")));
    }
    Ok(rho
        .eigenvalues()
        .into_iter()
        .filter(|&l| l > EIGEN_CLIP)
        .map(|l| -l * l.log2())
        .sum::<f64>()
        .max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeciesEntropies {
    pub bosons: f64,
    pub fermions: f64,
}

pub fn species_entropies(psi: &StateVector, basis: &CompositeBasis) -> Result<SpeciesEntropies> {
    Ok(SpeciesEntropies {
        bosons: vn_entropy(&reduce(psi, basis, Species::Boson)?)?,
        fermions: vn_entropy(&reduce(psi, basis, Species::Fermion)?)?,
    })
}

/// One-particle density matrix of `species` over the modes {L, R}, traced over
/// spin and the other species, normalized to unit trace.
pub fn single_particle_density(
    psi: &StateVector,
    basis: &CompositeBasis,
    species: Species,
) -> Result<DensityMatrix> {
    let rho = reduce(psi, basis, species)?;
    let own: &SpeciesBasis = basis.species(species);
    let d = own.one_body_transition_matrix();
    // ρ_ab = ⟨a†_b a_a⟩ / 2 = Tr(ρ D[b][a]) / 2
    let m = DMatrix::from_fn(2, 2, |a, b| {
        let op = d[b][a].map(|x| Complex64::new(x, 0.0));
        (&rho.matrix * op).trace() * 0.5
    });
    DensityMatrix::new(m, Subsystem::SingleParticle(species))
}

/// Entropy of the mode occupation of a single particle of `species`.
pub fn single_particle_entropy(psi: &StateVector, basis: &CompositeBasis, species: Species) -> Result<f64> {
    vn_entropy(&single_particle_density(psi, basis, species)?)
}

/// ρ = |v⟩⟨v| for a normalized vector.
pub fn pure(v: &DVector<Complex64>, subsystem: Subsystem) -> DensityMatrix {
    DensityMatrix {
        matrix: v * v.adjoint(),
        subsystem,
    }
}
