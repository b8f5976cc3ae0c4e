//! Two-boson and two-fermion bases in the L/R mode space, and the composite
//! Hamiltonian.
//!
//! Every two-particle state is stored in first quantization as an amplitude
//! matrix c[p][q] over single-particle orbitals, Ψ = Σ c_pq φ_p(1) φ_q(2) with
//! Σ|c|² = 1. Boson orbitals are the modes {L, R}; fermion orbitals are
//! L↑, L↓, R↑, R↓ in that order. Matrix elements of one-body operators and of
//! the contact interaction are then plain tensor contractions, which makes the
//! construction indifferent to the exchange symmetry of the chosen basis.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::dynamics::StateVector;
use crate::linalg::{symmetric_eigen, SortedEigen};
use crate::potential::Grid;
use crate::spsolver::DoubletModes;
use crate::twomode::{OverlapTensor, L, R};
use crate::units::Species;
use crate::{Error, Result};

/// Largest accepted |H - Hᵀ| entry.
pub const HERMITICITY_TOLERANCE: f64 = 1e-12;
/// Ground states closer than this to the first excited state are flagged.
pub const DEGENERACY_GAP: f64 = 1e-12;
/// Upper bound on each coupling.
pub const MAX_COUPLING: f64 = 0.1;
/// Couplings above this draw a warning.
pub const WARN_COUPLING: f64 = 1e-2;

/// One two-particle state.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoParticleState {
    pub label: String,
    /// Spatial configuration tag (`LL`, `RR`, `LR+`, `LR-`).
    pub spatial: &'static str,
    pub amplitudes: DMatrix<f64>,
}

/// Spin functions of two spin-½ particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpinPair {
    Singlet,
    Triplet0,
    UpUp,
    DownDown,
}

impl SpinPair {
    fn name(self) -> &'static str {
        match self {
            SpinPair::Singlet => "singlet",
            SpinPair::Triplet0 => "triplet0",
            SpinPair::UpUp => "up_up",
            SpinPair::DownDown => "down_down",
        }
    }

    fn amplitudes(self) -> [[f64; 2]; 2] {
        let h = FRAC_1_SQRT_2;
        match self {
            SpinPair::Singlet => [[0.0, h], [-h, 0.0]],
            SpinPair::Triplet0 => [[0.0, h], [h, 0.0]],
            SpinPair::UpUp => [[1.0, 0.0], [0.0, 0.0]],
            SpinPair::DownDown => [[0.0, 0.0], [0.0, 1.0]],
        }
    }
}

fn spatial_amplitudes(tag: &str) -> [[f64; 2]; 2] {
    let h = FRAC_1_SQRT_2;
    match tag {
        "LL" => [[1.0, 0.0], [0.0, 0.0]],
        "RR" => [[0.0, 0.0], [0.0, 1.0]],
        "LR+" => [[0.0, h], [h, 0.0]],
        "LR-" => [[0.0, h], [-h, 0.0]],
        _ => unreachable!("unknown spatial tag {tag}"),
    }
}

fn boson_state(label: &str, spatial: &'static str) -> TwoParticleState {
    let s = spatial_amplitudes(spatial);
    TwoParticleState {
        label: label.to_string(),
        spatial,
        amplitudes: DMatrix::from_fn(2, 2, |i, j| s[i][j]),
    }
}

/// Spatial part ⊗ spin part over orbitals 2·mode + spin.
pub fn fermion_state(spatial: &'static str, spin: SpinPair) -> TwoParticleState {
    let s = spatial_amplitudes(spatial);
    let x = spin.amplitudes();
    TwoParticleState {
        label: format!("{spatial}.{}", spin.name()),
        spatial,
        amplitudes: DMatrix::from_fn(4, 4, |p, q| s[p / 2][q / 2] * x[p % 2][q % 2]),
    }
}

/// Basis of one species' two-particle states.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesBasis {
    pub species: Species,
    pub scheme: String,
    pub sector: i32,
    /// Mode (L = 0, R = 1) of each orbital.
    pub orbital_modes: Vec<usize>,
    /// Spin of each orbital (0 = ↑, 1 = ↓); bosons carry a single value.
    pub orbital_spins: Vec<u8>,
    pub states: Vec<TwoParticleState>,
}

impl SpeciesBasis {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn labels(&self) -> Vec<String> {
        self.states.iter().map(|s| s.label.clone()).collect()
    }

    /// The state with both particles in the right mode.
    pub fn both_right_index(&self) -> Option<usize> {
        self.states.iter().position(|s| s.spatial == "RR")
    }

    /// Index of the state with both particles in the left mode.
    pub fn both_left_index(&self) -> Option<usize> {
        self.states.iter().position(|s| s.spatial == "LL")
    }

    fn n_orb(&self) -> usize {
        self.orbital_modes.len()
    }

    /// Matrix of Σ_i |a⟩⟨b|_i (spin-diagonal) between basis states,
    /// indexed [s', s].
    pub fn transfer(&self, a: usize, b: usize) -> DMatrix<f64> {
        let n = self.n_orb();
        let dim = self.dim();
        DMatrix::from_fn(dim, dim, |i, j| {
            let cp = &self.states[i].amplitudes;
            let c = &self.states[j].amplitudes;
            let mut sum = 0.0;
            for p in (0..n).filter(|&p| self.orbital_modes[p] == a) {
                for r in (0..n).filter(|&r| self.orbital_modes[r] == b) {
                    if self.orbital_spins[p] != self.orbital_spins[r] {
                        continue;
                    }
                    for q in 0..n {
                        sum += cp[(p, q)] * c[(r, q)] + cp[(q, p)] * c[(q, r)];
                    }
                }
            }
            sum
        })
    }

    /// D[a][b] = `transfer(a, b)` for all mode pairs.
    pub fn one_body_transition_matrix(&self) -> [[DMatrix<f64>; 2]; 2] {
        [
            [self.transfer(L, L), self.transfer(L, R)],
            [self.transfer(R, L), self.transfer(R, R)],
        ]
    }

    /// Matrix of the contact interaction δ(x₁ - x₂) with unit strength.
    pub fn contact(&self, u: &OverlapTensor) -> DMatrix<f64> {
        let n = self.n_orb();
        let m = &self.orbital_modes;
        let sp = &self.orbital_spins;
        let dim = self.dim();
        DMatrix::from_fn(dim, dim, |i, j| {
            let cp = &self.states[i].amplitudes;
            let c = &self.states[j].amplitudes;
            let mut sum = 0.0;
            for p in 0..n {
                for q in 0..n {
                    let w = cp[(p, q)];
                    if w == 0.0 {
                        continue;
                    }
                    for r in (0..n).filter(|&r| sp[r] == sp[p]) {
                        for t in (0..n).filter(|&t| sp[t] == sp[q]) {
                            sum += w * c[(r, t)] * u.get(m[p], m[q], m[r], m[t]);
                        }
                    }
                }
            }
            sum
        })
    }

    /// Representation of the L ↔ R reflection.
    pub fn mirror(&self) -> DMatrix<f64> {
        let n = self.n_orb();
        let image: Vec<usize> = (0..n)
            .map(|p| {
                (0..n)
                    .find(|&q| {
                        self.orbital_modes[q] == 1 - self.orbital_modes[p]
                            && self.orbital_spins[q] == self.orbital_spins[p]
                    })
                    .expect("orbital set is mirror symmetric")
            })
            .collect();
        let dim = self.dim();
        DMatrix::from_fn(dim, dim, |i, j| {
            let cp = &self.states[i].amplitudes;
            let c = &self.states[j].amplitudes;
            let mut sum = 0.0;
            for p in 0..n {
                for q in 0..n {
                    sum += cp[(image[p], image[q])] * c[(p, q)];
                }
            }
            sum
        })
    }

    /// Gram matrix of the stored amplitudes.
    pub fn gram(&self) -> DMatrix<f64> {
        let dim = self.dim();
        DMatrix::from_fn(dim, dim, |i, j| {
            self.states[i].amplitudes.dot(&self.states[j].amplitudes)
        })
    }
}

/// [LL, S = (LR+RL)/√2, RR].
pub fn boson_basis() -> SpeciesBasis {
    SpeciesBasis {
        species: Species::Boson,
        scheme: "symmetric".into(),
        sector: 0,
        orbital_modes: vec![L, R],
        orbital_spins: vec![0, 0],
        states: vec![
            boson_state("LL", "LL"),
            boson_state("S", "LR+"),
            boson_state("RR", "RR"),
        ],
    }
}

/// A way of building the two-fermion basis.
pub trait FermionScheme: fmt::Debug + Send + Sync {
    fn name(&self) -> &'static str;
    /// Spin sectors the scheme can build.
    fn sectors(&self) -> &'static [i32];
    fn states(&self, sector: i32) -> Result<Vec<TwoParticleState>>;
}

/// Totally antisymmetric states, split by S_z.
#[derive(Debug, Clone, Copy, Default)]
pub struct Antisymmetric;

impl FermionScheme for Antisymmetric {
    fn name(&self) -> &'static str {
        "antisymmetric"
    }

    fn sectors(&self) -> &'static [i32] {
        &[-1, 0, 1]
    }

    fn states(&self, sector: i32) -> Result<Vec<TwoParticleState>> {
        Ok(match sector {
            0 => vec![
                fermion_state("LL", SpinPair::Singlet),
                fermion_state("LR+", SpinPair::Singlet),
                fermion_state("RR", SpinPair::Singlet),
                fermion_state("LR-", SpinPair::Triplet0),
            ],
            1 => vec![fermion_state("LR-", SpinPair::UpUp)],
            -1 => vec![fermion_state("LR-", SpinPair::DownDown)],
            _ => {
                return Err(Error::config(format!(
                    "no S_z = {sector} sector for two spin-1/2 fermions"
                )))
            }
        })
    }
}

/// The literal four-state construction: antisymmetric space with singlet,
/// symmetric space with triplets. These states are exchange symmetric and mix
/// S_z; kept for comparison only.
#[derive(Debug, Clone, Copy, Default)]
pub struct PaperFourState;

impl FermionScheme for PaperFourState {
    fn name(&self) -> &'static str {
        "paper_four_state"
    }

    fn sectors(&self) -> &'static [i32] {
        &[0]
    }

    fn states(&self, sector: i32) -> Result<Vec<TwoParticleState>> {
        if sector != 0 {
            return Err(Error::config(
                "the paper_four_state basis has a single block; use sector 0",
            ));
        }
        Ok(vec![
            fermion_state("LR-", SpinPair::Singlet),
            fermion_state("LL", SpinPair::UpUp),
            fermion_state("LR+", SpinPair::Triplet0),
            fermion_state("RR", SpinPair::DownDown),
        ])
    }
}

/// Fermion basis schemes by name.
#[derive(Debug, Clone)]
pub struct FermionSchemeRegistry {
    schemes: BTreeMap<&'static str, Arc<dyn FermionScheme>>,
}

impl FermionSchemeRegistry {
    pub fn empty() -> Self {
        Self {
            schemes: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(Antisymmetric));
        r.register(Arc::new(PaperFourState));
        r
    }

    pub fn register(&mut self, scheme: Arc<dyn FermionScheme>) {
        self.schemes.insert(scheme.name(), scheme);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.schemes.keys().copied()
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn FermionScheme>> {
        self.schemes.get(name).cloned().ok_or_else(|| {
            Error::config(format!(
                "unknown fermion basis `{name}` (known: {})",
                self.names().collect::<Vec<_>>().join(", ")
            ))
        })
    }
}

impl Default for FermionSchemeRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

pub fn fermion_basis(scheme: &dyn FermionScheme, sector: i32) -> Result<SpeciesBasis> {
    Ok(SpeciesBasis {
        species: Species::Fermion,
        scheme: scheme.name().into(),
        sector,
        orbital_modes: vec![L, L, R, R],
        orbital_spins: vec![0, 1, 0, 1],
        states: scheme.states(sector)?,
    })
}

/// Boson basis ⊗ fermion basis, boson index major: k = i_B · n_F + i_F.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeBasis {
    pub bosons: SpeciesBasis,
    pub fermions: SpeciesBasis,
}

impl CompositeBasis {
    pub fn new(scheme: &dyn FermionScheme, sector: i32) -> Result<Self> {
        Ok(Self {
            bosons: boson_basis(),
            fermions: fermion_basis(scheme, sector)?,
        })
    }

    /// Default antisymmetric S_z = 0 basis.
    pub fn standard() -> Self {
        Self::new(&Antisymmetric, 0).expect("built-in sector")
    }

    pub fn dim(&self) -> usize {
        self.bosons.dim() * self.fermions.dim()
    }

    pub fn index(&self, ib: usize, i_f: usize) -> usize {
        ib * self.fermions.dim() + i_f
    }

    /// (boson index, fermion index) of composite index k.
    pub fn split(&self, k: usize) -> (usize, usize) {
        (k / self.fermions.dim(), k % self.fermions.dim())
    }

    pub fn labels(&self) -> Vec<String> {
        let mut out = Vec::with_capacity(self.dim());
        for b in &self.bosons.states {
            for f in &self.fermions.states {
                out.push(format!("{}|{}", b.label, f.label));
            }
        }
        out
    }

    /// Identifier carried by state vectors over this basis.
    pub fn tag(&self) -> String {
        format!("{}/sz={}", self.fermions.scheme, self.fermions.sector)
    }

    pub fn species(&self, species: Species) -> &SpeciesBasis {
        match species {
            Species::Boson => &self.bosons,
            Species::Fermion => &self.fermions,
        }
    }

    /// Composite L ↔ R reflection.
    pub fn mirror(&self) -> DMatrix<f64> {
        self.bosons.mirror().kronecker(&self.fermions.mirror())
    }
}

/// Repulsive contact couplings.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CouplingParams {
    pub lambda_bb: f64,
    pub lambda_ff: f64,
    pub lambda_bf: f64,
}

impl CouplingParams {
    pub fn new(lambda_bb: f64, lambda_ff: f64, lambda_bf: f64) -> Result<Self> {
        let p = Self {
            lambda_bb,
            lambda_ff,
            lambda_bf,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn uniform(lambda: f64) -> Result<Self> {
        Self::new(lambda, lambda, lambda)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.named() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::config(format!(
                    "{name} must be non-negative (repulsive), got {v}"
                )));
            }
            if v > MAX_COUPLING {
                return Err(Error::config(format!(
                    "{name} = {v} exceeds {MAX_COUPLING}; the two-mode model does not apply"
                )));
            }
            if v > WARN_COUPLING {
                log::warn!("{name} = {v} is above {WARN_COUPLING}; two-mode truncation may be poor");
            }
        }
        Ok(())
    }

    pub fn named(&self) -> [(&'static str, f64); 3] {
        [
            ("lambda_bb", self.lambda_bb),
            ("lambda_ff", self.lambda_ff),
            ("lambda_bf", self.lambda_bf),
        ]
    }
}

/// Coupling-independent pieces of the composite Hamiltonian:
/// H = one_body + λ_BB·bb + λ_FF·ff + λ_BF·bf.
#[derive(Debug, Clone)]
pub struct HamiltonianTerms {
    pub basis: CompositeBasis,
    pub grid: Grid,
    pub one_body: DMatrix<f64>,
    pub bb: DMatrix<f64>,
    pub ff: DMatrix<f64>,
    pub bf: DMatrix<f64>,
}

fn mode_hamiltonian(m: &DoubletModes) -> [[f64; 2]; 2] {
    let (e, j) = (m.onsite(), m.tunneling());
    [[e, -j], [-j, e]]
}

fn single_particle(basis: &SpeciesBasis, h: [[f64; 2]; 2]) -> DMatrix<f64> {
    let d = basis.one_body_transition_matrix();
    let mut out = DMatrix::zeros(basis.dim(), basis.dim());
    for a in 0..2 {
        for b in 0..2 {
            out += &d[a][b] * h[a][b];
        }
    }
    out
}

impl HamiltonianTerms {
    #[allow(clippy::needless_range_loop)]
    pub fn new(
        modes_b: &DoubletModes,
        modes_f: &DoubletModes,
        u_b: &OverlapTensor,
        u_f: &OverlapTensor,
        u_bf: &OverlapTensor,
        basis: &CompositeBasis,
    ) -> Result<Self> {
        let grid = modes_b.grid;
        if [modes_f.grid, u_b.grid, u_f.grid, u_bf.grid]
            .iter()
            .any(|g| *g != grid)
        {
            return Err(Error::invalid("modes and overlap tensors do not share one grid"));
        }
        if modes_b.species != Species::Boson || modes_f.species != Species::Fermion {
            return Err(Error::invalid("mode sets passed in the wrong species order"));
        }
        let ib = DMatrix::<f64>::identity(basis.bosons.dim(), basis.bosons.dim());
        let i_f = DMatrix::<f64>::identity(basis.fermions.dim(), basis.fermions.dim());

        let hb = single_particle(&basis.bosons, mode_hamiltonian(modes_b));
        let hf = single_particle(&basis.fermions, mode_hamiltonian(modes_f));
        let one_body = hb.kronecker(&i_f) + ib.kronecker(&hf);
        let bb = basis.bosons.contact(u_b).kronecker(&i_f);
        let ff = ib.kronecker(&basis.fermions.contact(u_f));

        let db = basis.bosons.one_body_transition_matrix();
        let df = basis.fermions.one_body_transition_matrix();
        let mut bf = DMatrix::zeros(basis.dim(), basis.dim());
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        let u = u_bf.get(a, b, c, d);
                        bf += db[a][b].kronecker(&df[c][d]) * u;
                    }
                }
            }
        }
        Ok(Self {
            basis: basis.clone(),
            grid,
            one_body,
            bb,
            ff,
            bf,
        })
    }

    pub fn assemble(&self, params: &CouplingParams) -> Result<ManyBodyHamiltonian> {
        params.validate()?;
        let matrix = &self.one_body
            + &self.bb * params.lambda_bb
            + &self.ff * params.lambda_ff
            + &self.bf * params.lambda_bf;
        let h = ManyBodyHamiltonian {
            matrix,
            params: *params,
            basis_tag: self.basis.tag(),
        };
        let res = h.hermiticity_residue();
        if res > HERMITICITY_TOLERANCE {
            return Err(Error::Internal(format!(
                "assembled Hamiltonian is not Hermitian (residue {res:.3e})"
            )));
        }
        Ok(h)
    }
}

/// Real symmetric composite Hamiltonian.
#[derive(Debug, Clone)]
pub struct ManyBodyHamiltonian {
    pub matrix: DMatrix<f64>,
    pub params: CouplingParams,
    pub basis_tag: String,
}

impl ManyBodyHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn hermiticity_residue(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    pub fn eigen(&self) -> SortedEigen {
        symmetric_eigen(&self.matrix)
    }

    /// ⟨ψ|H|ψ⟩.
    pub fn expectation(&self, psi: &StateVector) -> f64 {
        let h = self.matrix.map(|x| Complex64::new(x, 0.0));
        psi.coefficients.dotc(&(h * &psi.coefficients)).re
    }
}

/// Lowest eigenpair with its phase fixed.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: StateVector,
    /// E₁ - E₀.
    pub gap: f64,
    pub degenerate: bool,
}

/// Make the largest-magnitude entry positive; near-ties go to the lowest index.
pub fn fix_phase(v: &mut DVector<f64>) {
    let max = v.amax();
    if let Some(k) = v.iter().position(|x| x.abs() >= max - 1e-12) {
        if v[k] < 0.0 {
            v.neg_mut();
        }
    }
}

pub fn ground_state_from_eigen(eig: &SortedEigen, basis_tag: &str) -> GroundState {
    let mut v: DVector<f64> = eig.vectors.column(0).into_owned();
    fix_phase(&mut v);
    let gap = if eig.values.len() > 1 {
        eig.values[1] - eig.values[0]
    } else {
        f64::INFINITY
    };
    GroundState {
        energy: eig.values[0],
        state: StateVector::from_real(&v, basis_tag),
        gap,
        degenerate: gap < DEGENERACY_GAP,
    }
}

pub fn ground_state(h: &ManyBodyHamiltonian) -> GroundState {
    ground_state_from_eigen(&h.eigen(), &h.basis_tag)
}

/// Row-major CSV dump of H.
pub fn hamiltonian_csv(h: &ManyBodyHamiltonian) -> String {
    let mut s = String::new();
    for i in 0..h.dim() {
        let row: Vec<String> = (0..h.dim()).map(|j| h.matrix[(i, j)].to_string()).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::DoubleSquareWell;
    use crate::spsolver::solve_modes;
    use crate::twomode::{cross_species_tensor, overlap_tensor};
    use crate::units::SpeciesConstants;
    use std::f64::consts::SQRT_2;

    struct Fixture {
        mb: DoubletModes,
        mf: DoubletModes,
        ub: OverlapTensor,
        uf: OverlapTensor,
        ubf: OverlapTensor,
    }

    fn fixture() -> Fixture {
        let g = Grid::new(14.5, 801).unwrap();
        let w = DoubleSquareWell::default();
        let c = SpeciesConstants::ytterbium();
        let mb = solve_modes(&w, &g, c.kinetic_prefactor_boson, Species::Boson).unwrap();
        let mf = solve_modes(&w, &g, c.kinetic_prefactor_fermion, Species::Fermion).unwrap();
        let ub = overlap_tensor(&mb, &g).unwrap();
        let uf = overlap_tensor(&mf, &g).unwrap();
        let ubf = cross_species_tensor(&mb, &mf, &g).unwrap();
        Fixture { mb, mf, ub, uf, ubf }
    }

    fn terms(f: &Fixture, basis: &CompositeBasis) -> HamiltonianTerms {
        HamiltonianTerms::new(&f.mb, &f.mf, &f.ub, &f.uf, &f.ubf, basis).unwrap()
    }

    #[test]
    fn dimensions_and_labels() {
        let b = CompositeBasis::standard();
        assert_eq!(b.dim(), 12);
        assert_eq!(CompositeBasis::new(&Antisymmetric, 1).unwrap().dim(), 3);
        assert_eq!(CompositeBasis::new(&Antisymmetric, -1).unwrap().dim(), 3);
        assert!(CompositeBasis::new(&Antisymmetric, 2).is_err());
        let total: usize = [-1, 0, 1]
            .iter()
            .map(|&s| fermion_basis(&Antisymmetric, s).unwrap().dim())
            .sum();
        assert_eq!(total, 6);
        assert_eq!(boson_basis().labels(), ["LL", "S", "RR"]);
        assert_eq!(
            b.fermions.labels(),
            ["LL.singlet", "LR+.singlet", "RR.singlet", "LR-.triplet0"]
        );
        assert_eq!(b.labels()[0], "LL|LL.singlet");
        assert_eq!(b.labels()[11], "RR|LR-.triplet0");
        assert_eq!(
            CompositeBasis::new(&PaperFourState, 0).unwrap().fermions.labels(),
            ["LR-.singlet", "LL.up_up", "LR+.triplet0", "RR.down_down"]
        );
    }

    #[test]
    fn fermion_states_are_antisymmetric_and_orthonormal() {
        for sector in [-1, 0, 1] {
            let fb = fermion_basis(&Antisymmetric, sector).unwrap();
            for s in &fb.states {
                let c = &s.amplitudes;
                assert!((c + c.transpose()).amax() < 1e-15, "{}", s.label);
            }
            let g = fb.gram();
            assert!((g - DMatrix::identity(fb.dim(), fb.dim())).amax() < 1e-15);
        }
        let pb = fermion_basis(&PaperFourState, 0).unwrap();
        for s in &pb.states {
            let c = &s.amplitudes;
            assert!((c - c.transpose()).amax() < 1e-15, "{}", s.label);
        }
        let bb = boson_basis();
        assert!((bb.gram() - DMatrix::identity(3, 3)).amax() < 1e-15);
    }

    #[test]
    fn transfer_elements() {
        let b = boson_basis();
        let d = b.one_body_transition_matrix();
        assert!((d[L][R][(1, 2)] - SQRT_2).abs() < 1e-15);
        let f = fermion_basis(&Antisymmetric, 0).unwrap();
        let df = f.one_body_transition_matrix();
        // b†_R b_L takes LL·singlet to the mixed singlet
        assert!((df[R][L][(1, 0)] - SQRT_2).abs() < 1e-15);
        for basis in [&b, &f] {
            let d = basis.one_body_transition_matrix();
            let n = &d[L][L] + &d[R][R];
            for i in 0..basis.dim() {
                assert!((n[(i, i)] - 2.0).abs() < 1e-15);
            }
            assert!((&d[L][R] - d[R][L].transpose()).amax() < 1e-15);
        }
    }

    #[test]
    fn second_quantized_contact_elements() {
        let f = fixture();
        let b = boson_basis();
        let c = b.contact(&f.ub);
        // (1/2) Σ U ⟨LL|b†b†bb|LL⟩ = U_LLLL
        assert!((c[(0, 0)] - f.ub.get(L, L, L, L)).abs() < 1e-15);
        // ⟨LL|..|RR⟩ = U_LLRR
        assert!((c[(0, 2)] - f.ub.get(L, L, R, R)).abs() < 1e-15);
        // ⟨S|..|S⟩ = 2 U_LRLR
        assert!((c[(1, 1)] - 2.0 * f.ub.get(L, R, L, R)).abs() < 1e-15);

        let fb = fermion_basis(&Antisymmetric, 0).unwrap();
        let cf = fb.contact(&f.uf);
        assert!((cf[(0, 0)] - f.uf.get(L, L, L, L)).abs() < 1e-15);
        // triplet: antisymmetric space vanishes at contact
        assert!(cf.row(3).amax() < 1e-15 && cf.column(3).amax() < 1e-15);
        for s in [-1, 1] {
            let pol = fermion_basis(&Antisymmetric, s).unwrap();
            assert!(pol.contact(&f.uf).amax() < 1e-15);
        }
    }

    #[test]
    fn zero_coupling_spectrum() {
        let f = fixture();
        let basis = CompositeBasis::standard();
        let t = terms(&f, &basis);
        let h = t.assemble(&CouplingParams::default()).unwrap();
        let e = h.eigen().values;
        let ground = 2.0 * f.mb.energy_s + 2.0 * f.mf.energy_s;
        assert!((e[0] - ground).abs() < 1e-10);
        // boson pair: 2ε + {-2J, 0, 2J}; fermion pair S_z=0: 2ε + {-2J, 0, 0, 2J}
        let mut expect = Vec::new();
        for xb in [-2.0, 0.0, 2.0] {
            for xf in [-2.0, 0.0, 0.0, 2.0] {
                expect.push(
                    2.0 * f.mb.onsite() + xb * f.mb.tunneling() + 2.0 * f.mf.onsite() + xf * f.mf.tunneling(),
                );
            }
        }
        expect.sort_by(f64::total_cmp);
        for (a, b) in e.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-9);
        }
        let ib = basis.index(0, 0);
        let is = basis.index(1, 0);
        assert!((h.matrix[(ib, is)] + SQRT_2 * f.mb.tunneling()).abs() < 1e-15);
    }

    #[test]
    fn hamiltonian_invariants() {
        let f = fixture();
        let basis = CompositeBasis::standard();
        let t = terms(&f, &basis);
        let p = CouplingParams::new(9e-4, 3.2e-4, 9e-4).unwrap();
        let h = t.assemble(&p).unwrap();
        assert!(h.hermiticity_residue() < 1e-12);
        let m = basis.mirror();
        assert!((&m * &m - DMatrix::identity(12, 12)).amax() < 1e-14);
        assert!((&h.matrix * &m - &m * &h.matrix).amax() < 1e-10);
    }

    #[test]
    fn sign_flip_of_antisymmetric_state_keeps_spectrum() {
        let f = fixture();
        let basis = CompositeBasis::standard();
        let fb = f.mb.with_flipped_antisymmetric();
        let ff = f.mf.with_flipped_antisymmetric();
        let g = f.mb.grid;
        let flipped = HamiltonianTerms::new(
            &fb,
            &ff,
            &overlap_tensor(&fb, &g).unwrap(),
            &overlap_tensor(&ff, &g).unwrap(),
            &cross_species_tensor(&fb, &ff, &g).unwrap(),
            &basis,
        )
        .unwrap();
        let p = CouplingParams::new(1e-3, 1e-3, 9e-3).unwrap();
        let a = terms(&f, &basis).assemble(&p).unwrap().eigen().values;
        let b = flipped.assemble(&p).unwrap().eigen().values;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn ground_energy_grows_with_each_coupling() {
        let f = fixture();
        let t = terms(&f, &CompositeBasis::standard());
        for axis in 0..3 {
            let mut last = f64::NEG_INFINITY;
            for k in 0..=20 {
                let mut l = [5e-4; 3];
                l[axis] = k as f64 * 1e-4;
                let e = ground_state(
                    &t.assemble(&CouplingParams::new(l[0], l[1], l[2]).unwrap())
                        .unwrap(),
                )
                .energy;
                assert!(e >= last - 1e-15, "axis {axis} step {k}");
                last = e;
            }
        }
    }

    #[test]
    fn polarized_sector_ignores_fermion_contact() {
        let f = fixture();
        for sector in [-1, 1] {
            let basis = CompositeBasis::new(&Antisymmetric, sector).unwrap();
            let t = terms(&f, &basis);
            let a = t
                .assemble(&CouplingParams::new(1e-3, 0.0, 1e-3).unwrap())
                .unwrap()
                .eigen()
                .values;
            let b = t
                .assemble(&CouplingParams::new(1e-3, 0.1, 1e-3).unwrap())
                .unwrap()
                .eigen()
                .values;
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-15);
            }
        }
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn zero_coupling_ground_state_is_a_product() {
        let f = fixture();
        let basis = CompositeBasis::standard();
        let gs = ground_state(&terms(&f, &basis).assemble(&CouplingParams::default()).unwrap());
        assert!(!gs.degenerate);
        // boson ground: (LL + √2 S + RR)/2; fermion ground: (LL + √2 LR+ + RR)/2 singlet
        let b = [0.5, FRAC_1_SQRT_2, 0.5];
        let fe = [0.5, FRAC_1_SQRT_2, 0.5, 0.0];
        for ib in 0..3 {
            for i_f in 0..4 {
                let c = gs.state.coefficients[basis.index(ib, i_f)];
                assert!((c.re - b[ib] * fe[i_f]).abs() < 1e-10 && c.im == 0.0);
            }
        }
    }

    #[test]
    fn coupling_validation() {
        assert!(CouplingParams::new(-1.0, 0.0, 0.0).is_err());
        assert!(CouplingParams::new(0.0, f64::NAN, 0.0).is_err());
        assert!(CouplingParams::new(0.0, 0.0, 0.2).is_err());
        assert!(CouplingParams::new(0.05, 0.0, 0.0).is_ok());
    }

    #[test]
    fn phase_fixing() {
        let mut v = DVector::from_vec(vec![0.3, -0.8, 0.1]);
        fix_phase(&mut v);
        assert_eq!(v[1], 0.8);
        let mut tie = DVector::from_vec(vec![-0.5, 0.5]);
        fix_phase(&mut tie);
        assert_eq!(tie[0], 0.5);
    }

    #[test]
    fn registry() {
        let r = FermionSchemeRegistry::with_builtins();
        assert_eq!(
            r.names().collect::<Vec<_>>(),
            ["antisymmetric", "paper_four_state"]
        );
        assert!(matches!(r.get("nope"), Err(Error::Config(_))));
        let literal = r.get("paper_four_state").unwrap();
        let basis = CompositeBasis::new(literal.as_ref(), 0).unwrap();
        assert_eq!(basis.fermions.both_right_index(), Some(3));
        assert_eq!(basis.tag(), "paper_four_state/sz=0");
    }
}
