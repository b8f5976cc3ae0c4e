//! Four-mode contact overlaps U[a,b,c,d] = ∫ φ_a φ_b φ_c φ_d dx.

use crate::potential::Grid;
use crate::quadrature::Quadrature;
use crate::spsolver::DoubletModes;
use crate::{Error, Result};

/// Mode index: 0 = L, 1 = R.
pub const L: usize = 0;
pub const R: usize = 1;

const NORM_TOLERANCE: f64 = 1e-8;

/// All 16 entries of an overlap tensor, stored flat with index
/// `8a + 4b + 2c + d`.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapTensor {
    /// Grid the modes were sampled on.
    pub grid: Grid,
    entries: [f64; 16],
    /// Largest change of an entry between Simpson and the trapezoid rule on
    /// the same nodes; a loose upper bound on the quadrature error.
    pub quadrature_error_estimate: f64,
}

impl OverlapTensor {
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.entries[8 * a + 4 * b + 2 * c + d]
    }

    pub fn entries(&self) -> &[f64; 16] {
        &self.entries
    }

    /// Five symmetry-distinct values of an intra-species tensor, keyed by the
    /// number of R indices: LLLL, LLLR, LLRR, LRRR, RRRR.
    pub fn distinct_intra(&self) -> [(&'static str, f64); 5] {
        [
            ("LLLL", self.get(L, L, L, L)),
            ("LLLR", self.get(L, L, L, R)),
            ("LLRR", self.get(L, L, R, R)),
            ("LRRR", self.get(L, R, R, R)),
            ("RRRR", self.get(R, R, R, R)),
        ]
    }

    /// Nine distinct values of a cross-species tensor: boson pair (ab) with
    /// a ≤ b times fermion pair (cd) with c ≤ d.
    pub fn distinct_cross(&self) -> Vec<(String, f64)> {
        let pairs = [(L, L), (L, R), (R, R)];
        let name = |i: usize| if i == L { 'L' } else { 'R' };
        let mut out = Vec::with_capacity(9);
        for &(a, b) in &pairs {
            for &(c, d) in &pairs {
                let label: String = [name(a), name(b), name(c), name(d)].iter().collect();
                out.push((label, self.get(a, b, c, d)));
            }
        }
        out
    }
}

fn check_normalized(quad: &Quadrature, modes: [&[f64]; 2], what: &str) -> Result<()> {
    for (k, m) in modes.iter().enumerate() {
        let n = quad.inner(m, m);
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::invalid(format!(
                "{what} mode {} is not normalized (norm² = {n:.12})",
                ["L", "R"][k]
            )));
        }
    }
    Ok(())
}

fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    h * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1]))
}

/// Tensor from explicit mode functions: indices a, b run over `first`,
/// c, d over `second`. Intra-species tensors pass the same modes twice.
pub fn tensor_from_modes(grid: &Grid, first: [&[f64]; 2], second: [&[f64]; 2]) -> Result<OverlapTensor> {
    let n = grid.n_points();
    for m in first.iter().chain(second.iter()) {
        if m.len() != n {
            return Err(Error::invalid(format!(
                "mode has {} samples but the grid has {n} nodes",
                m.len()
            )));
        }
    }
    let h = grid.spacing();
    let quad = Quadrature::new(n, h);
    check_normalized(&quad, first, "first")?;
    check_normalized(&quad, second, "second")?;

    let mut entries = [0.0; 16];
    let mut err: f64 = 0.0;
    let mut integrand = vec![0.0; n];
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    for i in 0..n {
                        integrand[i] = first[a][i] * first[b][i] * second[c][i] * second[d][i];
                    }
                    let s = quad.integrate(&integrand);
                    err = err.max((s - trapezoid(&integrand, h)).abs());
                    entries[8 * a + 4 * b + 2 * c + d] = s;
                }
            }
        }
    }
    Ok(OverlapTensor {
        grid: *grid,
        entries,
        quadrature_error_estimate: err,
    })
}

/// U[a,b,c,d] for one species.
pub fn overlap_tensor(modes: &DoubletModes, grid: &Grid) -> Result<OverlapTensor> {
    if modes.grid != *grid {
        return Err(Error::invalid("modes were computed on a different grid"));
    }
    tensor_from_modes(grid, modes.modes(), modes.modes())
}

/// U^BF[a,b,c,d] = ∫ φ^B_a φ^B_b φ^F_c φ^F_d.
pub fn cross_species_tensor(
    modes_b: &DoubletModes,
    modes_f: &DoubletModes,
    grid: &Grid,
) -> Result<OverlapTensor> {
    if modes_b.grid != *grid || modes_f.grid != *grid {
        return Err(Error::invalid(
            "boson and fermion modes must be computed on the same grid",
        ));
    }
    tensor_from_modes(grid, modes_b.modes(), modes_f.modes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::DoubleSquareWell;
    use crate::spsolver::solve_modes;
    use crate::units::{Species, SpeciesConstants};

    fn modes(species: Species, grid: &Grid) -> DoubletModes {
        let k = SpeciesConstants::ytterbium().kinetic_prefactor(species);
        solve_modes(&DoubleSquareWell::default(), grid, k, species).unwrap()
    }

    #[test]
    fn gaussian_oracle() {
        let grid = Grid::new(10.0, 2001).unwrap();
        let sigma = 0.8;
        // |g|² is a normal density of width σ
        let norm = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25);
        let g: Vec<f64> = grid
            .points()
            .iter()
            .map(|x| norm * (-x * x / (4.0 * sigma * sigma)).exp())
            .collect();
        let t = tensor_from_modes(&grid, [&g, &g], [&g, &g]).unwrap();
        let exact = 1.0 / (2.0 * sigma * std::f64::consts::PI.sqrt());
        for v in t.entries() {
            assert!((v - exact).abs() < 1e-10, "{v} vs {exact}");
        }
    }

    #[test]
    fn symmetric_and_parity_invariant() {
        let grid = Grid::default();
        let t = overlap_tensor(&modes(Species::Boson, &grid), &grid).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        let v = t.get(a, b, c, d);
                        for p in [
                            t.get(b, a, c, d),
                            t.get(c, b, a, d),
                            t.get(d, b, c, a),
                            t.get(a, c, b, d),
                            t.get(a, d, c, b),
                        ] {
                            assert!((v - p).abs() < 1e-15);
                        }
                        let mirrored = t.get(1 - a, 1 - b, 1 - c, 1 - d);
                        assert!((v - mirrored).abs() < 1e-10);
                    }
                }
            }
        }
        assert!((t.get(L, R, L, R) - t.get(R, L, L, R)).abs() < 1e-15);
        assert!(t.get(L, L, L, L) > 0.0);
        assert!(t.get(L, L, L, R).abs() < 0.1 * t.get(L, L, L, L));
        assert!(t.quadrature_error_estimate < 1e-6);
    }

    #[test]
    fn cross_tensor_properties() {
        let grid = Grid::default();
        let mb = modes(Species::Boson, &grid);
        let mf = modes(Species::Fermion, &grid);
        let ub = overlap_tensor(&mb, &grid).unwrap();
        let ubf = cross_species_tensor(&mb, &mf, &grid).unwrap();
        assert_eq!(cross_species_tensor(&mb, &mb, &grid).unwrap(), ub);
        assert!((ubf.get(L, L, L, L) - ubf.get(R, R, R, R)).abs() < 1e-10);
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        assert_eq!(ubf.get(a, b, c, d), ubf.get(b, a, c, d));
                        assert_eq!(ubf.get(a, b, c, d), ubf.get(a, b, d, c));
                    }
                }
            }
        }
        let rel = (ubf.get(L, L, L, L) - ub.get(L, L, L, L)).abs() / ub.get(L, L, L, L);
        assert!(rel < 0.01, "{rel}");
        assert_eq!(ubf.distinct_cross().len(), 9);
    }

    #[test]
    fn refinement_changes_entries_little() {
        let g = Grid::default();
        let gr = g.refined();
        let a = overlap_tensor(&modes(Species::Boson, &g), &g).unwrap();
        let b = overlap_tensor(&modes(Species::Boson, &gr), &gr).unwrap();
        for ((name, x), (_, y)) in a.distinct_intra().iter().zip(b.distinct_intra().iter()) {
            // discretization error of the modes dominates the quadrature error
            assert!((x - y).abs() < 1e-6, "{name}: {x} vs {y}");
        }
    }

    #[test]
    fn quadrature_is_converged() {
        // same mode functions, every other node: isolates the quadrature error
        let fine = Grid::default();
        let m = modes(Species::Boson, &fine);
        let coarse = Grid::new(fine.x_max(), fine.n_points().div_ceil(2)).unwrap();
        let sub = |v: &[f64]| -> Vec<f64> { v.iter().step_by(2).copied().collect() };
        let (l, r) = (sub(&m.psi_l), sub(&m.psi_r));
        let a = overlap_tensor(&m, &fine).unwrap();
        let b = tensor_from_modes(&coarse, [&l, &r], [&l, &r]).unwrap();
        for ((name, x), (_, y)) in a.distinct_intra().iter().zip(b.distinct_intra().iter()) {
            assert!((x - y).abs() < 1e-8, "{name}: {x} vs {y}");
        }
    }

    #[test]
    fn errors() {
        let grid = Grid::default();
        let m = modes(Species::Boson, &grid);
        let other = Grid::new(14.5, 1001).unwrap();
        assert!(overlap_tensor(&m, &other).is_err());
        let half: Vec<f64> = m.psi_l.iter().map(|x| 0.5 * x).collect();
        assert!(tensor_from_modes(&grid, [&half, &m.psi_r], [&half, &m.psi_r]).is_err());
    }
}
