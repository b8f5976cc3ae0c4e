mod common;

use dwmix::manybody::{CouplingParams, FermionSchemeRegistry};
use dwmix::model::{Model, ModelSpec};
use dwmix::observables::species_entropies;
use dwmix::units::Species;
use proptest::prelude::*;

use common::default_model;

fn couplings() -> impl Strategy<Value = CouplingParams> {
    (0.0..1e-2f64, 0.0..1e-2f64, 0.0..1e-2f64).prop_map(|(a, b, c)| CouplingParams::new(a, b, c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hamiltonian_is_hermitian_and_mirror_symmetric(q in couplings()) {
        let m = default_model();
        let h = m.hamiltonian(&q).unwrap();
        prop_assert!(h.hermiticity_residue() < 1e-12);
        let mir = m.basis.mirror();
        prop_assert!((&h.matrix * &mir - &mir * &h.matrix).amax() < 1e-10);
    }

    #[test]
    fn ground_state_is_normalized_with_fixed_phase(q in couplings()) {
        let g = default_model().ground_state(&q).unwrap();
        prop_assert!((g.state.norm() - 1.0).abs() < 1e-12);
        let c = &g.state.coefficients;
        let k = (0..c.len()).max_by(|&a, &b| c[a].norm().total_cmp(&c[b].norm())).unwrap();
        prop_assert!(c[k].re > 0.0 && c[k].im == 0.0);
        let s = species_entropies(&g.state, &default_model().basis).unwrap();
        prop_assert!((s.bosons - s.fermions).abs() < 1e-10);
    }

    #[test]
    fn ground_energy_is_monotone(q in couplings(), axis in 0usize..3, step in 1e-5..1e-3f64) {
        let m = default_model();
        let mut r = q;
        match axis {
            0 => r.lambda_bb += step,
            1 => r.lambda_ff += step,
            _ => r.lambda_bf += step,
        }
        let e0 = m.ground_state(&q).unwrap().energy;
        let e1 = m.ground_state(&r).unwrap().energy;
        prop_assert!(e1 >= e0 - 1e-15);
    }

    #[test]
    fn return_probabilities_are_probabilities(q in couplings(), tau in 0.0..2e4f64) {
        let m = default_model();
        let s = m.return_series(&q, &[0.0, tau]).unwrap();
        for sp in [Species::Boson, Species::Fermion] {
            let v = s.species(sp);
            prop_assert!(v[0] == 1.0);
            prop_assert!(v[1] >= -1e-10 && v[1] <= 1.0 + 1e-10);
        }
    }
}

#[test]
fn literal_four_state_basis_runs() {
    let scheme = FermionSchemeRegistry::with_builtins()
        .get("paper_four_state")
        .unwrap();
    let m = Model::build(&ModelSpec {
        fermion_scheme: scheme,
        ..ModelSpec::default()
    })
    .unwrap();
    assert_eq!(m.basis.dim(), 12);
    let psi = m.initial_state().unwrap();
    let (_, i_f) = m
        .basis
        .split(psi.coefficients.iter().position(|c| c.re == 1.0).unwrap());
    assert_eq!(m.basis.fermions.labels()[i_f], "RR.down_down");
    let times = m.default_times(3.0, 256).unwrap();
    let s = m
        .return_series(&CouplingParams::new(9e-4, 3.2e-4, 9e-4).unwrap(), &times)
        .unwrap();
    assert_eq!(s.p_rr_fermions[0], 1.0);
    assert!(s.p_rr_fermions.iter().all(|p| (-1e-10..=1.0 + 1e-10).contains(p)));
}
