use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relax_core::lindblad::{fixed_point, hamiltonian_matrix, integrate_rk4, is_relaxing, propagate};
use relax_core::linalg::min_eigenvalue;
use relax_core::operators::{coherence_from_density, density_from_coherence, pauli_string_basis, trace};
use relax_core::random::{random_damping_model, random_density, random_hermitian};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn hamiltonian_part_is_skew_symmetric() {
    let mut r = rng(11);
    for trial in 0..100 {
        let n = 1 + trial % 3;
        let basis = pauli_string_basis(n).unwrap();
        let scale = r.random_range(0.1..10.0);
        let a = hamiltonian_matrix(&random_hermitian(basis.dim(), scale, &mut r), &basis);
        assert!((&a + a.transpose()).amax() < 1e-10, "trial {trial}");
    }
}

#[test]
fn random_damping_with_random_drift_relaxes() {
    let mut r = rng(12);
    for trial in 0..200 {
        let n = 1 + trial % 3;
        let damping = random_damping_model(n, 0.0, &mut r);
        assert!(is_relaxing(&damping.affine().unwrap()).relaxing);
        let scale = r.random_range(0.0..8.0);
        let h = random_hermitian(damping.dim(), scale, &mut r);
        let rep = damping.with_hamiltonian(h).unwrap().affine().unwrap();
        let diag = is_relaxing(&rep);
        assert!(diag.relaxing && diag.spectral_abscissa < 0.0, "trial {trial}: {diag:?}");
        let fp = fixed_point(&rep).unwrap();
        assert!(fp.residual < 1e-10);
        assert!(min_eigenvalue(&fp.rho_f) >= -1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trajectories_stay_physical(seed in any::<u64>(), n in 1usize..=2) {
        let mut r = rng(seed);
        let model = random_damping_model(n, 3.0, &mut r);
        let rep = model.affine().unwrap();
        let basis = pauli_string_basis(n).unwrap();
        let r0 = coherence_from_density(&random_density(model.dim(), &mut r), &basis).unwrap();
        for t in [0.0, 0.05, 0.3, 1.0, 4.0, 20.0] {
            let rho = density_from_coherence(&propagate(&rep, &r0, t).unwrap(), &basis).unwrap();
            prop_assert!((trace(&rho).re - 1.0).abs() < 1e-12);
            prop_assert!(min_eigenvalue(&rho) >= -1e-9, "t = {}", t);
        }
    }

    #[test]
    fn semigroup_property(seed in any::<u64>(), n in 1usize..=2, s in 0.0f64..3.0, t in 0.0f64..3.0) {
        let mut r = rng(seed);
        let model = random_damping_model(n, 3.0, &mut r);
        let rep = model.affine().unwrap();
        let basis = pauli_string_basis(n).unwrap();
        let r0 = coherence_from_density(&random_density(model.dim(), &mut r), &basis).unwrap();
        let two_step = propagate(&rep, &propagate(&rep, &r0, s).unwrap(), t).unwrap();
        let one_step = propagate(&rep, &r0, s + t).unwrap();
        prop_assert!(two_step.max_abs_diff(&one_step) < 1e-10);
    }

    #[test]
    fn exact_flow_matches_rk4(seed in any::<u64>(), n in 1usize..=2) {
        let mut r = rng(seed);
        let model = random_damping_model(n, 3.0, &mut r);
        let rep = model.affine().unwrap();
        let basis = pauli_string_basis(n).unwrap();
        let r0 = coherence_from_density(&random_density(model.dim(), &mut r), &basis).unwrap();
        let path = integrate_rk4(&rep, &r0, 5.0, 1e-3).unwrap();
        for (t, rk) in path.iter().step_by(250) {
            prop_assert!(propagate(&rep, &r0, *t).unwrap().max_abs_diff(rk) < 1e-6);
        }
    }

    #[test]
    fn fixed_point_attracts(seed in any::<u64>(), n in 1usize..=2) {
        let mut r = rng(seed);
        let model = random_damping_model(n, 2.0, &mut r);
        let rep = model.affine().unwrap();
        let fp = fixed_point(&rep).unwrap();
        let basis = pauli_string_basis(n).unwrap();
        let r0 = coherence_from_density(&random_density(model.dim(), &mut r), &basis).unwrap();
        // slowest decay rate is at least 0.1 for these rate ranges
        let late = propagate(&rep, &r0, 400.0).unwrap();
        prop_assert!(late.max_abs_diff(&fp.r_f) < 1e-9);
    }
}

#[test]
fn dissipative_part_ignores_the_hamiltonian() {
    let mut r = rng(13);
    let model = random_damping_model(2, 0.0, &mut r);
    let base = model.affine().unwrap();
    let driven = model
        .with_hamiltonian(random_hermitian(4, 3.0, &mut r))
        .unwrap()
        .affine()
        .unwrap();
    assert_eq!(base.dissipative_part(), driven.dissipative_part());
    assert_eq!(base.offset(), driven.offset());
    assert!(base.hamiltonian_part().amax() < 1e-15);
}

#[test]
fn velocity_matches_master_equation() {
    let mut r = rng(14);
    for n in 1..=3 {
        let model = random_damping_model(n, 2.0, &mut r);
        let rep = model.affine().unwrap();
        let basis = pauli_string_basis(n).unwrap();
        let rho = random_density(model.dim(), &mut r);
        let rv = coherence_from_density(&rho, &basis).unwrap();
        let from_rep = rep.velocity(rv.as_vector());
        let from_rho = basis.project(&model.generator(&rho));
        assert!((from_rep - from_rho).amax() < 1e-12, "n = {n}");
    }
}
