use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relax_core::control::{
    draw_amplitudes, jacobian_singular_values, numerical_rank, one_spin_controller, sample_manifold_with,
    stabilized_fixed_point, synthesize_controller, ControlSpec, ControlledSystem,
};
use relax_core::lindblad::propagate;
use relax_core::random::random_damping_model;
use relax_core::scenarios::{ellipsoid_residual, one_spin_model, OneSpinParams};
use relax_core::{CoherenceVector, Execution, RelaxError};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn controls(n: usize) -> ControlSpec {
    if n == 1 {
        ControlSpec::bloch_rotations()
    } else {
        ControlSpec::local_paulis(n).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn synthesis_round_trip(seed in any::<u64>(), n in 1usize..=2) {
        let mut r = rng(seed);
        let model = random_damping_model(n, 1.0, &mut r);
        let gens = controls(n);
        let u: Vec<f64> = (0..gens.len()).map(|_| r.random_range(-2.0..2.0)).collect();
        let target = stabilized_fixed_point(&model, &gens.with_amplitudes(u).unwrap()).unwrap().r_f;
        let synth = synthesize_controller(&model, gens.generators(), &target).unwrap();
        prop_assert!(synth.stabilizable(), "residual {}", synth.residual);
        let again = stabilized_fixed_point(&model, &gens.with_amplitudes(synth.u.clone()).unwrap()).unwrap();
        prop_assert!(again.r_f.max_abs_diff(&target) < 1e-8);
    }

    #[test]
    fn stabilized_point_is_invariant(seed in any::<u64>(), n in 1usize..=2) {
        let mut r = rng(seed);
        let model = random_damping_model(n, 1.0, &mut r);
        let gens = controls(n);
        let u: Vec<f64> = (0..gens.len()).map(|_| r.random_range(-3.0..3.0)).collect();
        let ctrl = gens.with_amplitudes(u).unwrap();
        let fp = stabilized_fixed_point(&model, &ctrl).unwrap();
        let rep = model.with_hamiltonian(model.hamiltonian() + ctrl.hamiltonian()).unwrap().affine().unwrap();
        for t in [0.1, 1.0, 10.0] {
            prop_assert!(propagate(&rep, &fp.r_f, t).unwrap().max_abs_diff(&fp.r_f) < 1e-9);
        }
    }

    #[test]
    fn ellipsoid_targets_are_stabilizable(
        ratio in 0.5f64..50.0,
        theta in 0.05f64..2.5,
        phi in 0.0f64..std::f64::consts::TAU,
    ) {
        let (g1, g2) = (1.0, ratio);
        let p = OneSpinParams::new(g1, g2).unwrap();
        let rho_perp = 0.5 * (g1 / g2).sqrt() * theta.sin();
        let (x, y, z) = (rho_perp * phi.cos(), rho_perp * phi.sin(), 0.5 + 0.5 * theta.cos());
        let target = CoherenceVector::new(1, vec![x, y, z]).unwrap();
        prop_assert!(ellipsoid_residual(&target, p).abs() < 1e-12);
        let model = one_spin_model(p).unwrap();
        let synth = synthesize_controller(&model, ControlSpec::bloch_rotations().generators(), &target).unwrap();
        prop_assert!(synth.stabilizable());
        prop_assert!(ellipsoid_residual(&synth.achieved_fixed_point.r_f, p).abs() < 1e-9);
        // the closed form is one member of the solution family (u_z = 0)
        let (ux, uy) = one_spin_controller(x, y, z, g1, g2).unwrap();
        let ctrl = ControlSpec::bloch_rotations().with_amplitudes(vec![ux, uy, 0.0]).unwrap();
        let fp = stabilized_fixed_point(&model, &ctrl).unwrap();
        prop_assert!(fp.r_f.max_abs_diff(&target) < 1e-8);
    }

    #[test]
    fn strong_transverse_drive_mixes(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g1 = r.random_range(0.2..2.0);
        let params = OneSpinParams::new(g1, g1 * r.random_range(0.5..5.0)).unwrap();
        let model = one_spin_model(params).unwrap();
        let system = ControlledSystem::new(&model, ControlSpec::bloch_rotations().generators()).unwrap();
        let angle = r.random_range(0.0..std::f64::consts::TAU);
        let u = [angle.cos(), angle.sin(), 0.0];
        let mut prev = f64::INFINITY;
        for mu in [1.0, 3.0, 10.0, 100.0, 1e3, 1e4, 1e6] {
            let scaled: Vec<f64> = u.iter().map(|x| x * mu).collect();
            let norm = system.fixed_point(&scaled).unwrap().r_f.norm_squared().sqrt();
            prop_assert!(norm < prev, "mu = {}", mu);
            prev = norm;
        }
        prop_assert!(prev < 1e-3);
    }

    #[test]
    fn jacobian_rank_at_most_n_squared_minus_n(seed in any::<u64>(), n in 1usize..=2) {
        let mut r = rng(seed);
        let model = random_damping_model(n, 1.0, &mut r);
        let gens = ControlSpec::full(n).unwrap();
        let system = ControlledSystem::new(&model, gens.generators()).unwrap();
        let u: Vec<f64> = (0..gens.len()).map(|_| r.random_range(-1.0..1.0)).collect();
        let big_n = 1usize << n;
        match jacobian_singular_values(&system, &u, Execution::Sequential) {
            Ok(sv) => prop_assert!(numerical_rank(&sv) <= big_n * big_n - big_n),
            Err(RelaxError::DegenerateSpectrum { .. }) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }
}

#[test]
fn execution_modes_agree() {
    let model = random_damping_model(2, 1.0, &mut rng(5));
    let gens = ControlSpec::full(2).unwrap();
    let par = sample_manifold_with(&model, gens.generators(), 40, 1.0, 9, Execution::Parallel).unwrap();
    let seq = sample_manifold_with(&model, gens.generators(), 40, 1.0, 9, Execution::Sequential).unwrap();
    assert_eq!(par.amplitudes, seq.amplitudes);
    for (a, b) in par.points.iter().zip(&seq.points) {
        assert_eq!(a.r_f.as_slice(), b.r_f.as_slice());
    }
    let system = ControlledSystem::new(&model, gens.generators()).unwrap();
    let u0 = &draw_amplitudes(1, gens.len(), 1.0, 3)[0];
    assert_eq!(
        jacobian_singular_values(&system, u0, Execution::Parallel).unwrap(),
        jacobian_singular_values(&system, u0, Execution::Sequential).unwrap()
    );
}

#[test]
fn local_controls_cannot_exceed_their_count() {
    let model = random_damping_model(2, 1.0, &mut rng(6));
    let gens = ControlSpec::local_paulis(2).unwrap();
    let system = ControlledSystem::new(&model, gens.generators()).unwrap();
    for u in draw_amplitudes(3, gens.len(), 1.0, 4) {
        let sv = jacobian_singular_values(&system, &u, Execution::default()).unwrap();
        assert!(numerical_rank(&sv) <= 6);
    }
}
