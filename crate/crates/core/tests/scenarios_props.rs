use relax_core::control::{sample_manifold, ControlSpec, ControlledSystem};
use relax_core::linalg::min_eigenvalue;
use relax_core::operators::{trace, validate_density};
use relax_core::scenarios::{
    ellipsoid_residual, entanglement_vs_coupling, entanglement_vs_coupling_with, geometric_grid,
    max_transverse_magnetization, one_spin_model, pulsed_steady_state, OneSpinParams, PulseTrain,
};
use relax_core::Execution;

fn params(g1: f64, g2: f64) -> OneSpinParams {
    OneSpinParams::new(g1, g2).unwrap()
}

#[test]
fn random_controllers_land_on_the_ellipsoid() {
    let gens = ControlSpec::bloch_rotations();
    for (k, (g1, g2)) in [(1.0, 1.0), (0.3, 4.0), (2.0, 1.5)].into_iter().enumerate() {
        let p = params(g1, g2);
        let sample = sample_manifold(&one_spin_model(p).unwrap(), gens.generators(), 200, 4.0, k as u64).unwrap();
        assert_eq!(sample.points.len(), 200);
        for fp in &sample.points {
            assert!(ellipsoid_residual(&fp.r_f, p).abs() < 1e-9);
        }
    }
}

#[test]
fn ellipsoid_shape_depends_only_on_rate_ratio() {
    // scaling both rates and the drive by c leaves the fixed point unchanged
    let gens = ControlSpec::bloch_rotations();
    let base = ControlledSystem::new(&one_spin_model(params(1.0, 3.0)).unwrap(), gens.generators()).unwrap();
    let scaled = ControlledSystem::new(&one_spin_model(params(2.5, 7.5)).unwrap(), gens.generators()).unwrap();
    for u in [[0.3, -1.2, 0.7], [2.0, 0.1, -0.4], [0.0, 5.0, 0.0]] {
        let a = base.fixed_point(&u).unwrap().r_f;
        let b = scaled.fixed_point(&u.map(|x| 2.5 * x)).unwrap().r_f;
        assert!(a.max_abs_diff(&b) < 1e-12);
    }
}

#[test]
fn transverse_peak_shrinks_with_rate_ratio() {
    let peaks: Vec<f64> = [1.0, 10.0, 100.0, 1000.0]
        .iter()
        .map(|&ratio| max_transverse_magnetization(params(1.0, ratio)).unwrap().magnitude)
        .collect();
    assert!(peaks.windows(2).all(|w| w[1] < w[0]), "{peaks:?}");
    // analytic peak: sqrt(gamma1 / gamma2) / 2
    for (p, ratio) in peaks.iter().zip([1.0f64, 10.0, 100.0, 1000.0]) {
        assert!((p - 0.5 / ratio.sqrt()).abs() < 1e-6);
    }
}

#[test]
fn pulsed_transverse_shrinks_with_rate_ratio_at_fixed_pulse() {
    let ctrl = ControlSpec::bloch_rotations().with_amplitudes(vec![0.0, 1.0, 0.0]).unwrap();
    let train = PulseTrain::new(ctrl, 0.05).unwrap();
    let states: Vec<_> = [1.0, 10.0, 100.0, 1000.0]
        .iter()
        .map(|&ratio| pulsed_steady_state(&one_spin_model(params(1.0, ratio)).unwrap(), &train).unwrap())
        .collect();
    let transverse: Vec<f64> = states.iter().map(|r| r[0].hypot(r[1])).collect();
    assert!(transverse.windows(2).all(|w| w[1] < w[0]), "{transverse:?}");
    // once coherence dies between pulses, only the tilt of the last pulse survives
    let last = &states[3];
    assert!((transverse[3] - last[2] * 0.05f64.tan()).abs() < 1e-9, "{transverse:?} {:?}", last.as_slice());
}

#[test]
fn pulsed_half_peak() {
    let model = one_spin_model(params(1.0, 1.0)).unwrap();
    let best = (0..=40)
        .map(|k| {
            let uy = 0.8 + 0.01 * k as f64;
            let ctrl = ControlSpec::bloch_rotations().with_amplitudes(vec![0.0, uy, 0.0]).unwrap();
            let r = pulsed_steady_state(&model, &PulseTrain::new(ctrl, 1e-3).unwrap()).unwrap();
            r[0].hypot(r[1])
        })
        .fold(0.0, f64::max);
    assert!((best - 0.5).abs() < 1e-3, "{best}");
}

#[test]
fn two_spin_sweep_is_physical_and_monotone() {
    let grid = geometric_grid(1e-2, 1e4, 25).unwrap();
    let rows = entanglement_vs_coupling(1.0, &grid).unwrap();
    let mut prev = 0.0;
    for row in &rows {
        let point = row.outcome.as_ref().unwrap();
        let rho = &point.fixed_point.rho_f;
        validate_density(rho, 1e-10).unwrap();
        assert!((trace(rho).re - 1.0).abs() < 1e-12);
        assert!(min_eigenvalue(rho) >= -1e-10);
        assert!(point.eof >= prev - 1e-12, "J = {}: {} < {prev}", row.coupling, point.eof);
        prev = point.eof;
    }
    assert!((prev - 0.3546).abs() < 5e-3);
}

#[test]
fn sweep_is_identical_across_execution_modes() {
    let grid = geometric_grid(0.1, 100.0, 7).unwrap();
    let par = entanglement_vs_coupling_with(1.0, &grid, Execution::Parallel).unwrap();
    let seq = entanglement_vs_coupling_with(1.0, &grid, Execution::Sequential).unwrap();
    for (a, b) in par.iter().zip(&seq) {
        let (a, b) = (a.outcome.as_ref().unwrap(), b.outcome.as_ref().unwrap());
        assert_eq!(a.eof, b.eof);
        assert_eq!(a.fixed_point.r_f.as_slice(), b.fixed_point.r_f.as_slice());
    }
}
