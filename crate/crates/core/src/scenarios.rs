//! Ready-made systems: a single spin with `T1`/`T2` relaxation (the Bloch
//! equations), two amplitude-damped spins with a `ZZ` coupling, and the
//! pulsed (stroboscopic) steady state.
//!
//! Rates are in units of the damping rate; `gamma = 1` fixes the time scale.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::control::{ControlSpec, ControlledSystem};
use crate::entanglement::entanglement_of_formation;
use crate::error::{RelaxError, Result};
use crate::exec::Execution;
use crate::lindblad::{fixed_point, flow_map, is_relaxing, LindbladModel, FixedPointResult, MAX_CONDITION};
use crate::linalg;
use crate::operators::{
    embed, fidelity, kron, raising, CoherenceVector, ComplexMatrix, OperatorBasis, Pauli,
};

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OneSpinParams {
    /// `1/T1`.
    pub gamma1: f64,
    /// `1/T2`.
    pub gamma2: f64,
}

impl OneSpinParams {
    pub fn new(gamma1: f64, gamma2: f64) -> Result<Self> {
        if !(gamma1.is_finite() && gamma1 > 0.0 && gamma2.is_finite()) {
            return Err(RelaxError::model("gamma1", format!("must be finite and > 0, got {gamma1}")));
        }
        // the Z dissipator amplitude sqrt(gamma2/2 - gamma1/4) must be real
        if gamma2 < gamma1 / 2.0 {
            return Err(RelaxError::model(
                "gamma2",
                format!("must be >= gamma1/2 = {}, got {gamma2}", gamma1 / 2.0),
            ));
        }
        Ok(OneSpinParams { gamma1, gamma2 })
    }
}

/// Amplitude damping `sqrt(gamma1) |up><down|` plus dephasing
/// `sqrt(gamma2/2 - gamma1/4) Z`, no drift Hamiltonian.
pub fn one_spin_model(p: OneSpinParams) -> Result<LindbladModel> {
    let p = OneSpinParams::new(p.gamma1, p.gamma2)?;
    let dephasing = (p.gamma2 / 2.0 - p.gamma1 / 4.0).max(0.0).sqrt();
    LindbladModel::new(
        1,
        ComplexMatrix::zeros(2, 2),
        vec![
            raising() * real(p.gamma1.sqrt()),
            Pauli::Z.matrix() * real(dephasing),
        ],
    )
}

/// Signed distance from the stabilizable ellipsoid
/// `(z - 1/2)^2 + (gamma2/gamma1)(x^2 + y^2) = 1/4`.
pub fn ellipsoid_residual(r: &CoherenceVector, p: OneSpinParams) -> f64 {
    let (x, y, z) = (r[0], r[1], r[2]);
    (z - 0.5).powi(2) + p.gamma2 / p.gamma1 * (x * x + y * y) - 0.25
}

#[derive(Clone, Debug)]
pub struct TransversePeak {
    /// Largest `sqrt(x^2 + y^2)` over stabilizable states.
    pub magnitude: f64,
    /// Rotation rate about `y` that attains it.
    pub u_y: f64,
    pub fixed_point: CoherenceVector,
}

/// Golden-section search for the maximal steady transverse magnetization
/// over continuous rotations about `y` (the problem is axially symmetric).
pub fn max_transverse_magnetization(p: OneSpinParams) -> Result<TransversePeak> {
    let model = one_spin_model(p)?;
    let gens = ControlSpec::bloch_rotations();
    let system = ControlledSystem::new(&model, gens.generators())?;
    let transverse = |uy: f64| -> Result<f64> {
        let r = system.fixed_point(&[0.0, uy, 0.0])?.r_f;
        Ok(r[0].hypot(r[1]))
    };
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0, 100.0 * p.gamma1.max(p.gamma2));
    let mut a = hi - phi * (hi - lo);
    let mut b = lo + phi * (hi - lo);
    let (mut fa, mut fb) = (transverse(a)?, transverse(b)?);
    while hi - lo > 1e-12 * hi.max(1.0) {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + phi * (hi - lo);
            fb = transverse(b)?;
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - phi * (hi - lo);
            fa = transverse(a)?;
        }
    }
    let u_y = 0.5 * (lo + hi);
    let fixed_point = system.fixed_point(&[0.0, u_y, 0.0])?.r_f;
    Ok(TransversePeak {
        magnitude: fixed_point[0].hypot(fixed_point[1]),
        u_y,
        fixed_point,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoSpinParams {
    /// Per-spin damping rate.
    pub gamma: f64,
    /// `J` in the drift `J Z1 Z2`.
    pub coupling: f64,
}

impl TwoSpinParams {
    pub fn new(gamma: f64, coupling: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(RelaxError::model("gamma", format!("must be finite and > 0, got {gamma}")));
        }
        if !(coupling.is_finite() && coupling >= 0.0) {
            return Err(RelaxError::model("J", format!("must be finite and >= 0, got {coupling}")));
        }
        Ok(TwoSpinParams { gamma, coupling })
    }
}

/// Two spins damped independently towards `|up up>` and coupled by `J Z1 Z2`.
pub fn two_spin_model(p: TwoSpinParams) -> Result<LindbladModel> {
    let p = TwoSpinParams::new(p.gamma, p.coupling)?;
    let z = Pauli::Z.matrix();
    let root = real(p.gamma.sqrt());
    LindbladModel::new(
        2,
        kron(&z, &z) * real(p.coupling),
        vec![embed(&raising(), 0, 2) * root, embed(&raising(), 1, 2) * root],
    )
}

/// Local control `4 sqrt(J)/5 (X1 + X2) - J (Z1 + Z2)`.
pub fn magic_control(coupling: f64) -> Result<ControlSpec> {
    if !(coupling.is_finite() && coupling > 0.0) {
        return Err(RelaxError::Domain(format!("J must be > 0, got {coupling}")));
    }
    let x = 0.8 * coupling.sqrt();
    ControlSpec::named(&["X1", "Z1", "X2", "Z2"], 2)?.with_amplitudes(vec![x, -coupling, x, -coupling])
}

/// `(|up up><up up| + |psi+><psi+|) / 2` with `psi+ = (|up down> + |down up>)/sqrt 2`.
pub fn bell_mixture() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let up_up = DVector::from_vec(vec![real(1.0), real(0.0), real(0.0), real(0.0)]);
    let triplet = DVector::from_vec(vec![real(0.0), real(s), real(s), real(0.0)]);
    (&up_up * up_up.adjoint() + &triplet * triplet.adjoint()) * real(0.5)
}

#[derive(Clone, Debug)]
pub struct EntanglementPoint {
    pub concurrence: f64,
    pub eof: f64,
    /// Uhlmann fidelity with [`bell_mixture`].
    pub fidelity: f64,
    pub fixed_point: FixedPointResult,
}

#[derive(Debug)]
pub struct EntanglementRow {
    pub coupling: f64,
    pub outcome: Result<EntanglementPoint>,
}

/// Fixed point of the two-spin model under [`magic_control`] at one coupling.
pub fn entangled_fixed_point(gamma: f64, coupling: f64) -> Result<EntanglementPoint> {
    let model = two_spin_model(TwoSpinParams::new(gamma, coupling)?)?;
    let ctrl = magic_control(coupling)?;
    let h = model.hamiltonian() + ctrl.hamiltonian();
    let fp = fixed_point(&model.with_hamiltonian(h)?.affine()?)?;
    let report = entanglement_of_formation(&fp.rho_f)?;
    Ok(EntanglementPoint {
        concurrence: report.concurrence,
        eof: report.eof,
        fidelity: fidelity(&bell_mixture(), &fp.rho_f),
        fixed_point: fp,
    })
}

/// One row per coupling; failing rows are kept with their error.
pub fn entanglement_vs_coupling(gamma: f64, couplings: &[f64]) -> Result<Vec<EntanglementRow>> {
    entanglement_vs_coupling_with(gamma, couplings, Execution::default())
}

pub fn entanglement_vs_coupling_with(
    gamma: f64,
    couplings: &[f64],
    exec: Execution,
) -> Result<Vec<EntanglementRow>> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(RelaxError::Domain(format!("gamma must be > 0, got {gamma}")));
    }
    Ok(exec.map(couplings, |&coupling| EntanglementRow {
        coupling,
        outcome: entangled_fixed_point(gamma, coupling),
    }))
}

/// `points` values spaced geometrically from `min` to `max` inclusive.
pub fn geometric_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max >= min && min.is_finite() && max.is_finite()) || points == 0 {
        return Err(RelaxError::Domain(format!(
            "need 0 < min <= max and points >= 1, got min={min}, max={max}, points={points}"
        )));
    }
    if points == 1 {
        return Ok(vec![min]);
    }
    let ratio = (max / min).ln() / (points - 1) as f64;
    Ok((0..points)
        .map(|k| {
            if k == points - 1 {
                max
            } else {
                min * (ratio * k as f64).exp()
            }
        })
        .collect())
}

/// Instantaneous pulse `exp(-i H_c dt)` applied once every `dt`, with free
/// relaxation in between.
#[derive(Clone, Debug)]
pub struct PulseTrain {
    pub control: ControlSpec,
    pub dt: f64,
}

impl PulseTrain {
    pub fn new(control: ControlSpec, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(RelaxError::Domain(format!("pulse interval must be > 0, got {dt}")));
        }
        Ok(PulseTrain { control, dt })
    }
}

/// Coherence-space rotation `R_ab = Re Tr(P_a U P_b U^dag) / N` of
/// `U = exp(-i h t)`.
pub fn unitary_rotation(h: &ComplexMatrix, t: f64, basis: &OperatorBasis) -> DMatrix<f64> {
    let u = linalg::expm(&(h * Complex64::new(0.0, -t)));
    let ud = u.adjoint();
    let norm = basis.dim() as f64;
    let columns: Vec<DVector<f64>> = basis
        .elements()
        .iter()
        .map(|p| basis.project(&(&u * p * &ud)).unscale(norm))
        .collect();
    DMatrix::from_columns(&columns)
}

/// Affine map over one period, `r -> R (M r + v)`, returned as `(R M, R v)`.
pub fn pulse_period_map(model: &LindbladModel, train: &PulseTrain) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let rep = model.affine()?;
    let diag = is_relaxing(&rep);
    if !diag.relaxing {
        return Err(RelaxError::NotRelaxing {
            condition_number: diag.condition_number,
            spectral_abscissa: diag.spectral_abscissa,
            spectrum: diag.spectrum,
        });
    }
    let (m, v) = flow_map(&rep, train.dt)?;
    let h = if train.control.is_empty() {
        ComplexMatrix::zeros(model.dim(), model.dim())
    } else {
        train.control.hamiltonian()
    };
    if h.nrows() != model.dim() {
        return Err(RelaxError::Dimension(format!(
            "pulse acts on dimension {}, model on {}",
            h.nrows(),
            model.dim()
        )));
    }
    let r = unitary_rotation(&h, train.dt, rep.basis());
    Ok((&r * m, r * v))
}

/// Exact fixed point of the period map: `(I - R M) r = R v`.
pub fn pulsed_steady_state(model: &LindbladModel, train: &PulseTrain) -> Result<CoherenceVector> {
    let (rm, rv) = pulse_period_map(model, train)?;
    let d = rm.nrows();
    let k = DMatrix::identity(d, d) - rm;
    let condition_number = linalg::condition_number(&k);
    if condition_number.is_nan() || condition_number > MAX_CONDITION {
        return Err(RelaxError::NoStroboscopicFixedPoint { condition_number });
    }
    let r = k
        .lu()
        .solve(&rv)
        .ok_or(RelaxError::NoStroboscopicFixedPoint { condition_number })?;
    CoherenceVector::new(model.n_qubits(), r.as_slice().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::stabilized_fixed_point;

    #[test]
    fn one_spin_model_examples() {
        let rep = one_spin_model(OneSpinParams::new(1.0, 1.0).unwrap()).unwrap().affine().unwrap();
        assert!((rep.dissipative_part() - DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, -1.0, -1.0]))).amax() < 1e-15);
        assert_eq!(rep.offset().as_slice(), &[0.0, 0.0, 1.0]);

        let m = one_spin_model(OneSpinParams::new(2.0, 1.0).unwrap()).unwrap();
        assert_eq!(m.dissipators()[1], ComplexMatrix::zeros(2, 2));

        let rep = one_spin_model(OneSpinParams::new(1.0, 2.0).unwrap()).unwrap().affine().unwrap();
        assert!((rep.dissipative_part() - DMatrix::from_diagonal(&DVector::from_vec(vec![-2.0, -2.0, -1.0]))).amax() < 1e-15);

        assert!(matches!(OneSpinParams::new(1.0, 0.4), Err(RelaxError::InvalidModel { .. })));
    }

    #[test]
    fn two_spin_model_examples() {
        for coupling in [0.0, 5.0] {
            let model = two_spin_model(TwoSpinParams::new(1.0, coupling).unwrap()).unwrap();
            let rep = model.affine().unwrap();
            assert_eq!(rep.linear_part().shape(), (15, 15));
            let fp = fixed_point(&rep).unwrap();
            let b = rep.basis();
            for (label, &value) in b.labels().iter().zip(fp.r_f.as_slice()) {
                let want = if ["ZI", "IZ", "ZZ"].contains(&label.as_str()) { 1.0 } else { 0.0 };
                assert!((value - want).abs() < 1e-12, "{label} = {value}");
            }
        }
        assert!(TwoSpinParams::new(0.0, 1.0).is_err());
        assert!(TwoSpinParams::new(1.0, -1.0).is_err());
    }

    #[test]
    fn magic_control_examples() {
        let c = magic_control(25.0).unwrap();
        assert_eq!(c.amplitudes(), &[4.0, -25.0, 4.0, -25.0]);
        assert_eq!(c.labels(), &["X1", "Z1", "X2", "Z2"]);
        let c = magic_control(1.0).unwrap();
        assert_eq!(c.amplitudes(), &[0.8, -1.0, 0.8, -1.0]);
        // invariant under exchanging the spins
        let swap = DMatrix::from_fn(4, 4, |i, j| {
            let swapped = ((j & 1) << 1) | (j >> 1);
            if i == swapped { real(1.0) } else { real(0.0) }
        });
        let h = c.hamiltonian();
        assert!((&swap * &h * &swap - &h).norm() < 1e-15);
        assert!(magic_control(0.0).is_err());
    }

    #[test]
    fn large_coupling_reaches_bell_mixture() {
        let point = entangled_fixed_point(1.0, 1e4).unwrap();
        assert!((point.eof - 0.3546).abs() < 5e-3);
        assert!(point.fidelity > 0.999);
        let weak = entangled_fixed_point(1.0, 1e-3).unwrap();
        assert!(weak.eof < 0.05);
    }

    #[test]
    fn transverse_peak_is_half_for_equal_rates() {
        let peak = max_transverse_magnetization(OneSpinParams::new(1.0, 1.0).unwrap()).unwrap();
        assert!((peak.magnitude - 0.5).abs() < 1e-9);
        assert!((peak.u_y - 1.0).abs() < 1e-4);
    }

    #[test]
    fn unpulsed_train_keeps_drift_fixed_point() {
        let model = one_spin_model(OneSpinParams::new(1.0, 1.0).unwrap()).unwrap();
        let train = PulseTrain::new(ControlSpec::bloch_rotations(), 0.3).unwrap();
        let r = pulsed_steady_state(&model, &train).unwrap();
        assert!((r[2] - 1.0).abs() < 1e-14 && r[0].abs() < 1e-14 && r[1].abs() < 1e-14);
        assert!(PulseTrain::new(ControlSpec::bloch_rotations(), 0.0).is_err());
    }

    #[test]
    fn pulsed_state_matches_period_map_iteration() {
        let model = one_spin_model(OneSpinParams::new(1.0, 3.0).unwrap()).unwrap();
        let ctrl = ControlSpec::bloch_rotations().with_amplitudes(vec![0.7, 1.9, 0.0]).unwrap();
        let train = PulseTrain::new(ctrl, 0.25).unwrap();
        let direct = pulsed_steady_state(&model, &train).unwrap();
        let (rm, rv) = pulse_period_map(&model, &train).unwrap();
        let mut r = DVector::zeros(3);
        for _ in 0..2000 {
            r = &rm * r + &rv;
        }
        assert!((r - direct.as_vector()).amax() < 1e-13);
    }

    #[test]
    fn pulsed_converges_to_continuous_at_first_order() {
        let model = one_spin_model(OneSpinParams::new(1.0, 1.0).unwrap()).unwrap();
        let ctrl = ControlSpec::bloch_rotations().with_amplitudes(vec![0.4, 1.2, 0.0]).unwrap();
        let cont = stabilized_fixed_point(&model, &ctrl).unwrap().r_f;
        let errs: Vec<f64> = [0.08, 0.04, 0.02, 0.01]
            .iter()
            .map(|&dt| {
                let r = pulsed_steady_state(&model, &PulseTrain::new(ctrl.clone(), dt).unwrap()).unwrap();
                r.max_abs_diff(&cont)
            })
            .collect();
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((1.5..=2.5).contains(&ratio), "ratio {ratio} from {errs:?}");
        }
    }

    #[test]
    fn grid_endpoints() {
        let g = geometric_grid(0.01, 1e4, 25).unwrap();
        assert_eq!(g.len(), 25);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[24], 1e4);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(geometric_grid(0.0, 1.0, 3).is_err());
    }
}
