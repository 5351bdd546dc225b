//! Control Hamiltonians, controller synthesis and the geometry of the set
//! of stabilizable states.
//!
//! A control `H_c = sum_a u_a G_a` only changes the skew part of the
//! generator, and it does so linearly: `A(u) = A_drift + sum_a u_a A_a`.
//! That makes the question "which `u` stabilizes target `r*`" a linear
//! least-squares problem in `u`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{RelaxError, Result};
use crate::exec::Execution;
use crate::lindblad::{fixed_point, hamiltonian_matrix, CoherenceRep, FixedPointResult, LindbladModel};
use crate::linalg;
use crate::operators::{
    embed, hermiticity_defect, json, pauli_string_basis, trace, CoherenceVector, ComplexMatrix,
    Pauli, HELPER_TOL,
};

/// Synthesis residual below which a target counts as stabilizable.
pub const STABILIZABLE_TOL: f64 = 1e-8;
/// Central-difference step for the fixed-point Jacobian.
pub const JACOBIAN_STEP: f64 = 1e-5;
/// Singular values below this fraction of the largest are dropped from the rank.
pub const RANK_CUTOFF: f64 = 1e-6;
/// Minimum eigenvalue gap of `rho_f` for the rank estimate to be meaningful.
pub const SPECTRAL_GAP_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct ControlSpec {
    generators: Vec<ComplexMatrix>,
    labels: Vec<String>,
    u: Vec<f64>,
}

impl ControlSpec {
    pub fn new(generators: Vec<ComplexMatrix>, labels: Vec<String>, u: Vec<f64>) -> Result<Self> {
        if generators.len() != u.len() || generators.len() != labels.len() {
            return Err(RelaxError::Dimension(format!(
                "{} generators, {} labels, {} amplitudes",
                generators.len(),
                labels.len(),
                u.len()
            )));
        }
        if let Some(first) = generators.first() {
            let dim = first.nrows();
            for (g, label) in generators.iter().zip(&labels) {
                if g.nrows() != dim || g.ncols() != dim {
                    return Err(RelaxError::Dimension(format!("generator {label} has the wrong shape")));
                }
                if hermiticity_defect(g) > HELPER_TOL {
                    return Err(RelaxError::model(format!("generators.{label}"), "not Hermitian"));
                }
                if trace(g).norm() > HELPER_TOL {
                    return Err(RelaxError::model(format!("generators.{label}"), "not traceless"));
                }
            }
        }
        if u.iter().any(|x| !x.is_finite()) {
            return Err(RelaxError::Domain("non-finite control amplitude".into()));
        }
        Ok(ControlSpec { generators, labels, u })
    }

    /// Build from named generators (see [`named_generator`]) with zero amplitudes.
    pub fn named(names: &[&str], n_qubits: usize) -> Result<Self> {
        let generators = names
            .iter()
            .map(|n| named_generator(n, n_qubits))
            .collect::<Result<Vec<_>>>()?;
        let labels = names.iter().map(|s| s.to_string()).collect();
        Self::new(generators, labels, vec![0.0; names.len()])
    }

    /// `X_k, Y_k, Z_k` Paulis on every site: the local controls.
    pub fn local_paulis(n_qubits: usize) -> Result<Self> {
        let names: Vec<String> = (1..=n_qubits)
            .flat_map(|k| ["X", "Y", "Z"].map(|p| format!("{p}{k}")))
            .collect();
        Self::named(&names.iter().map(String::as_str).collect::<Vec<_>>(), n_qubits)
    }

    /// Every Pauli string: unrestricted `su(N)` control.
    pub fn full(n_qubits: usize) -> Result<Self> {
        let basis = pauli_string_basis(n_qubits)?;
        Self::new(
            basis.elements().to_vec(),
            basis.labels().to_vec(),
            vec![0.0; basis.len()],
        )
    }

    /// Spin-1/2 operators `X/2, Y/2, Z/2`: amplitude `u` rotates the Bloch
    /// vector at angular rate `u`.
    pub fn bloch_rotations() -> Self {
        Self::named(&["SX1", "SY1", "SZ1"], 1).expect("single-qubit spin generators")
    }

    pub fn with_amplitudes(&self, u: Vec<f64>) -> Result<Self> {
        Self::new(self.generators.clone(), self.labels.clone(), u)
    }

    pub fn generators(&self) -> &[ComplexMatrix] {
        &self.generators
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.u
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// `H_c = sum_a u_a G_a` (zero 1x1 matrix when empty).
    pub fn hamiltonian(&self) -> ComplexMatrix {
        let dim = self.generators.first().map_or(1, |g| g.nrows());
        self.generators
            .iter()
            .zip(&self.u)
            .fold(ComplexMatrix::zeros(dim, dim), |acc, (g, &u)| acc + g * Complex64::new(u, 0.0))
    }

    /// Parse `{ "generators": [names | matrices], "u": [floats] }`.
    pub fn from_json(text: &str, n_qubits: usize) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum GeneratorJson {
            Name(String),
            Matrix(json::MatrixRows),
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct ControlFile {
            generators: Vec<GeneratorJson>,
            #[serde(default)]
            u: Option<Vec<f64>>,
        }
        let file: ControlFile = serde_json::from_str(text)?;
        let mut generators = Vec::with_capacity(file.generators.len());
        let mut labels = Vec::with_capacity(file.generators.len());
        for (k, g) in file.generators.iter().enumerate() {
            match g {
                GeneratorJson::Name(name) => {
                    generators.push(named_generator(name, n_qubits)?);
                    labels.push(name.clone());
                }
                GeneratorJson::Matrix(rows) => {
                    generators.push(json::decode(rows, &format!("generators[{k}]"))?);
                    labels.push(format!("G{k}"));
                }
            }
        }
        let u = file.u.unwrap_or_else(|| vec![0.0; generators.len()]);
        Self::new(generators, labels, u)
    }
}

/// Resolve a generator name on an `n_qubits` register: `X2` is Pauli X on
/// site 2; a leading `S` selects the spin operator (`SX2 = X2 / 2`); a bare
/// string of `n_qubits` Pauli letters such as `XZ` is that Pauli string.
pub fn named_generator(name: &str, n_qubits: usize) -> Result<ComplexMatrix> {
    let bad = || RelaxError::model(format!("generators.{name}"), "unknown generator name");
    let upper = name.to_ascii_uppercase();
    let (half, rest) = match upper.strip_prefix('S') {
        Some(rest) => (true, rest),
        None => (false, upper.as_str()),
    };
    let mut chars = rest.chars();
    let first = chars.next().ok_or_else(bad)?;
    let site_part: String = chars.collect();
    let m = if let (Some(p), Ok(site)) = (Pauli::from_label(first), site_part.parse::<usize>()) {
        if p == Pauli::I || site == 0 || site > n_qubits {
            return Err(bad());
        }
        embed(&p.matrix(), site - 1, n_qubits)
    } else {
        let basis = pauli_string_basis(n_qubits)?;
        let idx = basis.index_of(rest).ok_or_else(bad)?;
        basis.elements()[idx].clone()
    };
    Ok(if half { m * Complex64::new(0.5, 0.0) } else { m })
}

/// Drift generator plus the coherence-space matrices `A_a` of each control
/// direction, so `A(u)` is assembled without touching density matrices.
#[derive(Clone, Debug)]
pub struct ControlledSystem {
    drift: CoherenceRep,
    directions: Vec<DMatrix<f64>>,
}

impl ControlledSystem {
    pub fn new(model: &LindbladModel, generators: &[ComplexMatrix]) -> Result<Self> {
        let drift = model.affine()?;
        for (k, g) in generators.iter().enumerate() {
            if g.nrows() != model.dim() || g.ncols() != model.dim() {
                return Err(RelaxError::Dimension(format!(
                    "generator {k} is {}x{}, model dimension is {}",
                    g.nrows(),
                    g.ncols(),
                    model.dim()
                )));
            }
        }
        let directions = generators
            .iter()
            .map(|g| hamiltonian_matrix(g, drift.basis()))
            .collect();
        Ok(ControlledSystem { drift, directions })
    }

    pub fn drift(&self) -> &CoherenceRep {
        &self.drift
    }

    pub fn n_controls(&self) -> usize {
        self.directions.len()
    }

    pub fn rep(&self, u: &[f64]) -> Result<CoherenceRep> {
        if u.len() != self.directions.len() {
            return Err(RelaxError::Dimension(format!(
                "{} amplitudes for {} generators",
                u.len(),
                self.directions.len()
            )));
        }
        let mut a = self.drift.hamiltonian_part().clone();
        for (dir, &ua) in self.directions.iter().zip(u) {
            a += dir * ua;
        }
        Ok(self.drift.with_hamiltonian_part(a))
    }

    pub fn fixed_point(&self, u: &[f64]) -> Result<FixedPointResult> {
        fixed_point(&self.rep(u)?)
    }

    /// Fixed point only, via a plain LU solve (no spectral diagnostics).
    fn fixed_vector(&self, u: &[f64]) -> Result<DVector<f64>> {
        let rep = self.rep(u)?;
        rep.linear_part()
            .lu()
            .solve(&(-rep.offset()))
            .ok_or_else(|| RelaxError::NotRelaxing {
                condition_number: f64::INFINITY,
                spectral_abscissa: f64::NAN,
                spectrum: Vec::new(),
            })
    }
}

/// Fixed point of the drift with `ctrl`'s Hamiltonian added.
pub fn stabilized_fixed_point(model: &LindbladModel, ctrl: &ControlSpec) -> Result<FixedPointResult> {
    if ctrl.is_empty() {
        return fixed_point(&model.affine()?);
    }
    if ctrl.generators[0].nrows() != model.dim() {
        return Err(RelaxError::Dimension(format!(
            "control acts on dimension {}, model on {}",
            ctrl.generators[0].nrows(),
            model.dim()
        )));
    }
    let h = model.hamiltonian() + ctrl.hamiltonian();
    fixed_point(&model.with_hamiltonian(h)?.affine()?)
}

#[derive(Clone, Debug)]
pub struct SynthesisResult {
    pub u: Vec<f64>,
    /// `||(A(u) + B) r* + c||` at the returned `u`.
    pub residual: f64,
    pub achieved_fixed_point: FixedPointResult,
}

impl SynthesisResult {
    pub fn stabilizable(&self) -> bool {
        self.residual < STABILIZABLE_TOL
    }
}

/// Minimum-norm `u` making `target` a fixed point, in the least-squares
/// sense: `sum_a u_a (A_a r*) = -(A_drift + B) r* - c`.
pub fn synthesize_controller(
    model: &LindbladModel,
    generators: &[ComplexMatrix],
    target: &CoherenceVector,
) -> Result<SynthesisResult> {
    let system = ControlledSystem::new(model, generators)?;
    synthesize_with(&system, target)
}

pub fn synthesize_with(system: &ControlledSystem, target: &CoherenceVector) -> Result<SynthesisResult> {
    let drift = system.drift();
    if target.n_qubits() != drift.n_qubits() {
        return Err(RelaxError::Dimension(format!(
            "target has {} components, system has {}",
            target.len(),
            drift.basis().len()
        )));
    }
    target.check_purity_bound()?;
    let r = target.as_vector();
    let rhs = -drift.velocity(r);
    let m = system.n_controls();
    let u = if m == 0 {
        DVector::zeros(0)
    } else {
        let columns: Vec<DVector<f64>> = system.directions.iter().map(|a| a * r).collect();
        let g = DMatrix::from_columns(&columns);
        let svd = linalg::svd(&g, true, true);
        let smax = svd.singular_values.max();
        if smax == 0.0 {
            DVector::zeros(m)
        } else {
            svd.solve(&rhs, smax * 1e-12)
                .map_err(|e| RelaxError::Domain(format!("least-squares solve failed: {e}")))?
        }
    };
    let u: Vec<f64> = u.iter().copied().collect();
    let residual = system.rep(&u)?.velocity(r).norm();
    let achieved_fixed_point = system.fixed_point(&u)?;
    Ok(SynthesisResult {
        u,
        residual,
        achieved_fixed_point,
    })
}

/// Closed-form one-spin controller `(u_x, u_y)` for the spin-operator
/// generators of [`ControlSpec::bloch_rotations`] with `u_z = 0`:
/// `u_x = -gamma2 y / z`, `u_y = gamma2 x / z`.
pub fn one_spin_controller(x: f64, y: f64, z: f64, gamma1: f64, gamma2: f64) -> Result<(f64, f64)> {
    if !(gamma1 > 0.0 && gamma2 > 0.0) {
        return Err(RelaxError::Domain(format!(
            "rates must be positive, got gamma1={gamma1}, gamma2={gamma2}"
        )));
    }
    if z.abs() <= 1e-9 {
        return Err(RelaxError::SingularTarget { z });
    }
    let residual = ((z - 0.5).powi(2) + gamma2 / gamma1 * (x * x + y * y) - 0.25).abs();
    if residual > 1e-6 {
        return Err(RelaxError::NotStabilizable { residual });
    }
    Ok((-gamma2 * y / z, gamma2 * x / z))
}

/// Singular values of the central-difference Jacobian of `u -> r_f(u)`.
pub fn jacobian_singular_values(
    system: &ControlledSystem,
    u0: &[f64],
    exec: Execution,
) -> Result<Vec<f64>> {
    let base = system.fixed_point(u0)?;
    let eig = linalg::hermitian_eigenvalues(&base.rho_f);
    let gap = eig
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if gap <= SPECTRAL_GAP_TOL {
        return Err(RelaxError::DegenerateSpectrum { gap });
    }
    let columns = exec.map_range(u0.len(), |a| {
        let mut plus = u0.to_vec();
        let mut minus = u0.to_vec();
        plus[a] += JACOBIAN_STEP;
        minus[a] -= JACOBIAN_STEP;
        Ok((system.fixed_vector(&plus)? - system.fixed_vector(&minus)?) / (2.0 * JACOBIAN_STEP))
    });
    let columns = columns.into_iter().collect::<Result<Vec<_>>>()?;
    let mut sv = linalg::singular_values(&DMatrix::from_columns(&columns));
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Local dimension of the stabilizable set at `u0`: numerical rank of the
/// fixed-point Jacobian.
pub fn manifold_dimension(model: &LindbladModel, generators: &[ComplexMatrix], u0: &[f64]) -> Result<usize> {
    manifold_dimension_with(model, generators, u0, Execution::default())
}

pub fn manifold_dimension_with(
    model: &LindbladModel,
    generators: &[ComplexMatrix],
    u0: &[f64],
    exec: Execution,
) -> Result<usize> {
    let system = ControlledSystem::new(model, generators)?;
    let sv = jacobian_singular_values(&system, u0, exec)?;
    Ok(numerical_rank(&sv))
}

pub fn numerical_rank(singular_values: &[f64]) -> usize {
    let max = singular_values.iter().copied().fold(0.0, f64::max);
    singular_values.iter().filter(|&&s| s > RANK_CUTOFF * max).count()
}

#[derive(Clone, Debug)]
pub struct ManifoldSample {
    pub amplitudes: Vec<Vec<f64>>,
    pub points: Vec<FixedPointResult>,
    /// Draws whose generator was not relaxing.
    pub skipped: usize,
}

/// Amplitude vectors drawn uniformly from `[-scale, scale]^m`, in draw order.
pub fn draw_amplitudes(n_samples: usize, n_controls: usize, scale: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_samples)
        .map(|_| {
            (0..n_controls)
                .map(|_| scale * (2.0 * rng.random::<f64>() - 1.0))
                .collect()
        })
        .collect()
}

/// Fixed points for `n_samples` random controls. Deterministic in `seed`
/// regardless of execution mode.
pub fn sample_manifold(
    model: &LindbladModel,
    generators: &[ComplexMatrix],
    n_samples: usize,
    amplitude_scale: f64,
    seed: u64,
) -> Result<ManifoldSample> {
    sample_manifold_with(model, generators, n_samples, amplitude_scale, seed, Execution::default())
}

pub fn sample_manifold_with(
    model: &LindbladModel,
    generators: &[ComplexMatrix],
    n_samples: usize,
    amplitude_scale: f64,
    seed: u64,
    exec: Execution,
) -> Result<ManifoldSample> {
    if n_samples == 0 {
        return Err(RelaxError::Domain("n_samples must be >= 1".into()));
    }
    let system = ControlledSystem::new(model, generators)?;
    let draws = draw_amplitudes(n_samples, generators.len(), amplitude_scale, seed);
    let solved = exec.map(&draws, |u| system.fixed_point(u));
    let mut sample = ManifoldSample {
        amplitudes: Vec::with_capacity(n_samples),
        points: Vec::with_capacity(n_samples),
        skipped: 0,
    };
    for (u, result) in draws.into_iter().zip(solved) {
        match result {
            Ok(fp) if fp.relaxing => {
                sample.amplitudes.push(u);
                sample.points.push(fp);
            }
            Ok(_) | Err(RelaxError::NotRelaxing { .. }) => sample.skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(sample)
}
