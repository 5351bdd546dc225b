//! Lindblad generators in the coherence-vector picture.
//!
//! For a model with Hamiltonian `H` and dissipators `L_k` the master
//! equation
//!
//! ```text
//! d rho/dt = -i[H, rho] + sum_k (L_k rho L_k^dag - {L_k^dag L_k, rho}/2)
//! ```
//!
//! becomes the affine ODE `dr/dt = A r + B r + c`, with `A` (skew) coming
//! from `H` and `(B, c)` from the dissipators:
//!
//! ```text
//! A_ab = Re Tr(P_a L_H(P_b)) / N
//! B_ab = Re Tr(P_a L_D(P_b)) / N
//! c_a  = Re Tr(P_a L_D(1))   / N
//! ```

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{RelaxError, Result};
use crate::exec::Execution;
use crate::linalg;
use crate::operators::{
    density_from_coherence, hermiticity_defect, json, pauli_string_basis, CoherenceVector,
    ComplexMatrix, OperatorBasis, HELPER_TOL, MAX_QUBITS,
};

/// Eigenvalues of `A + B` must have real part below this to count as relaxing.
pub const ABSCISSA_TOL: f64 = 1e-10;
/// Above this condition number `A + B` is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);

#[derive(Clone, Debug)]
pub struct LindbladModel {
    n_qubits: usize,
    hamiltonian: ComplexMatrix,
    dissipators: Vec<ComplexMatrix>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    n_qubits: usize,
    hamiltonian: json::MatrixRows,
    #[serde(default)]
    dissipators: Vec<json::MatrixRows>,
}

impl LindbladModel {
    pub fn new(n_qubits: usize, hamiltonian: ComplexMatrix, dissipators: Vec<ComplexMatrix>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(RelaxError::model(
                "n_qubits",
                format!("must be in 1..={MAX_QUBITS}, got {n_qubits}"),
            ));
        }
        let dim = 1usize << n_qubits;
        let check = |m: &ComplexMatrix, field: String| {
            if m.nrows() != dim || m.ncols() != dim {
                Err(RelaxError::model(
                    field,
                    format!("is {}x{}, expected {dim}x{dim}", m.nrows(), m.ncols()),
                ))
            } else {
                Ok(())
            }
        };
        check(&hamiltonian, "hamiltonian".into())?;
        for (k, l) in dissipators.iter().enumerate() {
            check(l, format!("dissipators[{k}]"))?;
        }
        let defect = hermiticity_defect(&hamiltonian);
        if defect > HELPER_TOL {
            return Err(RelaxError::model(
                "hamiltonian",
                format!("not Hermitian (defect {defect:.3e})"),
            ));
        }
        Ok(LindbladModel {
            n_qubits,
            hamiltonian,
            dissipators,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.n_qubits == 0 || file.n_qubits > MAX_QUBITS {
            return Err(RelaxError::model(
                "n_qubits",
                format!("must be in 1..={MAX_QUBITS}, got {}", file.n_qubits),
            ));
        }
        let h = json::decode(&file.hamiltonian, "hamiltonian")?;
        let ls = file
            .dissipators
            .iter()
            .enumerate()
            .map(|(k, rows)| json::decode(rows, &format!("dissipators[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        Self::new(file.n_qubits, h, ls)
    }

    pub fn to_json(&self) -> String {
        let file = ModelFile {
            n_qubits: self.n_qubits,
            hamiltonian: json::encode(&self.hamiltonian),
            dissipators: self.dissipators.iter().map(json::encode).collect(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn dissipators(&self) -> &[ComplexMatrix] {
        &self.dissipators
    }

    /// Same dissipators, different Hamiltonian.
    pub fn with_hamiltonian(&self, hamiltonian: ComplexMatrix) -> Result<Self> {
        Self::new(self.n_qubits, hamiltonian, self.dissipators.clone())
    }

    pub fn hamiltonian_action(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        hamiltonian_action(&self.hamiltonian, rho)
    }

    pub fn dissipative_action(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(rho.nrows(), rho.ncols());
        for l in &self.dissipators {
            let ld = l.adjoint();
            let ldl = &ld * l;
            out += l * rho * &ld - (&ldl * rho + rho * &ldl) * Complex64::new(0.5, 0.0);
        }
        out
    }

    /// Full right-hand side of the master equation.
    pub fn generator(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        self.hamiltonian_action(rho) + self.dissipative_action(rho)
    }

    /// Affine representation over the canonical Pauli basis.
    pub fn affine(&self) -> Result<CoherenceRep> {
        build_affine(self, &pauli_string_basis(self.n_qubits)?)
    }
}

fn hamiltonian_action(h: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    (h * rho - rho * h) * MINUS_I
}

/// `dr/dt = (A + B) r + c` together with the basis it is written in.
#[derive(Clone, Debug)]
pub struct CoherenceRep {
    basis: OperatorBasis,
    hamiltonian_part: DMatrix<f64>,
    dissipative_part: DMatrix<f64>,
    offset: DVector<f64>,
}

impl CoherenceRep {
    pub fn basis(&self) -> &OperatorBasis {
        &self.basis
    }

    pub fn n_qubits(&self) -> usize {
        self.basis.n_qubits()
    }

    /// `A`, skew-symmetric.
    pub fn hamiltonian_part(&self) -> &DMatrix<f64> {
        &self.hamiltonian_part
    }

    /// `B`.
    pub fn dissipative_part(&self) -> &DMatrix<f64> {
        &self.dissipative_part
    }

    /// `c`.
    pub fn offset(&self) -> &DVector<f64> {
        &self.offset
    }

    /// `A + B`.
    pub fn linear_part(&self) -> DMatrix<f64> {
        &self.hamiltonian_part + &self.dissipative_part
    }

    /// Replace `A`, keeping `(B, c)`.
    pub fn with_hamiltonian_part(&self, hamiltonian_part: DMatrix<f64>) -> Self {
        assert_eq!(hamiltonian_part.shape(), self.hamiltonian_part.shape());
        CoherenceRep {
            hamiltonian_part,
            ..self.clone()
        }
    }

    /// `(A + B) r + c`.
    pub fn velocity(&self, r: &DVector<f64>) -> DVector<f64> {
        &self.hamiltonian_part * r + &self.dissipative_part * r + &self.offset
    }

    fn check(&self, r: &CoherenceVector) -> Result<()> {
        if r.n_qubits() != self.n_qubits() {
            return Err(RelaxError::Dimension(format!(
                "state has {} components, generator acts on {}",
                r.len(),
                self.basis.len()
            )));
        }
        Ok(())
    }
}

/// Columns of `m -> Re Tr(P_a f(P_b)) / N`.
fn project_superoperator<F>(basis: &OperatorBasis, f: F) -> DMatrix<f64>
where
    F: Fn(&ComplexMatrix) -> ComplexMatrix + Sync + Send,
{
    let d = basis.len();
    let norm = basis.dim() as f64;
    // small systems are faster on one thread
    let exec = if d >= 63 { Execution::default() } else { Execution::Sequential };
    let columns = exec.map(basis.elements(), |p| basis.project(&f(p)).unscale(norm));
    DMatrix::from_columns(&columns)
}

/// Matrix of the Hamiltonian flow `-i[H, .]` in coherence coordinates.
pub fn hamiltonian_matrix(h: &ComplexMatrix, basis: &OperatorBasis) -> DMatrix<f64> {
    project_superoperator(basis, |p| hamiltonian_action(h, p))
}

pub fn build_affine(model: &LindbladModel, basis: &OperatorBasis) -> Result<CoherenceRep> {
    if model.n_qubits() != basis.n_qubits() {
        return Err(RelaxError::Dimension(format!(
            "model acts on {} qubit(s), basis on {}",
            model.n_qubits(),
            basis.n_qubits()
        )));
    }
    let dim = basis.dim();
    let hamiltonian_part = hamiltonian_matrix(model.hamiltonian(), basis);
    let dissipative_part = project_superoperator(basis, |p| model.dissipative_action(p));
    let offset = basis
        .project(&model.dissipative_action(&ComplexMatrix::identity(dim, dim)))
        .unscale(dim as f64);
    Ok(CoherenceRep {
        basis: basis.clone(),
        hamiltonian_part,
        dissipative_part,
        offset,
    })
}

#[derive(Clone, Debug)]
pub struct RelaxDiagnostics {
    pub relaxing: bool,
    /// Largest real part in the spectrum of `A + B`.
    pub spectral_abscissa: f64,
    pub condition_number: f64,
    /// Eigenvalues of `A + B`, by decreasing real part.
    pub spectrum: Vec<Complex64>,
}

pub fn is_relaxing(rep: &CoherenceRep) -> RelaxDiagnostics {
    let m = rep.linear_part();
    let spectrum = linalg::spectrum(&m);
    let spectral_abscissa = spectrum.first().map_or(f64::NEG_INFINITY, |z| z.re);
    let condition_number = linalg::condition_number(&m);
    RelaxDiagnostics {
        relaxing: spectral_abscissa < -ABSCISSA_TOL && condition_number <= MAX_CONDITION,
        spectral_abscissa,
        condition_number,
        spectrum,
    }
}

#[derive(Clone, Debug)]
pub struct FixedPointResult {
    pub r_f: CoherenceVector,
    pub rho_f: ComplexMatrix,
    pub spectrum: Vec<Complex64>,
    pub condition_number: f64,
    pub relaxing: bool,
    /// `||(A + B) r_f + c||`.
    pub residual: f64,
}

/// Solve `(A + B) r_f = -c`.
pub fn fixed_point(rep: &CoherenceRep) -> Result<FixedPointResult> {
    let diag = is_relaxing(rep);
    let r = solve_fixed_point(rep, &diag)?;
    let residual = rep.velocity(&r).norm();
    let r_f = CoherenceVector::from_dvector(rep.n_qubits(), r);
    let rho_f = density_from_coherence(&r_f, rep.basis())?;
    Ok(FixedPointResult {
        r_f,
        rho_f,
        spectrum: diag.spectrum,
        condition_number: diag.condition_number,
        relaxing: diag.relaxing,
        residual,
    })
}

fn solve_fixed_point(rep: &CoherenceRep, diag: &RelaxDiagnostics) -> Result<DVector<f64>> {
    if diag.condition_number.is_nan() || diag.condition_number > MAX_CONDITION {
        return Err(RelaxError::NotRelaxing {
            condition_number: diag.condition_number,
            spectral_abscissa: diag.spectral_abscissa,
            spectrum: diag.spectrum.clone(),
        });
    }
    rep.linear_part()
        .lu()
        .solve(&(-rep.offset()))
        .ok_or_else(|| RelaxError::NotRelaxing {
            condition_number: f64::INFINITY,
            spectral_abscissa: diag.spectral_abscissa,
            spectrum: diag.spectrum.clone(),
        })
}

/// Exact affine flow over time `t`: `r(t) = M r(0) + v`, from the
/// exponential of the augmented generator `[[A + B, c], [0, 0]]`.
pub fn flow_map(rep: &CoherenceRep, t: f64) -> Result<(DMatrix<f64>, DVector<f64>)> {
    check_time(t)?;
    let d = rep.basis().len();
    let mut aug = DMatrix::zeros(d + 1, d + 1);
    aug.view_mut((0, 0), (d, d)).copy_from(&(rep.linear_part() * t));
    aug.view_mut((0, d), (d, 1)).copy_from(&(rep.offset() * t));
    let e = linalg::expm(&aug);
    Ok((e.view((0, 0), (d, d)).into_owned(), e.view((0, d), (d, 1)).column(0).into_owned()))
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(RelaxError::Domain(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// Closed-form propagator for a fixed generator; reusable across times
/// and initial states.
#[derive(Clone, Debug)]
pub struct Propagator {
    rep: CoherenceRep,
    fixed: Option<DVector<f64>>,
}

impl Propagator {
    pub fn new(rep: &CoherenceRep) -> Self {
        let diag = is_relaxing(rep);
        let fixed = if diag.relaxing {
            solve_fixed_point(rep, &diag).ok()
        } else {
            None
        };
        Propagator {
            rep: rep.clone(),
            fixed,
        }
    }

    /// `Some(r_f)` when the generator is relaxing.
    pub fn fixed_point(&self) -> Option<&DVector<f64>> {
        self.fixed.as_ref()
    }

    pub fn at(&self, r0: &CoherenceVector, t: f64) -> Result<CoherenceVector> {
        check_time(t)?;
        self.rep.check(r0)?;
        if t == 0.0 {
            return Ok(r0.clone());
        }
        let r = match &self.fixed {
            Some(r_f) => {
                let e = linalg::expm(&(self.rep.linear_part() * t));
                e * (r0.as_vector() - r_f) + r_f
            }
            None => {
                let (m, v) = flow_map(&self.rep, t)?;
                m * r0.as_vector() + v
            }
        };
        Ok(CoherenceVector::from_dvector(self.rep.n_qubits(), r))
    }
}

/// `r(t) = exp((A + B) t)(r0 - r_f) + r_f`; falls back to the augmented
/// affine exponential when the generator is not relaxing.
pub fn propagate(rep: &CoherenceRep, r0: &CoherenceVector, t: f64) -> Result<CoherenceVector> {
    check_time(t)?;
    Propagator::new(rep).at(r0, t)
}

/// Classical RK4 with a uniform step no larger than `dt`. Returns every
/// step including both endpoints.
pub fn integrate_rk4(
    rep: &CoherenceRep,
    r0: &CoherenceVector,
    t: f64,
    dt: f64,
) -> Result<Vec<(f64, CoherenceVector)>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(RelaxError::Domain(format!("step must be finite and > 0, got {dt}")));
    }
    check_time(t)?;
    rep.check(r0)?;
    let steps = ((t / dt) - 1e-9).ceil().max(0.0) as usize;
    let h = if steps == 0 { 0.0 } else { t / steps as f64 };
    let n = rep.n_qubits();
    let mut out = Vec::with_capacity(steps + 1);
    out.push((0.0, r0.clone()));
    let mut r = r0.as_vector().clone();
    for k in 1..=steps {
        let k1 = rep.velocity(&r);
        let k2 = rep.velocity(&(&r + &k1 * (0.5 * h)));
        let k3 = rep.velocity(&(&r + &k2 * (0.5 * h)));
        let k4 = rep.velocity(&(&r + &k3 * h));
        r += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let time = if k == steps { t } else { k as f64 * h };
        out.push((time, CoherenceVector::from_dvector(n, r.clone())));
    }
    Ok(out)
}
