//! Two-qubit entanglement: pure-state entropy of entanglement, Wootters
//! concurrence and the entanglement of formation (in ebits).

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{RelaxError, Result};
use crate::linalg;
use crate::operators::{kron, partial_trace, validate_density, ComplexMatrix, Pauli};

/// Eigenvalues of `rho rho~` below this are treated as zero.
pub const CLAMP_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct EntanglementReport {
    pub concurrence: f64,
    /// Entanglement of formation in ebits.
    pub eof: f64,
    /// Square roots of the eigenvalues of `rho rho~`, descending.
    pub spin_flip_eigenvalues: [f64; 4],
}

/// Base-2 binary entropy with `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(p) + term(1.0 - p)
}

pub fn eof_from_concurrence(c: f64) -> f64 {
    let c = c.clamp(0.0, 1.0);
    binary_entropy((1.0 + (1.0 - c * c).sqrt()) / 2.0)
}

/// Von Neumann entropy (base 2) of either reduced state of a pure
/// bipartite state.
pub fn pure_state_entanglement(psi: &DVector<Complex64>, dims: (usize, usize)) -> Result<f64> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(RelaxError::InvalidState(format!("state norm is {norm}, expected 1")));
    }
    let rho = psi * psi.adjoint();
    let reduced = partial_trace(&rho, 0, dims)?;
    Ok(linalg::hermitian_eigenvalues(&reduced)
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum::<f64>()
        .max(0.0))
}

/// `(Y (x) Y) rho* (Y (x) Y)`.
pub fn spin_flip(rho: &ComplexMatrix) -> ComplexMatrix {
    let yy = kron(&Pauli::Y.matrix(), &Pauli::Y.matrix());
    &yy * rho.conjugate() * &yy
}

fn check_two_qubit(rho: &ComplexMatrix) -> Result<()> {
    if rho.nrows() != 4 || rho.ncols() != 4 {
        return Err(RelaxError::InvalidState(format!(
            "two-qubit state must be 4x4, got {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    validate_density(rho, 1e-10)
}

pub fn spin_flip_eigenvalues(rho: &ComplexMatrix) -> Result<[f64; 4]> {
    check_two_qubit(rho)?;
    let product = rho * spin_flip(rho);
    let (_, t) = linalg::schur(&product).unpack();
    let mut lambdas = [0.0; 4];
    for (i, l) in lambdas.iter_mut().enumerate() {
        let ev = t[(i, i)].re;
        *l = if ev < CLAMP_TOL { 0.0 } else { ev.sqrt() };
    }
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok(lambdas)
}

pub fn concurrence(rho: &ComplexMatrix) -> Result<f64> {
    let l = spin_flip_eigenvalues(rho)?;
    Ok((l[0] - l[1] - l[2] - l[3]).max(0.0))
}

pub fn entanglement_of_formation(rho: &ComplexMatrix) -> Result<EntanglementReport> {
    let spin_flip_eigenvalues = spin_flip_eigenvalues(rho)?;
    let l = &spin_flip_eigenvalues;
    let concurrence = (l[0] - l[1] - l[2] - l[3]).max(0.0);
    Ok(EntanglementReport {
        concurrence,
        eof: eof_from_concurrence(concurrence),
        spin_flip_eigenvalues,
    })
}
