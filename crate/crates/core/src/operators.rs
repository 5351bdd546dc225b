//! Dense complex matrices and the Pauli-string operator basis behind the
//! coherence-vector representation.
//!
//! A density matrix on `n` qubits (dimension `N = 2^n`) is expanded as
//!
//! ```text
//! rho = (1 + sum_a r_a P_a) / N,     r_a = Tr(P_a rho)
//! ```
//!
//! over the `4^n - 1` non-identity Pauli strings `P_a`, which satisfy
//! `Tr(P_a P_b) = N delta_ab`. Site 1 is the leftmost tensor factor and
//! `|up>` is the `+1` eigenvector of `Z`.

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{RelaxError, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

pub const MAX_QUBITS: usize = 5;

/// Tolerance used by the hermiticity and trace helpers.
pub const HELPER_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> ComplexMatrix {
        let m = match self {
            Pauli::I => [ONE, ZERO, ZERO, ONE],
            Pauli::X => [ZERO, ONE, ONE, ZERO],
            Pauli::Y => [ZERO, -I, I, ZERO],
            Pauli::Z => [ONE, ZERO, ZERO, -ONE],
        };
        DMatrix::from_row_slice(2, 2, &m)
    }

    pub fn label(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_label(c: char) -> Option<Pauli> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    // (column, phase) of the single nonzero entry in row `row`
    fn entry(self, row: usize) -> (usize, Complex64) {
        match (self, row) {
            (Pauli::I, r) => (r, ONE),
            (Pauli::X, r) => (1 - r, ONE),
            (Pauli::Y, 0) => (1, -I),
            (Pauli::Y, _) => (0, I),
            (Pauli::Z, 0) => (0, ONE),
            (Pauli::Z, _) => (1, -ONE),
        }
    }
}

/// `|up><down| = (X + iY)/2`, the single-spin raising operator.
pub fn raising() -> ComplexMatrix {
    DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO])
}

/// `op` acting on `site` (0-based, site 0 leftmost) of an `n_qubits` register.
pub fn embed(op: &ComplexMatrix, site: usize, n_qubits: usize) -> ComplexMatrix {
    (0..n_qubits).fold(DMatrix::identity(1, 1), |acc, k| {
        if k == site {
            kron(&acc, op)
        } else {
            kron(&acc, &DMatrix::identity(2, 2))
        }
    })
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

/// Largest entrywise deviation from hermiticity.
pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    hermiticity_defect(m) <= tol
}

/// Hermitian, unit trace and positive semidefinite within `tol`.
pub fn validate_density(rho: &ComplexMatrix, tol: f64) -> Result<()> {
    if !rho.is_square() {
        return Err(RelaxError::Dimension(format!(
            "density matrix is {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let defect = hermiticity_defect(rho);
    if defect > tol {
        return Err(RelaxError::InvalidState(format!(
            "not Hermitian (defect {defect:.3e})"
        )));
    }
    let tr = trace(rho);
    if (tr - ONE).norm() > tol {
        return Err(RelaxError::InvalidState(format!(
            "trace is {:.6}{:+.6}i, expected 1",
            tr.re, tr.im
        )));
    }
    let min = crate::linalg::min_eigenvalue(rho);
    if min < -tol.max(1e-9) {
        return Err(RelaxError::InvalidState(format!(
            "negative eigenvalue {min:.3e}"
        )));
    }
    Ok(())
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
pub fn fidelity(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> f64 {
    let s = crate::linalg::psd_sqrt(rho);
    let inner = &s * sigma * &s;
    let root_trace: f64 = crate::linalg::hermitian_eigenvalues(&inner)
        .into_iter()
        .map(|l| l.max(0.0).sqrt())
        .sum();
    root_trace * root_trace
}

/// Pauli string stored as a signed permutation: row `r` has its only
/// nonzero entry `phases[r]` in column `cols[r]`.
#[derive(Clone, Debug)]
struct SparsePauli {
    cols: Vec<usize>,
    phases: Vec<Complex64>,
}

impl SparsePauli {
    fn new(sites: &[Pauli]) -> Self {
        let n = sites.len();
        let dim = 1usize << n;
        let mut cols = Vec::with_capacity(dim);
        let mut phases = Vec::with_capacity(dim);
        for row in 0..dim {
            let mut col = 0;
            let mut phase = ONE;
            for (k, p) in sites.iter().enumerate() {
                let bit = (row >> (n - 1 - k)) & 1;
                let (c, ph) = p.entry(bit);
                col |= c << (n - 1 - k);
                phase *= ph;
            }
            cols.push(col);
            phases.push(phase);
        }
        SparsePauli { cols, phases }
    }

    /// `Tr(P M)` in O(N).
    fn trace_product(&self, m: &ComplexMatrix) -> Complex64 {
        self.cols
            .iter()
            .zip(&self.phases)
            .enumerate()
            .map(|(row, (&col, &ph))| ph * m[(col, row)])
            .sum()
    }

    fn dense(&self) -> ComplexMatrix {
        let dim = self.cols.len();
        let mut m = DMatrix::zeros(dim, dim);
        for (row, (&col, &ph)) in self.cols.iter().zip(&self.phases).enumerate() {
            m[(row, col)] = ph;
        }
        m
    }
}

/// The `4^n - 1` non-identity Pauli strings on `n` qubits, in lexicographic
/// order of per-site indices (I=0, X=1, Y=2, Z=3), site 1 most significant.
///
/// Cloning is cheap; the element tables are shared.
#[derive(Clone, Debug)]
pub struct OperatorBasis {
    inner: Arc<BasisData>,
}

#[derive(Debug)]
struct BasisData {
    n_qubits: usize,
    labels: Vec<String>,
    elements: Vec<ComplexMatrix>,
    sparse: Vec<SparsePauli>,
}

static BASIS_CACHE: [OnceLock<OperatorBasis>; MAX_QUBITS + 1] = [const { OnceLock::new() }; MAX_QUBITS + 1];

pub fn pauli_string_basis(n_qubits: usize) -> Result<OperatorBasis> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(RelaxError::Dimension(format!(
            "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
        )));
    }
    Ok(BASIS_CACHE[n_qubits]
        .get_or_init(|| build_basis(n_qubits))
        .clone())
}

fn build_basis(n_qubits: usize) -> OperatorBasis {
    let count = 1usize << (2 * n_qubits);
    let mut labels = Vec::with_capacity(count - 1);
    let mut elements = Vec::with_capacity(count - 1);
    let mut sparse = Vec::with_capacity(count - 1);
    for index in 1..count {
        let sites: Vec<Pauli> = (0..n_qubits)
            .map(|k| Pauli::ALL[(index >> (2 * (n_qubits - 1 - k))) & 3])
            .collect();
        let sp = SparsePauli::new(&sites);
        labels.push(sites.iter().map(|p| p.label()).collect());
        elements.push(sp.dense());
        sparse.push(sp);
    }
    OperatorBasis {
        inner: Arc::new(BasisData {
            n_qubits,
            labels,
            elements,
            sparse,
        }),
    }
}

impl OperatorBasis {
    pub fn n_qubits(&self) -> usize {
        self.inner.n_qubits
    }

    /// Hilbert-space dimension `N`.
    pub fn dim(&self) -> usize {
        1 << self.inner.n_qubits
    }

    /// Number of basis elements, `N^2 - 1`.
    pub fn len(&self) -> usize {
        self.inner.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inner.elements.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.inner.labels
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.inner.elements
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        let upper = label.to_ascii_uppercase();
        self.inner.labels.iter().position(|l| *l == upper)
    }

    /// `Tr(P_a M)` for every basis element.
    pub fn traces(&self, m: &ComplexMatrix) -> Vec<Complex64> {
        self.inner.sparse.iter().map(|p| p.trace_product(m)).collect()
    }

    /// `Re Tr(P_a M)` for every basis element.
    pub fn project(&self, m: &ComplexMatrix) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.inner.sparse.iter().map(|p| p.trace_product(m).re))
    }

    /// `sum_a r_a P_a`.
    pub fn expand(&self, r: &[f64]) -> ComplexMatrix {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for (p, &ra) in self.inner.sparse.iter().zip(r) {
            if ra == 0.0 {
                continue;
            }
            for (row, (&col, &ph)) in p.cols.iter().zip(&p.phases).enumerate() {
                m[(row, col)] += ph * ra;
            }
        }
        m
    }

    fn check_dim(&self, m: &ComplexMatrix) -> Result<()> {
        if m.nrows() != self.dim() || m.ncols() != self.dim() {
            return Err(RelaxError::Dimension(format!(
                "matrix is {}x{}, basis acts on dimension {}",
                m.nrows(),
                m.ncols(),
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Real coherence vector `r_a = Tr(P_a rho)` over the Pauli basis of
/// `n_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherenceVector {
    n_qubits: usize,
    components: DVector<f64>,
}

impl CoherenceVector {
    pub fn new(n_qubits: usize, components: impl Into<Vec<f64>>) -> Result<Self> {
        let components = components.into();
        let want = (1usize << (2 * n_qubits)) - 1;
        if components.len() != want {
            return Err(RelaxError::Dimension(format!(
                "coherence vector for {n_qubits} qubit(s) needs {want} components, got {}",
                components.len()
            )));
        }
        Ok(CoherenceVector {
            n_qubits,
            components: DVector::from_vec(components),
        })
    }

    pub(crate) fn from_dvector(n_qubits: usize, components: DVector<f64>) -> Self {
        debug_assert_eq!(components.len(), (1usize << (2 * n_qubits)) - 1);
        CoherenceVector {
            n_qubits,
            components,
        }
    }

    /// The maximally mixed state.
    pub fn zeros(n_qubits: usize) -> Self {
        Self::from_dvector(n_qubits, DVector::zeros((1usize << (2 * n_qubits)) - 1))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.components.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.components
    }

    pub fn norm_squared(&self) -> f64 {
        self.components.norm_squared()
    }

    /// `Tr(rho^2) = (1 + |r|^2) / N`.
    pub fn purity(&self) -> f64 {
        (1.0 + self.norm_squared()) / self.dim() as f64
    }

    /// `|r|^2 <= N - 1`, with equality exactly for pure states.
    pub fn check_purity_bound(&self) -> Result<()> {
        let bound = (self.dim() - 1) as f64;
        let norm2 = self.norm_squared();
        if norm2 > bound + 1e-9 {
            return Err(RelaxError::InvalidState(format!(
                "|r|^2 = {norm2:.6} exceeds the purity bound {bound}"
            )));
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &CoherenceVector) -> f64 {
        (&self.components - &other.components).amax()
    }
}

impl std::ops::Index<usize> for CoherenceVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.components[i]
    }
}

/// `rho = (1 + sum_a r_a P_a) / N`. Positivity is not checked.
pub fn density_from_coherence(r: &CoherenceVector, basis: &OperatorBasis) -> Result<ComplexMatrix> {
    if r.n_qubits() != basis.n_qubits() {
        return Err(RelaxError::Dimension(format!(
            "coherence vector has {} components, basis has {}",
            r.len(),
            basis.len()
        )));
    }
    let dim = basis.dim();
    let mut rho = basis.expand(r.as_slice());
    for i in 0..dim {
        rho[(i, i)] += ONE;
    }
    Ok(rho.unscale(dim as f64))
}

pub fn coherence_from_density(rho: &ComplexMatrix, basis: &OperatorBasis) -> Result<CoherenceVector> {
    basis.check_dim(rho)?;
    let defect = hermiticity_defect(rho);
    if defect > 1e-10 {
        return Err(RelaxError::InvalidState(format!(
            "density matrix is not Hermitian (defect {defect:.3e})"
        )));
    }
    let tr = trace(rho);
    if (tr - ONE).norm() > 1e-10 {
        return Err(RelaxError::InvalidState(format!(
            "density matrix trace is {:.6}, expected 1",
            tr.re
        )));
    }
    Ok(CoherenceVector::from_dvector(basis.n_qubits(), basis.project(rho)))
}

/// Reduced state of subsystem `keep` (0 or 1) of a bipartite `d1 x d2` system.
pub fn partial_trace(rho: &ComplexMatrix, keep: usize, dims: (usize, usize)) -> Result<ComplexMatrix> {
    let (d1, d2) = dims;
    if rho.nrows() != d1 * d2 || rho.ncols() != d1 * d2 {
        return Err(RelaxError::Dimension(format!(
            "matrix is {}x{}, dims ({d1},{d2}) need {}",
            rho.nrows(),
            rho.ncols(),
            d1 * d2
        )));
    }
    match keep {
        0 => Ok(DMatrix::from_fn(d1, d1, |i, j| {
            (0..d2).map(|k| rho[(i * d2 + k, j * d2 + k)]).sum()
        })),
        1 => Ok(DMatrix::from_fn(d2, d2, |i, j| {
            (0..d1).map(|k| rho[(k * d2 + i, k * d2 + j)]).sum()
        })),
        other => Err(RelaxError::Dimension(format!(
            "subsystem index must be 0 or 1, got {other}"
        ))),
    }
}

/// JSON encoding of matrices: complex scalars as `[re, im]`, matrices as
/// row-major nested arrays.
pub mod json {
    use super::*;

    pub type MatrixRows = Vec<Vec<[f64; 2]>>;

    pub fn encode(m: &ComplexMatrix) -> MatrixRows {
        m.row_iter()
            .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
            .collect()
    }

    /// Decode a square matrix; errors name `field`.
    pub fn decode(rows: &[Vec<[f64; 2]>], field: &str) -> Result<ComplexMatrix> {
        let n = rows.len();
        if n == 0 {
            return Err(RelaxError::model(field, "matrix is empty"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(RelaxError::model(
                    format!("{field}[{i}]"),
                    format!("row has {} entries, expected {n}", row.len()),
                ));
            }
            if row.iter().flatten().any(|v| !v.is_finite()) {
                return Err(RelaxError::model(format!("{field}[{i}]"), "non-finite entry"));
            }
        }
        Ok(DMatrix::from_fn(n, n, |i, j| {
            Complex64::new(rows[i][j][0], rows[i][j][1])
        }))
    }
}
