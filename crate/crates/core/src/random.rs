//! Random states, operators and damping models for sampling and property
//! checks. All draws go through a caller-supplied RNG so results are
//! reproducible from a seed.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::lindblad::LindbladModel;
use crate::operators::{embed, raising, trace, ComplexMatrix, Pauli};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    DMatrix::from_fn(dim, dim, |_, _| gaussian(rng))
}

/// Hermitian matrix from the Gaussian unitary ensemble, scaled by `scale`.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, scale: f64, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(dim, rng);
    (&g + g.adjoint()) * Complex64::new(0.5 * scale, 0.0)
}

/// Full-rank mixed state `G G^dag / Tr(G G^dag)`.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(dim, rng);
    let w = &g * g.adjoint();
    let tr = trace(&w);
    w / tr
}

pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<Complex64> {
    let v = DVector::from_fn(dim, |_, _| gaussian(rng));
    let norm = v.norm();
    v.unscale(norm)
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase fix).
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let qr = ginibre(dim, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Independent per-qubit `T1`/`T2` damping with random rates plus a random
/// Hermitian drift of norm up to `h_scale`.
pub fn random_damping_model<R: Rng + ?Sized>(n_qubits: usize, h_scale: f64, rng: &mut R) -> LindbladModel {
    let dim = 1usize << n_qubits;
    let mut dissipators = Vec::with_capacity(2 * n_qubits);
    for site in 0..n_qubits {
        let gamma1: f64 = rng.random_range(0.2..2.0);
        let gamma2 = gamma1 / 2.0 + rng.random_range(0.0..2.0);
        dissipators.push(embed(&raising(), site, n_qubits) * Complex64::new(gamma1.sqrt(), 0.0));
        let dephase = (gamma2 / 2.0 - gamma1 / 4.0).max(0.0).sqrt();
        dissipators.push(embed(&Pauli::Z.matrix(), site, n_qubits) * Complex64::new(dephase, 0.0));
    }
    let scale = rng.random_range(0.0..h_scale.max(f64::MIN_POSITIVE));
    let h = random_hermitian(dim, scale, rng);
    LindbladModel::new(n_qubits, h, dissipators).expect("random damping model is well formed")
}
