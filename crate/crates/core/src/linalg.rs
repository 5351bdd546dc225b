//! Dense linear-algebra helpers on top of nalgebra: matrix exponential,
//! spectra, conditioning and Hermitian functional calculus.

use nalgebra::{ComplexField, DMatrix, DVector, Dyn, Schur, SymmetricEigen, SVD};
use num_complex::Complex64;

// Higham (2005) backward-error bounds for the [m/m] Padé approximants.
const THETA_3: f64 = 1.495585217958292e-2;
const THETA_5: f64 = 2.539_398_330_063_23e-1;
const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068;
const THETA_13: f64 = 5.371920351148152;

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE_9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Induced 1-norm (maximum absolute column sum).
pub fn norm1<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|v| v.clone().modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scaled<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, s: f64) -> DMatrix<T> {
    m * T::from_real(s)
}

/// Odd/even split `(U, V)` of a low-order Padé approximant from even powers.
fn pade_low<T: ComplexField<RealField = f64>>(a: &DMatrix<T>, b: &[f64]) -> (DMatrix<T>, DMatrix<T>) {
    let n = a.nrows();
    let ident = DMatrix::<T>::identity(n, n);
    let a2 = a * a;
    let mut power = ident.clone();
    let mut u = scaled(&ident, b[1]);
    let mut v = scaled(&ident, b[0]);
    for k in 1..b.len() / 2 {
        power = &power * &a2;
        u += scaled(&power, b[2 * k + 1]);
        v += scaled(&power, b[2 * k]);
    }
    (a * u, v)
}

fn pade_13<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> (DMatrix<T>, DMatrix<T>) {
    let b = &PADE_13;
    let n = a.nrows();
    let ident = DMatrix::<T>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (scaled(&a6, b[13]) + scaled(&a4, b[11]) + scaled(&a2, b[9]))
        + scaled(&a6, b[7])
        + scaled(&a4, b[5])
        + scaled(&a2, b[3])
        + scaled(&ident, b[1]);
    let u = a * u_inner;
    let v = &a6 * (scaled(&a6, b[12]) + scaled(&a4, b[10]) + scaled(&a2, b[8]))
        + scaled(&a6, b[6])
        + scaled(&a4, b[4])
        + scaled(&a2, b[2])
        + scaled(&ident, b[0]);
    (u, v)
}

/// Matrix exponential by scaling and squaring with a degree-adaptive Padé
/// approximant. Works for real and complex square matrices.
pub fn expm<T: ComplexField<RealField = f64>>(a: &DMatrix<T>) -> DMatrix<T> {
    assert!(a.is_square(), "expm of a non-square matrix");
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    let norm = norm1(a);
    let (u, v, squarings) = if norm < THETA_3 {
        let (u, v) = pade_low(a, &PADE_3);
        (u, v, 0)
    } else if norm < THETA_5 {
        let (u, v) = pade_low(a, &PADE_5);
        (u, v, 0)
    } else if norm < THETA_7 {
        let (u, v) = pade_low(a, &PADE_7);
        (u, v, 0)
    } else if norm < THETA_9 {
        let (u, v) = pade_low(a, &PADE_9);
        (u, v, 0)
    } else {
        let s = (norm / THETA_13).log2().ceil().max(0.0) as i32;
        let (u, v) = pade_13(&scaled(a, 2f64.powi(-s)));
        (u, v, s)
    };
    // r = (V - U)^{-1} (V + U)
    let numer = &v + &u;
    let denom = v - u;
    let mut result = denom
        .lu()
        .solve(&numer)
        .expect("Padé denominator is nonsingular for bounded norms");
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Eigenvalues of a general real matrix, ordered by decreasing real part
/// (ties by decreasing imaginary part).
// nalgebra's iterative decompositions run uncapped at machine-epsilon
// tolerance by default, which can stall on matrices with exact structural
// zeros. Retry with a bounded budget and progressively looser tolerance.
const TOLERANCES: [f64; 5] = [f64::EPSILON, 1e-14, 1e-13, 1e-12, 1e-10];

fn iteration_budget(n: usize) -> usize {
    1000 * n.max(1)
}

fn with_retries<R>(n: usize, what: &str, mut attempt: impl FnMut(f64, usize) -> Option<R>) -> R {
    let budget = iteration_budget(n);
    for &eps in &TOLERANCES {
        if let Some(r) = attempt(eps, budget) {
            return r;
        }
    }
    attempt(1e-8, 0).unwrap_or_else(|| panic!("{what} failed to converge"))
}

/// Schur form `Q T Q^dag`.
pub fn schur<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> Schur<T, Dyn> {
    with_retries(m.nrows(), "Schur decomposition", |eps, n| Schur::try_new(m.clone(), eps, n))
}

pub fn svd<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, u: bool, v: bool) -> SVD<T, Dyn, Dyn> {
    with_retries(m.nrows().max(m.ncols()), "SVD", |eps, n| SVD::try_new(m.clone(), u, v, eps, n))
}

pub fn singular_values<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> Vec<f64> {
    svd(m, false, false).singular_values.iter().copied().collect()
}

fn hermitian_eigen(m: &DMatrix<Complex64>) -> SymmetricEigen<Complex64, Dyn> {
    with_retries(m.nrows(), "Hermitian eigendecomposition", |eps, n| {
        SymmetricEigen::try_new(m.clone(), eps, n)
    })
}

pub fn spectrum(m: &DMatrix<f64>) -> Vec<Complex64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut eig: Vec<Complex64> = schur(m).complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    eig
}

/// Ratio of extreme singular values; `inf` for exactly singular input.
pub fn condition_number<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    let sv = singular_values(m);
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut ev: Vec<f64> = hermitian_eigen(m).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Principal square root of a positive-semidefinite Hermitian matrix;
/// slightly negative eigenvalues are clamped to zero.
pub fn psd_sqrt(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let eig = hermitian_eigen(m);
    let roots = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| Complex64::new(l.max(0.0).sqrt(), 0.0)),
    );
    let q = &eig.eigenvectors;
    q * DMatrix::from_diagonal(&roots) * q.adjoint()
}
