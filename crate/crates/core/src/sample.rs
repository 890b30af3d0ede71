//! Seeded random generators for matrices, parameter vectors, and small stock
//! families. Every randomized test and the sampling operations go through
//! these so results are reproducible bit-for-bit given the same seed.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matfun::{CMatrix, MatrixFamily};

/// The deterministic RNG used throughout the library.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Real matrix with iid standard normal entries.
pub fn random_real(n: usize, seed: u64) -> CMatrix {
    let mut r = rng(seed);
    CMatrix::from_fn(n, n, |_, _| Complex64::from(r.sample::<f64, _>(StandardNormal)))
}

/// Complex matrix with iid standard normal real and imaginary parts.
pub fn random_complex(n: usize, seed: u64) -> CMatrix {
    let mut r = rng(seed);
    CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(r.sample(StandardNormal), r.sample(StandardNormal))
    })
}

/// Random Hermitian matrix, `(G + G^*)/2` for Gaussian `G`.
pub fn random_hermitian(n: usize, seed: u64) -> CMatrix {
    let g = random_complex(n, seed);
    (&g + g.adjoint()) * Complex64::from(0.5)
}

/// Random unitary matrix from the QR factorization of a Gaussian matrix.
pub fn random_unitary(n: usize, seed: u64) -> CMatrix {
    let g = random_complex(n, seed);
    let qr = g.qr();
    qr.q()
}

/// Vector with iid entries uniform in `[-half_width, half_width]`.
pub fn random_vector(r: &mut ChaCha8Rng, dim: usize, half_width: f64) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| r.random_range(-half_width..=half_width))
}

/// Unit vector drawn uniformly from the sphere.
pub fn random_direction(r: &mut ChaCha8Rng, dim: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| r.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-6 {
            return v / norm;
        }
    }
}

/// Upper Jordan block with the given eigenvalue.
pub fn jordan_block(n: usize, eigenvalue: Complex64) -> CMatrix {
    let mut m = CMatrix::from_diagonal_element(n, n, eigenvalue);
    for i in 0..n.saturating_sub(1) {
        m[(i, i + 1)] = Complex64::from(1.0);
    }
    m
}

/// The 1x1 family `A(omega) = omega_1^2 + omega_2^2 - 1`, whose constraint
/// set is the closed unit disk. Exactly quadratic with Hessian `2I`.
pub fn unit_disk_family() -> MatrixFamily {
    let two = CMatrix::from_element(1, 1, Complex64::from(2.0));
    MatrixFamily::quadratic(
        CMatrix::from_element(1, 1, Complex64::from(-1.0)),
        vec![CMatrix::zeros(1, 1), CMatrix::zeros(1, 1)],
        vec![
            vec![two.clone(), CMatrix::zeros(1, 1)],
            vec![CMatrix::zeros(1, 1), two],
        ],
    )
}

/// Diagonal family `A(omega) = diag(omega_1, 2 + omega_2)`: decoupled, with
/// constant derivatives and vanishing second derivatives.
pub fn decoupled_diag_family() -> MatrixFamily {
    let mut e1 = CMatrix::zeros(2, 2);
    e1[(0, 0)] = Complex64::from(1.0);
    let mut e2 = CMatrix::zeros(2, 2);
    e2[(1, 1)] = Complex64::from(1.0);
    let mut b0 = CMatrix::zeros(2, 2);
    b0[(1, 1)] = Complex64::from(2.0);
    MatrixFamily::quadratic(b0, vec![e1, e2], vec![vec![CMatrix::zeros(2, 2); 2]; 2])
}

/// Random Hermitian-valued family that is affine plus quadratic in `omega`,
/// with all coefficient matrices Hermitian. Useful as a synthetic test bed
/// where closed-form derivatives are trivially correct.
pub fn random_quadratic_family(n: usize, d: usize, seed: u64) -> MatrixFamily {
    let b0 = random_hermitian(n, seed);
    let lin: Vec<CMatrix> = (0..d).map(|j| random_hermitian(n, seed + 1 + j as u64)).collect();
    let mut quad = vec![vec![CMatrix::zeros(n, n); d]; d];
    for k in 0..d {
        for l in k..d {
            let m = random_hermitian(n, seed + 100 + (k * d + l) as u64);
            quad[k][l] = m.clone();
            quad[l][k] = m;
        }
    }
    MatrixFamily::quadratic(b0, lin, quad)
}
