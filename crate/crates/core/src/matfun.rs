//! Analytic Hermitian matrix families and the dense eigendecomposition
//! contract every other module relies on.
//!
//! Eigenvalues are sorted ascending, so the smallest eigenvalue and its
//! eigenvector always sit at index 0. Analyticity of a family cannot be
//! verified at runtime; supplying maps that are not real-analytic in the
//! parameter is a caller obligation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix used throughout the library.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex vector.
pub type CVector = DVector<Complex64>;

type EvalFn = dyn Fn(&DVector<f64>) -> CMatrix + Send + Sync;
type DEvalFn = dyn Fn(&DVector<f64>, usize) -> CMatrix + Send + Sync;
type DDEvalFn = dyn Fn(&DVector<f64>, usize, usize) -> CMatrix + Send + Sync;

/// An analytic Hermitian matrix-valued function of a real parameter vector,
/// together with its first and second partial derivative maps.
///
/// All three maps must be reentrant: they are invoked concurrently by the
/// sampling and grid machinery.
pub struct MatrixFamily {
    dim_omega: usize,
    dim_matrix: usize,
    eval: Box<EvalFn>,
    d_eval: Box<DEvalFn>,
    dd_eval: Box<DDEvalFn>,
}

impl MatrixFamily {
    /// Build a family from closures for the value and its first and second
    /// partial derivatives with respect to the parameter components.
    pub fn new<E, D1, D2>(dim_omega: usize, dim_matrix: usize, eval: E, d_eval: D1, dd_eval: D2) -> Self
    where
        E: Fn(&DVector<f64>) -> CMatrix + Send + Sync + 'static,
        D1: Fn(&DVector<f64>, usize) -> CMatrix + Send + Sync + 'static,
        D2: Fn(&DVector<f64>, usize, usize) -> CMatrix + Send + Sync + 'static,
    {
        assert!(dim_omega > 0, "parameter dimension must be positive");
        assert!(dim_matrix > 0, "matrix order must be positive");
        MatrixFamily {
            dim_omega,
            dim_matrix,
            eval: Box::new(eval),
            d_eval: Box::new(d_eval),
            dd_eval: Box::new(dd_eval),
        }
    }

    /// A constant family: `A(omega) = m` with vanishing derivatives.
    pub fn constant(dim_omega: usize, m: CMatrix) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "constant family needs a square matrix");
        let n = m.nrows();
        let zero = CMatrix::zeros(n, n);
        let zero2 = zero.clone();
        MatrixFamily::new(
            dim_omega,
            n,
            move |_| m.clone(),
            move |_, _| zero.clone(),
            move |_, _, _| zero2.clone(),
        )
    }

    /// A family that is quadratic in the parameter:
    /// `A(omega) = b0 + sum_j omega_j * lin[j] + 1/2 * sum_{k,l} omega_k omega_l quad[k][l]`.
    ///
    /// `quad` must be symmetric in its two indices; every supplied matrix must
    /// be Hermitian of the same order as `b0`.
    pub fn quadratic(b0: CMatrix, lin: Vec<CMatrix>, quad: Vec<Vec<CMatrix>>) -> Self {
        let d = lin.len();
        let n = b0.nrows();
        assert_eq!(b0.ncols(), n);
        assert_eq!(quad.len(), d);
        for row in &quad {
            assert_eq!(row.len(), d);
        }
        let lin2 = lin.clone();
        let quad2 = quad.clone();
        let quad3 = quad.clone();
        MatrixFamily::new(
            d,
            n,
            move |w| {
                let mut a = b0.clone();
                for j in 0..d {
                    a += &lin[j] * Complex64::from(w[j]);
                    for l in 0..d {
                        a += &quad[j][l] * Complex64::from(0.5 * w[j] * w[l]);
                    }
                }
                a
            },
            move |w, j| {
                let mut a = lin2[j].clone();
                for l in 0..d {
                    a += &quad2[j][l] * Complex64::from(w[l]);
                }
                a
            },
            move |_, k, l| quad3[k][l].clone(),
        )
    }

    /// Parameter dimension `d`.
    pub fn dim_omega(&self) -> usize {
        self.dim_omega
    }

    /// Matrix order `n`.
    pub fn dim_matrix(&self) -> usize {
        self.dim_matrix
    }

    /// Evaluate `A(omega)`.
    pub fn eval(&self, omega: &DVector<f64>) -> CMatrix {
        debug_assert_eq!(omega.len(), self.dim_omega);
        (self.eval)(omega)
    }

    /// Evaluate the first partial derivative with respect to component `j`.
    pub fn d_eval(&self, omega: &DVector<f64>, j: usize) -> CMatrix {
        debug_assert!(j < self.dim_omega);
        (self.d_eval)(omega, j)
    }

    /// Evaluate the second partial derivative with respect to components `k`, `l`.
    pub fn dd_eval(&self, omega: &DVector<f64>, k: usize, l: usize) -> CMatrix {
        debug_assert!(k < self.dim_omega && l < self.dim_omega);
        (self.dd_eval)(omega, k, l)
    }
}

/// Full eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigenPair {
    /// Eigenvalues sorted ascending.
    pub values: DVector<f64>,
    /// Orthonormal eigenvectors; column `j` pairs with `values[j]`.
    pub vectors: CMatrix,
    /// Simplicity gap of the smallest eigenvalue, `values[1] - values[0]`.
    /// Infinite for 1x1 matrices, which are always simple.
    pub gap: f64,
}

/// Iteration cap passed to the eigensolver; generous for dense QR-type sweeps.
fn eig_iteration_cap(n: usize) -> usize {
    10_000 + 200 * n * n
}

/// Eigendecomposition of a Hermitian matrix, sorted ascending.
///
/// The input is symmetrized as `(M + M^*)/2` first, which guards families
/// assembled by finite differences against roundoff asymmetry. Deterministic
/// for identical input bits.
pub fn hermitian_eig(m: &CMatrix) -> Result<EigenPair> {
    assert_eq!(m.nrows(), m.ncols(), "hermitian_eig needs a square matrix");
    let n = m.nrows();
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let h = (m + m.adjoint()) * Complex64::from(0.5);
    if n == 1 {
        return Ok(EigenPair {
            values: DVector::from_element(1, h[(0, 0)].re),
            vectors: CMatrix::identity(1, 1),
            gap: f64::INFINITY,
        });
    }
    let eig = nalgebra::SymmetricEigen::try_new(h, f64::EPSILON, eig_iteration_cap(n))
        .ok_or(Error::ConvergenceFailure)?;

    // Sort ascending; ties broken by original index so the result stays
    // deterministic for identical input bits.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .expect("eigenvalues of a finite Hermitian matrix are finite")
            .then(a.cmp(&b))
    });
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    let gap = values[1] - values[0];
    Ok(EigenPair { values, vectors, gap })
}

/// Smallest eigenvalue of `fam` at `omega`, with a unit eigenvector and the
/// simplicity gap.
pub fn lambda_min(fam: &MatrixFamily, omega: &DVector<f64>) -> Result<(f64, CVector, f64)> {
    let pair = hermitian_eig(&fam.eval(omega))?;
    Ok((pair.values[0], pair.vectors.column(0).into_owned(), pair.gap))
}

/// Spectral norm (largest singular value), computed as
/// `sqrt(lambda_max(M^* M))` to reuse the Hermitian eigensolver.
pub fn spectral_norm(m: &CMatrix) -> Result<f64> {
    let gram = m.adjoint() * m;
    let pair = hermitian_eig(&gram)?;
    Ok(pair.values[pair.values.len() - 1].max(0.0).sqrt())
}

/// Largest eigenvalue of a real symmetric matrix.
pub fn real_max_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    let vals = real_symmetric_eigenvalues(m)?;
    Ok(vals[vals.len() - 1])
}

/// Eigenvalues of a real symmetric matrix, sorted ascending.
pub(crate) fn real_symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<DVector<f64>> {
    assert_eq!(m.nrows(), m.ncols());
    let n = m.nrows();
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }
    if n == 0 {
        return Ok(DVector::zeros(0));
    }
    if n == 1 {
        return Ok(DVector::from_element(1, m[(0, 0)]));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::try_new(sym, f64::EPSILON, eig_iteration_cap(n))
        .ok_or(Error::ConvergenceFailure)?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    Ok(DVector::from_vec(vals))
}

/// Eigenvalues of a general (not necessarily Hermitian) complex matrix.
///
/// Used for spectrum-based starting points and grid regions; this is a Schur
/// sweep, not part of the Hermitian eigendecomposition contract.
pub fn spectrum(m: &CMatrix) -> Result<Vec<Complex64>> {
    assert_eq!(m.nrows(), m.ncols(), "spectrum needs a square matrix");
    let n = m.nrows();
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    // Real input goes through the real Schur form; complex input through the
    // complex one.
    let vals = if m.iter().all(|z| z.im == 0.0) {
        let re = DMatrix::<f64>::from_iterator(n, n, m.iter().map(|z| z.re));
        let schur = nalgebra::Schur::try_new(re, f64::EPSILON, eig_iteration_cap(n))
            .ok_or(Error::ConvergenceFailure)?;
        schur.complex_eigenvalues().iter().copied().collect()
    } else {
        let schur = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, eig_iteration_cap(n))
            .ok_or(Error::ConvergenceFailure)?;
        let (_, t) = schur.unpack();
        (0..n).map(|i| t[(i, i)]).collect()
    };
    Ok(vals)
}
