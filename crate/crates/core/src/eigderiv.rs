//! Gradient and Hessian of the smallest eigenvalue of an analytic Hermitian
//! family at points where that eigenvalue is simple, plus a finite-difference
//! verification harness.
//!
//! With the ascending order of [`crate::matfun::EigenPair`], the smallest
//! eigenvalue sits at index 0 and the perturbation sums run over all other
//! indices. The formulas are invariant under eigenvector phase changes (each
//! term pairs a vector with its own conjugate), so no phase normalization is
//! applied.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matfun::{hermitian_eig, EigenPair, MatrixFamily};

/// Relative gap below which near-multiplicity triggers a warning. Points this
/// close to a multiple eigenvalue are harmless for the iteration but worth
/// surfacing.
pub const SIMPLICITY_WARN_TOL: f64 = 1e-8;

/// Relative gap below which the `1/(lambda_min - lambda_m)` terms are
/// meaningless and derivative evaluation fails with [`Error::NotSimple`].
pub const SIMPLICITY_HARD_FLOOR: f64 = 1e-12;

/// Gradient, Hessian, and simplicity gap of `lambda_min` at one point.
#[derive(Debug, Clone)]
pub struct EigDerivatives {
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
    pub gap: f64,
}

/// Relative errors of the analytic derivatives against central differences.
#[derive(Debug, Clone, Copy)]
pub struct DerivativeCheck {
    pub grad_err: f64,
    pub hess_err: f64,
}

fn simplicity_scale(lambda: f64) -> f64 {
    lambda.abs().max(1.0)
}

/// Fail below the hard floor, warn in the near-multiple band, pass otherwise.
pub(crate) fn ensure_simple(gap: f64, lambda: f64) -> Result<()> {
    let scale = simplicity_scale(lambda);
    if gap <= SIMPLICITY_HARD_FLOOR * scale {
        return Err(Error::NotSimple { gap });
    }
    if gap <= SIMPLICITY_WARN_TOL * scale {
        log::warn!("smallest eigenvalue nearly multiple (gap {gap:.3e}); derivatives may lose accuracy");
    }
    Ok(())
}

/// Gradient of `lambda_min` from an existing eigendecomposition.
pub(crate) fn grad_from_pair(fam: &MatrixFamily, omega: &DVector<f64>, pair: &EigenPair) -> DVector<f64> {
    let v = pair.vectors.column(0);
    DVector::from_fn(fam.dim_omega(), |j, _| {
        // v^* (dA/dw_j) v is real for Hermitian dA; the imaginary residue is
        // roundoff and gets discarded.
        (v.adjoint() * fam.d_eval(omega, j) * v)[(0, 0)].re
    })
}

/// Hessian of `lambda_min` from an existing eigendecomposition, symmetrized
/// as `(H + H^T)/2`.
pub(crate) fn hess_from_pair(fam: &MatrixFamily, omega: &DVector<f64>, pair: &EigenPair) -> DMatrix<f64> {
    let d = fam.dim_omega();
    let n = fam.dim_matrix();
    let v = pair.vectors.column(0);

    // b[j][m-1] = v_m^* (dA/dw_j) v for every other eigenvector v_m.
    let mut cross = vec![vec![Complex64::from(0.0); n - 1]; d];
    let mut quad = DMatrix::zeros(d, d);
    let mut deriv_times_v = Vec::with_capacity(d);
    for j in 0..d {
        deriv_times_v.push(fam.d_eval(omega, j) * v);
    }
    for (j, dv) in deriv_times_v.iter().enumerate() {
        for m in 1..n {
            cross[j][m - 1] = (pair.vectors.column(m).adjoint() * dv)[(0, 0)];
        }
    }
    for k in 0..d {
        for l in 0..d {
            let mut sum = (v.adjoint() * fam.dd_eval(omega, k, l) * v)[(0, 0)].re;
            for m in 1..n {
                let denom = pair.values[0] - pair.values[m];
                sum += 2.0 * (cross[k][m - 1].conj() * cross[l][m - 1]).re / denom;
            }
            quad[(k, l)] = sum;
        }
    }

    let asym = (&quad - quad.transpose()).norm();
    debug_assert!(
        asym <= 1e-10 * quad.norm().max(1.0),
        "Hessian asymmetry {asym:.3e} exceeds roundoff budget"
    );
    let sym = (&quad + quad.transpose()) * 0.5;
    sym
}

/// Gradient of `lambda_min(A(omega))`.
///
/// Errors with [`Error::NotSimple`] when the simplicity gap is below the hard
/// floor relative to `max(1, |lambda_min|)`.
pub fn grad_lambda_min(fam: &MatrixFamily, omega: &DVector<f64>) -> Result<DVector<f64>> {
    let pair = hermitian_eig(&fam.eval(omega))?;
    ensure_simple(pair.gap, pair.values[0])?;
    Ok(grad_from_pair(fam, omega, &pair))
}

/// Hessian of `lambda_min(A(omega))`, using the full eigendecomposition with
/// all cross terms (no low-rank truncation).
pub fn hess_lambda_min(fam: &MatrixFamily, omega: &DVector<f64>) -> Result<DMatrix<f64>> {
    let pair = hermitian_eig(&fam.eval(omega))?;
    ensure_simple(pair.gap, pair.values[0])?;
    Ok(hess_from_pair(fam, omega, &pair))
}

/// Gradient and Hessian from a single eigendecomposition.
pub fn derivatives(fam: &MatrixFamily, omega: &DVector<f64>) -> Result<EigDerivatives> {
    let pair = hermitian_eig(&fam.eval(omega))?;
    ensure_simple(pair.gap, pair.values[0])?;
    Ok(EigDerivatives {
        grad: grad_from_pair(fam, omega, &pair),
        hess: hess_from_pair(fam, omega, &pair),
        gap: pair.gap,
    })
}

fn lambda_checked(fam: &MatrixFamily, omega: &DVector<f64>) -> Result<f64> {
    let pair = hermitian_eig(&fam.eval(omega))?;
    ensure_simple(pair.gap, pair.values[0])?;
    Ok(pair.values[0])
}

fn relative_norm_error(a_minus_b: f64, a: f64, b: f64) -> f64 {
    let scale = a.max(b);
    if a_minus_b == 0.0 {
        0.0
    } else {
        a_minus_b / scale
    }
}

/// Compare the analytic gradient and Hessian against central differences of
/// `lambda_min` and of the gradient, respectively.
///
/// Every stencil point must keep the smallest eigenvalue simple; otherwise
/// [`Error::NotSimple`] surfaces from the offending evaluation.
pub fn check_derivatives(fam: &MatrixFamily, omega: &DVector<f64>, step: f64) -> Result<DerivativeCheck> {
    assert!(step > 0.0, "finite-difference step must be positive");
    let d = fam.dim_omega();
    let derivs = derivatives(fam, omega)?;

    let mut grad_fd = DVector::zeros(d);
    let mut hess_fd = DMatrix::zeros(d, d);
    for j in 0..d {
        let mut plus = omega.clone();
        plus[j] += step;
        let mut minus = omega.clone();
        minus[j] -= step;
        grad_fd[j] = (lambda_checked(fam, &plus)? - lambda_checked(fam, &minus)?) / (2.0 * step);
        let gcol = (grad_lambda_min(fam, &plus)? - grad_lambda_min(fam, &minus)?) / (2.0 * step);
        hess_fd.set_column(j, &gcol);
    }
    hess_fd = (&hess_fd + hess_fd.transpose()) * 0.5;

    Ok(DerivativeCheck {
        grad_err: relative_norm_error((&derivs.grad - &grad_fd).norm(), derivs.grad.norm(), grad_fd.norm()),
        hess_err: relative_norm_error((&derivs.hess - &hess_fd).norm(), derivs.hess.norm(), hess_fd.norm()),
    })
}
