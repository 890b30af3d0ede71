//! Fixed-point view of the iteration and convergence-rate diagnostics.
//!
//! Near a maximizer the iteration behaves like a fixed-point map whose
//! projected Jacobian on the tangent space of the constraint surface is
//! `(1/gamma)(gamma I - H_V)`, with `H_V` the Hessian of the eigenvalue
//! restricted to the orthogonal complement of its gradient. The singular
//! values of that matrix bound the asymptotic error-contraction ratio from
//! both sides; this module computes the bounds and the empirical ratios to
//! compare them against. The full (unprojected) Jacobian
//! `I + (1/gamma)[c grad^T (hess - gamma I) / (||c|| sqrt(r)) - hess]` is
//! never materialized: only its projection enters any testable claim.

use nalgebra::{DMatrix, DVector};

use crate::eigderiv;
use crate::error::{Error, Result};
use crate::matfun::{hermitian_eig, real_symmetric_eigenvalues, MatrixFamily};
use crate::solver::{Iterate, Problem};

/// Rate diagnostics at (or near) a converged point.
#[derive(Debug, Clone)]
pub struct RateDiagnostics {
    /// Projected Hessian `V^T hess(lambda_min) V`, size `(d-1) x (d-1)`.
    pub h_v: DMatrix<f64>,
    /// `sigma_min(gamma I - H_V) / gamma`: lower rate bound.
    pub predicted_lo: f64,
    /// `||gamma I - H_V|| / gamma`: upper rate bound.
    pub predicted_hi: f64,
    /// Consecutive error-norm ratios over the usable trace tail.
    pub empirical_ratios: Vec<f64>,
    /// `|u^T (omega_k - omega_star)| / ||V^T (omega_k - omega_star)||` over
    /// the usable trace tail; tends to zero as iterates approach tangentially.
    pub tangential_fractions: Vec<f64>,
}

/// The update rule written as a fixed-point map evaluated from scratch.
///
/// Reimplements the step directly from the closed-form expression so tests
/// can confirm it coincides with [`crate::solver::kkt_step`].
pub fn fixed_point_map(p: &Problem, omega: &DVector<f64>) -> Result<DVector<f64>> {
    let pair = hermitian_eig(&p.fam.eval(omega))?;
    eigderiv::ensure_simple(pair.gap, pair.values[0])?;
    let grad = eigderiv::grad_from_pair(&p.fam, omega, &pair);
    let radicand = grad.norm_squared() - 2.0 * p.gamma * pair.values[0];
    if !(radicand > 0.0) {
        return Err(Error::Degenerate {
            lambda: pair.values[0],
            grad_norm: grad.norm(),
        });
    }
    Ok(omega + (&p.c * (radicand.sqrt() / p.c.norm()) - &grad) / p.gamma)
}

/// Orthonormal basis for the subspace orthogonal to `g`, as the columns of a
/// `d x (d-1)` matrix. Deterministic for identical input.
pub fn orthonormal_complement(g: &DVector<f64>) -> Result<DMatrix<f64>> {
    let d = g.len();
    let norm = g.norm();
    if !(norm > 0.0) {
        return Err(Error::ZeroGradient);
    }
    // Columns of the Householder reflector that maps g onto the coordinate
    // axis with the largest component; every column except the pivot one is
    // orthogonal to g.
    let mut pivot = 0;
    for i in 1..d {
        if g[i].abs() > g[pivot].abs() {
            pivot = i;
        }
    }
    let sign = if g[pivot] >= 0.0 { 1.0 } else { -1.0 };
    let mut w = g.clone();
    w[pivot] += sign * norm;
    let w_norm_sq = w.norm_squared();
    let mut v = DMatrix::zeros(d, d - 1);
    let mut col = 0;
    for j in 0..d {
        if j == pivot {
            continue;
        }
        for i in 0..d {
            let identity = if i == j { 1.0 } else { 0.0 };
            v[(i, col)] = identity - 2.0 * w[i] * w[j] / w_norm_sq;
        }
        col += 1;
    }
    Ok(v)
}

/// Predicted contraction bounds from a projected Hessian: the extreme
/// absolute eigenvalues of `gamma I - H_V`, scaled by `1/gamma`. Invariant
/// under the choice of orthonormal complement.
pub fn rate_bounds(h_v: &DMatrix<f64>, gamma: f64) -> Result<(f64, f64)> {
    assert!(gamma > 0.0, "curvature bound must be positive");
    let k = h_v.nrows();
    if k == 0 {
        // One-dimensional parameter space: no tangential dynamics.
        return Ok((0.0, 0.0));
    }
    let shifted = DMatrix::identity(k, k) * gamma - h_v;
    let eig = real_symmetric_eigenvalues(&shifted)?;
    let lo = eig.iter().map(|x| x.abs()).fold(f64::MAX, f64::min) / gamma;
    let hi = eig.iter().map(|x| x.abs()).fold(0.0, f64::max) / gamma;
    Ok((lo, hi))
}

/// Projected Hessian and predicted rate bounds at `omega_star`.
pub fn projected_hessian(fam: &MatrixFamily, omega_star: &DVector<f64>, gamma: f64) -> Result<RateDiagnostics> {
    let derivs = eigderiv::derivatives(fam, omega_star)?;
    if !(derivs.grad.norm() > 0.0) {
        return Err(Error::ZeroGradient);
    }
    let v = orthonormal_complement(&derivs.grad)?;
    let h_v = project(&derivs.hess, &v);
    let (predicted_lo, predicted_hi) = rate_bounds(&h_v, gamma)?;
    Ok(RateDiagnostics {
        h_v,
        predicted_lo,
        predicted_hi,
        empirical_ratios: Vec::new(),
        tangential_fractions: Vec::new(),
    })
}

fn project(hess: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
    let h = v.transpose() * hess * v;
    (&h + h.transpose()) * 0.5
}

/// Errors against `omega_star`, with the unusable end of the trace trimmed:
/// distances below ~100x the floating-point noise of the reference say more
/// about the reference's own uncertainty than about the contraction.
fn usable_errors(trace: &[Iterate], omega_star: &DVector<f64>) -> Vec<f64> {
    let floor = 100.0 * 1e-15 * (1.0 + omega_star.norm());
    let mut errors: Vec<f64> = trace.iter().map(|it| (&it.omega - omega_star).norm()).collect();
    while errors.last().is_some_and(|&e| e < floor) {
        errors.pop();
    }
    errors
}

/// Consecutive error-norm ratios over the last `tail` usable iterates.
pub fn empirical_rate(trace: &[Iterate], omega_star: &DVector<f64>, tail: usize) -> Result<Vec<f64>> {
    if tail < 2 || trace.len() <= tail {
        return Err(Error::InsufficientTrace {
            len: trace.len(),
            tail,
        });
    }
    let errors = usable_errors(trace, omega_star);
    if errors.len() < 2 {
        return Err(Error::InsufficientTrace {
            len: errors.len(),
            tail,
        });
    }
    let start = errors.len().saturating_sub(tail);
    Ok(errors[start..].windows(2).map(|e| e[1] / e[0]).collect())
}

/// Ratio of the normal component to the tangential component of the error,
/// over the last `tail` usable iterates. The normal direction is
/// `grad_star / ||grad_star||`.
pub fn tangential_fractions(
    trace: &[Iterate],
    omega_star: &DVector<f64>,
    grad_star: &DVector<f64>,
    tail: usize,
) -> Result<Vec<f64>> {
    if !(grad_star.norm() > 0.0) {
        return Err(Error::ZeroGradient);
    }
    let u = grad_star / grad_star.norm();
    let v = orthonormal_complement(&u)?;
    let floor = 100.0 * 1e-15 * (1.0 + omega_star.norm());
    let mut fractions = Vec::new();
    for it in trace {
        let p = &it.omega - omega_star;
        if p.norm() < floor {
            continue;
        }
        let normal = u.dot(&p).abs();
        let tangential = (v.transpose() * &p).norm();
        fractions.push(if tangential > 0.0 { normal / tangential } else { f64::INFINITY });
    }
    let start = fractions.len().saturating_sub(tail);
    Ok(fractions[start..].to_vec())
}

/// Full diagnostics from a trace, using its final iterate as the reference
/// point. Ratios and fractions degrade gracefully to empty when the trace is
/// too short.
pub fn diagnostics_for_trace(
    fam: &MatrixFamily,
    gamma: f64,
    trace: &[Iterate],
    tail: usize,
) -> Result<RateDiagnostics> {
    let last = trace
        .last()
        .ok_or_else(|| Error::InvalidArgument("empty trace".into()))?;
    let derivs = eigderiv::derivatives(fam, &last.omega)?;
    if !(derivs.grad.norm() > 0.0) {
        return Err(Error::ZeroGradient);
    }
    let v = orthonormal_complement(&derivs.grad)?;
    let h_v = project(&derivs.hess, &v);
    let (predicted_lo, predicted_hi) = rate_bounds(&h_v, gamma)?;
    let empirical_ratios = empirical_rate(trace, &last.omega, tail).unwrap_or_default();
    let tangential_fractions =
        tangential_fractions(trace, &last.omega, &derivs.grad, tail).unwrap_or_default();
    Ok(RateDiagnostics {
        h_v,
        predicted_lo,
        predicted_hi,
        empirical_ratios,
        tangential_fractions,
    })
}
