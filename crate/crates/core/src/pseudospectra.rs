//! Builders that cast the epsilon-pseudospectral abscissa and radius as
//! eigenvalue-constrained problems, plus boundary sampling for plots.
//!
//! Both builders work with the squared family `sigma_min(A - zI)^2 - eps^2`
//! rather than `sigma_min - eps`: the squared form keeps second derivatives
//! globally bounded, which is what makes an analytic curvature bound
//! available in the first place. Starting points are eigenvalues of `A`,
//! which always lie strictly inside the pseudospectrum.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gammabound::{gershgorin_gamma_radius, times_i};
use crate::matfun::{hermitian_eig, spectral_norm, spectrum, CMatrix, MatrixFamily};
use crate::solver::Problem;

/// Which extreme point of the pseudospectrum to chase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// Largest real part: the pseudospectral abscissa.
    Rightmost,
    /// Smallest real part. The paper computes this quantity without naming
    /// it; we expose it as the leftmost real part.
    Leftmost,
    /// Largest modulus: the pseudospectral radius.
    Outermost,
}

/// A base matrix, a perturbation level, and a target functional.
#[derive(Debug, Clone)]
pub struct PseudospectrumSpec {
    pub a: CMatrix,
    pub epsilon: f64,
    pub target: Target,
}

impl PseudospectrumSpec {
    pub fn new(a: CMatrix, epsilon: f64, target: Target) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::InvalidArgument("matrix must be square".into()));
        }
        if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive and finite, got {epsilon}"
            )));
        }
        Ok(PseudospectrumSpec { a, epsilon, target })
    }
}

/// Smallest singular value of `A - zI`, computed as
/// `sqrt(lambda_min((A - zI)^* (A - zI)))` so everything funnels through the
/// same Hermitian eigensolver.
pub fn sigma_min(a: &CMatrix, z: Complex64) -> Result<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    for i in 0..n {
        m[(i, i)] -= z;
    }
    let gram = m.adjoint() * &m;
    let pair = hermitian_eig(&gram)?;
    Ok(pair.values[0].max(0.0).sqrt())
}

/// First element attaining the maximum of `key`; ties keep the earliest, so
/// the choice is deterministic given the eigensolver's output order.
fn argmax_by_key(values: &[Complex64], key: impl Fn(Complex64) -> f64) -> Complex64 {
    let mut best = values[0];
    let mut best_key = key(best);
    for &v in &values[1..] {
        let k = key(v);
        if k > best_key {
            best = v;
            best_key = k;
        }
    }
    best
}

/// The shifted-and-squared abscissa family
/// `A(w) = [A - (w_1 + i w_2) I]^* [A - (w_1 + i w_2) I] - eps^2 I`,
/// assembled from constant matrices since it is exactly quadratic in `w`.
fn abscissa_family(a: &CMatrix, epsilon: f64) -> MatrixFamily {
    let n = a.nrows();
    let eye = CMatrix::identity(n, n);
    let b0 = a.adjoint() * a - &eye * Complex64::from(epsilon * epsilon);
    let lin1 = -(a + a.adjoint());
    let lin2 = times_i(&(a - a.adjoint()));
    let two_eye = &eye * Complex64::from(2.0);
    let zero = CMatrix::zeros(n, n);
    MatrixFamily::quadratic(
        b0,
        vec![lin1, lin2],
        vec![vec![two_eye.clone(), zero.clone()], vec![zero, two_eye]],
    )
}

/// Problem for the rightmost (or leftmost) point of the pseudospectrum.
///
/// The family has constant block Hessian `2I`, so `gamma = 2` is a global
/// curvature bound. The start is the rightmost (resp. leftmost) eigenvalue
/// of `A`, where `lambda_min` of the family equals `-eps^2` exactly.
pub fn build_abscissa_problem(spec: &PseudospectrumSpec) -> Result<Problem> {
    let c = match spec.target {
        Target::Rightmost => DVector::from_vec(vec![1.0, 0.0]),
        Target::Leftmost => DVector::from_vec(vec![-1.0, 0.0]),
        Target::Outermost => {
            return Err(Error::InvalidArgument(
                "target Outermost belongs to the radius builder".into(),
            ))
        }
    };
    let eigenvalues = spectrum(&spec.a)?;
    let start = match spec.target {
        Target::Rightmost => argmax_by_key(&eigenvalues, |z| z.re),
        _ => argmax_by_key(&eigenvalues, |z| -z.re),
    };
    Ok(Problem {
        c,
        fam: abscissa_family(&spec.a, spec.epsilon),
        gamma: 2.0,
        omega0: DVector::from_vec(vec![start.re, start.im]),
    })
}

/// Problem for the outermost point, in polar parameters
/// `A(w) = (A - w_1 e^{i w_2} I)^* (A - w_1 e^{i w_2} I) - eps^2 I`.
///
/// `gamma` defaults to the Gershgorin bound, which dominates the block
/// Hessian over the whole feasible strip `w_1 <= ||A|| + eps`.
pub fn build_radius_problem(spec: &PseudospectrumSpec) -> Result<Problem> {
    if spec.target != Target::Outermost {
        return Err(Error::InvalidArgument(
            "radius builder expects target Outermost".into(),
        ));
    }
    let a = spec.a.clone();
    let n = a.nrows();
    let epsilon = spec.epsilon;
    let eye = CMatrix::identity(n, n);

    let eval = {
        let a = a.clone();
        let eye = eye.clone();
        move |w: &DVector<f64>| {
            let shift = Complex64::from_polar(w[0], w[1]);
            let m = &a - &eye * shift;
            m.adjoint() * &m - &eye * Complex64::from(epsilon * epsilon)
        }
    };
    // B(w) := e^{-i w_2} A recurs in every derivative block.
    let d_eval = {
        let a = a.clone();
        let eye = eye.clone();
        move |w: &DVector<f64>, j: usize| {
            let b = &a * Complex64::from_polar(1.0, -w[1]);
            match j {
                0 => &eye * Complex64::from(2.0 * w[0]) - (&b + b.adjoint()),
                _ => times_i(&((&b - b.adjoint()) * Complex64::from(w[0]))),
            }
        }
    };
    let dd_eval = {
        let a = a.clone();
        let eye = eye.clone();
        move |w: &DVector<f64>, k: usize, l: usize| {
            let b = &a * Complex64::from_polar(1.0, -w[1]);
            match (k, l) {
                (0, 0) => &eye * Complex64::from(2.0),
                (1, 1) => (&b + b.adjoint()) * Complex64::from(w[0]),
                _ => times_i(&(&b - b.adjoint())),
            }
        }
    };

    let eigenvalues = spectrum(&spec.a)?;
    let start = argmax_by_key(&eigenvalues, |z| z.norm());
    Ok(Problem {
        c: DVector::from_vec(vec![1.0, 0.0]),
        fam: MatrixFamily::new(2, n, eval, d_eval, dd_eval),
        gamma: gershgorin_gamma_radius(spectral_norm(&spec.a)?, epsilon),
        omega0: DVector::from_vec(vec![start.norm(), start.arg()]),
    })
}

/// Modulus and angle reported for a radius solution. The iteration may leave
/// `w_1` negative (the family is well defined there); the reported modulus is
/// `|w_1|` with the angle rotated by pi when a sign flip occurred.
pub fn radius_report(omega: &DVector<f64>) -> (f64, f64) {
    let (r, theta) = if omega[0] < 0.0 {
        (-omega[0], omega[1] + std::f64::consts::PI)
    } else {
        (omega[0], omega[1])
    };
    (r, theta.sin().atan2(theta.cos()))
}

/// Boundary points of the pseudospectrum along rays from the spectrum's
/// centroid: for each angle, the outermost radius where `sigma_min(A - zI)`
/// crosses `epsilon`, found by bisection to 1e-10. Angles with no crossing
/// are omitted.
pub fn boundary_samples(spec: &PseudospectrumSpec, num_angles: usize) -> Result<Vec<Complex64>> {
    if num_angles < 8 {
        return Err(Error::InvalidArgument(format!(
            "need at least 8 angles, got {num_angles}"
        )));
    }
    let eigenvalues = spectrum(&spec.a)?;
    let centroid = eigenvalues.iter().sum::<Complex64>() / Complex64::from(eigenvalues.len() as f64);
    let n = spec.a.nrows();
    let centered = &spec.a - CMatrix::identity(n, n) * centroid;
    // sigma_min(A - zI) >= |z - centroid| - ||A - centroid I||, so beyond
    // this radius every point is strictly outside.
    let r_max = spectral_norm(&centered)? + spec.epsilon + 0.1;

    let scan_steps = 64;
    let mut points = Vec::with_capacity(num_angles);
    for idx in 0..num_angles {
        let theta = 2.0 * std::f64::consts::PI * idx as f64 / num_angles as f64;
        let dir = Complex64::from_polar(1.0, theta);
        let sigma_at = |r: f64| sigma_min(&spec.a, centroid + dir * Complex64::from(r));

        // March inward until the first radius inside the set.
        let mut outside_r = r_max;
        let mut inside_r = None;
        for s in 1..=scan_steps {
            let r = r_max * (1.0 - s as f64 / scan_steps as f64);
            if sigma_at(r)? <= spec.epsilon {
                inside_r = Some(r);
                break;
            }
            outside_r = r;
        }
        let Some(mut lo) = inside_r else {
            continue;
        };
        let mut hi = outside_r;
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if sigma_at(mid)? <= spec.epsilon {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        points.push(centroid + dir * Complex64::from(0.5 * (lo + hi)));
    }
    Ok(points)
}
