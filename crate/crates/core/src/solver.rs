//! The core iteration: quadratic support functions, the closed-form KKT step
//! of the convex subproblem, and the solve loop with full trace recording.
//!
//! Each iterate `omega_k` carries a support function
//! `q_k(w) = lambda_k + grad_k . (w - omega_k) + (gamma/2) ||w - omega_k||^2`
//! that majorizes `lambda_min(A(w))` everywhere when `gamma` dominates the
//! curvature of the eigenvalue. Maximizing the linear objective over
//! `q_k <= 0` has a closed-form solution, which is the next iterate.

use nalgebra::DVector;

use crate::eigderiv::{grad_from_pair, SIMPLICITY_HARD_FLOOR, SIMPLICITY_WARN_TOL};
use crate::error::{Error, Result};
use crate::matfun::{hermitian_eig, EigenPair, MatrixFamily};
use crate::ratediag::{self, RateDiagnostics};

/// Default KKT radicand floor below which the step is declared degenerate.
pub const DEFAULT_RADICAND_FLOOR: f64 = 1e-20;

/// Trace-tail length used for the automatic end-of-solve diagnostics.
const DIAGNOSTICS_TAIL: usize = 8;

/// Problem data: maximize `c . omega` subject to
/// `lambda_min(fam(omega)) <= 0`.
pub struct Problem {
    /// Objective direction; must be nonzero.
    pub c: DVector<f64>,
    /// The constraint family.
    pub fam: MatrixFamily,
    /// Curvature bound dominating `lambda_max` of the eigenvalue Hessian at
    /// every simplicity point. Caller-supplied: the solver never infers it.
    pub gamma: f64,
    /// Feasible starting point.
    pub omega0: DVector<f64>,
}

impl Problem {
    /// Parameter dimension.
    pub fn dim(&self) -> usize {
        self.fam.dim_omega()
    }
}

/// Stopping and tolerance knobs for [`solve`].
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Relative step-size stopping tolerance.
    pub step_tol: f64,
    /// How far above zero `lambda_min` may sit and still count as feasible.
    pub feasibility_tol: f64,
    /// Maximum number of KKT steps.
    pub max_iter: usize,
    /// Radicand floor for declaring the step degenerate.
    pub radicand_floor: f64,
    /// Compute rate diagnostics from the final iterate after convergence.
    pub record_hessian_at_end: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            step_tol: 1e-12,
            feasibility_tol: 1e-10,
            max_iter: 500,
            radicand_floor: DEFAULT_RADICAND_FLOOR,
            record_hessian_at_end: true,
        }
    }
}

/// One recorded solver step: the point, its eigenvalue data, and the KKT
/// multiplier of the step taken from it (`None` when no step was taken).
#[derive(Debug, Clone)]
pub struct Iterate {
    pub k: usize,
    pub omega: DVector<f64>,
    pub lambda: f64,
    pub grad: DVector<f64>,
    pub mu_plus: Option<f64>,
    pub objective: f64,
    pub gap: f64,
}

/// Terminal state of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Relative step size fell below `step_tol`.
    Converged,
    /// `max_iter` steps were taken without meeting the step tolerance.
    MaxIterations,
    /// The KKT radicand vanished: gradient and eigenvalue are numerically
    /// zero, so the iteration is stalled by construction.
    DegenerateStationary,
    /// The smallest eigenvalue lost simplicity beyond repair at an iterate.
    NotSimpleAbort,
}

/// A new iterate came out infeasible by more than the feasibility tolerance,
/// evidence that the supplied curvature bound is too small.
#[derive(Debug, Clone, Copy)]
pub struct GammaViolation {
    /// Index of the offending iterate.
    pub k: usize,
    /// Observed `lambda_min` there.
    pub lambda: f64,
}

/// Everything a solve produced.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub omega_star: DVector<f64>,
    pub trace: Vec<Iterate>,
    pub diagnostics: Option<RateDiagnostics>,
    /// Iterations at which the new point was infeasible beyond tolerance.
    pub gamma_violations: Vec<GammaViolation>,
}

impl SolveResult {
    /// Objective value at the final point.
    pub fn objective(&self) -> f64 {
        self.trace.last().map(|it| it.objective).unwrap_or(f64::NAN)
    }

    /// Number of KKT steps taken.
    pub fn iterations(&self) -> usize {
        self.trace.len().saturating_sub(1)
    }
}

/// Evaluate the quadratic support function anchored at `it`.
pub fn support_value(it: &Iterate, gamma: f64, omega: &DVector<f64>) -> f64 {
    let delta = omega - &it.omega;
    it.lambda + it.grad.dot(&delta) + 0.5 * gamma * delta.norm_squared()
}

/// The closed-form KKT step from `it`: returns the maximizer of `c . w`
/// over `q_k(w) <= 0` together with the multiplier scale `mu_plus`.
///
/// The eigenvalue is clamped to `min(lambda, 0)` inside the radicand so that
/// feasibility noise of order `+1e-15` cannot shrink it below the gradient
/// norm squared.
pub fn kkt_step(it: &Iterate, c: &DVector<f64>, gamma: f64) -> Result<(DVector<f64>, f64)> {
    kkt_step_with_floor(it, c, gamma, DEFAULT_RADICAND_FLOOR)
}

pub(crate) fn kkt_step_with_floor(
    it: &Iterate,
    c: &DVector<f64>,
    gamma: f64,
    radicand_floor: f64,
) -> Result<(DVector<f64>, f64)> {
    let c_norm = c.norm();
    assert!(c_norm > 0.0, "objective direction must be nonzero");
    assert!(gamma > 0.0, "curvature bound must be positive");
    let radicand = it.grad.norm_squared() - 2.0 * gamma * it.lambda.min(0.0);
    if !(radicand > radicand_floor) {
        return Err(Error::Degenerate {
            lambda: it.lambda,
            grad_norm: it.grad.norm(),
        });
    }
    let mu_plus = c_norm / radicand.sqrt();
    let omega_next = &it.omega + (c * (1.0 / mu_plus) - &it.grad) / gamma;
    Ok((omega_next, mu_plus))
}

fn validate(p: &Problem, cfg: &SolverConfig) -> Result<()> {
    let d = p.fam.dim_omega();
    if p.c.len() != d || p.omega0.len() != d {
        return Err(Error::InvalidArgument(format!(
            "dimension mismatch: family expects {d}, got c of length {} and omega0 of length {}",
            p.c.len(),
            p.omega0.len()
        )));
    }
    if !(p.c.norm() > 0.0) {
        return Err(Error::InvalidArgument("objective direction is zero".into()));
    }
    if !(p.gamma > 0.0) || !p.gamma.is_finite() {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {}", p.gamma)));
    }
    if !(cfg.step_tol > 0.0) || !(cfg.feasibility_tol > 0.0) || !(cfg.radicand_floor > 0.0) {
        return Err(Error::InvalidArgument("tolerances must be positive".into()));
    }
    if cfg.max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    Ok(())
}

fn record(trace: &mut Vec<Iterate>, p: &Problem, omega: &DVector<f64>, pair: &EigenPair, grad: Option<DVector<f64>>) {
    let lambda = pair.values[0];
    let grad = grad.unwrap_or_else(|| {
        if pair.gap > SIMPLICITY_HARD_FLOOR * lambda.abs().max(1.0) {
            grad_from_pair(&p.fam, omega, pair)
        } else {
            DVector::from_element(p.dim(), f64::NAN)
        }
    });
    trace.push(Iterate {
        k: trace.len(),
        omega: omega.clone(),
        lambda,
        grad,
        mu_plus: None,
        objective: p.c.dot(omega),
        gap: pair.gap,
    });
}

/// Run the support-function iteration from `p.omega0`.
///
/// Every iterate is recorded. The returned status distinguishes step-size
/// convergence, the iteration cap, the degenerate stationary case, and loss
/// of simplicity. Infeasibility of a fresh iterate beyond `feasibility_tol`
/// is recorded as a [`GammaViolation`] (and logged) rather than aborting,
/// since it indicates a curvature bound that is too small.
pub fn solve(p: &Problem, cfg: &SolverConfig) -> Result<SolveResult> {
    validate(p, cfg)?;
    let fam = &p.fam;
    let mut omega = p.omega0.clone();
    let mut pair = hermitian_eig(&fam.eval(&omega))?;
    if pair.values[0] > cfg.feasibility_tol {
        return Err(Error::InfeasibleStart {
            lambda: pair.values[0],
            tol: cfg.feasibility_tol,
        });
    }

    let mut trace: Vec<Iterate> = Vec::new();
    let mut gamma_violations: Vec<GammaViolation> = Vec::new();
    let status = loop {
        let lambda = pair.values[0];
        let scale = lambda.abs().max(1.0);
        if pair.gap <= SIMPLICITY_HARD_FLOOR * scale {
            record(&mut trace, p, &omega, &pair, None);
            break SolveStatus::NotSimpleAbort;
        }
        if pair.gap <= SIMPLICITY_WARN_TOL * scale {
            log::warn!(
                "iterate {}: smallest eigenvalue nearly multiple (gap {:.3e})",
                trace.len(),
                pair.gap
            );
        }

        let grad = grad_from_pair(fam, &omega, &pair);
        let mut it = Iterate {
            k: trace.len(),
            omega: omega.clone(),
            lambda,
            grad,
            mu_plus: None,
            objective: p.c.dot(&omega),
            gap: pair.gap,
        };
        let (omega_next, mu_plus) = match kkt_step_with_floor(&it, &p.c, p.gamma, cfg.radicand_floor) {
            Ok(step) => step,
            Err(Error::Degenerate { .. }) => {
                trace.push(it);
                break SolveStatus::DegenerateStationary;
            }
            Err(e) => return Err(e),
        };
        it.mu_plus = Some(mu_plus);
        trace.push(it);

        let step_norm = (&omega_next - &omega).norm();
        let prev_norm = omega.norm();
        omega = omega_next;
        pair = hermitian_eig(&fam.eval(&omega))?;
        if pair.values[0] > cfg.feasibility_tol {
            log::warn!(
                "iterate {}: infeasible by {:.3e}; gamma = {:.6e} may violate the curvature bound",
                trace.len(),
                pair.values[0],
                p.gamma
            );
            gamma_violations.push(GammaViolation {
                k: trace.len(),
                lambda: pair.values[0],
            });
        }

        if step_norm <= cfg.step_tol * (1.0 + prev_norm) {
            record(&mut trace, p, &omega, &pair, None);
            break SolveStatus::Converged;
        }
        if trace.len() == cfg.max_iter {
            record(&mut trace, p, &omega, &pair, None);
            break SolveStatus::MaxIterations;
        }
    };

    let omega_star = trace.last().expect("trace is never empty").omega.clone();
    let diagnostics = if cfg.record_hessian_at_end && status == SolveStatus::Converged {
        match ratediag::diagnostics_for_trace(fam, p.gamma, &trace, DIAGNOSTICS_TAIL) {
            Ok(diag) => Some(diag),
            Err(e) => {
                log::warn!("rate diagnostics unavailable: {e}");
                None
            }
        }
    } else {
        None
    };

    Ok(SolveResult {
        status,
        omega_star,
        trace,
        diagnostics,
        gamma_violations,
    })
}
