//! Cross-module properties on the pseudospectral problem families: analytic
//! derivatives against finite differences, curvature bounds, support
//! domination, fixed-point consistency, rate prediction, and oracle
//! agreement, all on seeded instances.

use eigopt::eigderiv::{check_derivatives, grad_lambda_min, hess_lambda_min};
use eigopt::error::Error;
use eigopt::gammabound::{assemble_block_hessian, gamma_from_block_hessian, gershgorin_gamma_radius, verify_gamma};
use eigopt::matfun::real_max_eigenvalue;
use eigopt::oracle::{grid_abscissa, grid_radius, sample_support_inequality, GridSpec};
use eigopt::pseudospectra::{
    build_abscissa_problem, build_radius_problem, radius_report, PseudospectrumSpec, Target,
};
use eigopt::ratediag;
use eigopt::sample;
use eigopt::solver::{solve, Problem, SolveStatus, SolverConfig};
use eigopt::spectral_norm;
use nalgebra::DVector;
use rand::Rng;

fn abscissa_problem(n: usize, seed: u64, epsilon: f64) -> Problem {
    let a = sample::random_real(n, seed);
    build_abscissa_problem(&PseudospectrumSpec::new(a, epsilon, Target::Rightmost).unwrap()).unwrap()
}

fn radius_problem(n: usize, seed: u64, epsilon: f64) -> Problem {
    let a = sample::random_real(n, seed);
    build_radius_problem(&PseudospectrumSpec::new(a, epsilon, Target::Outermost).unwrap()).unwrap()
}

/// Feasible-ish sample points near the spectrum for a problem whose start is
/// an eigenvalue: the start plus a modest perturbation.
fn sample_points(p: &Problem, count: usize, spread: f64, seed: u64) -> Vec<DVector<f64>> {
    let mut rng = sample::rng(seed);
    (0..count)
        .map(|_| &p.omega0 + sample::random_vector(&mut rng, 2, spread))
        .collect()
}

#[test]
fn derivative_oracle_on_both_families() {
    let abscissa = abscissa_problem(5, 501, 1.0);
    let radius = radius_problem(5, 501, 1.0);
    for (p, name) in [(&abscissa, "abscissa"), (&radius, "radius")] {
        let mut checked = 0;
        for (i, w) in sample_points(p, 200, 0.7, 777).into_iter().enumerate() {
            let check = match check_derivatives(&p.fam, &w, 1e-5) {
                Ok(c) => c,
                Err(Error::NotSimple { .. }) => continue,
                Err(e) => panic!("unexpected error at sample {i}: {e}"),
            };
            assert!(check.grad_err <= 1e-5, "{name} grad_err {:.3e} at sample {i}", check.grad_err);
            assert!(check.hess_err <= 1e-3, "{name} hess_err {:.3e} at sample {i}", check.hess_err);
            checked += 1;
            if checked == 100 {
                break;
            }
        }
        assert!(checked >= 100, "only {checked} usable samples for {name}");
    }
}

#[test]
fn abscissa_hessian_matches_finite_differences_tightly() {
    let p = abscissa_problem(5, 33, 1.0);
    let w = &p.omega0 + DVector::from_vec(vec![0.31, -0.17]);
    let check = check_derivatives(&p.fam, &w, 1e-4).unwrap();
    assert!(check.hess_err <= 1e-4, "hess_err {:.3e}", check.hess_err);
}

#[test]
fn eigenvalue_hessian_dominated_by_block_hessian_on_both_families() {
    let abscissa = abscissa_problem(6, 601, 1.0);
    for w in sample_points(&abscissa, 50, 1.0, 41) {
        let Ok(hess) = hess_lambda_min(&abscissa.fam, &w) else { continue };
        let curvature = real_max_eigenvalue(&hess).unwrap();
        let bound = gamma_from_block_hessian(&assemble_block_hessian(&abscissa.fam, &w).unwrap()).unwrap();
        assert!((bound - 2.0).abs() <= 1e-12, "abscissa block Hessian is the constant 2I");
        assert!(curvature <= bound + 1e-10);
    }

    let radius = radius_problem(6, 601, 1.0);
    let norm_a = spectral_norm(&sample::random_real(6, 601)).unwrap();
    let gershgorin = gershgorin_gamma_radius(norm_a, 1.0);
    assert_eq!(radius.gamma, gershgorin);
    let mut rng = sample::rng(42);
    let mut tested = 0;
    while tested < 50 {
        // Feasible strip: modulus within ||A|| + eps, any angle.
        let w = DVector::from_vec(vec![
            rng.random_range(0.0..norm_a + 1.0),
            rng.random_range(-3.2..3.2),
        ]);
        let Ok(hess) = hess_lambda_min(&radius.fam, &w) else { continue };
        let curvature = real_max_eigenvalue(&hess).unwrap();
        let bound = gamma_from_block_hessian(&assemble_block_hessian(&radius.fam, &w).unwrap()).unwrap();
        assert!(curvature <= bound + 1e-10, "pointwise bound failed: {curvature} vs {bound}");
        assert!(bound <= gershgorin + 1e-10, "Gershgorin must dominate: {bound} vs {gershgorin}");
        tested += 1;
    }
}

#[test]
fn verify_gamma_accepts_analytic_bounds_on_section_families() {
    let abscissa = abscissa_problem(5, 13, 1.0);
    let report = verify_gamma(&abscissa.fam, 2.0, &sample_points(&abscissa, 200, 1.5, 7));
    assert!(!report.exceeded, "max curvature {:.6} over gamma 2", report.max_curvature);
    assert!(report.evaluated >= 150);
}

#[test]
fn support_function_dominates_eigenvalue_on_trace() {
    let p = abscissa_problem(5, 77, 1.0);
    let res = solve(&p, &SolverConfig::default()).unwrap();
    assert_eq!(res.status, SolveStatus::Converged);
    for it in res.trace.iter().take(6) {
        let worst = sample_support_inequality(&p, it, 100, 1.0, 1000 + it.k as u64);
        assert!(worst >= -1e-10, "violation {worst:.3e} at iterate {}", it.k);
    }
}

#[test]
fn fixed_point_map_agrees_with_stepper_on_abscissa_family() {
    let p = abscissa_problem(5, 91, 1.0);
    let mut rng = sample::rng(8);
    let mut tested = 0;
    while tested < 100 {
        let w = &p.omega0 + sample::random_vector(&mut rng, 2, 0.8);
        let pair = eigopt::hermitian_eig(&p.fam.eval(&w)).unwrap();
        if pair.values[0] > 0.0 {
            continue;
        }
        let grad = match grad_lambda_min(&p.fam, &w) {
            Ok(g) => g,
            Err(_) => continue,
        };
        let it = eigopt::Iterate {
            k: 0,
            omega: w.clone(),
            lambda: pair.values[0],
            grad,
            mu_plus: None,
            objective: 0.0,
            gap: pair.gap,
        };
        let (via_step, _) = eigopt::solver::kkt_step(&it, &p.c, p.gamma).unwrap();
        let via_map = ratediag::fixed_point_map(&p, &w).unwrap();
        assert!(
            (&via_map - &via_step).norm() <= 1e-14 * (1.0 + via_step.norm()),
            "map and step disagree at sample {tested}"
        );
        tested += 1;
    }
}

#[test]
fn converged_point_is_a_fixed_point() {
    let p = abscissa_problem(5, 91, 1.0);
    let cfg = SolverConfig {
        step_tol: 1e-14,
        ..SolverConfig::default()
    };
    let res = solve(&p, &cfg).unwrap();
    assert_eq!(res.status, SolveStatus::Converged);
    let f = ratediag::fixed_point_map(&p, &res.omega_star).unwrap();
    assert!((f - &res.omega_star).norm() <= 1e-10);
}

#[test]
fn rate_sandwich_and_tangential_approach_on_seeded_instances() {
    let a = sample::random_real(10, 2024);
    for target in [Target::Rightmost, Target::Outermost] {
        let spec = PseudospectrumSpec::new(a.clone(), 1.0, target).unwrap();
        let p = match target {
            Target::Outermost => build_radius_problem(&spec).unwrap(),
            _ => build_abscissa_problem(&spec).unwrap(),
        };
        let cfg = SolverConfig {
            step_tol: 1e-10,
            max_iter: 4000,
            ..SolverConfig::default()
        };
        let res = solve(&p, &cfg).unwrap();
        assert_eq!(res.status, SolveStatus::Converged);
        assert!(res.gamma_violations.is_empty());

        // Reference point from a tighter run of the same deterministic
        // iteration; its own error sits orders of magnitude below the
        // analyzed trace's tail.
        let tight = SolverConfig {
            step_tol: 1e-14,
            max_iter: 6000,
            ..SolverConfig::default()
        };
        let omega_star = solve(&p, &tight).unwrap().omega_star;

        let diag = ratediag::projected_hessian(&p.fam, &omega_star, p.gamma).unwrap();
        assert!(diag.predicted_lo <= diag.predicted_hi);
        let ratios = ratediag::empirical_rate(&res.trace, &omega_star, 8).unwrap();
        let tail5: Vec<f64> = ratios[ratios.len() - 5..].to_vec();
        let mean = tail5.iter().sum::<f64>() / 5.0;
        if mean >= 0.01 {
            assert!(
                mean >= diag.predicted_lo - 0.05 && mean <= diag.predicted_hi + 0.05,
                "{target:?}: empirical mean {mean:.6} outside predicted [{:.6}, {:.6}]",
                diag.predicted_lo,
                diag.predicted_hi
            );
        }

        let grad_star = grad_lambda_min(&p.fam, &omega_star).unwrap();
        let fractions = ratediag::tangential_fractions(&res.trace, &omega_star, &grad_star, 20).unwrap();
        assert!(
            fractions.last().unwrap() <= &0.05,
            "{target:?}: final tangential fraction {}",
            fractions.last().unwrap()
        );

        // Monotone decay of the fractions, checked where the error norm is
        // large enough that the normal component sits above roundoff.
        let u = &grad_star / grad_star.norm();
        let v = ratediag::orthonormal_complement(&grad_star).unwrap();
        let scale = 1.0 + omega_star.norm();
        let visible: Vec<f64> = res
            .trace
            .iter()
            .filter_map(|it| {
                let pk = &it.omega - &omega_star;
                let norm = pk.norm();
                (norm >= 1e-4 * scale && norm <= 1e-1 * scale)
                    .then(|| u.dot(&pk).abs() / (v.transpose() * &pk).norm())
            })
            .collect();
        assert!(visible.len() >= 3, "{target:?}: expected a visible tangential tail");
        for pair in visible.windows(2) {
            assert!(
                pair[1] <= pair[0] * 1.01,
                "{target:?}: tangential fractions should decrease, got {} -> {}",
                pair[0],
                pair[1]
            );
        }
    }
}

#[test]
fn oracle_lower_bounds_and_matches_solver() {
    let a = sample::random_real(10, 2024);
    let eps = 1.0;
    let g = GridSpec::covering(&a, eps).unwrap();

    let p = build_abscissa_problem(&PseudospectrumSpec::new(a.clone(), eps, Target::Rightmost).unwrap()).unwrap();
    let res = solve(&p, &SolverConfig::default()).unwrap();
    let alpha_oracle = grid_abscissa(&a, eps, &g).unwrap();
    assert!(alpha_oracle <= res.omega_star[0] + 1e-6);
    assert!((alpha_oracle - res.omega_star[0]).abs() <= 1e-6);

    let p = build_radius_problem(&PseudospectrumSpec::new(a.clone(), eps, Target::Outermost).unwrap()).unwrap();
    let res = solve(&p, &SolverConfig { max_iter: 4000, ..SolverConfig::default() }).unwrap();
    let (rho, _) = radius_report(&res.omega_star);
    let rho_oracle = grid_radius(&a, eps, &g).unwrap();
    assert!((rho_oracle - rho).abs() <= 1e-6);
}

#[test]
fn undersized_gamma_is_surfaced_not_hidden() {
    let a = sample::random_real(5, 11);
    let spec = PseudospectrumSpec::new(a, 1.0, Target::Rightmost).unwrap();
    let mut p = build_abscissa_problem(&spec).unwrap();
    p.gamma = 0.5;
    let res = solve(&p, &SolverConfig { max_iter: 200, ..Default::default() }).unwrap();
    assert!(!res.gamma_violations.is_empty(), "infeasible iterates must be recorded");
    let worst = res.gamma_violations.iter().map(|v| v.lambda).fold(f64::MIN, f64::max);
    assert!(worst > 1e-3, "violations should be clearly visible, got {worst:.3e}");
}

#[test]
fn multiple_eigenvalue_at_start_aborts_cleanly() {
    // The identity matrix shifted by its own eigenvalue gives a family whose
    // smallest eigenvalue is permanently multiple.
    let a = eigopt::CMatrix::identity(2, 2);
    let spec = PseudospectrumSpec::new(a, 0.5, Target::Rightmost).unwrap();
    let p = build_abscissa_problem(&spec).unwrap();
    let res = solve(&p, &SolverConfig::default()).unwrap();
    assert_eq!(res.status, SolveStatus::NotSimpleAbort);
}
