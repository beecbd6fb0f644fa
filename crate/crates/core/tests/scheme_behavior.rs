//! Cross-module behavior: deterministic reductions of both schemes,
//! gradient-form consistency of the splitting step, coefficient scaling
//! relations, and multi-seed convergence smoke runs.

use stokl_core::{
    exact_prox, gradient_scheme_coefficients, run_trajectory, vecn, GradientOracle,
    GradientSchemeInputs, PreconditionerModel, Problem, ProxOracle, ProxScheme, Schedule, Scheme,
    SgdScheme,
};

/// Separately coded plain gradient descent, the deterministic reference.
fn reference_gd(problem: &Problem, x0: &[f64], alpha: f64, steps: usize) -> Vec<Vec<f64>> {
    let mut out = vec![x0.to_vec()];
    let mut x = x0.to_vec();
    for _ in 0..steps {
        let g = problem.gradient(&x).unwrap();
        x = x.iter().zip(&g).map(|(xi, gi)| xi - alpha * gi).collect();
        out.push(x.clone());
    }
    out
}

/// Separately coded deterministic forward-backward splitting.
fn reference_fb(problem: &Problem, x0: &[f64], gamma: f64, lambda: f64, steps: usize) -> Vec<Vec<f64>> {
    let split = problem.split.as_ref().unwrap();
    let mut out = vec![x0.to_vec()];
    let mut x = x0.to_vec();
    for _ in 0..steps {
        let g = problem.grad_smooth(&x).unwrap();
        let y: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - gamma * gi).collect();
        let p = exact_prox(&split.h, &y, gamma).unwrap();
        x = x
            .iter()
            .zip(&p)
            .map(|(xi, pi)| xi + lambda * (pi - xi))
            .collect();
        out.push(x.clone());
    }
    out
}

#[test]
fn zero_noise_sgd_matches_reference_gd() {
    let p = Problem::circle_quartic().unwrap();
    let scheme = Scheme::Sgd(SgdScheme {
        problem: &p,
        oracle: GradientOracle::additive_gaussian(Schedule::Zero).unwrap(),
        preconditioner: PreconditionerModel::Identity,
        alpha: Schedule::constant(0.02),
    });
    let rec = run_trajectory(&scheme, None, &[2.0, 0.0], 100, 5).unwrap();
    let reference = reference_gd(&p, &[2.0, 0.0], 0.02, 100);
    for (a, b) in rec.states.iter().zip(&reference) {
        assert!(vecn::dist(a, b) < 1e-12);
    }
}

#[test]
fn zero_noise_prox_matches_reference_fb() {
    let p = Problem::composite_quartic_quadratic(2, 20.0, vec![0.0, 0.0]).unwrap();
    let scheme = Scheme::Prox(ProxScheme {
        problem: &p,
        gradient_oracle: GradientOracle::additive_gaussian(Schedule::Zero).unwrap(),
        prox_oracle: ProxOracle::Exact,
        gamma: Schedule::constant(0.02),
        lambda: Schedule::constant(0.7),
    });
    let rec = run_trajectory(&scheme, None, &[2.0, -1.5], 100, 5).unwrap();
    let reference = reference_fb(&p, &[2.0, -1.5], 0.02, 0.7, 100);
    for (a, b) in rec.states.iter().zip(&reference) {
        assert!(vecn::dist(a, b) < 1e-12);
    }
}

#[test]
fn splitting_step_is_consistent_with_its_gradient_form() {
    // along a noisy run, ‖(x_{k+1} − x_k) + γλ f_k‖ vanishes identically
    let p = Problem::composite_quartic_quadratic(2, 4.0, vec![0.25, -0.25]).unwrap();
    let split = p.split.as_ref().unwrap();
    let scheme = ProxScheme {
        problem: &p,
        gradient_oracle: GradientOracle::additive_gaussian(Schedule::constant(0.3)).unwrap(),
        prox_oracle: ProxOracle::perturbed(Schedule::constant(0.01)).unwrap(),
        gamma: Schedule::constant(0.1),
        lambda: Schedule::constant(0.9),
    };
    let mut x = vec![1.0, 1.0];
    for k in 0..100 {
        let out = stokl_core::step_prox_gradient(&scheme, &x, k, 42, 0).unwrap();
        let f = out.implicit_gradient.clone().unwrap();
        let gamma = 0.1;
        let lambda = 0.9;
        let residual: f64 = out
            .next
            .iter()
            .zip(&x)
            .zip(&f)
            .map(|((next, xi), fi)| (next - xi) + gamma * lambda * fi)
            .map(|r| r * r)
            .sum::<f64>()
            .sqrt();
        assert!(residual < 1e-12, "k={k}: residual {residual}");
        x = out.next;
    }
    let _ = split;
}

#[test]
fn noise_scaling_scales_coefficients_quadratically_and_linearly() {
    // scaling σ by λ scales c by λ² and t by λ
    let base_sigma = 0.4f64;
    let coeff = |lam: f64| {
        let sigma = base_sigma * lam;
        let n = 2.0;
        gradient_scheme_coefficients(&GradientSchemeInputs {
            alpha: Schedule::constant(0.1),
            mu: Schedule::constant(1.0),
            nu: Schedule::constant(1.0),
            a: Schedule::Zero,
            b: Schedule::constant(1.0),
            c: Schedule::constant(n * sigma * sigma),
            bias: Schedule::Zero,
            beta: 1.0,
            rho_split: None,
        })
        .unwrap()
    };
    let base = coeff(1.0);
    for lam in [0.5, 2.0, 3.5] {
        let scaled = coeff(lam);
        for k in [0usize, 7, 31] {
            assert!(
                (scaled.noise.eval(k) - lam * lam * base.noise.eval(k)).abs() < 1e-12,
                "noise at λ={lam}"
            );
            assert!(
                (scaled.step_const.eval(k) - lam * base.step_const.eval(k)).abs() < 1e-12,
                "step const at λ={lam}"
            );
        }
    }
}

#[test]
fn circle_multiseed_smoke_converges() {
    // small-scale version of the continuum-critical-set experiment
    let p = Problem::circle_quartic().unwrap();
    let scheme = Scheme::Sgd(SgdScheme {
        problem: &p,
        oracle: GradientOracle::additive_gaussian(Schedule::power(0.5, 1.0)).unwrap(),
        preconditioner: PreconditionerModel::Identity,
        alpha: Schedule::constant(0.05),
    });
    let mut successes = 0;
    let seeds = 10u64;
    for seed in 0..seeds {
        let rec = run_trajectory(&scheme, None, &[2.0, 0.0], 2000, seed).unwrap();
        if *rec.dist_critical.last().unwrap() < 5e-2 {
            successes += 1;
        }
    }
    assert!(successes >= 9, "only {successes}/{seeds} converged");
}

#[test]
fn capped_quasi_newton_run_stays_finite_and_descends() {
    let p = Problem::circle_quartic().unwrap();
    let scheme = Scheme::Sgd(SgdScheme {
        problem: &p,
        oracle: GradientOracle::additive_gaussian(Schedule::power(0.2, 1.0)).unwrap(),
        preconditioner: PreconditionerModel::CappedBfgs {
            mu: Schedule::constant(0.5),
            nu: Schedule::constant(1.5),
        },
        alpha: Schedule::constant(0.02),
    });
    let rec = run_trajectory(&scheme, None, &[2.0, 0.0], 2000, 3).unwrap();
    assert!(!rec.diverged);
    assert!(*rec.dist_critical.last().unwrap() < 0.1);
}
