//! The two iteration schemes and the trajectory runner.
//!
//! Preconditioned stochastic gradient: `x_{k+1} = x_k − α_k U_k f_k`, with
//! the preconditioner drawn before the gradient at every iteration.
//!
//! Stochastic proximal gradient: `x_{k+1} = x_k + λ_k(P_k(x_k − γ_k g_k) − x_k)`,
//! which is the gradient form `x_{k+1} = x_k − γ_kλ_k f_k` for the implicit
//! estimate `f_k = γ_k^{-1}(x_k − P_k(x_k − γ_k g_k))`.

use serde::Serialize;

use crate::certifier::coefficients::DescentCoefficients;
use crate::error::{Error, Result};
use crate::oracles::{GradientOracle, PreconditionerModel, ProxOracle};
use crate::problems::Problem;
use crate::rng::{substream, Role};
use crate::schedule::Schedule;
use crate::vecn;

/// Iterates whose norm passes this are declared divergent and the run is
/// truncated with a flag; valid configurations never get here.
pub const DIVERGENCE_NORM: f64 = 1e6;

/// A fully wired preconditioned-gradient scheme.
#[derive(Debug, Clone)]
pub struct SgdScheme<'a> {
    pub problem: &'a Problem,
    pub oracle: GradientOracle,
    pub preconditioner: PreconditionerModel,
    pub alpha: Schedule,
}

/// A fully wired proximal-gradient scheme over a composite problem.
#[derive(Debug, Clone)]
pub struct ProxScheme<'a> {
    pub problem: &'a Problem,
    pub gradient_oracle: GradientOracle,
    pub prox_oracle: ProxOracle,
    pub gamma: Schedule,
    pub lambda: Schedule,
}

#[derive(Debug, Clone)]
pub enum Scheme<'a> {
    Sgd(SgdScheme<'a>),
    Prox(ProxScheme<'a>),
}

/// Result of one iteration.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub next: Vec<f64>,
    /// Implicit gradient estimate for the splitting scheme (`f_k` of the
    /// gradient form); `None` for the plain gradient scheme.
    pub implicit_gradient: Option<Vec<f64>>,
}

/// One step of `x_{k+1} = x_k − α_k U_k f_k`. The preconditioner substream
/// is consumed before the gradient substream.
pub fn step_preconditioned_sgd(
    scheme: &SgdScheme<'_>,
    x: &[f64],
    k: usize,
    seed: u64,
    replicate: u64,
) -> Result<Vec<f64>> {
    let alpha = scheme.alpha.eval(k);
    if alpha <= 0.0 {
        return Err(Error::config(format!("step size must be positive at k={k}")));
    }
    let mut rng_pre = substream(seed, replicate, k as u64, Role::Preconditioner);
    let op = scheme
        .preconditioner
        .sample(scheme.problem.dimension, k, &mut rng_pre)?;
    let mut rng_grad = substream(seed, replicate, k as u64, Role::Gradient);
    let f = scheme.oracle.sample(scheme.problem, x, k, &mut rng_grad)?;
    Ok(vecn::axpy(x, -alpha, &op.apply(&f)))
}

/// One step of the splitting scheme, returning the new iterate and the
/// implicit gradient estimate. Warns through an error only on broken
/// configuration; the step-size premise `γ_k < 1/β_H` is checked by the
/// certifier, not here.
pub fn step_prox_gradient(
    scheme: &ProxScheme<'_>,
    x: &[f64],
    k: usize,
    seed: u64,
    replicate: u64,
) -> Result<StepOutcome> {
    let gamma = scheme.gamma.eval(k);
    let lambda = scheme.lambda.eval(k);
    if gamma <= 0.0 {
        return Err(Error::config(format!("prox step must be positive at k={k}")));
    }
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::config(format!(
            "relaxation must lie in (0, 1] at k={k}, got {lambda}"
        )));
    }
    let split = scheme
        .problem
        .split
        .as_ref()
        .ok_or_else(|| Error::config("splitting scheme needs a composite problem"))?;
    let g_true = scheme.problem.grad_smooth(x)?;
    let mut rng_grad = substream(seed, replicate, k as u64, Role::Gradient);
    let g = scheme.gradient_oracle.sample_around(&g_true, k, &mut rng_grad);
    let y = vecn::axpy(x, -gamma, &g);
    let mut rng_prox = substream(seed, replicate, k as u64, Role::Prox);
    let p = scheme
        .prox_oracle
        .sample(&split.h, &y, gamma, k, &mut rng_prox)?;
    let displacement = vecn::sub(&p, x);
    let next = vecn::axpy(x, lambda, &displacement);
    let implicit = vecn::scale(&displacement, -1.0 / gamma);
    Ok(StepOutcome {
        next,
        implicit_gradient: Some(implicit),
    })
}

impl Scheme<'_> {
    pub fn problem(&self) -> &Problem {
        match self {
            Scheme::Sgd(s) => s.problem,
            Scheme::Prox(s) => s.problem,
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            Scheme::Sgd(_) => "sgd",
            Scheme::Prox(_) => "prox_gradient",
        }
    }

    /// Effective step factor multiplying the (implicit) gradient estimate:
    /// `α_k` for SGD, `γ_kλ_k` for the splitting scheme.
    pub fn effective_step(&self, k: usize) -> f64 {
        match self {
            Scheme::Sgd(s) => s.alpha.eval(k),
            Scheme::Prox(s) => s.gamma.eval(k) * s.lambda.eval(k),
        }
    }

    pub fn step(&self, x: &[f64], k: usize, seed: u64, replicate: u64) -> Result<StepOutcome> {
        match self {
            Scheme::Sgd(s) => Ok(StepOutcome {
                next: step_preconditioned_sgd(s, x, k, seed, replicate)?,
                implicit_gradient: None,
            }),
            Scheme::Prox(s) => step_prox_gradient(s, x, k, seed, replicate),
        }
    }
}

/// Per-iteration log of one run. Index `k` covers `0..=horizon` unless the
/// run was truncated; `step_norms[k] = ‖x_{k+1} − x_k‖` with a trailing zero
/// on the final logged state.
#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub scheme_id: String,
    pub problem_id: String,
    pub horizon: usize,
    pub states: Vec<Vec<f64>>,
    pub f_values: Vec<f64>,
    pub grad_norms: Vec<f64>,
    pub step_norms: Vec<f64>,
    pub dist_critical: Vec<f64>,
    /// Deterministic noise-floor bound `w_k` logged from the coefficients.
    pub noise_bound: Vec<f64>,
    /// Compounded growth products `p_k`.
    pub growth_product: Vec<f64>,
    /// Lyapunov values `L_k = (F(x_k) − F*)/p_{k−1} − Σ_{i<k} w_i/p_i`.
    pub lyapunov: Vec<f64>,
    pub diverged: bool,
    /// First index that left the documented working box, if any.
    pub box_exit: Option<usize>,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("empty trajectory")
    }

    /// Total movement `Σ‖x_{k+1} − x_k‖` over the logged steps.
    pub fn step_sum(&self) -> f64 {
        self.step_norms.iter().sum()
    }

    /// Movement over the last `window` steps.
    pub fn tail_step_sum(&self, window: usize) -> f64 {
        let n = self.step_norms.len();
        self.step_norms[n.saturating_sub(window)..].iter().sum()
    }
}

/// Run one seeded trajectory, logging every iteration. Deterministic given
/// `(scheme, coefficients, horizon, seed)`; divergence truncates the record
/// and sets the flag.
pub fn run_trajectory(
    scheme: &Scheme<'_>,
    coefficients: Option<&DescentCoefficients>,
    x0: &[f64],
    horizon: usize,
    seed: u64,
) -> Result<TrajectoryRecord> {
    if horizon == 0 {
        return Err(Error::config("horizon must be at least 1"));
    }
    let problem = scheme.problem();
    if x0.len() != problem.dimension {
        return Err(Error::Dimension {
            expected: problem.dimension,
            got: x0.len(),
        });
    }
    let zeros = DescentCoefficients::zeros();
    let coeffs = coefficients.unwrap_or(&zeros);

    let mut rec = TrajectoryRecord {
        seed,
        scheme_id: scheme.id().to_string(),
        problem_id: problem.id.clone(),
        horizon,
        states: Vec::with_capacity(horizon + 1),
        f_values: Vec::with_capacity(horizon + 1),
        grad_norms: Vec::with_capacity(horizon + 1),
        step_norms: Vec::with_capacity(horizon + 1),
        dist_critical: Vec::with_capacity(horizon + 1),
        noise_bound: Vec::with_capacity(horizon + 1),
        growth_product: Vec::with_capacity(horizon + 1),
        lyapunov: Vec::with_capacity(horizon + 1),
        diverged: false,
        box_exit: None,
    };

    let mut x = x0.to_vec();
    let mut p_prev = 1.0; // p_{k−1}, empty product at k = 0
    let mut weighted_noise_sum = 0.0; // Σ_{i<k} w_i / p_i

    for k in 0..=horizon {
        let f = problem.evaluate(&x)?;
        let grad = problem.gradient(&x)?;
        let w_k = coeffs.noise.eval(k);
        let u_k = coeffs.growth.eval(k);
        if u_k < 0.0 || w_k < 0.0 {
            return Err(Error::config(format!(
                "coefficient sequences must be nonnegative (k={k}: u={u_k}, w={w_k})"
            )));
        }
        let p_k = p_prev * (1.0 + u_k);
        let lyap = (f - problem.f_star) / p_prev - weighted_noise_sum;

        rec.states.push(x.clone());
        rec.f_values.push(f);
        rec.grad_norms.push(vecn::norm(&grad));
        rec.dist_critical.push(problem.distance_to_critical_set(&x)?);
        rec.noise_bound.push(w_k);
        rec.growth_product.push(p_k);
        rec.lyapunov.push(lyap);

        if rec.box_exit.is_none() && !problem.in_working_box(&x) {
            rec.box_exit = Some(k);
        }
        if k == horizon {
            rec.step_norms.push(0.0);
            break;
        }

        let outcome = scheme.step(&x, k, seed, 0)?;
        let next = outcome.next;
        if !vecn::all_finite(&next) || vecn::norm(&next) > DIVERGENCE_NORM {
            rec.step_norms.push(0.0);
            rec.diverged = true;
            break;
        }
        rec.step_norms.push(vecn::dist(&next, &x));
        x = next;
        weighted_noise_sum += w_k / p_k;
        p_prev = p_k;
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::exact_prox;

    fn quadratic_sgd(problem: &Problem, alpha: f64, sigma: Schedule) -> Scheme<'_> {
        Scheme::Sgd(SgdScheme {
            problem,
            oracle: GradientOracle::additive_gaussian(sigma).unwrap(),
            preconditioner: PreconditionerModel::Identity,
            alpha: Schedule::constant(alpha),
        })
    }

    #[test]
    fn deterministic_gradient_step() {
        let p = Problem::quadratic(2, 1.0).unwrap();
        let scheme = match quadratic_sgd(&p, 0.5, Schedule::Zero) {
            Scheme::Sgd(s) => s,
            _ => unreachable!(),
        };
        let next = step_preconditioned_sgd(&scheme, &[1.0, 0.0], 0, 1, 0).unwrap();
        assert_eq!(next, vec![0.5, 0.0]);
    }

    #[test]
    fn scaled_preconditioner_halves_needed_step() {
        let p = Problem::quadratic(2, 1.0).unwrap();
        let scheme = SgdScheme {
            problem: &p,
            oracle: GradientOracle::additive_gaussian(Schedule::Zero).unwrap(),
            preconditioner: PreconditionerModel::RandomDiagonal {
                mu: Schedule::constant(2.0),
                nu: Schedule::constant(2.0),
            },
            alpha: Schedule::constant(0.25),
        };
        let next = step_preconditioned_sgd(&scheme, &[1.0, 0.0], 0, 1, 0).unwrap();
        assert_eq!(next, vec![0.5, 0.0]);
    }

    #[test]
    fn sgd_step_mean_is_descent_direction() {
        let p = Problem::quadratic(2, 1.0).unwrap();
        let scheme = match quadratic_sgd(&p, 0.1, Schedule::constant(0.5)) {
            Scheme::Sgd(s) => s,
            _ => unreachable!(),
        };
        let x = [1.0, -0.5];
        let m = 100_000u64;
        let mut mean = vec![0.0, 0.0];
        for r in 0..m {
            let next = step_preconditioned_sgd(&scheme, &x, 0, 3, r).unwrap();
            for i in 0..2 {
                mean[i] += next[i] / m as f64;
            }
        }
        let expect = vecn::axpy(&x, -0.1, &p.gradient(&x).unwrap());
        // SE of each coordinate: 0.1·0.5/√m
        let tol = 4.0 * 0.05 / (m as f64).sqrt() * 2.0;
        assert!(vecn::dist(&mean, &expect) < tol, "mean {mean:?} vs {expect:?}");
    }

    fn composite_scheme(problem: &Problem, gamma: f64, lambda: f64) -> ProxScheme<'_> {
        ProxScheme {
            problem,
            gradient_oracle: GradientOracle::additive_gaussian(Schedule::Zero).unwrap(),
            prox_oracle: ProxOracle::Exact,
            gamma: Schedule::constant(gamma),
            lambda: Schedule::constant(lambda),
        }
    }

    #[test]
    fn prox_step_pure_shrinkage() {
        // G ≈ 0 is not in the catalog; emulate with μ_H = 1, z₀ = 0 and a
        // state where ∇G vanishes: x = (1, 1) has ∇G = 0 for the quartic.
        let p = Problem::composite_quartic_quadratic(2, 1.0, vec![0.0, 0.0]).unwrap();
        let scheme = composite_scheme(&p, 1.0, 1.0);
        let out = step_prox_gradient(&scheme, &[1.0, 1.0], 0, 1, 0).unwrap();
        // y = x − γ∇G(x) = x; prox shrinks y/(1+γμ) = (0.5, 0.5)
        assert!(vecn::dist(&out.next, &[0.5, 0.5]) < 1e-15);
        // Eq-form consistency: x⁺ − x = −γλ f
        let f = out.implicit_gradient.unwrap();
        let lhs = vecn::sub(&out.next, &[1.0, 1.0]);
        let rhs = vecn::scale(&f, -1.0);
        assert!(vecn::dist(&lhs, &rhs) < 1e-15);
    }

    #[test]
    fn prox_step_relaxation_interpolates() {
        let p = Problem::composite_quartic_quadratic(2, 1.0, vec![0.0, 0.0]).unwrap();
        let scheme = composite_scheme(&p, 1.0, 0.5);
        let out = step_prox_gradient(&scheme, &[1.0, 1.0], 0, 1, 0).unwrap();
        assert!(vecn::dist(&out.next, &[0.75, 0.75]) < 1e-15);
    }

    #[test]
    fn implicit_gradient_vanishes_at_fixed_point() {
        let p = Problem::composite_quartic_quadratic(2, 20.0, vec![0.0, 0.0]).unwrap();
        let split = p.split.as_ref().unwrap();
        // fixed point of the deterministic map: iterate it to convergence
        let gamma = 0.02;
        let mut x = vec![0.5, -0.5];
        for _ in 0..2000 {
            let g = p.grad_smooth(&x).unwrap();
            x = exact_prox(&split.h, &vecn::axpy(&x, -gamma, &g), gamma).unwrap();
        }
        let scheme = composite_scheme(&p, gamma, 1.0);
        let out = step_prox_gradient(&scheme, &x, 0, 1, 0).unwrap();
        assert!(vecn::norm(&out.implicit_gradient.unwrap()) < 1e-10);
    }

    #[test]
    fn same_seed_reproduces_bit_identical_records() {
        let p = Problem::circle_quartic().unwrap();
        let scheme = quadratic_sgd(&p, 0.05, Schedule::power(0.5, 1.0));
        let a = run_trajectory(&scheme, None, &[2.0, 0.0], 200, 9).unwrap();
        let b = run_trajectory(&scheme, None, &[2.0, 0.0], 200, 9).unwrap();
        assert_eq!(a.states, b.states);
        assert_eq!(a.f_values, b.f_values);
        assert_eq!(a.lyapunov, b.lyapunov);
    }

    #[test]
    fn zero_noise_contraction_matches_closed_form() {
        let p = Problem::quadratic(2, 1.0).unwrap();
        let scheme = quadratic_sgd(&p, 0.5, Schedule::Zero);
        let rec = run_trajectory(&scheme, None, &[2.0, 0.0], 40, 1).unwrap();
        let f0 = rec.f_values[0];
        for (k, f) in rec.f_values.iter().enumerate() {
            let expect = f0 * 0.25f64.powi(k as i32);
            assert!((f - expect).abs() <= 1e-12 * expect.max(1e-300), "k={k}");
        }
        assert!(!rec.diverged);
        assert_eq!(rec.len(), 41);
        // u = w = 0: p ≡ 1 and the Lyapunov values reduce to F − F*
        assert!(rec.growth_product.iter().all(|p| *p == 1.0));
        for k in 0..rec.len() {
            assert_eq!(rec.lyapunov[k], rec.f_values[k]);
        }
    }

    #[test]
    fn divergent_run_is_truncated_and_flagged() {
        let p = Problem::quadratic(2, 1.0).unwrap();
        // step far above 2/β: contraction factor |1 − αβ| = 29
        let scheme = quadratic_sgd(&p, 30.0, Schedule::Zero);
        let rec = run_trajectory(&scheme, None, &[2.0, 0.0], 50, 1).unwrap();
        assert!(rec.diverged);
        assert!(rec.len() < 51);
    }

    #[test]
    fn box_exit_recorded() {
        let p = Problem::circle_quartic().unwrap();
        let scheme = quadratic_sgd(&p, 1e-9, Schedule::Zero);
        let rec = run_trajectory(&scheme, None, &[3.0, 0.0], 3, 1).unwrap();
        assert_eq!(rec.box_exit, Some(0));
    }

    #[test]
    fn replicate_halves_share_the_marginal_law() {
        // summary statistic of one-step draws is invariant under which half
        // of the replicate indices produced it, within Monte-Carlo error
        let p = Problem::quadratic(2, 1.0).unwrap();
        let scheme = match quadratic_sgd(&p, 0.1, Schedule::constant(1.0)) {
            Scheme::Sgd(s) => s,
            _ => unreachable!(),
        };
        let x = [1.0, 1.0];
        let half = 5000u64;
        let stat = |range: std::ops::Range<u64>| {
            let vals: Vec<f64> = range
                .map(|r| {
                    let next = step_preconditioned_sgd(&scheme, &x, 0, 17, r).unwrap();
                    vecn::norm_sq(&vecn::sub(&next, &x))
                })
                .collect();
            vecn::mean_se(&vals)
        };
        let (m1, se1) = stat(0..half);
        let (m2, se2) = stat(half..2 * half);
        let se = (se1 * se1 + se2 * se2).sqrt();
        assert!((m1 - m2).abs() < 4.0 * se, "halves differ: {m1} vs {m2}");
    }
}
