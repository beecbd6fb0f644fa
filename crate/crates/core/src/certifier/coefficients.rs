//! Descent-inequality coefficient sequences and their calculators.
//!
//! The two one-step inequalities certified throughout the crate are
//!
//! ```text
//! E[F(x_{k+1}) − F* | x_k] ≤ (1 + u_k)(F(x_k) − F*) − v_k‖∇F(x_k)‖² + w_k
//! E[‖x_{k+1} − x_k‖ | x_k] ≤ r_k√(F(x_k) − F*) + s_k‖∇F(x_k)‖ + t_k
//! ```
//!
//! The calculators derive `(u, v, w, r, s, t)` from scheme parameters: one
//! for the preconditioned gradient scheme (unbiased and biased-oracle cases)
//! and one for the splitting scheme. Where the inputs are closed-form
//! schedules the derived sequences carry exact symbolic summability; where a
//! factor leaves the closed family (the splitting scheme's `ρ_k`), verdicts
//! come from two-sided closed-form envelopes instead.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::schedule::{Schedule, Summability, SymSeq};

type EvalFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// One nonnegative coefficient sequence: an evaluator plus whatever symbolic
/// summability evidence the construction could preserve.
#[derive(Clone)]
pub struct CoeffSeq {
    eval: EvalFn,
    /// Exact symbolic form, when the sequence stays in the closed family.
    pub symbolic: Option<SymSeq>,
    /// Summability verdict; exact when `symbolic` is set, envelope-derived
    /// otherwise.
    summability: Summability,
}

impl std::fmt::Debug for CoeffSeq {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CoeffSeq")
            .field("symbolic", &self.symbolic)
            .field("summability", &self.summability)
            .finish()
    }
}

impl CoeffSeq {
    pub fn from_symbolic(sym: SymSeq) -> Self {
        let s = sym.clone();
        CoeffSeq {
            eval: Arc::new(move |k| s.eval(k)),
            summability: sym.summability(),
            symbolic: Some(sym),
        }
    }

    pub fn from_schedule(s: &Schedule) -> Self {
        CoeffSeq::from_symbolic(SymSeq::from_schedule(s))
    }

    pub fn zero() -> Self {
        CoeffSeq::from_symbolic(SymSeq::zero())
    }

    pub fn constant(c: f64) -> Self {
        CoeffSeq::from_schedule(&Schedule::constant(c))
    }

    /// A sequence given only by an evaluator, with a verdict supplied by the
    /// caller's own envelope reasoning.
    pub fn from_fn(
        eval: impl Fn(usize) -> f64 + Send + Sync + 'static,
        summability: Summability,
    ) -> Self {
        CoeffSeq {
            eval: Arc::new(eval),
            symbolic: None,
            summability,
        }
    }

    pub fn eval(&self, k: usize) -> f64 {
        (self.eval)(k)
    }

    pub fn summability(&self) -> Summability {
        self.summability
    }

    /// Limit as `k → ∞` when the symbolic form is known.
    pub fn limit(&self) -> Option<f64> {
        self.symbolic.as_ref().map(|s| s.limit())
    }
}

/// The six coefficient sequences of the one-step descent inequalities.
#[derive(Debug, Clone)]
pub struct DescentCoefficients {
    /// `u_k`: relative growth allowed on the objective gap.
    pub growth: CoeffSeq,
    /// `v_k`: guaranteed gradient-squared decrease.
    pub gain: CoeffSeq,
    /// `w_k`: additive noise floor.
    pub noise: CoeffSeq,
    /// `r_k`: step-bound weight on `√(F − F*)`.
    pub step_gap: CoeffSeq,
    /// `s_k`: step-bound weight on `‖∇F‖`.
    pub step_grad: CoeffSeq,
    /// `t_k`: step-bound constant.
    pub step_const: CoeffSeq,
}

impl DescentCoefficients {
    /// All-zero coefficients (used when a run tracks no certificate).
    pub fn zeros() -> Self {
        DescentCoefficients {
            growth: CoeffSeq::zero(),
            gain: CoeffSeq::zero(),
            noise: CoeffSeq::zero(),
            step_gap: CoeffSeq::zero(),
            step_grad: CoeffSeq::zero(),
            step_const: CoeffSeq::zero(),
        }
    }

    /// Compounded growth products `p_k = Π_{i≤k}(1 + u_i)` on `0..=horizon`.
    pub fn growth_products(&self, horizon: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(horizon + 1);
        let mut p = 1.0;
        for k in 0..=horizon {
            p *= 1.0 + self.growth.eval(k);
            out.push(p);
        }
        out
    }
}

/// Inputs for the preconditioned-gradient coefficient calculator.
#[derive(Debug, Clone)]
pub struct GradientSchemeInputs {
    pub alpha: Schedule,
    pub mu: Schedule,
    pub nu: Schedule,
    /// Oracle moment coefficients `(a, b, c)` as schedules.
    pub a: Schedule,
    pub b: Schedule,
    pub c: Schedule,
    /// Conditional bias norm schedule; zero for unbiased oracles.
    pub bias: Schedule,
    /// Gradient Lipschitz constant of the objective.
    pub beta: f64,
    /// Margin split `ϱ ∈ (0,1)` for the biased case; `None` selects the
    /// unbiased case.
    pub rho_split: Option<f64>,
}

/// Coefficients for `x_{k+1} = x_k − α_k U_k f_k` under the second-moment
/// bound and the spectrum bound:
///
/// ```text
/// u_k = (β/2)·α_k²ν_k²a_k
/// v_k = α_k(μ_k − (β/2)·α_kν_k²b_k)            (unbiased)
/// v_k = α_k(ϱμ_k − (β/2)·α_kν_k²b_k)           (biased, ϱ ∈ (0,1))
/// w_k = (β/2)·α_k²ν_k²c_k [+ α_kν_k²/(4μ_k(1−ϱ))·bias_k²]
/// r_k = α_kν_k√a_k,  s_k = α_kν_k√b_k,  t_k = α_kν_k√c_k
/// ```
pub fn gradient_scheme_coefficients(
    inputs: &GradientSchemeInputs,
) -> Result<DescentCoefficients> {
    for (s, name) in [
        (&inputs.alpha, "alpha"),
        (&inputs.mu, "mu"),
        (&inputs.nu, "nu"),
        (&inputs.a, "a"),
        (&inputs.b, "b"),
        (&inputs.c, "c"),
        (&inputs.bias, "bias"),
    ] {
        s.validate_nonnegative(name)?;
    }
    if inputs.beta <= 0.0 {
        return Err(Error::config("gradient Lipschitz constant must be positive"));
    }
    if let Some(r) = inputs.rho_split {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::config("margin split must lie in (0, 1)"));
        }
    }
    let alpha = inputs.alpha.closed_form();
    let mu = inputs.mu.closed_form();
    let nu = inputs.nu.closed_form();
    let a = inputs.a.closed_form();
    let b = inputs.b.closed_form();
    let c = inputs.c.closed_form();
    let bias = inputs.bias.closed_form();
    let beta = inputs.beta;

    let alpha_nu = alpha.mul(&nu);
    let alpha2_nu2 = alpha_nu.square();

    let growth = SymSeq::from_term(alpha2_nu2.mul(&a).scale(0.5 * beta));
    let noise_base = SymSeq::from_term(alpha2_nu2.mul(&c).scale(0.5 * beta));
    let rho = inputs.rho_split.unwrap_or(1.0);
    let gain = SymSeq::from_term(alpha.mul(&mu).scale(rho)).add(&SymSeq::from_term(
        alpha.square().mul(&nu.square()).mul(&b).scale(-0.5 * beta),
    ));
    let noise = if let Some(r) = inputs.rho_split {
        // deterministic majorant of the bias penalty, valid because the
        // declared bias schedule equals the realized conditional bias norm
        let mu_inv = mu.recip()?;
        let extra = alpha
            .mul(&nu.square())
            .mul(&mu_inv)
            .mul(&bias.square())
            .scale(1.0 / (4.0 * (1.0 - r)));
        noise_base.add(&SymSeq::from_term(extra))
    } else {
        noise_base
    };
    let step_gap = SymSeq::from_term(alpha_nu.mul(&a.sqrt()));
    let step_grad = SymSeq::from_term(alpha_nu.mul(&b.sqrt()));
    let step_const = SymSeq::from_term(alpha_nu.mul(&c.sqrt()));

    Ok(DescentCoefficients {
        growth: CoeffSeq::from_symbolic(growth),
        gain: CoeffSeq::from_symbolic(gain),
        noise: CoeffSeq::from_symbolic(noise),
        step_gap: CoeffSeq::from_symbolic(step_gap),
        step_grad: CoeffSeq::from_symbolic(step_grad),
        step_const: CoeffSeq::from_symbolic(step_const),
    })
}

/// Inputs for the splitting-scheme coefficient calculator.
#[derive(Debug, Clone)]
pub struct SplittingSchemeInputs {
    pub gamma: Schedule,
    pub lambda: Schedule,
    /// Shared error coefficients of the gradient and prox approximations.
    pub d: Schedule,
    pub e: Schedule,
    pub beta_g: f64,
    pub beta_h: f64,
}

/// Auxiliary sequences of the splitting calculator, exposed because the
/// step-size premise is stated directly on them.
#[derive(Clone)]
pub struct SplittingAuxiliary {
    /// `ρ_k = (1 − β_H γ_k)^{-1}`.
    pub rho: EvalFn,
    /// `σ_k = (γ_kρ_k/2)((√2 + 1)β_H + 4βλ_kρ_k)`.
    pub sigma: EvalFn,
    /// `σ_k + d_k(σ_k + λ_kγ_k^{-1}β)`, which must stay below 1.
    pub margin_quantity: EvalFn,
}

/// Coefficients for `x_{k+1} = x_k + λ_k(P_k(x_k − γ_k g_k) − x_k)` with
/// `β = β_G + β_H`:
///
/// ```text
/// u_k = 0
/// v_k = γ_kλ_k(1 − σ_k(1 + d_k) − λ_kγ_k^{-1}βd_k)
/// w_k = γ_kλ_k e_k(σ_k + λ_kγ_k^{-1}β)
/// r_k = 0
/// s_k = γ_kλ_k(ρ_k + ρ_k√d_k + √d_k)
/// t_k = γ_kλ_k(ρ_k + 1)√e_k
/// ```
pub fn splitting_scheme_coefficients(
    inputs: &SplittingSchemeInputs,
) -> Result<(SplittingAuxiliary, DescentCoefficients)> {
    for (s, name) in [
        (&inputs.gamma, "gamma"),
        (&inputs.lambda, "lambda"),
        (&inputs.d, "d"),
        (&inputs.e, "e"),
    ] {
        s.validate_nonnegative(name)?;
    }
    if inputs.beta_g <= 0.0 || inputs.beta_h <= 0.0 {
        return Err(Error::config("both Lipschitz constants must be positive"));
    }
    let beta = inputs.beta_g + inputs.beta_h;
    let beta_h = inputs.beta_h;
    let gamma_sup = inputs.gamma.sup();
    if !(gamma_sup < 1.0 / beta_h) {
        return Err(Error::config(format!(
            "sup γ_k = {gamma_sup} must stay below 1/β_H = {}",
            1.0 / beta_h
        )));
    }
    if inputs.lambda.sup() > 1.0 {
        return Err(Error::config("sup λ_k must not exceed 1"));
    }

    let gamma = inputs.gamma.clone();
    let lambda = inputs.lambda.clone();
    let d = inputs.d.clone();
    let e = inputs.e.clone();

    let rho_fn: EvalFn = {
        let gamma = gamma.clone();
        Arc::new(move |k| 1.0 / (1.0 - beta_h * gamma.eval(k)))
    };
    let sigma_fn: EvalFn = {
        let gamma = gamma.clone();
        let lambda = lambda.clone();
        let rho = rho_fn.clone();
        Arc::new(move |k| {
            let g = gamma.eval(k);
            let r = rho(k);
            (g * r / 2.0) * ((2f64.sqrt() + 1.0) * beta_h + 4.0 * beta * lambda.eval(k) * r)
        })
    };
    let margin_fn: EvalFn = {
        let gamma = gamma.clone();
        let lambda = lambda.clone();
        let d = d.clone();
        let sigma = sigma_fn.clone();
        Arc::new(move |k| {
            let s = sigma(k);
            s + d.eval(k) * (s + lambda.eval(k) / gamma.eval(k) * beta)
        })
    };

    // ρ_k ∈ [1, ρ_max] on the whole horizon, which gives two-sided
    // closed-form envelopes for the sequences ρ_k enters.
    let rho_max = 1.0 / (1.0 - beta_h * gamma_sup);

    let gain = {
        let gamma = gamma.clone();
        let lambda = lambda.clone();
        let margin = margin_fn.clone();
        CoeffSeq::from_fn(
            move |k| {
                let gl = gamma.eval(k) * lambda.eval(k);
                gl * (1.0 - margin(k))
            },
            Summability::Unknown,
        )
    };
    let noise = {
        let gamma = gamma.clone();
        let lambda = lambda.clone();
        let e = e.clone();
        let sigma = sigma_fn.clone();
        // w = γλeσ + βλ²e: σ ∈ [0, σ_sup] gives a two-sided envelope
        let gl_e = SymSeq::from_term(
            gamma
                .closed_form()
                .mul(&lambda.closed_form())
                .mul(&e.closed_form()),
        );
        let lam2_e = SymSeq::from_term(lambda.closed_form().square().mul(&e.closed_form()));
        let hi = gl_e
            .scale(sigma_sup(beta, beta_h, gamma_sup, rho_max))
            .add(&lam2_e.scale(beta));
        let lo = lam2_e.scale(beta);
        let verdict = envelope_verdict(&hi, &lo);
        CoeffSeq::from_fn(
            move |k| {
                let gl = gamma.eval(k) * lambda.eval(k);
                gl * e.eval(k) * (sigma(k) + lambda.eval(k) / gamma.eval(k) * beta)
            },
            verdict,
        )
    };
    let step_grad = {
        let gamma = gamma.clone();
        let lambda = lambda.clone();
        let d = d.clone();
        let rho = rho_fn.clone();
        CoeffSeq::from_fn(
            move |k| {
                let gl = gamma.eval(k) * lambda.eval(k);
                let r = rho(k);
                let ds = d.eval(k).sqrt();
                gl * (r + r * ds + ds)
            },
            Summability::Unknown,
        )
    };
    let step_const = {
        let gamma = gamma.clone();
        let lambda = lambda.clone();
        let e = e.clone();
        let rho = rho_fn.clone();
        let gl_sqrt_e = SymSeq::from_term(
            gamma
                .closed_form()
                .mul(&lambda.closed_form())
                .mul(&e.closed_form().sqrt()),
        );
        let hi = gl_sqrt_e.scale(rho_max + 1.0);
        let lo = gl_sqrt_e.scale(2.0);
        let verdict = envelope_verdict(&hi, &lo);
        CoeffSeq::from_fn(
            move |k| {
                gamma.eval(k) * lambda.eval(k) * (rho(k) + 1.0) * e.eval(k).sqrt()
            },
            verdict,
        )
    };

    let aux = SplittingAuxiliary {
        rho: rho_fn,
        sigma: sigma_fn,
        margin_quantity: margin_fn,
    };
    let coeffs = DescentCoefficients {
        growth: CoeffSeq::zero(),
        gain,
        noise,
        step_gap: CoeffSeq::zero(),
        step_grad,
        step_const,
    };
    Ok((aux, coeffs))
}

fn sigma_sup(beta: f64, beta_h: f64, gamma_sup: f64, rho_max: f64) -> f64 {
    (gamma_sup * rho_max / 2.0) * ((2f64.sqrt() + 1.0) * beta_h + 4.0 * beta * rho_max)
}

/// Summability verdict from a nonnegative two-sided envelope
/// `lo_k ≤ seq_k ≤ hi_k`: a summable majorant proves yes, a divergent
/// minorant proves no.
fn envelope_verdict(hi: &SymSeq, lo: &SymSeq) -> Summability {
    if hi.summability() == Summability::Yes {
        Summability::Yes
    } else if lo.summability() == Summability::No {
        Summability::No
    } else {
        Summability::Unknown
    }
}
