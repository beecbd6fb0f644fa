//! Derivation of descent coefficients from a configuration: maps oracle
//! declarations into schedule-typed moment coefficients and feeds the
//! scheme-appropriate calculator.

use stokl_core::{
    gradient_scheme_coefficients, splitting_scheme_coefficients, DescentCoefficients,
    GradientOracle, GradientSchemeInputs, PreconditionerModel, Problem, ProxOracle, Schedule,
    Scheme, SplittingAuxiliary, SplittingSchemeInputs,
};

use crate::config::ExperimentConfig;
use crate::CliError;

/// `factor · s(k)²` as a schedule; exact because the closed family is
/// closed under squaring.
pub fn schedule_square_scale(s: &Schedule, factor: f64) -> Schedule {
    match *s {
        Schedule::Zero => Schedule::Zero,
        Schedule::Constant { c } => Schedule::Constant { c: factor * c * c },
        Schedule::Power { c, p } => Schedule::Power {
            c: factor * c * c,
            p: 2.0 * p,
        },
        Schedule::Geometric { c, q } => Schedule::Geometric {
            c: factor * c * c,
            q: q * q,
        },
    }
}

/// Pointwise sum when both operands stay in one closed form; `None` when
/// the sum leaves the family (caller must then declare the coefficient).
pub fn schedule_add(a: &Schedule, b: &Schedule) -> Option<Schedule> {
    use Schedule::*;
    match (a, b) {
        (Zero, other) | (other, Zero) => Some(other.clone()),
        (Constant { c: c1 }, Constant { c: c2 }) => Some(Constant { c: c1 + c2 }),
        (Power { c: c1, p: p1 }, Power { c: c2, p: p2 }) if p1 == p2 => Some(Power {
            c: c1 + c2,
            p: *p1,
        }),
        (Geometric { c: c1, q: q1 }, Geometric { c: c2, q: q2 }) if q1 == q2 => Some(Geometric {
            c: c1 + c2,
            q: *q1,
        }),
        _ => None,
    }
}

/// Pointwise max for the shared error coefficient of the splitting scheme.
pub fn schedule_max(a: &Schedule, b: &Schedule) -> Option<Schedule> {
    use Schedule::*;
    match (a, b) {
        (Zero, other) | (other, Zero) => Some(other.clone()),
        (Constant { c: c1 }, Constant { c: c2 }) => Some(Constant { c: c1.max(*c2) }),
        (Power { c: c1, p: p1 }, Power { c: c2, p: p2 }) if p1 == p2 => Some(Power {
            c: c1.max(*c2),
            p: *p1,
        }),
        (Geometric { c: c1, q: q1 }, Geometric { c: c2, q: q2 }) if q1 == q2 => Some(Geometric {
            c: c1.max(*c2),
            q: *q1,
        }),
        _ => None,
    }
}

/// Declared `(a, b, c)` of a gradient oracle as schedules, honoring config
/// overrides.
pub fn moment_schedules(
    cfg: &ExperimentConfig,
    oracle: &GradientOracle,
    dimension: usize,
) -> Result<(Schedule, Schedule, Schedule), CliError> {
    let n = dimension as f64;
    let (a, b, c) = match oracle {
        GradientOracle::AdditiveGaussian { sigma } => (
            Schedule::Zero,
            Schedule::Constant { c: 1.0 },
            schedule_square_scale(sigma, n),
        ),
        GradientOracle::Multiplicative { b } => (
            Schedule::Zero,
            Schedule::Constant { c: *b },
            Schedule::Zero,
        ),
        GradientOracle::Minibatch { variance, .. } => (
            Schedule::Zero,
            Schedule::Constant { c: 1.0 },
            Schedule::Constant { c: *variance },
        ),
        GradientOracle::BiasedDecaying { sigma, bias } => {
            let gauss = schedule_square_scale(sigma, n);
            let drift = schedule_square_scale(bias, 2.0);
            let c = schedule_add(&gauss, &drift).ok_or_else(|| {
                CliError::config(
                    "the Gaussian and drift parts of the second-moment constant decay at \
                     different rates; declare oracle.declared_c explicitly",
                )
            })?;
            (Schedule::Zero, Schedule::Constant { c: 2.0 }, c)
        }
    };
    Ok((
        cfg.oracle.declared_a.clone().unwrap_or(a),
        cfg.oracle.declared_b.clone().unwrap_or(b),
        cfg.oracle.declared_c.clone().unwrap_or(c),
    ))
}

/// Gradient-side squared-error coefficient `e` for the splitting scheme.
fn gradient_error_schedule(
    oracle: &GradientOracle,
    dimension: usize,
) -> Result<Schedule, CliError> {
    let n = dimension as f64;
    match oracle {
        GradientOracle::AdditiveGaussian { sigma } => Ok(schedule_square_scale(sigma, n)),
        GradientOracle::Minibatch { variance, .. } => Ok(Schedule::Constant { c: *variance }),
        _ => Err(CliError::config(
            "the splitting scheme needs a conditionally unbiased gradient oracle with \
             state-independent error (additive_gaussian or minibatch)",
        )),
    }
}

/// Prox-side squared-error coefficient `e`: exact and perturbed oracles are
/// exact; the federated oracle gets a constant working-box majorant over the
/// horizon.
fn prox_error_schedule(
    problem: &Problem,
    oracle: &ProxOracle,
    gamma: &Schedule,
    horizon: usize,
) -> Result<Schedule, CliError> {
    match oracle {
        ProxOracle::Exact => Ok(Schedule::Zero),
        ProxOracle::Perturbed { e } => Ok(e.clone()),
        ProxOracle::Federated { .. } => {
            let split = problem
                .split
                .as_ref()
                .ok_or_else(|| CliError::config("federated prox needs a composite problem"))?;
            // ‖y‖ ≤ √N(box + γ·per-coordinate gradient bound); the quartic
            // smooth part has |∂G| ≤ 4·box·(box²+1) per coordinate
            let n = problem.dimension as f64;
            let bx = problem.working_box;
            let grad_bound = 4.0 * bx * (bx * bx + 1.0);
            let mut worst: f64 = 0.0;
            for k in 0..=horizon {
                let g = gamma.eval(k);
                let y_bound = n.sqrt() * (bx + g * grad_bound);
                let (_, e) = oracle.error_moments(&split.h, g, k, y_bound);
                worst = worst.max(e);
            }
            Ok(Schedule::Constant { c: worst })
        }
    }
}

/// Coefficients for whichever scheme the config wires, plus the splitting
/// auxiliaries when they exist.
pub struct DerivedCoefficients {
    pub coefficients: DescentCoefficients,
    pub auxiliary: Option<SplittingAuxiliary>,
    /// The case split used by the gradient calculator.
    pub biased: bool,
}

pub fn derive_coefficients(
    cfg: &ExperimentConfig,
    problem: &Problem,
    scheme: &Scheme<'_>,
) -> Result<DerivedCoefficients, CliError> {
    match scheme {
        Scheme::Sgd(s) => {
            let (a, b, c) = moment_schedules(cfg, &s.oracle, problem.dimension)?;
            let (mu, nu) = match &s.preconditioner {
                PreconditionerModel::Identity => (
                    Schedule::Constant { c: 1.0 },
                    Schedule::Constant { c: 1.0 },
                ),
                PreconditionerModel::RandomDiagonal { mu, nu }
                | PreconditionerModel::CappedBfgs { mu, nu } => (mu.clone(), nu.clone()),
            };
            let biased = !s.oracle.is_conditionally_unbiased();
            let rho_split = if biased {
                let r = cfg
                    .certifier
                    .as_ref()
                    .and_then(|c| c.rho_split)
                    .ok_or_else(|| {
                        CliError::config(
                            "a biased oracle needs certifier.rho_split in (0, 1)",
                        )
                    })?;
                Some(r)
            } else {
                None
            };
            let bias = match &s.oracle {
                GradientOracle::BiasedDecaying { bias, .. } => bias.clone(),
                _ => Schedule::Zero,
            };
            let coefficients = gradient_scheme_coefficients(&GradientSchemeInputs {
                alpha: s.alpha.clone(),
                mu,
                nu,
                a,
                b,
                c,
                bias,
                beta: problem.beta,
                rho_split,
            })?;
            Ok(DerivedCoefficients {
                coefficients,
                auxiliary: None,
                biased,
            })
        }
        Scheme::Prox(s) => {
            let split = problem
                .split
                .as_ref()
                .ok_or_else(|| CliError::config("splitting scheme needs a composite problem"))?;
            let certifier = cfg.certifier.as_ref();
            let d = certifier
                .and_then(|c| c.d.clone())
                .unwrap_or(Schedule::Zero);
            let e = match certifier.and_then(|c| c.e.clone()) {
                Some(e) => e,
                None => {
                    let e_grad =
                        gradient_error_schedule(&s.gradient_oracle, problem.dimension)?;
                    let e_prox = prox_error_schedule(
                        problem,
                        &s.prox_oracle,
                        &s.gamma,
                        cfg.scheme.horizon,
                    )?;
                    schedule_max(&e_grad, &e_prox).ok_or_else(|| {
                        CliError::config(
                            "gradient and prox error coefficients decay at different rates; \
                             declare certifier.e explicitly",
                        )
                    })?
                }
            };
            let (auxiliary, coefficients) =
                splitting_scheme_coefficients(&SplittingSchemeInputs {
                    gamma: s.gamma.clone(),
                    lambda: s.lambda.clone(),
                    d,
                    e,
                    beta_g: split.beta_g,
                    beta_h: split.beta_h,
                })?;
            Ok(DerivedCoefficients {
                coefficients,
                auxiliary: Some(auxiliary),
                biased: false,
            })
        }
    }
}
