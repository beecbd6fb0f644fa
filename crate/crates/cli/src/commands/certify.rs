//! `stokl certify`: derive the scheme's descent coefficients, check every
//! convergence premise symbolically and numerically, and certify the
//! one-step inequalities and oracle moment bounds by Monte-Carlo branching.

use std::path::Path;

use serde::Serialize;
use stokl_core::{
    certify_descent, certify_step_bound, check_premises, empirical_moment_check_against,
    CheckEntry, Evidence, Scheme, Verdict,
};

use crate::commands::coeffs::{derive_coefficients, moment_schedules};
use crate::config::ExperimentConfig;
use crate::output::write_json;
use crate::CliError;

#[derive(Debug, Serialize)]
pub struct CertifyReport {
    pub config_hash: String,
    pub problem: String,
    pub scheme: String,
    pub checks: Vec<CheckEntry>,
    pub passed: usize,
    pub failed: usize,
    pub inconclusive: usize,
}

impl CertifyReport {
    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }
}

pub fn cmd_certify(
    cfg: &ExperimentConfig,
    config_hash: &str,
    out_dir: &Path,
) -> Result<CertifyReport, CliError> {
    let certifier = cfg
        .certifier
        .as_ref()
        .ok_or_else(|| CliError::config("certify needs a [certifier] section"))?;
    let problem = cfg.build_problem()?;
    let scheme = cfg.build_scheme(&problem)?;
    let mut checks: Vec<CheckEntry> = Vec::new();

    // scheme preconditions and coefficient derivation
    let derived = match derive_coefficients(cfg, &problem, &scheme) {
        Ok(d) => {
            checks.extend(scheme_precondition_checks(&scheme, &d, cfg.scheme.horizon));
            Some(d)
        }
        Err(e) => {
            checks.push(
                CheckEntry::new(
                    "scheme_preconditions",
                    "step sizes compatible with the scheme's curvature bounds",
                    Verdict::Fail,
                )
                .with_evidence(Evidence {
                    note: Some(e.to_string()),
                    ..Evidence::default()
                }),
            );
            None
        }
    };

    if let Some(derived) = &derived {
        // convergence premises on the configured horizon
        let premises = check_premises(&derived.coefficients, certifier.premise_horizon)?;
        checks.extend(premises.checks);

        // Monte-Carlo certification at frozen states
        let states = check_states(cfg, &problem)?;
        for x in &states {
            for k in &certifier.check_iterations {
                checks.push(moment_entry(cfg, &scheme, x, *k, certifier.draws, certifier.seed)?);
                checks.push(certify_descent(
                    &scheme,
                    &derived.coefficients,
                    x,
                    *k,
                    certifier.draws,
                    certifier.seed,
                )?);
                checks.push(certify_step_bound(
                    &scheme,
                    &derived.coefficients,
                    x,
                    *k,
                    certifier.draws,
                    certifier.seed.wrapping_add(1),
                )?);
            }
        }
    }

    let passed = checks.iter().filter(|c| c.verdict == Verdict::Pass).count();
    let failed = checks.iter().filter(|c| c.verdict == Verdict::Fail).count();
    let inconclusive = checks
        .iter()
        .filter(|c| c.verdict == Verdict::Inconclusive)
        .count();
    let report = CertifyReport {
        config_hash: config_hash.to_string(),
        problem: problem.id.clone(),
        scheme: scheme.id().to_string(),
        checks,
        passed,
        failed,
        inconclusive,
    };
    write_json(&out_dir.join("certificate.json"), &report)?;
    Ok(report)
}

/// Default states the Monte-Carlo certifier freezes: the configured start,
/// its midpoint toward the origin, and one seeded draw near the start.
fn check_states(
    cfg: &ExperimentConfig,
    problem: &stokl_core::Problem,
) -> Result<Vec<Vec<f64>>, CliError> {
    if let Some(states) = cfg
        .certifier
        .as_ref()
        .and_then(|c| c.check_states.clone())
    {
        for s in &states {
            if s.len() != problem.dimension {
                return Err(CliError::config(format!(
                    "certifier.check_states entry has {} coordinates, problem dimension is {}",
                    s.len(),
                    problem.dimension
                )));
            }
        }
        return Ok(states);
    }
    let x0 = cfg.start_state(problem)?;
    let mid: Vec<f64> = x0.iter().map(|v| 0.5 * v).collect();
    let offset: Vec<f64> = x0
        .iter()
        .enumerate()
        .map(|(i, v)| 0.75 * v + if i % 2 == 0 { 0.1 } else { -0.1 })
        .collect();
    Ok(vec![x0, mid, offset])
}

fn moment_entry(
    cfg: &ExperimentConfig,
    scheme: &Scheme<'_>,
    x: &[f64],
    k: usize,
    draws: usize,
    seed: u64,
) -> Result<CheckEntry, CliError> {
    let (oracle, problem) = match scheme {
        Scheme::Sgd(s) => (&s.oracle, s.problem),
        Scheme::Prox(s) => (&s.gradient_oracle, s.problem),
    };
    // the declared coefficients, after any config override
    let (a, b, c) = moment_schedules(cfg, oracle, problem.dimension)?;
    let declared = (a.eval(k), b.eval(k), c.eval(k));
    let rep = empirical_moment_check_against(
        oracle,
        problem,
        x,
        k,
        draws.max(1000),
        seed,
        Some(declared),
    )?;
    let verdict = match rep.verdict {
        "pass" => Verdict::Pass,
        "fail" => Verdict::Fail,
        _ => Verdict::Inconclusive,
    };
    Ok(CheckEntry::new(
        format!("gradient_moment_bound_k{k}"),
        "E[|f_k|^2 | x] <= a*(F(x) - F*) + b*|grad F(x)|^2 + c",
        verdict,
    )
    .with_evidence(Evidence {
        mean: Some(rep.mean),
        se: Some(rep.se),
        bound: Some(rep.bound),
        margin: Some(rep.bound - rep.mean),
        ..Evidence::default()
    }))
}

fn scheme_precondition_checks(
    scheme: &Scheme<'_>,
    derived: &crate::commands::coeffs::DerivedCoefficients,
    horizon: usize,
) -> Vec<CheckEntry> {
    let mut checks = Vec::new();
    match scheme {
        Scheme::Sgd(s) => {
            let mut inf_mu = f64::INFINITY;
            for k in 0..=horizon {
                inf_mu = inf_mu.min(s.preconditioner.spectrum(k).0);
            }
            let verdict = if inf_mu > 0.0 { Verdict::Pass } else { Verdict::Fail };
            checks.push(
                CheckEntry::new("positive_spectrum_floor", "inf_k mu_k > 0", verdict)
                    .with_evidence(Evidence {
                        inf: Some(inf_mu),
                        horizon: Some(horizon),
                        ..Evidence::default()
                    }),
            );
            if derived.biased {
                checks.push(CheckEntry::new(
                    "biased_case_selected",
                    "margin split applied to the spectrum floor for the biased oracle",
                    Verdict::Pass,
                ).with_evidence(Evidence {
                    note: Some("deterministic majorant of the bias series is folded into the noise coefficient".to_string()),
                    ..Evidence::default()
                }));
            }
        }
        Scheme::Prox(s) => {
            let split = s.problem.split.as_ref().expect("composite problem");
            let gamma_sup = s.gamma.sup();
            checks.push(
                CheckEntry::new(
                    "prox_step_below_curvature_bound",
                    "sup_k gamma_k < 1/beta_H",
                    if gamma_sup < 1.0 / split.beta_h {
                        Verdict::Pass
                    } else {
                        Verdict::Fail
                    },
                )
                .with_evidence(Evidence {
                    sup: Some(gamma_sup),
                    bound: Some(1.0 / split.beta_h),
                    ..Evidence::default()
                }),
            );
            checks.push(
                CheckEntry::new(
                    "relaxation_at_most_one",
                    "sup_k lambda_k <= 1",
                    if s.lambda.sup() <= 1.0 {
                        Verdict::Pass
                    } else {
                        Verdict::Fail
                    },
                )
                .with_evidence(Evidence {
                    sup: Some(s.lambda.sup()),
                    ..Evidence::default()
                }),
            );
            let mut inf_prod = f64::INFINITY;
            for k in 0..=horizon {
                inf_prod = inf_prod.min(s.gamma.eval(k) * s.lambda.eval(k));
            }
            checks.push(
                CheckEntry::new(
                    "positive_step_product_floor",
                    "inf_k gamma_k*lambda_k > 0",
                    if inf_prod > 0.0 {
                        Verdict::Pass
                    } else {
                        Verdict::Fail
                    },
                )
                .with_evidence(Evidence {
                    inf: Some(inf_prod),
                    horizon: Some(horizon),
                    ..Evidence::default()
                }),
            );
            if let Some(aux) = &derived.auxiliary {
                let mut sup_margin = f64::NEG_INFINITY;
                let mut arg = 0usize;
                for k in 0..=horizon {
                    let m = (aux.margin_quantity)(k);
                    if m > sup_margin {
                        sup_margin = m;
                        arg = k;
                    }
                }
                checks.push(
                    CheckEntry::new(
                        "margin_quantity_below_one",
                        "sup_k sigma_k + d_k*(sigma_k + lambda_k*beta/gamma_k) < 1",
                        if sup_margin < 1.0 {
                            Verdict::Pass
                        } else {
                            Verdict::Fail
                        },
                    )
                    .with_evidence(Evidence {
                        sup: Some(sup_margin),
                        first_violation_k: if sup_margin < 1.0 { None } else { Some(arg) },
                        horizon: Some(horizon),
                        ..Evidence::default()
                    }),
                );
            }
        }
    }
    checks
}
