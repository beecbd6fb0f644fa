//! `stokl kl-check`: sampled verification of the KL inequality in tubes
//! around every critical component, plus the merged multi-component
//! uniformization when the problem has several components.

use std::path::Path;

use serde::Serialize;
use stokl_core::{
    build_extended_uniform, kl_check_uniform, ComponentKl, Desingularizer, KlComponentReport,
};

use crate::config::ExperimentConfig;
use crate::output::write_json;
use crate::CliError;

#[derive(Debug, Serialize)]
pub struct KlCheckReport {
    pub config_hash: String,
    pub problem: String,
    pub components: Vec<KlComponentReport>,
    pub violated_total: usize,
    pub min_margin: Option<f64>,
    /// Merge of per-component data; absent for single-component problems
    /// when merging is disabled.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub merged: Option<MergedSummary>,
    /// Number of critical components; 1 means the plain uniformization
    /// applies unchanged.
    pub component_count: usize,
}

#[derive(Debug, Serialize)]
pub struct MergedSummary {
    pub zeta_tilde: Option<f64>,
    pub zeta: f64,
    pub epsilon: f64,
    pub degenerate_levels: bool,
    pub radii: Vec<RadiusSummary>,
}

#[derive(Debug, Serialize)]
pub struct RadiusSummary {
    pub component: usize,
    pub requested: f64,
    pub achieved: Option<f64>,
}

pub fn cmd_klcheck(
    cfg: &ExperimentConfig,
    config_hash: &str,
    out_dir: &Path,
) -> Result<KlCheckReport, CliError> {
    let kl = cfg
        .kl
        .as_ref()
        .ok_or_else(|| CliError::config("kl-check needs a [kl] section"))?;
    let problem = cfg.build_problem()?;
    let d = Desingularizer::new(kl.c, kl.theta, f64::INFINITY)?;
    let rep = kl_check_uniform(&problem, &d, kl.epsilon, kl.zeta, kl.n_samples, kl.seed)?;

    let merged = if kl.merge && problem.components.len() > 1 {
        let per: Vec<ComponentKl> = problem
            .components
            .iter()
            .map(|_| ComponentKl {
                desingularizer: Desingularizer::new(kl.c, kl.theta, kl.zeta)
                    .expect("validated parameters"),
                epsilon: kl.epsilon,
                zeta: kl.zeta,
            })
            .collect();
        let m = build_extended_uniform(&problem, &per, kl.upsilon, kl.delta, kl.n_samples, kl.seed)?;
        Some(MergedSummary {
            zeta_tilde: m.zeta_tilde,
            zeta: m.zeta,
            epsilon: m.epsilon,
            degenerate_levels: m.degenerate_levels,
            radii: m
                .radii
                .iter()
                .map(|r| RadiusSummary {
                    component: r.component,
                    requested: r.requested,
                    achieved: r.achieved,
                })
                .collect(),
        })
    } else {
        None
    };

    let report = KlCheckReport {
        config_hash: config_hash.to_string(),
        problem: problem.id.clone(),
        component_count: problem.components.len(),
        components: rep.components,
        violated_total: rep.violated_total,
        min_margin: rep.min_margin,
        merged,
    };
    write_json(&out_dir.join("kl_report.json"), &report)?;
    Ok(report)
}
