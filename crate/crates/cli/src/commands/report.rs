//! `stokl report`: aggregate convergence diagnostics across the run CSVs in
//! a directory, grouped by horizon.

use std::path::Path;

use serde::Serialize;
use stokl_core::{diagnose, summarize, DiagnosticsOptions, TrajectoryDiagnostics};

use crate::commands::run::RunMeta;
use crate::output::{parse_trajectory_csv, write_json};
use crate::CliError;

#[derive(Debug, Serialize)]
pub struct ReportSummary {
    pub groups: Vec<GroupSummary>,
}

#[derive(Debug, Serialize)]
pub struct GroupSummary {
    pub horizon: usize,
    pub n_trajectories: usize,
    pub success_fraction: f64,
    pub median_final_dist: f64,
    pub median_final_grad: f64,
    pub median_tail_step_sum: f64,
    pub n_diverged: usize,
    pub n_level_matched: usize,
    pub per_seed: Vec<TrajectoryDiagnostics>,
}

pub fn cmd_report(dir: &Path) -> Result<ReportSummary, CliError> {
    let mut metas: Vec<RunMeta> = Vec::new();
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(format!("cannot read {}: {e}", dir.display())))?;
    for entry in entries {
        let entry = entry.map_err(|e| CliError::io(e.to_string()))?;
        let name = entry.file_name().to_string_lossy().to_string();
        if name.starts_with("run_") && name.ends_with(".meta.json") {
            let raw = std::fs::read_to_string(entry.path())
                .map_err(|e| CliError::io(format!("cannot read {name}: {e}")))?;
            let meta: RunMeta = serde_json::from_str(&raw)
                .map_err(|e| CliError::io(format!("bad sidecar {name}: {e}")))?;
            metas.push(meta);
        }
    }
    if metas.is_empty() {
        return Err(CliError::io(format!(
            "no run sidecars found in {}",
            dir.display()
        )));
    }
    metas.sort_by_key(|m| m.seed);

    // group by horizon; sidecars carry the full config, so mixed directories
    // with different horizons report per group
    let mut horizons: Vec<usize> = metas.iter().map(|m| m.horizon).collect();
    horizons.sort_unstable();
    horizons.dedup();

    let mut groups = Vec::new();
    for horizon in horizons {
        let mut diags = Vec::new();
        for meta in metas.iter().filter(|m| m.horizon == horizon) {
            let problem = meta.config.build_problem()?;
            let csv_path = dir.join(&meta.csv_file);
            let raw = std::fs::read_to_string(&csv_path).map_err(|e| {
                CliError::io(format!("cannot read {}: {e}", csv_path.display()))
            })?;
            let rec = parse_trajectory_csv(
                &raw,
                meta.seed,
                &meta.scheme_id,
                &meta.problem_id,
                meta.horizon,
                meta.diverged,
                meta.box_exit,
            )?;
            let opts = DiagnosticsOptions {
                dist_tolerance: meta.config.report.dist_tolerance,
                grad_tolerance: meta.config.report.grad_tolerance,
                tail_window: meta.config.report.tail_window,
                tail_tolerance: meta.config.report.tail_tolerance,
                entry_epsilon: meta.config.report.entry_epsilon,
                entry_zeta: meta.config.report.entry_zeta,
            };
            diags.push(diagnose(&problem, &rec, &opts)?);
        }
        let s = summarize(&diags)?;
        groups.push(GroupSummary {
            horizon,
            n_trajectories: s.n_trajectories,
            success_fraction: s.success_fraction,
            median_final_dist: s.median_final_dist,
            median_final_grad: s.median_final_grad,
            median_tail_step_sum: s.median_tail_step_sum,
            n_diverged: s.n_diverged,
            n_level_matched: s.n_level_matched,
            per_seed: diags,
        });
    }
    let summary = ReportSummary { groups };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}

pub fn render_text(summary: &ReportSummary) -> String {
    let mut out = String::new();
    for g in &summary.groups {
        out.push_str(&format!(
            "horizon={} n={} success={:.3} median_final_dist={:.3e} median_final_grad={:.3e} \
             median_tail_step={:.3e} diverged={} level_matched={}\n",
            g.horizon,
            g.n_trajectories,
            g.success_fraction,
            g.median_final_dist,
            g.median_final_grad,
            g.median_tail_step_sum,
            g.n_diverged,
            g.n_level_matched,
        ));
    }
    out
}
