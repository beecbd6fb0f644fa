//! `stokl run`: execute seeded trajectories and write one CSV plus one JSON
//! sidecar per seed.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use stokl_core::run_trajectory;

use crate::commands::coeffs::derive_coefficients;
use crate::config::ExperimentConfig;
use crate::output::{run_csv_path, run_meta_path, trajectory_csv, write_atomic, write_json};
use crate::CliError;

/// Sidecar metadata carried next to every trajectory CSV. Contains the full
/// resolved configuration so later commands can rebuild the problem without
/// the original file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMeta {
    pub seed: u64,
    pub config_hash: String,
    pub scheme_id: String,
    pub problem_id: String,
    pub horizon: usize,
    pub diverged: bool,
    pub box_exit: Option<usize>,
    pub csv_file: String,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub seeds: Vec<u64>,
    pub n_diverged: usize,
    pub out_dir: String,
}

pub fn cmd_run(
    cfg: &ExperimentConfig,
    config_hash: &str,
    out_dir: &Path,
    seeds: &[u64],
    threads: usize,
) -> Result<RunSummary, CliError> {
    if seeds.is_empty() {
        return Err(CliError::config("no seeds to run"));
    }
    let problem = cfg.build_problem()?;
    let scheme = cfg.build_scheme(&problem)?;
    let x0 = cfg.start_state(&problem)?;
    // coefficient columns are logged when a certifier section is present
    let coeffs = match cfg.certifier {
        Some(_) => Some(derive_coefficients(cfg, &problem, &scheme)?.coefficients),
        None => None,
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::io(format!("cannot build worker pool: {e}")))?;

    let results: Result<Vec<(u64, bool)>, CliError> = pool.install(|| {
        seeds
            .par_iter()
            .map(|seed| {
                let rec = run_trajectory(
                    &scheme,
                    coeffs.as_ref(),
                    &x0,
                    cfg.scheme.horizon,
                    *seed,
                )?;
                let csv = trajectory_csv(&rec);
                write_atomic(&run_csv_path(out_dir, *seed), csv.as_bytes())?;
                let meta = RunMeta {
                    seed: *seed,
                    config_hash: config_hash.to_string(),
                    scheme_id: rec.scheme_id.clone(),
                    problem_id: rec.problem_id.clone(),
                    horizon: rec.horizon,
                    diverged: rec.diverged,
                    box_exit: rec.box_exit,
                    csv_file: format!("run_{seed}.csv"),
                    config: cfg.clone(),
                };
                write_json(&run_meta_path(out_dir, *seed), &meta)?;
                Ok((*seed, rec.diverged))
            })
            .collect()
    });
    let results = results?;
    Ok(RunSummary {
        seeds: results.iter().map(|(s, _)| *s).collect(),
        n_diverged: results.iter().filter(|(_, d)| *d).count(),
        out_dir: out_dir.display().to_string(),
    })
}
