use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stokl_cli::commands::{cmd_certify, cmd_klcheck, cmd_report, cmd_run};
use stokl_cli::commands::report::render_text;
use stokl_cli::config::ExperimentConfig;
use stokl_cli::CliError;

/// Reproducible stochastic-optimization experiments with descent and KL
/// certification.
#[derive(Parser)]
#[command(name = "stokl", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded trajectories and write one CSV + sidecar per seed.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides run.out).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed count (`50`) or comma-separated list (`3,17,40`).
        #[arg(long)]
        seeds: Option<String>,
        /// Worker threads; 0 picks the runtime default.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check scheme premises and certify the one-step inequalities.
    Certify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sampled KL verification around every critical component.
    KlCheck {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate convergence diagnostics over a run directory.
    Report {
        /// Directory holding run_<seed>.csv files and their sidecars.
        dir: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch() -> Result<ExitCode, CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            seeds,
            threads,
        } => {
            let (cfg, hash) = ExperimentConfig::load(&config)?;
            let out_dir = out.unwrap_or_else(|| PathBuf::from(&cfg.run.out));
            let seed_list = cfg.seeds(seeds.as_deref())?;
            let threads = threads.unwrap_or(cfg.run.threads);
            let summary = cmd_run(&cfg, &hash, &out_dir, &seed_list, threads)?;
            println!(
                "ran {} seeds into {} ({} diverged)",
                summary.seeds.len(),
                summary.out_dir,
                summary.n_diverged
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Certify { config, out } => {
            let (cfg, hash) = ExperimentConfig::load(&config)?;
            let out_dir = out.unwrap_or_else(|| PathBuf::from(&cfg.run.out));
            let report = cmd_certify(&cfg, &hash, &out_dir)?;
            println!(
                "certificate: {} pass, {} fail, {} inconclusive (warnings)",
                report.passed, report.failed, report.inconclusive
            );
            if report.all_pass() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
        Command::KlCheck { config, out } => {
            let (cfg, hash) = ExperimentConfig::load(&config)?;
            let out_dir = out.unwrap_or_else(|| PathBuf::from(&cfg.run.out));
            let report = cmd_klcheck(&cfg, &hash, &out_dir)?;
            println!(
                "kl-check: {} components, {} violations, min margin {:?}",
                report.component_count, report.violated_total, report.min_margin
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { dir } => {
            let summary = cmd_report(&dir)?;
            print!("{}", render_text(&summary));
            Ok(ExitCode::SUCCESS)
        }
    }
}
