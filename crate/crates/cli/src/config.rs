//! Experiment configuration: a TOML file with tables for the problem, the
//! scheme, the schedules, the oracles and the certifier options. Unknown
//! keys are errors, not warnings, and every referenced identifier must
//! resolve at load time.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use stokl_core::{
    GradientOracle, PreconditionerModel, Problem, ProxOracle, Schedule, Scheme, SgdScheme,
};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub scheme: SchemeConfig,
    #[serde(default)]
    pub schedules: ScheduleSet,
    pub oracle: OracleConfig,
    #[serde(default)]
    pub preconditioner: PreconditionerConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prox: Option<ProxConfig>,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certifier: Option<CertifierConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kl: Option<KlConfig>,
    #[serde(default)]
    pub report: ReportConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub id: String,
    pub horizon: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSet {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Schedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Schedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Schedule>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Schedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias: Option<Schedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spread: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tilt_seed: Option<u64>,
    /// Optional overrides of the declared second-moment coefficients, for
    /// certifying externally supplied claims.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_a: Option<Schedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_b: Option<Schedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_c: Option<Schedule>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreconditionerConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Schedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<Schedule>,
}

impl Default for PreconditionerConfig {
    fn default() -> Self {
        PreconditionerConfig {
            kind: "identity".to_string(),
            mu: None,
            nu: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProxConfig {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centers: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<Schedule>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_count: Option<u64>,
    #[serde(default = "default_out")]
    pub out: String,
    #[serde(default)]
    pub threads: usize,
}

fn default_out() -> String {
    "runs".to_string()
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seeds: None,
            seed_count: None,
            out: default_out(),
            threads: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifierConfig {
    #[serde(default = "default_draws")]
    pub draws: usize,
    #[serde(default = "default_premise_horizon")]
    pub premise_horizon: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_split: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check_states: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_check_iterations")]
    pub check_iterations: Vec<usize>,
    #[serde(default = "default_mc_seed")]
    pub seed: u64,
    /// Overrides for the splitting scheme's shared error coefficients.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Schedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<Schedule>,
}

fn default_draws() -> usize {
    10_000
}
fn default_premise_horizon() -> usize {
    1000
}
fn default_check_iterations() -> Vec<usize> {
    vec![0]
}
fn default_mc_seed() -> u64 {
    0x4345_5254
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KlConfig {
    pub c: f64,
    pub theta: f64,
    pub epsilon: f64,
    pub zeta: f64,
    #[serde(default = "default_kl_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_upsilon")]
    pub upsilon: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Also build the merged multi-component uniformization.
    #[serde(default = "default_true")]
    pub merge: bool,
}

fn default_kl_samples() -> usize {
    10_000
}
fn default_upsilon() -> f64 {
    0.25
}
fn default_delta() -> f64 {
    0.5
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    #[serde(default = "default_dist_tol")]
    pub dist_tolerance: f64,
    #[serde(default = "default_grad_tol")]
    pub grad_tolerance: f64,
    #[serde(default = "default_tail_window")]
    pub tail_window: usize,
    #[serde(default = "default_tail_tol")]
    pub tail_tolerance: f64,
    #[serde(default = "default_entry_eps")]
    pub entry_epsilon: f64,
    #[serde(default = "default_entry_zeta")]
    pub entry_zeta: f64,
}

fn default_dist_tol() -> f64 {
    1e-2
}
fn default_grad_tol() -> f64 {
    1e-2
}
fn default_tail_window() -> usize {
    1000
}
fn default_tail_tol() -> f64 {
    1e-2
}
fn default_entry_eps() -> f64 {
    0.1
}
fn default_entry_zeta() -> f64 {
    0.1
}

impl Default for ReportConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

impl ExperimentConfig {
    pub fn load(path: &std::path::Path) -> Result<(Self, String), CliError> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: ExperimentConfig = toml::from_str(&raw)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        let mut hasher = Sha256::new();
        hasher.update(raw.as_bytes());
        let hash = hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect::<String>();
        Ok((cfg, hash))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match self.problem.id.as_str() {
            "quadratic" | "double_well_1d" | "circle_quartic" | "composite_quartic_quadratic" => {}
            other => {
                return Err(CliError::config(format!(
                    "unknown problem id `{other}` (key problem.id)"
                )))
            }
        }
        match self.scheme.id.as_str() {
            "sgd" | "prox_gradient" => {}
            other => {
                return Err(CliError::config(format!(
                    "unknown scheme id `{other}` (key scheme.id)"
                )))
            }
        }
        if self.scheme.horizon == 0 {
            return Err(CliError::config("scheme.horizon must be at least 1"));
        }
        if let Some(seeds) = &self.run.seeds {
            let mut sorted = seeds.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != seeds.len() {
                return Err(CliError::config("run.seeds must be distinct"));
            }
        }
        Ok(())
    }

    pub fn build_problem(&self) -> Result<Problem, CliError> {
        let p = &self.problem;
        let problem = match p.id.as_str() {
            "quadratic" => Problem::quadratic(
                p.dimension.unwrap_or(2),
                p.beta.unwrap_or(1.0),
            )?,
            "double_well_1d" => Problem::double_well_1d()?,
            "circle_quartic" => Problem::circle_quartic()?,
            "composite_quartic_quadratic" => {
                let dim = p.dimension.unwrap_or(2);
                let z0 = p.z0.clone().unwrap_or_else(|| vec![0.0; dim]);
                Problem::composite_quartic_quadratic(dim, p.mu_h.unwrap_or(1.0), z0)?
            }
            _ => unreachable!("validated"),
        };
        Ok(problem)
    }

    pub fn build_gradient_oracle(&self, dimension: usize) -> Result<GradientOracle, CliError> {
        let o = &self.oracle;
        let oracle = match o.kind.as_str() {
            "additive_gaussian" => GradientOracle::additive_gaussian(
                o.sigma.clone().unwrap_or(Schedule::Zero),
            )?,
            "multiplicative" => GradientOracle::multiplicative(o.b.ok_or_else(|| {
                CliError::config("oracle.b is required for the multiplicative kind")
            })?)?,
            "minibatch" => GradientOracle::minibatch(
                dimension,
                o.components.ok_or_else(|| {
                    CliError::config("oracle.components is required for minibatch")
                })?,
                o.batch
                    .ok_or_else(|| CliError::config("oracle.batch is required for minibatch"))?,
                o.spread.unwrap_or(1.0),
                o.tilt_seed.unwrap_or(0x5449_4c54),
            )?,
            "biased_decaying" => GradientOracle::biased_decaying(
                o.sigma.clone().unwrap_or(Schedule::Zero),
                o.bias.clone().ok_or_else(|| {
                    CliError::config("oracle.bias is required for biased_decaying")
                })?,
            )?,
            other => {
                return Err(CliError::config(format!(
                    "unknown oracle kind `{other}` (key oracle.kind)"
                )))
            }
        };
        Ok(oracle)
    }

    pub fn build_preconditioner(&self) -> Result<PreconditionerModel, CliError> {
        let p = &self.preconditioner;
        let need = |s: &Option<Schedule>, key: &str| {
            s.clone()
                .ok_or_else(|| CliError::config(format!("preconditioner.{key} is required")))
        };
        let model = match p.kind.as_str() {
            "identity" => PreconditionerModel::Identity,
            "random_diagonal" => PreconditionerModel::RandomDiagonal {
                mu: need(&p.mu, "mu")?,
                nu: need(&p.nu, "nu")?,
            },
            "capped_bfgs" => PreconditionerModel::CappedBfgs {
                mu: need(&p.mu, "mu")?,
                nu: need(&p.nu, "nu")?,
            },
            other => {
                return Err(CliError::config(format!(
                    "unknown preconditioner kind `{other}` (key preconditioner.kind)"
                )))
            }
        };
        model.validate(self.scheme.horizon)?;
        Ok(model)
    }

    pub fn build_prox_oracle(&self, problem: &Problem) -> Result<ProxOracle, CliError> {
        let Some(p) = &self.prox else {
            return Ok(ProxOracle::Exact);
        };
        let split = problem
            .split
            .as_ref()
            .ok_or_else(|| CliError::config("prox oracle needs a composite problem"))?;
        let oracle = match p.kind.as_str() {
            "exact" => ProxOracle::Exact,
            "federated" => ProxOracle::federated(
                &split.h,
                p.centers
                    .clone()
                    .ok_or_else(|| CliError::config("prox.centers is required for federated"))?,
                p.weights
                    .clone()
                    .ok_or_else(|| CliError::config("prox.weights is required for federated"))?,
                p.subset
                    .ok_or_else(|| CliError::config("prox.subset is required for federated"))?,
            )?,
            "perturbed" => ProxOracle::perturbed(
                p.e.clone()
                    .ok_or_else(|| CliError::config("prox.e is required for perturbed"))?,
            )?,
            other => {
                return Err(CliError::config(format!(
                    "unknown prox kind `{other}` (key prox.kind)"
                )))
            }
        };
        Ok(oracle)
    }

    /// Wire the configured scheme over a problem owned by the caller.
    pub fn build_scheme<'a>(&self, problem: &'a Problem) -> Result<Scheme<'a>, CliError> {
        match self.scheme.id.as_str() {
            "sgd" => {
                let alpha = self
                    .schedules
                    .alpha
                    .clone()
                    .ok_or_else(|| CliError::config("schedules.alpha is required for sgd"))?;
                alpha.validate_nonnegative("alpha")?;
                Ok(Scheme::Sgd(SgdScheme {
                    problem,
                    oracle: self.build_gradient_oracle(problem.dimension)?,
                    preconditioner: self.build_preconditioner()?,
                    alpha,
                }))
            }
            "prox_gradient" => {
                let gamma = self.schedules.gamma.clone().ok_or_else(|| {
                    CliError::config("schedules.gamma is required for prox_gradient")
                })?;
                let lambda = self
                    .schedules
                    .lambda
                    .clone()
                    .unwrap_or(Schedule::Constant { c: 1.0 });
                gamma.validate_nonnegative("gamma")?;
                lambda.validate_nonnegative("lambda")?;
                Ok(Scheme::Prox(stokl_core::ProxScheme {
                    problem,
                    gradient_oracle: self.build_gradient_oracle(problem.dimension)?,
                    prox_oracle: self.build_prox_oracle(problem)?,
                    gamma,
                    lambda,
                }))
            }
            _ => unreachable!("validated"),
        }
    }

    pub fn start_state(&self, problem: &Problem) -> Result<Vec<f64>, CliError> {
        match &self.scheme.x0 {
            Some(x0) => {
                if x0.len() != problem.dimension {
                    return Err(CliError::config(format!(
                        "scheme.x0 has {} coordinates, problem dimension is {}",
                        x0.len(),
                        problem.dimension
                    )));
                }
                Ok(x0.clone())
            }
            None => Ok(problem.default_start()),
        }
    }

    /// Resolve the seed list: explicit list wins, then a count `0..n`.
    pub fn seeds(&self, override_seeds: Option<&str>) -> Result<Vec<u64>, CliError> {
        if let Some(spec) = override_seeds {
            return parse_seed_spec(spec);
        }
        if let Some(seeds) = &self.run.seeds {
            return Ok(seeds.clone());
        }
        let n = self.run.seed_count.unwrap_or(1);
        Ok((0..n).collect())
    }
}

/// `--seeds` accepts either a count (`50`) or a comma-separated list
/// (`3,17,40`).
pub fn parse_seed_spec(spec: &str) -> Result<Vec<u64>, CliError> {
    if spec.contains(',') {
        let seeds: Result<Vec<u64>, _> = spec.split(',').map(|s| s.trim().parse::<u64>()).collect();
        let seeds =
            seeds.map_err(|e| CliError::config(format!("bad --seeds list `{spec}`: {e}")))?;
        Ok(seeds)
    } else {
        let n: u64 = spec
            .trim()
            .parse()
            .map_err(|e| CliError::config(format!("bad --seeds value `{spec}`: {e}")))?;
        Ok((0..n).collect())
    }
}
