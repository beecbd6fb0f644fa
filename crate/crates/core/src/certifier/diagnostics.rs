//! Trajectory convergence diagnostics: movement summability, critical-set
//! proximity, critical-level identification and multi-seed success
//! frequencies.

use serde::Serialize;

use crate::certifier::lyapunov::TAIL_FRACTION;
use crate::certifier::Verdict;
use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::schemes::TrajectoryRecord;
use crate::vecn;

/// Thresholds used to call a trajectory successful and to match critical
/// levels.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsOptions {
    pub dist_tolerance: f64,
    pub grad_tolerance: f64,
    /// Steps counted into the movement tail.
    pub tail_window: usize,
    pub tail_tolerance: f64,
    /// Tube radius and value window of the KL-entry search.
    pub entry_epsilon: f64,
    pub entry_zeta: f64,
}

impl Default for DiagnosticsOptions {
    fn default() -> Self {
        DiagnosticsOptions {
            dist_tolerance: 1e-2,
            grad_tolerance: 1e-2,
            tail_window: 1000,
            tail_tolerance: 1e-2,
            entry_epsilon: 0.1,
            entry_zeta: 0.1,
        }
    }
}

/// One matched critical level.
#[derive(Debug, Clone, Serialize)]
pub struct LevelMatch {
    pub level_value: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryDiagnostics {
    pub seed: u64,
    pub horizon: usize,
    pub diverged: bool,
    pub box_exit: Option<usize>,
    pub final_dist: f64,
    pub final_grad_norm: f64,
    /// Total movement `Σ‖x_{k+1} − x_k‖`.
    pub step_sum: f64,
    /// Movement over the configured tail window.
    pub tail_step_sum: f64,
    /// Tail-mean estimate of the objective limit.
    pub f_limit_estimate: f64,
    /// Sample standard deviation of the tail objective values.
    pub f_tail_std: f64,
    /// Nearest distinct critical level value(s); two entries on a tie.
    pub nearest_levels: Vec<LevelMatch>,
    /// Membership of the limit estimate in the critical value set, within
    /// `max(1e-3, 3·tail std)`; ties are inconclusive.
    pub level_verdict: Verdict,
    /// First index after which the trajectory stays in the entry window
    /// (`dist ≤ ε` and `0 < F − F̂_∞ < ζ`); `None` when never entered.
    pub kl_entry_index: Option<usize>,
    /// Diameter of the last tenth of the logged states.
    pub tail_diameter: f64,
    pub success: bool,
}

pub fn diagnose(
    problem: &Problem,
    traj: &TrajectoryRecord,
    opts: &DiagnosticsOptions,
) -> Result<TrajectoryDiagnostics> {
    let n = traj.len();
    if n == 0 {
        return Err(Error::domain("empty trajectory"));
    }
    let tail = ((n as f64 * TAIL_FRACTION).ceil() as usize).clamp(1, n);
    let tail_values = &traj.f_values[n - tail..];
    let (f_limit_estimate, _) = vecn::mean_se(tail_values);
    let f_tail_std = if tail > 1 {
        (tail_values
            .iter()
            .map(|f| (f - f_limit_estimate).powi(2))
            .sum::<f64>()
            / (tail - 1) as f64)
            .sqrt()
    } else {
        0.0
    };

    let (nearest_levels, level_verdict) =
        match_critical_level(problem, f_limit_estimate, f_tail_std);

    let final_dist = *traj.dist_critical.last().unwrap();
    let final_grad_norm = *traj.grad_norms.last().unwrap();
    let step_sum = traj.step_sum();
    let tail_step_sum = traj.tail_step_sum(opts.tail_window);

    let kl_entry_index = kl_entry_index(traj, f_limit_estimate, opts);
    let tail_diameter = tail_diameter(&traj.states);

    let success = !traj.diverged
        && final_dist < opts.dist_tolerance
        && final_grad_norm < opts.grad_tolerance
        && tail_step_sum < opts.tail_tolerance;

    Ok(TrajectoryDiagnostics {
        seed: traj.seed,
        horizon: traj.horizon,
        diverged: traj.diverged,
        box_exit: traj.box_exit,
        final_dist,
        final_grad_norm,
        step_sum,
        tail_step_sum,
        f_limit_estimate,
        f_tail_std,
        nearest_levels,
        level_verdict,
        kl_entry_index,
        tail_diameter,
        success,
    })
}

/// Match the limit estimate against the set of distinct critical values.
/// Components sharing a value contribute one candidate; two distinct values
/// at (numerically) equal distance are both reported and the verdict is
/// inconclusive.
fn match_critical_level(
    problem: &Problem,
    estimate: f64,
    tail_std: f64,
) -> (Vec<LevelMatch>, Verdict) {
    let mut values: Vec<f64> = Vec::new();
    for c in &problem.components {
        if values.iter().all(|v| (v - c.level_value).abs() > 1e-12) {
            values.push(c.level_value);
        }
    }
    let mut matches: Vec<LevelMatch> = values
        .iter()
        .map(|v| LevelMatch {
            level_value: *v,
            gap: (estimate - v).abs(),
        })
        .collect();
    matches.sort_by(|a, b| a.gap.partial_cmp(&b.gap).expect("finite gaps"));
    let tolerance = (3.0 * tail_std).max(1e-3);
    let tie = matches.len() >= 2 && (matches[0].gap - matches[1].gap).abs() < 1e-12;
    let nearest: Vec<LevelMatch> = if tie {
        matches.into_iter().take(2).collect()
    } else {
        matches.into_iter().take(1).collect()
    };
    let verdict = if tie {
        Verdict::Inconclusive
    } else if nearest[0].gap < tolerance {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    (nearest, verdict)
}

/// First `k` such that every later logged state satisfies
/// `dist(x, critical set) ≤ ε` and `0 < F(x) − F̂_∞ < ζ`.
fn kl_entry_index(
    traj: &TrajectoryRecord,
    f_limit: f64,
    opts: &DiagnosticsOptions,
) -> Option<usize> {
    let n = traj.len();
    let in_window = |k: usize| {
        let gap = traj.f_values[k] - f_limit;
        traj.dist_critical[k] <= opts.entry_epsilon && gap > 0.0 && gap < opts.entry_zeta
    };
    // scan backwards for the longest all-inside suffix starting at k ≥ 1
    let mut first = None;
    for k in (1..n).rev() {
        if in_window(k) {
            first = Some(k);
        } else {
            break;
        }
    }
    first
}

/// Max pairwise distance over the last tenth of the states, subsampled to a
/// few hundred points.
fn tail_diameter(states: &[Vec<f64>]) -> f64 {
    let n = states.len();
    let start = (n as f64 * 0.9).floor() as usize;
    let tail = &states[start.min(n - 1)..];
    let stride = (tail.len() / 256).max(1);
    let pts: Vec<&Vec<f64>> = tail.iter().step_by(stride).collect();
    let mut diam: f64 = 0.0;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            diam = diam.max(vecn::dist(pts[i], pts[j]));
        }
    }
    diam
}

/// Aggregate over a multi-seed batch; grouped reporting is the caller's
/// concern, this summarizes one group.
#[derive(Debug, Clone, Serialize)]
pub struct MultiSeedSummary {
    pub n_trajectories: usize,
    pub n_success: usize,
    pub success_fraction: f64,
    pub median_final_dist: f64,
    pub median_final_grad: f64,
    pub median_tail_step_sum: f64,
    pub n_diverged: usize,
    pub n_level_matched: usize,
}

pub fn summarize(diags: &[TrajectoryDiagnostics]) -> Result<MultiSeedSummary> {
    if diags.is_empty() {
        return Err(Error::domain("no trajectories to summarize"));
    }
    let n = diags.len();
    let n_success = diags.iter().filter(|d| d.success).count();
    let dists: Vec<f64> = diags.iter().map(|d| d.final_dist).collect();
    let grads: Vec<f64> = diags.iter().map(|d| d.final_grad_norm).collect();
    let tails: Vec<f64> = diags.iter().map(|d| d.tail_step_sum).collect();
    Ok(MultiSeedSummary {
        n_trajectories: n,
        n_success,
        success_fraction: n_success as f64 / n as f64,
        median_final_dist: vecn::median(&dists),
        median_final_grad: vecn::median(&grads),
        median_tail_step_sum: vecn::median(&tails),
        n_diverged: diags.iter().filter(|d| d.diverged).count(),
        n_level_matched: diags
            .iter()
            .filter(|d| d.level_verdict == Verdict::Pass)
            .count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{GradientOracle, PreconditionerModel};
    use crate::schedule::Schedule;
    use crate::schemes::{run_trajectory, Scheme, SgdScheme};

    fn deterministic_run(problem: &Problem, alpha: f64, x0: &[f64], horizon: usize) -> TrajectoryRecord {
        let scheme = Scheme::Sgd(SgdScheme {
            problem,
            oracle: GradientOracle::additive_gaussian(Schedule::Zero).unwrap(),
            preconditioner: PreconditionerModel::Identity,
            alpha: Schedule::constant(alpha),
        });
        run_trajectory(&scheme, None, x0, horizon, 1).unwrap()
    }

    #[test]
    fn quadratic_movement_matches_geometric_series() {
        let p = Problem::quadratic(2, 1.0).unwrap();
        let alpha = 0.5;
        let rec = deterministic_run(&p, alpha, &[2.0, 0.0], 100);
        let opts = DiagnosticsOptions {
            tail_window: 20,
            ..DiagnosticsOptions::default()
        };
        let d = diagnose(&p, &rec, &opts).unwrap();
        // Σ‖Δx‖ = α‖∇F(x₀)‖ / (1 − (1 − αβ))
        let expect = alpha * 2.0 / (1.0 - (1.0 - alpha));
        assert!(
            (d.step_sum - expect).abs() < 1e-8,
            "sum {} vs {expect}",
            d.step_sum
        );
        assert!(d.final_dist < 1e-12);
        assert!(d.success);
    }

    #[test]
    fn double_well_identifies_level() {
        let p = Problem::double_well_1d().unwrap();
        let rec = deterministic_run(&p, 0.01, &[2.0], 4000);
        let d = diagnose(
            &p,
            &rec,
            &DiagnosticsOptions {
                tail_window: 100,
                ..DiagnosticsOptions::default()
            },
        )
        .unwrap();
        // converges to x = 1 at level 0
        assert!((rec.final_state()[0] - 1.0).abs() < 1e-4);
        assert!(d.f_limit_estimate.abs() < 1e-3);
        assert_eq!(d.level_verdict, Verdict::Pass);
        assert_eq!(d.nearest_levels.len(), 1);
        assert!(d.nearest_levels[0].level_value == 0.0);
        assert!(d.success);
    }

    #[test]
    fn deterministic_contraction_has_singleton_tail() {
        let p = Problem::quadratic(2, 1.0).unwrap();
        let rec = deterministic_run(&p, 0.5, &[2.0, 0.0], 200);
        let d = diagnose(&p, &rec, &DiagnosticsOptions::default()).unwrap();
        assert!(d.tail_diameter < 1e-12);
    }

    #[test]
    fn midpoint_estimate_between_levels_is_tie() {
        let p = Problem::double_well_1d().unwrap();
        let (nearest, verdict) = match_critical_level(&p, 0.5, 0.0);
        assert_eq!(nearest.len(), 2);
        assert_eq!(verdict, Verdict::Inconclusive);
    }

    #[test]
    fn summarize_counts_successes() {
        let p = Problem::quadratic(2, 1.0).unwrap();
        let opts = DiagnosticsOptions {
            tail_window: 10,
            ..DiagnosticsOptions::default()
        };
        let recs: Vec<TrajectoryRecord> = (0..4)
            .map(|_| deterministic_run(&p, 0.5, &[2.0, 0.0], 50))
            .collect();
        let diags: Vec<TrajectoryDiagnostics> = recs
            .iter()
            .map(|r| diagnose(&p, r, &opts).unwrap())
            .collect();
        let s = summarize(&diags).unwrap();
        assert_eq!(s.n_trajectories, 4);
        assert_eq!(s.success_fraction, 1.0);
        assert_eq!(s.n_diverged, 0);
    }
}
