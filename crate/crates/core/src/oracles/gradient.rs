//! Stochastic gradient oracles with exactly computable moment coefficients.
//!
//! Every oracle perturbs a supplied true gradient, so the same families serve
//! both the full objective and the smooth part of a composite one. The
//! declared coefficients `(a_k, b_k, c_k)` bound the conditional second
//! moment `E[‖f_k‖² | x_k] ≤ a_k(F(x_k) − F*) + b_k‖∇F(x_k)‖² + c_k`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::rng::{substream, Role};
use crate::schedule::Schedule;
use crate::vecn;

#[derive(Debug, Clone)]
pub enum GradientOracle {
    /// `f_k = ∇F(x_k) + σ_k·n`, `n` standard normal. Unbiased;
    /// `(a, b, c) = (0, 1, N·σ_k²)` holds with equality.
    AdditiveGaussian { sigma: Schedule },
    /// `f_k = s·∇F(x_k)` with a two-point scalar `s ∈ {1−d, 1+d}` of mean 1
    /// and second moment `b = 1 + d²`. The strong-growth regime
    /// `(a, b, c) = (0, b, 0)`.
    Multiplicative { b: f64 },
    /// Average of `m` component gradients of the finite sum
    /// `F = (1/n)Σᵢ(F + ⟨δᵢ, ·⟩)` with centered tilt vectors `Σδᵢ = 0`,
    /// drawn uniformly without replacement. Unbiased with constant variance,
    /// so `(a, b, c) = (0, 1, const)` exactly.
    Minibatch {
        tilts: Vec<Vec<f64>>,
        batch: usize,
        /// `E‖mean of sampled tilts‖²`, precomputed at construction.
        variance: f64,
    },
    /// Additive Gaussian plus the deterministic drift `bias_k·e₁`.
    /// `E[f_k | x_k] − ∇F(x_k)` has norm exactly `bias_k`.
    BiasedDecaying { sigma: Schedule, bias: Schedule },
}

impl GradientOracle {
    pub fn additive_gaussian(sigma: Schedule) -> Result<Self> {
        sigma.validate_nonnegative("sigma")?;
        Ok(GradientOracle::AdditiveGaussian { sigma })
    }

    pub fn multiplicative(b: f64) -> Result<Self> {
        if b < 1.0 {
            return Err(Error::config(
                "second moment of a mean-one scalar cannot be below 1",
            ));
        }
        Ok(GradientOracle::Multiplicative { b })
    }

    /// Build the finite-sum tilt family: `n_components` centered vectors with
    /// root-mean-square norm `spread`, derived from `tilt_seed`.
    pub fn minibatch(
        dimension: usize,
        n_components: usize,
        batch: usize,
        spread: f64,
        tilt_seed: u64,
    ) -> Result<Self> {
        if n_components < 2 || batch == 0 || batch > n_components {
            return Err(Error::config(
                "minibatch needs 2 ≤ components and 1 ≤ batch ≤ components",
            ));
        }
        if spread < 0.0 {
            return Err(Error::config("tilt spread must be nonnegative"));
        }
        let mut tilts: Vec<Vec<f64>> = (0..n_components)
            .map(|i| {
                let mut rng = substream(tilt_seed, i as u64, 0, Role::Init);
                (0..dimension)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect()
            })
            .collect();
        // center exactly, then scale to the requested RMS norm
        let mut mean = vec![0.0; dimension];
        for t in &tilts {
            for i in 0..dimension {
                mean[i] += t[i] / n_components as f64;
            }
        }
        for t in &mut tilts {
            for i in 0..dimension {
                t[i] -= mean[i];
            }
        }
        let rms = (tilts.iter().map(|t| vecn::norm_sq(t)).sum::<f64>() / n_components as f64)
            .sqrt();
        if rms > 0.0 && spread > 0.0 {
            let s = spread / rms;
            for t in &mut tilts {
                for v in t.iter_mut() {
                    *v *= s;
                }
            }
        } else {
            for t in &mut tilts {
                t.iter_mut().for_each(|v| *v = 0.0);
            }
        }
        let variance = minibatch_variance(&tilts, batch);
        Ok(GradientOracle::Minibatch {
            tilts,
            batch,
            variance,
        })
    }

    pub fn biased_decaying(sigma: Schedule, bias: Schedule) -> Result<Self> {
        sigma.validate_nonnegative("sigma")?;
        bias.validate_nonnegative("bias")?;
        Ok(GradientOracle::BiasedDecaying { sigma, bias })
    }

    /// One draw of `f_k` given the true gradient at the current state.
    pub fn sample_around(&self, true_grad: &[f64], k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self {
            GradientOracle::AdditiveGaussian { sigma } => {
                let s = sigma.eval(k);
                if s == 0.0 {
                    return true_grad.to_vec();
                }
                true_grad
                    .iter()
                    .map(|g| g + s * rng.sample::<f64, _>(StandardNormal))
                    .collect()
            }
            GradientOracle::Multiplicative { b } => {
                let d = (b - 1.0).sqrt();
                let s = if rng.gen_bool(0.5) { 1.0 + d } else { 1.0 - d };
                vecn::scale(true_grad, s)
            }
            GradientOracle::Minibatch { tilts, batch, .. } => {
                let chosen = sample_without_replacement(tilts.len(), *batch, rng);
                let mut out = true_grad.to_vec();
                for idx in chosen {
                    for i in 0..out.len() {
                        out[i] += tilts[idx][i] / *batch as f64;
                    }
                }
                out
            }
            GradientOracle::BiasedDecaying { sigma, bias } => {
                let s = sigma.eval(k);
                let b = bias.eval(k);
                let mut out: Vec<f64> = true_grad
                    .iter()
                    .map(|g| {
                        if s == 0.0 {
                            *g
                        } else {
                            g + s * rng.sample::<f64, _>(StandardNormal)
                        }
                    })
                    .collect();
                out[0] += b;
                out
            }
        }
    }

    /// One draw of `f_k` at `x` for the full objective.
    pub fn sample(
        &self,
        problem: &Problem,
        x: &[f64],
        k: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<f64>> {
        let g = problem.gradient(x)?;
        Ok(self.sample_around(&g, k, rng))
    }

    /// Declared `(a_k, b_k, c_k)` for a problem of dimension `n`.
    pub fn declared_moments(&self, n: usize, k: usize) -> (f64, f64, f64) {
        match self {
            GradientOracle::AdditiveGaussian { sigma } => {
                let s = sigma.eval(k);
                (0.0, 1.0, n as f64 * s * s)
            }
            GradientOracle::Multiplicative { b } => (0.0, *b, 0.0),
            GradientOracle::Minibatch { variance, .. } => (0.0, 1.0, *variance),
            GradientOracle::BiasedDecaying { sigma, bias } => {
                // ‖∇F + bias·e₁‖² ≤ 2‖∇F‖² + 2·bias², plus the Gaussian part
                let s = sigma.eval(k);
                let b = bias.eval(k);
                (0.0, 2.0, 2.0 * b * b + n as f64 * s * s)
            }
        }
    }

    /// Norm of the conditional bias `‖E[f_k | x_k] − ∇F(x_k)‖`.
    pub fn bias_norm(&self, k: usize) -> f64 {
        match self {
            GradientOracle::BiasedDecaying { bias, .. } => bias.eval(k),
            _ => 0.0,
        }
    }

    pub fn is_conditionally_unbiased(&self) -> bool {
        !matches!(self, GradientOracle::BiasedDecaying { .. })
    }

    /// Squared-error coefficients `(d_k, e_k)` for
    /// `E[‖f_k − ∇·‖² | x_k] ≤ d_k‖∇F‖² + e_k`, available for the oracle
    /// kinds whose error is independent of the state.
    pub fn error_moments(&self, n: usize, k: usize) -> Result<(f64, f64)> {
        match self {
            GradientOracle::AdditiveGaussian { sigma } => {
                let s = sigma.eval(k);
                Ok((0.0, n as f64 * s * s))
            }
            GradientOracle::Minibatch { variance, .. } => Ok((0.0, *variance)),
            _ => Err(Error::config(
                "this oracle kind has state-dependent error; it cannot drive the splitting scheme",
            )),
        }
    }
}

/// `E‖(1/m)Σ_{i∈J} δᵢ‖²` for a uniform size-`m` subset without replacement
/// of centered tilts. With `Σδᵢ = 0` this is
/// `(1/m)(1 − (m−1)/(n−1))·(1/n)Σ‖δᵢ‖²`, independent of the state.
fn minibatch_variance(tilts: &[Vec<f64>], batch: usize) -> f64 {
    let n = tilts.len() as f64;
    let m = batch as f64;
    let mean_sq = tilts.iter().map(|t| vecn::norm_sq(t)).sum::<f64>() / n;
    (1.0 / m) * (1.0 - (m - 1.0) / (n - 1.0)) * mean_sq
}

pub(crate) fn sample_without_replacement(
    n: usize,
    m: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    // partial Fisher-Yates on an index vector
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..m {
        let j = rng.gen_range(i..n);
        idx.swap(i, j);
    }
    idx.truncate(m);
    idx
}

/// Monte-Carlo check of the declared second-moment bound at a frozen state.
#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub mean: f64,
    pub se: f64,
    pub bound: f64,
    pub draws: usize,
    pub verdict: &'static str,
}

/// Compare the Monte-Carlo mean of `‖f_k‖²` over `m` draws against the
/// declared bound: fail only when the bound is refuted at four standard
/// errors, pass otherwise.
pub fn empirical_moment_check(
    oracle: &GradientOracle,
    problem: &Problem,
    x: &[f64],
    k: usize,
    m: usize,
    seed: u64,
) -> Result<MomentReport> {
    empirical_moment_check_against(oracle, problem, x, k, m, seed, None)
}

/// As [`empirical_moment_check`] but with an explicit `(a, b, c)` override,
/// used to certify externally declared coefficients.
pub fn empirical_moment_check_against(
    oracle: &GradientOracle,
    problem: &Problem,
    x: &[f64],
    k: usize,
    m: usize,
    seed: u64,
    declared: Option<(f64, f64, f64)>,
) -> Result<MomentReport> {
    if m < 1000 {
        return Err(Error::config("moment check needs at least 10³ draws"));
    }
    let f_gap = problem.evaluate(x)? - problem.f_star;
    let grad = problem.gradient(x)?;
    let (a, b, c) = declared.unwrap_or_else(|| oracle.declared_moments(problem.dimension, k));
    let bound = a * f_gap + b * vecn::norm_sq(&grad) + c;
    let samples: Vec<f64> = (0..m)
        .map(|r| {
            let mut rng = substream(seed, r as u64, k as u64, Role::Gradient);
            vecn::norm_sq(&oracle.sample_around(&grad, k, &mut rng))
        })
        .collect();
    let (mean, se) = vecn::mean_se(&samples);
    let verdict = if !mean.is_finite() {
        "inconclusive"
    } else if mean - 4.0 * se > bound {
        "fail"
    } else {
        "pass"
    };
    Ok(MomentReport {
        mean,
        se,
        bound,
        draws: m,
        verdict,
    })
}
