//! Exact and stochastic proximity operators for the quadratic convex part
//! `H(u) = (μ/2)‖u − z₀‖²`.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::oracles::gradient::sample_without_replacement;
use crate::problems::QuadraticTerm;
use crate::schedule::Schedule;
use crate::vecn;

/// Closed-form prox of the quadratic term:
/// `prox_{γH}(y) = (y + γμz₀)/(1 + γμ)`.
pub fn exact_prox(h: &QuadraticTerm, y: &[f64], gamma: f64) -> Result<Vec<f64>> {
    if gamma <= 0.0 {
        return Err(Error::config("prox step must be positive"));
    }
    if !vecn::all_finite(y) {
        return Err(Error::NonFinite("prox input"));
    }
    let gm = gamma * h.mu;
    Ok(y.iter()
        .zip(&h.center)
        .map(|(yi, zi)| (yi + gm * zi) / (1.0 + gm))
        .collect())
}

#[derive(Debug, Clone)]
pub enum ProxOracle {
    /// The closed-form prox itself.
    Exact,
    /// `P_k = Σ_{i∈J} ωᵢ prox_{γ_k Hᵢ}` over a uniform random subset `J` of
    /// size `m`, where the `Hᵢ = (μ/2)‖·−zᵢ‖²` share the curvature of `H`
    /// and reconstitute it through `Σωᵢ = 1`, `Σωᵢzᵢ = z₀`. Conditionally
    /// unbiased only at full participation `m = I`; the partial-participation
    /// bias is certified empirically, never assumed away.
    Federated {
        centers: Vec<Vec<f64>>,
        weights: Vec<f64>,
        subset: usize,
    },
    /// Exact prox plus a zero-mean Gaussian with total variance `e_k`
    /// (per-coordinate variance `e_k / N`). Unbiased with
    /// `E‖P_k(y) − prox(y)‖² = e_k` exactly.
    Perturbed { e: Schedule },
}

impl ProxOracle {
    pub fn federated(
        h: &QuadraticTerm,
        centers: Vec<Vec<f64>>,
        weights: Vec<f64>,
        subset: usize,
    ) -> Result<Self> {
        let count = centers.len();
        if count < 2 {
            return Err(Error::config("federated prox needs at least two terms"));
        }
        if weights.len() != count {
            return Err(Error::Dimension {
                expected: count,
                got: weights.len(),
            });
        }
        if subset == 0 || subset > count {
            return Err(Error::config(format!(
                "subset size {subset} outside 1..={count}"
            )));
        }
        if weights.iter().any(|w| *w <= 0.0) {
            return Err(Error::config("federated weights must be positive"));
        }
        let wsum: f64 = weights.iter().sum();
        if (wsum - 1.0).abs() > 1e-9 {
            return Err(Error::config(format!("federated weights sum to {wsum}, not 1")));
        }
        let mut recon = vec![0.0; h.center.len()];
        for (w, z) in weights.iter().zip(&centers) {
            if z.len() != h.center.len() {
                return Err(Error::Dimension {
                    expected: h.center.len(),
                    got: z.len(),
                });
            }
            for i in 0..recon.len() {
                recon[i] += w * z[i];
            }
        }
        if vecn::dist(&recon, &h.center) > 1e-9 {
            return Err(Error::config(
                "federated centers do not reconstitute the convex term's center",
            ));
        }
        Ok(ProxOracle::Federated {
            centers,
            weights,
            subset,
        })
    }

    pub fn perturbed(e: Schedule) -> Result<Self> {
        e.validate_nonnegative("e")?;
        Ok(ProxOracle::Perturbed { e })
    }

    /// One draw of `P_k(y)`.
    pub fn sample(
        &self,
        h: &QuadraticTerm,
        y: &[f64],
        gamma: f64,
        k: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<f64>> {
        match self {
            ProxOracle::Exact => exact_prox(h, y, gamma),
            ProxOracle::Federated {
                centers,
                weights,
                subset,
            } => {
                if gamma <= 0.0 {
                    return Err(Error::config("prox step must be positive"));
                }
                let chosen = sample_without_replacement(centers.len(), *subset, rng);
                let mut out = vec![0.0; y.len()];
                for idx in chosen {
                    let term = QuadraticTerm {
                        mu: h.mu,
                        center: centers[idx].clone(),
                    };
                    let p = exact_prox(&term, y, gamma)?;
                    for i in 0..out.len() {
                        out[i] += weights[idx] * p[i];
                    }
                }
                Ok(out)
            }
            ProxOracle::Perturbed { e } => {
                let base = exact_prox(h, y, gamma)?;
                let ek = e.eval(k);
                if ek == 0.0 {
                    return Ok(base);
                }
                let sd = (ek / y.len() as f64).sqrt();
                Ok(base
                    .iter()
                    .map(|b| b + sd * rng.sample::<f64, _>(StandardNormal))
                    .collect())
            }
        }
    }

    /// Declared `(d_k, e_k)` for the prox-error moment bound
    /// `E[‖P_k(y) − prox_{γ_k H}(y)‖² | x_k] ≤ d_k‖∇F(x_k)‖² + e_k`.
    /// For the federated oracle this is a working-box majorant computed by
    /// enumerating all subsets with `‖y‖ ≤ y_bound`.
    pub fn error_moments(&self, h: &QuadraticTerm, gamma: f64, k: usize, y_bound: f64) -> (f64, f64) {
        match self {
            ProxOracle::Exact => (0.0, 0.0),
            ProxOracle::Perturbed { e } => (0.0, e.eval(k)),
            ProxOracle::Federated {
                centers,
                weights,
                subset,
            } => {
                let gm = gamma * h.mu;
                let shrink = 1.0 / (1.0 + gm);
                let pull = gm * shrink;
                let mut worst: f64 = 0.0;
                let subsets = enumerate_subsets(centers.len(), *subset);
                for j in &subsets {
                    let wsum: f64 = j.iter().map(|i| weights[*i]).sum();
                    let mut zbar = vec![0.0; h.center.len()];
                    for i in j {
                        for c in 0..zbar.len() {
                            zbar[c] += weights[*i] * centers[*i][c];
                        }
                    }
                    // P(y) − prox(y) = (wsum − 1)·shrink·y + pull·(z̄_J − z₀)
                    let dev = (wsum - 1.0).abs() * shrink * y_bound
                        + pull * vecn::dist(&zbar, &h.center);
                    worst = worst.max(dev * dev);
                }
                (0.0, worst)
            }
        }
    }

    /// Whether `E[P_k(y) − prox_{γ_k H}(y) | x_k] = 0` holds by construction.
    pub fn claims_unbiased(&self) -> bool {
        match self {
            ProxOracle::Exact | ProxOracle::Perturbed { .. } => true,
            ProxOracle::Federated {
                centers, subset, ..
            } => *subset == centers.len(),
        }
    }
}

fn enumerate_subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(m);
    fn rec(start: usize, n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, m, cur, out);
            cur.pop();
        }
    }
    rec(0, n, m, &mut cur, &mut out);
    out
}
