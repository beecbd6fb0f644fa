//! Stochastic self-adjoint preconditioners with spectrum confined to
//! `[μ_k, ν_k]` by construction.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::schedule::Schedule;
use crate::vecn;

#[derive(Debug, Clone)]
pub enum PreconditionerModel {
    Identity,
    /// Diagonal entries i.i.d. uniform on `[μ_k, ν_k]`.
    RandomDiagonal { mu: Schedule, nu: Schedule },
    /// Quasi-Newton style rank-two update of the identity from a random
    /// curvature pair, with eigenvalues clipped into `[μ_k, ν_k]`. The
    /// update acts on a two-dimensional subspace, so the clipping is done on
    /// a closed-form 2×2 eigendecomposition.
    CappedBfgs { mu: Schedule, nu: Schedule },
}

impl PreconditionerModel {
    /// Declared spectrum bounds at iteration `k`.
    pub fn spectrum(&self, k: usize) -> (f64, f64) {
        match self {
            PreconditionerModel::Identity => (1.0, 1.0),
            PreconditionerModel::RandomDiagonal { mu, nu }
            | PreconditionerModel::CappedBfgs { mu, nu } => (mu.eval(k), nu.eval(k)),
        }
    }

    pub fn validate(&self, horizon: usize) -> Result<()> {
        for k in 0..horizon.max(1) {
            let (mu, nu) = self.spectrum(k);
            if mu <= 0.0 || nu < mu {
                return Err(Error::config(format!(
                    "preconditioner spectrum [{mu}, {nu}] invalid at iteration {k}"
                )));
            }
        }
        Ok(())
    }

    /// Draw the iteration-`k` operator.
    pub fn sample(&self, n: usize, k: usize, rng: &mut ChaCha8Rng) -> Result<SampledOperator> {
        let (mu, nu) = self.spectrum(k);
        if mu <= 0.0 || nu < mu {
            return Err(Error::config(format!(
                "preconditioner spectrum [{mu}, {nu}] invalid at iteration {k}"
            )));
        }
        match self {
            PreconditionerModel::Identity => Ok(SampledOperator::Identity),
            PreconditionerModel::RandomDiagonal { .. } => {
                let diag = (0..n).map(|_| rng.gen_range(mu..=nu)).collect();
                Ok(SampledOperator::Diagonal(diag))
            }
            PreconditionerModel::CappedBfgs { .. } => Ok(sample_capped_bfgs(n, mu, nu, rng)),
        }
    }
}

/// A realized self-adjoint operator, applied matrix-free.
#[derive(Debug, Clone)]
pub enum SampledOperator {
    Identity,
    Diagonal(Vec<f64>),
    /// Identity scaled by `off` outside span{q1, q2}; the symmetric 2×2
    /// matrix `[[a, b], [b, d]]` on the plane, in the orthonormal basis
    /// `(q1, q2)`.
    TwoPlane {
        q1: Vec<f64>,
        q2: Vec<f64>,
        a: f64,
        b: f64,
        d: f64,
        off: f64,
    },
    /// Degenerate rank-one case: scalar `lam` along `q`, `off` elsewhere.
    Ray { q: Vec<f64>, lam: f64, off: f64 },
}

impl SampledOperator {
    pub fn apply(&self, e: &[f64]) -> Vec<f64> {
        match self {
            SampledOperator::Identity => e.to_vec(),
            SampledOperator::Diagonal(diag) => {
                e.iter().zip(diag).map(|(v, d)| v * d).collect()
            }
            SampledOperator::TwoPlane {
                q1,
                q2,
                a,
                b,
                d,
                off,
            } => {
                let c1 = vecn::dot(q1, e);
                let c2 = vecn::dot(q2, e);
                let y1 = a * c1 + b * c2;
                let y2 = b * c1 + d * c2;
                e.iter()
                    .enumerate()
                    .map(|(i, v)| off * (v - c1 * q1[i] - c2 * q2[i]) + y1 * q1[i] + y2 * q2[i])
                    .collect()
            }
            SampledOperator::Ray { q, lam, off } => {
                let c = vecn::dot(q, e);
                e.iter()
                    .enumerate()
                    .map(|(i, v)| off * (v - c * q[i]) + lam * c * q[i])
                    .collect()
            }
        }
    }

    /// Dense matrix realization, for symmetry checks and small-scale tests.
    pub fn materialize(&self, n: usize) -> Vec<Vec<f64>> {
        let mut cols = Vec::with_capacity(n);
        let mut e = vec![0.0; n];
        for i in 0..n {
            e[i] = 1.0;
            cols.push(self.apply(&e));
            e[i] = 0.0;
        }
        cols
    }

    /// Rayleigh quotient `⟨e | U e⟩ / ‖e‖²`.
    pub fn rayleigh(&self, e: &[f64]) -> f64 {
        vecn::dot(e, &self.apply(e)) / vecn::norm_sq(e)
    }
}

fn sample_capped_bfgs(n: usize, mu: f64, nu: f64, rng: &mut ChaCha8Rng) -> SampledOperator {
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
    };
    let mut s = draw(rng);
    let ns = vecn::norm(&s);
    if ns < 1e-12 {
        return SampledOperator::Identity;
    }
    s.iter_mut().for_each(|v| *v /= ns);
    let mut y = draw(rng);
    // enforce positive curvature pairing
    if vecn::dot(&s, &y) < 0.0 {
        y.iter_mut().for_each(|v| *v = -*v);
    }
    let sy = vecn::dot(&s, &y);
    let off = 1.0f64.clamp(mu, nu);
    if sy < 1e-10 || n == 1 {
        return SampledOperator::Ray {
            q: s,
            lam: off,
            off,
        };
    }
    // orthonormal basis of span{s, y}
    let q1 = s.clone();
    let mut u = vecn::axpy(&y, -vecn::dot(&y, &q1), &q1);
    let nu_ = vecn::norm(&u);
    if nu_ < 1e-10 {
        // y parallel to s: update eigenvalue along s is ‖y‖/⟨s,y⟩·… reduces
        // to 1/⟨s,y⟩ scaled; clip it
        let lam = (1.0 / sy).clamp(mu, nu);
        return SampledOperator::Ray { q: q1, lam, off };
    }
    u.iter_mut().for_each(|v| *v /= nu_);
    let q2 = u;
    // H = (I − ρ s yᵀ)(I − ρ y sᵀ) + ρ s sᵀ with ρ = 1/⟨s, y⟩
    let rho = 1.0 / sy;
    let hv = |v: &[f64]| -> Vec<f64> {
        let sv = vecn::dot(&s, v);
        let yv = vecn::dot(&y, v);
        let yy = vecn::norm_sq(&y);
        v.iter()
            .enumerate()
            .map(|(i, x)| {
                x - rho * (sv * y[i] + yv * s[i]) + rho * rho * yy * sv * s[i] + rho * sv * s[i]
            })
            .collect()
    };
    let h1 = hv(&q1);
    let h2 = hv(&q2);
    let m11 = vecn::dot(&q1, &h1);
    let m12 = 0.5 * (vecn::dot(&q1, &h2) + vecn::dot(&q2, &h1));
    let m22 = vecn::dot(&q2, &h2);
    // closed-form 2×2 symmetric eigendecomposition, then clip
    let tr = m11 + m22;
    let det = m11 * m22 - m12 * m12;
    let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
    let l1 = tr / 2.0 + disc;
    let l2 = tr / 2.0 - disc;
    let (c, sn) = if m12.abs() < 1e-14 {
        (1.0, 0.0)
    } else {
        let t = (l1 - m11) / m12;
        let nrm = (1.0 + t * t).sqrt();
        (1.0 / nrm, t / nrm)
    };
    let l1c = l1.clamp(mu, nu);
    let l2c = l2.clamp(mu, nu);
    // reconstruct clipped 2×2 in the (q1, q2) basis
    let a = l1c * c * c + l2c * sn * sn;
    let b = (l1c - l2c) * c * sn;
    let d = l1c * sn * sn + l2c * c * c;
    SampledOperator::TwoPlane {
        q1,
        q2,
        a,
        b,
        d,
        off,
    }
}
