//! Desingularizing functions and numerical Kurdyka-Łojasiewicz verification.
//!
//! Desingularizers are restricted to the Łojasiewicz power form
//! `φ(s) = c·s^{1−θ}/(1−θ)` with exponent `θ ∈ (0,1)` on a domain `[0, ζ)`:
//! all catalog objectives are semi-algebraic, where this form suffices.
//! The KL inequality `‖∇F(x)‖·φ'(F(x) − F_C) ≥ 1` is universally quantified
//! over a tube around a critical component; sampling can refute it or fail to
//! refute it, never prove it, so all verdicts here are three-valued and every
//! report carries the minimum observed margin.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::rng::{substream, Role};
use crate::schedule::Summability;
use crate::vecn;

/// Power-form desingularizer `φ(s) = c·s^{1−θ}/(1−θ)` on `[0, ζ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Desingularizer {
    pub c: f64,
    pub theta: f64,
    /// Domain bound; `f64::INFINITY` for the unbounded class.
    pub zeta: f64,
}

impl Desingularizer {
    pub fn new(c: f64, theta: f64, zeta: f64) -> Result<Desingularizer> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::config("desingularizer coefficient must be positive"));
        }
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::config("desingularizer exponent must lie in (0, 1)"));
        }
        if !(zeta > 0.0) {
            return Err(Error::config("desingularizer domain bound must be positive"));
        }
        Ok(Desingularizer { c, theta, zeta })
    }

    /// `φ(s)`; rejects `s` at or past the domain bound.
    pub fn phi(&self, s: f64) -> Result<f64> {
        if !s.is_finite() || s < 0.0 {
            return Err(Error::domain(format!("phi argument {s} outside [0, ζ)")));
        }
        if s >= self.zeta {
            return Err(Error::domain(format!(
                "phi argument {s} ≥ ζ = {}; extend to the unbounded class first",
                self.zeta
            )));
        }
        Ok(self.c * s.powf(1.0 - self.theta) / (1.0 - self.theta))
    }

    /// `φ'(s) = c·s^{−θ}`; only defined on the open window `(0, ζ)`.
    pub fn phi_prime(&self, s: f64) -> Result<f64> {
        if !s.is_finite() || s <= 0.0 {
            return Err(Error::domain(format!(
                "phi' argument {s} outside the window (0, ζ)"
            )));
        }
        if s >= self.zeta {
            return Err(Error::domain(format!(
                "phi' argument {s} ≥ ζ = {}",
                self.zeta
            )));
        }
        Ok(self.c * s.powf(-self.theta))
    }

    /// Left limits at the domain bound: `(lim φ, lim φ')`.
    pub fn limits_at_bound(&self) -> (f64, f64) {
        let l1 = self.c * self.zeta.powf(1.0 - self.theta) / (1.0 - self.theta);
        let l2 = self.c * self.zeta.powf(-self.theta);
        (l1, l2)
    }

    /// Bounded extension to `[0, ∞)`. A desingularizer that is already
    /// unbounded-domain is returned unchanged (no extension applied).
    pub fn extend_to_infinity(&self) -> ExtendedDesingularizer {
        if self.zeta.is_infinite() {
            return ExtendedDesingularizer {
                base: *self,
                l1: f64::INFINITY,
                l2: 0.0,
                extended: false,
            };
        }
        let (l1, l2) = self.limits_at_bound();
        ExtendedDesingularizer {
            base: *self,
            l1,
            l2,
            extended: true,
        }
    }
}

/// Bounded extension of a power-form desingularizer past its domain bound:
/// the original function on `[0, ζ)` and `l1 + l2·ζ·(1 − ζ/s)` beyond, which
/// is increasing, concave, continuous at `ζ` and bounded by `l1 + l2·ζ`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExtendedDesingularizer {
    pub base: Desingularizer,
    pub l1: f64,
    pub l2: f64,
    extended: bool,
}

impl ExtendedDesingularizer {
    pub fn phi(&self, s: f64) -> Result<f64> {
        if !s.is_finite() || s < 0.0 {
            return Err(Error::domain(format!("phi argument {s} outside [0, ∞)")));
        }
        if !self.extended || s < self.base.zeta {
            return self.base.phi(s);
        }
        Ok(self.l1 + self.l2 * self.base.zeta * (1.0 - self.base.zeta / s))
    }

    /// Clamp-at-zero evaluation for arguments that are slightly negative due
    /// to estimated limits; callers count clamps separately.
    pub fn phi_clamped(&self, s: f64) -> f64 {
        self.phi(s.max(0.0)).unwrap_or(0.0)
    }

    pub fn phi_prime(&self, s: f64) -> Result<f64> {
        if !self.extended || s < self.base.zeta {
            return self.base.phi_prime(s);
        }
        Ok(self.l2 * self.base.zeta * self.base.zeta / (s * s))
    }

    /// Upper bound `l1 + l2·ζ` of the extension (`+∞` if never extended).
    pub fn upper_bound(&self) -> f64 {
        if self.extended {
            self.l1 + self.l2 * self.base.zeta
        } else {
            f64::INFINITY
        }
    }

    pub fn is_extended(&self) -> bool {
        self.extended
    }
}

/// Sum of per-component desingularizers on a common domain `[0, ζ)`; the
/// merged function produced by the multi-component uniformization. Its
/// derivative `Σᵢ φᵢ'` dominates each `φᵢ'`, which is what the KL inequality
/// needs.
#[derive(Debug, Clone, Serialize)]
pub struct SumDesingularizer {
    pub parts: Vec<Desingularizer>,
    pub zeta: f64,
}

impl SumDesingularizer {
    pub fn phi(&self, s: f64) -> Result<f64> {
        if s >= self.zeta {
            return Err(Error::domain(format!("argument {s} ≥ merged ζ {}", self.zeta)));
        }
        self.parts.iter().map(|d| d.phi(s)).sum()
    }

    pub fn phi_prime(&self, s: f64) -> Result<f64> {
        if s >= self.zeta {
            return Err(Error::domain(format!("argument {s} ≥ merged ζ {}", self.zeta)));
        }
        self.parts.iter().map(|d| d.phi_prime(s)).sum()
    }
}

/// Outcome of the pointwise KL inequality at a single state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum KlPointCheck {
    /// In-window and `‖∇F‖·φ'(F − F_C) ≥ 1`; margin is the excess over 1.
    Holds { margin: f64 },
    /// In-window but the product falls below 1.
    Violated { margin: f64 },
    /// `F(x) − F_C` outside `(0, ζ)`: the inequality says nothing here.
    OutOfWindow,
}

/// Pointwise KL inequality against one critical component.
pub fn kl_check_pointwise(
    problem: &Problem,
    component_index: usize,
    d: &Desingularizer,
    x: &[f64],
) -> Result<KlPointCheck> {
    let comp = problem
        .components
        .get(component_index)
        .ok_or_else(|| Error::config(format!("no critical component {component_index}")))?;
    let gap = problem.evaluate(x)? - comp.level_value;
    if gap <= 0.0 || gap >= d.zeta {
        return Ok(KlPointCheck::OutOfWindow);
    }
    let grad_norm = vecn::norm(&problem.gradient(x)?);
    let margin = grad_norm * d.phi_prime(gap)? - 1.0;
    if margin >= 0.0 {
        Ok(KlPointCheck::Holds { margin })
    } else {
        Ok(KlPointCheck::Violated { margin })
    }
}

/// Per-component tally of a sampled uniform KL check.
#[derive(Debug, Clone, Serialize)]
pub struct KlComponentReport {
    pub component: usize,
    pub checked: usize,
    pub holds: usize,
    pub violated: usize,
    pub out_of_window: usize,
    pub inconclusive: bool,
    /// `min ‖∇F‖·φ'(·) − 1` over in-window samples; `None` when none seen.
    pub min_margin: Option<f64>,
    pub epsilon: f64,
    pub zeta: f64,
    pub c: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KlReport {
    pub components: Vec<KlComponentReport>,
    pub violated_total: usize,
    pub min_margin: Option<f64>,
}

/// Sample `n_samples` points in the ε-tube of every component (rejection
/// sampling in the inflated bounding box, capped at 100× the target), filter
/// by the KL window `0 < F − F_C < ζ`, and tally the inequality.
pub fn kl_check_uniform(
    problem: &Problem,
    d: &Desingularizer,
    epsilon: f64,
    zeta: f64,
    n_samples: usize,
    seed: u64,
) -> Result<KlReport> {
    if epsilon <= 0.0 || zeta <= 0.0 {
        return Err(Error::config("tube radius and window bound must be positive"));
    }
    if zeta > d.zeta {
        return Err(Error::config(format!(
            "window bound {zeta} exceeds the desingularizer domain {}",
            d.zeta
        )));
    }
    let window = Desingularizer { zeta, ..*d };
    let mut components = Vec::with_capacity(problem.components.len());
    let mut violated_total = 0;
    let mut global_margin: Option<f64> = None;
    for (ci, comp) in problem.components.iter().enumerate() {
        let (lo, hi) = comp.geometry.bounding_box();
        let lo: Vec<f64> = lo.iter().map(|v| v - epsilon).collect();
        let hi: Vec<f64> = hi.iter().map(|v| v + epsilon).collect();
        let mut rng = substream(seed, ci as u64, 0, Role::Sampling);
        let mut collected = 0usize;
        let mut attempts = 0usize;
        let mut holds = 0usize;
        let mut violated = 0usize;
        let mut out_of_window = 0usize;
        let mut min_margin: Option<f64> = None;
        let cap = n_samples.saturating_mul(100);
        let mut x = vec![0.0; problem.dimension];
        while collected < n_samples && attempts < cap {
            attempts += 1;
            for i in 0..problem.dimension {
                x[i] = rng.gen_range(lo[i]..=hi[i]);
            }
            if comp.distance(&x) >= epsilon {
                continue;
            }
            collected += 1;
            match kl_check_pointwise(problem, ci, &window, &x)? {
                KlPointCheck::Holds { margin } => {
                    holds += 1;
                    min_margin = Some(min_margin.map_or(margin, |m: f64| m.min(margin)));
                }
                KlPointCheck::Violated { margin } => {
                    violated += 1;
                    min_margin = Some(min_margin.map_or(margin, |m: f64| m.min(margin)));
                }
                KlPointCheck::OutOfWindow => out_of_window += 1,
            }
        }
        let checked = holds + violated;
        violated_total += violated;
        if let Some(m) = min_margin {
            global_margin = Some(global_margin.map_or(m, |g: f64| g.min(m)));
        }
        components.push(KlComponentReport {
            component: ci,
            checked,
            holds,
            violated,
            out_of_window,
            inconclusive: checked == 0,
            min_margin,
            epsilon,
            zeta,
            c: d.c,
            theta: d.theta,
        });
    }
    Ok(KlReport {
        components,
        violated_total,
        min_margin: global_margin,
    })
}

/// Inputs for one component of the merged uniformization.
#[derive(Debug, Clone)]
pub struct ComponentKl {
    pub desingularizer: Desingularizer,
    pub epsilon: f64,
    pub zeta: f64,
}

/// Result of merging per-component KL data across components at different
/// levels into a single `(φ, ζ, ε)` triple.
#[derive(Debug, Clone, Serialize)]
pub struct MergedKl {
    pub phi: SumDesingularizer,
    pub zeta: f64,
    pub epsilon: f64,
    /// Level-separation window `υ·min_{levels differ} |F_{C_i} − F_{C_j}|`;
    /// `None` in the single-component or degenerate all-equal cases.
    pub zeta_tilde: Option<f64>,
    /// Per-component radii: requested ε_i and the achieved continuity radius.
    pub radii: Vec<RadiusSearch>,
    /// All level values coincide while several components exist.
    pub degenerate_levels: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RadiusSearch {
    pub component: usize,
    pub requested: f64,
    pub achieved: Option<f64>,
}

/// Merge per-component desingularizers into one valid near the whole
/// critical set. The value window shrinks to `min(ζ_i, ζ̃)` where `ζ̃`
/// separates distinct critical levels, and the tube radius shrinks to
/// `δ·min ε̃_i` where each `ε̃_i` is found by a decreasing grid search for
/// a radius keeping `|F − F_{C_i}| < ζ̃` on sampled tube points.
pub fn build_extended_uniform(
    problem: &Problem,
    per_component: &[ComponentKl],
    upsilon: f64,
    delta: f64,
    n_samples: usize,
    seed: u64,
) -> Result<MergedKl> {
    if per_component.len() != problem.components.len() {
        return Err(Error::Dimension {
            expected: problem.components.len(),
            got: per_component.len(),
        });
    }
    if !(upsilon > 0.0 && upsilon < 0.5) {
        return Err(Error::config("level-separation factor must lie in (0, 1/2)"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::config("radius shrink factor must lie in (0, 1)"));
    }
    let levels: Vec<f64> = problem.components.iter().map(|c| c.level_value).collect();

    if per_component.len() == 1 {
        // single component: the merged data is the component's own data
        let only = &per_component[0];
        return Ok(MergedKl {
            phi: SumDesingularizer {
                parts: vec![only.desingularizer],
                zeta: only.zeta,
            },
            zeta: only.zeta,
            epsilon: only.epsilon,
            zeta_tilde: None,
            radii: vec![RadiusSearch {
                component: 0,
                requested: only.epsilon,
                achieved: Some(only.epsilon),
            }],
            degenerate_levels: false,
        });
    }

    let mut min_gap = f64::INFINITY;
    for i in 0..levels.len() {
        for j in (i + 1)..levels.len() {
            let gap = (levels[i] - levels[j]).abs();
            if gap > 1e-12 {
                min_gap = min_gap.min(gap);
            }
        }
    }
    let degenerate = !min_gap.is_finite();
    let zeta_tilde = if degenerate {
        None
    } else {
        Some(upsilon * min_gap)
    };

    let mut zeta = per_component
        .iter()
        .map(|c| c.zeta)
        .fold(f64::INFINITY, f64::min);
    if let Some(zt) = zeta_tilde {
        zeta = zeta.min(zt);
    }

    // Continuity radii: largest radius on a decreasing grid such that the
    // sampled tube keeps |F − F_{C_i}| below the separation window. With
    // degenerate levels there is nothing to separate; keep the requested ε_i.
    let mut radii = Vec::with_capacity(per_component.len());
    let mut min_eps_tilde = f64::INFINITY;
    for (ci, spec) in per_component.iter().enumerate() {
        let achieved = match zeta_tilde {
            None => Some(spec.epsilon),
            Some(zt) => {
                let mut rng = substream(seed, ci as u64, 1, Role::Sampling);
                let mut found = None;
                let mut radius = spec.epsilon;
                for _ in 0..80 {
                    if tube_value_spread_below(problem, ci, radius, zt, n_samples, &mut rng) {
                        found = Some(radius);
                        break;
                    }
                    radius *= 0.8;
                }
                found
            }
        };
        if let Some(a) = achieved {
            min_eps_tilde = min_eps_tilde.min(a);
        }
        radii.push(RadiusSearch {
            component: ci,
            requested: spec.epsilon,
            achieved,
        });
    }
    if !min_eps_tilde.is_finite() {
        return Err(Error::domain(
            "no continuity radius found for any component; value window too tight".to_string(),
        ));
    }
    let epsilon = delta * min_eps_tilde;

    let parts: Vec<Desingularizer> = per_component.iter().map(|c| c.desingularizer).collect();
    Ok(MergedKl {
        phi: SumDesingularizer { parts, zeta },
        zeta,
        epsilon,
        zeta_tilde,
        radii,
        degenerate_levels: degenerate,
    })
}

/// Does every sampled point with `dist(x, C_i) < radius` keep
/// `|F(x) − F_{C_i}| < bound`?
fn tube_value_spread_below(
    problem: &Problem,
    component: usize,
    radius: f64,
    bound: f64,
    n_samples: usize,
    rng: &mut impl Rng,
) -> bool {
    let comp = &problem.components[component];
    let (lo, hi) = comp.geometry.bounding_box();
    let lo: Vec<f64> = lo.iter().map(|v| v - radius).collect();
    let hi: Vec<f64> = hi.iter().map(|v| v + radius).collect();
    let mut x = vec![0.0; problem.dimension];
    let mut seen = 0usize;
    let mut attempts = 0usize;
    let cap = n_samples.saturating_mul(100).max(100);
    while seen < n_samples && attempts < cap {
        attempts += 1;
        for i in 0..problem.dimension {
            x[i] = rng.gen_range(lo[i]..=hi[i]);
        }
        if comp.distance(&x) >= radius {
            continue;
        }
        seen += 1;
        let gap = (problem.eval_unchecked(&x) - comp.level_value).abs();
        if gap >= bound {
            return false;
        }
    }
    seen > 0
}

/// Summability verdict helper re-exported where reports need it.
pub fn verdict_label(s: Summability) -> &'static str {
    match s {
        Summability::Yes => "yes",
        Summability::No => "no",
        Summability::Unknown => "unknown",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sqrt_like() -> Desingularizer {
        // φ(s) = √s on [0, 1)
        Desingularizer::new(0.5, 0.5, 1.0).unwrap()
    }

    #[test]
    fn phi_values() {
        let d = Desingularizer::new(1.0, 0.5, f64::INFINITY).unwrap();
        assert!((d.phi(4.0).unwrap() - 4.0).abs() < 1e-15);
        assert_eq!(d.phi(0.0).unwrap(), 0.0);
        let d2 = Desingularizer::new(2.0, 0.5, f64::INFINITY).unwrap();
        assert!((d2.phi(1.0).unwrap() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn phi_prime_values() {
        let d = Desingularizer::new(1.0, 0.5, f64::INFINITY).unwrap();
        assert!((d.phi_prime(4.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((d.phi_prime(0.01).unwrap() - 10.0).abs() < 1e-12);
        let d3 = Desingularizer::new(3.0, 0.5, f64::INFINITY).unwrap();
        assert!((d3.phi_prime(9.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phi_domain_errors() {
        let d = sqrt_like();
        assert!(d.phi(1.0).is_err());
        assert!(d.phi(2.0).is_err());
        assert!(d.phi_prime(0.0).is_err());
        assert!(d.phi_prime(-1.0).is_err());
    }

    #[test]
    fn extension_values() {
        let ext = sqrt_like().extend_to_infinity();
        assert!((ext.l1 - 1.0).abs() < 1e-15);
        assert!((ext.l2 - 0.5).abs() < 1e-15);
        assert!((ext.phi(2.0).unwrap() - 1.25).abs() < 1e-15);
        assert!((ext.phi(0.25).unwrap() - 0.5).abs() < 1e-15);
        assert!((ext.upper_bound() - 1.5).abs() < 1e-15);
        // the sup is approached from below
        assert!(ext.phi(1e9).unwrap() < ext.upper_bound());
        assert!(ext.phi(1e9).unwrap() > ext.upper_bound() - 1e-8);
    }

    #[test]
    fn extension_of_unbounded_domain_is_identity() {
        let d = Desingularizer::new(1.0, 0.5, f64::INFINITY).unwrap();
        let ext = d.extend_to_infinity();
        assert!(!ext.is_extended());
        assert!((ext.phi(100.0).unwrap() - d.phi(100.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn pointwise_circle_cases() {
        let p = Problem::circle_quartic().unwrap();
        let d = Desingularizer::new(1.0, 0.5, f64::INFINITY).unwrap();
        match kl_check_pointwise(&p, 0, &d, &[0.95, 0.0]).unwrap() {
            KlPointCheck::Holds { margin } => assert!((margin - 2.8).abs() < 1e-9),
            other => panic!("expected holds, got {other:?}"),
        }
        match kl_check_pointwise(&p, 0, &d, &[0.2, 0.0]).unwrap() {
            KlPointCheck::Violated { margin } => assert!((margin + 0.2).abs() < 1e-9),
            other => panic!("expected violated, got {other:?}"),
        }
        // on the critical circle itself: gap = 0 → window empty
        assert_eq!(
            kl_check_pointwise(&p, 0, &d, &[1.0, 0.0]).unwrap(),
            KlPointCheck::OutOfWindow
        );
    }

    #[test]
    fn pointwise_quadratic_margin_is_constant() {
        let p = Problem::quadratic(2, 1.0).unwrap();
        let d = Desingularizer::new(2f64.sqrt(), 0.5, f64::INFINITY).unwrap();
        for x in [[0.5, 0.0], [3.0, -1.0], [0.01, 0.02]] {
            match kl_check_pointwise(&p, 0, &d, &x).unwrap() {
                KlPointCheck::Holds { margin } => assert!((margin - 1.0).abs() < 1e-9),
                other => panic!("expected constant margin 1, got {other:?}"),
            }
        }
    }

    #[test]
    fn uniform_circle_defaults_hold() {
        let p = Problem::circle_quartic().unwrap();
        let d = Desingularizer::new(2.0, 0.5, f64::INFINITY).unwrap();
        let rep = kl_check_uniform(&p, &d, 0.2, 0.1, 2000, 42).unwrap();
        assert_eq!(rep.violated_total, 0);
        // circle component is conclusive, the local-max origin is not
        assert!(!rep.components[0].inconclusive);
        assert!(rep.components[1].inconclusive);
        assert!(rep.min_margin.unwrap() > 8.0 * 0.8 - 1.0 - 0.05);
    }

    #[test]
    fn uniform_circle_small_coefficient_violates() {
        let p = Problem::circle_quartic().unwrap();
        let d = Desingularizer::new(0.1, 0.5, f64::INFINITY).unwrap();
        let rep = kl_check_uniform(&p, &d, 0.1, 0.1, 2000, 42).unwrap();
        assert!(rep.violated_total > 0);
        assert!(rep.min_margin.unwrap() < 0.0);
    }

    #[test]
    fn uniform_zero_samples_inconclusive() {
        let p = Problem::circle_quartic().unwrap();
        let d = Desingularizer::new(1.0, 0.5, f64::INFINITY).unwrap();
        let rep = kl_check_uniform(&p, &d, 0.2, 0.1, 0, 1).unwrap();
        assert!(rep.components.iter().all(|c| c.inconclusive));
    }

    #[test]
    fn merged_circle_levels() {
        let p = Problem::circle_quartic().unwrap();
        let spec = |zeta: f64| ComponentKl {
            desingularizer: Desingularizer::new(1.0, 0.5, zeta).unwrap(),
            epsilon: 0.2,
            zeta,
        };
        let merged =
            build_extended_uniform(&p, &[spec(0.5), spec(0.5)], 0.25, 0.5, 500, 3).unwrap();
        assert!((merged.zeta_tilde.unwrap() - 0.25).abs() < 1e-15);
        assert!((merged.zeta - 0.25).abs() < 1e-15);
        assert!(merged.epsilon > 0.0 && merged.epsilon < 0.2);
        // merged derivative is the sum of the parts
        let s = 0.04;
        let expect: f64 = merged
            .phi
            .parts
            .iter()
            .map(|d| d.phi_prime(s).unwrap())
            .sum();
        assert!((merged.phi.phi_prime(s).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn merged_single_component_passthrough() {
        let p = Problem::quadratic(2, 1.0).unwrap();
        let spec = ComponentKl {
            desingularizer: Desingularizer::new(1.0, 0.5, 0.7).unwrap(),
            epsilon: 0.3,
            zeta: 0.7,
        };
        let merged = build_extended_uniform(&p, &[spec], 0.25, 0.5, 100, 3).unwrap();
        assert_eq!(merged.epsilon, 0.3);
        assert_eq!(merged.zeta, 0.7);
        assert!(merged.zeta_tilde.is_none());
    }

    #[test]
    fn merged_derivative_sums() {
        let d1 = Desingularizer::new(1.0, 0.5, 1.0).unwrap();
        let d2 = Desingularizer::new(2.0, 0.5, 1.0).unwrap();
        let merged = SumDesingularizer {
            parts: vec![d1, d2],
            zeta: 1.0,
        };
        assert!((merged.phi_prime(0.25).unwrap() - 3.0 / 0.5).abs() < 1e-12);
    }
}
