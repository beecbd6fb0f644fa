//! Objective catalog: coercive differentiable test functions with exact
//! gradients, known minimum values and closed-form critical-set geometry.
//!
//! Every instance documents a working box on which its gradient Lipschitz
//! constant holds; the quartics are not globally Lipschitz-differentiable, so
//! trajectory code flags box exits instead of trusting the constant outside.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{substream, Role};
use crate::vecn;

/// Geometry of one connected (or finite) piece of the critical set.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Geometry {
    Point { point: Vec<f64> },
    Sphere { center: Vec<f64>, radius: f64 },
    FiniteSet { points: Vec<Vec<f64>> },
}

impl Geometry {
    /// Exact Euclidean distance to the piece.
    pub fn distance(&self, x: &[f64]) -> f64 {
        match self {
            Geometry::Point { point } => vecn::dist(x, point),
            Geometry::Sphere { center, radius } => (vecn::dist(x, center) - radius).abs(),
            Geometry::FiniteSet { points } => points
                .iter()
                .map(|p| vecn::dist(x, p))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Axis-aligned bounding box `(lo, hi)` of the piece.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            Geometry::Point { point } => (point.clone(), point.clone()),
            Geometry::Sphere { center, radius } => (
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            ),
            Geometry::FiniteSet { points } => {
                let n = points[0].len();
                let mut lo = vec![f64::INFINITY; n];
                let mut hi = vec![f64::NEG_INFINITY; n];
                for p in points {
                    for i in 0..n {
                        lo[i] = lo[i].min(p[i]);
                        hi[i] = hi[i].max(p[i]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// A point of the piece, drawn uniformly where that makes sense.
    pub fn sample_point(&self, rng: &mut impl Rng) -> Vec<f64> {
        match self {
            Geometry::Point { point } => point.clone(),
            Geometry::Sphere { center, radius } => {
                // uniform direction via normalized Gaussian
                let n = center.len();
                loop {
                    let dir: Vec<f64> = (0..n)
                        .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                        .collect();
                    let norm = vecn::norm(&dir);
                    if norm > 1e-12 {
                        return center
                            .iter()
                            .zip(&dir)
                            .map(|(c, d)| c + radius * d / norm)
                            .collect();
                    }
                }
            }
            Geometry::FiniteSet { points } => points[rng.gen_range(0..points.len())].clone(),
        }
    }
}

/// One piece of the critical set, with the objective value it carries.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalComponent {
    pub geometry: Geometry,
    pub level_value: f64,
}

impl CriticalComponent {
    pub fn distance(&self, x: &[f64]) -> f64 {
        self.geometry.distance(x)
    }
}

/// The convex quadratic part `H(u) = (μ/2)·‖u − z₀‖²` of a composite
/// objective. Its prox has the closed form `(y + γμz₀)/(1 + γμ)`.
#[derive(Debug, Clone, Serialize)]
pub struct QuadraticTerm {
    pub mu: f64,
    pub center: Vec<f64>,
}

impl QuadraticTerm {
    pub fn eval(&self, x: &[f64]) -> f64 {
        0.5 * self.mu * vecn::norm_sq(&vecn::sub(x, &self.center))
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        vecn::sub(x, &self.center)
            .iter()
            .map(|d| self.mu * d)
            .collect()
    }
}

/// Smooth/convex split of a composite objective `F = G + H`.
#[derive(Debug, Clone, Serialize)]
pub struct Split {
    /// Lipschitz constant of the smooth part's gradient on the working box.
    pub beta_g: f64,
    /// Lipschitz constant of the convex part's gradient (`μ` for a quadratic).
    pub beta_h: f64,
    pub h: QuadraticTerm,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
enum Kind {
    Quadratic { beta: f64 },
    DoubleWell1d,
    CircleQuartic,
    CompositeQuarticQuadratic,
}

/// A catalog objective: dimension, exact gradient, minimum value, gradient
/// Lipschitz constant on the working box, and critical components.
#[derive(Debug, Clone, Serialize)]
pub struct Problem {
    pub id: String,
    pub dimension: usize,
    kind: Kind,
    pub f_star: f64,
    pub beta: f64,
    pub split: Option<Split>,
    pub components: Vec<CriticalComponent>,
    /// Half-width of the sup-norm working box on which `beta` is valid.
    pub working_box: f64,
    /// Radius at which the coercivity probe verified `F > F(0) + 1`.
    pub coercivity_radius: f64,
}

impl Problem {
    /// `F(x) = (β/2)‖x‖²`; minimum 0 at the origin.
    pub fn quadratic(dimension: usize, beta: f64) -> Result<Problem> {
        if dimension == 0 || beta <= 0.0 {
            return Err(Error::config("quadratic needs dimension ≥ 1 and β > 0"));
        }
        let origin = vec![0.0; dimension];
        let mut p = Problem {
            id: format!("quadratic(n={dimension},beta={beta})"),
            dimension,
            kind: Kind::Quadratic { beta },
            f_star: 0.0,
            beta,
            split: None,
            components: vec![CriticalComponent {
                geometry: Geometry::Point { point: origin },
                level_value: 0.0,
            }],
            working_box: 10.0,
            coercivity_radius: 0.0,
        };
        p.coercivity_radius = p.probe_coercivity()?;
        Ok(p)
    }

    /// `F(x) = (x² − 1)²` in one dimension. Critical points −1, 0, 1 at
    /// levels 0, 1, 0; the minimizers are ±1.
    pub fn double_well_1d() -> Result<Problem> {
        let comp = |t: f64, level: f64| CriticalComponent {
            geometry: Geometry::Point { point: vec![t] },
            level_value: level,
        };
        let mut p = Problem {
            id: "double_well_1d".to_string(),
            dimension: 1,
            kind: Kind::DoubleWell1d,
            f_star: 0.0,
            // |F''| = |12x² − 4| ≤ 44 on [−2, 2]
            beta: 44.0,
            split: None,
            components: vec![comp(-1.0, 0.0), comp(0.0, 1.0), comp(1.0, 0.0)],
            working_box: 2.0,
            coercivity_radius: 0.0,
        };
        p.coercivity_radius = p.probe_coercivity()?;
        Ok(p)
    }

    /// `F(x) = (‖x‖² − 1)²` in the plane. The critical set is the unit
    /// circle (level 0) together with the origin (level 1) — a continuum.
    pub fn circle_quartic() -> Result<Problem> {
        let mut p = Problem {
            id: "circle_quartic".to_string(),
            dimension: 2,
            kind: Kind::CircleQuartic,
            f_star: 0.0,
            // Hessian eigenvalues 4(r²−1) and 12r²−4; max magnitude 44 at r = 2
            beta: 44.0,
            split: None,
            components: vec![
                CriticalComponent {
                    geometry: Geometry::Sphere {
                        center: vec![0.0, 0.0],
                        radius: 1.0,
                    },
                    level_value: 0.0,
                },
                CriticalComponent {
                    geometry: Geometry::Point {
                        point: vec![0.0, 0.0],
                    },
                    level_value: 1.0,
                },
            ],
            working_box: 2.0,
            coercivity_radius: 0.0,
        };
        p.coercivity_radius = p.probe_coercivity()?;
        Ok(p)
    }

    /// Composite `F = G + H` with `G(x) = Σᵢ (xᵢ² − 1)²` and
    /// `H(x) = (μ/2)‖x − z₀‖²`. The critical set is finite and found at
    /// construction by per-coordinate root isolation on `∇F`.
    pub fn composite_quartic_quadratic(
        dimension: usize,
        mu_h: f64,
        z0: Vec<f64>,
    ) -> Result<Problem> {
        if dimension == 0 || mu_h <= 0.0 {
            return Err(Error::config("composite needs dimension ≥ 1 and μ_H > 0"));
        }
        if z0.len() != dimension {
            return Err(Error::Dimension {
                expected: dimension,
                got: z0.len(),
            });
        }
        if !vecn::all_finite(&z0) {
            return Err(Error::NonFinite("composite center z0"));
        }
        let working_box = 2.0;
        // per-coordinate stationarity: 4t³ + (μ − 4)t − μ z₀ᵢ = 0
        let mut roots_per_coord = Vec::with_capacity(dimension);
        for i in 0..dimension {
            let g = |t: f64| 4.0 * t * t * t + (mu_h - 4.0) * t - mu_h * z0[i];
            let roots = isolate_roots(g, -working_box, working_box, 4001);
            if roots.is_empty() {
                return Err(Error::config(format!(
                    "no stationary coordinate value found in the working box for coordinate {i}"
                )));
            }
            roots_per_coord.push(roots);
        }
        let points = cartesian_product(&roots_per_coord);
        let h = QuadraticTerm {
            mu: mu_h,
            center: z0.clone(),
        };
        let beta_g = 12.0 * working_box * working_box - 4.0;
        let mut components: Vec<CriticalComponent> = Vec::with_capacity(points.len());
        let mut f_star = f64::INFINITY;
        for pt in points {
            let g_val: f64 = pt.iter().map(|t| (t * t - 1.0) * (t * t - 1.0)).sum();
            let level = g_val + h.eval(&pt);
            f_star = f_star.min(level);
            components.push(CriticalComponent {
                geometry: Geometry::Point { point: pt },
                level_value: level,
            });
        }
        let mut p = Problem {
            id: format!("composite_quartic_quadratic(n={dimension},mu_h={mu_h})"),
            dimension,
            kind: Kind::CompositeQuarticQuadratic,
            f_star,
            beta: beta_g + mu_h,
            split: Some(Split {
                beta_g,
                beta_h: mu_h,
                h,
            }),
            components,
            working_box,
            coercivity_radius: 0.0,
        };
        p.coercivity_radius = p.probe_coercivity()?;
        Ok(p)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.grad_unchecked(x))
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dimension {
            return Err(Error::Dimension {
                expected: self.dimension,
                got: x.len(),
            });
        }
        if !vecn::all_finite(x) {
            return Err(Error::NonFinite("problem input"));
        }
        Ok(())
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        match &self.kind {
            Kind::Quadratic { beta } => 0.5 * beta * vecn::norm_sq(x),
            Kind::DoubleWell1d => {
                let s = x[0] * x[0] - 1.0;
                s * s
            }
            Kind::CircleQuartic => {
                let s = vecn::norm_sq(x) - 1.0;
                s * s
            }
            Kind::CompositeQuarticQuadratic => {
                let g: f64 = x.iter().map(|t| (t * t - 1.0) * (t * t - 1.0)).sum();
                g + self.split.as_ref().expect("composite split").h.eval(x)
            }
        }
    }

    pub(crate) fn grad_unchecked(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            Kind::Quadratic { beta } => x.iter().map(|t| beta * t).collect(),
            Kind::DoubleWell1d => vec![4.0 * x[0] * (x[0] * x[0] - 1.0)],
            Kind::CircleQuartic => {
                let s = vecn::norm_sq(x) - 1.0;
                x.iter().map(|t| 4.0 * t * s).collect()
            }
            Kind::CompositeQuarticQuadratic => {
                let h = &self.split.as_ref().expect("composite split").h;
                let hg = h.gradient(x);
                x.iter()
                    .zip(&hg)
                    .map(|(t, hv)| 4.0 * t * (t * t - 1.0) + hv)
                    .collect()
            }
        }
    }

    /// Value of the smooth part `G` for composite problems, `F` otherwise.
    pub fn eval_smooth(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        match &self.kind {
            Kind::CompositeQuarticQuadratic => {
                Ok(x.iter().map(|t| (t * t - 1.0) * (t * t - 1.0)).sum())
            }
            _ => Ok(self.eval_unchecked(x)),
        }
    }

    /// Gradient of the smooth part `G` for composite problems, `∇F` otherwise.
    pub fn grad_smooth(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        match &self.kind {
            Kind::CompositeQuarticQuadratic => {
                Ok(x.iter().map(|t| 4.0 * t * (t * t - 1.0)).collect())
            }
            _ => Ok(self.grad_unchecked(x)),
        }
    }

    /// Minimum distance to the critical set across all components.
    pub fn distance_to_critical_set(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        Ok(self
            .components
            .iter()
            .map(|c| c.distance(x))
            .fold(f64::INFINITY, f64::min))
    }

    /// Max over coordinates of the scaled difference between the analytic
    /// gradient and a central finite difference with step `h`.
    pub fn finite_difference_check(&self, x: &[f64], h: f64) -> Result<f64> {
        if !(1e-8..=1e-2).contains(&h) {
            return Err(Error::domain(format!(
                "finite-difference step {h} outside [1e-8, 1e-2]"
            )));
        }
        self.check_input(x)?;
        let grad = self.grad_unchecked(x);
        let mut worst: f64 = 0.0;
        let mut xp = x.to_vec();
        for i in 0..self.dimension {
            let orig = xp[i];
            xp[i] = orig + h;
            let fp = self.eval_unchecked(&xp);
            xp[i] = orig - h;
            let fm = self.eval_unchecked(&xp);
            xp[i] = orig;
            let fd = (fp - fm) / (2.0 * h);
            let err = (grad[i] - fd).abs() / grad[i].abs().max(1.0);
            worst = worst.max(err);
        }
        Ok(worst)
    }

    /// Inside the sup-norm working box on which `beta` is documented?
    pub fn in_working_box(&self, x: &[f64]) -> bool {
        vecn::norm_inf(x) <= self.working_box
    }

    /// The exact curvature for the pure quadratic instance; `None` for every
    /// other catalog entry. Closed-form one-step expectations exist only
    /// here.
    pub fn quadratic_curvature(&self) -> Option<f64> {
        match self.kind {
            Kind::Quadratic { beta } => Some(beta),
            _ => None,
        }
    }

    /// Default deterministic start used when a configuration gives none.
    pub fn default_start(&self) -> Vec<f64> {
        let mut x0 = vec![0.0; self.dimension];
        x0[0] = 2.0;
        x0
    }

    /// Find the smallest probe radius from a doubling ladder at which every
    /// sampled point of the sphere satisfies `F(x) > F(0) + 1`.
    fn probe_coercivity(&self) -> Result<f64> {
        let zero = vec![0.0; self.dimension];
        let f0 = self.eval_unchecked(&zero);
        let mut rng = substream(0x434f_4552, 0, 0, Role::Sampling);
        let mut radius = 2.0;
        while radius <= 1024.0 {
            let sphere = Geometry::Sphere {
                center: zero.clone(),
                radius,
            };
            let ok = (0..64).all(|_| {
                let x = sphere.sample_point(&mut rng);
                self.eval_unchecked(&x) > f0 + 1.0
            });
            if ok {
                return Ok(radius);
            }
            radius *= 2.0;
        }
        Err(Error::config(format!(
            "coercivity probe failed for {} up to radius 1024",
            self.id
        )))
    }
}

/// Roots of `g` on `[lo, hi]` by sign scanning on a dense grid followed by
/// bisection. Grid points that are themselves (numerical) roots are kept.
fn isolate_roots(g: impl Fn(f64) -> f64, lo: f64, hi: f64, grid: usize) -> Vec<f64> {
    let mut roots: Vec<f64> = Vec::new();
    let step = (hi - lo) / (grid - 1) as f64;
    let mut prev_t = lo;
    let mut prev_v = g(lo);
    let push = |t: f64, roots: &mut Vec<f64>| {
        if roots.iter().all(|r: &f64| (r - t).abs() > 1e-9) {
            roots.push(t);
        }
    };
    if prev_v == 0.0 {
        push(prev_t, &mut roots);
    }
    for i in 1..grid {
        let t = lo + step * i as f64;
        let v = g(t);
        if v == 0.0 {
            push(t, &mut roots);
        } else if prev_v.signum() != v.signum() && prev_v != 0.0 {
            let (mut a, mut b) = (prev_t, t);
            let mut va = prev_v;
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                let vm = g(m);
                if vm == 0.0 || (b - a) < 1e-15 {
                    a = m;
                    break;
                }
                if va.signum() == vm.signum() {
                    a = m;
                    va = vm;
                } else {
                    b = m;
                }
            }
            push(0.5 * (a + b), &mut roots);
        }
        prev_t = t;
        prev_v = v;
    }
    roots
}

fn cartesian_product(per_coord: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut acc: Vec<Vec<f64>> = vec![vec![]];
    for roots in per_coord {
        let mut next = Vec::with_capacity(acc.len() * roots.len());
        for partial in &acc {
            for r in roots {
                let mut p = partial.clone();
                p.push(*r);
                next.push(p);
            }
        }
        acc = next;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_quartic_values() {
        let p = Problem::circle_quartic().unwrap();
        assert_eq!(p.evaluate(&[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(p.evaluate(&[0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(p.gradient(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(p.gradient(&[2.0, 0.0]).unwrap(), vec![24.0, 0.0]);
    }

    #[test]
    fn double_well_values() {
        let p = Problem::double_well_1d().unwrap();
        assert_eq!(p.evaluate(&[2.0]).unwrap(), 9.0);
        assert_eq!(p.distance_to_critical_set(&[0.6]).unwrap(), 0.4);
    }

    #[test]
    fn quadratic_gradient_is_identity_for_unit_beta() {
        let p = Problem::quadratic(3, 1.0).unwrap();
        let x = vec![0.3, -1.2, 4.0];
        assert_eq!(p.gradient(&x).unwrap(), x);
    }

    #[test]
    fn circle_distances() {
        let p = Problem::circle_quartic().unwrap();
        assert!((p.distance_to_critical_set(&[2.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((p.distance_to_critical_set(&[0.4, 0.0]).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn non_finite_input_rejected() {
        let p = Problem::circle_quartic().unwrap();
        assert!(p.evaluate(&[f64::NAN, 0.0]).is_err());
        assert!(p.gradient(&[f64::INFINITY, 0.0]).is_err());
    }

    #[test]
    fn fd_step_outside_window_rejected() {
        let p = Problem::quadratic(2, 1.0).unwrap();
        assert!(p.finite_difference_check(&[1.0, 1.0], 1e-9).is_err());
        assert!(p.finite_difference_check(&[1.0, 1.0], 0.1).is_err());
    }

    #[test]
    fn quadratic_fd_error_is_rounding_level() {
        let p = Problem::quadratic(2, 1.0).unwrap();
        let err = p.finite_difference_check(&[0.7, -1.3], 1e-5).unwrap();
        assert!(err < 1e-9, "err = {err}");
    }

    #[test]
    fn composite_critical_points_symmetric_case() {
        // μ = 1, z0 = 0: per coordinate 4t³ − 3t = 0 → t ∈ {0, ±√3/2}
        let p = Problem::composite_quartic_quadratic(2, 1.0, vec![0.0, 0.0]).unwrap();
        assert_eq!(p.components.len(), 9);
        let t = (3.0f64).sqrt() / 2.0;
        let d = p.distance_to_critical_set(&[t, t]).unwrap();
        assert!(d < 1e-9, "distance to (√3/2, √3/2) component = {d}");
        // every component point is critical
        for c in &p.components {
            if let Geometry::Point { point } = &c.geometry {
                let g = p.gradient(point).unwrap();
                assert!(vecn::norm(&g) < 1e-9);
                assert!((p.evaluate(point).unwrap() - c.level_value).abs() < 1e-12);
            }
        }
        assert!(p.f_star <= p.components[0].level_value);
    }

    #[test]
    fn composite_stiff_case_has_single_critical_point() {
        let p = Problem::composite_quartic_quadratic(2, 20.0, vec![0.0, 0.0]).unwrap();
        assert_eq!(p.components.len(), 1);
        assert!((p.f_star - 2.0).abs() < 1e-12); // F(0) = G(0) = N
    }

    #[test]
    fn components_are_pairwise_separated() {
        for p in [
            Problem::double_well_1d().unwrap(),
            Problem::circle_quartic().unwrap(),
            Problem::composite_quartic_quadratic(2, 1.0, vec![0.1, -0.2]).unwrap(),
        ] {
            let mut rng = substream(11, 0, 0, Role::Sampling);
            for i in 0..p.components.len() {
                for j in 0..p.components.len() {
                    if i == j {
                        continue;
                    }
                    for _ in 0..20 {
                        let x = p.components[i].geometry.sample_point(&mut rng);
                        assert!(p.components[j].distance(&x) > 1e-6);
                    }
                }
            }
        }
    }
}
