//! Deterministic coefficient sequences with symbolic summability metadata.
//!
//! A [`Schedule`] is one of the closed forms used for step sizes, noise
//! levels and moment coefficients. Every form embeds into the family
//! `k ↦ c·(k+1)^{-p}·q^k` ([`ClosedForm`]), which is closed under products,
//! square roots and reciprocals, so sequences derived from schedules keep an
//! exact summability verdict instead of a numeric guess.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Three-valued answer for questions sampling cannot settle exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Summability {
    Yes,
    No,
    Unknown,
}

/// A deterministic scalar sequence in closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum Schedule {
    /// Identically zero.
    Zero,
    /// `k ↦ c`.
    Constant { c: f64 },
    /// `k ↦ c·(k+1)^{-p}`.
    Power { c: f64, p: f64 },
    /// `k ↦ c·q^k`.
    Geometric { c: f64, q: f64 },
}

impl Schedule {
    pub fn constant(c: f64) -> Self {
        Schedule::Constant { c }
    }

    pub fn power(c: f64, p: f64) -> Self {
        Schedule::Power { c, p }
    }

    pub fn geometric(c: f64, q: f64) -> Self {
        Schedule::Geometric { c, q }
    }

    pub fn eval(&self, k: usize) -> f64 {
        self.closed_form().eval(k)
    }

    /// Whether `Σ_k` of this schedule converges, by the analytic rule.
    pub fn summability(&self) -> Summability {
        self.closed_form().summability()
    }

    /// Reject schedules that take negative values.
    pub fn validate_nonnegative(&self, name: &str) -> Result<()> {
        let ok = match *self {
            Schedule::Zero => true,
            Schedule::Constant { c } => c >= 0.0,
            Schedule::Power { c, .. } => c >= 0.0,
            Schedule::Geometric { c, q } => c >= 0.0 && q >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!(
                "schedule `{name}` takes negative values"
            )))
        }
    }

    /// Supremum over all `k`, `+∞` when unbounded.
    pub fn sup(&self) -> f64 {
        self.closed_form().sup()
    }

    pub fn closed_form(&self) -> ClosedForm {
        match *self {
            Schedule::Zero => ClosedForm::zero(),
            Schedule::Constant { c } => ClosedForm::new(c, 0.0, 1.0),
            Schedule::Power { c, p } => ClosedForm::new(c, p, 1.0),
            Schedule::Geometric { c, q } => ClosedForm::new(c, 0.0, q),
        }
    }
}

/// One term `c·(k+1)^{-p}·q^k` with `q ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub c: f64,
    pub p: f64,
    pub q: f64,
}

impl ClosedForm {
    pub fn new(c: f64, p: f64, q: f64) -> Self {
        ClosedForm { c, p, q }
    }

    pub fn zero() -> Self {
        ClosedForm::new(0.0, 0.0, 1.0)
    }

    pub fn is_zero(&self) -> bool {
        self.c == 0.0
    }

    pub fn eval(&self, k: usize) -> f64 {
        if self.c == 0.0 {
            return 0.0;
        }
        let k1 = (k + 1) as f64;
        self.c * k1.powf(-self.p) * self.q.powi(k as i32)
    }

    pub fn mul(&self, other: &ClosedForm) -> ClosedForm {
        ClosedForm::new(self.c * other.c, self.p + other.p, self.q * other.q)
    }

    pub fn scale(&self, s: f64) -> ClosedForm {
        ClosedForm::new(self.c * s, self.p, self.q)
    }

    /// Square root; valid for nonnegative-coefficient terms.
    pub fn sqrt(&self) -> ClosedForm {
        ClosedForm::new(self.c.sqrt(), self.p / 2.0, self.q.sqrt())
    }

    pub fn square(&self) -> ClosedForm {
        ClosedForm::new(self.c * self.c, self.p * 2.0, self.q * self.q)
    }

    /// Pointwise reciprocal; requires a nonvanishing term.
    pub fn recip(&self) -> Result<ClosedForm> {
        if self.c == 0.0 {
            return Err(Error::domain("reciprocal of the zero sequence"));
        }
        Ok(ClosedForm::new(1.0 / self.c, -self.p, 1.0 / self.q))
    }

    pub fn summability(&self) -> Summability {
        if self.c == 0.0 {
            return Summability::Yes;
        }
        if self.q < 1.0 {
            Summability::Yes
        } else if self.q == 1.0 {
            if self.p > 1.0 {
                Summability::Yes
            } else {
                Summability::No
            }
        } else {
            Summability::No
        }
    }

    /// Limit as `k → ∞` (`±∞` when divergent).
    pub fn limit(&self) -> f64 {
        if self.c == 0.0 {
            return 0.0;
        }
        if self.q < 1.0 {
            0.0
        } else if self.q == 1.0 {
            if self.p > 0.0 {
                0.0
            } else if self.p == 0.0 {
                self.c
            } else {
                f64::INFINITY * self.c.signum()
            }
        } else {
            f64::INFINITY * self.c.signum()
        }
    }

    /// Supremum over all `k ≥ 0` for a nonnegative term.
    pub fn sup(&self) -> f64 {
        if self.c == 0.0 {
            return 0.0;
        }
        if self.q <= 1.0 && self.p >= 0.0 {
            // decreasing from k = 0
            self.c
        } else if self.q > 1.0 || self.p < 0.0 {
            f64::INFINITY
        } else {
            self.c
        }
    }
}

/// A finite sum of closed-form terms; the symbolic side of a coefficient
/// sequence such as `v_k = α_k μ_k − (β/2) α_k² ν_k² b_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymSeq {
    pub terms: Vec<ClosedForm>,
}

impl SymSeq {
    pub fn zero() -> Self {
        SymSeq { terms: vec![] }
    }

    pub fn from_term(t: ClosedForm) -> Self {
        if t.is_zero() {
            SymSeq::zero()
        } else {
            SymSeq { terms: vec![t] }
        }
    }

    pub fn from_schedule(s: &Schedule) -> Self {
        SymSeq::from_term(s.closed_form())
    }

    pub fn eval(&self, k: usize) -> f64 {
        self.terms.iter().map(|t| t.eval(k)).sum()
    }

    pub fn add(&self, other: &SymSeq) -> SymSeq {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().copied());
        SymSeq { terms }
    }

    pub fn mul_term(&self, t: &ClosedForm) -> SymSeq {
        if t.is_zero() {
            return SymSeq::zero();
        }
        SymSeq {
            terms: self.terms.iter().map(|s| s.mul(t)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> SymSeq {
        if s == 0.0 {
            return SymSeq::zero();
        }
        SymSeq {
            terms: self.terms.iter().map(|t| t.scale(s)).collect(),
        }
    }

    /// Square root when the sum is a single term, `None` otherwise.
    pub fn sqrt(&self) -> Option<SymSeq> {
        match self.terms.len() {
            0 => Some(SymSeq::zero()),
            1 => Some(SymSeq::from_term(self.terms[0].sqrt())),
            _ => None,
        }
    }

    /// Summability of the sum. Exact when every term is summable, or when the
    /// non-summable mass has a definite sign (no cancellation possible).
    pub fn summability(&self) -> Summability {
        if self.terms.is_empty() {
            return Summability::Yes;
        }
        let mut divergent_pos = false;
        let mut divergent_neg = false;
        for t in &self.terms {
            if t.summability() == Summability::No {
                if t.c > 0.0 {
                    divergent_pos = true;
                } else {
                    divergent_neg = true;
                }
            }
        }
        match (divergent_pos, divergent_neg) {
            (false, false) => Summability::Yes,
            (true, false) | (false, true) => Summability::No,
            (true, true) => Summability::Unknown,
        }
    }

    /// Limit as `k → ∞`; `NaN` when opposing infinities meet.
    pub fn limit(&self) -> f64 {
        self.terms.iter().map(|t| t.limit()).sum()
    }
}
