//! Symbolic-plus-numeric checks of the convergence theorem's premises on a
//! coefficient set: summability of `u`, `r`, `t`, `w`, positivity of
//! `inf v`, and monotonicity of `s_k p_k / v_k`.

use crate::certifier::coefficients::DescentCoefficients;
use crate::certifier::{CertificateReport, CheckEntry, Evidence, Verdict};
use crate::error::{Error, Result};
use crate::schedule::Summability;

/// Numeric scan horizon is combined with symbolic verdicts: the symbolic
/// rule decides summability when known; the scan supplies first-violation
/// indices and inf/sup evidence either way.
pub fn check_premises(
    coeffs: &DescentCoefficients,
    horizon: usize,
) -> Result<CertificateReport> {
    if horizon < 10 {
        return Err(Error::config("premise check needs a horizon of at least 10"));
    }
    let mut checks = Vec::new();

    checks.push(summability_entry(
        "summable_growth",
        "sum_k u_k < infinity",
        &coeffs.growth,
        horizon,
    ));
    checks.push(inf_gain_entry(coeffs, horizon));
    checks.push(summability_entry(
        "summable_step_gap",
        "sum_k r_k < infinity",
        &coeffs.step_gap,
        horizon,
    ));
    checks.push(summability_entry(
        "summable_step_const",
        "sum_k t_k < infinity",
        &coeffs.step_const,
        horizon,
    ));
    checks.push(summability_entry(
        "summable_noise",
        "sum_k w_k < infinity",
        &coeffs.noise,
        horizon,
    ));
    checks.push(ratio_monotone_entry(coeffs, horizon));

    Ok(CertificateReport::from_checks(checks))
}

fn summability_entry(
    name: &str,
    condition: &str,
    seq: &crate::certifier::coefficients::CoeffSeq,
    horizon: usize,
) -> CheckEntry {
    let mut partial = 0.0;
    let mut first_negative = None;
    for k in 0..=horizon {
        let v = seq.eval(k);
        if v < 0.0 && first_negative.is_none() {
            first_negative = Some(k);
        }
        partial += v;
    }
    if let Some(k) = first_negative {
        return CheckEntry::new(name, condition, Verdict::Fail).with_evidence(Evidence {
            first_violation_k: Some(k),
            note: Some("sequence takes a negative value".to_string()),
            horizon: Some(horizon),
            ..Evidence::default()
        });
    }
    let verdict = match seq.summability() {
        Summability::Yes => Verdict::Pass,
        Summability::No => Verdict::Fail,
        Summability::Unknown => Verdict::Inconclusive,
    };
    CheckEntry::new(name, condition, verdict).with_evidence(Evidence {
        sup: Some(partial),
        horizon: Some(horizon),
        note: Some(format!(
            "symbolic verdict {:?}; partial sum through the horizon shown in `sup`",
            seq.summability()
        )),
        ..Evidence::default()
    })
}

fn inf_gain_entry(coeffs: &DescentCoefficients, horizon: usize) -> CheckEntry {
    let name = "positive_gain_floor";
    let condition = "inf_k v_k > 0";
    let mut min_v = f64::INFINITY;
    let mut first_nonpositive = None;
    for k in 0..=horizon {
        let v = coeffs.gain.eval(k);
        if v <= 0.0 && first_nonpositive.is_none() {
            first_nonpositive = Some(k);
        }
        min_v = min_v.min(v);
    }
    if let Some(k) = first_nonpositive {
        return CheckEntry::new(name, condition, Verdict::Fail).with_evidence(Evidence {
            inf: Some(min_v),
            first_violation_k: Some(k),
            horizon: Some(horizon),
            ..Evidence::default()
        });
    }
    // the horizon scan is conclusive only when the tail cannot dip further:
    // use the symbolic limit when available
    let verdict = match coeffs.gain.limit() {
        Some(limit) if limit.is_nan() => Verdict::Inconclusive,
        Some(limit) => {
            if limit > 0.0 && min_v > 0.0 {
                Verdict::Pass
            } else if limit <= 0.0 {
                Verdict::Fail
            } else {
                Verdict::Inconclusive
            }
        }
        None => {
            if min_v > 0.0 {
                Verdict::Inconclusive
            } else {
                Verdict::Fail
            }
        }
    };
    let evidence = Evidence {
        inf: Some(min_v),
        horizon: Some(horizon),
        note: coeffs
            .gain
            .limit()
            .map(|l| format!("symbolic tail limit {l}")),
        ..Evidence::default()
    };
    CheckEntry::new(name, condition, verdict).with_evidence(evidence)
}

fn ratio_monotone_entry(coeffs: &DescentCoefficients, horizon: usize) -> CheckEntry {
    let name = "step_ratio_nonincreasing";
    let condition = "s_k p_k / v_k is non-increasing";
    let products = coeffs.growth_products(horizon);
    let mut prev = f64::INFINITY;
    let mut first_violation = None;
    let mut any_undefined = false;
    for k in 0..=horizon {
        let v = coeffs.gain.eval(k);
        if v <= 0.0 {
            any_undefined = true;
            break;
        }
        let ratio = coeffs.step_grad.eval(k) * products[k] / v;
        if ratio > prev * (1.0 + 1e-12) && first_violation.is_none() {
            first_violation = Some(k);
        }
        prev = ratio;
    }
    if any_undefined {
        return CheckEntry::new(name, condition, Verdict::Inconclusive).with_evidence(Evidence {
            note: Some("ratio undefined where the gain vanishes".to_string()),
            horizon: Some(horizon),
            ..Evidence::default()
        });
    }
    match first_violation {
        Some(k) => CheckEntry::new(name, condition, Verdict::Fail).with_evidence(Evidence {
            first_violation_k: Some(k),
            horizon: Some(horizon),
            ..Evidence::default()
        }),
        None => CheckEntry::new(name, condition, Verdict::Pass).with_evidence(Evidence {
            horizon: Some(horizon),
            note: Some("no increase found through the horizon".to_string()),
            ..Evidence::default()
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certifier::coefficients::CoeffSeq;
    use crate::schedule::Schedule;

    fn with_growth(growth: CoeffSeq) -> DescentCoefficients {
        DescentCoefficients {
            growth,
            gain: CoeffSeq::constant(1.0),
            noise: CoeffSeq::zero(),
            step_gap: CoeffSeq::zero(),
            step_grad: CoeffSeq::constant(1.0),
            step_const: CoeffSeq::zero(),
        }
    }

    #[test]
    fn quadratic_decay_is_summable() {
        let r = check_premises(&with_growth(CoeffSeq::from_schedule(&Schedule::power(1.0, 2.0))), 100)
            .unwrap();
        assert_eq!(r.checks[0].verdict, Verdict::Pass);
    }

    #[test]
    fn harmonic_decay_is_not() {
        let r = check_premises(&with_growth(CoeffSeq::from_schedule(&Schedule::power(1.0, 1.0))), 100)
            .unwrap();
        assert_eq!(r.checks[0].verdict, Verdict::Fail);
    }

    #[test]
    fn power_family_classification() {
        for (p, expect) in [
            (0.5, Verdict::Fail),
            (1.0, Verdict::Fail),
            (1.01, Verdict::Pass),
            (2.0, Verdict::Pass),
        ] {
            let r = check_premises(
                &with_growth(CoeffSeq::from_schedule(&Schedule::power(1.0, p))),
                1000,
            )
            .unwrap();
            assert_eq!(r.checks[0].verdict, expect, "p = {p}");
        }
    }

    #[test]
    fn geometric_family_classification() {
        for (q, expect) in [(0.5, Verdict::Pass), (1.0, Verdict::Fail)] {
            let r = check_premises(
                &with_growth(CoeffSeq::from_schedule(&Schedule::geometric(1.0, q))),
                1000,
            )
            .unwrap();
            assert_eq!(r.checks[0].verdict, expect, "q = {q}");
        }
    }

    #[test]
    fn constant_ratio_is_nonincreasing() {
        // u = 0 → p ≡ 1; constant s, v → constant ratio: pass
        let coeffs = with_growth(CoeffSeq::zero());
        let r = check_premises(&coeffs, 50).unwrap();
        let ratio = r
            .checks
            .iter()
            .find(|c| c.check == "step_ratio_nonincreasing")
            .unwrap();
        assert_eq!(ratio.verdict, Verdict::Pass);
    }

    #[test]
    fn increasing_ratio_flagged_at_first_index() {
        let coeffs = DescentCoefficients {
            growth: CoeffSeq::zero(),
            gain: CoeffSeq::constant(1.0),
            noise: CoeffSeq::zero(),
            step_gap: CoeffSeq::zero(),
            // s_k = (k+1)^{1/2}: strictly increasing
            step_grad: CoeffSeq::from_schedule(&Schedule::power(1.0, -0.5)),
            step_const: CoeffSeq::zero(),
        };
        let r = check_premises(&coeffs, 50).unwrap();
        let ratio = r
            .checks
            .iter()
            .find(|c| c.check == "step_ratio_nonincreasing")
            .unwrap();
        assert_eq!(ratio.verdict, Verdict::Fail);
        assert_eq!(ratio.evidence.first_violation_k, Some(1));
    }

    #[test]
    fn vanishing_gain_fails_floor_check() {
        let coeffs = DescentCoefficients {
            gain: CoeffSeq::from_schedule(&Schedule::power(1.0, 1.0)),
            ..with_growth(CoeffSeq::zero())
        };
        let r = check_premises(&coeffs, 100).unwrap();
        let floor = r
            .checks
            .iter()
            .find(|c| c.check == "positive_gain_floor")
            .unwrap();
        // v_k = 1/(k+1) stays positive on any horizon but tends to 0
        assert_eq!(floor.verdict, Verdict::Fail);
    }
}
