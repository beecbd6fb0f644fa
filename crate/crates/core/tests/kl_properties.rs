//! Property tests for desingularizers, their bounded extensions and the
//! sampled KL checks.

use proptest::prelude::*;
use stokl_core::{
    build_extended_uniform, kl_check_pointwise, kl_check_uniform, ComponentKl, Desingularizer,
    KlPointCheck, Problem,
};

fn triple() -> impl Strategy<Value = (f64, f64, f64)> {
    // coefficient, exponent, domain bound
    (0.05f64..3.0, 0.1f64..0.9, 0.1f64..3.0)
}

proptest! {
    #[test]
    fn extension_is_monotone_concave_and_bounded((c, theta, zeta) in triple()) {
        let ext = Desingularizer::new(c, theta, zeta).unwrap().extend_to_infinity();
        let cap = ext.upper_bound();
        let grid: Vec<f64> = (0..2000).map(|i| 3.0 * zeta * i as f64 / 1999.0).collect();
        let values: Vec<f64> = grid.iter().map(|s| ext.phi(*s).unwrap()).collect();
        for w in values.windows(2) {
            prop_assert!(w[1] + 1e-12 >= w[0], "not monotone");
        }
        for w in values.windows(3) {
            // nonpositive second differences on the uniform grid
            prop_assert!(w[2] - 2.0 * w[1] + w[0] <= 1e-9, "not concave");
        }
        for v in &values {
            prop_assert!(*v <= cap + 1e-12, "exceeds bound");
        }
        // continuity at the domain bound: the gap shrinks with h
        let mut last = f64::INFINITY;
        for h in [1e-3, 1e-6, 1e-9] {
            let gap = (ext.phi(zeta - h).unwrap() - ext.phi(zeta + h).unwrap()).abs();
            prop_assert!(gap <= last + 1e-15);
            last = gap;
        }
        prop_assert!(last < 1e-6);
    }

    #[test]
    fn pointwise_check_is_monotone_in_coefficient(
        c in 0.1f64..2.0,
        scale in 1.0f64..5.0,
        x0 in 0.05f64..1.9,
    ) {
        let p = Problem::circle_quartic().unwrap();
        let d_small = Desingularizer::new(c, 0.5, f64::INFINITY).unwrap();
        let d_large = Desingularizer::new(c * scale, 0.5, f64::INFINITY).unwrap();
        let x = [x0, 0.0];
        let small = kl_check_pointwise(&p, 0, &d_small, &x).unwrap();
        let large = kl_check_pointwise(&p, 0, &d_large, &x).unwrap();
        if let KlPointCheck::Holds { .. } = small {
            let still_holds = matches!(large, KlPointCheck::Holds { .. });
            prop_assert!(still_holds);
        }
    }

    #[test]
    fn quadratic_uniform_kl_never_violates_above_threshold(
        beta in 0.5f64..4.0,
        excess in 1.0f64..3.0,
        seed in 0u64..50,
    ) {
        // c ≥ √(2/β) makes the margin the constant c·√(2β) − 1 ≥ 1
        let p = Problem::quadratic(2, beta).unwrap();
        let c = (2.0 / beta).sqrt() * excess;
        let d = Desingularizer::new(c, 0.5, f64::INFINITY).unwrap();
        let rep = kl_check_uniform(&p, &d, 0.5, 0.25, 500, seed).unwrap();
        prop_assert_eq!(rep.violated_total, 0);
        if let Some(m) = rep.min_margin {
            let expect = c * (2.0 * beta).sqrt() - 1.0;
            prop_assert!((m - expect).abs() < 1e-9, "margin {} vs {}", m, expect);
        }
    }
}

#[test]
fn merged_derivative_dominates_every_part() {
    let p = Problem::circle_quartic().unwrap();
    let spec = |c: f64| ComponentKl {
        desingularizer: Desingularizer::new(c, 0.5, 0.4).unwrap(),
        epsilon: 0.2,
        zeta: 0.4,
    };
    let merged = build_extended_uniform(&p, &[spec(0.7), spec(1.3)], 0.25, 0.5, 400, 11).unwrap();
    let grid: Vec<f64> = (1..200).map(|i| merged.zeta * i as f64 / 200.0).collect();
    for s in grid {
        let total = merged.phi.phi_prime(s).unwrap();
        for part in &merged.phi.parts {
            assert!(total >= part.phi_prime(s).unwrap() - 1e-12);
        }
    }
}

#[test]
fn partially_shared_levels_use_distinct_value_gaps() {
    // double well has levels {0, 1, 0}: the separation window comes from
    // the distinct pair |1 − 0|, not from the shared-level pair
    let dw = Problem::double_well_1d().unwrap();
    let spec = ComponentKl {
        desingularizer: Desingularizer::new(1.0, 0.5, 0.3).unwrap(),
        epsilon: 0.2,
        zeta: 0.3,
    };
    let merged = build_extended_uniform(
        &dw,
        &[spec.clone(), spec.clone(), spec.clone()],
        0.25,
        0.5,
        300,
        7,
    )
    .unwrap();
    assert!(!merged.degenerate_levels);
    assert!((merged.zeta_tilde.unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn degenerate_equal_levels_fall_back() {
    // force both circle-quartic components onto one level: the separation
    // window is then undefined and the merge falls back to min ζ_i
    let mut p = Problem::circle_quartic().unwrap();
    p.components[1].level_value = 0.0;
    let spec = |zeta: f64| ComponentKl {
        desingularizer: Desingularizer::new(1.0, 0.5, zeta).unwrap(),
        epsilon: 0.2,
        zeta,
    };
    let merged = build_extended_uniform(&p, &[spec(0.5), spec(0.3)], 0.25, 0.5, 300, 7).unwrap();
    assert!(merged.degenerate_levels);
    assert!(merged.zeta_tilde.is_none());
    assert!((merged.zeta - 0.3).abs() < 1e-12);
    // radii keep their requested values in the degenerate fallback
    assert!(merged
        .radii
        .iter()
        .all(|r| r.achieved == Some(r.requested)));
}
