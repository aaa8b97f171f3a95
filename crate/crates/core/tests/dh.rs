use gdl_core::dh::{character, dh_core_zero, dh_gram_point, dh_model, dh_violation_experiment, DhConstants, DH_INDEX};
use gdl_core::discriminant::Verdict;
use gdl_core::gram::core_zero_phase;

#[test]
fn coefficients_from_the_character() {
    let c = DhConstants::new();
    assert!((c.kappa - 0.284_079_043_840_412_3).abs() < 1e-12);
    assert_eq!(c.coeffs[0], 1.0);
    assert!((c.coeffs[1] - c.kappa).abs() < 1e-15);
    assert!((c.coeffs[2] + c.kappa).abs() < 1e-15);
    assert_eq!(c.coeffs[3], -1.0);
    assert_eq!(c.coeffs[4], 0.0);
    assert_eq!(character(7), character(2));
    assert_eq!(character(10).norm(), 0.0);
}

#[test]
fn phase_contracts() {
    let m = dh_model();
    let g = dh_gram_point(DH_INDEX).unwrap();
    assert!((g - 85.584_743_482_581_3).abs() < 1e-9);
    let t0 = dh_core_zero(DH_INDEX).unwrap();
    assert!((m.theta(t0).unwrap() - core_zero_phase(&m, DH_INDEX)).abs() < 1e-9);
    assert!(t0 < g);
}

#[test]
fn violation_at_44() {
    let r = dh_violation_experiment(200).unwrap();
    assert!(r.violation);
    assert!(matches!(r.trace.verdict, Verdict::CollisionAt(x) if x > 0.0 && x < 1.0));
    assert!(r.delta_end < 0.0);
    assert!(r.deviation_ratio < 0.15, "{}", r.deviation_ratio);
    assert!(r.displacement_ok);
    assert!(r.max_displacement < r.quarter_gap);
    assert_eq!(r.first_order.len(), r.trace.samples.len());
}
