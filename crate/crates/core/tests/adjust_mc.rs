use std::f64::consts::PI;

use gdl_core::adjust_mc::{
    adjustments, alpha_average, alpha_s, geometric_partition, gram_vectors, mc_trial, partition_approx,
    random_terms, stage_analysis, uniform_partition, GramVectors, NeighborMode, Side,
};
use gdl_core::gram::gram_point;
use gdl_core::z_model::{classical_afe, parity_sign, CoefficientModel, Which};
use gdl_core::Error;
use proptest::prelude::*;

fn riemann() -> CoefficientModel {
    CoefficientModel::riemann()
}

#[test]
fn phases_and_alpha_at_the_ends() {
    let m = riemann();
    for n in [6708u64, 730_119, 9_807_962] {
        let r = adjustments(&m, n, NeighborMode::Synthetic).unwrap();
        assert_eq!(r.phases[0], 0.0);
        assert!(r.phases.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(r.excluded_s, vec![1]);
        let last = r.cutoff - 1;
        assert!((r.phases[last] - PI).abs() < 4.0 / r.cutoff as f64);
        let lim = r.log_height / PI;
        assert!((r.alpha_s[last] - lim).abs() < 0.01 * lim);
        // The midpoint of the phase range sits at k = sqrt(N).
        let mid = (r.cutoff as f64).sqrt().floor() as usize;
        assert!((r.phases[mid - 1] - PI / 2.0).abs() < 2.0 / (r.cutoff as f64).sqrt());
    }
}

#[test]
fn phase_reaches_pi_at_the_continuous_cutoff() {
    let m = riemann();
    let g = gram_point(&m, 9_807_962).unwrap();
    let lh = m.log_height(g);
    let kc = (g / (2.0 * PI)).sqrt();
    assert!((gdl_core::adjust_mc::phase(lh, kc) - PI).abs() < 1e-6);
    assert!((alpha_s(lh, kc) - lh / PI).abs() < 1e-9);
}

#[test]
fn true_gram_residuals_are_small() {
    let m = riemann();
    for n in [126u64, 6708, 730_119] {
        let r = adjustments(&m, n, NeighborMode::TrueGram).unwrap();
        assert!(r.residual_z <= 0.1 * r.z.abs() + 0.1);
        assert!(r.residual_zprime <= 0.1 * r.zprime.abs() + 0.1);
    }
}

#[test]
fn adjustments_need_positive_index() {
    assert!(matches!(adjustments(&riemann(), 0, NeighborMode::Synthetic), Err(Error::Domain { .. })));
}

#[test]
fn alpha_averages() {
    let m = riemann();
    let n = 9_807_962;
    let g = gram_point(&m, n).unwrap();
    let big_n = m.classical_terms(g) as f64;
    let lim = m.log_height(g) / PI;
    let s = alpha_average(&m, n, 300.0, big_n, Which::ZPrime).unwrap();
    assert!(!s.principal_value);
    assert!((s.value - lim).abs() < 0.05 * lim);
    // With alpha_c = 2/cos(phi) the average settles near -2.
    let c = alpha_average(&m, n, 300.0, big_n, Which::Z).unwrap();
    assert!((c.value + 2.0).abs() < 0.25, "{}", c.value);
    let pv = alpha_average(&m, n, 2.0, big_n, Which::Z).unwrap();
    assert!(pv.principal_value);
    let one = alpha_average(&m, n, 200.0, 201.0, Which::ZPrime).unwrap();
    let mid = alpha_s(m.log_height(g), 200.5);
    assert!((one.value - mid).abs() < 0.01 * mid.abs());
    assert!(alpha_average(&m, n, 1.0, 10.0, Which::ZPrime).is_err());
    assert!(alpha_average(&m, n, 5.0, big_n + 1.0, Which::Z).is_err());
}

#[test]
fn single_segment_partition_collapses() {
    let m = riemann();
    let n = 6708;
    let g = gram_point(&m, n).unwrap();
    let big_n = m.classical_terms(g);
    let lh = m.log_height(g);
    let x = g - 2.0 * PI / lh;
    let u: f64 = (1..=big_n).map(|k| parity_sign(n as i64) * ((k as f64).ln() * x).cos() / (k as f64).sqrt()).sum();
    let avg = alpha_average(&m, n, 1.0, big_n as f64, Which::Z).unwrap().value;
    let p = partition_approx(&m, n, &[1, big_n], Which::Z, Side::Minus, NeighborMode::Synthetic).unwrap();
    assert!((p.approx - avg * u).abs() < 1e-9 * (1.0 + p.approx.abs()));
}

#[test]
fn invalid_partitions() {
    let m = riemann();
    let bad = [vec![2, 33], vec![1, 20], vec![1, 10, 10, 33], vec![1]];
    for p in bad {
        assert!(matches!(
            partition_approx(&m, 6708, &p, Which::Z, Side::Plus, NeighborMode::Synthetic),
            Err(Error::InvalidPartition(_))
        ));
    }
}

#[test]
fn refinement_improves_the_approximation() {
    let m = riemann();
    let n = 9_807_962;
    let big_n = m.classical_terms(gram_point(&m, n).unwrap());
    for part in [uniform_partition, geometric_partition] {
        let coarse = partition_approx(&m, n, &part(big_n, 16), Which::ZPrime, Side::Minus, NeighborMode::Synthetic).unwrap();
        let fine = partition_approx(&m, n, &part(big_n, 64), Which::ZPrime, Side::Minus, NeighborMode::Synthetic).unwrap();
        assert!(coarse.rel_err <= 2.0 * fine.rel_err);
    }
    // Regression: the geometric 64-segment minus-side error is about 0.37.
    let g64 = partition_approx(&m, n, &geometric_partition(big_n, 64), Which::ZPrime, Side::Minus, NeighborMode::Synthetic)
        .unwrap();
    assert!((g64.rel_err - 0.371).abs() < 0.01, "{}", g64.rel_err);
}

#[test]
fn final_stage_is_stable() {
    let m = riemann();
    let s = stage_analysis(&m, 730_119).unwrap();
    let zp = *s.partial_zprime.last().unwrap();
    assert!(s.final_change.abs() <= 0.05 * zp.abs());
    assert_eq!(s.partial_z.len(), s.cutoff);
    assert!(s.surge_end < s.cutoff);
}

#[test]
fn middle_window_regression() {
    let m = riemann();
    let s = stage_analysis(&m, 9_807_962).unwrap();
    assert_eq!(s.middle, (14, 59));
    assert!(s.middle_rms_rel < 0.25, "{}", s.middle_rms_rel);
    assert_eq!(s.middle_terms.len(), s.middle_approx.len());
}

#[test]
fn surge_regression_at_good_point() {
    let m = riemann();
    let s = stage_analysis(&m, 195_644).unwrap();
    assert!((s.surge_max_abs - 5.315).abs() < 0.01, "{}", s.surge_max_abs);
    assert!(s.surge_change.abs() < 1.0);
}

#[test]
fn gram_vector_sums() {
    let m = riemann();
    for n in [126u64, 730_119, 9_807_962] {
        let v = gram_vectors(&m, n, 1000, 42).unwrap();
        let afe = classical_afe(&m, v.g).unwrap();
        let target = parity_sign(n as i64) * afe.z / 2.0;
        assert!((v.raw_sum() - target).abs() < 1e-12);
        assert!((v.sorted_sum() - target).abs() < 1e-12);
        assert!(v.baseline_sum().abs() <= 3.0 * v.baseline_sum_se);
        assert!((v.essential_sum() - (target - v.baseline_sum())).abs() < 1e-12);
        assert!(v.sorted.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn monte_carlo_is_deterministic() {
    let m = riemann();
    let a = gram_vectors(&m, 730_119, 200, 7).unwrap();
    let b = gram_vectors(&m, 730_119, 200, 7).unwrap();
    assert_eq!(a, b);
    let c = gram_vectors(&m, 730_119, 200, 8).unwrap();
    assert_ne!(a.baseline, c.baseline);
    // Trials are independent of evaluation order.
    let draws: Vec<_> = (0..200).rev().map(|t| mc_trial(&m, a.raw.len(), 7, t)).collect();
    let d = GramVectors::assemble(&m, 730_119, 7, draws).unwrap();
    for (x, y) in a.baseline.iter().zip(&d.baseline) {
        assert!((x - y).abs() < 1e-14);
    }
    assert!(gram_vectors(&m, 126, 99, 1).is_err());
}

#[test]
fn random_term_mean_vanishes() {
    let m = riemann();
    let trials = 4000u64;
    let mean: f64 = (0..trials).map(|t| random_terms(&m, 1, 3, t)[0]).sum::<f64>() / trials as f64;
    assert!(mean.abs() < 4.0 / (2.0 * trials as f64).sqrt());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn synthetic_recombination_is_exact(n in 100u64..1_000_000) {
        let r = adjustments(&riemann(), n, NeighborMode::Synthetic).unwrap();
        prop_assert!(r.residual_z <= 1e-10, "n {} rz {}", n, r.residual_z);
        prop_assert!(r.residual_zprime <= 1e-10, "n {} rzp {}", n, r.residual_zprime);
    }
}
