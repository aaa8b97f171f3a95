use gdl_core::special_fn::{lambert_w0, theta, theta_complex, theta_deriv, theta_main_deriv, ThetaKind};
use num_complex::Complex64;
use proptest::prelude::*;

const RS: ThetaKind = ThetaKind::RiemannSiegel;
const DH: ThetaKind = ThetaKind::DavenportHeilbronn;

// mpmath siegeltheta (30 digits) with its first two derivatives.
const RS_ORACLE: [(f64, f64, f64, f64); 5] = [
    (10.0, -3.067_074_396_289_895, 0.232_145_313_432_465_14, 0.050_041_813_670_313_66),
    (50.0, 26.461_366_070_161_41, 1.037_064_635_592_610_6, 0.010_000_333_380_014_77),
    (100.0, 87.972_165_231_787_22, 1.383_644_476_419_579_4, 0.005_000_041_668_125_115),
    (1000.0, 2034.546_428_038_031_6, 2.534_939_085_453_058, 0.000_500_000_041_666_681_25),
    (1e5, 433_752.027_229_170_8, 4.837_524_199_278_358, 5.000_000_000_041_667e-6),
];

#[test]
fn rs_theta_matches_oracle() {
    for (t, th, d1, d2) in RS_ORACLE {
        let v = theta(RS, t).unwrap();
        assert!((v - th).abs() <= 1e-10 * th.abs().max(1.0), "t = {t}: {v} vs {th}");
        assert!((theta_deriv(RS, t, 1).unwrap() - d1).abs() < 1e-12);
        assert!((theta_deriv(RS, t, 2).unwrap() - d2).abs() < 1e-12);
    }
}

#[test]
fn dh_theta_matches_oracle() {
    // mpmath: Im loggamma(3/4 + it/2) - (t/2) ln(pi/5) and numerical derivatives.
    let cases = [
        (10.0, 5.765_513_329_278_032, 1.036_864_269_649_586_7, 0.050_041_813_670_089_51),
        (85.584_743_482_581_3, 138.230_076_757_950_88, 2.110_531_097_165_175_6, 0.005_842_229_215_201_175),
    ];
    for (t, th, d1, d2) in cases {
        assert!((theta(DH, t).unwrap() - th).abs() < 1e-10);
        assert!((theta_deriv(DH, t, 1).unwrap() - d1).abs() < 1e-11);
        assert!((theta_deriv(DH, t, 2).unwrap() - d2).abs() < 1e-11);
    }
}

#[test]
fn w0_oracle() {
    let cases = [
        (0.1, 0.091_276_527_160_862_27),
        (1.0, 0.567_143_290_409_783_9),
        (10.0, 1.745_528_002_740_699_4),
        (1e3, 5.249_602_852_401_596),
        (1e6, 11.383_358_086_140_053),
    ];
    for (x, w) in cases {
        assert!((lambert_w0(x).unwrap() - w).abs() <= 1e-14 * w.abs().max(1.0));
    }
}

#[test]
fn main_derivative_is_below_full_by_the_series() {
    for t in [20.0, 300.0, 7000.0] {
        let full = theta_deriv(RS, t, 1).unwrap();
        let main = theta_main_deriv(RS, t).unwrap();
        assert!((full - main + 1.0 / (48.0 * t * t)).abs() < 1e-3 / (t * t * t));
    }
}

proptest! {
    #[test]
    fn w0_residual(x in -0.367f64..1e8) {
        let w = lambert_w0(x).unwrap();
        let r = w * w.exp() - x;
        prop_assert!(r.abs() <= 1e-12 * x.abs().max(1.0));
    }

    #[test]
    fn theta_increases_past_its_minimum(t in 20.0f64..1e6, dt in 1e-3f64..10.0) {
        for kind in [RS, DH] {
            prop_assert!(theta(kind, t + dt).unwrap() > theta(kind, t).unwrap());
        }
    }

    #[test]
    fn first_derivative_matches_differences(t in 20.0f64..1e5) {
        for kind in [RS, DH] {
            let h = 1e-3 * t.sqrt();
            let fd = (theta(kind, t + h).unwrap() - theta(kind, t - h).unwrap()) / (2.0 * h);
            let d1 = theta_deriv(kind, t, 1).unwrap();
            prop_assert!((fd - d1).abs() <= 1e-6 * d1.abs().max(1.0));
        }
    }

    #[test]
    fn second_derivative_matches_differences(t in 20.0f64..1e4) {
        for kind in [RS, DH] {
            let h = 1e-2 * t;
            let fd = (theta_deriv(kind, t + h, 1).unwrap() - theta_deriv(kind, t - h, 1).unwrap()) / (2.0 * h);
            let d2 = theta_deriv(kind, t, 2).unwrap();
            prop_assert!((fd - d2).abs() <= 1e-3 * d2.abs());
        }
    }

    #[test]
    fn complex_phase_is_self_conjugate(t in 20.0f64..1e4, y in -0.5f64..0.5) {
        for kind in [RS, DH] {
            let z = Complex64::new(t, y);
            let a = theta_complex(kind, z).unwrap();
            let b = theta_complex(kind, z.conj()).unwrap();
            prop_assert!((a - b.conj()).norm() <= 1e-12 * a.norm());
        }
    }

    #[test]
    fn complex_phase_continues_the_real_one(t in 20.0f64..1e4) {
        for kind in [RS, DH] {
            let a = theta_complex(kind, Complex64::new(t, 0.0)).unwrap();
            prop_assert!(a.im.abs() < 1e-12);
            prop_assert!((a.re - theta(kind, t).unwrap()).abs() <= 1e-11 * a.re.abs().max(1.0));
        }
    }
}
