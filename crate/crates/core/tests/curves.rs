use gdl_core::curves::{
    corrected_curve, default_window, descending_stage, select_from_table, select_shift_indices, shifting_stage,
    term_table, CurveVerdict, ParamCurve, Stage, DEFAULT_TAU, LEVEL_TOL,
};
use gdl_core::gram::gram_point;
use gdl_core::z_model::{parity_sign, CoefficientModel, ParamPoint};
use gdl_core::Error;
use proptest::prelude::*;

#[test]
fn term_table_shape() {
    let m = CoefficientModel::riemann();
    let t = term_table(&m, 6708, 20).unwrap();
    assert_eq!(t.rows.len(), 20);
    for (i, r) in t.rows.iter().enumerate() {
        assert_eq!(r.k, i + 1);
        assert!((r.cos_term.powi(2) + r.sin_term.powi(2) - 1.0).abs() < 1e-12);
        assert!((r.a - r.cos_term / ((r.k + 1) as f64).sqrt()).abs() < 1e-15);
    }
    assert!(matches!(term_table(&m, 6708, 10_000), Err(Error::IndexRange { .. })));
}

#[test]
fn selection_is_threshold_on_b() {
    let m = CoefficientModel::riemann();
    let t = term_table(&m, 730_119, 15).unwrap();
    let s = select_from_table(&t, DEFAULT_TAU);
    assert_eq!(s.indices, vec![1, 2, 4, 6, 12]);
    assert_eq!(select_from_table(&t, 1.3).indices, vec![1, 2, 4, 6, 9, 12]);
    assert!(select_from_table(&t, 100.0).is_empty());
}

#[test]
fn default_window_covers_fifteen() {
    let m = CoefficientModel::riemann();
    let g = gram_point(&m, 730_119).unwrap();
    assert_eq!(default_window(&m, g), 16);
    assert_eq!(select_shift_indices(&m, 730_119, DEFAULT_TAU, None).unwrap().indices, vec![1, 2, 4, 6, 12]);
}

#[test]
fn shifting_stage_stays_on_the_level_set() {
    let m = CoefficientModel::riemann();
    let n = 6708;
    let st = shifting_stage(&m, n, &[1, 2], 100).unwrap();
    assert_eq!(st.truncated_at, None);
    assert_eq!((st.samples[0].r1, st.samples[0].r2), (0.0, 0.0));
    assert_eq!(st.end().r1, 1.0);
    let sign = parity_sign(n as i64);
    for w in st.samples.windows(2) {
        assert!(w[1].r1 > w[0].r1);
    }
    for s in &st.samples {
        assert!((sign * s.delta - 1.0).abs() <= LEVEL_TOL);
        assert!((-1e-12..=1.0).contains(&s.r2));
    }
    let desc = descending_stage(&m, n, &[1, 2], (st.end().r1, st.end().r2), Some(st.end().g), 100).unwrap();
    assert_eq!(desc.point(0.0), (st.end().r1, st.end().r2));
    assert_eq!(desc.point(1.0), (1.0, 1.0));
}

#[test]
fn empty_selection_descends_along_the_diagonal() {
    let m = CoefficientModel::riemann();
    let rep = corrected_curve(&m, 126, DEFAULT_TAU, None, 100).unwrap();
    assert!(rep.selection.is_empty());
    assert!(rep.shifting.is_none());
    assert_eq!(rep.verdict, CurveVerdict::Holds);
    assert!(rep.composite.iter().all(|c| c.stage == Stage::Descending));
    let dim = m.robust_terms(rep.g_n);
    assert!(rep.curve(dim).unwrap().connects_origin_to_one());
    assert!(parity_sign(126) * rep.endpoint_delta.unwrap() > 0.0);
}

#[test]
fn bad_shift_index_is_rejected() {
    let m = CoefficientModel::riemann();
    assert!(shifting_stage(&m, 90, &[], 10).is_err());
    assert!(matches!(shifting_stage(&m, 90, &[0], 10), Err(Error::IndexRange { .. })));
    assert!(ParamCurve::two_param(5, vec![(0.0, 0.0)], &[6]).is_err());
    assert!(ParamCurve::axis(5, 0, 1.0).is_err());
}

proptest! {
    #[test]
    fn curve_kinds_connect_origin_to_one(dim in 1usize..40, cut in 0.05f64..0.95, lift in 0.0f64..1.0) {
        let shift: Vec<usize> = (1..=dim).filter(|k| k % 2 == 1).collect();
        let two = ParamCurve::two_param(dim, vec![(0.0, 0.0), (cut, lift), (1.0, 1.0)], &shift).unwrap();
        prop_assert!(two.connects_origin_to_one());
        prop_assert!(ParamCurve::linear(dim).connects_origin_to_one());
        let samp = ParamCurve::sampled(vec![ParamPoint::zeros(dim), ParamPoint::uniform(lift, dim), ParamPoint::uniform(1.0, dim)]).unwrap();
        prop_assert!(samp.connects_origin_to_one());
        let open = ParamCurve::two_param(dim, vec![(0.0, 0.0), (1.0, lift * 0.5)], &shift).unwrap();
        prop_assert!(!open.connects_origin_to_one() || dim == shift.len());
    }

    #[test]
    fn two_param_coordinates_follow_the_mask(dim in 2usize..30, r in 0.0f64..1.0) {
        let c = ParamCurve::two_param(dim, vec![(0.0, 0.0), (1.0, 0.5), (1.0, 1.0)], &[1]).unwrap();
        let (r1, r2) = c.split_at(r).unwrap();
        prop_assert_eq!(c.coord(r, 1), r1);
        for k in 2..=dim {
            prop_assert_eq!(c.coord(r, k), r2);
        }
        prop_assert_eq!(c.point(r).dim(), dim);
    }
}
