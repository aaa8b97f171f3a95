//! The Davenport-Heilbronn model.
//!
//! `D(s)` combines the two L-functions of the mod-5 character sending 2 to
//! `i`. Its rotated sum is a cosine series with period-5 coefficients
//! `(1, kappa, -kappa, -1, 0)`, so the generic machinery applies unchanged.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::curves::ParamCurve;
use crate::discriminant::{self, DiscriminantTrace, Verdict};
use crate::gram;
use crate::special_fn::{self, ThetaKind};
use crate::z_model::{parity_sign, CoefficientModel, Coefficients, CutoffRule};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DhConstants {
    pub kappa: f64,
    /// `c_1..c_5`.
    pub coeffs: [f64; 5],
}

/// The mod-5 character with `chi(2) = i`.
pub fn character(n: u64) -> Complex64 {
    match n % 5 {
        1 => Complex64::new(1.0, 0.0),
        2 => Complex64::new(0.0, 1.0),
        3 => Complex64::new(0.0, -1.0),
        4 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 0.0),
    }
}

impl DhConstants {
    pub fn new() -> Self {
        let r5 = libm::sqrt(5.0);
        let kappa = (libm::sqrt(10.0 - 2.0 * r5) - 2.0) / (r5 - 1.0);
        let mut coeffs = [0.0; 5];
        for (i, c) in coeffs.iter_mut().enumerate() {
            let x = character(i as u64 + 1);
            *c = x.re + kappa * x.im;
        }
        DhConstants { kappa, coeffs }
    }
}

impl Default for DhConstants {
    fn default() -> Self {
        Self::new()
    }
}

/// Davenport-Heilbronn model with cutoffs `floor(t/2)` and `floor(sqrt(5 g / 2 pi))`.
pub fn dh_model() -> CoefficientModel {
    CoefficientModel {
        name: "dh".into(),
        coeffs: Coefficients::Periodic(DhConstants::new().coeffs.to_vec()),
        theta_kind: ThetaKind::DavenportHeilbronn,
        robust_cutoff: CutoffRule::HalfHeight,
        classical_cutoff: CutoffRule::SqrtHeight { conductor: 5.0 },
    }
}

pub fn dh_gram_point(n: u64) -> Result<f64> {
    gram::gram_point(&dh_model(), n)
}

pub fn dh_core_zero(n: u64) -> Result<f64> {
    gram::core_zero(&dh_model(), n)
}

/// Gram index of the violation experiment.
pub const DH_INDEX: u64 = 44;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DhViolationReport {
    pub n: u64,
    pub g: f64,
    pub trace: DiscriminantTrace,
    /// First-order value `Z_N(g; r)` at each trace sample.
    pub first_order: Vec<f64>,
    pub first_order_max_dev: f64,
    /// `max Delta - min Delta` over the trace.
    pub delta_range: f64,
    pub deviation_ratio: f64,
    pub delta_end: f64,
    /// Collision, or `(-1)^n Delta(1) < 0`.
    pub violation: bool,
    /// `max |g(r) - g_n|`.
    pub max_displacement: f64,
    /// `0.25 * 2 pi / theta'(g_n)`.
    pub quarter_gap: f64,
    pub displacement_ok: bool,
}

/// Linear-curve discriminant at `n = 44` on the DH model.
pub fn dh_violation_experiment(steps: usize) -> Result<DhViolationReport> {
    let model = dh_model();
    let n = DH_INDEX;
    let g = gram::gram_point(&model, n)?;
    let dim = model.robust_terms(g);
    let trace = discriminant::track_extremum(&model, n, &ParamCurve::linear(dim), steps)?;
    let rep = discriminant::closed_forms(&model, n)?;
    let mut first_order = Vec::with_capacity(trace.samples.len());
    let (mut dev, mut lo, mut hi, mut disp) = (0.0f64, f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for s in &trace.samples {
        let f = discriminant::first_order(&model, &rep, s.r)?;
        first_order.push(f);
        dev = dev.max(libm::fabs(s.delta - f));
        lo = lo.min(s.delta);
        hi = hi.max(s.delta);
        disp = disp.max(libm::fabs(s.g - g));
    }
    let delta_end = trace.last().delta;
    let violation = matches!(trace.verdict, Verdict::CollisionAt(_)) || parity_sign(n as i64) * delta_end < 0.0;
    let quarter_gap = 0.25 * 2.0 * core::f64::consts::PI / special_fn::theta_deriv(ThetaKind::DavenportHeilbronn, g, 1)?;
    Ok(DhViolationReport {
        n,
        g,
        first_order,
        first_order_max_dev: dev,
        delta_range: hi - lo,
        deviation_ratio: dev / (hi - lo),
        delta_end,
        violation,
        max_displacement: disp,
        quarter_gap,
        displacement_ok: disp < quarter_gap,
        trace,
    })
}
