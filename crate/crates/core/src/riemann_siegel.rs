//! Hardy's `Z(t)` by the Riemann-Siegel formula with three remainder terms.
//!
//! This is the reference evaluator for Newton zero-finding; the A-space
//! machinery itself uses the robust section in [`crate::z_model`].

use core::f64::consts::PI;

use crate::rs_coeffs::{C0, C1, C2};
use crate::special_fn::{self, ThetaKind};
use crate::z_model::ZEvaluator;
use crate::{NeumaierSum, Result};

/// `(p(x), p'(x))` for ascending coefficients.
fn horner(c: &[f64], x: f64) -> (f64, f64) {
    let mut v = 0.0;
    let mut d = 0.0;
    for &ci in c.iter().rev() {
        d = d * x + v;
        v = v * x + ci;
    }
    (v, d)
}

/// `Z(t)` and `Z'(t)` for `t >= 10`. Absolute error is about `1e-6` at
/// `t = 100` and a few `1e-9` from `t = 7000` on.
pub fn riemann_siegel_z(t: f64) -> Result<(f64, f64)> {
    let th = special_fn::theta(ThetaKind::RiemannSiegel, t)?;
    let th1 = special_fn::theta_deriv(ThetaKind::RiemannSiegel, t, 1)?;
    let a = libm::sqrt(t / (2.0 * PI));
    let n = libm::floor(a) as usize;
    let mut z = NeumaierSum::new();
    let mut dz = NeumaierSum::new();
    for k in 1..=n {
        let kf = k as f64;
        let lk = libm::log(kf);
        let w = 2.0 / libm::sqrt(kf);
        let (s, c) = crate::sum::sincos_reduced(th - t * lk);
        z.add(w * c);
        dz.add(-w * s * (th1 - lk));
    }
    let x = 2.0 * (a - n as f64) - 1.0;
    let (c0, d0) = horner(&C0, x);
    let (c1, d1) = horner(&C1, x);
    let (c2, d2) = horner(&C2, x);
    let r = c0 + c1 / a + c2 / (a * a);
    let da = 1.0 / (4.0 * PI * a);
    let dr = (d0 + d1 / a + d2 / (a * a)) * 2.0 * da - (c1 / (a * a) + 2.0 * c2 / (a * a * a)) * da;
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let sa = libm::sqrt(a);
    z.add(sign * r / sa);
    dz.add(sign * (dr / sa - 0.5 * r * da / (a * sa)));
    Ok((z.value(), dz.value()))
}

/// [`ZEvaluator`] backed by [`riemann_siegel_z`].
#[derive(Debug, Clone, Copy, Default)]
pub struct RiemannSiegelZ;

impl ZEvaluator for RiemannSiegelZ {
    fn eval(&self, t: f64) -> Result<(f64, f64)> {
        riemann_siegel_z(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_matches_direct() {
        let (v, d) = horner(&[1.0, 2.0, 3.0], 2.0);
        assert_eq!(v, 17.0);
        assert_eq!(d, 14.0);
    }
}
