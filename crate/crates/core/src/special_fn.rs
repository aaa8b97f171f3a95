//! Rotation phases and the principal branch of Lambert W.
//!
//! The Riemann-Siegel phase uses its asymptotic series. The
//! Davenport-Heilbronn phase is `Im log Gamma(3/4 + it/2) - (t/2) ln(pi/5)`,
//! evaluated with a Stirling series after shifting the argument to `|z| >= 10`.

use core::f64::consts::{E, PI};

use num_complex::Complex64;

use crate::{Error, Result};

/// Lower end of the height range on which the phase functions are defined.
pub const THETA_FLOOR: f64 = 10.0;

const TWO_PI: f64 = 2.0 * PI;

/// Which rotation phase a model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ThetaKind {
    RiemannSiegel,
    DavenportHeilbronn,
}

impl ThetaKind {
    /// Conductor `q` of the functional equation: the main term of the
    /// phase derivative is `ln(q t / 2 pi) / 2`.
    pub fn conductor(self) -> f64 {
        match self {
            ThetaKind::RiemannSiegel => 1.0,
            ThetaKind::DavenportHeilbronn => 5.0,
        }
    }
}

fn check_height(t: f64) -> Result<()> {
    if t.is_finite() && t >= THETA_FLOOR {
        Ok(())
    } else {
        Err(Error::Domain { what: "theta", value: t })
    }
}

/// Principal branch `W_0` of the Lambert W function.
///
/// Halley iteration, stopped when the step falls below `1e-14` relative.
pub fn lambert_w0(x: f64) -> Result<f64> {
    let branch = -1.0 / E;
    if x.is_nan() || x < branch - 4.0 * f64::EPSILON {
        return Err(Error::Domain { what: "lambert_w0", value: x });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let mut w = if x < -0.25 {
        let p = libm::sqrt((2.0 * (E * x + 1.0)).max(0.0));
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        0.567 * libm::log1p(x) / core::f64::consts::LN_2
    } else {
        let l1 = libm::log(x);
        let l2 = libm::log(l1);
        l1 - l2 + l2 / l1
    };
    if x <= branch {
        return Ok(-1.0);
    }
    for _ in 0..64 {
        let ew = libm::exp(w);
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        if denom == 0.0 || !denom.is_finite() {
            break;
        }
        let step = f / denom;
        w -= step;
        if libm::fabs(step) <= 1e-14 * (1.0 + libm::fabs(w)) {
            return Ok(w);
        }
    }
    Ok(w)
}

/// The rotation phase `theta(t)` for `t >= 10`.
pub fn theta(kind: ThetaKind, t: f64) -> Result<f64> {
    check_height(t)?;
    Ok(match kind {
        ThetaKind::RiemannSiegel => rs_theta(t),
        ThetaKind::DavenportHeilbronn => dh_theta(t),
    })
}

/// First (`order = 1`) or second (`order = 2`) derivative of the phase,
/// including all correction terms.
pub fn theta_deriv(kind: ThetaKind, t: f64, order: u8) -> Result<f64> {
    check_height(t)?;
    match (kind, order) {
        (ThetaKind::RiemannSiegel, 1) => Ok(rs_theta_d1(t)),
        (ThetaKind::RiemannSiegel, 2) => Ok(rs_theta_d2(t)),
        (ThetaKind::DavenportHeilbronn, 1) => Ok(dh_theta_d1(t)),
        (ThetaKind::DavenportHeilbronn, 2) => Ok(dh_theta_d2(t)),
        _ => Err(Error::InvalidInput("derivative order must be 1 or 2")),
    }
}

/// Main term `ln(q t / 2 pi) / 2` of the phase derivative, `q` the conductor.
pub fn theta_main_deriv(kind: ThetaKind, t: f64) -> Result<f64> {
    check_height(t)?;
    Ok(0.5 * libm::log(kind.conductor() * t / TWO_PI))
}

fn rs_theta(t: f64) -> f64 {
    let u = 1.0 / t;
    let u2 = u * u;
    let series = u * (1.0 / 48.0 + u2 * (7.0 / 5760.0 + u2 * (31.0 / 80640.0 + u2 * (127.0 / 430080.0))));
    0.5 * t * (libm::log(t / TWO_PI) - 1.0) - PI / 8.0 + series
}

/// The phase continued to complex `t`; used for symmetry checks.
pub fn theta_complex(kind: ThetaKind, t: Complex64) -> Result<Complex64> {
    check_height(t.re)?;
    if libm::fabs(t.im) >= 1.0 {
        return Err(Error::Domain { what: "theta_complex", value: t.im });
    }
    Ok(match kind {
        ThetaKind::RiemannSiegel => {
            let u = t.inv();
            let u2 = u * u;
            let series = u * ((u2 * ((u2 * ((u2 * (127.0 / 430080.0)) + 31.0 / 80640.0)) + 7.0 / 5760.0)) + 1.0 / 48.0);
            t * 0.5 * ((t / TWO_PI).ln() - 1.0) - PI / 8.0 + series
        }
        ThetaKind::DavenportHeilbronn => {
            let i = Complex64::new(0.0, 1.0);
            let up = log_gamma(Complex64::new(0.75, 0.0) + i * t * 0.5);
            let down = log_gamma(Complex64::new(0.75, 0.0) - i * t * 0.5);
            (up - down) / (i * 2.0) - t * 0.5 * libm::log(PI / 5.0)
        }
    })
}

fn rs_theta_d1(t: f64) -> f64 {
    let u2 = 1.0 / (t * t);
    let series = u2 * (1.0 / 48.0 + u2 * (7.0 / 1920.0 + u2 * (31.0 / 16128.0 + u2 * (889.0 / 430080.0))));
    0.5 * libm::log(t / TWO_PI) - series
}

fn rs_theta_d2(t: f64) -> f64 {
    let u = 1.0 / t;
    let u2 = u * u;
    u * (0.5 + u2 * (1.0 / 24.0 + u2 * (7.0 / 480.0 + u2 * (31.0 / 2688.0 + u2 * (127.0 / 7680.0)))))
}

// B_2, B_4, ..., B_16.
const BERNOULLI: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

/// Shift `z` along the real axis until `|z| >= 10`; returns the shifted
/// argument and the number of steps.
fn shift_up(z: Complex64) -> (Complex64, u32) {
    let mut w = z;
    let mut m = 0;
    while w.norm() < 10.0 {
        w += 1.0;
        m += 1;
    }
    (w, m)
}

fn dh_argument(t: f64) -> Complex64 {
    Complex64::new(0.75, 0.5 * t)
}

/// `log Gamma(z)` for `Re z > 0`, on the branch continuous from the
/// positive real axis.
fn log_gamma(z: Complex64) -> Complex64 {
    let (w, m) = shift_up(z);
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut tail = Complex64::new(0.0, 0.0);
    let mut p = inv;
    for (j, b) in BERNOULLI.iter().enumerate() {
        let k = 2.0 * (j as f64 + 1.0);
        tail += p * (b / (k * (k - 1.0)));
        p *= inv2;
    }
    let main = (w - 0.5) * w.ln() - w + 0.5 * libm::log(TWO_PI) + tail;
    let mut shift = Complex64::new(0.0, 0.0);
    for j in 0..m {
        shift += (z + j as f64).ln();
    }
    main - shift
}

fn digamma(z: Complex64) -> Complex64 {
    let (w, m) = shift_up(z);
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut tail = Complex64::new(0.0, 0.0);
    let mut p = inv2;
    for (j, b) in BERNOULLI.iter().enumerate() {
        let k = 2.0 * (j as f64 + 1.0);
        tail += p * (b / k);
        p *= inv2;
    }
    let mut shift = Complex64::new(0.0, 0.0);
    for j in 0..m {
        shift += (z + j as f64).inv();
    }
    w.ln() - inv * 0.5 - tail - shift
}

fn trigamma(z: Complex64) -> Complex64 {
    let (w, m) = shift_up(z);
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut tail = Complex64::new(0.0, 0.0);
    let mut p = inv2 * inv;
    for b in BERNOULLI.iter() {
        tail += p * *b;
        p *= inv2;
    }
    let mut shift = Complex64::new(0.0, 0.0);
    for j in 0..m {
        let d = z + j as f64;
        shift += (d * d).inv();
    }
    inv + inv2 * 0.5 + tail + shift
}

fn dh_theta(t: f64) -> f64 {
    log_gamma(dh_argument(t)).im - 0.5 * t * libm::log(PI / 5.0)
}

fn dh_theta_d1(t: f64) -> f64 {
    0.5 * digamma(dh_argument(t)).re - 0.5 * libm::log(PI / 5.0)
}

fn dh_theta_d2(t: f64) -> f64 {
    -0.25 * trigamma(dh_argument(t)).im
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn w0_fixed_points() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(E).unwrap() - 1.0).abs() < 1e-15);
        assert!((lambert_w0(1.0).unwrap() - 0.567_143_290_409_783_9).abs() < 1e-15);
        assert!((lambert_w0(-1.0 / E).unwrap() + 1.0).abs() < 1e-7);
        assert!(lambert_w0(-0.4).is_err());
    }

    #[test]
    fn theta_rejects_low_heights() {
        assert!(theta(ThetaKind::RiemannSiegel, 9.99).is_err());
        assert!(theta_deriv(ThetaKind::DavenportHeilbronn, 5.0, 1).is_err());
        assert!(theta_deriv(ThetaKind::RiemannSiegel, 50.0, 3).is_err());
    }

    #[test]
    fn main_term_at_two_pi_e() {
        let v = theta_main_deriv(ThetaKind::RiemannSiegel, TWO_PI * E).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }
}
