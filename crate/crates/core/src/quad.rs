//! Adaptive Gauss-Kronrod (7/15) quadrature.

use crate::NeumaierSum;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, libm::fabs((k - g) * h))
}

/// Largest number of subintervals kept by the adaptive scheme.
const MAX_INTERVALS: usize = 2000;

/// `int_a^b f` to roughly `tol` absolute. Bisects the interval with the
/// largest error estimate until the total estimate meets `tol` or the
/// interval budget is spent.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let (v, e) = gk15(&f, a, b);
    let mut parts = alloc::vec![(a, b, v, e)];
    let mut total_err = e;
    while total_err > tol && parts.len() < MAX_INTERVALS {
        let (i, _) = parts
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, p)| if p.3 > best.1 { (i, p.3) } else { best });
        let (lo, hi, v, e) = parts.swap_remove(i);
        let m = 0.5 * (lo + hi);
        if !(lo < m && m < hi) || !e.is_finite() {
            parts.push((lo, hi, v, 0.0));
            total_err -= e;
            continue;
        }
        let (vl, el) = gk15(&f, lo, m);
        let (vr, er) = gk15(&f, m, hi);
        total_err += el + er - e;
        parts.push((lo, m, vl, el));
        parts.push((m, hi, vr, er));
    }
    parts.iter().map(|p| p.2).collect::<NeumaierSum>().value()
}

/// Principal value of `int_a^b f` with a simple pole at `p`, `a < p < b`.
/// The neighbourhood of the pole is integrated as `f(p - u) + f(p + u)`, in
/// which the singular parts cancel.
pub(crate) fn principal_value<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, p: f64, tol: f64) -> f64 {
    let d = 0.5 * (p - a).min(b - p);
    let pair = |u: f64| f(p - u) + f(p + u);
    integrate(&f, a, p - d, tol / 3.0) + integrate(&f, p + d, b, tol / 3.0) + integrate(pair, 0.0, d, tol / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| x * x * x - x, 0.0, 2.0, 1e-14);
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn pv_of_reciprocal() {
        // PV int_{-1}^{2} dx/x = ln 2
        let v = principal_value(|x| 1.0 / x, -1.0, 2.0, 0.0, 1e-12);
        assert!((v - core::f64::consts::LN_2).abs() < 1e-10);
    }
}
