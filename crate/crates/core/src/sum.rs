/// Neumaier's variant of Kahan summation.
///
/// Terms are added in call order; the result is deterministic for a fixed
/// sequence of inputs.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub const fn new() -> Self {
        NeumaierSum { sum: 0.0, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl core::iter::FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

const TWO_PI_HI: f64 = 6.283185303211212;
const TWO_PI_MID: f64 = 3.968374295837407e-9;
const TWO_PI_LO: f64 = 2.2884754904439327e-17;
const INV_TWO_PI: f64 = 0.15915494309189535;

/// `(sin x, cos x)` with a three-part Cody-Waite reduction mod `2 pi` in
/// front of `libm::sincos`, which is slow on the large arguments of long
/// trigonometric sums. Exact reduction is kept for `|x| < 2^26 pi`.
#[inline]
pub(crate) fn sincos_reduced(x: f64) -> (f64, f64) {
    if libm::fabs(x) < 4.0e8 {
        let n = libm::round(x * INV_TWO_PI);
        let r = ((x - n * TWO_PI_HI) - n * TWO_PI_MID) - n * TWO_PI_LO;
        libm::sincos(r)
    } else {
        libm::sincos(x)
    }
}
