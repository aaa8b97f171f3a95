//! Rotated Dirichlet sums and their A-space sections.
//!
//! A [`CoefficientModel`] fixes the coefficients `c_m`, the phase and two
//! cutoff rules. The section at height `t` and parameters `a` is
//!
//! ```text
//! Z_N(t; a) = c_1 cos(theta(t)) + sum_{k=1..N} a_k c_{k+1} / sqrt(k+1) cos(theta(t) - ln(k+1) t)
//! ```
//!
//! with `N` taken from the robust cutoff rule. The classical AFE at a Gram
//! point uses the other rule. All sums run in ascending `k` with compensated
//! accumulation.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::special_fn::{self, ThetaKind};
use crate::{Error, NeumaierSum, Result};

/// Coefficient sequence `m -> c_m`, `m >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients {
    /// `c_m = 1` for every `m`.
    Unit,
    /// `c_m = pattern[(m - 1) % pattern.len()]`.
    Periodic(Vec<f64>),
}

/// Rule mapping a height to a number of terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutoffRule {
    /// `floor(t / 2)`.
    HalfHeight,
    /// `floor(sqrt(q t / 2 pi))` for conductor `q`.
    SqrtHeight { conductor: f64 },
    /// A fixed count.
    Fixed(usize),
}

impl CutoffRule {
    /// Term count at height `t`, never below 1.
    pub fn count(&self, t: f64) -> usize {
        let n = match *self {
            CutoffRule::HalfHeight => libm::floor(t / 2.0) as usize,
            CutoffRule::SqrtHeight { conductor } => libm::floor(libm::sqrt(conductor * t / (2.0 * PI))) as usize,
            CutoffRule::Fixed(n) => n,
        };
        n.max(1)
    }
}

/// A rotated-Dirichlet-sum model.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientModel {
    pub name: String,
    pub coeffs: Coefficients,
    pub theta_kind: ThetaKind,
    /// Section length used by the A-space `Z_N(t; a)`.
    pub robust_cutoff: CutoffRule,
    /// Term count `N(n)` of the classical AFE at a Gram point.
    pub classical_cutoff: CutoffRule,
}

impl CoefficientModel {
    /// The Hardy Z-function model.
    pub fn riemann() -> Self {
        CoefficientModel {
            name: "riemann".into(),
            coeffs: Coefficients::Unit,
            theta_kind: ThetaKind::RiemannSiegel,
            robust_cutoff: CutoffRule::HalfHeight,
            classical_cutoff: CutoffRule::SqrtHeight { conductor: 1.0 },
        }
    }

    #[inline]
    pub fn coefficient(&self, m: usize) -> f64 {
        match &self.coeffs {
            Coefficients::Unit => 1.0,
            Coefficients::Periodic(p) => p[(m - 1) % p.len()],
        }
    }

    pub fn robust_terms(&self, t: f64) -> usize {
        self.robust_cutoff.count(t)
    }

    pub fn classical_terms(&self, g: f64) -> usize {
        self.classical_cutoff.count(g)
    }

    pub fn theta(&self, t: f64) -> Result<f64> {
        special_fn::theta(self.theta_kind, t)
    }

    pub fn theta_main_deriv(&self, t: f64) -> Result<f64> {
        special_fn::theta_main_deriv(self.theta_kind, t)
    }

    /// Phase derivatives `(theta', theta'')` as used by the given mode.
    pub fn phase_derivs(&self, t: f64, mode: DerivMode) -> Result<(f64, f64)> {
        match mode {
            DerivMode::Main => Ok((self.theta_main_deriv(t)?, 0.5 / t)),
            DerivMode::Full => Ok((
                special_fn::theta_deriv(self.theta_kind, t, 1)?,
                special_fn::theta_deriv(self.theta_kind, t, 2)?,
            )),
        }
    }

    /// `ln(q t / 2 pi)`, twice the main phase derivative.
    pub fn log_height(&self, t: f64) -> f64 {
        libm::log(self.theta_kind.conductor() * t / (2.0 * PI))
    }
}

/// How t-derivatives treat the phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum DerivMode {
    /// `theta' = ln(q t / 2 pi) / 2`, `theta'' = 1/(2t)`.
    #[default]
    Main,
    /// The full asymptotic phase derivatives.
    Full,
}

/// A point `(a_1, ..., a_N)` of parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamPoint(pub Vec<f64>);

impl ParamPoint {
    pub fn uniform(r: f64, dim: usize) -> Self {
        ParamPoint(alloc::vec![r; dim])
    }

    pub fn zeros(dim: usize) -> Self {
        Self::uniform(0.0, dim)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Value and first two t-derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub z: f64,
    pub dz: f64,
    pub d2z: f64,
}

impl core::ops::Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet { z: self.z + o.z, dz: self.dz + o.dz, d2z: self.d2z + o.d2z }
    }
}

impl core::ops::Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, j: Jet) -> Jet {
        Jet { z: self * j.z, dz: self * j.dz, d2z: self * j.d2z }
    }
}

#[derive(Default)]
struct JetSum {
    z: NeumaierSum,
    dz: NeumaierSum,
    d2z: NeumaierSum,
}

impl JetSum {
    #[inline]
    fn add_term(&mut self, w: f64, phase: f64, d1: f64, d2: f64) {
        let (s, c) = crate::sum::sincos_reduced(phase);
        self.z.add(w * c);
        self.dz.add(-w * s * d1);
        self.d2z.add(-w * (c * d1 * d1 + s * d2));
    }

    fn jet(&self) -> Jet {
        Jet { z: self.z.value(), dz: self.dz.value(), d2z: self.d2z.value() }
    }
}

/// A section of fixed length with its per-term logarithms and weights
/// precomputed. Term `k` (1-based) has frequency `ln(k+1)` and weight
/// `c_{k+1} / sqrt(k+1)`.
#[derive(Debug, Clone)]
pub struct Section<'m> {
    model: &'m CoefficientModel,
    logs: Vec<f64>,
    weights: Vec<f64>,
}

impl<'m> Section<'m> {
    pub fn new(model: &'m CoefficientModel, dim: usize) -> Self {
        let mut logs = Vec::with_capacity(dim);
        let mut weights = Vec::with_capacity(dim);
        for k in 1..=dim {
            let m = k + 1;
            logs.push(libm::log(m as f64));
            weights.push(model.coefficient(m) / libm::sqrt(m as f64));
        }
        Section { model, logs, weights }
    }

    /// Section whose length is the model's robust cutoff at `t`.
    pub fn at_height(model: &'m CoefficientModel, t: f64) -> Self {
        Self::new(model, model.robust_terms(t))
    }

    pub fn model(&self) -> &'m CoefficientModel {
        self.model
    }

    pub fn dim(&self) -> usize {
        self.logs.len()
    }

    /// Frequency `ln(k+1)` of term `k`.
    pub fn log(&self, k: usize) -> f64 {
        self.logs[k - 1]
    }

    /// Weight `c_{k+1}/sqrt(k+1)` of term `k`.
    pub fn weight(&self, k: usize) -> f64 {
        self.weights[k - 1]
    }

    /// Jet of the core term `c_1 cos(theta(t))`.
    pub fn core_jet(&self, t: f64, mode: DerivMode) -> Result<Jet> {
        let th = self.model.theta(t)?;
        let (d1, d2) = self.model.phase_derivs(t, mode)?;
        let mut acc = JetSum::default();
        acc.add_term(self.model.coefficient(1), th, d1, d2);
        Ok(acc.jet())
    }

    /// Jet of `Z_N(t; a)` with `a_k = a(k)`.
    pub fn jet_with<F: Fn(usize) -> f64>(&self, t: f64, mode: DerivMode, a: F) -> Result<Jet> {
        let th = self.model.theta(t)?;
        let (d1, d2) = self.model.phase_derivs(t, mode)?;
        let mut acc = JetSum::default();
        acc.add_term(self.model.coefficient(1), th, d1, d2);
        for k in 1..=self.dim() {
            let ak = a(k);
            if ak == 0.0 {
                continue;
            }
            let l = self.logs[k - 1];
            acc.add_term(ak * self.weights[k - 1], th - l * t, d1 - l, d2);
        }
        Ok(acc.jet())
    }

    /// Jet of `Z_N(t; a)` for an explicit point.
    pub fn jet(&self, t: f64, mode: DerivMode, a: &ParamPoint) -> Result<Jet> {
        if a.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: a.dim() });
        }
        let v = a.values();
        self.jet_with(t, mode, |k| v[k - 1])
    }

    /// Jets of the core term and of the unit-weight sums over the terms with
    /// `first(k)` true and false respectively. `Z(t; a)` for a point that is
    /// `r1` on the first group and `r2` on the second is
    /// `core + r1 * first + r2 * second`.
    pub fn split_jets<F: Fn(usize) -> bool>(&self, t: f64, mode: DerivMode, first: F) -> Result<[Jet; 3]> {
        let th = self.model.theta(t)?;
        let (d1, d2) = self.model.phase_derivs(t, mode)?;
        let mut core = JetSum::default();
        core.add_term(self.model.coefficient(1), th, d1, d2);
        let mut a = JetSum::default();
        let mut b = JetSum::default();
        for k in 1..=self.dim() {
            let l = self.logs[k - 1];
            let acc = if first(k) { &mut a } else { &mut b };
            acc.add_term(self.weights[k - 1], th - l * t, d1 - l, d2);
        }
        Ok([core.jet(), a.jet(), b.jet()])
    }
}

fn check_dim(model: &CoefficientModel, t: f64, a: &ParamPoint) -> Result<()> {
    let n = model.robust_terms(t);
    if a.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a.dim() });
    }
    Ok(())
}

/// `Z_N(t; a)` with `N` the robust cutoff at `t`.
pub fn z_section(model: &CoefficientModel, t: f64, a: &ParamPoint) -> Result<f64> {
    check_dim(model, t, a)?;
    Ok(Section::new(model, a.dim()).jet(t, DerivMode::Main, a)?.z)
}

/// t-derivative of order 1 or 2 of `Z_N(t; a)`.
pub fn z_section_deriv(model: &CoefficientModel, t: f64, a: &ParamPoint, order: u8, mode: DerivMode) -> Result<f64> {
    check_dim(model, t, a)?;
    let j = Section::new(model, a.dim()).jet(t, mode, a)?;
    match order {
        1 => Ok(j.dz),
        2 => Ok(j.d2z),
        _ => Err(Error::InvalidInput("derivative order must be 1 or 2")),
    }
}

/// `Z_N(t; a)` at complex height, through the analytic continuation of the
/// phase. Real-coefficient symmetry gives `Z(conj t) = conj Z(t)`.
pub fn z_section_complex(model: &CoefficientModel, t: Complex64, a: &ParamPoint) -> Result<Complex64> {
    check_dim(model, t.re, a)?;
    let th = special_fn::theta_complex(model.theta_kind, t)?;
    let mut re = NeumaierSum::new();
    let mut im = NeumaierSum::new();
    let c1 = th.cos() * model.coefficient(1);
    re.add(c1.re);
    im.add(c1.im);
    for (i, ak) in a.values().iter().enumerate() {
        let m = i + 2;
        let w = ak * model.coefficient(m) / libm::sqrt(m as f64);
        let v = (th - t * libm::log(m as f64)).cos() * w;
        re.add(v.re);
        im.add(v.im);
    }
    Ok(Complex64::new(re.value(), im.value()))
}

/// Classical AFE values at a Gram point.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassicalAfe {
    /// Gram index recovered from `theta(g)/pi`.
    pub n: i64,
    /// `N(n)`, the classical cutoff at `g`.
    pub cutoff: usize,
    pub z: f64,
    pub zprime: f64,
}

/// Which of the two classical sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Which {
    Z,
    ZPrime,
}

/// Sign `(-1)^n`.
#[inline]
pub fn parity_sign(n: i64) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Gram index of `g`, or an error when `theta(g)/pi` is not within `1e-6`
/// of an integer.
pub fn gram_index(model: &CoefficientModel, g: f64) -> Result<i64> {
    let x = model.theta(g)? / PI;
    let n = libm::round(x);
    let off = x - n;
    if libm::fabs(off) > 1e-6 {
        return Err(Error::NotAGramPoint { t: g, offset: off });
    }
    Ok(n as i64)
}

/// The `k`-th term of the classical sum (without accumulation).
pub fn afe_term(model: &CoefficientModel, g: f64, n: i64, k: usize, which: Which) -> f64 {
    let kf = k as f64;
    let lk = libm::log(kf);
    let w = parity_sign(n) * model.coefficient(k) / libm::sqrt(kf);
    let (s, c) = crate::sum::sincos_reduced(lk * g);
    match which {
        Which::Z => 2.0 * w * c,
        Which::ZPrime => {
            let q = model.theta_kind.conductor();
            w * libm::log(q * g / (2.0 * PI * kf * kf)) * s
        }
    }
}

fn afe_range(model: &CoefficientModel, g: f64, n: i64, lo: usize, hi: usize, which: Which) -> f64 {
    let mut s = NeumaierSum::new();
    for k in lo..=hi {
        s.add(afe_term(model, g, n, k, which));
    }
    s.value()
}

/// Classical AFE `Z(g)` and `Z'(g)` at a Gram point, without error term.
pub fn classical_afe(model: &CoefficientModel, g: f64) -> Result<ClassicalAfe> {
    let n = gram_index(model, g)?;
    let cutoff = model.classical_terms(g);
    Ok(ClassicalAfe {
        n,
        cutoff,
        z: afe_range(model, g, n, 1, cutoff, Which::Z),
        zprime: afe_range(model, g, n, 1, cutoff, Which::ZPrime),
    })
}

/// Partial classical sum over `k` in `lo..=hi`.
pub fn localized_sum(model: &CoefficientModel, g: f64, lo: usize, hi: usize, which: Which) -> Result<f64> {
    let n = gram_index(model, g)?;
    let max = model.classical_terms(g);
    if lo < 1 || lo > hi || hi > max {
        return Err(Error::IndexRange { lo, hi, max });
    }
    Ok(afe_range(model, g, n, lo, hi, which))
}

/// Running partial sums `S_1, ..., S_N(n)` of the classical sum.
pub fn partial_sums(model: &CoefficientModel, g: f64, which: Which) -> Result<Vec<f64>> {
    let n = gram_index(model, g)?;
    let max = model.classical_terms(g);
    let mut s = NeumaierSum::new();
    let mut out = Vec::with_capacity(max);
    for k in 1..=max {
        s.add(afe_term(model, g, n, k, which));
        out.push(s.value());
    }
    Ok(out)
}

/// Something that returns `(Z(t), Z'(t))` on the real line.
pub trait ZEvaluator {
    fn eval(&self, t: f64) -> Result<(f64, f64)>;
}

/// The robust section at `a = 1` with the cutoff taken at each height.
#[derive(Debug, Clone, Copy)]
pub struct RobustZ<'m> {
    pub model: &'m CoefficientModel,
    pub mode: DerivMode,
}

impl<'m> RobustZ<'m> {
    pub fn new(model: &'m CoefficientModel) -> Self {
        RobustZ { model, mode: DerivMode::Main }
    }
}

impl ZEvaluator for RobustZ<'_> {
    fn eval(&self, t: f64) -> Result<(f64, f64)> {
        let j = Section::at_height(self.model, t).jet_with(t, self.mode, |_| 1.0)?;
        Ok((j.z, j.dz))
    }
}

/// History of a Newton run; `iterates[0]` is the starting point.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NewtonRun {
    pub t: f64,
    pub iterates: Vec<f64>,
    pub residual: f64,
}

pub const NEWTON_TOL: f64 = 1e-10;
pub const NEWTON_MAX_ITER: usize = 50;

/// Newton iteration `t <- t - Z/Z'` until `|Z| < tol`, or until the step
/// drops below `1e-14 t`, where f64 rounding in `Z` stops further progress.
pub fn find_zero_newton<E: ZEvaluator + ?Sized>(eval: &E, t0: f64, max_iter: usize, tol: f64) -> Result<NewtonRun> {
    let mut t = t0;
    let mut iterates = alloc::vec![t0];
    for _ in 0..=max_iter {
        let (z, dz) = eval.eval(t)?;
        if libm::fabs(z) < tol {
            return Ok(NewtonRun { t, iterates, residual: z });
        }
        if iterates.len() > max_iter {
            break;
        }
        if libm::fabs(dz) < 1e-12 {
            return Err(Error::FlatPoint { t, iterates });
        }
        let step = z / dz;
        t -= step;
        if !t.is_finite() {
            break;
        }
        iterates.push(t);
        if libm::fabs(step) <= 1e-14 * libm::fabs(t) {
            let (z, _) = eval.eval(t)?;
            return Ok(NewtonRun { t, iterates, residual: z });
        }
    }
    Err(Error::NonConvergence { what: "newton", iterates })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoffs_never_vanish() {
        assert_eq!(CutoffRule::HalfHeight.count(10.0), 5);
        assert_eq!(CutoffRule::SqrtHeight { conductor: 1.0 }.count(10.0), 1);
        assert_eq!(CutoffRule::Fixed(0).count(100.0), 1);
    }

    #[test]
    fn newton_history_starts_at_seed() {
        struct Line;
        impl ZEvaluator for Line {
            fn eval(&self, t: f64) -> Result<(f64, f64)> {
                Ok((t - 20.0, 1.0))
            }
        }
        let run = find_zero_newton(&Line, 25.0, 10, 1e-12).unwrap();
        assert_eq!(run.iterates, alloc::vec![25.0, 20.0]);
    }

    #[test]
    fn flat_point_is_reported() {
        struct Flat;
        impl ZEvaluator for Flat {
            fn eval(&self, _t: f64) -> Result<(f64, f64)> {
                Ok((1.0, 0.0))
            }
        }
        assert!(matches!(find_zero_newton(&Flat, 30.0, 10, 1e-10), Err(Error::FlatPoint { .. })));
    }
}
