//! The Gram discriminant along curves in parameter space.
//!
//! Along a curve `gamma(r)` the extremum `g_n(r)` of `Z_N(t; gamma(r))` that
//! starts at the Gram point is followed by predictor-corrector continuation.
//! The discriminant is `Delta_n(r) = Z_N(g_n(r); gamma(r))`; a sign change of
//! `(-1)^n Delta_n` means the two zeros around `g_n` have collided.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::curves::ParamCurve;
use crate::gram::gram_point;
use crate::z_model::{parity_sign, CoefficientModel, DerivMode, Jet, ParamPoint, Section};
use crate::{Error, Result};

pub const DEFAULT_STEPS: usize = 200;

/// Smallest step before continuation is declared lost.
pub const MIN_STEP: f64 = 1e-5;

/// Newton iterations allowed per continuation step.
const MAX_CORRECTOR_ITERS: usize = 5;

/// Bisection width for collision localisation.
const COLLISION_WIDTH: f64 = 1e-6;

/// `kappa_H` in `H = kappa_H (-1)^n (Z'(g; 1) / ln(g / 2 pi))^2`.
pub const HESSIAN_CONSTANT: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceSample {
    pub r: f64,
    pub g: f64,
    pub delta: f64,
    /// `d^2 Z / dt^2` at the tracked extremum.
    pub ztt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Verdict {
    NonColliding,
    CollisionAt(f64),
    ContinuationLost(f64),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiscriminantTrace {
    pub n: u64,
    pub samples: Vec<TraceSample>,
    pub verdict: Verdict,
}

impl DiscriminantTrace {
    pub fn last(&self) -> &TraceSample {
        &self.samples[self.samples.len() - 1]
    }

    /// Smallest `(-1)^n Delta` over the samples.
    pub fn min_signed_delta(&self) -> f64 {
        let s = parity_sign(self.n as i64);
        self.samples.iter().map(|x| s * x.delta).fold(f64::INFINITY, f64::min)
    }
}

/// Newton solver for the extremum near a Gram point, shared by the
/// continuation routines.
#[derive(Debug, Clone)]
pub struct Tracker<'m> {
    pub section: Section<'m>,
    pub n: u64,
    pub g_n: f64,
    pub mode: DerivMode,
    /// `(-1)^n`.
    pub sign: f64,
    /// Local Gram gap `pi / theta'(g_n)`.
    pub gap: f64,
    /// `|Z''|` below this counts as degenerate.
    pub degenerate: f64,
}

impl<'m> Tracker<'m> {
    /// Tracker for the section whose length is the robust cutoff at `g_n`.
    pub fn new(model: &'m CoefficientModel, n: u64) -> Result<Self> {
        let g_n = gram_point(model, n)?;
        Self::with_dim(model, n, g_n, model.robust_terms(g_n))
    }

    pub fn with_dim(model: &'m CoefficientModel, n: u64, g_n: f64, dim: usize) -> Result<Self> {
        let th1 = model.theta_main_deriv(g_n)?;
        Ok(Tracker {
            section: Section::new(model, dim),
            n,
            g_n,
            mode: DerivMode::Main,
            sign: parity_sign(n as i64),
            gap: PI / th1,
            degenerate: 1e-8 * 4.0 * th1 * th1,
        })
    }

    pub fn dim(&self) -> usize {
        self.section.dim()
    }

    /// Newton on `Z'(t; a) = 0` from `t0`. Returns the extremum, the jet
    /// there and the iteration count, or `None` without convergence in
    /// `max_iter` steps.
    pub fn solve<F: Fn(usize) -> f64>(&self, t0: f64, max_iter: usize, a: F) -> Option<(f64, Jet, usize)> {
        let mut t = t0;
        for it in 1..=max_iter {
            let j = self.section.jet_with(t, self.mode, &a).ok()?;
            if j.d2z == 0.0 || !j.d2z.is_finite() {
                return None;
            }
            let step = j.dz / j.d2z;
            t -= step;
            if libm::fabs(step) > self.gap {
                return None;
            }
            if libm::fabs(step) <= 1e-13 * t {
                let j = self.section.jet_with(t, self.mode, &a).ok()?;
                return Some((t, j, it));
            }
        }
        None
    }

    fn accept(&self, prev: &TraceSample, t_new: f64, j: &Jet, iters: usize) -> bool {
        iters <= MAX_CORRECTOR_ITERS
            && libm::fabs(t_new - prev.g) <= 0.5 * self.gap
            && libm::fabs(j.d2z) >= self.degenerate
            && (j.d2z > 0.0) == (prev.ztt > 0.0)
    }

    /// Continuation of the extremum along `point(r)`, `r` from `0` to
    /// `r_end`, with base step `1/steps`.
    pub fn trace<P, F>(&self, point: P, r_end: f64, steps: usize) -> Result<DiscriminantTrace>
    where
        P: Fn(f64) -> F,
        F: Fn(usize) -> f64,
    {
        self.trace_from(self.g_n, point, r_end, steps)
    }

    /// As [`Tracker::trace`], with the extremum at `r = 0` sought from `t_start`.
    pub fn trace_from<P, F>(&self, t_start: f64, point: P, r_end: f64, steps: usize) -> Result<DiscriminantTrace>
    where
        P: Fn(f64) -> F,
        F: Fn(usize) -> f64,
    {
        if steps == 0 {
            return Err(Error::InvalidInput("steps must be positive"));
        }
        let (t0, j0, _) = self
            .solve(t_start, 50, point(0.0))
            .ok_or(Error::NonConvergence { what: "extremum at r = 0", iterates: alloc::vec![t_start] })?;
        let mut samples = alloc::vec![TraceSample { r: 0.0, g: t0, delta: j0.z, ztt: j0.d2z }];
        let mut verdict = Verdict::NonColliding;
        let base = 1.0 / steps as f64;
        let mut h = base;
        let mut prev_r = None::<(f64, f64)>;
        while samples[samples.len() - 1].r < r_end {
            let cur = samples[samples.len() - 1];
            let r_try = (cur.r + h).min(r_end);
            let pred = match prev_r {
                Some((rp, tp)) if cur.r > rp => cur.g + (cur.g - tp) * (r_try - cur.r) / (cur.r - rp),
                _ => cur.g,
            };
            match self.solve(pred, MAX_CORRECTOR_ITERS + 1, point(r_try)) {
                Some((t, j, it)) if self.accept(&cur, t, &j, it) => {
                    let next = TraceSample { r: r_try, g: t, delta: j.z, ztt: j.d2z };
                    if verdict == Verdict::NonColliding && self.sign * next.delta <= 0.0 {
                        verdict = Verdict::CollisionAt(self.bisect(&point, &cur, &next));
                    }
                    prev_r = Some((cur.r, cur.g));
                    samples.push(next);
                    h = (2.0 * h).min(base);
                }
                _ => {
                    h *= 0.5;
                    if h < MIN_STEP {
                        if verdict == Verdict::NonColliding {
                            verdict = Verdict::ContinuationLost(cur.r);
                        }
                        break;
                    }
                }
            }
        }
        Ok(DiscriminantTrace { n: self.n, samples, verdict })
    }

    /// Localise the sign change of `(-1)^n Delta` between two samples.
    fn bisect<P, F>(&self, point: &P, lo: &TraceSample, hi: &TraceSample) -> f64
    where
        P: Fn(f64) -> F,
        F: Fn(usize) -> f64,
    {
        let (mut a, mut ta) = (lo.r, lo.g);
        let (mut b, mut tb) = (hi.r, hi.g);
        while b - a > COLLISION_WIDTH {
            let m = 0.5 * (a + b);
            let seed = ta + (tb - ta) * (m - a) / (b - a);
            match self.solve(seed, 20, point(m)) {
                Some((t, j, _)) if self.sign * j.z > 0.0 => {
                    a = m;
                    ta = t;
                }
                Some((t, _, _)) => {
                    b = m;
                    tb = t;
                }
                None => break,
            }
        }
        0.5 * (a + b)
    }
}

fn curve_tracker<'m>(model: &'m CoefficientModel, n: u64, curve: &ParamCurve) -> Result<Tracker<'m>> {
    let g_n = gram_point(model, n)?;
    let dim = model.robust_terms(g_n);
    if curve.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: curve.dim() });
    }
    Tracker::with_dim(model, n, g_n, dim)
}

/// Trace of the extremum along the whole curve.
pub fn track_extremum(model: &CoefficientModel, n: u64, curve: &ParamCurve, steps: usize) -> Result<DiscriminantTrace> {
    track_extremum_to(model, n, curve, 1.0, steps)
}

/// Trace of the extremum for `r` in `[0, r_end]`.
pub fn track_extremum_to(
    model: &CoefficientModel,
    n: u64,
    curve: &ParamCurve,
    r_end: f64,
    steps: usize,
) -> Result<DiscriminantTrace> {
    if !(0.0..=1.0).contains(&r_end) {
        return Err(Error::Domain { what: "curve parameter", value: r_end });
    }
    let tr = curve_tracker(model, n, curve)?;
    tr.trace(|r| move |k| curve.coord(r, k), r_end, steps)
}

/// `Delta_n(r)` on `curve`. Fails when the trace collides or loses the
/// extremum before `r`; the error carries the partial trace.
pub fn discriminant_at(model: &CoefficientModel, n: u64, curve: &ParamCurve, r: f64) -> Result<f64> {
    let trace = track_extremum_to(model, n, curve, r, DEFAULT_STEPS)?;
    match trace.verdict {
        Verdict::CollisionAt(rc) => Err(Error::Collision { r: rc, trace: Box::new(trace) }),
        Verdict::ContinuationLost(rc) => Err(Error::ContinuationLost { r: rc, trace: Box::new(trace) }),
        Verdict::NonColliding => Ok(trace.last().delta),
    }
}

/// Extremum `g_n(a)` and `Delta_n(a)` for a point near the origin, by Newton
/// from `g_n`.
pub fn extremum_at(model: &CoefficientModel, n: u64, a: &ParamPoint, mode: DerivMode) -> Result<(f64, f64)> {
    let g_n = gram_point(model, n)?;
    let mut tr = Tracker::with_dim(model, n, g_n, a.dim())?;
    tr.mode = mode;
    let v = a.values();
    let (t, j, _) = tr
        .solve(g_n, 50, |k| v[k - 1])
        .ok_or(Error::NonConvergence { what: "extremum", iterates: alloc::vec![g_n] })?;
    Ok((t, j.z))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClosedFormReport {
    pub n: u64,
    pub g: f64,
    pub dim: usize,
    /// `d Delta_n / d a_k` at the origin, `k = 1..dim` stored from index 0.
    pub grad_delta: Vec<f64>,
    /// `d g_n / d a_k` at the origin.
    pub grad_gram: Vec<f64>,
    /// `Z'(g_n; 1)` from the term-by-term sum.
    pub zprime_one: f64,
    pub hessian_quadratic: f64,
    pub hessian_constant: f64,
    /// Relative gap between `Z'(g_n; 1)` and `ln^2(g/2pi)/4 (-1)^n <1, grad g_n>`.
    pub gradient_identity_residual: f64,
}

/// Gradient, Gram-shift gradient and Hessian of `Delta_n` at the origin.
pub fn closed_forms(model: &CoefficientModel, n: u64) -> Result<ClosedFormReport> {
    let g = gram_point(model, n)?;
    let dim = model.robust_terms(g);
    let sec = Section::new(model, dim);
    let th = model.theta(g)?;
    let th1 = model.theta_main_deriv(g)?;
    let lh = 2.0 * th1;
    let sign = parity_sign(n as i64);
    let mut grad_delta = Vec::with_capacity(dim);
    let mut grad_gram = Vec::with_capacity(dim);
    let mut zp = crate::NeumaierSum::new();
    zp.add(-model.coefficient(1) * libm::sin(th) * th1);
    for k in 1..=dim {
        let l = sec.log(k);
        let w = sec.weight(k);
        let (s, c) = crate::sum::sincos_reduced(th - l * g);
        grad_delta.push(w * c);
        let b = -w * s * (th1 - l);
        zp.add(b);
        grad_gram.push(4.0 * sign * b / (lh * lh));
    }
    let zprime_one = zp.value();
    let other: crate::NeumaierSum = grad_gram.iter().copied().collect();
    let other = 0.25 * sign * lh * lh * other.value();
    let resid = libm::fabs(zprime_one - other) / libm::fabs(zprime_one).max(f64::MIN_POSITIVE);
    let q = zprime_one / lh;
    Ok(ClosedFormReport {
        n,
        g,
        dim,
        grad_delta,
        grad_gram,
        zprime_one,
        hessian_quadratic: HESSIAN_CONSTANT * sign * q * q,
        hessian_constant: HESSIAN_CONSTANT,
        gradient_identity_residual: resid,
    })
}

/// `Z(g_n; r) + H r^2 / 2`.
pub fn second_order_approx(model: &CoefficientModel, n: u64, r: f64) -> Result<f64> {
    let rep = closed_forms(model, n)?;
    Ok(first_order(model, &rep, r)? + 0.5 * rep.hessian_quadratic * r * r)
}

/// `Z(g_n; r)`, the section at the fixed height `g_n`.
pub fn first_order(model: &CoefficientModel, rep: &ClosedFormReport, r: f64) -> Result<f64> {
    let th = model.theta(rep.g)?;
    let lin: crate::NeumaierSum = rep.grad_delta.iter().copied().collect();
    Ok(model.coefficient(1) * libm::cos(th) + r * lin.value())
}

/// Linear-curve discriminant at `r = 1` for each `n` in `from..=to`.
pub fn linear_law_scan(model: &CoefficientModel, from: u64, to: u64, steps: usize) -> Result<Vec<(u64, Verdict, f64)>> {
    let mut out = Vec::new();
    for n in from..=to {
        let tr = Tracker::new(model, n)?;
        let trace = tr.trace(|r| move |_| r, 1.0, steps)?;
        out.push((n, trace.verdict, trace.last().delta));
    }
    Ok(out)
}
