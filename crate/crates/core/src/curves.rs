//! Curves in parameter space and the two-stage corrected curve.
//!
//! The corrected curve splits the indices into a shift set `I` and the rest.
//! Coordinates in `I` follow `r1`, the others `r2`. The shifting stage raises
//! `r1` from 0 to 1 while `r2` keeps `(-1)^n Delta_n = 1`; the descending
//! stage then runs straight to `(1, 1)`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::discriminant::{DiscriminantTrace, Tracker, Verdict, DEFAULT_STEPS, MIN_STEP};
use crate::gram::gram_point;
use crate::z_model::{CoefficientModel, ParamPoint};
use crate::{Error, Result};

/// Default shift threshold on `B_k`.
pub const DEFAULT_TAU: f64 = 1.5;

/// Tolerance on `(-1)^n Delta_n - 1` along the shifting stage.
pub const LEVEL_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub enum CurveKind {
    /// `gamma(r) = r (1, ..., 1)`.
    Linear,
    /// Polyline in `(r1, r2)`, vertices at equal parameter spacing; index `k`
    /// takes `r1` when `shift[k - 1]`, else `r2`.
    TwoParam { path: Vec<(f64, f64)>, shift: Vec<bool> },
    /// Polyline through explicit points, vertices at equal parameter spacing.
    Sampled(Vec<ParamPoint>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamCurve {
    pub kind: CurveKind,
    dim: usize,
}

fn polyline<T: Copy>(len: usize, r: f64, at: impl Fn(usize) -> T) -> (T, T, f64) {
    if len == 1 {
        return (at(0), at(0), 0.0);
    }
    let s = r.clamp(0.0, 1.0) * (len - 1) as f64;
    let j = (libm::floor(s) as usize).min(len - 2);
    (at(j), at(j + 1), s - j as f64)
}

impl ParamCurve {
    pub fn linear(dim: usize) -> Self {
        ParamCurve { kind: CurveKind::Linear, dim }
    }

    /// Two-parameter curve; `shift_set` holds 1-based indices.
    pub fn two_param(dim: usize, path: Vec<(f64, f64)>, shift_set: &[usize]) -> Result<Self> {
        if path.is_empty() {
            return Err(Error::InvalidInput("empty path"));
        }
        Ok(ParamCurve { kind: CurveKind::TwoParam { path, shift: shift_mask(dim, shift_set)? }, dim })
    }

    pub fn sampled(points: Vec<ParamPoint>) -> Result<Self> {
        let dim = points.first().ok_or(Error::InvalidInput("empty curve"))?.dim();
        if points.iter().any(|p| p.dim() != dim) {
            return Err(Error::InvalidInput("sampled points differ in dimension"));
        }
        Ok(ParamCurve { kind: CurveKind::Sampled(points), dim })
    }

    /// Straight segment from the origin to `scale * e_k`.
    pub fn axis(dim: usize, k: usize, scale: f64) -> Result<Self> {
        if k == 0 || k > dim {
            return Err(Error::IndexRange { lo: k, hi: k, max: dim });
        }
        let mut end = ParamPoint::zeros(dim);
        end.0[k - 1] = scale;
        Self::sampled(alloc::vec![ParamPoint::zeros(dim), end])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(r1, r2)` of a two-parameter curve.
    pub fn split_at(&self, r: f64) -> Option<(f64, f64)> {
        match &self.kind {
            CurveKind::TwoParam { path, .. } => {
                let (a, b, f) = polyline(path.len(), r, |i| path[i]);
                Some((a.0 + f * (b.0 - a.0), a.1 + f * (b.1 - a.1)))
            }
            _ => None,
        }
    }

    /// Coordinate `a_k` of `gamma(r)`, `k` 1-based.
    pub fn coord(&self, r: f64, k: usize) -> f64 {
        match &self.kind {
            CurveKind::Linear => r,
            CurveKind::TwoParam { shift, .. } => {
                let (r1, r2) = self.split_at(r).unwrap_or((r, r));
                if shift[k - 1] {
                    r1
                } else {
                    r2
                }
            }
            CurveKind::Sampled(points) => {
                let (a, b, f) = polyline(points.len(), r, |i| &points[i]);
                let (x, y) = (a.0[k - 1], b.0[k - 1]);
                x + f * (y - x)
            }
        }
    }

    pub fn point(&self, r: f64) -> ParamPoint {
        ParamPoint((1..=self.dim).map(|k| self.coord(r, k)).collect())
    }

    /// `gamma(0) = 0` and `gamma(1) = 1` exactly.
    pub fn connects_origin_to_one(&self) -> bool {
        (1..=self.dim).all(|k| self.coord(0.0, k) == 0.0 && self.coord(1.0, k) == 1.0)
    }
}

fn shift_mask(dim: usize, shift_set: &[usize]) -> Result<Vec<bool>> {
    let mut mask = alloc::vec![false; dim];
    for &k in shift_set {
        if k == 0 || k > dim {
            return Err(Error::IndexRange { lo: k, hi: k, max: dim });
        }
        mask[k - 1] = true;
    }
    Ok(mask)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TermRow {
    pub k: usize,
    /// `cos(theta(g_n) - ln(k+1) g_n)`.
    pub cos_term: f64,
    /// `sin(ln(k+1) g_n - theta(g_n))`.
    pub sin_term: f64,
    /// `c_{k+1} cos_term / sqrt(k+1)`: the term's contribution to `Delta`.
    pub a: f64,
    /// `c_{k+1} ln(q g_n / (2 pi (k+1)^2)) sin_term / sqrt(k+1)`: twice its
    /// t-slope at `g_n`.
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TermTable {
    pub n: u64,
    pub g: f64,
    pub rows: Vec<TermRow>,
}

/// Per-term value and slope at `g_n` for `k = 1..=k_max`.
pub fn term_table(model: &CoefficientModel, n: u64, k_max: usize) -> Result<TermTable> {
    let g = gram_point(model, n)?;
    let dim = model.robust_terms(g);
    if k_max > dim {
        return Err(Error::IndexRange { lo: 1, hi: k_max, max: dim });
    }
    let th = model.theta(g)?;
    let lh = model.log_height(g);
    let rows = (1..=k_max)
        .map(|k| {
            let m = (k + 1) as f64;
            let w = model.coefficient(k + 1) / libm::sqrt(m);
            let (s, c) = crate::sum::sincos_reduced(th - libm::log(m) * g);
            let sin_term = -s;
            TermRow { k, cos_term: c, sin_term, a: w * c, b: w * (lh - 2.0 * libm::log(m)) * sin_term }
        })
        .collect();
    Ok(TermTable { n, g, rows })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShiftSelection {
    pub tau: f64,
    pub indices: Vec<usize>,
}

impl ShiftSelection {
    /// An empty selection makes the shifting stage the identity.
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// `{k : B_k >= tau}` over the rows of `table`.
pub fn select_from_table(table: &TermTable, tau: f64) -> ShiftSelection {
    ShiftSelection { tau, indices: table.rows.iter().filter(|r| r.b >= tau).map(|r| r.k).collect() }
}

/// Default search window: `max(15, floor(sqrt(N(n))))`, capped by the section length.
pub fn default_window(model: &CoefficientModel, g: f64) -> usize {
    let w = libm::floor(libm::sqrt(model.classical_terms(g) as f64)) as usize;
    w.max(15).min(model.robust_terms(g))
}

/// Shift indices for the `n`-th Gram point.
pub fn select_shift_indices(model: &CoefficientModel, n: u64, tau: f64, k_max: Option<usize>) -> Result<ShiftSelection> {
    let k_max = match k_max {
        Some(k) => k,
        None => default_window(model, gram_point(model, n)?),
    };
    Ok(select_from_table(&term_table(model, n, k_max)?, tau))
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StageSample {
    pub r1: f64,
    pub r2: f64,
    pub g: f64,
    pub delta: f64,
    pub ztt: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ShiftingStage {
    pub n: u64,
    pub shift_set: Vec<usize>,
    pub samples: Vec<StageSample>,
    /// Last valid `r1` when the corrector failed before `r1 = 1`.
    pub truncated_at: Option<f64>,
}

impl ShiftingStage {
    pub fn path(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.r1, s.r2)).collect()
    }

    pub fn end(&self) -> &StageSample {
        &self.samples[self.samples.len() - 1]
    }

    /// Linear interpolation of `r2` at `r1` along the path.
    pub fn r2_at(&self, r1: f64) -> Option<f64> {
        self.samples.windows(2).find(|w| w[0].r1 <= r1 && r1 <= w[1].r1).map(|w| {
            let f = if w[1].r1 > w[0].r1 { (r1 - w[0].r1) / (w[1].r1 - w[0].r1) } else { 0.0 };
            w[0].r2 + f * (w[1].r2 - w[0].r2)
        })
    }
}

struct Split<'m> {
    tracker: Tracker<'m>,
    mask: Vec<bool>,
}

impl<'m> Split<'m> {
    fn new(model: &'m CoefficientModel, n: u64, shift_set: &[usize]) -> Result<Self> {
        let tracker = Tracker::new(model, n)?;
        let mask = shift_mask(tracker.dim(), shift_set)?;
        Ok(Split { tracker, mask })
    }

    fn solve(&self, t0: f64, r1: f64, r2: f64, max_iter: usize) -> Option<(f64, crate::z_model::Jet, usize)> {
        let mask = &self.mask;
        self.tracker.solve(t0, max_iter, |k| if mask[k - 1] { r1 } else { r2 })
    }

    /// Joint Newton in `(t, r2)` on `Z'(t; r1, r2) = 0` and
    /// `(-1)^n Z(t; r1, r2) = 1`. At a solution `d Delta / d r2` is the
    /// unit-weight sum over the indices outside the shift set.
    fn level(&self, r1: f64, r2_seed: f64, t_seed: f64, prev: &StageSample) -> Option<StageSample> {
        let tr = &self.tracker;
        let mask = &self.mask;
        let (mut t, mut r2) = (t_seed, r2_seed);
        for _ in 0..8 {
            let [core, a, b] = tr.section.split_jets(t, tr.mode, |k| mask[k - 1]).ok()?;
            let j = core + r1 * a + r2 * b;
            let f1 = j.dz;
            let f2 = tr.sign * j.z - 1.0;
            let (j11, j12) = (j.d2z, b.dz);
            let (j21, j22) = (tr.sign * j.dz, tr.sign * b.z);
            let det = j11 * j22 - j12 * j21;
            if det == 0.0 || !det.is_finite() {
                return None;
            }
            let dt = (f1 * j22 - f2 * j12) / det;
            let dr = (f2 * j11 - f1 * j21) / det;
            if libm::fabs(dt) <= 1e-12 * t && libm::fabs(dr) <= 1e-9 {
                let ok = libm::fabs(t - prev.g) <= 0.5 * tr.gap
                    && (j.d2z > 0.0) == (prev.ztt > 0.0)
                    && libm::fabs(j.d2z) >= tr.degenerate
                    && (-1e-12..=1.0).contains(&r2)
                    && libm::fabs(f2) <= LEVEL_TOL;
                return ok.then_some(StageSample { r1, r2, g: t, delta: j.z, ztt: j.d2z });
            }
            t -= dt;
            r2 -= dr;
            if !(t.is_finite() && r2.is_finite()) || libm::fabs(t - prev.g) > tr.gap {
                return None;
            }
        }
        None
    }
}

/// Level-curve stage from `(0, 0)` to `r1 = 1`.
pub fn shifting_stage(model: &CoefficientModel, n: u64, shift_set: &[usize], steps: usize) -> Result<ShiftingStage> {
    if shift_set.is_empty() {
        return Err(Error::InvalidInput("shift set is empty"));
    }
    if steps == 0 {
        return Err(Error::InvalidInput("steps must be positive"));
    }
    let sp = Split::new(model, n, shift_set)?;
    let (t0, j0, _) = sp
        .solve(sp.tracker.g_n, 0.0, 0.0, 50)
        .ok_or(Error::NonConvergence { what: "extremum at origin", iterates: alloc::vec![sp.tracker.g_n] })?;
    let mut samples = alloc::vec![StageSample { r1: 0.0, r2: 0.0, g: t0, delta: j0.z, ztt: j0.d2z }];
    let base = 1.0 / steps as f64;
    let mut h = base;
    let mut truncated_at = None;
    while samples[samples.len() - 1].r1 < 1.0 {
        let cur = samples[samples.len() - 1];
        let r1 = (cur.r1 + h).min(1.0);
        let (r2p, tp) = match samples.len() {
            1 => (cur.r2, cur.g),
            len => {
                let p = samples[len - 2];
                let f = (r1 - cur.r1) / (cur.r1 - p.r1);
                ((cur.r2 + f * (cur.r2 - p.r2)).max(0.0), cur.g + f * (cur.g - p.g))
            }
        };
        match sp.level(r1, r2p, tp, &cur) {
            Some(s) => {
                samples.push(s);
                h = (2.0 * h).min(base);
            }
            None => {
                h *= 0.5;
                if h < MIN_STEP {
                    truncated_at = Some(cur.r1);
                    break;
                }
            }
        }
    }
    Ok(ShiftingStage { n, shift_set: shift_set.to_vec(), samples, truncated_at })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DescendingStage {
    pub start: (f64, f64),
    /// Trace in the segment parameter `s`, point `(1-s) start + s (1, 1)`.
    pub trace: DiscriminantTrace,
    /// `(-1)^n Delta > 0` on every sample and no collision.
    pub energy_holds: bool,
}

impl DescendingStage {
    pub fn point(&self, s: f64) -> (f64, f64) {
        let (a, b) = self.start;
        (a + s * (1.0 - a), b + s * (1.0 - b))
    }
}

/// Straight segment from `start` to `(1, 1)`, extremum sought from `t_start`
/// (the Gram point when `None`).
pub fn descending_stage(
    model: &CoefficientModel,
    n: u64,
    shift_set: &[usize],
    start: (f64, f64),
    t_start: Option<f64>,
    steps: usize,
) -> Result<DescendingStage> {
    let sp = Split::new(model, n, shift_set)?;
    let (a, b) = start;
    let mask = &sp.mask;
    let point = |s: f64| {
        let r1 = a + s * (1.0 - a);
        let r2 = b + s * (1.0 - b);
        move |k: usize| if mask[k - 1] { r1 } else { r2 }
    };
    let t0 = t_start.unwrap_or(sp.tracker.g_n);
    let r_end = if start == (1.0, 1.0) { 0.0 } else { 1.0 };
    let trace = sp.tracker.trace_from(t0, point, r_end, steps)?;
    let energy_holds = trace.verdict == Verdict::NonColliding && trace.min_signed_delta() > 0.0;
    Ok(DescendingStage { start, trace, energy_holds })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Stage {
    Shifting,
    Descending,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CompositeSample {
    pub stage: Stage,
    pub r1: f64,
    pub r2: f64,
    pub g: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CurveVerdict {
    /// `(-1)^n Delta > 0` along the whole composite curve.
    Holds,
    /// Sign change on the descending segment at this segment parameter.
    Violated(f64),
    Undetermined(String),
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorrectedCurveReport {
    pub n: u64,
    pub g_n: f64,
    pub selection: ShiftSelection,
    pub shifting: Option<ShiftingStage>,
    pub descending: Option<DescendingStage>,
    pub composite: Vec<CompositeSample>,
    pub verdict: CurveVerdict,
    /// `Delta_n(1, ..., 1)` reached along the composite curve.
    pub endpoint_delta: Option<f64>,
}

impl CorrectedCurveReport {
    /// The composite as a two-parameter curve through its sampled vertices.
    pub fn curve(&self, dim: usize) -> Result<ParamCurve> {
        let path: Vec<(f64, f64)> = self.composite.iter().map(|s| (s.r1, s.r2)).collect();
        ParamCurve::two_param(dim, path, &self.selection.indices)
    }
}

/// Shift selection, then shifting and descending stages.
pub fn corrected_curve(
    model: &CoefficientModel,
    n: u64,
    tau: f64,
    k_max: Option<usize>,
    steps: usize,
) -> Result<CorrectedCurveReport> {
    let g_n = gram_point(model, n)?;
    let selection = select_shift_indices(model, n, tau, k_max)?;
    let mut composite = Vec::new();
    let (shifting, start, t_start) = if selection.is_empty() {
        (None, (1.0, 0.0), None)
    } else {
        let st = shifting_stage(model, n, &selection.indices, steps)?;
        composite.extend(st.samples.iter().map(|s| CompositeSample {
            stage: Stage::Shifting,
            r1: s.r1,
            r2: s.r2,
            g: s.g,
            delta: s.delta,
        }));
        if let Some(r1) = st.truncated_at {
            let why = alloc::format!("shifting stage truncated at r1 = {r1}");
            return Ok(CorrectedCurveReport {
                n,
                g_n,
                selection,
                shifting: Some(st),
                descending: None,
                composite,
                verdict: CurveVerdict::Undetermined(why),
                endpoint_delta: None,
            });
        }
        let e = *st.end();
        (Some(st), (e.r1, e.r2), Some(e.g))
    };
    let desc = descending_stage(model, n, &selection.indices, start, t_start, steps)?;
    composite.extend(desc.trace.samples.iter().map(|s| {
        let (r1, r2) = desc.point(s.r);
        CompositeSample { stage: Stage::Descending, r1, r2, g: s.g, delta: s.delta }
    }));
    let sign = crate::z_model::parity_sign(n as i64);
    let shift_ok = composite.iter().all(|c| sign * c.delta > 0.0);
    let verdict = match desc.trace.verdict {
        Verdict::ContinuationLost(r) => CurveVerdict::Undetermined(alloc::format!("descending continuation lost at s = {r}")),
        Verdict::CollisionAt(r) => CurveVerdict::Violated(r),
        Verdict::NonColliding if shift_ok && desc.energy_holds => CurveVerdict::Holds,
        Verdict::NonColliding => CurveVerdict::Undetermined("sign check failed without a located collision".into()),
    };
    let endpoint_delta = match desc.trace.verdict {
        Verdict::ContinuationLost(_) => None,
        _ => Some(desc.trace.last().delta),
    };
    Ok(CorrectedCurveReport {
        n,
        g_n,
        selection,
        shifting,
        descending: Some(desc),
        composite,
        verdict,
        endpoint_delta,
    })
}

/// Default step count for corrected curves.
pub const CORRECTED_STEPS: usize = DEFAULT_STEPS;

