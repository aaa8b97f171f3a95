//! Neighbour adjustments of the classical AFE and the Monte-Carlo baseline.
//!
//! With `L = ln(q g_n / 2 pi)` and phases `phi_k = 2 pi ln k / L`, the sums at
//! the neighbours `g_{n-1}, g_{n+1}` rescaled by
//! `alpha_c = 2 / cos(phi_k)` and `alpha_s = (L - 2 ln k) / sin(phi_k)`
//! recombine into `Z(g_n)` and `Z'(g_n)`. The recombination is exact for the
//! synthetic neighbours `g_n +- 2 pi / L`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gram::gram_point;
use crate::quad;
use crate::sum::sincos_reduced;
use crate::z_model::{self, parity_sign, CoefficientModel, Which};
use crate::{Error, NeumaierSum, Result};

/// `|cos phi|` or `|sin phi|` below this excludes a term.
pub const POLE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum NeighborMode {
    /// `g_n +- 2 pi / L`.
    #[default]
    Synthetic,
    /// The refined Gram points `g_{n-1}`, `g_{n+1}`.
    TrueGram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Side {
    Minus,
    Plus,
}

/// `phi_k = 2 pi ln k / L` for real `k`.
pub fn phase(log_height: f64, k: f64) -> f64 {
    2.0 * PI * libm::log(k) / log_height
}

/// `2 / cos(phi_k)`.
pub fn alpha_c(log_height: f64, k: f64) -> f64 {
    2.0 / libm::cos(phase(log_height, k))
}

/// `(L - 2 ln k) / sin(phi_k)`; infinite at `k = 1` and `L / pi` at the
/// removable point `ln k = L / 2`.
pub fn alpha_s(log_height: f64, k: f64) -> f64 {
    let u = libm::log(k) / log_height;
    if u == 0.0 {
        return f64::INFINITY;
    }
    let d = 0.5 - u;
    if libm::fabs(d) < 1e-7 {
        return log_height / PI * (1.0 + PI * PI * d * d * 2.0 / 3.0);
    }
    log_height * 2.0 * d / libm::sin(2.0 * PI * u)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AdjustmentReport {
    pub n: u64,
    pub g: f64,
    pub neighbor_mode: NeighborMode,
    /// `N(n)`.
    pub cutoff: usize,
    /// `L = ln(q g / 2 pi)`.
    pub log_height: f64,
    pub g_minus: f64,
    pub g_plus: f64,
    /// `phi_k`, `k = 1..=N(n)` stored from index 0.
    pub phases: Vec<f64>,
    pub alpha_c: Vec<f64>,
    pub alpha_s: Vec<f64>,
    pub zc_minus: f64,
    pub zc_plus: f64,
    pub zs_minus: f64,
    pub zs_plus: f64,
    /// Classical `Z(g_n)` and `Z'(g_n)`.
    pub z: f64,
    pub zprime: f64,
    /// `|Z - (Zc- + Zc+)/2|`.
    pub residual_z: f64,
    /// `|Z' - (Zs- - Zs+)/2|`.
    pub residual_zprime: f64,
    /// Indices left out of the cosine sums.
    pub excluded_c: Vec<usize>,
    /// Indices left out of the sine sums; always contains 1.
    pub excluded_s: Vec<usize>,
}

/// Evaluation point of a neighbour sum. Synthetic neighbours keep the
/// phase offset `+-phi_k` separate from `ln k g_n` so the recombination
/// identities hold to rounding.
#[derive(Clone, Copy)]
struct Neighbour {
    x: f64,
    synthetic: Option<(f64, f64)>,
}

fn neighbours(model: &CoefficientModel, n: u64, g: f64, mode: NeighborMode) -> Result<(Neighbour, Neighbour)> {
    match mode {
        NeighborMode::Synthetic => {
            let step = 2.0 * PI / model.log_height(g);
            Ok((
                Neighbour { x: g - step, synthetic: Some((g, -1.0)) },
                Neighbour { x: g + step, synthetic: Some((g, 1.0)) },
            ))
        }
        NeighborMode::TrueGram => {
            if n == 0 {
                return Err(Error::Domain { what: "adjustments", value: 0.0 });
            }
            Ok((
                Neighbour { x: gram_point(model, n - 1)?, synthetic: None },
                Neighbour { x: gram_point(model, n + 1)?, synthetic: None },
            ))
        }
    }
}

/// `(-1)^n c_k cos(ln k x) / sqrt k`.
fn unit_term(model: &CoefficientModel, sign: f64, lh: f64, k: usize, at: Neighbour) -> f64 {
    let kf = k as f64;
    let lk = libm::log(kf);
    let c = match at.synthetic {
        Some((g, side)) => {
            let (sy, cy) = sincos_reduced(lk * g);
            let (sp, cp) = libm::sincos(phase(lh, kf));
            cy * cp - side * sy * sp
        }
        None => sincos_reduced(lk * at.x).1,
    };
    sign * model.coefficient(k) * c / libm::sqrt(kf)
}

fn excluded(which: Which, phase: f64) -> bool {
    match which {
        Which::Z => libm::fabs(libm::cos(phase)) < POLE_TOL,
        Which::ZPrime => libm::fabs(libm::sin(phase)) < POLE_TOL,
    }
}

/// `sum_k alpha(k) (-1)^n c_k cos(ln k x)/sqrt k` over non-excluded `k` in
/// `lo..=hi`.
fn adjusted_sum(model: &CoefficientModel, sign: f64, lh: f64, at: Neighbour, lo: usize, hi: usize, which: Which) -> f64 {
    let mut s = NeumaierSum::new();
    for k in lo..=hi {
        let kf = k as f64;
        if excluded(which, phase(lh, kf)) {
            continue;
        }
        let a = match which {
            Which::Z => alpha_c(lh, kf),
            Which::ZPrime => alpha_s(lh, kf),
        };
        s.add(a * unit_term(model, sign, lh, k, at));
    }
    s.value()
}

/// Phases, alpha values, the four adjustment sums and the recombination
/// residuals at the `n`-th Gram point.
pub fn adjustments(model: &CoefficientModel, n: u64, mode: NeighborMode) -> Result<AdjustmentReport> {
    if n == 0 {
        return Err(Error::Domain { what: "adjustments", value: 0.0 });
    }
    let g = gram_point(model, n)?;
    let afe = z_model::classical_afe(model, g)?;
    let cutoff = afe.cutoff;
    let lh = model.log_height(g);
    let (gm, gp) = neighbours(model, n, g, mode)?;
    let sign = parity_sign(n as i64);
    let mut phases = Vec::with_capacity(cutoff);
    let mut ac = Vec::with_capacity(cutoff);
    let mut as_ = Vec::with_capacity(cutoff);
    let mut excluded_c = Vec::new();
    let mut excluded_s = Vec::new();
    for k in 1..=cutoff {
        let kf = k as f64;
        let p = phase(lh, kf);
        phases.push(p);
        ac.push(alpha_c(lh, kf));
        as_.push(alpha_s(lh, kf));
        if excluded(Which::Z, p) {
            excluded_c.push(k);
        }
        if excluded(Which::ZPrime, p) {
            excluded_s.push(k);
        }
    }
    let zc_minus = adjusted_sum(model, sign, lh, gm, 1, cutoff, Which::Z);
    let zc_plus = adjusted_sum(model, sign, lh, gp, 1, cutoff, Which::Z);
    let zs_minus = adjusted_sum(model, sign, lh, gm, 1, cutoff, Which::ZPrime);
    let zs_plus = adjusted_sum(model, sign, lh, gp, 1, cutoff, Which::ZPrime);
    Ok(AdjustmentReport {
        n,
        g,
        neighbor_mode: mode,
        cutoff,
        log_height: lh,
        g_minus: gm.x,
        g_plus: gp.x,
        phases,
        alpha_c: ac,
        alpha_s: as_,
        zc_minus,
        zc_plus,
        zs_minus,
        zs_plus,
        z: afe.z,
        zprime: afe.zprime,
        residual_z: libm::fabs(afe.z - 0.5 * (zc_minus + zc_plus)),
        residual_zprime: libm::fabs(afe.zprime - 0.5 * (zs_minus - zs_plus)),
        excluded_c,
        excluded_s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AlphaAverage {
    pub value: f64,
    /// The interval straddles the `alpha_c` pole and a principal value was taken.
    pub principal_value: bool,
}

fn alpha_mean(lh: f64, a: f64, b: f64, which: Which) -> Result<AlphaAverage> {
    if !(a < b) {
        return Err(Error::InvalidInput("alpha average needs a < b"));
    }
    match which {
        Which::Z => {
            let pole = libm::exp(lh / 4.0);
            let f = |k: f64| alpha_c(lh, k);
            let near = |k: f64| libm::fabs(libm::cos(phase(lh, k))) < POLE_TOL;
            if near(a) && near(b) {
                return Err(Error::Domain { what: "alpha average inside pole zone", value: a });
            }
            let tol = 1e-10 * (b - a);
            if a < pole && pole < b {
                let v = quad::principal_value(f, a, b, pole, tol);
                Ok(AlphaAverage { value: v / (b - a), principal_value: true })
            } else {
                Ok(AlphaAverage { value: quad::integrate(f, a, b, tol) / (b - a), principal_value: false })
            }
        }
        Which::ZPrime => {
            if a <= 1.0 {
                return Err(Error::Domain { what: "alpha_s average diverges at k = 1", value: a });
            }
            let v = quad::integrate(|k| alpha_s(lh, k), a, b, 1e-10 * (b - a));
            Ok(AlphaAverage { value: v / (b - a), principal_value: false })
        }
    }
}

/// Mean of `alpha_c` (`Which::Z`) or `alpha_s` (`Which::ZPrime`) over the
/// real interval `[a, b]`.
pub fn alpha_average(model: &CoefficientModel, n: u64, a: f64, b: f64, which: Which) -> Result<AlphaAverage> {
    let g = gram_point(model, n)?;
    let cutoff = model.classical_terms(g) as f64;
    if a < 1.0 || b > cutoff {
        return Err(Error::IndexRange { lo: a as usize, hi: b as usize, max: cutoff as usize });
    }
    alpha_mean(model.log_height(g), a, b, which)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PartitionApprox {
    pub approx: f64,
    pub exact: f64,
    pub rel_err: f64,
}

/// Roughly equal-width partition of `1..=cutoff` into `segments` pieces.
pub fn uniform_partition(cutoff: usize, segments: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..=segments)
        .map(|j| 1 + libm::round((cutoff - 1) as f64 * j as f64 / segments as f64) as usize)
        .collect();
    p.dedup();
    p
}

/// Partition of `1..=cutoff` with break points `cutoff^(j / segments)`.
pub fn geometric_partition(cutoff: usize, segments: usize) -> Vec<usize> {
    let nf = cutoff as f64;
    let mut p: Vec<usize> = (0..=segments)
        .map(|j| (libm::round(libm::pow(nf, j as f64 / segments as f64)) as usize).clamp(1, cutoff))
        .collect();
    p.dedup();
    p
}

/// Piecewise-constant approximation of an adjustment sum. Segment `j` holds
/// the integers in `[p_j, p_{j+1})`, the last one also `p_last`; its weight
/// is the mean of alpha over `[p_j, p_{j+1}]`. For the sine sums `k = 1`
/// carries no weight and is left out of both sides.
pub fn partition_approx(
    model: &CoefficientModel,
    n: u64,
    partition: &[usize],
    which: Which,
    side: Side,
    mode: NeighborMode,
) -> Result<PartitionApprox> {
    if n == 0 {
        return Err(Error::Domain { what: "partition_approx", value: 0.0 });
    }
    let g = gram_point(model, n)?;
    let cutoff = model.classical_terms(g);
    if partition.len() < 2 || partition[0] != 1 || partition[partition.len() - 1] != cutoff {
        return Err(Error::InvalidPartition("must start at 1 and end at N(n)"));
    }
    if partition.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidPartition("must be strictly increasing"));
    }
    let lh = model.log_height(g);
    let (gm, gp) = neighbours(model, n, g, mode)?;
    let x = match side {
        Side::Minus => gm,
        Side::Plus => gp,
    };
    let sign = parity_sign(n as i64);
    let exact = adjusted_sum(model, sign, lh, x, 1, cutoff, which);
    let mut approx = NeumaierSum::new();
    let segs = partition.len() - 1;
    for j in 0..segs {
        let (lo, hi_edge) = (partition[j], partition[j + 1]);
        let hi = if j + 1 == segs { hi_edge } else { hi_edge - 1 };
        let lo_k = if which == Which::ZPrime { lo.max(2) } else { lo };
        if lo_k > hi {
            continue;
        }
        let a = if which == Which::ZPrime { (lo as f64).max(2.0) } else { lo as f64 };
        let b = hi_edge as f64;
        let avg = if a < b {
            alpha_mean(lh, a, b, which)?.value
        } else {
            match which {
                Which::Z => alpha_c(lh, a),
                Which::ZPrime => alpha_s(lh, a),
            }
        };
        let mut u = NeumaierSum::new();
        for k in lo_k..=hi {
            if !excluded(which, phase(lh, k as f64)) {
                u.add(unit_term(model, sign, lh, k, x));
            }
        }
        approx.add(avg * u.value());
    }
    let approx = approx.value();
    Ok(PartitionApprox { approx, exact, rel_err: libm::fabs(approx - exact) / libm::fabs(exact) })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StageReport {
    pub n: u64,
    pub g: f64,
    pub cutoff: usize,
    /// `(q g / 2 pi)^(1/4)`.
    pub quarter: f64,
    /// Last index of the initial range, `ceil(quarter)`.
    pub surge_end: usize,
    /// Middle window `[floor(quarter/2), floor(2 quarter)]`.
    pub middle: (usize, usize),
    pub partial_z: Vec<f64>,
    pub partial_zprime: Vec<f64>,
    /// Net change of the `Z'` partial sums over `1..=surge_end`.
    pub surge_change: f64,
    /// Largest `|S'_k|` over `1..=surge_end`.
    pub surge_max_abs: f64,
    /// Net change of the `Z'` partial sums after `surge_end`.
    pub rest_change: f64,
    /// Net change of the `Z'` partial sums over `[0.9 N, N]`.
    pub final_change: f64,
    /// Per-term `Z'` terms in the middle window, from the neighbour identity.
    pub middle_terms: Vec<f64>,
    /// The middle-window approximation `(-1)^n alpha_s cos(ln k g_{n-1}) / sqrt k`.
    pub middle_approx: Vec<f64>,
    /// Relative RMS gap between the two.
    pub middle_rms_rel: f64,
}

/// Partial sums split into the initial, middle and final ranges.
pub fn stage_analysis(model: &CoefficientModel, n: u64) -> Result<StageReport> {
    if n == 0 {
        return Err(Error::Domain { what: "stage_analysis", value: 0.0 });
    }
    let g = gram_point(model, n)?;
    let partial_z = z_model::partial_sums(model, g, Which::Z)?;
    let partial_zprime = z_model::partial_sums(model, g, Which::ZPrime)?;
    let cutoff = partial_z.len();
    let lh = model.log_height(g);
    let quarter = libm::exp(lh / 4.0);
    let surge_end = (libm::ceil(quarter) as usize).clamp(1, cutoff);
    let middle = (((0.5 * quarter) as usize).max(1), ((2.0 * quarter) as usize).min(cutoff));
    let s = |k: usize| if k == 0 { 0.0 } else { partial_zprime[k - 1] };
    let surge_change = s(surge_end);
    let surge_max_abs = partial_zprime[..surge_end].iter().fold(0.0f64, |m, v| m.max(libm::fabs(*v)));
    let rest_change = s(cutoff) - s(surge_end);
    let k90 = (libm::ceil(0.9 * cutoff as f64) as usize).max(1);
    let final_change = s(cutoff) - s(k90 - 1);
    let sign = parity_sign(n as i64);
    let gm = g - 2.0 * PI / lh;
    let mut middle_terms = Vec::new();
    let mut middle_approx = Vec::new();
    let (mut num, mut den) = (NeumaierSum::new(), NeumaierSum::new());
    for k in middle.0..=middle.1 {
        let kf = k as f64;
        let lk = libm::log(kf);
        let a = alpha_s(lh, kf);
        let w = sign * model.coefficient(k) * a / libm::sqrt(kf);
        let y = lk * gm;
        let exact = 0.5 * w * (libm::cos(y) - libm::cos(y + 2.0 * phase(lh, kf)));
        let approx = w * libm::cos(y);
        num.add((exact - approx) * (exact - approx));
        den.add(exact * exact);
        middle_terms.push(exact);
        middle_approx.push(approx);
    }
    Ok(StageReport {
        n,
        g,
        cutoff,
        quarter,
        surge_end,
        middle,
        surge_change,
        surge_max_abs,
        rest_change,
        final_change,
        middle_rms_rel: libm::sqrt(num.value() / den.value()),
        partial_z,
        partial_zprime,
        middle_terms,
        middle_approx,
    })
}

/// Default Monte-Carlo trial count.
pub const DEFAULT_TRIALS: usize = 1000;
/// Default Monte-Carlo seed.
pub const DEFAULT_SEED: u64 = 42;

/// Uniform `[0, 1)` from the top 53 bits.
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// `c_k cos(theta_k)/sqrt k`, `k = 1..=cutoff`, with independent uniform
/// phases from the generator seeded by `seed + trial`.
pub fn random_terms(model: &CoefficientModel, cutoff: usize, seed: u64, trial: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial));
    (1..=cutoff)
        .map(|k| {
            let th = 2.0 * PI * unit(&mut rng);
            model.coefficient(k) * libm::cos(th) / libm::sqrt(k as f64)
        })
        .collect()
}

/// One sorted Monte-Carlo draw.
pub fn mc_trial(model: &CoefficientModel, cutoff: usize, seed: u64, trial: u64) -> Vec<f64> {
    let mut v = random_terms(model, cutoff, seed, trial);
    v.sort_by(f64::total_cmp);
    v
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GramVectors {
    pub n: u64,
    pub g: f64,
    pub trials: usize,
    pub seed: u64,
    /// `c_k cos(ln k g_n)/sqrt k`, `k = 1..=N(n)`.
    pub raw: Vec<f64>,
    pub sorted: Vec<f64>,
    /// Per-rank mean of sorted random draws.
    pub baseline: Vec<f64>,
    pub essential: Vec<f64>,
    /// Standard error of the mean of the per-trial totals.
    pub baseline_sum_se: f64,
}

fn total(v: &[f64]) -> f64 {
    v.iter().copied().collect::<NeumaierSum>().value()
}

impl GramVectors {
    pub fn raw_sum(&self) -> f64 {
        total(&self.raw)
    }
    pub fn sorted_sum(&self) -> f64 {
        total(&self.sorted)
    }
    pub fn baseline_sum(&self) -> f64 {
        total(&self.baseline)
    }
    pub fn essential_sum(&self) -> f64 {
        total(&self.essential)
    }

    /// Assemble from sorted draws given in trial order.
    pub fn assemble<I>(model: &CoefficientModel, n: u64, seed: u64, draws: I) -> Result<Self>
    where
        I: IntoIterator<Item = Vec<f64>>,
    {
        let g = gram_point(model, n)?;
        let cutoff = model.classical_terms(g);
        let raw: Vec<f64> = (1..=cutoff).map(|k| unit_term(model, 1.0, 0.0, k, Neighbour { x: g, synthetic: None })).collect();
        let mut sorted = raw.clone();
        sorted.sort_by(f64::total_cmp);
        let mut acc = alloc::vec![NeumaierSum::new(); cutoff];
        let mut sums = Vec::new();
        for d in draws {
            if d.len() != cutoff {
                return Err(Error::DimensionMismatch { expected: cutoff, found: d.len() });
            }
            for (a, x) in acc.iter_mut().zip(&d) {
                a.add(*x);
            }
            sums.push(total(&d));
        }
        let trials = sums.len();
        if trials < 2 {
            return Err(Error::InvalidInput("need at least two trials"));
        }
        let tf = trials as f64;
        let baseline: Vec<f64> = acc.iter().map(|a| a.value() / tf).collect();
        let mean = sums.iter().copied().collect::<NeumaierSum>().value() / tf;
        let var = sums.iter().map(|s| (s - mean) * (s - mean)).collect::<NeumaierSum>().value() / (tf - 1.0);
        let essential = sorted.iter().zip(&baseline).map(|(s, b)| s - b).collect();
        Ok(GramVectors {
            n,
            g,
            trials,
            seed,
            raw,
            sorted,
            baseline,
            essential,
            baseline_sum_se: libm::sqrt(var / tf),
        })
    }
}

/// Raw, sorted, baseline and essential Gram vectors at `n`.
pub fn gram_vectors(model: &CoefficientModel, n: u64, trials: usize, seed: u64) -> Result<GramVectors> {
    if trials < 100 {
        return Err(Error::InvalidInput("at least 100 trials"));
    }
    let g = gram_point(model, n)?;
    let cutoff = model.classical_terms(g);
    GramVectors::assemble(model, n, seed, (0..trials as u64).map(|t| mc_trial(model, cutoff, seed, t)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_s_limit_is_smooth() {
        let lh = 12.0;
        let kc = libm::exp(lh / 2.0);
        let v0 = alpha_s(lh, kc);
        assert!((v0 - lh / PI).abs() < 1e-12);
        let v1 = alpha_s(lh, kc * (1.0 + 1e-6));
        assert!((v1 - v0).abs() < 1e-6);
        assert!(alpha_s(lh, 1.0).is_infinite());
    }

    #[test]
    fn partitions_cover_range() {
        for p in [uniform_partition(883, 64), geometric_partition(883, 64)] {
            assert_eq!(p[0], 1);
            assert_eq!(*p.last().unwrap(), 883);
            assert!(p.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
