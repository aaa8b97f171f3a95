//! Gram points, core zeros and Gram's law.
//!
//! Seeds come from the Lambert-W closed forms of the core `cos(theta(t))`;
//! Newton on the phase refines them. Sign classification uses the robust
//! section `Z_N(g; 1)`, falling back to the classical AFE when that value is
//! too close to zero. Both values are kept in the record.

use alloc::vec::Vec;
use core::f64::consts::{E, PI};

use crate::special_fn::{self, lambert_w0, ThetaKind};
use crate::z_model::{self, parity_sign, ClassicalAfe, CoefficientModel, DerivMode, Section};
use crate::{Error, Result};

/// `|Z|` below this is not trusted for a sign.
pub const SIGN_TOL: f64 = 1e-4;

/// Default viscosity bound of the repulsion conjecture.
pub const CORRUPT_BOUND: f64 = 4.0;

/// Newton on `theta(t) = target` from `seed`.
fn refine_phase(model: &CoefficientModel, seed: f64, target: f64) -> Result<f64> {
    let mut t = seed;
    let mut hist = alloc::vec![seed];
    for _ in 0..50 {
        let f = model.theta(t)? - target;
        let d = special_fn::theta_deriv(model.theta_kind, t, 1)?;
        let step = f / d;
        t -= step;
        hist.push(t);
        if libm::fabs(step) <= 1e-14 * t {
            let f = model.theta(t)? - target;
            if libm::fabs(f) <= 1e-9 * libm::fabs(target).max(1.0) {
                return Ok(t);
            }
        }
    }
    Err(Error::NonConvergence { what: "phase refinement", iterates: hist })
}

/// Lambert-W seed of the `n`-th Gram point.
pub fn gram_seed(model: &CoefficientModel, n: u64) -> Result<f64> {
    let nf = n as f64;
    match model.theta_kind {
        ThetaKind::RiemannSiegel => {
            let m = 8.0 * nf + 1.0;
            Ok(m * PI / (4.0 * lambert_w0(m / (8.0 * E))?))
        }
        ThetaKind::DavenportHeilbronn => {
            if n == 0 {
                return Err(Error::Domain { what: "gram_point", value: 0.0 });
            }
            let m = nf - 0.125;
            Ok(2.0 * PI * m / lambert_w0(5.0 * m / E)?)
        }
    }
}

/// The `n`-th Gram point, `theta(g_n) = pi n`.
pub fn gram_point(model: &CoefficientModel, n: u64) -> Result<f64> {
    refine_phase(model, gram_seed(model, n)?, PI * n as f64)
}

/// Lambert-W closed form of the `n`-th core zero.
pub fn core_zero_seed(model: &CoefficientModel, n: u64) -> Result<f64> {
    let nf = n as f64;
    match model.theta_kind {
        ThetaKind::RiemannSiegel => {
            let m = 8.0 * nf - 11.0;
            Ok(m * PI / (4.0 * lambert_w0(m / (8.0 * E))?))
        }
        ThetaKind::DavenportHeilbronn => {
            let m = nf - 0.625;
            Ok(2.0 * PI * m / lambert_w0(5.0 * m / E)?)
        }
    }
}

/// Phase value at the `n`-th core zero.
pub fn core_zero_phase(model: &CoefficientModel, n: u64) -> f64 {
    match model.theta_kind {
        ThetaKind::RiemannSiegel => PI * (n as f64 - 1.5),
        ThetaKind::DavenportHeilbronn => PI * (n as f64 - 0.5),
    }
}

/// The `n`-th core zero, indexed as in the closed form: for the Riemann
/// model `theta = pi (n - 3/2)`, for DH `theta = pi (n - 1/2)`.
pub fn core_zero(model: &CoefficientModel, n: u64) -> Result<f64> {
    refine_phase(model, core_zero_seed(model, n)?, core_zero_phase(model, n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum GramKind {
    Good,
    Bad,
    /// Neither AFE gave a trustworthy sign.
    Indeterminate,
}

/// Which sum supplied `z_value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum AfeSource {
    Robust,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GramRecord {
    pub n: u64,
    pub t: f64,
    pub z_value: f64,
    pub zprime_value: f64,
    pub kind: GramKind,
    /// `|zprime/z|`, infinite when `z` vanishes.
    pub viscosity: f64,
    pub source: AfeSource,
    pub classical_z: f64,
    pub classical_zprime: f64,
}

impl GramRecord {
    pub fn is_bad(&self) -> bool {
        self.kind == GramKind::Bad
    }
}

fn viscosity(z: f64, zp: f64) -> f64 {
    if z == 0.0 {
        f64::INFINITY
    } else {
        libm::fabs(zp / z)
    }
}

/// Robust section at `a = 1` and its main-mode derivative at `g`.
pub fn robust_values(model: &CoefficientModel, g: f64) -> Result<(f64, f64)> {
    let j = Section::at_height(model, g).jet_with(g, DerivMode::Main, |_| 1.0)?;
    Ok((j.z, j.dz))
}

/// Compute and classify the `n`-th Gram point.
pub fn classify(model: &CoefficientModel, n: u64) -> Result<GramRecord> {
    let t = gram_point(model, n)?;
    let ClassicalAfe { z: cz, zprime: czp, .. } = z_model::classical_afe(model, t)?;
    let (rz, rzp) = robust_values(model, t)?;
    let (z, zp, source) = if libm::fabs(rz) >= SIGN_TOL || libm::fabs(cz) < SIGN_TOL {
        (rz, rzp, AfeSource::Robust)
    } else {
        (cz, czp, AfeSource::Classical)
    };
    let kind = if libm::fabs(z) < SIGN_TOL {
        GramKind::Indeterminate
    } else if parity_sign(n as i64) * z > 0.0 {
        GramKind::Good
    } else {
        GramKind::Bad
    };
    Ok(GramRecord {
        n,
        t,
        z_value: z,
        zprime_value: zp,
        kind,
        viscosity: viscosity(z, zp),
        source,
        classical_z: cz,
        classical_zprime: czp,
    })
}

/// Classify every index in `from..=to`.
pub fn classify_range(model: &CoefficientModel, from: u64, to: u64) -> Result<Vec<GramRecord>> {
    (from..=to).map(|n| classify(model, n)).collect()
}

/// A maximal run of Bad points between two Good ones.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GramBlock {
    pub start: u64,
    /// `end - start`, at least 2.
    pub length: u64,
    pub interior_bad: Vec<u64>,
}

impl GramBlock {
    pub fn end(&self) -> u64 {
        self.start + self.length
    }

    /// A single Bad point with Good neighbours.
    pub fn is_isolated(&self) -> bool {
        self.length == 2
    }
}

/// Blocks inside a run of consecutive records. Bad runs touching either end
/// of the slice have no Good endpoint there and are not reported.
pub fn blocks_from_records(records: &[GramRecord]) -> Result<Vec<GramBlock>> {
    for w in records.windows(2) {
        if w[1].n != w[0].n + 1 {
            return Err(Error::InvalidInput("records must be consecutive"));
        }
    }
    if let Some(r) = records.iter().find(|r| r.kind == GramKind::Indeterminate) {
        return Err(Error::Indeterminate { n: r.n });
    }
    let mut out = Vec::new();
    let mut last_good: Option<u64> = None;
    let mut bad = Vec::new();
    for r in records {
        match r.kind {
            GramKind::Good => {
                if let (Some(s), false) = (last_good, bad.is_empty()) {
                    out.push(GramBlock { start: s, length: r.n - s, interior_bad: core::mem::take(&mut bad) });
                }
                bad.clear();
                last_good = Some(r.n);
            }
            _ => bad.push(r.n),
        }
    }
    Ok(out)
}

/// How far `blocks` looks past the range for a Good endpoint.
const BLOCK_REACH: u64 = 256;

/// Maximal Gram blocks with a Bad interior point in `from..=to`.
pub fn blocks(model: &CoefficientModel, from: u64, to: u64) -> Result<Vec<GramBlock>> {
    if from >= to {
        return Err(Error::InvalidInput("empty index range"));
    }
    let mut records = classify_range(model, from, to)?;
    while records.first().is_some_and(|r| r.kind != GramKind::Good) {
        let n = records[0].n;
        if n == 0 || from - n >= BLOCK_REACH {
            break;
        }
        records.insert(0, classify(model, n - 1)?);
    }
    while records.last().is_some_and(|r| r.kind != GramKind::Good) {
        let n = records[records.len() - 1].n;
        if n - to >= BLOCK_REACH {
            break;
        }
        records.push(classify(model, n + 1)?);
    }
    let mut out = blocks_from_records(&records)?;
    out.retain(|b| b.interior_bad.iter().any(|&k| (from..=to).contains(&k)));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BadPoint {
    pub n: u64,
    pub t: f64,
    pub viscosity: f64,
    pub isolated: bool,
    pub corrupt: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GbgReport {
    pub from: u64,
    pub to: u64,
    pub bound: f64,
    pub bad: Vec<BadPoint>,
    /// Bad points that are both isolated and corrupt.
    pub isolated_corrupt: Vec<u64>,
    /// No corrupt point is isolated.
    pub holds: bool,
}

/// Scan report over `from..=to`. `records` must cover `from - 1 ..= to + 1`
/// (from `0` when `from = 0`) so every point has both neighbours.
pub fn gbg_from_records(records: &[GramRecord], from: u64, to: u64, bound: f64) -> Result<GbgReport> {
    let first = records.first().ok_or(Error::InvalidInput("no records"))?.n;
    let last = records[records.len() - 1].n;
    if first > from.saturating_sub(1) || last < to + 1 || records.len() as u64 != last - first + 1 {
        return Err(Error::InvalidInput("records must cover the range and its neighbours"));
    }
    if let Some(r) = records.iter().find(|r| r.kind == GramKind::Indeterminate) {
        return Err(Error::Indeterminate { n: r.n });
    }
    let at = |n: u64| &records[(n - first) as usize];
    let mut bad = Vec::new();
    for n in from..=to {
        let r = at(n);
        if !r.is_bad() {
            continue;
        }
        let left_good = n == 0 || !at(n - 1).is_bad();
        let isolated = left_good && !at(n + 1).is_bad();
        bad.push(BadPoint { n, t: r.t, viscosity: r.viscosity, isolated, corrupt: r.viscosity < bound });
    }
    let isolated_corrupt: Vec<u64> = bad.iter().filter(|b| b.isolated && b.corrupt).map(|b| b.n).collect();
    Ok(GbgReport { from, to, bound, holds: isolated_corrupt.is_empty(), bad, isolated_corrupt })
}

/// Sequential scan of the repulsion conjecture over `from..=to`.
pub fn gbg_scan(model: &CoefficientModel, from: u64, to: u64, bound: f64) -> Result<GbgReport> {
    if from > to {
        return Err(Error::InvalidInput("empty index range"));
    }
    let records = classify_range(model, from.saturating_sub(1), to + 1)?;
    gbg_from_records(&records, from, to, bound)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(n: u64, kind: GramKind) -> GramRecord {
        GramRecord {
            n,
            t: 0.0,
            z_value: 0.0,
            zprime_value: 0.0,
            kind,
            viscosity: 1.0,
            source: AfeSource::Robust,
            classical_z: 0.0,
            classical_zprime: 0.0,
        }
    }

    #[test]
    fn block_partition() {
        use GramKind::*;
        let kinds = [Bad, Good, Bad, Good, Good, Bad, Bad, Good, Bad];
        let rs: Vec<_> = kinds.iter().enumerate().map(|(i, &k)| rec(i as u64 + 10, k)).collect();
        let b = blocks_from_records(&rs).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!((b[0].start, b[0].length, b[0].interior_bad.clone()), (11, 2, alloc::vec![12]));
        assert!(b[0].is_isolated());
        assert_eq!((b[1].start, b[1].length), (14, 3));
    }

    #[test]
    fn indeterminate_is_propagated() {
        let rs = [rec(1, GramKind::Good), rec(2, GramKind::Indeterminate)];
        assert_eq!(blocks_from_records(&rs), Err(Error::Indeterminate { n: 2 }));
    }
}
