//! Parallel Gram-point scans backed by the shard cache.

use std::collections::BTreeMap;

use anyhow::Result;
use gdl_core::gram::{classify, GramRecord};
use gdl_core::z_model::CoefficientModel;
use rayon::prelude::*;

use crate::cache::{shard_of, Cache, SHARD_SIZE};

/// Records for `from..=to` in index order. Each shard is loaded, filled in
/// and written back by exactly one task; missing indices are computed in
/// parallel. With `cache = None` nothing touches the disk.
pub fn scan(model: &CoefficientModel, from: u64, to: u64, cache: Option<&Cache>) -> Result<Vec<GramRecord>> {
    if from > to {
        anyhow::bail!("empty index range {from}..={to}");
    }
    let shards: Vec<u64> = (shard_of(from)..=shard_of(to)).collect();
    let parts: Vec<Vec<GramRecord>> = shards
        .par_iter()
        .map(|&s| {
            let lo = from.max(s * SHARD_SIZE);
            let hi = to.min(s * SHARD_SIZE + SHARD_SIZE - 1);
            scan_shard(model, s, lo, hi, cache)
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().flatten().collect())
}

fn scan_shard(model: &CoefficientModel, shard: u64, lo: u64, hi: u64, cache: Option<&Cache>) -> Result<Vec<GramRecord>> {
    let mut known = match cache {
        Some(c) => c.load(&model.name, shard)?,
        None => BTreeMap::new(),
    };
    let missing: Vec<u64> = (lo..=hi).filter(|n| !known.contains_key(n)).collect();
    if !missing.is_empty() {
        let fresh: Vec<GramRecord> =
            missing.par_iter().map(|&n| classify(model, n)).collect::<gdl_core::Result<_>>()?;
        for r in fresh {
            known.insert(r.n, r);
        }
        if let Some(c) = cache {
            c.store(&model.name, shard, &known)?;
        }
    }
    Ok(known.range(lo..=hi).map(|(_, r)| *r).collect())
}
