//! Flat-file cache of classified Gram points.
//!
//! One CSV per `(model, n / SHARD_SIZE)` under the cache directory. Every
//! float is stored as its bit pattern, so a re-read record is identical to a
//! fresh computation. Shards are replaced atomically via a temp file.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gdl_core::gram::{AfeSource, GramKind, GramRecord};

use crate::format::{hex, parse_hex, version_line};

pub const SHARD_SIZE: u64 = 100_000;

pub const ENV_VAR: &str = "GDL_CACHE_DIR";

const HEADER: [&str; 9] = ["n", "t", "z", "zprime", "kind", "viscosity", "source", "classical_z", "classical_zprime"];

#[derive(Debug, Clone)]
pub struct Cache {
    root: PathBuf,
}

/// One shard file on disk.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShardInfo {
    pub model: String,
    pub shard: u64,
    pub records: usize,
    pub bytes: u64,
}

pub fn shard_of(n: u64) -> u64 {
    n / SHARD_SIZE
}

fn kind_str(k: GramKind) -> &'static str {
    match k {
        GramKind::Good => "good",
        GramKind::Bad => "bad",
        GramKind::Indeterminate => "indeterminate",
    }
}

pub fn kind_label(k: GramKind) -> &'static str {
    kind_str(k)
}

fn parse_kind(s: &str) -> Result<GramKind> {
    Ok(match s {
        "good" => GramKind::Good,
        "bad" => GramKind::Bad,
        "indeterminate" => GramKind::Indeterminate,
        _ => bail!("unknown kind {s:?}"),
    })
}

pub fn source_label(s: AfeSource) -> &'static str {
    match s {
        AfeSource::Robust => "robust",
        AfeSource::Classical => "classical",
    }
}

fn parse_source(s: &str) -> Result<AfeSource> {
    Ok(match s {
        "robust" => AfeSource::Robust,
        "classical" => AfeSource::Classical,
        _ => bail!("unknown source {s:?}"),
    })
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Cache { root: root.into() }
    }

    /// `explicit`, else `$GDL_CACHE_DIR`, else `.gdl-cache`.
    pub fn locate(explicit: Option<&Path>) -> Self {
        match explicit {
            Some(p) => Cache::new(p),
            None => match std::env::var_os(ENV_VAR) {
                Some(p) if !p.is_empty() => Cache::new(p),
                _ => Cache::new(".gdl-cache"),
            },
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn shard_path(&self, model: &str, shard: u64) -> PathBuf {
        self.root.join(model).join(format!("shard-{shard:05}.csv"))
    }

    /// Records in a shard. A missing file or one written by another schema
    /// version reads as empty.
    pub fn load(&self, model: &str, shard: u64) -> Result<BTreeMap<u64, GramRecord>> {
        let path = self.shard_path(model, shard);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(BTreeMap::new()),
            Err(e) => return Err(e).with_context(|| format!("reading {}", path.display())),
        };
        let expected = format!("#version={}", version_line());
        if text.lines().next() != Some(expected.as_str()) {
            return Ok(BTreeMap::new());
        }
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let mut out = BTreeMap::new();
        for row in rdr.records() {
            let row = row.with_context(|| format!("parsing {}", path.display()))?;
            if row.len() != HEADER.len() {
                bail!("{}: malformed row", path.display());
            }
            let n: u64 = row[0].parse()?;
            if shard_of(n) != shard {
                bail!("{}: index {n} outside the shard", path.display());
            }
            let rec = GramRecord {
                n,
                t: parse_hex(&row[1])?,
                z_value: parse_hex(&row[2])?,
                zprime_value: parse_hex(&row[3])?,
                kind: parse_kind(&row[4])?,
                viscosity: parse_hex(&row[5])?,
                source: parse_source(&row[6])?,
                classical_z: parse_hex(&row[7])?,
                classical_zprime: parse_hex(&row[8])?,
            };
            out.insert(n, rec);
        }
        Ok(out)
    }

    pub fn store(&self, model: &str, shard: u64, records: &BTreeMap<u64, GramRecord>) -> Result<()> {
        let path = self.shard_path(model, shard);
        let dir = path.parent().expect("shard path has a parent");
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        writeln!(tmp, "#version={}", version_line())?;
        writeln!(tmp, "#model={model}")?;
        {
            let mut w = csv::Writer::from_writer(&mut tmp);
            w.write_record(HEADER)?;
            for r in records.values() {
                w.write_record([
                    r.n.to_string(),
                    hex(r.t),
                    hex(r.z_value),
                    hex(r.zprime_value),
                    kind_str(r.kind).into(),
                    hex(r.viscosity),
                    source_label(r.source).into(),
                    hex(r.classical_z),
                    hex(r.classical_zprime),
                ])?;
            }
            w.flush()?;
        }
        tmp.persist(&path).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    /// Every shard file, sorted by model then shard.
    pub fn status(&self) -> Result<Vec<ShardInfo>> {
        let mut out = Vec::new();
        let Ok(models) = fs::read_dir(&self.root) else {
            return Ok(out);
        };
        for m in models {
            let m = m?;
            if !m.file_type()?.is_dir() {
                continue;
            }
            let model = m.file_name().to_string_lossy().into_owned();
            for f in fs::read_dir(m.path())? {
                let f = f?;
                let name = f.file_name().to_string_lossy().into_owned();
                let Some(shard) = name.strip_prefix("shard-").and_then(|s| s.strip_suffix(".csv")) else {
                    continue;
                };
                let Ok(shard) = shard.parse::<u64>() else { continue };
                let records = self.load(&model, shard)?.len();
                out.push(ShardInfo { model: model.clone(), shard, records, bytes: f.metadata()?.len() });
            }
        }
        out.sort_by(|a, b| (&a.model, a.shard).cmp(&(&b.model, b.shard)));
        Ok(out)
    }

    /// Remove the cache directory. Returns whether anything was there.
    pub fn clear(&self) -> Result<bool> {
        match fs::remove_dir_all(&self.root) {
            Ok(()) => Ok(true),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(false),
            Err(e) => Err(e).with_context(|| format!("removing {}", self.root.display())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shard_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::new(dir.path());
        let mut m = BTreeMap::new();
        let r = GramRecord {
            n: 7,
            t: 1.0 / 3.0,
            z_value: -0.0,
            zprime_value: f64::MIN_POSITIVE,
            kind: GramKind::Bad,
            viscosity: f64::INFINITY,
            source: AfeSource::Classical,
            classical_z: 2.5,
            classical_zprime: -1e300,
        };
        m.insert(7, r);
        c.store("riemann", 0, &m).unwrap();
        let back = c.load("riemann", 0).unwrap();
        assert_eq!(back[&7].z_value.to_bits(), (-0.0f64).to_bits());
        assert_eq!(back[&7], r);
        assert!(c.load("riemann", 1).unwrap().is_empty());
        let st = c.status().unwrap();
        assert_eq!(st.len(), 1);
        assert_eq!(st[0].records, 1);
        assert!(c.clear().unwrap());
        assert!(!c.clear().unwrap());
    }
}
