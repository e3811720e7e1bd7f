//! Critical-value tables: a text format for null distributions and an opt-in disk cache.
//!
//! A table is a header line `model m n phi statistic` followed by `value cumulative_prob`
//! rows in ascending value order. Numbers carry 17 significant digits so they round-trip.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::distribution::NullDistribution;
use crate::error::{Error, Result};
use crate::models::Model;

/// Directory holding cached tables. Caching is off when unset.
pub const CACHE_DIR_VAR: &str = "UMPVOTE_CACHE_DIR";

#[derive(Debug, Clone, PartialEq)]
pub struct TableKey {
    pub model: String,
    pub m: usize,
    pub n: u64,
    pub phi: f64,
    pub statistic: String,
}

impl TableKey {
    pub fn new(model: &Model, n: u64, statistic: impl Into<String>) -> Self {
        TableKey {
            model: model.name().to_string(),
            m: model.m(),
            n,
            phi: model.phi(),
            statistic: statistic.into(),
        }
    }

    pub fn header(&self) -> String {
        format!("{} {} {} {} {}", self.model, self.m, self.n, fmt17(self.phi), self.statistic)
    }

    /// Content address of the table: hex SHA-256 of the header.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.header().as_bytes()))
    }

    fn parse(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 5 {
            return Err(Error::Cache(format!("bad header {line:?}")));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Cache(format!("bad number {s:?}")));
        Ok(TableKey {
            model: f[0].to_string(),
            m: f[1].parse().map_err(|_| Error::Cache(format!("bad m {:?}", f[1])))?,
            n: f[2].parse().map_err(|_| Error::Cache(format!("bad n {:?}", f[2])))?,
            phi: num(f[3])?,
            statistic: f[4].to_string(),
        })
    }
}

/// Decimal text with (at least) 17 significant digits that parses back to `x` exactly.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.16}");
    }
    let exp = x.abs().log10().floor() as i32;
    let mut decimals = (16 - exp).max(0) as usize;
    loop {
        let s = format!("{x:.decimals$}");
        if s.parse::<f64>().ok() == Some(x) || decimals > 400 {
            return s;
        }
        decimals += 1;
    }
}

/// The distribution exactly as a table would store and reload it: probabilities rebuilt by
/// differencing running sums.
pub fn through_cumulative(dist: &NullDistribution) -> NullDistribution {
    let mut cum = 0.0;
    let mut prev = 0.0;
    let pairs = dist.values().iter().zip(dist.probs()).map(|(v, p)| {
        cum += p;
        let point = cum - prev;
        prev = cum;
        (*v, point)
    });
    let out = NullDistribution::from_pairs(dist.is_integral(), pairs.collect::<Vec<_>>());
    match dist.approximate() {
        Some(draws) => out.with_approximation(draws),
        None => out,
    }
}

pub fn format_table(key: &TableKey, dist: &NullDistribution) -> String {
    let mut out = key.header();
    out.push('\n');
    let mut cum = 0.0;
    for (v, p) in dist.values().iter().zip(dist.probs()) {
        cum += p;
        out.push_str(&format!("{} {}\n", fmt17(*v), fmt17(cum)));
    }
    out
}

pub fn parse_table(text: &str, integral: bool) -> Result<(TableKey, NullDistribution)> {
    let mut lines = text.lines();
    let key = TableKey::parse(lines.next().ok_or_else(|| Error::Cache("empty table".into()))?)?;
    let mut prev = 0.0;
    let mut pairs = Vec::new();
    for line in lines.filter(|l| !l.trim().is_empty()) {
        let mut it = line.split_whitespace();
        let (Some(v), Some(c), None) = (it.next(), it.next(), it.next()) else {
            return Err(Error::Cache(format!("bad row {line:?}")));
        };
        let parse = |s: &str| s.parse::<f64>().map_err(|_| Error::Cache(format!("bad number {s:?}")));
        let (v, c) = (parse(v)?, parse(c)?);
        pairs.push((v, c - prev));
        prev = c;
    }
    Ok((key, NullDistribution::from_pairs(integral, pairs)))
}

pub fn read_table(path: &Path, integral: bool) -> Result<(TableKey, NullDistribution)> {
    let text = fs::read_to_string(path).map_err(|e| Error::Cache(format!("{}: {e}", path.display())))?;
    parse_table(&text, integral)
}

/// Writes through a temporary file and a rename, so readers never see a partial table.
pub fn write_table(path: &Path, key: &TableKey, dist: &NullDistribution) -> Result<()> {
    let io = |e: std::io::Error| Error::Cache(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(format_table(key, dist).as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Content-addressed table store. Concurrent writers of the same key write identical bytes.
#[derive(Debug, Clone)]
pub struct DiskCache {
    dir: PathBuf,
}

impl DiskCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        DiskCache { dir: dir.into() }
    }

    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_DIR_VAR)
            .filter(|v| !v.is_empty())
            .map(DiskCache::new)
    }

    pub fn path(&self, key: &TableKey) -> PathBuf {
        self.dir.join(format!("{}.table", key.digest()))
    }

    /// A stored table, or `None` when missing, unreadable or keyed differently.
    pub fn get(&self, key: &TableKey, integral: bool) -> Option<NullDistribution> {
        match read_table(&self.path(key), integral) {
            Ok((k, d)) if k == *key => Some(d),
            _ => None,
        }
    }

    pub fn put(&self, key: &TableKey, dist: &NullDistribution) -> Result<()> {
        fs::create_dir_all(&self.dir).map_err(|e| Error::Cache(format!("{}: {e}", self.dir.display())))?;
        write_table(&self.path(key), key, dist)
    }
}
