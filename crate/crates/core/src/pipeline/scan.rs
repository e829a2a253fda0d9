//! Batch search for level-raising congruences over a range of levels.

use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;

use super::table::TableRow;
use crate::arith::factor_u64;
use crate::congruence::{congruence_primes, theorem_report, FormSource};
use crate::error::{Error, Result};
use crate::modsym::Eigenform;

/// Exponent k of the ratio N_f/N_g = p^k.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RatioShape {
    P,
    P2,
    /// p³: no congruence should exist here. Any pair with m ≥ 2 at some
    /// place is emitted, whatever its hypotheses, so that the absence of
    /// such rows can be checked.
    P3Probe,
}

impl RatioShape {
    pub fn exponent(self) -> u32 {
        match self {
            RatioShape::P => 1,
            RatioShape::P2 => 2,
            RatioShape::P3Probe => 3,
        }
    }
}

impl FromStr for RatioShape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p" => Ok(RatioShape::P),
            "p2" => Ok(RatioShape::P2),
            "p3" => Ok(RatioShape::P3Probe),
            _ => Err(Error::Precondition(format!("unknown ratio shape {s:?} (expected p, p2 or p3)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EllChoice {
    /// The odd congruence primes of each pair.
    Auto,
    Explicit(Vec<u64>),
}

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub min_level: u64,
    pub max_level: u64,
    pub ratios: Vec<RatioShape>,
    pub ells: EllChoice,
    pub bound: Option<u64>,
    pub jobs: usize,
    pub out: Option<PathBuf>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            min_level: 11,
            max_level: 100,
            ratios: vec![RatioShape::P, RatioShape::P2],
            ells: EllChoice::Auto,
            bound: None,
            jobs: 1,
            out: None,
        }
    }
}

impl ScanConfig {
    fn validate(&self) -> Result<()> {
        if self.min_level == 0 || self.min_level > self.max_level {
            return Err(Error::Precondition(format!("empty level range [{}, {}]", self.min_level, self.max_level)));
        }
        if self.ratios.is_empty() {
            return Err(Error::Precondition("no ratio shapes selected".into()));
        }
        if self.jobs == 0 {
            return Err(Error::Precondition("jobs must be at least 1".into()));
        }
        Ok(())
    }
}

/// (N_f, N_g, p, shape) for every N_f in range with N_f = p^k·N_g, p ∤ N_g.
pub fn level_pairs(cfg: &ScanConfig) -> Vec<(u64, u64, u64, RatioShape)> {
    let mut out = Vec::new();
    for n in cfg.min_level..=cfg.max_level {
        for (p, k) in factor_u64(n) {
            let Some(&shape) = cfg.ratios.iter().find(|s| s.exponent() == k) else { continue };
            let n_g = n / p.pow(k);
            // no cusp forms below level 11
            if n_g >= 11 {
                out.push((n, n_g, p, shape));
            }
        }
    }
    out
}

fn scan_pair(
    f: &dyn Eigenform,
    g: &dyn Eigenform,
    shape: RatioShape,
    cfg: &ScanConfig,
    source: &dyn FormSource,
) -> Result<Vec<TableRow>> {
    let ells: Vec<u64> = match &cfg.ells {
        EllChoice::Auto => congruence_primes(f, g, cfg.bound)?.into_iter().map(|(l, _)| l).collect(),
        EllChoice::Explicit(v) => v.iter().copied().filter(|&l| l % 2 == 1 && !f.level().is_multiple_of(l)).collect(),
    };
    let mut rows = Vec::new();
    for ell in ells {
        let r = theorem_report(f, g, ell, source, cfg.bound)?;
        let row = if shape == RatioShape::P3Probe {
            r.places
                .iter()
                .filter(|p| p.m.is_some_and(|m| m >= 2))
                .max_by_key(|p| p.m)
                .map(|p| TableRow::from_report(&r, p))
        } else {
            r.best().map(|p| TableRow::from_report(&r, p))
        };
        rows.extend(row);
    }
    Ok(rows)
}

fn scan_levels(n_f: u64, n_g: u64, shape: RatioShape, cfg: &ScanConfig, source: &dyn FormSource) -> Vec<TableRow> {
    let (fs, gs) = match (source.classes(n_f), source.classes(n_g)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            log::error!("levels {n_f}/{n_g}: {e}; skipped");
            return Vec::new();
        }
    };
    let pairs: Vec<_> = fs.iter().flat_map(|f| gs.iter().map(move |g| (f, g))).collect();
    pairs
        .par_iter()
        .flat_map_iter(|(f, g)| {
            scan_pair(f.as_ref(), g.as_ref(), shape, cfg, source).unwrap_or_else(|e| {
                log::error!("{}.{} / {}.{}: {e}; skipped", f.level(), f.index(), g.level(), g.index());
                Vec::new()
            })
        })
        .collect()
}

/// Rows in order of N_f, then class indices, then ℓ, independent of the
/// number of workers. Failures of single pairs are logged and skipped.
pub fn scan(cfg: &ScanConfig, source: &dyn FormSource) -> Result<Vec<TableRow>> {
    cfg.validate()?;
    if cfg.ells == EllChoice::Explicit(Vec::new()) {
        return Ok(Vec::new());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| Error::Computation(format!("thread pool: {e}")))?;
    let pairs = level_pairs(cfg);
    let mut rows: Vec<TableRow> = pool.install(|| {
        pairs
            .par_iter()
            .flat_map_iter(|&(n_f, n_g, _, shape)| scan_levels(n_f, n_g, shape, cfg, source))
            .collect()
    });
    rows.sort_by_key(|r| (r.n_f, r.i, r.n_g, r.j, r.ell));
    Ok(rows)
}
