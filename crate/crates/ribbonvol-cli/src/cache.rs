//! Optional on-disk memo of graph enumerations, keyed by kind and type.

use std::env;
use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use ribbonvol::ribbon::{
    enumerate_reduced, enumerate_reduced_unlabelled, enumerate_trivalent, enumerate_trivalent_unlabelled,
};
use ribbonvol::RibbonGraph;

pub const CACHE_ENV: &str = "RIBBONVOL_CACHE_DIR";

#[derive(Clone, Copy, Debug)]
pub struct Kind {
    pub reduced: bool,
    pub unlabelled: bool,
}

impl Kind {
    fn file_name(self, genus: usize, n: usize) -> String {
        let valency = if self.reduced { "reduced" } else { "trivalent" };
        let labels = if self.unlabelled { "unlabelled" } else { "labelled" };
        format!("{valency}-{labels}-g{genus}-n{n}.json")
    }

    fn compute(self, genus: usize, n: usize) -> ribbonvol::Result<Vec<RibbonGraph>> {
        match (self.reduced, self.unlabelled) {
            (false, false) => enumerate_trivalent(genus, n),
            (false, true) => enumerate_trivalent_unlabelled(genus, n),
            (true, false) => enumerate_reduced(genus, n),
            (true, true) => enumerate_reduced_unlabelled(genus, n),
        }
    }
}

/// Enumerates through the cache directory when one is configured. A corrupt
/// cache file is recomputed and overwritten.
pub fn graphs(genus: usize, n: usize, kind: Kind) -> Result<Vec<RibbonGraph>> {
    let Some(dir) = env::var_os(CACHE_ENV).map(PathBuf::from) else {
        return Ok(kind.compute(genus, n)?);
    };
    let path = dir.join(kind.file_name(genus, n));
    if let Ok(text) = fs::read(&path) {
        if let Ok(graphs) = serde_json::from_slice::<Vec<RibbonGraph>>(&text) {
            return Ok(graphs);
        }
    }
    let graphs = kind.compute(genus, n)?;
    fs::create_dir_all(&dir).with_context(|| format!("creating cache directory {}", dir.display()))?;
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::write(&tmp, serde_json::to_vec(&graphs)?).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, &path).with_context(|| format!("replacing {}", path.display()))?;
    Ok(graphs)
}
