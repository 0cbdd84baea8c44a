use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Environment variable overriding the cache location.
pub const CACHE_ENV: &str = "RANKDIV_CACHE";
const DEFAULT_CACHE_FILE: &str = "rankdiv-reference-cache.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CachedReference {
    pub value: f64,
    pub n_ref: usize,
    pub seed: u64,
    pub route: String,
}

/// On-disk JSON map from a canonical key to a reference value.
///
/// Reads share the lock; inserts take it exclusively and rewrite the file
/// through a temporary sibling and a rename, so readers never see a torn file.
#[derive(Debug)]
pub struct ReferenceCache {
    path: PathBuf,
    entries: RwLock<BTreeMap<String, CachedReference>>,
}

impl ReferenceCache {
    /// Opens (or starts) the cache at `path`; a missing file is an empty cache.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let entries = match std::fs::read_to_string(&path) {
            Ok(text) if !text.trim().is_empty() => serde_json::from_str(&text)?,
            Ok(_) => BTreeMap::new(),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(e.into()),
        };
        Ok(Self {
            path,
            entries: RwLock::new(entries),
        })
    }

    /// `$RANKDIV_CACHE`, or a file in the working directory.
    pub fn default_path() -> PathBuf {
        std::env::var_os(CACHE_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_FILE))
    }

    pub fn open_default() -> Result<Self> {
        Self::open(Self::default_path())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Canonical key for a reference computation.
    pub fn key(family: &str, params: &str, kind: &str, n_ref: usize, seed: u64) -> String {
        format!("{family}|{params}|{kind}|n={n_ref}|seed={seed}")
    }

    pub fn get(&self, key: &str) -> Option<CachedReference> {
        self.entries.read().expect("cache lock").get(key).cloned()
    }

    pub fn insert(&self, key: String, value: CachedReference) -> Result<()> {
        let mut map = self.entries.write().expect("cache lock");
        map.insert(key, value);
        let text = serde_json::to_string_pretty(&*map)?;
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let tmp = self.path.with_extension("json.tmp");
        std::fs::write(&tmp, text)?;
        std::fs::rename(&tmp, &self.path)?;
        Ok(())
    }

    /// Returns the cached entry for `key`, computing and storing it on a miss.
    pub fn get_or_compute(
        &self,
        key: &str,
        compute: impl FnOnce() -> Result<CachedReference>,
    ) -> Result<CachedReference> {
        if let Some(hit) = self.get(key) {
            return Ok(hit);
        }
        let fresh = compute()?;
        self.insert(key.to_string(), fresh.clone())?;
        Ok(fresh)
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("refs.json");
        let entry = CachedReference {
            value: 0.25,
            n_ref: 1000,
            seed: 7,
            route: "monte_carlo".into(),
        };
        {
            let cache = ReferenceCache::open(&path).unwrap();
            assert!(cache.is_empty());
            let key = ReferenceCache::key("mix", "delta=1", "js", 1000, 7);
            let mut calls = 0;
            let got = cache
                .get_or_compute(&key, || {
                    calls += 1;
                    Ok(entry.clone())
                })
                .unwrap();
            assert_eq!(got, entry);
            cache.get_or_compute(&key, || unreachable!()).unwrap();
            assert_eq!(calls, 1);
        }
        let reopened = ReferenceCache::open(&path).unwrap();
        assert_eq!(reopened.len(), 1);
        assert_eq!(
            reopened.get(&ReferenceCache::key("mix", "delta=1", "js", 1000, 7)),
            Some(entry)
        );
    }
}
