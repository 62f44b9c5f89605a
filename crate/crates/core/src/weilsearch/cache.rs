use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use super::{weil_enumerate_with, SolutionSet, WeilError, WeilOptions};

/// Memoized class lists, optionally persisted as one JSON file per (v, n).
///
/// Disk writes go through a temp file and a rename, under a process-wide
/// lock, so concurrent readers never observe a partial file.
#[derive(Debug, Default)]
pub struct SolutionCache {
    dir: Option<PathBuf>,
    mem: RwLock<HashMap<(u64, u64), Arc<SolutionSet>>>,
    write_lock: Mutex<()>,
}

impl SolutionCache {
    pub fn in_memory() -> SolutionCache {
        SolutionCache::default()
    }

    pub fn with_dir(dir: impl Into<PathBuf>) -> SolutionCache {
        SolutionCache {
            dir: Some(dir.into()),
            ..SolutionCache::default()
        }
    }

    /// Directory from `CWM_CACHE` if set, else `fallback`.
    pub fn from_env(fallback: Option<PathBuf>) -> SolutionCache {
        match std::env::var_os("CWM_CACHE")
            .map(PathBuf::from)
            .or(fallback)
        {
            Some(d) => SolutionCache::with_dir(d),
            None => SolutionCache::in_memory(),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn path(&self, v: u64, n: u64) -> Option<PathBuf> {
        self.dir
            .as_ref()
            .map(|d| d.join(format!("weil_{v}_{n}.json")))
    }

    /// A stored or previously computed class list, without computing.
    pub fn lookup(&self, v: u64, n: u64) -> Option<Arc<SolutionSet>> {
        if let Some(s) = self.mem.read().unwrap().get(&(v, n)) {
            return Some(s.clone());
        }
        let text = fs::read_to_string(self.path(v, n)?).ok()?;
        let set = Arc::new(SolutionSet::from_json(&text, 32).ok()?);
        if set.v != v || set.n != n {
            return None;
        }
        self.mem.write().unwrap().insert((v, n), set.clone());
        Some(set)
    }

    /// Return the class list, enumerating and storing it if absent.
    pub fn get_or_compute(
        &self,
        v: u64,
        n: u64,
        opts: &WeilOptions,
    ) -> Result<Arc<SolutionSet>, WeilError> {
        if let Some(s) = self.lookup(v, n) {
            return Ok(s);
        }
        let set = weil_enumerate_with(v, n, opts)?;
        self.insert(set)
    }

    /// Store a class list (computed or imported).
    pub fn insert(&self, set: SolutionSet) -> Result<Arc<SolutionSet>, WeilError> {
        let key = (set.v, set.n);
        if let Some(path) = self.path(set.v, set.n) {
            let _guard = self.write_lock.lock().unwrap();
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent)?;
            }
            let tmp = path.with_extension(format!("json.tmp{}", std::process::id()));
            fs::write(&tmp, set.to_json())?;
            fs::rename(&tmp, &path)?;
        }
        let set = Arc::new(set);
        self.mem.write().unwrap().insert(key, set.clone());
        Ok(set)
    }
}
