//! Sequential or data-parallel execution of independent work items.

/// How independent work items are run. Without the `parallel` feature
/// both variants run sequentially.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Order-preserving map.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel => {
                use rayon::prelude::*;
                items.par_iter().map(f).collect()
            }
            _ => items.iter().map(f).collect(),
        }
    }

    /// Order-preserving flat map.
    pub fn flat_map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> Vec<R> + Sync + Send,
    {
        self.map(items, f).into_iter().flatten().collect()
    }

    /// Run `f` with at most `jobs` worker threads (0 keeps the global pool).
    pub fn install<R: Send>(self, jobs: usize, f: impl FnOnce() -> R + Send) -> R {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel && jobs > 0 {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
                return pool.install(f);
            }
        }
        let _ = jobs;
        f()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = Exec::Sequential.map(&xs, |x| x * x);
        let b = Exec::Parallel.map(&xs, |x| x * x);
        assert_eq!(a, b);
        let c = Exec::Parallel.install(2, || Exec::Parallel.flat_map(&xs, |&x| vec![x; 2]));
        assert_eq!(c.len(), 2000);
    }
}
