//! Switch between rayon-backed and plain iteration for the data-parallel inner loops.
//!
//! Without the `parallel` feature every `Execution` runs sequentially. Results never depend on
//! the choice: parallel paths only compute independent items or integer reductions and collect
//! them in input order.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when work will actually be spread over the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Maps `f` over `items`, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Maps `f` over `0..len`, preserving order.
    pub fn map_range<R, F>(self, len: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return (0..len).into_par_iter().map(f).collect();
        }
        (0..len).map(f).collect()
    }

    /// Adds `1` to `counts[i]` for every index yielded by `indices(item)` across all items.
    ///
    /// Parallel runs fold per-thread count vectors and sum them, so the result is identical to
    /// the sequential pass.
    pub fn histogram<T, I, F>(self, items: &[T], width: usize, indices: F) -> Vec<u32>
    where
        T: Sync,
        I: IntoIterator<Item = usize>,
        F: Fn(&T) -> I + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() && items.len() >= 256 {
            use rayon::prelude::*;
            return items
                .par_chunks(items.len().div_ceil(rayon::current_num_threads()).max(64))
                .map(|chunk| {
                    let mut counts = vec![0u32; width];
                    for item in chunk {
                        for i in indices(item) {
                            counts[i] += 1;
                        }
                    }
                    counts
                })
                .reduce_with(|mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                })
                .unwrap_or_else(|| vec![0; width]);
        }
        let mut counts = vec![0u32; width];
        for item in items {
            for i in indices(item) {
                counts[i] += 1;
            }
        }
        counts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_matches_across_modes() {
        let items: Vec<[usize; 3]> = (0..1000).map(|i| [i % 7, (i * 13) % 7, 6]).collect();
        fn ids(v: &[usize; 3]) -> [usize; 3] {
            *v
        }
        let seq = Execution::Sequential.histogram(&items, 7, ids);
        let par = Execution::Parallel.histogram(&items, 7, ids);
        assert_eq!(seq, par);
        assert_eq!(seq.iter().map(|&c| c as usize).sum::<usize>(), 3000);
    }

    #[test]
    fn map_preserves_order() {
        let out = Execution::Parallel.map_range(500, |i| i * 2);
        assert_eq!(out, (0..500).map(|i| i * 2).collect::<Vec<_>>());
    }
}
