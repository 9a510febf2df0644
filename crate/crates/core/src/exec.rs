//! Data-parallel execution with a sequential fallback.
//!
//! Every parallel path only ever writes disjoint output slots and all
//! reductions are performed afterwards in index order, so the two modes
//! produce bit-identical results.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// Whether this mode actually fans out work (false without the `parallel` feature).
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Evaluates `f(0..n)` and collects the results in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Calls `f(row_index, row)` on every `width`-sized chunk of `data`.
    pub fn for_each_row<T, F>(self, data: &mut [T], width: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            data.par_chunks_mut(width).enumerate().for_each(|(j, row)| f(j, row));
            return;
        }
        data.chunks_mut(width).enumerate().for_each(|(j, row)| f(j, row));
    }

    /// Like [`for_each_row`](Self::for_each_row) but collects one result per row, in row order.
    pub fn map_rows<T, E, F>(self, data: &mut [E], width: usize, f: F) -> Vec<T>
    where
        T: Send,
        E: Send,
        F: Fn(usize, &mut [E]) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return data
                .par_chunks_mut(width)
                .enumerate()
                .map(|(j, row)| f(j, row))
                .collect();
        }
        data.chunks_mut(width).enumerate().map(|(j, row)| f(j, row)).collect()
    }

    /// Sum of `f(i)` over `0..n`, reduced sequentially in index order.
    pub fn sum<F>(self, n: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        self.map(n, f).into_iter().sum()
    }
}
