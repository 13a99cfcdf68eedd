//! Sequential or rayon-backed execution of independent work items.
//!
//! Without the `parallel` feature both variants run sequentially, so callers
//! never need to branch on the feature themselves.

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Whether work actually fans out across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Applies `f` to every item, stopping at the first error.
    ///
    /// Results keep the input order in both modes.
    pub fn try_map_mut<T, R, F>(self, items: &mut [T], f: F) -> Result<Vec<R>>
    where
        T: Send,
        R: Send,
        F: Fn(&mut T) -> Result<R> + Send + Sync,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            use rayon::prelude::*;
            return items.par_iter_mut().map(f).collect();
        }
        items.iter_mut().map(f).collect()
    }

    /// Order-preserving map over shared items.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Send + Sync,
    {
        #[cfg(feature = "parallel")]
        if self == Execution::Parallel {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    #[test]
    fn both_modes_agree_and_keep_order() {
        let mut a: Vec<u64> = (0..1000).collect();
        let mut b = a.clone();
        let ra = Execution::Sequential.try_map_mut(&mut a, |v| {
            *v *= 3;
            Ok(*v + 1)
        });
        let rb = Execution::Parallel.try_map_mut(&mut b, |v| {
            *v *= 3;
            Ok(*v + 1)
        });
        assert_eq!(ra, rb);
        assert_eq!(a, b);
        let squares = Execution::Parallel.map(&a, |v| v * v);
        assert_eq!(squares[10], 900);
    }

    #[test]
    fn errors_propagate() {
        let mut items = vec![1, 2, 3];
        let r: Result<Vec<()>> = Execution::Parallel.try_map_mut(&mut items, |v| {
            if *v == 2 {
                Err(Error::Protocol("boom"))
            } else {
                Ok(())
            }
        });
        assert!(r.is_err());
    }
}
