//! Fork-join primitives shared by the algorithms.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Inputs shorter than this are processed by a plain loop.
pub const SERIAL_CUTOFF: usize = 2048;

/// Order-preserving filter. Equivalent to `items.iter().filter(keep)`.
pub fn parallel_pack<T, F>(items: &[T], keep: F) -> Vec<T>
where
    T: Copy + Send + Sync,
    F: Fn(&T) -> bool + Sync,
{
    if items.len() < SERIAL_CUTOFF {
        return items.iter().copied().filter(|x| keep(x)).collect();
    }
    items.par_iter().copied().filter(|x| keep(x)).collect()
}

/// A shared cell that only ever decreases. `write_min` is a single atomic
/// fetch-min, so concurrent writers always leave the minimum behind.
#[derive(Debug)]
pub struct PriorityCell(AtomicUsize);

impl PriorityCell {
    pub const EMPTY: usize = usize::MAX;

    pub const fn new() -> Self {
        PriorityCell(AtomicUsize::new(Self::EMPTY))
    }

    #[inline]
    pub fn write_min(&self, value: usize) {
        self.0.fetch_min(value, AtomicOrdering::AcqRel);
    }

    #[inline]
    pub fn get(&self) -> usize {
        self.0.load(AtomicOrdering::Acquire)
    }

    #[inline]
    pub fn reset(&self) {
        self.0.store(Self::EMPTY, AtomicOrdering::Release);
    }
}

impl Default for PriorityCell {
    fn default() -> Self {
        PriorityCell::new()
    }
}

#[inline]
fn better(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    // larger score wins; equal scores go to the smaller index
    match a.0.partial_cmp(&b.0) {
        Some(Ordering::Greater) => a,
        Some(Ordering::Less) => b,
        _ => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
    }
}

/// Index in `0..n` maximizing `score`, smallest index on ties.
pub fn argmax_range<F>(n: usize, score: F) -> Option<(usize, f64)>
where
    F: Fn(usize) -> f64 + Sync,
{
    if n == 0 {
        return None;
    }
    let best = if n < SERIAL_CUTOFF {
        (1..n).fold((score(0), 0), |acc, i| better(acc, (score(i), i)))
    } else {
        (0..n)
            .into_par_iter()
            .with_min_len(SERIAL_CUTOFF / 2)
            .map(|i| (score(i), i))
            .reduce_with(better)
            .expect("nonempty range")
    };
    Some((best.1, best.0))
}

/// Index of a maximum-score item; ties go to the smallest index.
pub fn parallel_max_by<T, F>(items: &[T], score: F) -> Result<usize>
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync,
{
    argmax_range(items.len(), |i| score(&items[i]))
        .map(|(i, _)| i)
        .ok_or_else(|| Error::invalid("parallel_max_by on empty input"))
}

/// Smallest index in `range` for which `pred` holds.
pub fn parallel_find_first<F>(range: std::ops::Range<usize>, pred: F) -> Option<usize>
where
    F: Fn(usize) -> bool + Sync,
{
    if range.len() < SERIAL_CUTOFF {
        return range.into_iter().find(|&i| pred(i));
    }
    range.into_par_iter().find_first(|&i| pred(i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::Rng;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::Rng as _;
    use std::sync::Arc;

    #[test]
    fn pack_examples() {
        let empty: [i32; 0] = [];
        assert!(parallel_pack(&empty, |_| true).is_empty());
        assert_eq!(parallel_pack(&[3, 1, 4, 1, 5], |x| x % 2 == 1), vec![3, 1, 1, 5]);
    }

    #[test]
    fn pack_large_matches_serial_filter() {
        let mut rng = Rng::new(11);
        let xs: Vec<i64> = (0..100_000).map(|_| rng.random_range(-1000..1000)).collect();
        let serial: Vec<i64> = xs.iter().copied().filter(|&x| x > 0).collect();
        assert_eq!(parallel_pack(&xs, |&x| x > 0), serial);
    }

    #[test]
    fn write_min_examples() {
        let c = PriorityCell::new();
        assert_eq!(c.get(), PriorityCell::EMPTY);
        c.write_min(5);
        assert_eq!(c.get(), 5);
        let c = PriorityCell::new();
        c.write_min(3);
        c.write_min(5);
        assert_eq!(c.get(), 3);
    }

    #[test]
    fn write_min_concurrent_stress() {
        let mut rng = Rng::new(5);
        for _ in 0..1000 {
            let cell = Arc::new(PriorityCell::new());
            let mut vals: Vec<usize> = (0..64).collect();
            vals.shuffle(&mut rng);
            let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
            pool.install(|| {
                vals.par_iter().with_max_len(1).for_each(|&v| cell.write_min(v));
            });
            assert_eq!(cell.get(), 0);
        }
    }

    #[test]
    fn max_by_examples() {
        assert_eq!(parallel_max_by(&[5.0], |x| *x).unwrap(), 0);
        assert_eq!(parallel_max_by(&[1.0, 9.0, 9.0, 2.0], |x| *x).unwrap(), 1);
        let empty: [f64; 0] = [];
        assert!(parallel_max_by(&empty, |x| *x).is_err());
    }

    #[test]
    fn max_by_large_matches_serial() {
        let mut rng = Rng::new(99);
        let xs: Vec<f64> = (0..1_000_000).map(|_| rng.random::<f64>()).collect();
        let mut serial = 0;
        for (i, &x) in xs.iter().enumerate() {
            if x > xs[serial] {
                serial = i;
            }
        }
        assert_eq!(parallel_max_by(&xs, |x| *x).unwrap(), serial);
    }

    proptest! {
        #[test]
        fn pack_equals_filter(xs in proptest::collection::vec(-50i32..50, 0..5000), m in 1i32..7) {
            let serial: Vec<i32> = xs.iter().copied().filter(|x| x % m == 0).collect();
            prop_assert_eq!(parallel_pack(&xs, |x| x % m == 0), serial);
        }

        #[test]
        fn write_min_order_independent(mut vals in proptest::collection::vec(0usize..1000, 1..64), seed: u64) {
            let expect = *vals.iter().min().unwrap();
            vals.shuffle(&mut Rng::new(seed));
            let c = PriorityCell::new();
            for &v in &vals {
                c.write_min(v);
                c.write_min(v);
            }
            prop_assert_eq!(c.get(), expect);
        }

        #[test]
        fn find_first_matches_serial(xs in proptest::collection::vec(0u8..20, 0..6000)) {
            let serial = xs.iter().position(|&x| x == 0);
            prop_assert_eq!(parallel_find_first(0..xs.len(), |i| xs[i] == 0), serial);
        }
    }
}
