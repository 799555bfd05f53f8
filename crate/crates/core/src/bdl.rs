//! Batch-dynamic kd-tree via the logarithmic method: a small buffer tree of
//! capacity `X` plus static trees of exactly `X * 2^i` points. Bit `i` of the
//! fullness mask is set iff static tree `i` exists. Inserting `m * X` points
//! adds `m` to the mask; trees whose bits clear are torn down and their
//! points rebuilt into the trees whose bits are set.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kdtree::{Heuristic, KnnBuffer, StaticTree};
use crate::point::PointSet;

/// Default buffer capacity `X`.
pub const BUFFER_CAP: usize = 1024;
pub const BLOOM_BITS_PER_KEY: usize = 10;
pub const BLOOM_HASHES: u32 = 7;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn point_hash(p: &[f64]) -> (u64, u64) {
    let mut h = 0x243f_6a88_85a3_08d3u64;
    for &c in p {
        // +0.0 and -0.0 compare equal, so they must hash equal
        let c = if c == 0.0 { 0.0 } else { c };
        h = mix(h ^ c.to_bits());
    }
    (mix(h ^ 0x1357_9bdf_2468_ace0), mix(h.rotate_left(32)) | 1)
}

/// Bloom filter over points (all coordinates hashed), built in parallel.
#[derive(Debug)]
pub struct BloomFilter {
    bits: Vec<AtomicU64>,
    nbits: u64,
    hashes: u32,
}

impl BloomFilter {
    /// Filter over the points in `coords` (flat, `dim` per point).
    pub fn build(coords: &[f64], dim: usize, bits_per_key: usize, hashes: u32) -> BloomFilter {
        let n = coords.len() / dim;
        let nbits = ((n * bits_per_key).max(64) as u64).next_multiple_of(64);
        let bits: Vec<AtomicU64> = (0..nbits / 64).map(|_| AtomicU64::new(0)).collect();
        let f = BloomFilter {
            bits,
            nbits,
            hashes: hashes.max(1),
        };
        coords.par_chunks(dim).with_min_len(1024).for_each(|p| {
            let (h1, h2) = point_hash(p);
            for i in 0..f.hashes as u64 {
                let b = h1.wrapping_add(i.wrapping_mul(h2)) % f.nbits;
                f.bits[(b / 64) as usize].fetch_or(1 << (b % 64), Ordering::Relaxed);
            }
        });
        f
    }

    pub fn may_contain(&self, p: &[f64]) -> bool {
        let (h1, h2) = point_hash(p);
        (0..self.hashes as u64).all(|i| {
            let b = h1.wrapping_add(i.wrapping_mul(h2)) % self.nbits;
            self.bits[(b / 64) as usize].load(Ordering::Relaxed) & (1 << (b % 64)) != 0
        })
    }
}

#[derive(Debug)]
struct Static {
    tree: StaticTree,
    bloom: OnceLock<BloomFilter>,
}

/// Points with ids, flat coordinates.
#[derive(Clone, Debug, Default)]
struct Batch {
    coords: Vec<f64>,
    ids: Vec<u64>,
}

impl Batch {
    fn len(&self) -> usize {
        self.ids.len()
    }

    fn append(&mut self, mut other: Batch) {
        self.coords.append(&mut other.coords);
        self.ids.append(&mut other.ids);
    }

    /// Removes and returns the last `count` points.
    fn split_off_tail(&mut self, count: usize, dim: usize) -> Batch {
        let at = self.len() - count;
        Batch {
            coords: self.coords.split_off(at * dim),
            ids: self.ids.split_off(at),
        }
    }

    /// Removes and returns the first `count` points.
    fn split_off_head(&mut self, count: usize, dim: usize) -> Batch {
        let tail = self.split_off_tail(self.len() - count, dim);
        std::mem::replace(self, tail)
    }
}

#[derive(Debug)]
pub struct BdlTree {
    dim: usize,
    cap: usize,
    heuristic: Heuristic,
    buffer: Batch,
    buffer_tree: StaticTree,
    statics: Vec<Option<Static>>,
    next_id: u64,
}

impl BdlTree {
    pub fn new(dim: usize) -> BdlTree {
        Self::with_buffer(dim, BUFFER_CAP, Heuristic::ObjectMedian)
    }

    /// Empty structure with buffer capacity `cap` (the `X` above).
    pub fn with_buffer(dim: usize, cap: usize, heuristic: Heuristic) -> BdlTree {
        assert!(dim > 0 && cap > 0, "dimension and buffer capacity must be positive");
        BdlTree {
            dim,
            cap,
            heuristic,
            buffer: Batch::default(),
            buffer_tree: StaticTree::build(&PointSet::empty(dim), heuristic),
            statics: Vec::new(),
            next_id: 0,
        }
    }

    /// Same as inserting `points` into an empty structure.
    pub fn build(points: &PointSet, cap: usize, heuristic: Heuristic) -> Result<BdlTree> {
        let mut t = Self::with_buffer(points.dim(), cap, heuristic);
        t.insert(points)?;
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn buffer_cap(&self) -> usize {
        self.cap
    }

    /// Fullness mask: bit `i` set iff static tree `i` exists.
    pub fn mask(&self) -> u64 {
        self.statics
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_some())
            .fold(0, |m, (i, _)| m | 1 << i)
    }

    pub fn buffer_len(&self) -> usize {
        self.buffer.len()
    }

    /// Live points across the buffer and all static trees.
    pub fn len(&self) -> usize {
        self.buffer.len() + self.statics.iter().flatten().map(|s| s.tree.live()).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(built size, live count)` of each static tree slot.
    pub fn tree_sizes(&self) -> Vec<Option<(usize, usize)>> {
        self.statics
            .iter()
            .map(|s| s.as_ref().map(|s| (s.tree.built_len(), s.tree.live())))
            .collect()
    }

    /// Whether the bloom filter of static tree `i` has been built.
    pub fn bloom_built(&self, i: usize) -> bool {
        self.statics
            .get(i)
            .and_then(|s| s.as_ref())
            .is_some_and(|s| s.bloom.get().is_some())
    }

    /// All live points with their ids, sorted by id.
    pub fn points(&self) -> (PointSet, Vec<u64>) {
        let mut all: Vec<(u64, Vec<f64>)> = self
            .buffer
            .ids
            .iter()
            .zip(self.buffer.coords.chunks(self.dim))
            .map(|(&i, c)| (i, c.to_vec()))
            .collect();
        for s in self.statics.iter().flatten() {
            let (coords, ids) = s.tree.live_points();
            all.extend(ids.into_iter().zip(coords.chunks(self.dim).map(<[f64]>::to_vec)));
        }
        all.sort_by_key(|e| e.0);
        let ids = all.iter().map(|e| e.0).collect();
        let coords = all.into_iter().flat_map(|e| e.1).collect();
        (PointSet::new(self.dim, coords).expect("stored points are valid"), ids)
    }

    fn rebuild_buffer_tree(&mut self) {
        let pts = PointSet::new(self.dim, self.buffer.coords.clone()).expect("valid buffer");
        self.buffer_tree = StaticTree::build_with_ids(&pts, &self.buffer.ids, self.heuristic);
    }

    /// Inserts a batch; returns the ids assigned to its points (consecutive).
    pub fn insert(&mut self, points: &PointSet) -> Result<std::ops::Range<u64>> {
        if points.dim() != self.dim {
            return Err(Error::invalid(format!(
                "inserting {}-dimensional points into a {}-dimensional tree",
                points.dim(),
                self.dim
            )));
        }
        let start = self.next_id;
        self.next_id += points.len() as u64;
        let batch = Batch {
            coords: points.coords().to_vec(),
            ids: (start..self.next_id).collect(),
        };
        self.insert_batch(batch);
        Ok(start..self.next_id)
    }

    fn insert_batch(&mut self, mut batch: Batch) {
        let (x, d) = (self.cap, self.dim);
        let mut buffer_changed = false;
        // the |P| mod X leading points go to the buffer; a full buffer drains
        // X points back into the batch
        let settle = |batch: &mut Batch, buffer: &mut Batch, changed: &mut bool| {
            let r = batch.len() % x;
            if r > 0 {
                buffer.append(batch.split_off_head(r, d));
                *changed = true;
            }
            if buffer.len() >= x {
                batch.append(buffer.split_off_head(x, d));
                *changed = true;
            }
        };
        settle(&mut batch, &mut self.buffer, &mut buffer_changed);
        let mut mask = self.mask();
        loop {
            let target = mask + (batch.len() / x) as u64;
            let drop = mask & !target;
            if drop == 0 {
                break;
            }
            for i in 0..self.statics.len() {
                if drop >> i & 1 == 1 {
                    let s = self.statics[i].take().expect("bit set");
                    let (coords, ids) = s.tree.live_points();
                    batch.append(Batch { coords, ids });
                }
            }
            mask &= !drop;
            // torn-down trees may have lost points to erases
            settle(&mut batch, &mut self.buffer, &mut buffer_changed);
        }
        let add = (batch.len() / x) as u64;
        debug_assert_eq!(mask & add, 0);
        let mut jobs: Vec<(usize, Batch)> = Vec::new();
        for i in 0..64 {
            if add >> i & 1 == 1 {
                let size = x << i;
                jobs.push((i, batch.split_off_tail(size, d)));
            }
        }
        debug_assert_eq!(batch.len(), 0);
        let heuristic = self.heuristic;
        let built: Vec<(usize, StaticTree)> = jobs
            .into_par_iter()
            .map(|(i, b)| {
                let pts = PointSet::new(d, b.coords).expect("valid batch");
                (i, StaticTree::build_with_ids(&pts, &b.ids, heuristic))
            })
            .collect();
        for (i, tree) in built {
            if self.statics.len() <= i {
                self.statics.resize_with(i + 1, || None);
            }
            self.statics[i] = Some(Static {
                tree,
                bloom: OnceLock::new(),
            });
        }
        while matches!(self.statics.last(), Some(None)) {
            self.statics.pop();
        }
        if buffer_changed {
            self.rebuild_buffer_tree();
        }
    }

    /// Removes every live point equal (coordinate-exact) to a point of `q`.
    /// Trees left with at most half their build size are torn down and their
    /// survivors reinserted.
    pub fn erase(&mut self, q: &PointSet) -> Result<()> {
        if q.dim() != self.dim {
            return Err(Error::invalid("dimension mismatch"));
        }
        if q.is_empty() {
            return Ok(());
        }
        let d = self.dim;
        let mut keys: Vec<&[f64]> = q.iter().collect();
        keys.sort_by(|a, b| cmp_point(a, b));
        let hit = |p: &[f64]| keys.binary_search_by(|k| cmp_point(k, p)).is_ok();
        let before = self.buffer.len();
        let mut kept = Batch::default();
        for (c, &id) in self.buffer.coords.chunks(d).zip(&self.buffer.ids) {
            if !hit(c) {
                kept.coords.extend_from_slice(c);
                kept.ids.push(id);
            }
        }
        let buffer_changed = kept.len() != before;
        self.buffer = kept;

        self.statics.par_iter_mut().flatten().for_each(|s| {
            let bloom = s
                .bloom
                .get_or_init(|| BloomFilter::build(s.tree.store_coords(), d, BLOOM_BITS_PER_KEY, BLOOM_HASHES));
            let coords: Vec<f64> = q
                .iter()
                .filter(|p| bloom.may_contain(p))
                .flatten()
                .copied()
                .collect();
            if !coords.is_empty() {
                let sub = PointSet::new(d, coords).expect("valid query points");
                s.tree.erase(&sub);
            }
        });

        let mut gathered = Batch::default();
        for slot in self.statics.iter_mut() {
            let small = slot
                .as_ref()
                .is_some_and(|s| 2 * s.tree.live() <= s.tree.built_len());
            if small {
                let s = slot.take().expect("checked");
                let (coords, ids) = s.tree.live_points();
                gathered.append(Batch { coords, ids });
            }
        }
        while matches!(self.statics.last(), Some(None)) {
            self.statics.pop();
        }
        if buffer_changed {
            self.rebuild_buffer_tree();
        }
        if gathered.len() > 0 {
            self.insert_batch(gathered);
        }
        Ok(())
    }

    /// The k nearest live points of every query as `(squared distance, id)`,
    /// nearest first. Trees are visited from largest to smallest, each one
    /// over all queries in parallel, sharing one buffer per query.
    pub fn knn(&self, queries: &PointSet, k: usize) -> Result<Vec<Vec<(f64, u64)>>> {
        if k == 0 {
            return Err(Error::invalid("k must be positive"));
        }
        if queries.dim() != self.dim {
            return Err(Error::invalid("dimension mismatch"));
        }
        let mut bufs: Vec<KnnBuffer> = (0..queries.len()).map(|_| KnnBuffer::new(k)).collect();
        for s in self.statics.iter().rev().flatten() {
            s.tree.knn_batch(queries, &mut bufs);
        }
        self.buffer_tree.knn_batch(queries, &mut bufs);
        Ok(bufs.into_par_iter().map(KnnBuffer::extract).collect())
    }

    /// Checks the buffer bound, tree build sizes, the half-capacity rule,
    /// and that the buffer tree mirrors the buffer.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        if self.buffer.len() >= self.cap {
            return Err(format!("buffer holds {} >= {}", self.buffer.len(), self.cap));
        }
        if self.buffer_tree.live() != self.buffer.len() {
            return Err("buffer tree out of sync".into());
        }
        for (i, s) in self.statics.iter().enumerate() {
            if let Some(s) = s {
                if s.tree.built_len() != self.cap << i {
                    return Err(format!("tree {i} built with {} points", s.tree.built_len()));
                }
                if 2 * s.tree.live() <= s.tree.built_len() {
                    return Err(format!("tree {i} is at or below half capacity"));
                }
            }
        }
        Ok(())
    }
}

fn cmp_point(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        // partial_cmp keeps -0.0 == 0.0, matching exact-equality erase
        match x.partial_cmp(y).expect("finite coordinates") {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}
