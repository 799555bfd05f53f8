//! Static kd-tree stored in van Emde Boas order.
//!
//! Construction first partitions the points (fork-join, in place), then
//! assigns every node a slot by the vEB recursion: the top `l_t` levels are
//! laid out first, followed by the `2^l_t` bottom subtrees of `l_b` levels
//! each, where `l_b = hyperceiling(floor((l + 1) / 2))` and `l_t = l - l_b`.
//! Leaves hold up to [`LEAF_CAP`] points in a contiguous range of the point
//! store. Erase only tombstones points and collapses emptied subtrees.

use std::sync::atomic::{AtomicBool, AtomicU32, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::point::{dist_sq, PointSet};

pub const LEAF_CAP: usize = 16;
/// Subtrees with fewer points are built and erased serially.
pub const BUILD_CUTOFF: usize = 1000;

const NIL: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Heuristic {
    /// Split at the point-count median (ties broken by point index).
    #[default]
    ObjectMedian,
    /// Split at the midpoint of the coordinate range.
    SpatialMedian,
}

/// Smallest power of two `>= x`.
pub fn hyperceiling(x: usize) -> Result<usize> {
    if x < 1 {
        return Err(Error::invalid("hyperceiling of 0"));
    }
    Ok(x.next_power_of_two())
}

fn split_levels(l: usize) -> (usize, usize) {
    let lb = l.div_ceil(2).next_power_of_two();
    (l - lb, lb)
}

#[derive(Debug)]
struct Node {
    leaf: bool,
    split_dim: u32,
    split_val: f64,
    left: AtomicU32,
    right: AtomicU32,
    /// Point-store range covered by the subtree.
    start: u32,
    end: u32,
}

/// Read-only view of a node slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NodeView {
    Internal {
        split_dim: usize,
        split_val: f64,
        left: Option<usize>,
        right: Option<usize>,
    },
    Leaf {
        start: usize,
        end: usize,
    },
}

struct Shape {
    start: usize,
    end: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    height: usize,
    slot: u32,
    split: Option<(usize, f64, Box<[Shape; 2]>)>,
}

impl Shape {
    fn truncated_size(&self, l: usize) -> usize {
        match &self.split {
            Some((_, _, ch)) if l > 1 => 1 + ch[0].truncated_size(l - 1) + ch[1].truncated_size(l - 1),
            _ => 1,
        }
    }

    fn at_depth<'a>(&'a mut self, depth: usize, out: &mut Vec<&'a mut Shape>) {
        if depth == 0 {
            out.push(self);
            return;
        }
        if let Some((_, _, ch)) = &mut self.split {
            let [a, b] = &mut **ch;
            a.at_depth(depth - 1, out);
            b.at_depth(depth - 1, out);
        }
    }

    /// Lays out the top `l` levels of this subtree at `base..`; returns the
    /// number of slots used.
    fn assign(&mut self, l: usize, base: usize) -> usize {
        if l == 1 || self.split.is_none() {
            self.slot = base as u32;
            return 1;
        }
        let (lt, lb) = split_levels(l);
        let top = self.assign(lt, base);
        let big = self.end - self.start >= BUILD_CUTOFF;
        let mut bottoms = Vec::new();
        self.at_depth(lt, &mut bottoms);
        let mut offsets = Vec::with_capacity(bottoms.len());
        let mut next = base + top;
        for b in &bottoms {
            offsets.push(next);
            next += b.truncated_size(lb);
        }
        if big {
            bottoms
                .into_par_iter()
                .zip(offsets)
                .for_each(|(b, off)| {
                    b.assign(lb, off);
                });
        } else {
            for (b, off) in bottoms.into_iter().zip(offsets) {
                b.assign(lb, off);
            }
        }
        next - base
    }

    fn emit(&self, out: &mut Vec<(u32, Node, Vec<f64>, Vec<f64>)>) {
        let (leaf, dim, val, l, r) = match &self.split {
            Some((d, v, ch)) => (false, *d as u32, *v, ch[0].slot, ch[1].slot),
            None => (true, 0, 0.0, NIL, NIL),
        };
        out.push((
            self.slot,
            Node {
                leaf,
                split_dim: dim,
                split_val: val,
                left: AtomicU32::new(l),
                right: AtomicU32::new(r),
                start: self.start as u32,
                end: self.end as u32,
            },
            self.lo.clone(),
            self.hi.clone(),
        ));
        if let Some((_, _, ch)) = &self.split {
            if self.end - self.start >= BUILD_CUTOFF {
                let (mut a, mut b) = (Vec::new(), Vec::new());
                rayon::join(|| ch[0].emit(&mut a), || ch[1].emit(&mut b));
                out.extend(a);
                out.extend(b);
            } else {
                ch[0].emit(out);
                ch[1].emit(out);
            }
        }
    }
}

struct Builder<'a> {
    points: &'a PointSet,
    heuristic: Heuristic,
    leaf_cap: usize,
}

impl Builder<'_> {
    fn bbox(&self, perm: &[u32]) -> (Vec<f64>, Vec<f64>) {
        let d = self.points.dim();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for &i in perm {
            for (j, &c) in self.points.point(i as usize).iter().enumerate() {
                lo[j] = lo[j].min(c);
                hi[j] = hi[j].max(c);
            }
        }
        (lo, hi)
    }

    fn object_median(&self, perm: &mut [u32], dim: usize) -> (usize, f64) {
        let m = perm.len() / 2;
        let pts = self.points;
        perm.select_nth_unstable_by(m, |&a, &b| {
            pts.point(a as usize)[dim]
                .total_cmp(&pts.point(b as usize)[dim])
                .then(a.cmp(&b))
        });
        (m, pts.point(perm[m] as usize)[dim])
    }

    fn build(&self, perm: &mut [u32], start: usize, depth: usize) -> Shape {
        let n = perm.len();
        if n <= self.leaf_cap {
            let (lo, hi) = self.bbox(perm);
            return Shape {
                start,
                end: start + n,
                lo,
                hi,
                height: 1,
                slot: NIL,
                split: None,
            };
        }
        let d = self.points.dim();
        let dim = depth % d;
        let (m, val) = match self.heuristic {
            Heuristic::ObjectMedian => self.object_median(perm, dim),
            Heuristic::SpatialMedian => {
                let (lo, hi) = perm.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                    let c = self.points.point(i as usize)[dim];
                    (lo.min(c), hi.max(c))
                });
                let mid = lo + (hi - lo) / 2.0;
                let pts = self.points;
                let mut m = 0;
                for k in 0..n {
                    if pts.point(perm[k] as usize)[dim] < mid {
                        perm.swap(k, m);
                        m += 1;
                    }
                }
                if m == 0 || m == n {
                    self.object_median(perm, dim)
                } else {
                    (m, mid)
                }
            }
        };
        let (left, right) = perm.split_at_mut(m);
        let (a, b) = if n >= BUILD_CUTOFF {
            rayon::join(
                || self.build(left, start, depth + 1),
                || self.build(right, start + m, depth + 1),
            )
        } else {
            (self.build(left, start, depth + 1), self.build(right, start + m, depth + 1))
        };
        let lo = a.lo.iter().zip(&b.lo).map(|(x, y)| x.min(*y)).collect();
        let hi = a.hi.iter().zip(&b.hi).map(|(x, y)| x.max(*y)).collect();
        Shape {
            start,
            end: start + n,
            lo,
            hi,
            height: 1 + a.height.max(b.height),
            slot: NIL,
            split: Some((dim, val, Box::new([a, b]))),
        }
    }
}

/// A kd-tree over a fixed point set. Points carry 64-bit ids.
#[derive(Debug)]
pub struct StaticTree {
    dim: usize,
    heuristic: Heuristic,
    nodes: Vec<Node>,
    /// `2 * dim` floats per slot: lower corner then upper corner.
    boxes: Vec<f64>,
    coords: Vec<f64>,
    ids: Vec<u64>,
    dead: Vec<AtomicBool>,
    root: u32,
    live: usize,
}

impl StaticTree {
    /// Builds over `points` with ids `0..n`.
    pub fn build(points: &PointSet, heuristic: Heuristic) -> StaticTree {
        let ids: Vec<u64> = (0..points.len() as u64).collect();
        Self::build_with(points, &ids, heuristic, LEAF_CAP)
    }

    pub fn build_with_ids(points: &PointSet, ids: &[u64], heuristic: Heuristic) -> StaticTree {
        Self::build_with(points, ids, heuristic, LEAF_CAP)
    }

    pub fn build_with(points: &PointSet, ids: &[u64], heuristic: Heuristic, leaf_cap: usize) -> StaticTree {
        assert_eq!(points.len(), ids.len(), "one id per point");
        assert!(points.len() < NIL as usize, "too many points");
        let d = points.dim();
        let n = points.len();
        if n == 0 {
            return StaticTree {
                dim: d,
                heuristic,
                nodes: Vec::new(),
                boxes: Vec::new(),
                coords: Vec::new(),
                ids: Vec::new(),
                dead: Vec::new(),
                root: NIL,
                live: 0,
            };
        }
        let mut perm: Vec<u32> = (0..n as u32).collect();
        let builder = Builder {
            points,
            heuristic,
            leaf_cap: leaf_cap.max(1),
        };
        let mut shape = builder.build(&mut perm, 0, 0);
        let height = shape.height;
        let slots = shape.assign(height, 0);
        let mut recs = Vec::with_capacity(slots);
        shape.emit(&mut recs);
        recs.par_sort_unstable_by_key(|r| r.0);
        debug_assert!(recs.iter().enumerate().all(|(i, r)| r.0 as usize == i));
        let mut boxes = Vec::with_capacity(slots * 2 * d);
        let mut nodes = Vec::with_capacity(slots);
        for (_, node, lo, hi) in recs {
            nodes.push(node);
            boxes.extend(lo);
            boxes.extend(hi);
        }
        let coords: Vec<f64> = perm
            .par_iter()
            .flat_map_iter(|&i| points.point(i as usize).iter().copied())
            .collect();
        let ids: Vec<u64> = perm.iter().map(|&i| ids[i as usize]).collect();
        StaticTree {
            dim: d,
            heuristic,
            nodes,
            boxes,
            coords,
            dead: (0..n).map(|_| AtomicBool::new(false)).collect(),
            ids,
            root: 0,
            live: n,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn heuristic(&self) -> Heuristic {
        self.heuristic
    }

    /// Points the tree was built over.
    pub fn built_len(&self) -> usize {
        self.ids.len()
    }

    /// Points not tombstoned.
    pub fn live(&self) -> usize {
        self.live
    }

    pub fn is_empty(&self) -> bool {
        self.root == NIL
    }

    pub fn slot_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn root(&self) -> Option<usize> {
        (self.root != NIL).then_some(self.root as usize)
    }

    pub fn node(&self, slot: usize) -> NodeView {
        let n = &self.nodes[slot];
        let link = |a: &AtomicU32| {
            let v = a.load(Ordering::Relaxed);
            (v != NIL).then_some(v as usize)
        };
        if n.leaf {
            NodeView::Leaf {
                start: n.start as usize,
                end: n.end as usize,
            }
        } else {
            NodeView::Internal {
                split_dim: n.split_dim as usize,
                split_val: n.split_val,
                left: link(&n.left),
                right: link(&n.right),
            }
        }
    }

    /// Store range `[start, end)` covered by the subtree at `slot`.
    pub fn range(&self, slot: usize) -> (usize, usize) {
        let n = &self.nodes[slot];
        (n.start as usize, n.end as usize)
    }

    #[inline]
    pub fn store_point(&self, pos: usize) -> &[f64] {
        &self.coords[pos * self.dim..(pos + 1) * self.dim]
    }

    #[inline]
    pub fn store_id(&self, pos: usize) -> u64 {
        self.ids[pos]
    }

    #[inline]
    pub fn is_dead(&self, pos: usize) -> bool {
        self.dead[pos].load(Ordering::Relaxed)
    }

    /// Live points and their ids, in store order.
    pub fn live_points(&self) -> (Vec<f64>, Vec<u64>) {
        let mut coords = Vec::with_capacity(self.live * self.dim);
        let mut ids = Vec::with_capacity(self.live);
        for pos in 0..self.ids.len() {
            if !self.is_dead(pos) {
                coords.extend_from_slice(self.store_point(pos));
                ids.push(self.ids[pos]);
            }
        }
        (coords, ids)
    }

    /// All stored points including tombstoned ones.
    pub fn store_coords(&self) -> &[f64] {
        &self.coords
    }

    fn bbox(&self, slot: u32) -> (&[f64], &[f64]) {
        let d = self.dim;
        let b = &self.boxes[slot as usize * 2 * d..(slot as usize + 1) * 2 * d];
        b.split_at(d)
    }

    /// Tombstones every stored point equal to a point of `q` and collapses
    /// emptied subtrees. Returns the new root slot.
    pub fn erase(&mut self, q: &PointSet) -> Option<usize> {
        if self.root == NIL || q.is_empty() {
            return self.root();
        }
        assert_eq!(q.dim(), self.dim, "dimension mismatch");
        let batch: Vec<u32> = (0..q.len() as u32).collect();
        let (root, erased) = self.erase_rec(self.root, q, batch);
        self.root = root;
        self.live -= erased;
        self.root()
    }

    /// Returns the surviving subtree root (or `NIL`) and the erased count.
    fn erase_rec(&self, slot: u32, q: &PointSet, batch: Vec<u32>) -> (u32, usize) {
        let node = &self.nodes[slot as usize];
        if node.leaf {
            let mut erased = 0;
            let mut alive = 0;
            for pos in node.start as usize..node.end as usize {
                if self.is_dead(pos) {
                    continue;
                }
                let p = self.store_point(pos);
                if batch.iter().any(|&b| q.point(b as usize) == p) {
                    self.dead[pos].store(true, Ordering::Relaxed);
                    erased += 1;
                } else {
                    alive += 1;
                }
            }
            return (if alive == 0 { NIL } else { slot }, erased);
        }
        let (dim, val) = (node.split_dim as usize, node.split_val);
        let ql: Vec<u32> = batch.iter().copied().filter(|&b| q.point(b as usize)[dim] <= val).collect();
        let qr: Vec<u32> = batch.into_iter().filter(|&b| q.point(b as usize)[dim] >= val).collect();
        let (l, r) = (node.left.load(Ordering::Relaxed), node.right.load(Ordering::Relaxed));
        let go = |child: u32, part: Vec<u32>| -> (u32, usize) {
            if part.is_empty() {
                (child, 0)
            } else {
                self.erase_rec(child, q, part)
            }
        };
        let ((nl, el), (nr, er)) = if (node.end - node.start) as usize >= BUILD_CUTOFF {
            rayon::join(|| go(l, ql), || go(r, qr))
        } else {
            (go(l, ql), go(r, qr))
        };
        node.left.store(nl, Ordering::Relaxed);
        node.right.store(nr, Ordering::Relaxed);
        let out = match (nl == NIL, nr == NIL) {
            (true, true) => NIL,
            (true, false) => nr,
            (false, true) => nl,
            (false, false) => slot,
        };
        (out, el + er)
    }

    fn add_all(&self, slot: u32, query: &[f64], buf: &mut KnnBuffer) {
        let node = &self.nodes[slot as usize];
        for pos in node.start as usize..node.end as usize {
            if !self.is_dead(pos) {
                buf.insert(self.ids[pos], dist_sq(self.store_point(pos), query));
            }
        }
    }

    fn box_dist(&self, slot: u32, q: &[f64]) -> (f64, f64) {
        let (lo, hi) = self.bbox(slot);
        let (mut near, mut far) = (0.0, 0.0);
        for j in 0..self.dim {
            let dn = if q[j] < lo[j] {
                lo[j] - q[j]
            } else if q[j] > hi[j] {
                q[j] - hi[j]
            } else {
                0.0
            };
            let df = (q[j] - lo[j]).abs().max((hi[j] - q[j]).abs());
            near += dn * dn;
            far += df * df;
        }
        (near, far)
    }

    /// Visits `slot` given a full buffer: prune, take whole, or recurse.
    fn visit(&self, slot: u32, q: &[f64], buf: &mut KnnBuffer) {
        if buf.len() < buf.k() {
            self.add_all(slot, q, buf);
            return;
        }
        let bound = buf.bound().expect("full buffer").0;
        let (near, far) = self.box_dist(slot, q);
        if near > bound {
            return;
        }
        if far < bound {
            self.add_all(slot, q, buf);
            return;
        }
        let node = &self.nodes[slot as usize];
        if node.leaf {
            self.add_all(slot, q, buf);
            return;
        }
        let (l, r) = (node.left.load(Ordering::Relaxed), node.right.load(Ordering::Relaxed));
        let (first, second) = if q[node.split_dim as usize] <= node.split_val { (l, r) } else { (r, l) };
        self.visit(first, q, buf);
        self.visit(second, q, buf);
    }

    /// Adds this tree's k nearest live points to `buf` (which may already
    /// hold candidates from other trees).
    pub fn knn(&self, q: &[f64], buf: &mut KnnBuffer) {
        if self.root == NIL {
            return;
        }
        assert_eq!(q.len(), self.dim, "dimension mismatch");
        let mut path = Vec::new();
        let mut cur = self.root;
        loop {
            let node = &self.nodes[cur as usize];
            if node.leaf {
                break;
            }
            let (l, r) = (node.left.load(Ordering::Relaxed), node.right.load(Ordering::Relaxed));
            let (near, far) = if q[node.split_dim as usize] <= node.split_val { (l, r) } else { (r, l) };
            path.push(far);
            cur = near;
        }
        self.add_all(cur, q, buf);
        while let Some(sibling) = path.pop() {
            self.visit(sibling, q, buf);
        }
    }

    /// One query per buffer, queries in parallel.
    pub fn knn_batch(&self, queries: &PointSet, bufs: &mut [KnnBuffer]) {
        assert_eq!(queries.len(), bufs.len(), "one buffer per query");
        if self.root == NIL {
            return;
        }
        bufs.par_iter_mut()
            .enumerate()
            .with_min_len(64)
            .for_each(|(i, buf)| self.knn(queries.point(i), buf));
    }

    /// Checks kd-order at every reachable internal node, that every reachable
    /// internal node has two live children, leaf sizes, and the live count.
    pub fn check_invariants(&self, leaf_cap: usize) -> std::result::Result<(), String> {
        let Some(root) = self.root() else {
            return if self.live == 0 { Ok(()) } else { Err("empty root with live points".into()) };
        };
        let mut stack = vec![root];
        let mut live = 0;
        while let Some(s) = stack.pop() {
            match self.node(s) {
                NodeView::Leaf { start, end } => {
                    if end - start > leaf_cap {
                        return Err(format!("leaf {s} holds {} points", end - start));
                    }
                    let alive = (start..end).filter(|&p| !self.is_dead(p)).count();
                    if alive == 0 {
                        return Err(format!("reachable leaf {s} is empty"));
                    }
                    live += alive;
                }
                NodeView::Internal { split_dim, split_val, left, right } => {
                    let (Some(l), Some(r)) = (left, right) else {
                        return Err(format!("internal node {s} lacks a child"));
                    };
                    for (child, left_side) in [(l, true), (r, false)] {
                        let (a, b) = self.range(child);
                        for p in a..b {
                            let c = self.store_point(p)[split_dim];
                            let ok = if left_side { c <= split_val } else { c >= split_val };
                            if !ok {
                                return Err(format!("node {s}: point {p} on the wrong side"));
                            }
                        }
                    }
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
        if live != self.live {
            return Err(format!("{} reachable live points, recorded {}", live, self.live));
        }
        Ok(())
    }
}

/// Accumulates candidate neighbors in `2k` slots; when full, a selection
/// keeps the `k` best. Entries are ordered by `(distance, id)`.
#[derive(Clone, Debug)]
pub struct KnnBuffer {
    k: usize,
    entries: Vec<(f64, u64)>,
    bound: Option<(f64, u64)>,
    fresh: bool,
    compactions: usize,
}

fn entry_cmp(a: &(f64, u64), b: &(f64, u64)) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

impl KnnBuffer {
    pub fn new(k: usize) -> Self {
        assert!(k >= 1, "k must be positive");
        KnnBuffer {
            k,
            entries: Vec::with_capacity(2 * k),
            bound: None,
            fresh: true,
            compactions: 0,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Compactions triggered by a full buffer.
    pub fn compactions(&self) -> usize {
        self.compactions
    }

    fn select(&mut self) {
        let k = self.k;
        if self.entries.len() > k {
            self.entries.select_nth_unstable_by(k - 1, entry_cmp);
            self.entries.truncate(k);
        }
        if self.entries.len() == k {
            let worst = *self.entries.iter().max_by(|a, b| entry_cmp(a, b)).expect("k entries");
            self.bound = Some(worst);
        }
        self.fresh = true;
    }

    /// Squared distance in, `id` the point id.
    #[inline]
    pub fn insert(&mut self, id: u64, dist_sq: f64) {
        let e = (dist_sq, id);
        if let Some(b) = self.bound {
            if entry_cmp(&e, &b).is_gt() {
                return;
            }
        }
        self.entries.push(e);
        self.fresh = false;
        if self.entries.len() == 2 * self.k {
            self.compactions += 1;
            self.select();
        }
    }

    /// The k-th best `(squared distance, id)` seen so far, once at least k
    /// entries have been inserted.
    pub fn bound(&mut self) -> Option<(f64, u64)> {
        if !self.fresh && self.entries.len() >= self.k {
            self.select();
        }
        self.bound
    }

    /// Up to k best entries, nearest first.
    pub fn extract(mut self) -> Vec<(f64, u64)> {
        self.select();
        self.entries.sort_by(entry_cmp);
        self.entries
    }
}
