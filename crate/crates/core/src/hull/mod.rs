//! Convex hulls in 2D and 3D.
//!
//! All 3D algorithms share [`IncrementalHull`], a facet mesh with per-facet
//! point buckets and priority-write reservations. Policies differ only in how
//! each round picks its batch of points.

mod divide;
mod engine;
mod hull2d;
mod pseudohull;

use rayon::prelude::*;

use crate::error::Result;
use crate::random::{random_permutation, Rng};

pub use divide::hull_divide_conquer;
pub use engine::{Facet, HullStats, IncrementalHull, Policy, VisibleRegion, FALLBACK_FACETS};
pub use hull2d::hull2d_quickhull;
pub use pseudohull::{pseudohull_cull, PSEUDOHULL_THRESHOLD};

/// Points per processor per round.
pub const BATCH_FACTOR: usize = 4;

/// A finished hull. Ids refer to the caller's input.
#[derive(Clone, Debug, PartialEq)]
pub struct HullMesh<const D: usize> {
    /// Outward-oriented facets (counter-clockwise seen from outside in 3D,
    /// directed counter-clockwise edges in 2D).
    pub facets: Vec<[usize; D]>,
    /// Sorted, distinct hull vertex ids.
    pub vertices: Vec<usize>,
    pub stats: HullStats,
}

impl HullMesh<2> {
    /// Vertices in counter-clockwise order starting at the smallest id.
    pub fn cycle(&self) -> Vec<usize> {
        let next: std::collections::HashMap<usize, usize> =
            self.facets.iter().map(|e| (e[0], e[1])).collect();
        let Some(&start) = self.vertices.first() else {
            return Vec::new();
        };
        let mut out = vec![start];
        let mut cur = next[&start];
        while cur != start && out.len() <= self.vertices.len() {
            out.push(cur);
            cur = next[&cur];
        }
        out
    }
}

fn finish<const D: usize>(hull: &IncrementalHull<D>, ids: Option<&[usize]>) -> HullMesh<D> {
    let map = |v: u32| ids.map_or(v as usize, |ids| ids[v as usize]);
    let facets: Vec<[usize; D]> = hull
        .live_facet_vertices()
        .into_iter()
        .map(|f| f.map(map))
        .collect();
    let mut vertices: Vec<usize> = facets.iter().flatten().copied().collect();
    vertices.par_sort_unstable();
    vertices.dedup();
    HullMesh {
        facets,
        vertices,
        stats: hull.stats(),
    }
}

/// Options shared by the hull drivers.
#[derive(Clone, Copy, Debug)]
pub struct HullOptions {
    /// Batch size per round is `batch_factor * rayon::current_num_threads()`.
    pub batch_factor: usize,
    /// Check mesh invariants after every round.
    pub verify_rounds: bool,
}

impl Default for HullOptions {
    fn default() -> Self {
        HullOptions {
            batch_factor: BATCH_FACTOR,
            verify_rounds: false,
        }
    }
}

/// Runs `policy` on `points`, which are relabeled by `ids` in the output.
pub fn run_policy<const D: usize>(
    points: Vec<[f64; D]>,
    ids: Option<&[usize]>,
    policy: Policy,
    verify_rounds: bool,
) -> Result<HullMesh<D>> {
    let mut hull = IncrementalHull::<D>::init_simplex(points)?;
    hull.set_verify_rounds(verify_rounds);
    hull.run(policy)?;
    Ok(finish(&hull, ids))
}

/// Randomized incremental hull: points are inserted in random order, a batch
/// of the earliest remaining points per round.
pub fn randinc<const D: usize>(points: &[[f64; D]], rng: &mut Rng, opts: HullOptions) -> Result<HullMesh<D>> {
    let perm = random_permutation(points.len(), rng);
    let permuted: Vec<[f64; D]> = perm.iter().map(|&i| points[i]).collect();
    run_policy(
        permuted,
        Some(&perm),
        Policy::RandInc {
            c: opts.batch_factor,
        },
        opts.verify_rounds,
    )
}

/// Parallel quickhull: each round processes the furthest points of the
/// facets with the largest buckets.
pub fn quickhull<const D: usize>(points: &[[f64; D]], opts: HullOptions) -> Result<HullMesh<D>> {
    run_policy(
        points.to_vec(),
        None,
        Policy::QuickHull {
            c: opts.batch_factor,
        },
        opts.verify_rounds,
    )
}

/// One furthest point per round, no reservations.
pub fn serial_quickhull<const D: usize>(points: &[[f64; D]]) -> Result<HullMesh<D>> {
    run_policy(points.to_vec(), None, Policy::Serial, false)
}

pub fn hull3d_randinc(points: &[[f64; 3]], rng: &mut Rng, c: usize) -> Result<HullMesh<3>> {
    let opts = HullOptions {
        batch_factor: c,
        ..Default::default()
    };
    randinc(points, rng, opts)
}

pub fn hull3d_quickhull(points: &[[f64; 3]], c: usize) -> Result<HullMesh<3>> {
    let opts = HullOptions {
        batch_factor: c,
        ..Default::default()
    };
    quickhull(points, opts)
}

pub fn hull3d_serial_quickhull(points: &[[f64; 3]]) -> Result<HullMesh<3>> {
    serial_quickhull(points)
}

/// Culls with a pseudohull, then runs the reservation quickhull on the
/// survivors.
pub fn hull3d_pseudo(points: &[[f64; 3]], threshold: usize) -> Result<HullMesh<3>> {
    let kept = pseudohull_cull(points, threshold)?;
    let sub: Vec<[f64; 3]> = kept.iter().map(|&i| points[i]).collect();
    run_policy(sub, Some(&kept), Policy::QuickHull { c: BATCH_FACTOR }, false)
}

/// Hull of a 2D point set through the reservation engine, as an edge mesh.
pub fn hull2d_randinc(points: &[[f64; 2]], rng: &mut Rng) -> Result<HullMesh<2>> {
    randinc(points, rng, HullOptions::default())
}
