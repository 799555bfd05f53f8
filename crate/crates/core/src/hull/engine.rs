//! Reservation-based incremental hull over facets of dimension `D - 1`.
//!
//! A facet stores `D` vertex ids and `D` neighbor links; `neighbors[i]` is the
//! facet across the ridge that excludes `vertices[i]`. In 3D facets are
//! triangles and ridges are edges, in 2D facets are directed edges and
//! ridges are their endpoints. Every facet is oriented so that the fixed
//! interior point lies on its negative side.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::parallel::{argmax_range, parallel_pack, PriorityCell, SERIAL_CUTOFF};
use crate::predicates::{cross3, dot3, orient_eps, sub3};

pub(crate) const NONE: u32 = u32::MAX;

/// Below this many live facets each round processes a single point.
pub const FALLBACK_FACETS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Policy {
    /// Rounds take a prefix of `c * numProc` of the remaining visible points
    /// in (already permuted) id order.
    RandInc { c: usize },
    /// Rounds take the furthest point of up to `c * numProc` facets, largest
    /// buckets first.
    QuickHull { c: usize },
    /// One furthest point per round without reservations.
    Serial,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct HullStats {
    pub rounds: usize,
    /// Point assignments to buckets plus batch selections.
    pub point_touches: usize,
    /// Facets visited by visibility searches plus facets created.
    pub facet_touches: usize,
    pub reservation_failures: usize,
    pub fallback_rounds: usize,
}

pub struct Facet<const D: usize> {
    pub vertices: [u32; D],
    pub neighbors: [u32; D],
    normal: [f64; D],
    offset: f64,
    reservation: PriorityCell,
    bucket: Vec<u32>,
    apex: u32,
    apex_dist: f64,
    alive: bool,
}

impl<const D: usize> Facet<D> {
    pub fn alive(&self) -> bool {
        self.alive
    }

    pub fn bucket(&self) -> &[u32] {
        &self.bucket
    }

    #[inline]
    fn height(&self, p: &[f64; D]) -> f64 {
        self.normal.iter().zip(p).fold(-self.offset, |s, (n, x)| s + n * x)
    }
}

/// Outward normal and offset of the hyperplane through `v`, such that
/// `normal . p - offset` is the orientation determinant of `p`.
fn plane<const D: usize>(v: [&[f64; D]; D]) -> ([f64; D], f64) {
    let mut n = [0.0; D];
    match D {
        2 => {
            n[0] = v[1][1] - v[0][1];
            n[1] = -(v[1][0] - v[0][0]);
        }
        3 => {
            let u = [v[1][0] - v[0][0], v[1][1] - v[0][1], v[1][2] - v[0][2]];
            let w = [v[2][0] - v[0][0], v[2][1] - v[0][1], v[2][2] - v[0][2]];
            n[0] = u[1] * w[2] - u[2] * w[1];
            n[1] = u[2] * w[0] - u[0] * w[2];
            n[2] = u[0] * w[1] - u[1] * w[0];
        }
        _ => unreachable!("hulls are 2D or 3D"),
    }
    let offset = (0..D).map(|k| n[k] * v[0][k]).sum();
    (n, offset)
}

/// The maximal connected set of facets visible from a point, its horizon
/// ridges and the non-visible facets across them.
#[derive(Clone, Debug, Default)]
pub struct VisibleRegion {
    pub facets: Vec<u32>,
    /// `(visible facet, slot)` pairs whose neighbor across `slot` is not visible.
    pub horizon: Vec<(u32, usize)>,
    pub frontier: Vec<u32>,
}

#[derive(Clone, Copy, Debug)]
enum Link {
    Outer { facet: u32, slot: usize },
    New(usize),
}

struct NewFacet<const D: usize> {
    vertices: [u32; D],
    links: [Link; D],
    normal: [f64; D],
    offset: f64,
    bucket: Vec<u32>,
    apex: u32,
    apex_dist: f64,
}

struct Plan<const D: usize> {
    point: u32,
    dead: Vec<u32>,
    new: Vec<NewFacet<D>>,
    dropped: Vec<u32>,
    touched: usize,
}

pub struct IncrementalHull<const D: usize> {
    points: Vec<[f64; D]>,
    eps: f64,
    interior: [f64; D],
    facets: Vec<Facet<D>>,
    point_facet: Vec<u32>,
    simplex: Vec<u32>,
    live: usize,
    open: Vec<u32>,
    stats: HullStats,
    verify_rounds: bool,
}

/// Picks `D + 1` affinely independent points from extreme candidates.
pub(crate) fn choose_simplex<const D: usize>(points: &[[f64; D]], eps: f64) -> Result<Vec<u32>> {
    let n = points.len();
    if n < D + 1 {
        return Err(Error::invalid(format!(
            "a {D}D hull needs at least {} points, got {n}",
            D + 1
        )));
    }
    let a = (0..n)
        .into_par_iter()
        .min_by(|&i, &j| {
            let (p, q) = (&points[i], &points[j]);
            p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1])).then(i.cmp(&j))
        })
        .expect("nonempty");
    let pa = points[a];
    let d2 = |i: usize| (0..D).map(|k| (points[i][k] - pa[k]).powi(2)).sum::<f64>();
    let (b, db) = argmax_range(n, d2).expect("nonempty");
    if db == 0.0 {
        return Err(Error::degenerate("all points coincide", vec![a]));
    }
    let pb = points[b];
    if D == 2 {
        let area = |i: usize| {
            let p = &points[i];
            ((pb[0] - pa[0]) * (p[1] - pa[1]) - (pb[1] - pa[1]) * (p[0] - pa[0])).abs()
        };
        let (c, ac) = argmax_range(n, area).expect("nonempty");
        if ac <= eps {
            // the far end of the segment from b
            let pb2 = pb;
            let (other, _) = argmax_range(n, |i| {
                (0..D).map(|k| (points[i][k] - pb2[k]).powi(2)).sum::<f64>()
            })
            .expect("nonempty");
            let mut ext = vec![b, other];
            ext.sort_unstable();
            return Err(Error::degenerate("all points are collinear", ext));
        }
        return Ok(vec![a as u32, b as u32, c as u32]);
    }
    let p3 = |i: usize| [points[i][0], points[i][1], points[i][2]];
    let (a3, b3) = (p3(a), p3(b));
    let ab = sub3(&b3, &a3);
    let line = |i: usize| {
        let c = cross3(&sub3(&p3(i), &a3), &ab);
        dot3(&c, &c)
    };
    let (c, _) = argmax_range(n, line).expect("nonempty");
    let normal = cross3(&ab, &sub3(&p3(c), &a3));
    let vol = |i: usize| dot3(&normal, &sub3(&p3(i), &a3)).abs();
    let (d, vd) = argmax_range(n, vol).expect("nonempty");
    if vd <= eps {
        let mut ext = vec![a, b, c];
        ext.sort_unstable();
        ext.dedup();
        return Err(Error::degenerate("all points are coplanar", ext));
    }
    Ok(vec![a as u32, b as u32, c as u32, d as u32])
}

impl<const D: usize> IncrementalHull<D> {
    /// Builds the initial simplex and distributes every other point to the
    /// first simplex facet it sees. Points inside the simplex are discarded.
    pub fn init_simplex(points: Vec<[f64; D]>) -> Result<Self> {
        assert!(D == 2 || D == 3, "hulls are 2D or 3D");
        if points.len() >= NONE as usize {
            return Err(Error::invalid("too many points"));
        }
        let max_abs = points
            .iter()
            .flatten()
            .fold(0.0_f64, |m, c| m.max(c.abs()));
        let eps = orient_eps(max_abs, D);
        let simplex = choose_simplex(&points, eps)?;
        let mut interior = [0.0; D];
        for &s in &simplex {
            for k in 0..D {
                interior[k] += points[s as usize][k] / (D + 1) as f64;
            }
        }
        let mut hull = IncrementalHull {
            point_facet: vec![NONE; points.len()],
            points,
            eps,
            interior,
            facets: Vec::new(),
            simplex: simplex.clone(),
            live: 0,
            open: Vec::new(),
            stats: HullStats::default(),
            verify_rounds: false,
        };
        // facet i omits simplex vertex i; its neighbor across the ridge that
        // omits simplex vertex x is facet x
        for i in 0..=D {
            let mut members: Vec<usize> = (0..=D).filter(|&x| x != i).collect();
            let mut vertices = [0u32; D];
            for (slot, &x) in members.iter().enumerate() {
                vertices[slot] = simplex[x];
            }
            let (normal, offset) = hull.plane_of(&vertices);
            let inside = (0..D).map(|k| normal[k] * interior[k]).sum::<f64>() - offset;
            if inside > 0.0 {
                vertices.swap(0, 1);
                members.swap(0, 1);
            }
            let (normal, offset) = hull.plane_of(&vertices);
            let mut neighbors = [0u32; D];
            for (slot, &x) in members.iter().enumerate() {
                neighbors[slot] = x as u32;
            }
            hull.facets.push(Facet {
                vertices,
                neighbors,
                normal,
                offset,
                reservation: PriorityCell::new(),
                bucket: Vec::new(),
                apex: NONE,
                apex_dist: 0.0,
                alive: true,
            });
        }
        hull.live = D + 1;

        let n = hull.points.len();
        let assign = |p: usize| -> Option<(u32, f64)> {
            if simplex.contains(&(p as u32)) {
                return None;
            }
            (0..=D).find_map(|f| {
                let h = hull.facets[f].height(&hull.points[p]);
                (h > hull.eps).then_some((f as u32, h))
            })
        };
        let assigned: Vec<Option<(u32, f64)>> = if n < SERIAL_CUTOFF {
            (0..n).map(assign).collect()
        } else {
            (0..n).into_par_iter().map(assign).collect()
        };
        for (p, a) in assigned.into_iter().enumerate() {
            if let Some((f, h)) = a {
                hull.stats.point_touches += 1;
                let facet = &mut hull.facets[f as usize];
                facet.bucket.push(p as u32);
                if h > facet.apex_dist {
                    facet.apex = p as u32;
                    facet.apex_dist = h;
                }
                hull.point_facet[p] = f;
            }
        }
        hull.open = (0..=D as u32).collect();
        Ok(hull)
    }

    /// Asserts the mesh invariants after every round (costs O(n) per round).
    pub fn set_verify_rounds(&mut self, on: bool) {
        self.verify_rounds = on;
    }

    fn plane_of(&self, v: &[u32; D]) -> ([f64; D], f64) {
        let refs: [&[f64; D]; D] = std::array::from_fn(|k| &self.points[v[k] as usize]);
        plane(refs)
    }

    pub fn points(&self) -> &[[f64; D]] {
        &self.points
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn interior(&self) -> [f64; D] {
        self.interior
    }

    pub fn stats(&self) -> HullStats {
        self.stats
    }

    pub fn facets(&self) -> &[Facet<D>] {
        &self.facets
    }

    pub fn simplex(&self) -> &[u32] {
        &self.simplex
    }

    pub fn live_facets(&self) -> usize {
        self.live
    }

    /// Facet whose bucket holds `point`, if the point is still outside.
    pub fn seed_facet(&self, point: u32) -> Option<u32> {
        let f = self.point_facet[point as usize];
        (f != NONE).then_some(f)
    }

    /// Signed height of `point` over facet `f` (positive means visible).
    pub fn height(&self, f: u32, point: u32) -> f64 {
        self.facets[f as usize].height(&self.points[point as usize])
    }

    #[inline]
    fn sees(&self, f: u32, point: u32) -> bool {
        self.height(f, point) > self.eps
    }

    /// Points that are still outside the current hull.
    pub fn visible_points(&self) -> Vec<u32> {
        (0..self.points.len() as u32)
            .filter(|&p| self.point_facet[p as usize] != NONE)
            .collect()
    }

    /// Breadth-first search over visible facets starting at the point's seed
    /// facet.
    pub fn visible_facets(&self, point: u32) -> Result<VisibleRegion> {
        let seed = self.point_facet[point as usize];
        if seed == NONE
            || !self.facets[seed as usize].alive
            || !self.sees(seed, point)
        {
            return Err(Error::Internal(format!(
                "point {point} has no live visible seed facet"
            )));
        }
        let mut region = VisibleRegion {
            facets: vec![seed],
            ..Default::default()
        };
        let mut head = 0;
        while head < region.facets.len() {
            let f = region.facets[head];
            head += 1;
            for slot in 0..D {
                let g = self.facets[f as usize].neighbors[slot];
                if region.facets.contains(&g) {
                    continue;
                }
                if self.sees(g, point) {
                    region.facets.push(g);
                } else {
                    region.horizon.push((f, slot));
                    if !region.frontier.contains(&g) {
                        region.frontier.push(g);
                    }
                }
            }
        }
        Ok(region)
    }

    /// Two-phase reservation. Every batch point priority-writes its id into
    /// its visible facets and the facets across its horizon; a point
    /// succeeds iff it owns all of them, so smaller ids win conflicts.
    /// Reservations are cleared before returning.
    pub fn reserve_round(&self, batch: &[u32], regions: &[VisibleRegion]) -> Vec<bool> {
        let claimed = |r: &VisibleRegion| r.facets.iter().chain(&r.frontier).copied().collect::<Vec<u32>>();
        regions.par_iter().zip(batch).for_each(|(r, &q)| {
            for f in claimed(r) {
                self.facets[f as usize].reservation.write_min(q as usize);
            }
        });
        let success: Vec<bool> = regions
            .par_iter()
            .zip(batch)
            .map(|(r, &q)| {
                claimed(r)
                    .into_iter()
                    .all(|f| self.facets[f as usize].reservation.get() == q as usize)
            })
            .collect();
        regions.par_iter().for_each(|r| {
            for f in claimed(r) {
                self.facets[f as usize].reservation.reset();
            }
        });
        success
    }

    fn plan(&self, point: u32, region: &VisibleRegion) -> Result<Plan<D>> {
        let mut new: Vec<NewFacet<D>> = Vec::with_capacity(region.horizon.len());
        for &(f, slot) in &region.horizon {
            let dead = &self.facets[f as usize];
            let mut vertices = dead.vertices;
            vertices[slot] = point;
            let outer = dead.neighbors[slot];
            let back = self.facets[outer as usize]
                .neighbors
                .iter()
                .position(|&x| x == f)
                .ok_or_else(|| Error::Internal(format!("facet {outer} does not link back to {f}")))?;
            let mut links = [Link::New(usize::MAX); D];
            links[slot] = Link::Outer {
                facet: outer,
                slot: back,
            };
            let (normal, offset) = self.plane_of(&vertices);
            new.push(NewFacet {
                vertices,
                links,
                normal,
                offset,
                bucket: Vec::new(),
                apex: NONE,
                apex_dist: 0.0,
            });
        }
        // pair up the ridges through the new apex: the ridge of new facet k
        // opposite vertex m is keyed by its non-apex vertex (none in 2D)
        let mut keys: Vec<(u32, usize, usize)> = Vec::with_capacity(new.len() * (D - 1));
        for (k, (nf, &(_, slot))) in new.iter().zip(&region.horizon).enumerate() {
            for m in 0..D {
                if m == slot {
                    continue;
                }
                let key = (0..D)
                    .find(|&x| x != m && x != slot)
                    .map_or(NONE, |x| nf.vertices[x]);
                keys.push((key, k, m));
            }
        }
        keys.sort_unstable();
        if !keys.len().is_multiple_of(2) {
            return Err(Error::Internal(format!("open horizon around point {point}")));
        }
        for pair in keys.chunks_exact(2) {
            let ((ka, fa, ma), (kb, fb, mb)) = (pair[0], pair[1]);
            if ka != kb || fa == fb {
                return Err(Error::Internal(format!(
                    "horizon of point {point} is not a simple cycle"
                )));
            }
            new[fa].links[ma] = Link::New(fb);
            new[fb].links[mb] = Link::New(fa);
        }

        let gathered: Vec<u32> = region
            .facets
            .iter()
            .flat_map(|&f| self.facets[f as usize].bucket.iter().copied())
            .filter(|&p| p != point)
            .collect();
        let eps = self.eps;
        let place = |&p: &u32| -> Option<(usize, f64)> {
            let q = &self.points[p as usize];
            new.iter().enumerate().find_map(|(k, nf)| {
                let h = (0..D).map(|x| nf.normal[x] * q[x]).sum::<f64>() - nf.offset;
                (h > eps).then_some((k, h))
            })
        };
        let placed: Vec<Option<(usize, f64)>> = if gathered.len() < SERIAL_CUTOFF {
            gathered.iter().map(place).collect()
        } else {
            gathered.par_iter().map(place).collect()
        };
        let mut dropped = Vec::new();
        for (&p, slot) in gathered.iter().zip(placed) {
            match slot {
                Some((k, h)) => {
                    let nf = &mut new[k];
                    nf.bucket.push(p);
                    if h > nf.apex_dist || (h == nf.apex_dist && p < nf.apex) {
                        nf.apex = p;
                        nf.apex_dist = h;
                    }
                }
                None => dropped.push(p),
            }
        }
        Ok(Plan {
            point,
            dead: region.facets.clone(),
            new,
            dropped,
            touched: gathered.len(),
        })
    }

    fn apply(&mut self, plan: Plan<D>) {
        let base = self.facets.len() as u32;
        for &f in &plan.dead {
            let facet = &mut self.facets[f as usize];
            facet.alive = false;
            facet.bucket = Vec::new();
        }
        self.live -= plan.dead.len();
        self.live += plan.new.len();
        self.stats.point_touches += plan.touched;
        self.stats.facet_touches += plan.new.len();
        self.point_facet[plan.point as usize] = NONE;
        for &p in &plan.dropped {
            self.point_facet[p as usize] = NONE;
        }
        for (k, nf) in plan.new.into_iter().enumerate() {
            let id = base + k as u32;
            let mut neighbors = [NONE; D];
            for (m, link) in nf.links.iter().enumerate() {
                neighbors[m] = match *link {
                    Link::New(j) => base + j as u32,
                    Link::Outer { facet, slot } => {
                        self.facets[facet as usize].neighbors[slot] = id;
                        facet
                    }
                };
            }
            for &p in &nf.bucket {
                self.point_facet[p as usize] = id;
            }
            if !nf.bucket.is_empty() {
                self.open.push(id);
            }
            self.facets.push(Facet {
                vertices: nf.vertices,
                neighbors,
                normal: nf.normal,
                offset: nf.offset,
                reservation: PriorityCell::new(),
                bucket: nf.bucket,
                apex: nf.apex,
                apex_dist: nf.apex_dist,
                alive: true,
            });
        }
    }

    /// Adds `point` to the hull: its visible facets die, one new facet is
    /// created per horizon ridge, and the dead facets' buckets are
    /// redistributed over the new facets (or dropped when inside).
    pub fn process_point(&mut self, point: u32, region: &VisibleRegion) -> Result<()> {
        let plan = self.plan(point, region)?;
        self.apply(plan);
        Ok(())
    }

    /// Furthest point of the live facet with the largest bucket (lowest facet
    /// id on ties), or `None` when every bucket is empty.
    pub fn single_point_fallback(&self) -> Option<u32> {
        let mut best: Option<(usize, u32)> = None;
        for (f, facet) in self.facets.iter().enumerate() {
            if !facet.alive || facet.bucket.is_empty() {
                continue;
            }
            if best.is_none_or(|(len, _)| facet.bucket.len() > len) {
                best = Some((facet.bucket.len(), f as u32));
            }
        }
        best.map(|(_, f)| self.facets[f as usize].apex)
    }

    fn refresh_open(&mut self) {
        let facets = &self.facets;
        self.open = parallel_pack(&self.open, |&f| {
            let facet = &facets[f as usize];
            facet.alive && !facet.bucket.is_empty()
        });
    }

    /// Runs rounds until no point is outside the hull.
    pub fn run(&mut self, policy: Policy) -> Result<()> {
        let width = rayon::current_num_threads().max(1);
        let mut active: Vec<u32> = match policy {
            Policy::RandInc { .. } => self.visible_points(),
            _ => Vec::new(),
        };
        loop {
            if self.verify_rounds {
                self.check_invariants().map_err(Error::Internal)?;
            }
            if let Policy::Serial = policy {
                let Some(f) = self.pop_open() else { break };
                let q = self.facets[f as usize].apex;
                self.run_batch(&[q], false)?;
                continue;
            }
            if let Policy::RandInc { .. } = policy {
                let pf = &self.point_facet;
                active = parallel_pack(&active, |&p| pf[p as usize] != NONE);
                if active.is_empty() {
                    break;
                }
            }
            if self.live < FALLBACK_FACETS {
                let Some(q) = self.single_point_fallback() else { break };
                self.stats.fallback_rounds += 1;
                self.run_batch(&[q], false)?;
                continue;
            }
            let batch: Vec<u32> = match policy {
                Policy::RandInc { c } => active[..active.len().min(c.max(1) * width)].to_vec(),
                Policy::QuickHull { c } => {
                    self.refresh_open();
                    if self.open.is_empty() {
                        break;
                    }
                    let mut cands = self.open.clone();
                    let facets = &self.facets;
                    cands.sort_unstable_by_key(|&f| (std::cmp::Reverse(facets[f as usize].bucket.len()), f));
                    cands.truncate(c.max(1) * width);
                    cands.iter().map(|&f| facets[f as usize].apex).collect()
                }
                Policy::Serial => unreachable!(),
            };
            self.run_batch(&batch, true)?;
        }
        if self.verify_rounds {
            self.check_invariants().map_err(Error::Internal)?;
        }
        Ok(())
    }

    fn pop_open(&mut self) -> Option<u32> {
        while let Some(f) = self.open.pop() {
            let facet = &self.facets[f as usize];
            if facet.alive && !facet.bucket.is_empty() {
                return Some(f);
            }
        }
        None
    }

    /// One synchronous round over `batch`.
    fn run_batch(&mut self, batch: &[u32], reserve: bool) -> Result<()> {
        self.stats.rounds += 1;
        self.stats.point_touches += batch.len();
        let regions: Vec<VisibleRegion> = batch
            .par_iter()
            .map(|&q| self.visible_facets(q))
            .collect::<Result<_>>()?;
        self.stats.facet_touches += regions.iter().map(|r| r.facets.len()).sum::<usize>();
        let success = if reserve && batch.len() > 1 {
            self.reserve_round(batch, &regions)
        } else {
            vec![true; batch.len()]
        };
        self.stats.reservation_failures += success.iter().filter(|&&s| !s).count();
        let plans: Vec<Plan<D>> = batch
            .par_iter()
            .zip(&regions)
            .zip(&success)
            .filter(|(_, &ok)| ok)
            .map(|((&q, r), _)| self.plan(q, r))
            .collect::<Result<_>>()?;
        for plan in plans {
            self.apply(plan);
        }
        Ok(())
    }

    /// Checks neighbor symmetry, orientation against the interior point, the
    /// single-bucket invariant and (3D) the Euler characteristic.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let mut bucketed = 0usize;
        let mut vertex_degree = std::collections::HashMap::new();
        let mut live = 0usize;
        for (f, facet) in self.facets.iter().enumerate() {
            if !facet.alive {
                continue;
            }
            live += 1;
            let f = f as u32;
            for &v in &facet.vertices {
                *vertex_degree.entry(v).or_insert(0usize) += 1;
            }
            for slot in 0..D {
                let g = facet.neighbors[slot];
                let other = self.facets.get(g as usize).ok_or(format!("facet {f}: dangling link"))?;
                if !other.alive {
                    return Err(format!("facet {f} links to dead facet {g}"));
                }
                let back = other.neighbors.iter().position(|&x| x == f);
                let Some(back) = back else {
                    return Err(format!("facet {g} does not link back to {f}"));
                };
                let mut ridge_f: Vec<u32> = (0..D).filter(|&k| k != slot).map(|k| facet.vertices[k]).collect();
                let mut ridge_g: Vec<u32> = (0..D).filter(|&k| k != back).map(|k| other.vertices[k]).collect();
                ridge_f.sort_unstable();
                ridge_g.sort_unstable();
                if ridge_f != ridge_g {
                    return Err(format!("facets {f} and {g} disagree on their ridge"));
                }
            }
            if facet.height(&self.interior) >= 0.0 {
                return Err(format!("facet {f} is visible from the interior point"));
            }
            for &p in &facet.bucket {
                bucketed += 1;
                if self.point_facet[p as usize] != f {
                    return Err(format!("point {p} sits in bucket {f} but records another facet"));
                }
                if !self.sees(f, p) {
                    return Err(format!("point {p} does not see its bucket facet {f}"));
                }
            }
        }
        if live != self.live {
            return Err(format!("live facet count {} != recorded {}", live, self.live));
        }
        let outside = self.point_facet.iter().filter(|&&f| f != NONE).count();
        if outside != bucketed {
            return Err(format!("{outside} outside points but {bucketed} bucket entries"));
        }
        if D == 3 {
            let (v, f) = (vertex_degree.len() as i64, live as i64);
            if (3 * f) % 2 != 0 {
                return Err("odd edge count".into());
            }
            let e = 3 * f / 2;
            if v - e + f != 2 {
                return Err(format!("Euler characteristic {} (V={v}, E={e}, F={f})", v - e + f));
            }
        } else if vertex_degree.values().any(|&d| d != 2) {
            return Err("2D hull is not a single cycle".into());
        }
        Ok(())
    }

    /// Live facets as vertex-id tuples.
    pub fn live_facet_vertices(&self) -> Vec<[u32; D]> {
        self.facets
            .iter()
            .filter(|f| f.alive)
            .map(|f| f.vertices)
            .collect()
    }
}
