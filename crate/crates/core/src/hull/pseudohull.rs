//! Pseudohull culling: a recursive quickhull that stops refining a facet once
//! fewer than `t` points remain above it. Every point it discards lies
//! strictly inside the true hull.

use crate::error::Result;
use crate::hull::engine::choose_simplex;
use crate::predicates::orient_eps;

/// Default leaf threshold.
pub const PSEUDOHULL_THRESHOLD: usize = 128;

const JOIN_CUTOFF: usize = 2048;

struct Ctx<'a> {
    points: &'a [[f64; 3]],
    eps: f64,
    threshold: usize,
}

#[derive(Clone, Copy)]
struct Tri {
    v: [u32; 3],
    normal: [f64; 3],
    offset: f64,
}

impl Tri {
    fn new(points: &[[f64; 3]], v: [u32; 3]) -> Self {
        let [a, b, c] = v.map(|i| points[i as usize]);
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let w = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let normal = [
            u[1] * w[2] - u[2] * w[1],
            u[2] * w[0] - u[0] * w[2],
            u[0] * w[1] - u[1] * w[0],
        ];
        let offset = normal[0] * a[0] + normal[1] * a[1] + normal[2] * a[2];
        Tri { v, normal, offset }
    }

    #[inline]
    fn height(&self, p: &[f64; 3]) -> f64 {
        self.normal[0] * p[0] + self.normal[1] * p[1] + self.normal[2] * p[2] - self.offset
    }
}

impl Ctx<'_> {
    fn grow(&self, tri: Tri, bucket: Vec<u32>) -> Vec<u32> {
        if bucket.len() < self.threshold {
            return bucket;
        }
        let mut apex = bucket[0];
        let mut best = f64::NEG_INFINITY;
        for &p in &bucket {
            let h = tri.height(&self.points[p as usize]);
            if h > best || (h == best && p < apex) {
                best = h;
                apex = p;
            }
        }
        if best <= self.eps {
            return bucket;
        }
        let children: [Tri; 3] = std::array::from_fn(|i| {
            let mut v = tri.v;
            v[i] = apex;
            Tri::new(self.points, v)
        });
        let mut parts: [Vec<u32>; 3] = Default::default();
        for &p in &bucket {
            if p == apex {
                continue;
            }
            let q = &self.points[p as usize];
            // inclusive test: keep anything not clearly below a child facet
            if let Some(k) = children.iter().position(|t| t.height(q) >= -self.eps) {
                parts[k].push(p);
            }
        }
        let [p0, p1, p2] = parts;
        let (r0, (r1, r2)) = if bucket.len() > JOIN_CUTOFF {
            rayon::join(
                || self.grow(children[0], p0),
                || rayon::join(|| self.grow(children[1], p1), || self.grow(children[2], p2)),
            )
        } else {
            (
                self.grow(children[0], p0),
                (self.grow(children[1], p1), self.grow(children[2], p2)),
            )
        };
        let mut out = Vec::with_capacity(1 + r0.len() + r1.len() + r2.len());
        out.push(apex);
        out.extend(r0);
        out.extend(r1);
        out.extend(r2);
        out
    }
}

/// Ids (sorted) of the points that survive culling: the pseudohull vertices
/// and every point left in a leaf bucket. The true hull vertices are always
/// a subset.
pub fn pseudohull_cull(points: &[[f64; 3]], threshold: usize) -> Result<Vec<usize>> {
    let max_abs = points.iter().flatten().fold(0.0_f64, |m, c| m.max(c.abs()));
    let eps = orient_eps(max_abs, 3);
    let simplex = choose_simplex::<3>(points, eps)?;
    let interior: [f64; 3] = std::array::from_fn(|k| {
        simplex.iter().map(|&s| points[s as usize][k]).sum::<f64>() / 4.0
    });
    let tris: Vec<Tri> = (0..4)
        .map(|i| {
            let mut v: Vec<u32> = (0..4).filter(|&x| x != i).map(|x| simplex[x]).collect();
            let t = Tri::new(points, [v[0], v[1], v[2]]);
            if t.height(&interior) > 0.0 {
                v.swap(0, 1);
            }
            Tri::new(points, [v[0], v[1], v[2]])
        })
        .collect();
    let mut buckets: [Vec<u32>; 4] = Default::default();
    for (p, q) in points.iter().enumerate() {
        if simplex.contains(&(p as u32)) {
            continue;
        }
        if let Some(k) = tris.iter().position(|t| t.height(q) >= -eps) {
            buckets[k].push(p as u32);
        }
    }
    let ctx = Ctx {
        points,
        eps,
        threshold: threshold.max(1),
    };
    let [b0, b1, b2, b3] = buckets;
    let ((r0, r1), (r2, r3)) = rayon::join(
        || rayon::join(|| ctx.grow(tris[0], b0), || ctx.grow(tris[1], b1)),
        || rayon::join(|| ctx.grow(tris[2], b2), || ctx.grow(tris[3], b3)),
    );
    let mut out: Vec<usize> = simplex
        .iter()
        .map(|&s| s as usize)
        .chain([r0, r1, r2, r3].into_iter().flatten().map(|p| p as usize))
        .collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}
