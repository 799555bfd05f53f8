//! Brute-force reference implementations. Slow on purpose: each one is a
//! direct transcription of the definition, independent of the fast code.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hull::HullMesh;
use crate::point::{dist_sq, PointSet};
use crate::predicates::{cross3, dot3, orient2d_det, orient_eps, sub3};
use crate::seb::{ball_from_support, Ball, BALL_EPS};

fn max_abs<const D: usize>(points: &[[f64; D]]) -> f64 {
    points.iter().flatten().fold(0.0_f64, |m, c| m.max(c.abs()))
}

/// Andrew's monotone chain. Strict: collinear boundary points are excluded.
/// Counter-clockwise, starting at the smallest (x, y).
pub fn hull2d_monotone_chain(points: &[[f64; 2]]) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..points.len()).collect();
    ids.sort_by(|&a, &b| {
        let (p, q) = (points[a], points[b]);
        p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1])).then(a.cmp(&b))
    });
    ids.dedup_by(|a, b| points[*a] == points[*b]);
    if ids.len() < 3 {
        return ids;
    }
    let eps = orient_eps(max_abs(points), 2);
    let turn = |a: usize, b: usize, c: usize| orient2d_det(&points[a], &points[b], &points[c]);
    let mut lower: Vec<usize> = Vec::new();
    for &i in &ids {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], i) <= eps {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in ids.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], i) <= eps {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Hull vertex set by enumerating every triple whose plane has all points on
/// one side. Points lying in such a plane count only if they are strict
/// vertices of the planar face. O(n^4).
pub fn hull3d_brute_force(points: &[[f64; 3]]) -> Result<Vec<usize>> {
    let n = points.len();
    if n < 4 {
        return Err(Error::invalid("a 3D hull needs at least 4 points"));
    }
    let eps = orient_eps(max_abs(points), 3);
    let triples: Vec<(usize, usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).flat_map(move |j| (j + 1..n).map(move |k| (i, j, k))))
        .collect();
    let mut verts: Vec<usize> = triples
        .par_iter()
        .flat_map_iter(|&(i, j, k)| {
            let a = points[i];
            let normal = cross3(&sub3(&points[j], &a), &sub3(&points[k], &a));
            if dot3(&normal, &normal).sqrt() <= eps {
                return Vec::new();
            }
            let (mut above, mut below) = (false, false);
            let mut on = Vec::new();
            for (p, q) in points.iter().enumerate() {
                let h = dot3(&normal, &sub3(q, &a));
                if h > eps {
                    above = true;
                } else if h < -eps {
                    below = true;
                } else {
                    on.push(p);
                }
                if above && below {
                    return Vec::new();
                }
            }
            if on.len() == 3 {
                return on;
            }
            // project the coplanar face onto its dominant plane and take the
            // strict 2D hull
            let axis = (0..3)
                .max_by(|&x, &y| normal[x].abs().total_cmp(&normal[y].abs()))
                .expect("three axes");
            let keep: Vec<usize> = (0..3).filter(|&x| x != axis).collect();
            let flat: Vec<[f64; 2]> = on
                .iter()
                .map(|&p| [points[p][keep[0]], points[p][keep[1]]])
                .collect();
            hull2d_monotone_chain(&flat).into_iter().map(|x| on[x]).collect()
        })
        .collect();
    verts.sort_unstable();
    verts.dedup();
    Ok(verts)
}

/// Structural checks of a finished 3D hull: every directed edge is matched by
/// its reverse (closed 2-manifold), `V - E + F = 2`, `2E = 3F`, outward
/// orientation, and every input point on the inner side of every facet
/// within the orientation tolerance.
pub fn check_hull3d(points: &[[f64; 3]], mesh: &HullMesh<3>) -> std::result::Result<(), String> {
    use std::collections::HashMap;
    let f = mesh.facets.len();
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    for t in &mesh.facets {
        for s in 0..3 {
            *edges.entry((t[s], t[(s + 1) % 3])).or_default() += 1;
        }
    }
    for (&(a, b), &c) in &edges {
        if c != 1 || edges.get(&(b, a)) != Some(&1) {
            return Err(format!("edge ({a}, {b}) is not shared by exactly two facets"));
        }
    }
    let e = edges.len() / 2;
    if 2 * e != 3 * f {
        return Err(format!("2E = {} but 3F = {}", 2 * e, 3 * f));
    }
    let v = mesh.vertices.len();
    if v as i64 - e as i64 + f as i64 != 2 {
        return Err(format!("Euler characteristic V - E + F = {v} - {e} + {f} != 2"));
    }
    let eps = orient_eps(max_abs(points), 3);
    let mut centroid = [0.0; 3];
    for &i in &mesh.vertices {
        for k in 0..3 {
            centroid[k] += points[i][k] / v as f64;
        }
    }
    mesh.facets.par_iter().try_for_each(|t| {
        let a = points[t[0]];
        let normal = cross3(&sub3(&points[t[1]], &a), &sub3(&points[t[2]], &a));
        if dot3(&normal, &sub3(&centroid, &a)) >= 0.0 {
            return Err(format!("facet {t:?} faces inward"));
        }
        match points.iter().position(|q| dot3(&normal, &sub3(q, &a)) > eps) {
            Some(p) => Err(format!("point {p} is outside facet {t:?}")),
            None => Ok(()),
        }
    })
}

/// Exact miniball by enumerating all support subsets of size at most d+1
/// and keeping the smallest enclosing candidate.
pub fn miniball_brute_force(points: &PointSet) -> Result<Ball> {
    if points.is_empty() {
        return Err(Error::invalid("smallest enclosing ball of no points"));
    }
    let n = points.len();
    let d = points.dim();
    let mut best: Option<Ball> = None;
    let mut subset = Vec::with_capacity(d + 1);
    fn visit(
        points: &PointSet,
        start: usize,
        n: usize,
        cap: usize,
        subset: &mut Vec<usize>,
        best: &mut Option<Ball>,
    ) {
        if !subset.is_empty() {
            let ball = ball_from_support(points, subset).expect("valid support");
            let better = best.as_ref().is_none_or(|b| ball.radius < b.radius);
            if better && ball.support.len() == subset.len() && points.iter().all(|p| ball.contains(p)) {
                *best = Some(ball);
            }
        }
        if subset.len() == cap {
            return;
        }
        for i in start..n {
            subset.push(i);
            visit(points, i + 1, n, cap, subset, best);
            subset.pop();
        }
    }
    visit(points, 0, n, d + 1, &mut subset, &mut best);
    best.ok_or_else(|| Error::Internal("no enclosing candidate ball".into()))
}

/// `true` iff `ball` encloses all points within the ball tolerance.
pub fn encloses(points: &PointSet, ball: &Ball) -> bool {
    ball.max_excess(points) <= BALL_EPS
}

/// The k nearest points by linear scan as `(squared distance, id)`, ordered
/// by distance then id. `live` filters candidate ids.
pub fn knn_linear_scan(
    points: &PointSet,
    live: impl Fn(usize) -> bool,
    query: &[f64],
    k: usize,
) -> Vec<(f64, usize)> {
    let mut all: Vec<(f64, usize)> = (0..points.len())
        .filter(|&i| live(i))
        .map(|i| (dist_sq(points.point(i), query), i))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    all.truncate(k);
    all
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_chain_square() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5], [0.5, 0.0]];
        assert_eq!(hull2d_monotone_chain(&pts), vec![0, 1, 2, 3]);
    }

    #[test]
    fn brute_force_cube_skips_face_centers() {
        let mut pts: Vec<[f64; 3]> = (0..8)
            .map(|i| [(i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64])
            .collect();
        pts.push([0.5, 0.5, 0.0]);
        pts.push([0.5, 0.5, 0.5]);
        assert_eq!(hull3d_brute_force(&pts).unwrap(), (0..8).collect::<Vec<_>>());
    }

    #[test]
    fn miniball_of_right_triangle() {
        let p = PointSet::from_rows(2, &[[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [0.5, 0.5]]).unwrap();
        let b = miniball_brute_force(&p).unwrap();
        assert!((b.radius - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn linear_scan_orders_ties_by_id() {
        let p = PointSet::from_rows(2, &[[1.0, 0.0], [-1.0, 0.0], [0.0, 3.0]]).unwrap();
        assert_eq!(knn_linear_scan(&p, |_| true, &[0.0, 0.0], 2), vec![(1.0, 0), (1.0, 1)]);
    }
}
