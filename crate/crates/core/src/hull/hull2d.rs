//! Recursive 2D quickhull.

use crate::error::{Error, Result};
use crate::predicates::{orient2d_det, orient_eps};

const JOIN_CUTOFF: usize = 4096;

/// Hull vertices in counter-clockwise order, starting at the point with the
/// smallest x (then smallest y). Points on hull edges are not vertices.
/// Collinear input is reported as [`Error::Degenerate`] carrying the two
/// extreme points.
pub fn hull2d_quickhull(points: &[[f64; 2]]) -> Result<Vec<usize>> {
    quickhull(points, true)
}

pub(crate) fn hull2d_serial(points: &[[f64; 2]]) -> Result<Vec<usize>> {
    quickhull(points, false)
}

fn quickhull(points: &[[f64; 2]], parallel: bool) -> Result<Vec<usize>> {
    if points.len() < 3 {
        return Err(Error::invalid(format!(
            "a 2D hull needs at least 3 points, got {}",
            points.len()
        )));
    }
    let key = |i: &usize| (points[*i][0], points[*i][1]);
    let cmp = |a: &usize, b: &usize| {
        let (ka, kb) = (key(a), key(b));
        ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1)).then(a.cmp(b))
    };
    let ids: Vec<usize> = (0..points.len()).collect();
    let a = *ids.iter().min_by(|x, y| cmp(x, y)).expect("nonempty");
    let b = *ids
        .iter()
        .max_by(|x, y| cmp(x, y).then(y.cmp(x)))
        .expect("nonempty");
    if points[a] == points[b] {
        return Err(Error::degenerate("all points coincide", vec![a]));
    }
    let max_abs = points.iter().flatten().fold(0.0_f64, |m, c| m.max(c.abs()));
    let eps = orient_eps(max_abs, 2);
    let (pa, pb) = (&points[a], &points[b]);
    let below: Vec<usize> = ids
        .iter()
        .copied()
        .filter(|&i| orient2d_det(pa, pb, &points[i]) < -eps)
        .collect();
    let above: Vec<usize> = ids
        .iter()
        .copied()
        .filter(|&i| orient2d_det(pa, pb, &points[i]) > eps)
        .collect();
    if below.is_empty() && above.is_empty() {
        let mut ext = vec![a, b];
        ext.sort_unstable();
        return Err(Error::degenerate("all points are collinear", ext));
    }
    let ctx = Ctx {
        points,
        eps,
        parallel,
    };
    let (lower, upper) = if parallel {
        rayon::join(|| ctx.side(a, b, below), || ctx.side(b, a, above))
    } else {
        (ctx.side(a, b, below), ctx.side(b, a, above))
    };
    let mut cycle = Vec::with_capacity(lower.len() + upper.len() + 2);
    cycle.push(a);
    cycle.extend(lower);
    cycle.push(b);
    cycle.extend(upper);
    Ok(cycle)
}

struct Ctx<'a> {
    points: &'a [[f64; 2]],
    eps: f64,
    parallel: bool,
}

impl Ctx<'_> {
    /// Hull vertices strictly between `p` and `q` in CCW order, where `set`
    /// holds the points strictly right of `p -> q`.
    fn side(&self, p: usize, q: usize, set: Vec<usize>) -> Vec<usize> {
        if set.is_empty() {
            return set;
        }
        let (pp, pq) = (&self.points[p], &self.points[q]);
        let mut c = set[0];
        let mut best = f64::NEG_INFINITY;
        for &i in &set {
            let h = -orient2d_det(pp, pq, &self.points[i]);
            if h > best || (h == best && i < c) {
                best = h;
                c = i;
            }
        }
        let pc = &self.points[c];
        let right_of = |s: &[f64; 2], t: &[f64; 2]| {
            set.iter()
                .copied()
                .filter(|&i| orient2d_det(s, t, &self.points[i]) < -self.eps)
                .collect::<Vec<_>>()
        };
        let s1 = right_of(pp, pc);
        let s2 = right_of(pc, pq);
        let (l, r) = if self.parallel && set.len() > JOIN_CUTOFF {
            rayon::join(|| self.side(p, c, s1), || self.side(c, q, s2))
        } else {
            (self.side(p, c, s1), self.side(c, q, s2))
        };
        let mut out = l;
        out.push(c);
        out.extend(r);
        out
    }
}
