//! Smallest enclosing ball.
//!
//! Two families: orthant scans (scan for the furthest outlier per orthant of
//! the current center, then re-solve on the support plus those outliers),
//! optionally preceded by a sampling phase over short random segments; and
//! Welzl's randomized incremental algorithm with move-to-front and pivoting,
//! parallelized by scanning doubling prefixes for the earliest outlier.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::parallel::{argmax_range, parallel_find_first, SERIAL_CUTOFF};
use crate::point::{dist_sq, PointSet};
use crate::random::{random_permutation, Rng};

/// Relative radius tolerance for containment and termination.
pub const BALL_EPS: f64 = 1e-9;
/// Default sampling segment length.
pub const SAMPLE_SEGMENT: usize = 1024;
/// Prefixes shorter than this are solved by the sequential algorithm.
pub const WELZL_SERIAL_CUTOFF: usize = 500_000;

const MAX_UPDATES: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
    /// Ids of the boundary points defining the ball.
    pub support: Vec<usize>,
}

impl Ball {
    /// `true` iff `p` is inside or within `BALL_EPS * radius` of the boundary.
    #[inline]
    pub fn contains(&self, p: &[f64]) -> bool {
        let r = self.radius * (1.0 + BALL_EPS);
        dist_sq(p, &self.center) <= r * r
    }

    /// Largest `|p - center| / radius - 1` over `points` (0 for an exact fit).
    pub fn max_excess(&self, points: &PointSet) -> f64 {
        let far = points
            .iter()
            .map(|p| dist_sq(p, &self.center))
            .fold(0.0_f64, f64::max)
            .sqrt();
        if self.radius == 0.0 {
            return if far == 0.0 { 0.0 } else { f64::INFINITY };
        }
        far / self.radius - 1.0
    }
}

/// Smallest ball with every point of `support` on its boundary, i.e. the
/// circumball of their affine hull. Affinely dependent points are dropped.
pub fn ball_from_support(points: &PointSet, support: &[usize]) -> Result<Ball> {
    if support.is_empty() {
        return Err(Error::invalid("ball_from_support needs at least one point"));
    }
    if support.len() > points.dim() + 1 {
        return Err(Error::invalid(format!(
            "{} support points exceed d+1 = {}",
            support.len(),
            points.dim() + 1
        )));
    }
    Ok(circumball(points, support))
}

fn circumball(points: &PointSet, support: &[usize]) -> Ball {
    let d = points.dim();
    let p0 = points.point(support[0]);
    let mut kept = vec![support[0]];
    let mut vecs: Vec<Vec<f64>> = Vec::new();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for &s in &support[1..] {
        let u: Vec<f64> = points.point(s).iter().zip(p0).map(|(a, b)| a - b).collect();
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut r = u.clone();
        for e in &basis {
            let dot: f64 = r.iter().zip(e).map(|(a, b)| a * b).sum();
            r.iter_mut().zip(e).for_each(|(a, b)| *a -= dot * b);
        }
        let rn = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || rn <= 1e-12 * norm {
            continue;
        }
        r.iter_mut().for_each(|x| *x /= rn);
        basis.push(r);
        vecs.push(u);
        kept.push(s);
    }
    let m = vecs.len();
    // 2 (u_k . u_l) lambda_l = |u_k|^2
    let mut a = vec![vec![0.0; m + 1]; m];
    for k in 0..m {
        for l in 0..m {
            a[k][l] = 2.0 * vecs[k].iter().zip(&vecs[l]).map(|(x, y)| x * y).sum::<f64>();
        }
        a[k][m] = vecs[k].iter().map(|x| x * x).sum();
    }
    let lambda = solve(a);
    let mut center = p0.to_vec();
    for (k, u) in vecs.iter().enumerate() {
        for j in 0..d {
            center[j] += lambda[k] * u[j];
        }
    }
    let radius = kept
        .iter()
        .map(|&s| dist_sq(points.point(s), &center))
        .fold(0.0_f64, f64::max)
        .sqrt();
    Ball {
        center,
        radius,
        support: kept,
    }
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn solve(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let m = a.len();
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("nonempty");
        a.swap(col, piv);
        let p = a[col][col];
        if p == 0.0 {
            continue;
        }
        for row in 0..m {
            if row != col {
                let f = a[row][col] / p;
                if f != 0.0 {
                    let pivot_row = a[col].clone();
                    for (x, y) in a[row][col..=m].iter_mut().zip(&pivot_row[col..=m]) {
                        *x -= f * y;
                    }
                }
            }
        }
    }
    (0..m)
        .map(|i| if a[i][i] == 0.0 { 0.0 } else { a[i][m] / a[i][i] })
        .collect()
}

/// Furthest outliers of a scan, one per orthant of the ball center.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScanResult {
    pub has_outlier: bool,
    /// Point ids ordered by orthant index.
    pub extrema: Vec<usize>,
}

/// Orthant index of `p` around `center`: bit `j` is set iff `p[j] < center[j]`
/// (so a zero offset counts as positive).
#[inline]
fn orthant(p: &[f64], center: &[f64]) -> usize {
    p.iter()
        .zip(center)
        .enumerate()
        .fold(0, |o, (j, (a, c))| if a < c { o | (1 << j) } else { o })
}

type Best = Vec<Option<(f64, usize)>>;

fn keep_better(slot: &mut Option<(f64, usize)>, cand: (f64, usize)) {
    match slot {
        Some((d, id)) if *d > cand.0 || (*d == cand.0 && *id <= cand.1) => {}
        _ => *slot = Some(cand),
    }
}

fn scan_block(points: &PointSet, ids: &[usize], ball: &Ball) -> Best {
    let mut best: Best = vec![None; 1 << points.dim()];
    let r = ball.radius * (1.0 + BALL_EPS);
    let r2 = r * r;
    for &i in ids {
        let p = points.point(i);
        let d2 = dist_sq(p, &ball.center);
        if d2 > r2 {
            keep_better(&mut best[orthant(p, &ball.center)], (d2, i));
        }
    }
    best
}

fn merge(mut a: Best, b: Best) -> Best {
    for (slot, cand) in a.iter_mut().zip(b) {
        if let Some(c) = cand {
            keep_better(slot, c);
        }
    }
    a
}

fn to_result(best: Best) -> ScanResult {
    let extrema: Vec<usize> = best.into_iter().flatten().map(|(_, id)| id).collect();
    ScanResult {
        has_outlier: !extrema.is_empty(),
        extrema,
    }
}

/// Block-parallel orthant scan of `ids` against `ball`.
pub fn orthant_scan(points: &PointSet, ids: &[usize], ball: &Ball) -> ScanResult {
    assert!(points.dim() < 16, "orthant scans are for low dimensions");
    if ids.len() < SERIAL_CUTOFF {
        return to_result(scan_block(points, ids, ball));
    }
    let best = ids
        .par_chunks(SERIAL_CUTOFF)
        .map(|block| scan_block(points, block, ball))
        .reduce_with(merge)
        .expect("nonempty");
    to_result(best)
}

/// Single-block reference scan.
pub fn orthant_scan_serial(points: &PointSet, ids: &[usize], ball: &Ball) -> ScanResult {
    to_result(scan_block(points, ids, ball))
}

/// Smallest ball enclosing the old support and the scan's extrema.
pub fn seb_update(points: &PointSet, ball: &Ball, scan: &ScanResult) -> Ball {
    let mut cand: Vec<usize> = ball.support.clone();
    for &e in &scan.extrema {
        if !cand.contains(&e) {
            cand.push(e);
        }
    }
    let mut order = cand;
    let mut support = Vec::new();
    mtf_mb(points, &mut order, usize::MAX, &mut support, true).expect("nonempty candidate set")
}

fn initial_ball(points: &PointSet, ids: &[usize]) -> Ball {
    let take = ids.len().min(points.dim() + 1);
    // the first few points may not be mutually enclosed by their circumball
    // (obtuse triangles), so solve them exactly
    let mut order = ids[..take].to_vec();
    mtf_mb(points, &mut order, usize::MAX, &mut Vec::new(), true).expect("nonempty")
}

fn orthant_loop(points: &PointSet, ids: &[usize], mut ball: Ball, stats: &mut SebStats) -> Ball {
    for _ in 0..MAX_UPDATES {
        let scan = orthant_scan(points, ids, &ball);
        stats.scans += 1;
        if !scan.has_outlier {
            break;
        }
        ball = seb_update(points, &ball, &scan);
        stats.updates += 1;
    }
    ball
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SebStats {
    /// Points examined by the sampling phase before the full scans began.
    pub sampled: usize,
    pub scans: usize,
    pub updates: usize,
}

/// Orthant-scan loop over the whole input until no point is outside.
pub fn seb_orthant(points: &PointSet) -> Result<Ball> {
    if points.is_empty() {
        return Err(Error::invalid("smallest enclosing ball of no points"));
    }
    let ids: Vec<usize> = (0..points.len()).collect();
    let ball = initial_ball(points, &ids);
    Ok(orthant_loop(points, &ids, ball, &mut SebStats::default()))
}

/// Sampling phase over random segments of length `segment`, then the full
/// orthant loop from the sampled ball.
pub fn seb_sampling(points: &PointSet, segment: usize, rng: &mut Rng) -> Result<(Ball, SebStats)> {
    if points.is_empty() {
        return Err(Error::invalid("smallest enclosing ball of no points"));
    }
    let segment = segment.max(1);
    let order = random_permutation(points.len(), rng);
    let mut stats = SebStats::default();
    let mut ball = initial_ball(points, &order);
    let mut pos = 0;
    while pos < order.len() {
        let end = (pos + segment).min(order.len());
        let scan = orthant_scan(points, &order[pos..end], &ball);
        pos = end;
        if !scan.has_outlier {
            break;
        }
        ball = seb_update(points, &ball, &scan);
        stats.updates += 1;
    }
    stats.sampled = pos;
    let all: Vec<usize> = (0..points.len()).collect();
    let ball = orthant_loop(points, &all, ball, &mut stats);
    Ok((ball, stats))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WelzlOptions {
    pub mtf: bool,
    pub pivot: bool,
    /// Seed of the initial random permutation.
    pub seed: u64,
}

impl Default for WelzlOptions {
    fn default() -> Self {
        WelzlOptions {
            mtf: true,
            pivot: true,
            seed: 0,
        }
    }
}

/// Miniball of `order[..end]` with `support` on the boundary. With `mtf`
/// each outlier is moved to the front of `order`.
fn mtf_mb(
    points: &PointSet,
    order: &mut [usize],
    end: usize,
    support: &mut Vec<usize>,
    mtf: bool,
) -> Option<Ball> {
    let end = end.min(order.len());
    let mut ball = (!support.is_empty()).then(|| circumball(points, support));
    if support.len() == points.dim() + 1 {
        return ball;
    }
    for i in 0..end {
        let p = order[i];
        if ball.as_ref().is_some_and(|b| b.contains(points.point(p))) {
            continue;
        }
        support.push(p);
        let nb = mtf_mb(points, order, i, support, mtf);
        support.pop();
        ball = nb;
        if mtf {
            order[..=i].rotate_right(1);
        }
    }
    ball
}

/// Pivoting: the top-level loop of [`mtf_mb`], except that each outlier is
/// replaced by the point furthest from the current centre. That point lies
/// outside the ball of the prefix, hence on the boundary of the next one.
fn pivot_mb(points: &PointSet, order: &mut [usize], mtf: bool) -> Ball {
    let n = order.len();
    let mut ball = circumball(points, &[order[0]]);
    for i in 1..n {
        if ball.contains(points.point(order[i])) {
            continue;
        }
        let center = ball.center.clone();
        let (k, _) = argmax_range(n - i, |j| dist_sq(points.point(order[i + j]), &center))
            .expect("nonempty");
        order.swap(i, i + k);
        let mut support = vec![order[i]];
        ball = mtf_mb(points, order, i, &mut support, mtf).expect("nonempty support");
        if mtf {
            order[..=i].rotate_right(1);
        }
    }
    ball
}

fn welzl_order(points: &PointSet, seed: u64) -> Vec<usize> {
    random_permutation(points.len(), &mut Rng::new(seed))
}

fn welzl_on(points: &PointSet, order: &mut [usize], opts: WelzlOptions) -> Ball {
    if opts.pivot {
        pivot_mb(points, order, opts.mtf)
    } else {
        mtf_mb(points, order, usize::MAX, &mut Vec::new(), opts.mtf).expect("nonempty")
    }
}

/// Sequential Welzl over a seeded random order.
pub fn welzl_seq(points: &PointSet, opts: WelzlOptions) -> Result<Ball> {
    if points.is_empty() {
        return Err(Error::invalid("smallest enclosing ball of no points"));
    }
    let mut order = welzl_order(points, opts.seed);
    Ok(welzl_on(points, &mut order, opts))
}

/// Welzl with parallel outlier search: inputs below `cutoff` run
/// [`welzl_seq`] (on the same random order); above it, prefixes of doubling
/// size are scanned in parallel for their earliest outlier, which becomes a
/// boundary point of a recursive solve on the preceding prefix.
pub fn welzl_parallel(points: &PointSet, opts: WelzlOptions, cutoff: usize) -> Result<Ball> {
    if points.is_empty() {
        return Err(Error::invalid("smallest enclosing ball of no points"));
    }
    let cutoff = cutoff.max(1);
    let mut order = welzl_order(points, opts.seed);
    if order.len() < cutoff {
        return Ok(welzl_on(points, &mut order, opts));
    }
    let head = welzl_on(points, &mut order[..cutoff], opts);
    Ok(par_mb(points, &order, order.len(), &mut Vec::new(), Some(head), cutoff, cutoff, opts))
}

#[allow(clippy::too_many_arguments)]
fn par_mb(
    points: &PointSet,
    order: &[usize],
    end: usize,
    support: &mut Vec<usize>,
    start_ball: Option<Ball>,
    mut start: usize,
    cutoff: usize,
    opts: WelzlOptions,
) -> Ball {
    if end < cutoff {
        let mut local = order[..end].to_vec();
        return mtf_mb(points, &mut local, end, support, opts.mtf).expect("nonempty support");
    }
    let mut ball = start_ball.or_else(|| (!support.is_empty()).then(|| circumball(points, support)));
    if support.len() == points.dim() + 1 {
        return ball.expect("full support");
    }
    let mut hi = end.min(start.max(cutoff).saturating_mul(2)).max(start);
    while start < end {
        let outside = |i: usize| {
            ball.as_ref()
                .is_none_or(|b| !b.contains(points.point(order[i])))
        };
        match parallel_find_first(start..hi, outside) {
            Some(i) => {
                support.push(order[i]);
                ball = Some(par_mb(points, order, i, support, None, 0, cutoff, opts));
                support.pop();
                start = i + 1;
            }
            None => {
                start = hi;
                hi = end.min(hi.saturating_mul(2));
            }
        }
    }
    ball.expect("nonempty input")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_in_sphere, gen_uniform_cube};
    use crate::oracle::miniball_brute_force;
    use crate::random::Rng;
    use proptest::prelude::*;

    fn ps(rows: &[&[f64]]) -> PointSet {
        PointSet::from_rows(rows[0].len(), rows).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn support_examples() {
        let p = ps(&[&[0.0, 0.0], &[2.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let b = ball_from_support(&p, &[0]).unwrap();
        assert_eq!((b.center.clone(), b.radius), (vec![0.0, 0.0], 0.0));
        let b = ball_from_support(&p, &[0, 1]).unwrap();
        assert_eq!((b.center.clone(), b.radius), (vec![1.0, 0.0], 1.0));
        let q = ps(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]);
        let b = ball_from_support(&q, &[0, 1, 2]).unwrap();
        assert!(close(b.center[0], 0.5, 1e-12) && close(b.center[1], 0.5, 1e-12));
        assert!(close(b.radius, 2f64.sqrt() / 2.0, 1e-12));
        assert!(ball_from_support(&q, &[]).is_err());
        // dependent point is dropped
        let b = ball_from_support(&p, &[0, 1, 2]).unwrap();
        assert_eq!(b.support, vec![0, 1]);
    }

    #[test]
    fn scan_example() {
        let p = ps(&[&[2.0, 0.0], &[0.0, 3.0], &[-1.5, 0.0]]);
        let unit = Ball {
            center: vec![0.0, 0.0],
            radius: 1.0,
            support: vec![],
        };
        let s = orthant_scan(&p, &[0, 1, 2], &unit);
        // (+,+) is orthant 0, (-,+) is orthant 1
        assert_eq!(s.extrema, vec![1, 2]);
        assert!(s.has_outlier);
        let big = Ball {
            radius: 10.0,
            ..unit
        };
        assert_eq!(orthant_scan(&p, &[0, 1, 2], &big), ScanResult::default());
    }

    #[test]
    fn parallel_scan_matches_serial() {
        let p = gen_uniform_cube(100_000, 3, 4);
        let ids: Vec<usize> = (0..p.len()).collect();
        let ball = Ball {
            center: vec![150.0, 160.0, 170.0],
            radius: 100.0,
            support: vec![],
        };
        assert_eq!(orthant_scan(&p, &ids, &ball), orthant_scan_serial(&p, &ids, &ball));
    }

    #[test]
    fn update_example() {
        let p = ps(&[&[0.0, 0.0], &[2.0, 0.0]]);
        let b = ball_from_support(&p, &[0]).unwrap();
        let nb = seb_update(
            &p,
            &b,
            &ScanResult {
                has_outlier: true,
                extrema: vec![1],
            },
        );
        assert_eq!((nb.center, nb.radius), (vec![1.0, 0.0], 1.0));
    }

    #[test]
    fn welzl_collinear_and_square() {
        let p = ps(&[&[0.0, 0.0], &[1.0, 0.0], &[3.0, 0.0]]);
        for mtf in [false, true] {
            for pivot in [false, true] {
                let b = welzl_seq(&p, WelzlOptions { mtf, pivot, seed: 1 }).unwrap();
                assert!(close(b.center[0], 1.5, 1e-12) && b.center[1].abs() < 1e-12);
                assert!(close(b.radius, 1.5, 1e-12));
            }
        }
        let sq = ps(&[&[0.0, 0.0], &[1.0, 0.0], &[1.0, 1.0], &[0.0, 1.0]]);
        let b = seb_orthant(&sq).unwrap();
        assert!(close(b.center[0], 0.5, 1e-12) && close(b.center[1], 0.5, 1e-12));
        assert!(close(b.radius, 2f64.sqrt() / 2.0, 1e-12));
        let two = ps(&[&[0.0, 0.0], &[4.0, 0.0]]);
        assert_eq!(seb_orthant(&two).unwrap().radius, 2.0);
    }

    #[test]
    fn parallel_welzl_below_cutoff_is_sequential() {
        let p = gen_in_sphere(5000, 3, 3);
        let opts = WelzlOptions::default();
        assert_eq!(welzl_parallel(&p, opts, WELZL_SERIAL_CUTOFF).unwrap(), welzl_seq(&p, opts).unwrap());
    }

    #[test]
    fn parallel_welzl_with_small_cutoff_agrees() {
        let p = gen_uniform_cube(20_000, 2, 8);
        let opts = WelzlOptions::default();
        let a = welzl_parallel(&p, opts, 100).unwrap();
        let b = welzl_seq(&p, opts).unwrap();
        assert!(close(a.radius, b.radius, 1e-9));
        assert!(a.max_excess(&p) <= BALL_EPS);
    }

    #[test]
    fn sampling_examines_a_prefix() {
        let p = gen_uniform_cube(200_000, 2, 1);
        let (b, stats) = seb_sampling(&p, SAMPLE_SEGMENT, &mut Rng::new(5)).unwrap();
        assert!(stats.sampled < p.len());
        let o = seb_orthant(&p).unwrap();
        assert!(close(b.radius, o.radius, 1e-6));
    }

    fn random_set(seed: u64, n: usize, d: usize) -> PointSet {
        gen_uniform_cube(n, d, seed)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn all_algorithms_match_the_oracle(seed in 0u64..10_000, n in 1usize..25, d in 2usize..4) {
            let p = random_set(seed, n, d);
            let exact = miniball_brute_force(&p).unwrap();
            let balls = [
                seb_orthant(&p).unwrap(),
                seb_sampling(&p, 4, &mut Rng::new(seed)).unwrap().0,
                welzl_seq(&p, WelzlOptions { mtf: false, pivot: false, seed }).unwrap(),
                welzl_seq(&p, WelzlOptions { mtf: true, pivot: false, seed }).unwrap(),
                welzl_seq(&p, WelzlOptions { mtf: true, pivot: true, seed }).unwrap(),
                welzl_parallel(&p, WelzlOptions::default(), 3).unwrap(),
            ];
            for b in balls {
                prop_assert!(close(b.radius, exact.radius, 1e-6), "{} vs {}", b.radius, exact.radius);
                prop_assert!(b.max_excess(&p) <= BALL_EPS);
                prop_assert!(b.support.len() <= d + 1 && !b.support.is_empty());
                for &s in &b.support {
                    let r = dist_sq(p.point(s), &b.center).sqrt();
                    prop_assert!((r - b.radius).abs() <= BALL_EPS * b.radius.max(1e-300) + 1e-12);
                }
            }
        }

        #[test]
        fn updates_never_shrink(seed in 0u64..10_000) {
            let p = random_set(seed, 200, 3);
            let ids: Vec<usize> = (0..p.len()).collect();
            let mut ball = initial_ball(&p, &ids);
            loop {
                let scan = orthant_scan(&p, &ids, &ball);
                if !scan.has_outlier { break; }
                let nb = seb_update(&p, &ball, &scan);
                prop_assert!(nb.radius >= ball.radius);
                ball = nb;
            }
        }
    }
}
