//! Acceptance run: one PASS/FAIL line per criterion. Exits non-zero if any
//! criterion fails.

use std::time::Instant;

use pargeo::bdl::{BdlTree, BloomFilter, BLOOM_BITS_PER_KEY, BLOOM_HASHES};
use pargeo::generators::{gen_in_sphere, gen_on_sphere, gen_uniform_cube, DistKind, Distribution};
use pargeo::hull::{
    hull2d_quickhull, hull2d_randinc, hull3d_pseudo, hull3d_quickhull, hull3d_randinc,
    hull3d_serial_quickhull, hull_divide_conquer, HullMesh, BATCH_FACTOR, PSEUDOHULL_THRESHOLD,
};
use pargeo::kdtree::{Heuristic, KnnBuffer, NodeView, StaticTree};
use pargeo::oracle::{check_hull3d, encloses, hull3d_brute_force, knn_linear_scan, miniball_brute_force};
use pargeo::seb::{seb_orthant, seb_sampling, welzl_parallel, welzl_seq, Ball, WelzlOptions, SAMPLE_SEGMENT};
use pargeo::{PointSet, Rng};
use rand::Rng as _;

// tolerances
const C1_TIME_LIMIT_S: f64 = 60.0;
const C3_OVERHEAD: f64 = 3.0;
const SEB_REL_TOL: f64 = 1e-6;
const C5_SAMPLED_FRACTION: f64 = 0.25;
const C10_FP_RATE: f64 = 0.02;
const C12_SPEEDUP: f64 = 2.0;

type Outcome = Result<String, String>;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
        .install(f)
}

fn max_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= SEB_REL_TOL * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn all_hulls3d(pts: &[[f64; 3]], seed: u64) -> pargeo::Result<Vec<(&'static str, HullMesh<3>)>> {
    Ok(vec![
        ("randinc", hull3d_randinc(pts, &mut Rng::new(seed), BATCH_FACTOR)?),
        ("quickhull", hull3d_quickhull(pts, BATCH_FACTOR)?),
        ("serial", hull3d_serial_quickhull(pts)?),
        ("dc", hull_divide_conquer(pts, rayon::current_num_threads(), BATCH_FACTOR)?),
        ("pseudo", hull3d_pseudo(pts, PSEUDOHULL_THRESHOLD)?),
    ])
}

fn c1() -> Outcome {
    let t = Instant::now();
    let mut rng = Rng::new(1);
    for inst in 0..200u64 {
        let kind = DistKind::ALL[inst as usize % 4];
        let n = rng.random_range(10..=100);
        let pts = Distribution::new(kind, n, 3, inst).unwrap().generate().to_arrays::<3>().unwrap();
        let want = hull3d_brute_force(&pts).map_err(|e| format!("oracle: {e}"))?;
        for (name, mesh) in all_hulls3d(&pts, inst).map_err(|e| e.to_string())? {
            if mesh.vertices != want {
                return Err(format!("{name} differs on instance {inst} ({} n={n})", kind.tag()));
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    if secs < C1_TIME_LIMIT_S {
        Ok(format!("200 instances, 5 algorithms, {secs:.1}s"))
    } else {
        Err(format!("took {secs:.1}s"))
    }
}

fn c2() -> Outcome {
    let mut notes = Vec::new();
    for (tag, pts) in [
        ("3D-IS-100K", gen_in_sphere(100_000, 3, 2)),
        ("3D-OS-100K", gen_on_sphere(100_000, 3, 2)),
    ] {
        let pts = pts.to_arrays::<3>().unwrap();
        let hulls = all_hulls3d(&pts, 2).map_err(|e| e.to_string())?;
        let base = &hulls[0].1.vertices;
        for (name, mesh) in &hulls {
            check_hull3d(&pts, mesh).map_err(|e| format!("{tag} {name}: {e}"))?;
            if &mesh.vertices != base {
                return Err(format!("{tag}: {name} vertex set differs from randinc"));
            }
        }
        notes.push(format!("{tag} V={}", base.len()));
    }
    Ok(notes.join(", "))
}

fn c3() -> Outcome {
    let pts = gen_in_sphere(100_000, 3, 3).to_arrays::<3>().unwrap();
    let (res, ser) = in_pool(1, || (hull3d_quickhull(&pts, BATCH_FACTOR), hull3d_serial_quickhull(&pts)));
    let (res, ser) = (res.map_err(|e| e.to_string())?, ser.map_err(|e| e.to_string())?);
    let ratio = res.stats.point_touches as f64 / ser.stats.point_touches as f64;
    let msg = format!(
        "touches {} vs {} (ratio {ratio:.3}, limit {C3_OVERHEAD})",
        res.stats.point_touches, ser.stats.point_touches
    );
    if ratio <= C3_OVERHEAD {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn all_balls(p: &PointSet, seed: u64) -> pargeo::Result<Vec<(&'static str, Ball)>> {
    let opt = |mtf, pivot| WelzlOptions { mtf, pivot, seed };
    Ok(vec![
        ("orthant", seb_orthant(p)?),
        ("sampling", seb_sampling(p, SAMPLE_SEGMENT, &mut Rng::new(seed))?.0),
        ("welzl", welzl_seq(p, opt(false, false))?),
        ("welzl-mtf", welzl_seq(p, opt(true, false))?),
        ("welzl-pivot", welzl_seq(p, opt(true, true))?),
        ("welzl-par", welzl_parallel(p, opt(true, true), 1000)?),
    ])
}

fn c4() -> Outcome {
    let mut rng = Rng::new(4);
    for inst in 0..500u64 {
        let n = rng.random_range(1..=30);
        let d = rng.random_range(2..=3);
        let kind = DistKind::ALL[inst as usize % 4];
        let p = Distribution::new(kind, n, d, inst).unwrap().generate();
        let exact = miniball_brute_force(&p).map_err(|e| e.to_string())?;
        for (name, b) in all_balls(&p, inst).map_err(|e| e.to_string())? {
            if !rel_close(b.radius, exact.radius) || !encloses(&p, &b) {
                return Err(format!("{name} on instance {inst}: {} vs {}", b.radius, exact.radius));
            }
        }
    }
    for d in [2, 3] {
        let p = gen_uniform_cube(100_000, d, 40 + d as u64);
        let balls = all_balls(&p, 4).map_err(|e| e.to_string())?;
        let r0 = balls[0].1.radius;
        for (name, b) in &balls {
            if !rel_close(b.radius, r0) || !encloses(&p, b) {
                return Err(format!("n=1e5 d={d}: {name} radius {} vs {r0}", b.radius));
            }
        }
    }
    Ok("500 small instances + 2 large, 6 algorithms".into())
}

fn c5() -> Outcome {
    let n = 1_000_000;
    let mut fractions: Vec<f64> = (0..10u64)
        .map(|seed| {
            let p = gen_uniform_cube(n, 2, 500 + seed);
            let (_, stats) = seb_sampling(&p, SAMPLE_SEGMENT, &mut Rng::new(seed)).unwrap();
            stats.sampled as f64 / n as f64
        })
        .collect();
    fractions.sort_by(f64::total_cmp);
    let median = (fractions[4] + fractions[5]) / 2.0;
    let msg = format!("median sampled fraction {:.4}% (limit {}%)", 100.0 * median, 100.0 * C5_SAMPLED_FRACTION);
    if median <= C5_SAMPLED_FRACTION {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c6() -> Outcome {
    let rows: Vec<[f64; 2]> = (0..8).map(|i| [i as f64, 0.0]).collect();
    let p = PointSet::from_rows(2, &rows).unwrap();
    let ids: Vec<u64> = (0..8).collect();
    let t = StaticTree::build_with(&p, &ids, Heuristic::ObjectMedian, 1);
    let kids = |s: usize| match t.node(s) {
        NodeView::Internal { left, right, .. } => Ok((left, right)),
        NodeView::Leaf { .. } => Err(format!("slot {s} is a leaf")),
    };
    let top = (t.root(), kids(0)?);
    if top != (Some(0), (Some(1), Some(2))) {
        return Err(format!("top tree {top:?}"));
    }
    let (a, b) = kids(1)?;
    let (c, d) = kids(2)?;
    let subs = [a, b, c, d];
    if subs != [Some(3), Some(6), Some(9), Some(12)] {
        return Err(format!("subtree roots {subs:?}"));
    }
    for s in [3, 6, 9, 12] {
        if kids(s)? != (Some(s + 1), Some(s + 2)) {
            return Err(format!("subtree at {s} not contiguous"));
        }
    }
    Ok("top at 0-2, subtrees at 3, 6, 9, 12".into())
}

fn c7() -> Outcome {
    let mut rng = Rng::new(7);
    for script in 0..1000u64 {
        let heuristic = if script % 2 == 0 { Heuristic::ObjectMedian } else { Heuristic::SpatialMedian };
        let n = rng.random_range(1..=10_000);
        let d = rng.random_range(2..=5);
        let kind = DistKind::ALL[script as usize % 4];
        let p = Distribution::new(kind, n, d, script).unwrap().generate();
        let mut tree = StaticTree::build(&p, heuristic);
        let erased: Vec<usize> = (0..rng.random_range(0..=n / 2)).map(|_| rng.random_range(0..n)).collect();
        let gone = p.select(&erased);
        tree.erase(&gone);
        let key = |q: &[f64]| q.iter().map(|c| (c + 0.0).to_bits()).collect::<Vec<u64>>();
        let gone_keys: std::collections::HashSet<Vec<u64>> = gone.iter().map(key).collect();
        let dead: Vec<bool> = (0..n).map(|i| gone_keys.contains(&key(p.point(i)))).collect();
        let k = rng.random_range(1..=10);
        let queries = gen_uniform_cube(8, d, script + 10_000);
        for q in queries.iter() {
            let mut buf = KnnBuffer::new(k);
            tree.knn(q, &mut buf);
            let got = buf.extract();
            let want: Vec<(f64, u64)> = knn_linear_scan(&p, |i| !dead[i], q, k)
                .into_iter()
                .map(|(dd, i)| (dd, i as u64))
                .collect();
            if got != want {
                return Err(format!("script {script} ({heuristic:?}, n={n}, d={d}, k={k})"));
            }
        }
    }
    Ok("1000 scripts, both heuristics".into())
}

fn c8() -> Outcome {
    let want = [(1, 0), (2, 1), (3, 2), (4, 1)];
    for x in [4usize, 1024] {
        let mut t = BdlTree::with_buffer(3, x, Heuristic::ObjectMedian);
        for (step, (n, expect)) in [x, x + 1, x + 1, x - 1].into_iter().zip(want).enumerate() {
            t.insert(&gen_uniform_cube(n, 3, step as u64)).map_err(|e| e.to_string())?;
            t.check_invariants().map_err(|e| format!("X={x} step {step}: {e}"))?;
            let got = (t.mask(), t.buffer_len());
            if got != expect {
                return Err(format!("X={x} panel {step}: (mask, buffer) {got:?}, want {expect:?}"));
            }
        }
    }
    Ok("X=4 and X=1024: masks 1,2,3,4 with buffers 0,1,2,1".into())
}

fn c9() -> Outcome {
    let mut rng = Rng::new(9);
    let mut steps = 0;
    for script in 0..200u64 {
        let x = [2usize, 4, 8][script as usize % 3];
        let d = 2;
        let mut t = BdlTree::with_buffer(d, x, Heuristic::ObjectMedian);
        let mut model: Vec<([f64; 2], u64)> = Vec::new();
        for op in 0..rng.random_range(1..=30) {
            let n = rng.random_range(0..=5 * x);
            // a small grid forces duplicates and misses
            let batch: Vec<[f64; 2]> =
                (0..n).map(|_| [rng.random_range(0..8) as f64, rng.random_range(0..8) as f64]).collect();
            let ps = if batch.is_empty() { PointSet::empty(d) } else { PointSet::from_rows(d, &batch).unwrap() };
            let fail = |what: &str| format!("script {script} op {op}: {what}");
            match rng.random_range(0..3) {
                0 => {
                    let ids = t.insert(&ps).map_err(|e| fail(&e.to_string()))?;
                    model.extend(batch.iter().copied().zip(ids));
                }
                1 => {
                    t.erase(&ps).map_err(|e| fail(&e.to_string()))?;
                    model.retain(|(p, _)| !batch.contains(p));
                    t.check_invariants().map_err(|e| fail(&e))?;
                }
                _ => {
                    let k = rng.random_range(1..=4);
                    let got = t.knn(&ps, k).map_err(|e| fail(&e.to_string()))?;
                    for (q, res) in batch.iter().zip(got) {
                        let mut want: Vec<(f64, u64)> = model
                            .iter()
                            .map(|(p, id)| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2), *id))
                            .collect();
                        want.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                        want.truncate(k);
                        if res != want {
                            return Err(fail("kNN mismatch"));
                        }
                    }
                }
            }
            t.check_invariants().map_err(|e| fail(&e))?;
            let (_, mut ids) = t.points();
            let mut want: Vec<u64> = model.iter().map(|m| m.1).collect();
            ids.sort_unstable();
            want.sort_unstable();
            if ids != want {
                return Err(fail("live multiset differs from model"));
            }
            steps += 1;
        }
    }
    Ok(format!("200 scripts, {steps} steps"))
}

fn c10() -> Outcome {
    let keys = gen_uniform_cube(100_000, 3, 10);
    let f = BloomFilter::build(keys.coords(), 3, BLOOM_BITS_PER_KEY, BLOOM_HASHES);
    let misses = keys.iter().filter(|p| !f.may_contain(p)).count();
    if misses > 0 {
        return Err(format!("{misses} false negatives"));
    }
    let probes = gen_uniform_cube(100_000, 3, 11);
    let rate = probes.iter().filter(|p| f.may_contain(p)).count() as f64 / probes.len() as f64;
    let msg = format!("0 false negatives, false-positive rate {:.3}% (limit {}%)", 100.0 * rate, 100.0 * C10_FP_RATE);
    if rate <= C10_FP_RATE {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Everything an algorithm reports, as a comparable string.
fn summaries() -> Vec<(String, String)> {
    let mut out = Vec::new();
    let p3 = gen_in_sphere(20_000, 3, 11).to_arrays::<3>().unwrap();
    for (name, m) in all_hulls3d(&p3, 11).unwrap() {
        out.push((format!("hull3d {name}"), format!("{:?}", m.vertices)));
    }
    let p2 = gen_on_sphere(20_000, 2, 11).to_arrays::<2>().unwrap();
    out.push(("hull2d quickhull".into(), format!("{:?}", hull2d_quickhull(&p2).unwrap())));
    out.push(("hull2d randinc".into(), format!("{:?}", hull2d_randinc(&p2, &mut Rng::new(11)).unwrap().vertices)));
    out.push((
        "hull2d dc".into(),
        format!("{:?}", hull_divide_conquer(&p2, rayon::current_num_threads(), BATCH_FACTOR).unwrap().vertices),
    ));
    let ps = gen_uniform_cube(50_000, 3, 11);
    for (name, b) in all_balls(&ps, 11).unwrap() {
        out.push((format!("seb {name}"), format!("{:e}", b.radius)));
    }
    let pk = gen_uniform_cube(20_000, 4, 11);
    let q = gen_uniform_cube(200, 4, 12);
    for h in [Heuristic::ObjectMedian, Heuristic::SpatialMedian] {
        let t = StaticTree::build(&pk, h);
        let mut bufs: Vec<KnnBuffer> = (0..q.len()).map(|_| KnnBuffer::new(5)).collect();
        t.knn_batch(&q, &mut bufs);
        let ids: Vec<Vec<u64>> = bufs.into_iter().map(|b| b.extract().into_iter().map(|r| r.1).collect()).collect();
        out.push((format!("kdtree {h:?}"), format!("{ids:?}")));
        let bdl = BdlTree::build(&pk, 1024, h).unwrap();
        let ids: Vec<Vec<u64>> =
            bdl.knn(&q, 5).unwrap().into_iter().map(|r| r.into_iter().map(|x| x.1).collect()).collect();
        out.push((format!("bdl {h:?}"), format!("{ids:?}")));
    }
    out
}

fn c11() -> Outcome {
    let mut widths = vec![1, 2, max_threads()];
    widths.sort_unstable();
    widths.dedup();
    let base = in_pool(1, summaries);
    for &w in &widths[1..] {
        let other = in_pool(w, summaries);
        for ((name, a), (_, b)) in base.iter().zip(&other) {
            if a != b {
                return Err(format!("{name} differs between 1 and {w} threads"));
            }
        }
    }
    Ok(format!("{} algorithms at widths {widths:?}", base.len()))
}

fn c12() -> Option<Outcome> {
    let p = max_threads();
    if p < 4 {
        return None;
    }
    let time = |threads: usize, f: &(dyn Fn() + Sync)| {
        in_pool(threads, || {
            let t = Instant::now();
            f();
            t.elapsed().as_secs_f64()
        })
    };
    let p2 = gen_uniform_cube(1_000_000, 2, 12).to_arrays::<2>().unwrap();
    let dc = || {
        hull_divide_conquer(&p2, rayon::current_num_threads(), BATCH_FACTOR).unwrap();
    };
    let p5 = gen_uniform_cube(1_000_000, 5, 12);
    let bdl = || {
        BdlTree::build(&p5, 1024, Heuristic::ObjectMedian).unwrap();
    };
    let s_dc = time(1, &dc) / time(p, &dc);
    let s_bdl = time(1, &bdl) / time(p, &bdl);
    let msg = format!("{p} threads: dc hull {s_dc:.2}x, bdl build {s_bdl:.2}x (limit {C12_SPEEDUP}x)");
    Some(if s_dc >= C12_SPEEDUP && s_bdl >= C12_SPEEDUP { Ok(msg) } else { Err(msg) })
}

fn main() {
    type Criterion = (&'static str, &'static str, fn() -> Option<Outcome>);
    let criteria: Vec<Criterion> = vec![
        ("C1", "hull oracle equivalence", || Some(c1())),
        ("C2", "hull structural suite", || Some(c2())),
        ("C3", "reservation overhead", || Some(c3())),
        ("C4", "SEB oracle equivalence", || Some(c4())),
        ("C5", "sampling-phase effectiveness", || Some(c5())),
        ("C6", "vEB layout", || Some(c6())),
        ("C7", "kd-tree oracles", || Some(c7())),
        ("C8", "BDL bitmask protocol", || Some(c8())),
        ("C9", "BDL model equivalence", || Some(c9())),
        ("C10", "bloom filter", || Some(c10())),
        ("C11", "parallel determinism", || Some(c11())),
        ("C12", "scaling smoke test", c12),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        let t = Instant::now();
        let line = match std::panic::catch_unwind(f) {
            Ok(Some(Ok(msg))) => format!("PASS {id} {name}: {msg}"),
            Ok(Some(Err(msg))) => {
                failed += 1;
                format!("FAIL {id} {name}: {msg}")
            }
            Ok(None) => format!("N/A  {id} {name}: needs >= 4 cores, host has {}", max_threads()),
            Err(_) => {
                failed += 1;
                format!("FAIL {id} {name}: panicked")
            }
        };
        println!("{line} [{:.1}s]", t.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
