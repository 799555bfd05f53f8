// Static kd-tree: batch kNN, then deletions.

use pargeo::generators::gen_uniform_cube;
use pargeo::kdtree::{Heuristic, KnnBuffer, StaticTree, LEAF_CAP};
use pargeo::oracle::knn_linear_scan;

pub fn run_example() {
    let p = gen_uniform_cube(100_000, 3, 5);
    let mut tree = StaticTree::build(&p, Heuristic::ObjectMedian);
    tree.check_invariants(LEAF_CAP).unwrap();

    let queries = gen_uniform_cube(1000, 3, 6);
    let k = 8;
    let mut bufs: Vec<KnnBuffer> = (0..queries.len()).map(|_| KnnBuffer::new(k)).collect();
    tree.knn_batch(&queries, &mut bufs);
    let first = bufs.swap_remove(0).extract();
    println!("nearest to {:?}:", queries.point(0));
    for (d2, id) in &first {
        println!("  #{id} at distance {:.5}", d2.sqrt());
    }

    // tombstone the answer and ask again: the next ones move up
    let gone: Vec<usize> = first.iter().map(|e| e.1 as usize).take(4).collect();
    tree.erase(&p.select(&gone));
    let mut buf = KnnBuffer::new(k);
    tree.knn(queries.point(0), &mut buf);
    let after = buf.extract();
    let want: Vec<(f64, u64)> = knn_linear_scan(&p, |i| !gone.contains(&i), queries.point(0), k)
        .into_iter()
        .map(|(d, i)| (d, i as u64))
        .collect();
    assert_eq!(after, want);
    println!("after erasing 4: live={}, nearest now #{}", tree.live(), after[0].1);
}

#[allow(dead_code)]
fn main() {
    run_example();
}
