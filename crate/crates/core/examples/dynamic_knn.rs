// Batch-dynamic kd-tree: inserts fill a buffer and static trees of doubling
// size; the bitmask shows which are present.

use pargeo::bdl::BdlTree;
use pargeo::generators::gen_uniform_cube;
use pargeo::kdtree::Heuristic;

pub fn run_example() {
    let x = 1000;
    let mut t = BdlTree::with_buffer(2, x, Heuristic::ObjectMedian);
    for (i, n) in [x, x + 1, x + 1, x - 1].into_iter().enumerate() {
        t.insert(&gen_uniform_cube(n, 2, i as u64)).unwrap();
        println!("+{n:>5}: mask {:04b}, buffer {}", t.mask(), t.buffer_len());
    }
    t.check_invariants().unwrap();

    let queries = gen_uniform_cube(3, 2, 99);
    let before = t.knn(&queries, 3).unwrap();
    let (pts, _) = t.points();
    let half: Vec<usize> = (0..pts.len()).step_by(2).collect();
    t.erase(&pts.select(&half)).unwrap();
    t.check_invariants().unwrap();
    let after = t.knn(&queries, 3).unwrap();
    println!("erased {}: {} live, mask {:04b}", half.len(), t.len(), t.mask());
    for (b, a) in before.iter().zip(&after) {
        let ids = |r: &[(f64, u64)]| r.iter().map(|e| e.1).collect::<Vec<_>>();
        println!("  {:?} -> {:?}", ids(b), ids(a));
    }
}

#[allow(dead_code)]
fn main() {
    run_example();
}
