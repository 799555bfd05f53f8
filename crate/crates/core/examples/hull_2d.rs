// Planar hull in counter-clockwise order.

use pargeo::hull::{hull2d_quickhull, hull2d_randinc};
use pargeo::{PointSet, Rng};

pub fn run_example() {
    let rows = [[0.0, 0.0], [4.0, 0.0], [4.0, 3.0], [0.0, 3.0], [2.0, 1.0], [1.0, 2.0], [2.0, 0.0]];
    let pts = PointSet::from_rows(2, &rows).unwrap().to_arrays::<2>().unwrap();

    // (2,0) lies on an edge: not a vertex
    let cycle = hull2d_quickhull(&pts).unwrap();
    assert_eq!(cycle, vec![0, 1, 2, 3]);
    let mesh = hull2d_randinc(&pts, &mut Rng::new(3)).unwrap();
    assert_eq!(mesh.cycle(), cycle);
    for i in cycle {
        println!("({}, {})", pts[i][0], pts[i][1]);
    }
}

#[allow(dead_code)]
fn main() {
    run_example();
}
