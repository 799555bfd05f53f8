// 3D hulls of a ball of points: every driver gives the same vertex set.

use pargeo::generators::gen_in_sphere;
use pargeo::hull::{self, HullOptions, PSEUDOHULL_THRESHOLD};
use pargeo::oracle::check_hull3d;
use pargeo::Rng;

pub fn run_example() {
    let pts = gen_in_sphere(50_000, 3, 7).to_arrays::<3>().unwrap();

    let ri = hull::randinc(&pts, &mut Rng::new(1), HullOptions::default()).unwrap();
    let qh = hull::quickhull(&pts, HullOptions::default()).unwrap();
    let dc = hull::hull_divide_conquer(&pts, rayon::current_num_threads(), hull::BATCH_FACTOR).unwrap();
    let ps = hull::hull3d_pseudo(&pts, PSEUDOHULL_THRESHOLD).unwrap();

    check_hull3d(&pts, &qh).expect("closed, convex, encloses the input");
    for m in [&ri, &dc, &ps] {
        assert_eq!(m.vertices, qh.vertices);
    }
    println!(
        "{} points -> {} vertices, {} facets",
        pts.len(),
        qh.vertices.len(),
        qh.facets.len()
    );
    println!(
        "randinc: {} rounds, {} reservation failures",
        ri.stats.rounds, ri.stats.reservation_failures
    );
    println!("quickhull: {} rounds", qh.stats.rounds);
}

#[allow(dead_code)]
fn main() {
    run_example();
}
