// Smallest enclosing ball, four ways.

use pargeo::generators::gen_uniform_cube;
use pargeo::seb::{self, WelzlOptions, SAMPLE_SEGMENT, WELZL_SERIAL_CUTOFF};
use pargeo::Rng;

pub fn run_example() {
    let p = gen_uniform_cube(200_000, 3, 11);

    let (ball, stats) = seb::seb_sampling(&p, SAMPLE_SEGMENT, &mut Rng::new(11)).unwrap();
    let orth = seb::seb_orthant(&p).unwrap();
    let welzl = seb::welzl_seq(&p, WelzlOptions::default()).unwrap();
    let par = seb::welzl_parallel(&p, WelzlOptions::default(), WELZL_SERIAL_CUTOFF).unwrap();

    for other in [&orth, &welzl, &par] {
        assert!((other.radius - ball.radius).abs() <= 1e-6 * ball.radius);
    }
    assert!(ball.max_excess(&p) <= seb::BALL_EPS);
    println!("center {:?}", ball.center);
    println!("radius {:.9}, support {:?}", ball.radius, ball.support);
    println!(
        "sampling looked at {} of {} points ({:.2}%) before the full scans",
        stats.sampled,
        p.len(),
        100.0 * stats.sampled as f64 / p.len() as f64
    );
}

#[allow(dead_code)]
fn main() {
    run_example();
}
