// Timing records in the CSV schema and the self-relative speedup report.

use std::time::Instant;

use pargeo::bench::{report, write_records, write_report, BenchRecord};
use pargeo::generators::Distribution;
use pargeo::generators::DistKind;
use pargeo::hull::{hull_divide_conquer, BATCH_FACTOR};

pub fn run_example() {
    let dist = Distribution::new(DistKind::UniformCube, 200_000, 2, 1).unwrap();
    let pts = dist.generate().to_arrays::<2>().unwrap();
    let mut records = Vec::new();
    for threads in [1, 2] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let t = Instant::now();
        let mesh = pool.install(|| hull_divide_conquer(&pts, threads, BATCH_FACTOR)).unwrap();
        records.push(BenchRecord {
            algorithm: "hull-dc".into(),
            dataset: dist.tag(),
            n: pts.len(),
            d: 2,
            threads,
            seconds: t.elapsed().as_secs_f64(),
            summary: format!("vertices={}", mesh.vertices.len()),
        });
    }
    let mut csv = Vec::new();
    write_records(&mut csv, &records).unwrap();
    print!("{}", String::from_utf8(csv).unwrap());

    let (rows, warnings) = report(&records);
    assert!(warnings.is_empty());
    let mut out = Vec::new();
    write_report(&mut out, &rows).unwrap();
    print!("{}", String::from_utf8(out).unwrap());
}

#[allow(dead_code)]
fn main() {
    run_example();
}
