//! The `pargeo` command line: dataset generation, timed algorithm runs with
//! optional oracle checks, BDL-tree scripts, and speedup reports.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bdl::{BdlTree, BUFFER_CAP};
use crate::bench::{checksum, read_records, report, write_records, write_report, BenchRecord};
use crate::error::{Error, Result};
use crate::generators::{dataset_tag, DistKind, Distribution};
use crate::hull::{self, HullMesh, HullOptions, BATCH_FACTOR, PSEUDOHULL_THRESHOLD};
use crate::io::{read_points_file, write_points, write_points_file};
use crate::kdtree::{Heuristic, KnnBuffer, StaticTree};
use crate::oracle;
use crate::point::PointSet;
use crate::random::Rng;
use crate::seb::{self, Ball, WelzlOptions, SAMPLE_SEGMENT, WELZL_SERIAL_CUTOFF};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CHECK: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "pargeo", version, about = "Parallel computational geometry benchmarks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic point set.
    Generate(GenArgs),
    /// Convex hull (2D or 3D).
    Hull(RunArgs),
    /// Smallest enclosing ball.
    Seb(RunArgs),
    /// k nearest neighbors of every input point.
    Knn(RunArgs),
    /// Run a script of `insert <file>`, `erase <file>`, `knn <file> <k>` lines
    /// against one BDL-tree.
    BdlScript(ScriptArgs),
    /// Add self-relative speedups to benchmark CSV files.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DistArg {
    #[value(name = "U")]
    U,
    #[value(name = "IS")]
    Is,
    #[value(name = "OS")]
    Os,
    #[value(name = "OC")]
    Oc,
}

impl From<DistArg> for DistKind {
    fn from(d: DistArg) -> Self {
        match d {
            DistArg::U => DistKind::UniformCube,
            DistArg::Is => DistKind::InSphere,
            DistArg::Os => DistKind::OnSphere,
            DistArg::Oc => DistKind::OnCube,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(short = 'n', default_value_t = 1000)]
    pub n: usize,
    #[arg(short = 'd', default_value_t = 2)]
    pub d: usize,
    #[arg(long, value_enum, default_value = "U")]
    pub dist: DistArg,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output file (stdout if absent).
    #[arg(short = 'o')]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Point file; when absent a set is generated from -n/-d/--dist/--seed.
    pub input: Option<PathBuf>,
    #[arg(short = 'n', default_value_t = 10_000)]
    pub n: usize,
    #[arg(short = 'd', default_value_t = 3)]
    pub d: usize,
    #[arg(long, value_enum, default_value = "U")]
    pub dist: DistArg,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Algorithm; see the README for the names each task accepts.
    #[arg(long)]
    pub algo: Option<String>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(short = 'k', default_value_t = 1)]
    pub k: usize,
    /// Hull round multiplier c, SEB sampling segment, or BDL buffer size.
    #[arg(long)]
    pub batch: Option<usize>,
    /// Validate the result against the brute-force oracles.
    #[arg(long)]
    pub check: bool,
    /// Result file.
    #[arg(short = 'o')]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScriptArgs {
    pub script: PathBuf,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Buffer capacity X.
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(short = 'd')]
    pub d: Option<usize>,
    #[arg(long)]
    pub check: bool,
    #[arg(short = 'o')]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Benchmark CSV files.
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    #[arg(short = 'o')]
    pub out: Option<PathBuf>,
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::Degenerate { .. } => EXIT_USAGE,
        Error::Internal(_) => EXIT_CHECK,
        Error::Io(_) | Error::Csv(_) | Error::Parse { .. } => EXIT_IO,
    }
}

/// Outcome of a run: the CSV record plus any oracle mismatch.
#[derive(Debug)]
pub struct Outcome {
    pub records: Vec<BenchRecord>,
    pub check_failures: Vec<String>,
}

/// Parses `args` (including the program name) and runs the command,
/// writing CSV to `stdout`. Returns the process exit code.
pub fn main_with(args: impl IntoIterator<Item = String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli, stdout, stderr) {
        Ok(out) => {
            if out.check_failures.is_empty() {
                EXIT_OK
            } else {
                for f in &out.check_failures {
                    let _ = writeln!(stderr, "check failed: {f}");
                }
                EXIT_CHECK
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(Error::invalid("--threads must be positive"));
        }
        b = b.num_threads(t);
    }
    b.build().map_err(|e| Error::Internal(format!("thread pool: {e}")))
}

pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<Outcome> {
    let outcome = match cli.command {
        Command::Generate(a) => {
            let dist = Distribution::new(a.dist.into(), a.n, a.d, a.seed)?;
            let pts = dist.generate();
            match &a.out {
                Some(path) => {
                    write_points_file(path, &pts)?;
                    writeln!(stdout, "{}", dist.tag())?;
                }
                None => {
                    write_points(&mut *stdout, &pts)?;
                    writeln!(stderr, "{}", dist.tag())?;
                }
            }
            return Ok(Outcome {
                records: Vec::new(),
                check_failures: Vec::new(),
            });
        }
        Command::Report(a) => {
            let mut records = Vec::new();
            for f in &a.files {
                records.extend(read_records(std::fs::File::open(f)?)?);
            }
            let (rows, warnings) = report(&records);
            for w in warnings {
                writeln!(stderr, "warning: {w}")?;
            }
            match &a.out {
                Some(p) => write_report(std::fs::File::create(p)?, &rows)?,
                None => write_report(&mut *stdout, &rows)?,
            }
            return Ok(Outcome {
                records: Vec::new(),
                check_failures: Vec::new(),
            });
        }
        Command::Hull(a) => {
            let p = pool(a.threads)?;
            p.install(|| run_hull(&a))?
        }
        Command::Seb(a) => {
            let p = pool(a.threads)?;
            p.install(|| run_seb(&a))?
        }
        Command::Knn(a) => {
            let p = pool(a.threads)?;
            p.install(|| run_knn(&a))?
        }
        Command::BdlScript(a) => {
            let p = pool(a.threads)?;
            p.install(|| run_script(&a))?
        }
    };
    write_records(&mut *stdout, &outcome.0.records)?;
    if let Some(path) = outcome.1 {
        std::fs::write(path, outcome.2)?;
    }
    Ok(outcome.0)
}

type RunResult = (Outcome, Option<PathBuf>, String);

fn load(a: &RunArgs) -> Result<(PointSet, String)> {
    match &a.input {
        Some(path) => {
            let pts = read_points_file(path)?;
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "file".into());
            let tag = dataset_tag(pts.dim(), &name, pts.len());
            Ok((pts, tag))
        }
        None => {
            let dist = Distribution::new(a.dist.into(), a.n, a.d, a.seed)?;
            Ok((dist.generate(), dist.tag()))
        }
    }
}

fn record(algorithm: &str, dataset: &str, pts: &PointSet, seconds: f64, summary: String) -> BenchRecord {
    BenchRecord {
        algorithm: algorithm.to_string(),
        dataset: dataset.to_string(),
        n: pts.len(),
        d: pts.dim(),
        threads: rayon::current_num_threads(),
        seconds,
        summary,
    }
}

fn hull_text<const D: usize>(mesh: &HullMesh<D>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "vertices {}", mesh.vertices.len());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{v}");
    }
    let _ = writeln!(s, "facets {}", mesh.facets.len());
    for f in &mesh.facets {
        let ids: Vec<String> = f.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", ids.join(" "));
    }
    s
}

fn hull_summary(vertices: &[usize]) -> String {
    format!(
        "vertices={};checksum={:016x}",
        vertices.len(),
        checksum(vertices.iter().map(|&v| v as u64))
    )
}

fn run_hull(a: &RunArgs) -> Result<RunResult> {
    let (pts, tag) = load(a)?;
    let c = a.batch.unwrap_or(BATCH_FACTOR);
    let algo = a.algo.clone().unwrap_or_else(|| "quickhull".into());
    let threads = rayon::current_num_threads();
    let opts = HullOptions {
        batch_factor: c,
        verify_rounds: false,
    };
    let mut failures = Vec::new();
    let t0 = Instant::now();
    let (vertices, text, secs) = match pts.dim() {
        3 => {
            let arr = pts.to_arrays::<3>()?;
            let mesh = match algo.as_str() {
                "randinc" => hull::randinc(&arr, &mut Rng::new(a.seed), opts)?,
                "quickhull" => hull::quickhull(&arr, opts)?,
                "serial" => hull::serial_quickhull(&arr)?,
                "dc" => hull::hull_divide_conquer(&arr, threads, c)?,
                "pseudo" => hull::hull3d_pseudo(&arr, PSEUDOHULL_THRESHOLD)?,
                other => return Err(Error::invalid(format!("unknown 3D hull algorithm {other:?}"))),
            };
            let secs = t0.elapsed().as_secs_f64();
            if a.check {
                if let Err(e) = oracle::check_hull3d(&arr, &mesh) {
                    failures.push(e);
                }
                let reference = if arr.len() <= 100 {
                    oracle::hull3d_brute_force(&arr)?
                } else {
                    hull::serial_quickhull(&arr)?.vertices
                };
                if reference != mesh.vertices {
                    failures.push(format!(
                        "vertex set differs from the reference ({} vs {} vertices)",
                        mesh.vertices.len(),
                        reference.len()
                    ));
                }
            }
            (mesh.vertices.clone(), hull_text(&mesh), secs)
        }
        2 => {
            let arr = pts.to_arrays::<2>()?;
            let cycle: Vec<usize> = match algo.as_str() {
                "quickhull" => hull::hull2d_quickhull(&arr)?,
                "randinc" => hull::randinc(&arr, &mut Rng::new(a.seed), opts)?.cycle(),
                "serial" => hull::serial_quickhull(&arr)?.cycle(),
                "dc" => hull::hull_divide_conquer(&arr, threads, c)?.cycle(),
                other => return Err(Error::invalid(format!("unknown 2D hull algorithm {other:?}"))),
            };
            let secs = t0.elapsed().as_secs_f64();
            let mut vertices = cycle.clone();
            vertices.sort_unstable();
            if a.check {
                let mut reference = oracle::hull2d_monotone_chain(&arr);
                reference.sort_unstable();
                if reference != vertices {
                    failures.push("vertex set differs from the monotone-chain oracle".into());
                }
            }
            let facets: Vec<[usize; 2]> = (0..cycle.len())
                .map(|i| [cycle[i], cycle[(i + 1) % cycle.len()]])
                .collect();
            let mesh = HullMesh {
                facets,
                vertices: vertices.clone(),
                stats: Default::default(),
            };
            (vertices, hull_text(&mesh), secs)
        }
        d => return Err(Error::invalid(format!("hulls are 2D or 3D, got d={d}"))),
    };
    let rec = record(&format!("hull-{algo}"), &tag, &pts, secs, hull_summary(&vertices));
    Ok((
        Outcome {
            records: vec![rec],
            check_failures: failures,
        },
        a.out.clone(),
        text,
    ))
}

fn run_seb(a: &RunArgs) -> Result<RunResult> {
    let (pts, tag) = load(a)?;
    let algo = a.algo.clone().unwrap_or_else(|| "sampling".into());
    let welzl = |mtf, pivot| WelzlOptions {
        mtf,
        pivot,
        seed: a.seed,
    };
    let t0 = Instant::now();
    let ball: Ball = match algo.as_str() {
        "orthant" => seb::seb_orthant(&pts)?,
        "sampling" => seb::seb_sampling(&pts, a.batch.unwrap_or(SAMPLE_SEGMENT), &mut Rng::new(a.seed))?.0,
        "welzl" => seb::welzl_seq(&pts, welzl(false, false))?,
        "welzl-mtf" => seb::welzl_seq(&pts, welzl(true, false))?,
        "welzl-pivot" => seb::welzl_seq(&pts, welzl(true, true))?,
        "welzl-par" => seb::welzl_parallel(&pts, welzl(true, true), a.batch.unwrap_or(WELZL_SERIAL_CUTOFF))?,
        other => return Err(Error::invalid(format!("unknown SEB algorithm {other:?}"))),
    };
    let secs = t0.elapsed().as_secs_f64();
    let mut failures = Vec::new();
    if a.check {
        if !oracle::encloses(&pts, &ball) {
            failures.push(format!("ball misses points (excess {:e})", ball.max_excess(&pts)));
        }
        let reference = if pts.len() <= 30 {
            oracle::miniball_brute_force(&pts)?
        } else {
            seb::welzl_seq(&pts, WelzlOptions::default())?
        };
        let rel = (ball.radius - reference.radius).abs() / reference.radius.max(f64::MIN_POSITIVE);
        if rel > 1e-6 {
            failures.push(format!("radius {} vs reference {}", ball.radius, reference.radius));
        }
    }
    let mut text = String::new();
    let center: Vec<String> = ball.center.iter().map(|c| c.to_string()).collect();
    let _ = writeln!(text, "center {}", center.join(" "));
    let _ = writeln!(text, "radius {}", ball.radius);
    let support: Vec<String> = ball.support.iter().map(|s| s.to_string()).collect();
    let _ = writeln!(text, "support {}", support.join(" "));
    let rec = record(&format!("seb-{algo}"), &tag, &pts, secs, format!("radius={:.9e}", ball.radius));
    Ok((
        Outcome {
            records: vec![rec],
            check_failures: failures,
        },
        a.out.clone(),
        text,
    ))
}

fn knn_text(results: &[Vec<(f64, u64)>]) -> String {
    let mut s = String::new();
    for r in results {
        let ids: Vec<String> = r.iter().map(|e| e.1.to_string()).collect();
        let _ = writeln!(s, "{}", ids.join(" "));
    }
    s
}

fn knn_checksum(results: &[Vec<(f64, u64)>]) -> String {
    format!("checksum={:016x}", checksum(results.iter().flat_map(|r| r.iter().map(|e| e.1))))
}

fn check_knn(pts: &PointSet, live: impl Fn(usize) -> bool, queries: &PointSet, results: &[Vec<(f64, u64)>], k: usize) -> Vec<String> {
    let step = (queries.len() / 200).max(1);
    let mut failures = Vec::new();
    for i in (0..queries.len()).step_by(step) {
        let want: Vec<(f64, u64)> = oracle::knn_linear_scan(pts, &live, queries.point(i), k)
            .into_iter()
            .map(|(d, id)| (d, id as u64))
            .collect();
        if results[i] != want {
            failures.push(format!("query {i}: kNN differs from the linear scan"));
            break;
        }
    }
    failures
}

fn run_knn(a: &RunArgs) -> Result<RunResult> {
    let (pts, tag) = load(a)?;
    if a.k == 0 {
        return Err(Error::invalid("-k must be positive"));
    }
    let algo = a.algo.clone().unwrap_or_else(|| "kdtree".into());
    let t0 = Instant::now();
    let results: Vec<Vec<(f64, u64)>> = match algo.as_str() {
        "kdtree" | "kdtree-spatial" => {
            let h = if algo == "kdtree" { Heuristic::ObjectMedian } else { Heuristic::SpatialMedian };
            let tree = StaticTree::build(&pts, h);
            let mut bufs: Vec<KnnBuffer> = (0..pts.len()).map(|_| KnnBuffer::new(a.k)).collect();
            tree.knn_batch(&pts, &mut bufs);
            bufs.into_iter().map(KnnBuffer::extract).collect()
        }
        "bdl" => {
            let tree = BdlTree::build(&pts, a.batch.unwrap_or(BUFFER_CAP), Heuristic::ObjectMedian)?;
            tree.knn(&pts, a.k)?
        }
        other => return Err(Error::invalid(format!("unknown kNN algorithm {other:?}"))),
    };
    let secs = t0.elapsed().as_secs_f64();
    let failures = if a.check {
        check_knn(&pts, |_| true, &pts, &results, a.k)
    } else {
        Vec::new()
    };
    let rec = record(&format!("knn-{algo}"), &tag, &pts, secs, knn_checksum(&results));
    Ok((
        Outcome {
            records: vec![rec],
            check_failures: failures,
        },
        a.out.clone(),
        knn_text(&results),
    ))
}

fn resolve(base: &Path, file: &str) -> PathBuf {
    let p = Path::new(file);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn run_script(a: &ScriptArgs) -> Result<RunResult> {
    let script = std::fs::read_to_string(&a.script)?;
    let base = a.script.parent().unwrap_or(Path::new(".")).to_path_buf();
    let cap = a.batch.unwrap_or(BUFFER_CAP);
    if cap == 0 {
        return Err(Error::invalid("--batch must be positive"));
    }
    let mut tree: Option<BdlTree> = a.d.map(|d| BdlTree::with_buffer(d, cap, Heuristic::ObjectMedian));
    // model for --check: every inserted point with its id and liveness
    let mut model_coords: Vec<f64> = Vec::new();
    let mut model_live: Vec<bool> = Vec::new();
    let mut failures = Vec::new();
    let mut records = Vec::new();
    let mut text = String::new();
    let name = a
        .script
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "script".into());
    for (i, line) in script.lines().enumerate() {
        let lineno = i + 1;
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.is_empty() || words[0].starts_with('#') {
            continue;
        }
        let bad = |msg: &str| Error::Parse {
            line: lineno,
            msg: msg.to_string(),
        };
        let (op, file) = match words.as_slice() {
            [op @ ("insert" | "erase"), f] => (*op, *f),
            ["knn", f, _] => ("knn", *f),
            _ => return Err(bad("expected `insert <file>`, `erase <file>` or `knn <file> <k>`")),
        };
        let pts = read_points_file(&resolve(&base, file))?;
        let t = tree.get_or_insert_with(|| BdlTree::with_buffer(pts.dim(), cap, Heuristic::ObjectMedian));
        if pts.dim() != t.dim() {
            return Err(bad("dimension differs from the tree"));
        }
        let t0 = Instant::now();
        let summary = match op {
            "insert" => {
                t.insert(&pts)?;
                model_coords.extend_from_slice(pts.coords());
                model_live.extend(std::iter::repeat_n(true, pts.len()));
                format!("live={}", t.len())
            }
            "erase" => {
                t.erase(&pts)?;
                let d = t.dim();
                for (j, live) in model_live.iter_mut().enumerate() {
                    let p = &model_coords[j * d..(j + 1) * d];
                    if *live && pts.iter().any(|q| q == p) {
                        *live = false;
                    }
                }
                format!("live={}", t.len())
            }
            _ => {
                let k: usize = words[2].parse().map_err(|_| bad("k must be a positive integer"))?;
                if k == 0 {
                    return Err(bad("k must be a positive integer"));
                }
                let results = t.knn(&pts, k)?;
                if a.check {
                    let model = PointSet::new(t.dim(), model_coords.clone())?;
                    failures.extend(check_knn(&model, |j| model_live[j], &pts, &results, k));
                }
                text.push_str(&knn_text(&results));
                knn_checksum(&results)
            }
        };
        let secs = t0.elapsed().as_secs_f64();
        if a.check {
            if let Err(e) = t.check_invariants() {
                failures.push(format!("line {lineno}: {e}"));
            }
            if t.len() != model_live.iter().filter(|&&l| l).count() {
                failures.push(format!("line {lineno}: live count differs from the model"));
            }
        }
        records.push(record(&format!("bdl-{op}"), &format!("{name}:{lineno}"), &pts, secs, summary));
    }
    Ok((
        Outcome {
            records,
            check_failures: failures,
        },
        a.out.clone(),
        text,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("pargeo").chain(args.iter().copied()).map(String::from);
        let code = main_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_args(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["hull", "--algo", "nope", "-n", "50"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["hull", "--dist", "XX"]).0, EXIT_USAGE);
    }

    #[test]
    fn missing_file_exits_three() {
        assert_eq!(run_args(&["hull", "/nonexistent/pts.txt"]).0, EXIT_IO);
    }

    #[test]
    fn generated_runs_pass_their_checks() {
        for args in [
            vec!["hull", "-n", "2000", "-d", "3", "--dist", "OS", "--algo", "randinc", "--check"],
            vec!["hull", "-n", "2000", "-d", "2", "--algo", "dc", "--check"],
            vec!["seb", "-n", "3000", "-d", "3", "--algo", "orthant", "--check"],
            vec!["knn", "-n", "3000", "-d", "3", "-k", "4", "--algo", "bdl", "--batch", "64", "--check"],
        ] {
            let (code, out, err) = run_args(&args);
            assert_eq!(code, EXIT_OK, "{args:?}: {err}");
            assert!(out.starts_with("algorithm,dataset,n,d,threads,seconds,summary\n"));
        }
    }
}
