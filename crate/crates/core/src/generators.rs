//! Synthetic benchmark distributions. All generators scale with `n`: the cube
//! has side `sqrt(n)` and the ball radius `sqrt(n)`.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::point::PointSet;
use crate::random::Rng;

/// Points per generation block; each block draws from its own sub-stream.
const BLOCK: usize = 4096;

/// Relative thickness of the OnSphere / OnCube shells.
pub const SHELL_THICKNESS: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DistKind {
    UniformCube,
    InSphere,
    OnSphere,
    OnCube,
}

impl DistKind {
    pub const ALL: [DistKind; 4] = [
        DistKind::UniformCube,
        DistKind::InSphere,
        DistKind::OnSphere,
        DistKind::OnCube,
    ];

    /// Short name used in dataset tags and on the command line.
    pub fn tag(self) -> &'static str {
        match self {
            DistKind::UniformCube => "U",
            DistKind::InSphere => "IS",
            DistKind::OnSphere => "OS",
            DistKind::OnCube => "OC",
        }
    }
}

impl fmt::Display for DistKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for DistKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "U" => Ok(DistKind::UniformCube),
            "IS" => Ok(DistKind::InSphere),
            "OS" => Ok(DistKind::OnSphere),
            "OC" => Ok(DistKind::OnCube),
            _ => Err(Error::invalid(format!(
                "unknown distribution {s:?} (expected U, IS, OS or OC)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Distribution {
    pub kind: DistKind,
    pub n: usize,
    pub dim: usize,
    pub seed: u64,
}

impl Distribution {
    pub fn new(kind: DistKind, n: usize, dim: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        if dim < 2 {
            return Err(Error::invalid("dimension must be at least 2"));
        }
        Ok(Distribution {
            kind,
            n,
            dim,
            seed,
        })
    }

    pub fn generate(&self) -> PointSet {
        match self.kind {
            DistKind::UniformCube => gen_uniform_cube(self.n, self.dim, self.seed),
            DistKind::InSphere => gen_in_sphere(self.n, self.dim, self.seed),
            DistKind::OnSphere => gen_on_sphere(self.n, self.dim, self.seed),
            DistKind::OnCube => gen_on_cube(self.n, self.dim, self.seed),
        }
    }

    /// Dataset tag in the `Dimension-Name-Size` scheme, e.g. `3D-U-10M`.
    pub fn tag(&self) -> String {
        dataset_tag(self.dim, self.kind.tag(), self.n)
    }
}

/// `"{dim}D-{name}-{size}"` where sizes that are exact multiples of 10^6 or
/// 10^3 are abbreviated with `M` / `K`.
pub fn dataset_tag(dim: usize, name: &str, n: usize) -> String {
    let size = if n >= 1_000_000 && n.is_multiple_of(1_000_000) {
        format!("{}M", n / 1_000_000)
    } else if n >= 1000 && n.is_multiple_of(1000) {
        format!("{}K", n / 1000)
    } else {
        n.to_string()
    };
    format!("{dim}D-{name}-{size}")
}

fn generate_blocks<F>(n: usize, d: usize, seed: u64, fill: F) -> PointSet
where
    F: Fn(&mut Rng, &mut [f64]) + Sync,
{
    let base = Rng::new(seed);
    let mut coords = vec![0.0; n * d];
    coords
        .par_chunks_mut(BLOCK * d)
        .enumerate()
        .for_each(|(b, chunk)| {
            let mut rng = base.split(b as u64);
            for p in chunk.chunks_exact_mut(d) {
                fill(&mut rng, p);
            }
        });
    PointSet::new(d, coords).expect("generated coordinates are finite")
}

fn check(n: usize, d: usize) {
    assert!(n > 0 && d >= 2, "generators need n > 0 and d >= 2");
}

/// `n` points i.i.d. uniform in `[0, sqrt(n)]^d`.
pub fn gen_uniform_cube(n: usize, d: usize, seed: u64) -> PointSet {
    check(n, d);
    let side = (n as f64).sqrt();
    generate_blocks(n, d, seed, |rng, p| {
        for c in p {
            *c = rng.random::<f64>() * side;
        }
    })
}

/// `n` points uniform inside the ball of radius `sqrt(n)` at the origin,
/// by rejection from the bounding cube.
pub fn gen_in_sphere(n: usize, d: usize, seed: u64) -> PointSet {
    check(n, d);
    let r = (n as f64).sqrt();
    generate_blocks(n, d, seed, |rng, p| loop {
        let mut norm2 = 0.0;
        for c in p.iter_mut() {
            *c = (rng.random::<f64>() * 2.0 - 1.0) * r;
            norm2 += *c * *c;
        }
        if norm2 <= r * r {
            break;
        }
    })
}

/// Points with a uniform direction and radius uniform in `[0.9 R, R]`,
/// `R = sqrt(n)`.
pub fn gen_on_sphere(n: usize, d: usize, seed: u64) -> PointSet {
    check(n, d);
    let r = (n as f64).sqrt();
    generate_blocks(n, d, seed, |rng, p| {
        let norm = loop {
            let mut norm2 = 0.0;
            for c in p.iter_mut() {
                *c = rng.sample(StandardNormal);
                norm2 += *c * *c;
            }
            if norm2 > 1e-24 {
                break norm2.sqrt();
            }
        };
        let radius = r * (1.0 - SHELL_THICKNESS * rng.random::<f64>());
        for c in p.iter_mut() {
            *c *= radius / norm;
        }
    })
}

/// Points on a uniformly chosen face of `[0, sqrt(n)]^d`, pushed inward by a
/// uniform offset in `[0, 0.1 * side]`.
pub fn gen_on_cube(n: usize, d: usize, seed: u64) -> PointSet {
    check(n, d);
    let side = (n as f64).sqrt();
    let thick = SHELL_THICKNESS * side;
    generate_blocks(n, d, seed, move |rng, p| {
        for c in p.iter_mut() {
            *c = rng.random::<f64>() * side;
        }
        let face = rng.random_range(0..2 * d);
        let off = rng.random::<f64>() * thick;
        let axis = face / 2;
        p[axis] = if face % 2 == 0 { off } else { side - off };
    })
}
