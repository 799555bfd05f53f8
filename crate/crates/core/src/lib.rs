//! Parallel computational geometry.
//!
//! The crate bundles three families of algorithms that share a common set of
//! geometric predicates and fork-join primitives:
//!
//! * [`hull`]: 2D/3D convex hulls built by a reservation-based parallel
//!   incremental framework (randomized-incremental and quickhull point
//!   selection), a divide-and-conquer wrapper, and pseudohull culling.
//! * [`seb`]: smallest enclosing ball via orthant scans with a sampling
//!   phase, and sequential/parallel Welzl with move-to-front and pivoting.
//! * [`kdtree`] and [`bdl`]: a static kd-tree in van Emde Boas layout and the
//!   batch-dynamic logarithmic structure built from it.
//!
//! Every algorithm has a brute-force counterpart in [`oracle`], used by the
//! test suites and by the `--check` flag of the `pargeo` binary.

pub mod bdl;
pub mod bench;
pub mod cli;
pub mod error;
pub mod generators;
pub mod hull;
pub mod io;
pub mod kdtree;
pub mod oracle;
pub mod parallel;
pub mod point;
pub mod predicates;
pub mod random;
pub mod seb;

pub use error::{Error, Result};
pub use point::PointSet;
pub use random::Rng;
