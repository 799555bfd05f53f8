//! Divide-and-conquer wrapper: hull each chunk serially, then hull the union
//! of the chunk hull vertices with the reservation quickhull.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hull::engine::Policy;
use crate::hull::{hull2d::hull2d_serial, run_policy, HullMesh, BATCH_FACTOR};

fn chunk_candidates<const D: usize>(chunk: &[[f64; D]]) -> Result<Vec<usize>> {
    if chunk.len() < D + 1 {
        return Ok((0..chunk.len()).collect());
    }
    let hull = if D == 2 {
        let pts: Vec<[f64; 2]> = chunk.iter().map(|p| [p[0], p[1]]).collect();
        hull2d_serial(&pts)
    } else {
        run_policy(chunk.to_vec(), None, Policy::Serial, false).map(|m| m.vertices)
    };
    match hull {
        Ok(v) => Ok(v),
        // a flat chunk can still contribute hull vertices: keep all of it
        Err(Error::Degenerate { .. }) => Ok((0..chunk.len()).collect()),
        Err(e) => Err(e),
    }
}

/// Splits the input into `c * num_proc` contiguous chunks.
pub fn hull_divide_conquer<const D: usize>(
    points: &[[f64; D]],
    num_proc: usize,
    c: usize,
) -> Result<HullMesh<D>> {
    let chunks = (c * num_proc).max(1);
    let len = points.len().div_ceil(chunks).max(1);
    let per_chunk: Vec<Vec<usize>> = points
        .par_chunks(len)
        .enumerate()
        .map(|(c, chunk)| {
            chunk_candidates(chunk).map(|ids| ids.into_iter().map(|i| c * len + i).collect())
        })
        .collect::<Result<_>>()?;
    let mut ids: Vec<usize> = per_chunk.into_iter().flatten().collect();
    ids.sort_unstable();
    let sub: Vec<[f64; D]> = ids.iter().map(|&i| points[i]).collect();
    run_policy(sub, Some(&ids), Policy::QuickHull { c: BATCH_FACTOR }, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_in_sphere, gen_on_cube};
    use crate::hull::{hull2d_quickhull, hull3d_serial_quickhull, BATCH_FACTOR};

    #[test]
    fn matches_direct_hull_3d() {
        let pts = gen_on_cube(5000, 3, 8).to_arrays::<3>().unwrap();
        let dc = hull_divide_conquer(&pts, 4, BATCH_FACTOR).unwrap();
        assert_eq!(dc.vertices, hull3d_serial_quickhull(&pts).unwrap().vertices);
    }

    #[test]
    fn matches_direct_hull_2d() {
        let pts = gen_in_sphere(5000, 2, 8).to_arrays::<2>().unwrap();
        let dc = hull_divide_conquer(&pts, 3, BATCH_FACTOR).unwrap();
        let mut direct = hull2d_quickhull(&pts).unwrap();
        direct.sort_unstable();
        assert_eq!(dc.vertices, direct);
    }

    #[test]
    fn tiny_chunks_pass_through() {
        let pts = gen_in_sphere(30, 3, 1).to_arrays::<3>().unwrap();
        let dc = hull_divide_conquer(&pts, 16, BATCH_FACTOR).unwrap();
        assert_eq!(dc.vertices, hull3d_serial_quickhull(&pts).unwrap().vertices);
    }
}
