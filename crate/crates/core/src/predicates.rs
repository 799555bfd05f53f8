//! Floating-point orientation predicates with a scale-relative zero band.

use crate::error::{Error, Result};

/// Relative width of the zero band of the orientation determinants.
pub const ORIENT_REL_EPS: f64 = 1e-12;

/// Zero band for a determinant of dimension `dim` over coordinates bounded by
/// `max_abs` in magnitude: `1e-12 * max_abs^dim`.
#[inline]
pub fn orient_eps(max_abs: f64, dim: usize) -> f64 {
    ORIENT_REL_EPS * max_abs.powi(dim as i32)
}

#[inline]
pub fn sub3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn cross3(u: &[f64; 3], v: &[f64; 3]) -> [f64; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

#[inline]
pub fn dot3(u: &[f64; 3], v: &[f64; 3]) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

/// det(b - a, c - a, p - a), unscaled.
#[inline]
pub fn orient3d_det(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3], p: &[f64; 3]) -> f64 {
    dot3(&cross3(&sub3(b, a), &sub3(c, a)), &sub3(p, a))
}

/// (b - a) x (p - a); positive when `p` lies left of the directed line a->b.
#[inline]
pub fn orient2d_det(a: &[f64; 2], b: &[f64; 2], p: &[f64; 2]) -> f64 {
    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
}

#[inline]
fn sign_with(det: f64, eps: f64) -> i8 {
    if det > eps {
        1
    } else if det < -eps {
        -1
    } else {
        0
    }
}

fn as3(p: &[f64]) -> Result<[f64; 3]> {
    p.try_into()
        .map_err(|_| Error::invalid(format!("orient3d needs 3D points, got {}", p.len())))
}

fn as2(p: &[f64]) -> Result<[f64; 2]> {
    p.try_into()
        .map_err(|_| Error::invalid(format!("orient2d needs 2D points, got {}", p.len())))
}

/// Sign of det(b - a, c - a, p - a). Values inside the zero band (scaled by
/// the largest coordinate among the four points) map to 0.
pub fn orient3d(a: &[f64], b: &[f64], c: &[f64], p: &[f64]) -> Result<i8> {
    let (a, b, c, p) = (as3(a)?, as3(b)?, as3(c)?, as3(p)?);
    let m = [a, b, c, p]
        .iter()
        .flatten()
        .fold(0.0_f64, |m, x| m.max(x.abs()));
    Ok(sign_with(orient3d_det(&a, &b, &c, &p), orient_eps(m, 3)))
}

/// Sign of (b - a) x (p - a) with the same scale-relative zero band.
pub fn orient2d(a: &[f64], b: &[f64], p: &[f64]) -> Result<i8> {
    let (a, b, p) = (as2(a)?, as2(b)?, as2(p)?);
    let m = [a, b, p]
        .iter()
        .flatten()
        .fold(0.0_f64, |m, x| m.max(x.abs()));
    Ok(sign_with(orient2d_det(&a, &b, &p), orient_eps(m, 2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const O: [f64; 3] = [0.0, 0.0, 0.0];
    const X: [f64; 3] = [1.0, 0.0, 0.0];
    const Y: [f64; 3] = [0.0, 1.0, 0.0];

    #[test]
    fn tetrahedron_signs() {
        assert_eq!(orient3d(&O, &X, &Y, &[0.0, 0.0, 1.0]).unwrap(), 1);
        assert_eq!(orient3d(&O, &X, &Y, &[5.0, 5.0, 0.0]).unwrap(), 0);
        assert_eq!(orient3d(&O, &X, &Y, &[0.0, 0.0, -1.0]).unwrap(), -1);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            orient3d(&[0.0, 0.0], &X, &Y, &O),
            Err(Error::InvalidArgument(_))
        ));
        assert!(orient2d(&O, &X, &Y).is_err());
    }

    #[test]
    fn orient2d_left_right() {
        let a = [0.0, 0.0];
        let b = [1.0, 0.0];
        assert_eq!(orient2d(&a, &b, &[0.5, 1.0]).unwrap(), 1);
        assert_eq!(orient2d(&a, &b, &[0.5, -1.0]).unwrap(), -1);
        assert_eq!(orient2d(&a, &b, &[7.0, 0.0]).unwrap(), 0);
    }

    #[test]
    fn zero_band_scales_with_coordinates() {
        // A tilt of 1e-3 on coordinates of size 1e6 is far above the band.
        let s = 1e6;
        let p = [s, s, 1e-3];
        assert_eq!(orient3d(&O, &[s, 0.0, 0.0], &[0.0, s, 0.0], &p).unwrap(), 1);
        // but a relative perturbation of 1e-16 is inside it
        let q = [s, s, s * 1e-17];
        assert_eq!(orient3d(&O, &[s, 0.0, 0.0], &[0.0, s, 0.0], &q).unwrap(), 0);
    }

    fn pt() -> impl Strategy<Value = [f64; 3]> {
        [-100.0..100.0f64, -100.0..100.0f64, -100.0..100.0f64]
    }

    proptest! {
        #[test]
        fn swapping_b_c_flips_sign(a in pt(), b in pt(), c in pt(), p in pt()) {
            let s1 = orient3d(&a, &b, &c, &p).unwrap();
            let s2 = orient3d(&a, &c, &b, &p).unwrap();
            if s1 != 0 && s2 != 0 {
                prop_assert_eq!(s1, -s2);
            }
        }
    }
}
