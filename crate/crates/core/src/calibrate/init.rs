//! Closed-form pinhole camera from a ground-plane homography.

use nalgebra::{Matrix3, Point2, Vector3};

use super::CalibrateError;
use crate::camera::{Homography, SimplifiedPinhole};

/// Recovers focal length and pose from `h`, assuming square pixels, zero
/// skew and the principal point at the image center.
///
/// With H ∝ K·[r1 r2 t], the columns of K⁻¹H must be orthogonal and of equal
/// norm. Both conditions are linear in w = 1/f², which is solved by least
/// squares. The sign of `h` is first fixed with
/// [`Homography::oriented_for_image`].
pub fn init_pinhole_from_homography(
    h: &Homography,
    image_size: (u32, u32),
) -> Result<SimplifiedPinhole, CalibrateError> {
    let pp = Point2::new(image_size.0 as f64 / 2.0, image_size.1 as f64 / 2.0);
    let t_inv = Matrix3::new(1.0, 0.0, -pp.x, 0.0, 1.0, -pp.y, 0.0, 0.0, 1.0);
    let m = t_inv * h.oriented_for_image(image_size).matrix();
    // Rescale so the focal estimate is well conditioned for pixel-sized f.
    let m = m / m.norm();

    let a1 = m[(0, 0)] * m[(0, 1)] + m[(1, 0)] * m[(1, 1)];
    let b1 = m[(2, 0)] * m[(2, 1)];
    let a2 = m[(0, 0)].powi(2) + m[(1, 0)].powi(2) - m[(0, 1)].powi(2) - m[(1, 1)].powi(2);
    let b2 = m[(2, 0)].powi(2) - m[(2, 1)].powi(2);
    let den = a1 * a1 + a2 * a2;
    let scale = m.fixed_view::<2, 2>(0, 0).norm_squared();
    if den <= 1e-24 * scale * scale {
        return Err(CalibrateError::Initialization(
            "homography does not constrain the focal length".into(),
        ));
    }
    let w = -(a1 * b1 + a2 * b2) / den;
    if !(w.is_finite() && w > 0.0) {
        return Err(CalibrateError::Initialization(format!(
            "negative focal-squared estimate (1/f² = {w:e}); the view is degenerate, supply a seed camera"
        )));
    }
    let f = 1.0 / w.sqrt();

    let k_inv = Matrix3::new(1.0 / f, 0.0, 0.0, 0.0, 1.0 / f, 0.0, 0.0, 0.0, 1.0);
    let c = k_inv * m;
    let c1: Vector3<f64> = c.column(0).into_owned();
    let c2: Vector3<f64> = c.column(1).into_owned();
    let c3: Vector3<f64> = c.column(2).into_owned();
    let lambda = (c1.norm() + c2.norm()) / 2.0;
    let (c1, c2, c3) = (c1 / lambda, c2 / lambda, c3 / lambda);
    let approx = Matrix3::from_columns(&[c1, c2, c1.cross(&c2)]);
    let svd = approx.svd(true, true);
    let mut u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    if (u * v_t).determinant() < 0.0 {
        u.column_mut(2).neg_mut();
    }
    let rotation = u * v_t;
    Ok(SimplifiedPinhole::new(f, pp, rotation, c3)?)
}
