//! Normalized direct linear transform and correspondence extraction from
//! annotated straight lines.

use nalgebra::{DMatrix, Matrix2, Matrix3, Point2, Point3, Vector2, Vector3};

use super::CalibrateError;
use crate::camera::{CameraError, Homography};
use crate::field::{FieldElement, Geometry};
use crate::metrics::ImageAnnotation;

/// A world point (meters) and where it appears in the image (pixels).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub world: Point3<f64>,
    pub image: Point2<f64>,
    pub weight: f64,
}

impl Correspondence {
    pub fn new(world: Point3<f64>, image: Point2<f64>) -> Self {
        Self {
            world,
            image,
            weight: 1.0,
        }
    }

    fn is_valid(&self) -> bool {
        self.world
            .coords
            .iter()
            .chain(self.image.coords.iter())
            .all(|v| v.is_finite())
            && self.weight.is_finite()
            && self.weight >= 0.0
    }
}

/// Similarity taking the points to centroid 0 and RMS distance √2.
fn hartley(points: &[Point2<f64>]) -> Matrix3<f64> {
    let n = points.len() as f64;
    let c = points
        .iter()
        .fold(Vector2::zeros(), |acc, p| acc + p.coords)
        / n;
    let rms = (points
        .iter()
        .map(|p| (p.coords - c).norm_squared())
        .sum::<f64>()
        / n)
        .sqrt();
    let s = if rms > 0.0 { 2f64.sqrt() / rms } else { 1.0 };
    Matrix3::new(s, 0.0, -s * c.x, 0.0, s, -s * c.y, 0.0, 0.0, 1.0)
}

fn transform(m: &Matrix3<f64>, p: &Point2<f64>) -> Point2<f64> {
    let v = m * Vector3::new(p.x, p.y, 1.0);
    Point2::new(v.x / v.z, v.y / v.z)
}

fn cross2(a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Smallest eigenvalue of the scatter matrix relative to the largest. Zero
/// when all points are collinear.
fn spread(points: &[Point2<f64>]) -> f64 {
    let n = points.len() as f64;
    let c = points
        .iter()
        .fold(Vector2::zeros(), |acc, p| acc + p.coords)
        / n;
    let mut s = Matrix2::zeros();
    for p in points {
        let d = p.coords - c;
        s += d * d.transpose();
    }
    let eig = s.symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    if hi <= 0.0 {
        0.0
    } else {
        lo / hi
    }
}

fn has_collinear_triple(points: &[Point2<f64>]) -> bool {
    let scale = points
        .iter()
        .flat_map(|a| points.iter().map(move |b| (a - b).norm()))
        .fold(0.0, f64::max);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            for k in j + 1..points.len() {
                let area = cross2(points[j] - points[i], points[k] - points[i]);
                if area.abs() <= 1e-9 * scale * scale {
                    return true;
                }
            }
        }
    }
    false
}

/// Homography mapping world ground coordinates (X, Y) to pixels, estimated
/// from at least four correspondences by the normalized DLT.
pub fn dlt_homography(corrs: &[Correspondence]) -> Result<Homography, CalibrateError> {
    if corrs.len() < 4 {
        return Err(CalibrateError::TooFewCorrespondences(corrs.len()));
    }
    if let Some(bad) = corrs.iter().position(|c| !c.is_valid()) {
        return Err(CalibrateError::InvalidCorrespondence(bad));
    }
    let world: Vec<Point2<f64>> = corrs.iter().map(|c| c.world.xy()).collect();
    let image: Vec<Point2<f64>> = corrs.iter().map(|c| c.image).collect();
    for pts in [&world, &image] {
        if spread(pts) < 1e-12 || (pts.len() == 4 && has_collinear_triple(pts)) {
            return Err(CalibrateError::DegenerateConfiguration(
                "points are collinear".into(),
            ));
        }
    }
    let tw = hartley(&world);
    let ti = hartley(&image);
    let rows = (2 * corrs.len()).max(9);
    let mut a = DMatrix::zeros(rows, 9);
    for (k, c) in corrs.iter().enumerate() {
        let p = transform(&tw, &world[k]);
        let q = transform(&ti, &image[k]);
        let w = c.weight.sqrt();
        let (x, y, u, v) = (p.x, p.y, q.x, q.y);
        let r0 = [0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v];
        let r1 = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, -u];
        for j in 0..9 {
            a[(2 * k, j)] = w * r0[j];
            a[(2 * k + 1, j)] = w * r1[j];
        }
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let (idx, _) =
        svd.singular_values
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |best, (i, &s)| if s < best.1 { (i, s) } else { best },
            );
    let h = v_t.row(idx);
    let hn = Matrix3::from_row_slice(&[h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]]);
    let ti_inv = ti.try_inverse().expect("similarity is invertible");
    let m = ti_inv * hn * tw;
    // Orient so that the first correspondence lies in front.
    let v = m * Vector3::new(world[0].x, world[0].y, 1.0);
    let m = if v.z < 0.0 { -m } else { m };
    match Homography::new(m) {
        Ok(h) => Ok(h),
        Err(CameraError::SingularHomography(_)) => Err(CalibrateError::DegenerateConfiguration(
            "estimated homography is singular".into(),
        )),
        Err(e) => Err(e.into()),
    }
}

/// Total-least-squares line through points: (point on line, unit direction).
fn fit_line(points: &[Point2<f64>]) -> Option<(Point2<f64>, Vector2<f64>)> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let c = points
        .iter()
        .fold(Vector2::zeros(), |acc, p| acc + p.coords)
        / n;
    let mut s = Matrix2::zeros();
    for p in points {
        let d = p.coords - c;
        s += d * d.transpose();
    }
    let eig = s.symmetric_eigen();
    let i = if eig.eigenvalues[0] >= eig.eigenvalues[1] {
        0
    } else {
        1
    };
    let dir = eig.eigenvectors.column(i).into_owned();
    if eig.eigenvalues[i] <= 0.0 {
        return None;
    }
    Some((Point2::from(c), dir.normalize()))
}

fn intersect_lines(
    p: Point2<f64>,
    d: Vector2<f64>,
    q: Point2<f64>,
    e: Vector2<f64>,
) -> Option<(f64, f64)> {
    let den = cross2(d, e);
    if den.abs() < 1e-9 {
        return None;
    }
    let w = q - p;
    Some((cross2(w, e) / den, cross2(w, d) / den))
}

/// Correspondences at the crossings of annotated straight ground lines. For
/// every pair of annotated ground segments that meet in the template (within
/// their extents), the image crossing of lines fitted to the annotated points
/// is paired with the world crossing.
pub fn line_intersection_correspondences(
    template: &[FieldElement],
    annotation: &ImageAnnotation,
) -> Vec<Correspondence> {
    let lines: Vec<_> = template
        .iter()
        .filter_map(|e| match e.geometry {
            Geometry::Segment(a, b) if a.z == 0.0 && b.z == 0.0 => {
                let pts = annotation.elements.get(&e.class)?;
                let (p, d) = fit_line(pts)?;
                Some((a, b, p, d))
            }
            _ => None,
        })
        .collect();
    let mut out = Vec::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let (a0, b0, p0, d0) = lines[i];
            let (a1, b1, p1, d1) = lines[j];
            let da = (b0 - a0).xy();
            let db = (b1 - a1).xy();
            let Some((s, t)) = intersect_lines(a0.xy(), da, a1.xy(), db) else {
                continue;
            };
            let eps = 1e-9;
            if !(-eps..=1.0 + eps).contains(&s) || !(-eps..=1.0 + eps).contains(&t) {
                continue;
            }
            let world = a0 + (b0 - a0) * s;
            let Some((u, _)) = intersect_lines(p0, d0, p1, d1) else {
                continue;
            };
            out.push(Correspondence::new(
                Point3::new(world.x, world.y, 0.0),
                p0 + d0 * u,
            ));
        }
    }
    out
}
