//! Ground-plane metrics: projection error in meters and the IoU of the pitch
//! rectangle against its image round trip.

use nalgebra::{Point2, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::MetricError;
use crate::camera::{CameraModel, Homography};
use crate::field::PitchSpec;
use crate::geometry::{clip_polygon, clip_polygon_half_plane, polygon_iou, Polygon2D};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionErrorReport {
    /// Mean ground distance between the two back-projections (meters).
    pub mean_m: f64,
    pub max_m: f64,
    /// Pixels on the pitch (under the ground truth) that were compared.
    pub samples: usize,
    /// Pixels on the pitch that the estimated model could not back-project.
    pub failed: usize,
}

fn on_pitch(spec: &PitchSpec, x: f64, y: f64) -> bool {
    x.abs() <= spec.length / 2.0 && y.abs() <= spec.width / 2.0
}

fn pixel_grid(width: f64, height: f64, n: usize) -> impl Iterator<Item = Point2<f64>> {
    let cols = ((n as f64 * width / height).sqrt().ceil() as usize).max(1);
    let rows = n.div_ceil(cols).max(1);
    (0..rows).flat_map(move |j| {
        (0..cols).map(move |i| {
            Point2::new(
                (i as f64 + 0.5) * width / cols as f64,
                (j as f64 + 0.5) * height / rows as f64,
            )
        })
    })
}

/// Mean distance in meters between where `estimated` and `ground_truth` put
/// the same pixel on the ground, over a regular pixel grid restricted to the
/// part of the image the ground truth maps onto the pitch. The grid is sized
/// so that roughly `n_samples` pixels land on the pitch.
pub fn projection_error(
    estimated: &CameraModel,
    ground_truth: &CameraModel,
    image_size: (u32, u32),
    spec: &PitchSpec,
    n_samples: usize,
) -> Result<ProjectionErrorReport, MetricError> {
    let (w, h) = (image_size.0 as f64, image_size.1 as f64);
    let n_samples = n_samples.max(1);
    let lands = |p: &Point2<f64>| {
        ground_truth
            .ray_to_ground(p)
            .ok()
            .filter(|g| on_pitch(spec, g.x, g.y))
    };
    // Coarse pass to estimate how much of the frame shows the pitch.
    let coarse = 400;
    let hit = pixel_grid(w, h, coarse)
        .filter(|p| lands(p).is_some())
        .count();
    if hit == 0 {
        return Err(MetricError::Undefined(
            "no sampled pixel lands on the pitch",
        ));
    }
    let fraction = hit as f64 / pixel_grid(w, h, coarse).count() as f64;
    let grid_n = ((n_samples as f64 / fraction).ceil() as usize).max(n_samples);

    let mut sum = 0.0;
    let mut max: f64 = 0.0;
    let mut samples = 0;
    let mut failed = 0;
    for p in pixel_grid(w, h, grid_n) {
        let Some(truth) = lands(&p) else { continue };
        match estimated.ray_to_ground(&p) {
            Ok(est) => {
                let d = (est - truth).norm();
                sum += d;
                max = max.max(d);
                samples += 1;
            }
            Err(_) => failed += 1,
        }
    }
    if samples == 0 {
        return Err(MetricError::Undefined(
            "estimated model back-projects no pitch pixel",
        ));
    }
    Ok(ProjectionErrorReport {
        mean_m: sum / samples as f64,
        max_m: max,
        samples,
        failed,
    })
}

fn pitch_polygon(spec: &PitchSpec) -> Polygon2D {
    Polygon2D::from_tuples(&spec.ground_rectangle())
}

/// The pitch rectangle mapped into the image by `estimated` and back to the
/// ground by `gt`, computed as the composite plane map gt⁻¹·estimated so
/// that corners behind the image plane still map consistently. The image of
/// the rectangle must not cross the composite's line at infinity.
fn round_trip_pitch(
    estimated: &Homography,
    gt: &Homography,
    spec: &PitchSpec,
) -> Result<Polygon2D, MetricError> {
    let g = gt.inverse_matrix() * estimated.matrix();
    let mapped: Vec<Vector3<f64>> = spec
        .ground_rectangle()
        .iter()
        .map(|&(x, y)| g * Vector3::new(x, y, 1.0))
        .collect();
    let scale = mapped.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let positive = mapped.iter().all(|v| v.z > 1e-12 * scale);
    let negative = mapped.iter().all(|v| v.z < -1e-12 * scale);
    if !(positive || negative) {
        return Err(MetricError::DegenerateGeometry(
            "round trip sends part of the pitch to infinity",
        ));
    }
    let poly = Polygon2D::new(
        mapped
            .iter()
            .map(|v| Point2::new(v.x / v.z, v.y / v.z))
            .collect(),
    );
    if !poly.is_convex() {
        return Err(MetricError::DegenerateGeometry(
            "back-projected pitch is self-intersecting",
        ));
    }
    Ok(poly)
}

/// IoU of the pitch rectangle and its round trip through the estimated
/// model's ground homography and the inverse ground-truth homography.
pub fn iou_whole(
    estimated: &CameraModel,
    gt: &Homography,
    spec: &PitchSpec,
    ignore_distortion: bool,
) -> Result<f64, MetricError> {
    let est = estimated.ground_homography(ignore_distortion)?;
    let poly = round_trip_pitch(&est, gt, spec)?;
    Ok(polygon_iou(&poly, &pitch_polygon(spec))?)
}

/// Like [`iou_whole`], restricted to the ground region visible in the image
/// under the ground truth.
pub fn iou_part(
    estimated: &CameraModel,
    gt: &Homography,
    spec: &PitchSpec,
    image_size: (u32, u32),
    ignore_distortion: bool,
) -> Result<f64, MetricError> {
    let est = estimated.ground_homography(ignore_distortion)?;
    let poly = round_trip_pitch(&est, gt, spec)?;
    let visible = visible_ground(gt, image_size)?;
    let est_part = clip_polygon(&poly, &visible)?;
    let pitch_part = clip_polygon(&pitch_polygon(spec), &visible)?;
    if pitch_part.is_empty() {
        return Err(MetricError::DegenerateGeometry("pitch not visible"));
    }
    Ok(polygon_iou(&est_part, &pitch_part)?)
}

/// Ground footprint of the image frame under `gt`. The frame is first cut at
/// the horizon: pixels whose inverse-homography depth is below a thousandth
/// of the largest corner depth (about a thousand times farther than the
/// nearest corner) are discarded.
fn visible_ground(gt: &Homography, image_size: (u32, u32)) -> Result<Polygon2D, MetricError> {
    let (w, h) = (image_size.0 as f64, image_size.1 as f64);
    let frame = Polygon2D::from_tuples(&[(0.0, 0.0), (w, 0.0), (w, h), (0.0, h)]);
    let inv = gt.inverse_matrix();
    let row: Vector3<f64> = inv.row(2).transpose();
    let depth = |p: &Point2<f64>| row.x * p.x + row.y * p.y + row.z;
    let max_depth = frame
        .vertices
        .iter()
        .map(depth)
        .fold(f64::NEG_INFINITY, f64::max);
    if max_depth <= 0.0 {
        return Err(MetricError::DegenerateGeometry("image shows no ground"));
    }
    let cut = clip_polygon_half_plane(&frame, Vector2::new(row.x, row.y), row.z - 1e-3 * max_depth);
    let mut vertices = Vec::with_capacity(cut.vertices.len());
    for p in &cut.vertices {
        let g = gt
            .ray_to_ground(p)
            .map_err(|_| MetricError::DegenerateGeometry("visible region crosses the horizon"))?;
        vertices.push(Point2::new(g.x, g.y));
    }
    let poly = Polygon2D::new(vertices);
    if !poly.is_convex() {
        return Err(MetricError::DegenerateGeometry(
            "visible region is not convex",
        ));
    }
    Ok(poly)
}
