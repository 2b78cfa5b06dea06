//! 2D geometry in image space: point-to-segment and point-to-polyline
//! distances, convex polygon clipping, area and IoU.

use nalgebra::{Point2, Vector2};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("clip polygon is not convex")]
    NonConvexClip,
    #[error("polygon has fewer than 3 vertices")]
    TooFewVertices,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment2D {
    pub a: Point2<f64>,
    pub b: Point2<f64>,
}

impl Segment2D {
    pub fn new(a: Point2<f64>, b: Point2<f64>) -> Self {
        Self { a, b }
    }

    /// Closest point of the segment to `x`. A degenerate segment is a point.
    pub fn closest_point(&self, x: &Point2<f64>) -> Point2<f64> {
        let ab = self.b - self.a;
        let len2 = ab.norm_squared();
        if len2 == 0.0 {
            return self.a;
        }
        let z = (x - self.a).dot(&ab) / len2;
        if z <= 0.0 {
            self.a
        } else if z >= 1.0 {
            self.b
        } else {
            self.a + ab * z
        }
    }
}

/// Euclidean distance from `x` to the segment: to `a` when the foot of the
/// perpendicular falls before `a`, to `b` when it falls past `b`, and to the
/// foot itself otherwise.
pub fn point_segment_distance(x: &Point2<f64>, seg: &Segment2D) -> f64 {
    (x - seg.closest_point(x)).norm()
}

/// Closest point over all segments of all pieces, with its distance.
/// A single-vertex piece contributes that vertex. `None` when there is no
/// vertex at all.
pub fn closest_on_polylines(
    x: &Point2<f64>,
    pieces: &[Vec<Point2<f64>>],
) -> Option<(Point2<f64>, f64)> {
    let mut best: Option<(Point2<f64>, f64)> = None;
    let mut consider = |c: Point2<f64>| {
        let d = (x - c).norm();
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((c, d));
        }
    };
    for piece in pieces {
        match piece.len() {
            0 => {}
            1 => consider(piece[0]),
            _ => {
                for w in piece.windows(2) {
                    consider(Segment2D::new(w[0], w[1]).closest_point(x));
                }
            }
        }
    }
    best
}

/// Minimum distance from `x` to any segment of the pieces, or `None` for an
/// empty projection.
pub fn point_polyline_distance(x: &Point2<f64>, pieces: &[Vec<Point2<f64>>]) -> Option<f64> {
    closest_on_polylines(x, pieces).map(|(_, d)| d)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polygon2D {
    pub vertices: Vec<Point2<f64>>,
}

impl Polygon2D {
    pub fn new(vertices: Vec<Point2<f64>>) -> Self {
        Self { vertices }
    }

    pub fn from_tuples(pts: &[(f64, f64)]) -> Self {
        Self::new(pts.iter().map(|&(x, y)| Point2::new(x, y)).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3
    }

    /// Twice the signed shoelace area; positive for counterclockwise order.
    fn signed_area2(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let p = self.vertices[i];
                let q = self.vertices[(i + 1) % n];
                p.x * q.y - q.x * p.y
            })
            .sum()
    }

    pub fn is_counterclockwise(&self) -> bool {
        self.signed_area2() > 0.0
    }

    pub fn reversed(&self) -> Self {
        Self::new(self.vertices.iter().rev().copied().collect())
    }

    pub fn to_counterclockwise(&self) -> Self {
        if self.signed_area2() < 0.0 {
            self.reversed()
        } else {
            self.clone()
        }
    }

    /// Convex and simple: every turn has the same sign (collinear turns
    /// allowed) and the boundary winds exactly once.
    pub fn is_convex(&self) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return false;
        }
        let scale = self
            .vertices
            .iter()
            .map(|p| p.coords.amax())
            .fold(0.0, f64::max)
            .max(1.0);
        let eps = 1e-12 * scale * scale;
        let mut sign = 0.0;
        let mut turning = 0.0;
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            let r = self.vertices[(i + 2) % n];
            let e1 = q - p;
            let e2 = r - q;
            let cross = e1.perp(&e2);
            if cross.abs() > eps {
                if sign == 0.0 {
                    sign = cross.signum();
                } else if cross.signum() != sign {
                    return false;
                }
            }
            if e1.norm_squared() > 0.0 && e2.norm_squared() > 0.0 {
                turning += cross.atan2(e1.dot(&e2));
            }
        }
        sign != 0.0 && (turning.abs() - 2.0 * std::f64::consts::PI).abs() < 1e-6
    }
}

/// Absolute shoelace area; 0 for fewer than 3 vertices.
pub fn polygon_area(p: &Polygon2D) -> f64 {
    if p.vertices.len() < 3 {
        return 0.0;
    }
    0.5 * p.signed_area2().abs()
}

/// Sutherland–Hodgman clipping of `subject` by the convex polygon `clip`.
/// Either orientation of `clip` is accepted.
pub fn clip_polygon(subject: &Polygon2D, clip: &Polygon2D) -> Result<Polygon2D, GeometryError> {
    if clip.vertices.len() < 3 {
        return Err(GeometryError::TooFewVertices);
    }
    if !clip.is_convex() {
        return Err(GeometryError::NonConvexClip);
    }
    let clip = clip.to_counterclockwise();
    let mut output = subject.vertices.clone();
    let n = clip.vertices.len();
    for i in 0..n {
        if output.is_empty() {
            break;
        }
        let a = clip.vertices[i];
        let b = clip.vertices[(i + 1) % n];
        output = clip_half_plane(&output, a, b);
    }
    Ok(Polygon2D::new(output))
}

/// Keeps the part of `subject` where `normal · p + offset >= 0`.
pub fn clip_polygon_half_plane(
    subject: &Polygon2D,
    normal: Vector2<f64>,
    offset: f64,
) -> Polygon2D {
    // A point on the boundary line and a direction with `normal` on its left.
    let n2 = normal.norm_squared();
    if n2 == 0.0 {
        return if offset >= 0.0 {
            subject.clone()
        } else {
            Polygon2D::default()
        };
    }
    let a = Point2::from(-normal * (offset / n2));
    let b = a + Vector2::new(normal.y, -normal.x);
    Polygon2D::new(clip_half_plane(&subject.vertices, a, b))
}

/// Keeps the part of `poly` left of the directed line a -> b.
fn clip_half_plane(poly: &[Point2<f64>], a: Point2<f64>, b: Point2<f64>) -> Vec<Point2<f64>> {
    let dir: Vector2<f64> = b - a;
    let side = |p: &Point2<f64>| dir.perp(&(p - a));
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let cur = poly[i];
        let prev = poly[(i + poly.len() - 1) % poly.len()];
        let (sc, sp) = (side(&cur), side(&prev));
        if sc >= 0.0 {
            if sp < 0.0 {
                out.push(intersect(prev, cur, sp, sc));
            }
            out.push(cur);
        } else if sp >= 0.0 {
            out.push(intersect(prev, cur, sp, sc));
        }
    }
    out
}

fn intersect(p: Point2<f64>, q: Point2<f64>, sp: f64, sq: f64) -> Point2<f64> {
    let t = sp / (sp - sq);
    p + (q - p) * t
}

/// Intersection over union of two convex polygons, in [0, 1].
pub fn polygon_iou(p: &Polygon2D, q: &Polygon2D) -> Result<f64, GeometryError> {
    let inter = if q.is_empty() || p.is_empty() {
        0.0
    } else {
        polygon_area(&clip_polygon(p, q)?)
    };
    let union = polygon_area(p) + polygon_area(q) - inter;
    if union <= 0.0 {
        return Ok(0.0);
    }
    Ok((inter / union).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(x: f64, y: f64) -> Point2<f64> {
        Point2::new(x, y)
    }

    fn seg(ax: f64, ay: f64, bx: f64, by: f64) -> Segment2D {
        Segment2D::new(p(ax, ay), p(bx, by))
    }

    #[test]
    fn segment_distance_cases() {
        let s = seg(0.0, 0.0, 2.0, 0.0);
        assert_eq!(point_segment_distance(&p(1.0, 1.0), &s), 1.0);
        assert_eq!(point_segment_distance(&p(3.0, 0.0), &s), 1.0);
        assert_eq!(point_segment_distance(&p(-3.0, 4.0), &s), 5.0);
    }

    #[test]
    fn degenerate_segment_is_a_point() {
        let s = seg(1.0, 1.0, 1.0, 1.0);
        assert_eq!(point_segment_distance(&p(4.0, 5.0), &s), 5.0);
    }

    #[test]
    fn polyline_distance_cases() {
        let line = vec![vec![p(0.0, 0.0), p(1.0, 0.0), p(2.0, 0.0)]];
        assert_eq!(point_polyline_distance(&p(1.0, 0.0), &line), Some(0.0));
        assert_eq!(point_polyline_distance(&p(1.5, 2.0), &line), Some(2.0));
        assert_eq!(point_polyline_distance(&p(1.5, 2.0), &[]), None);
        assert_eq!(point_polyline_distance(&p(1.5, 2.0), &[vec![]]), None);
        let single = vec![vec![p(4.5, 6.0)]];
        assert_eq!(point_polyline_distance(&p(1.5, 2.0), &single), Some(5.0));
    }

    #[test]
    fn polyline_distance_matches_exhaustive_min() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let pieces: Vec<Vec<Point2<f64>>> = (0..rng.random_range(1..4))
                .map(|_| {
                    (0..rng.random_range(1..8))
                        .map(|_| p(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0)))
                        .collect()
                })
                .collect();
            let x = p(rng.random_range(-60.0..60.0), rng.random_range(-60.0..60.0));
            // Independent route: distance to the infinite line clamped by
            // endpoint distances.
            let mut expected = f64::INFINITY;
            for piece in &pieces {
                if piece.len() == 1 {
                    expected = expected.min((x - piece[0]).norm());
                }
                for w in piece.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    let mut d = (x - a).norm().min((x - b).norm());
                    let ab = b - a;
                    let len = ab.norm();
                    if len > 0.0 {
                        let along = (x - a).dot(&ab) / len;
                        if along > 0.0 && along < len {
                            d = d.min(((x - a).perp(&ab) / len).abs());
                        }
                    }
                    expected = expected.min(d);
                }
            }
            let got = point_polyline_distance(&x, &pieces).unwrap();
            assert!((got - expected).abs() < 1e-9, "{got} vs {expected}");
        }
    }

    proptest! {
        #[test]
        fn distance_is_orientation_symmetric(
            ax in -100.0..100.0f64, ay in -100.0..100.0f64,
            bx in -100.0..100.0f64, by in -100.0..100.0f64,
            x in -100.0..100.0f64, y in -100.0..100.0f64,
        ) {
            let d1 = point_segment_distance(&p(x, y), &seg(ax, ay, bx, by));
            let d2 = point_segment_distance(&p(x, y), &seg(bx, by, ax, ay));
            prop_assert!((d1 - d2).abs() <= 1e-12 * (1.0 + d1));
        }

        #[test]
        fn distance_is_one_lipschitz(
            ax in -100.0..100.0f64, ay in -100.0..100.0f64,
            bx in -100.0..100.0f64, by in -100.0..100.0f64,
            x in -100.0..100.0f64, y in -100.0..100.0f64,
            dx in -5.0..5.0f64, dy in -5.0..5.0f64,
        ) {
            let s = seg(ax, ay, bx, by);
            let d1 = point_segment_distance(&p(x, y), &s);
            let d2 = point_segment_distance(&p(x + dx, y + dy), &s);
            prop_assert!((d1 - d2).abs() <= (dx * dx + dy * dy).sqrt() + 1e-9);
        }

        #[test]
        fn points_on_segment_have_zero_distance(
            ax in -100.0..100.0f64, ay in -100.0..100.0f64,
            bx in -100.0..100.0f64, by in -100.0..100.0f64,
            t in 0.0..=1.0f64,
        ) {
            let s = seg(ax, ay, bx, by);
            let on = s.a + (s.b - s.a) * t;
            prop_assert!(point_segment_distance(&on, &s) <= 1e-12 * 200.0);
        }
    }

    fn square(x0: f64, y0: f64, side: f64) -> Polygon2D {
        Polygon2D::from_tuples(&[
            (x0, y0),
            (x0 + side, y0),
            (x0 + side, y0 + side),
            (x0, y0 + side),
        ])
    }

    #[test]
    fn clip_and_iou_of_squares() {
        let unit = square(0.0, 0.0, 1.0);
        assert!((polygon_area(&clip_polygon(&unit, &unit).unwrap()) - 1.0).abs() < 1e-15);
        let shifted = square(0.5, 0.5, 1.0);
        assert!((polygon_area(&clip_polygon(&unit, &shifted).unwrap()) - 0.25).abs() < 1e-15);
        assert_eq!(polygon_iou(&unit, &unit).unwrap(), 1.0);
        assert_eq!(polygon_iou(&unit, &square(3.0, 3.0, 1.0)).unwrap(), 0.0);
        let half = Polygon2D::from_tuples(&[(0.5, 0.0), (1.5, 0.0), (1.5, 1.0), (0.5, 1.0)]);
        assert!((polygon_iou(&unit, &half).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn clockwise_clip_is_accepted() {
        let unit = square(0.0, 0.0, 1.0);
        let cw = square(0.5, 0.5, 1.0).reversed();
        assert!((polygon_area(&clip_polygon(&unit, &cw).unwrap()) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn non_convex_clip_is_rejected() {
        let l_shape = Polygon2D::from_tuples(&[
            (0.0, 0.0),
            (2.0, 0.0),
            (2.0, 1.0),
            (1.0, 1.0),
            (1.0, 2.0),
            (0.0, 2.0),
        ]);
        assert_eq!(
            clip_polygon(&square(0.0, 0.0, 1.0), &l_shape),
            Err(GeometryError::NonConvexClip)
        );
        let bowtie = Polygon2D::from_tuples(&[(0.0, 0.0), (1.0, 1.0), (1.0, 0.0), (0.0, 1.0)]);
        assert!(!bowtie.is_convex());
    }

    #[test]
    fn half_plane_clip() {
        let unit = square(0.0, 0.0, 1.0);
        // Keep x >= 0.25.
        let kept = clip_polygon_half_plane(&unit, Vector2::new(1.0, 0.0), -0.25);
        assert!((polygon_area(&kept) - 0.75).abs() < 1e-15);
        // Keep y <= 0.5.
        let kept = clip_polygon_half_plane(&unit, Vector2::new(0.0, -2.0), 1.0);
        assert!((polygon_area(&kept) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn small_polygons_have_zero_area() {
        assert_eq!(
            polygon_area(&Polygon2D::from_tuples(&[(0.0, 0.0), (1.0, 1.0)])),
            0.0
        );
    }

    fn random_convex(rng: &mut ChaCha8Rng) -> Polygon2D {
        let cx = rng.random_range(-0.5..0.5);
        let cy = rng.random_range(-0.5..0.5);
        let n = rng.random_range(3..9);
        let mut angles: Vec<f64> = (0..n)
            .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
            .collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let r = rng.random_range(0.3..1.0);
        Polygon2D::new(
            angles
                .iter()
                .map(|a| p(cx + r * a.cos(), cy + r * a.sin()))
                .collect(),
        )
    }

    fn contains(poly: &Polygon2D, x: &Point2<f64>) -> bool {
        let n = poly.vertices.len();
        (0..n).all(|i| {
            let a = poly.vertices[i];
            let b = poly.vertices[(i + 1) % n];
            (b - a).perp(&(x - a)) >= 0.0
        })
    }

    #[test]
    fn clipped_area_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let samples = 1_000_000;
        for _ in 0..5 {
            let a = random_convex(&mut rng);
            let b = random_convex(&mut rng);
            if !a.is_convex() || !b.is_convex() {
                continue;
            }
            let area = polygon_area(&clip_polygon(&a, &b).unwrap());
            // Sample the [-1.5, 1.5]^2 box.
            let box_area = 9.0;
            let hits = (0..samples)
                .filter(|_| {
                    let x = p(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
                    contains(&a, &x) && contains(&b, &x)
                })
                .count();
            let frac = hits as f64 / samples as f64;
            let estimate = frac * box_area;
            let sigma = box_area * (frac * (1.0 - frac) / samples as f64).sqrt();
            assert!(
                (estimate - area).abs() <= 3.0 * sigma + 1e-12,
                "area {area} vs MC {estimate} (sigma {sigma})"
            );
        }
    }

    #[test]
    fn iou_is_bounded_and_reflexive() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let a = random_convex(&mut rng);
            let b = random_convex(&mut rng);
            if !a.is_convex() || !b.is_convex() {
                continue;
            }
            let iou = polygon_iou(&a, &b).unwrap();
            assert!((0.0..=1.0).contains(&iou));
            assert!((polygon_iou(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        }
    }
}
