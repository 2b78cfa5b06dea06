//! Camera models sharing one projection contract: world point in, image
//! point (or an explicit reason it has none) out.

use nalgebra::{Matrix3, Point2, Point3, Rotation3, Vector2, Vector3};
use thiserror::Error;

/// Minimum camera-frame depth (meters) for a point to be projectable.
pub const MIN_DEPTH: f64 = 1e-9;
/// Maximum |Z| (meters) a homography accepts as lying on the ground plane.
pub const GROUND_TOLERANCE: f64 = 1e-9;

const UNDISTORT_MAX_ITERATIONS: usize = 20;
const UNDISTORT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CameraError {
    #[error("homography is singular (|det| = {0:e} after normalization)")]
    SingularHomography(f64),
    #[error("rotation is not orthonormal with det +1 (error {0:e})")]
    InvalidRotation(f64),
    #[error("focal length must be positive and finite, got {0}")]
    InvalidFocal(f64),
    #[error("non-finite camera parameter")]
    NonFinite,
    #[error("viewing ray does not meet the ground plane")]
    NoGroundIntersection,
    #[error("ground intersection lies behind the camera")]
    GroundBehindCamera,
    #[error("undistortion did not converge (residual {residual:e})")]
    UndistortionDiverged { residual: f64 },
    #[error("camera has radial distortion (k1 = {k1}, k2 = {k2}) which a homography cannot represent; acknowledge dropping it explicitly")]
    DistortionRefused { k1: f64, k2: f64 },
}

/// Why a world point has no image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unprojectable {
    BehindCamera,
    /// Homographies only map the Z = 0 plane.
    OffPlane,
    /// Beyond the radius where the radial polynomial stops being monotonic,
    /// so the forward model folds points back toward the center.
    OutsideDistortionDomain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Projection {
    Point(Point2<f64>),
    Unprojectable(Unprojectable),
}

impl Projection {
    pub fn point(self) -> Option<Point2<f64>> {
        match self {
            Projection::Point(p) => Some(p),
            Projection::Unprojectable(_) => None,
        }
    }
}

/// Planar map from world ground coordinates (X, Y, 1) to homogeneous pixels.
///
/// Stored with unit Frobenius norm. The overall sign is kept: ground points in
/// front of the camera map to positive homogeneous w, the others are
/// unprojectable. [`Homography::oriented_for_image`] fixes the sign of a
/// matrix whose orientation is unknown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography {
    h: Matrix3<f64>,
}

impl Homography {
    pub fn new(m: Matrix3<f64>) -> Result<Self, CameraError> {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(CameraError::NonFinite);
        }
        let norm = m.norm();
        if norm == 0.0 {
            return Err(CameraError::SingularHomography(0.0));
        }
        // Already-normalized input is kept bit-for-bit.
        let h = if (norm - 1.0).abs() <= 4.0 * f64::EPSILON {
            m
        } else {
            m / norm
        };
        let det = h.determinant();
        if det.abs() <= 1e-12 {
            return Err(CameraError::SingularHomography(det.abs()));
        }
        Ok(Self { h })
    }

    pub fn identity() -> Self {
        Self::new(Matrix3::identity()).expect("identity is invertible")
    }

    pub fn from_row_slice(values: &[f64; 9]) -> Result<Self, CameraError> {
        Self::new(Matrix3::from_row_slice(values))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.h
    }

    pub fn to_row_array(&self) -> [f64; 9] {
        let h = &self.h;
        [
            h[(0, 0)],
            h[(0, 1)],
            h[(0, 2)],
            h[(1, 0)],
            h[(1, 1)],
            h[(1, 2)],
            h[(2, 0)],
            h[(2, 1)],
            h[(2, 2)],
        ]
    }

    pub fn inverse_matrix(&self) -> Matrix3<f64> {
        self.h
            .try_inverse()
            .expect("homography invertibility is a construction invariant")
    }

    pub fn apply(&self, x: f64, y: f64) -> Projection {
        let v = self.h * Vector3::new(x, y, 1.0);
        if v.z <= 0.0 {
            return Projection::Unprojectable(Unprojectable::BehindCamera);
        }
        let p = Point2::new(v.x / v.z, v.y / v.z);
        if !(p.x.is_finite() && p.y.is_finite()) {
            return Projection::Unprojectable(Unprojectable::BehindCamera);
        }
        Projection::Point(p)
    }

    pub fn project(&self, world: &Point3<f64>) -> Projection {
        if world.z.abs() > GROUND_TOLERANCE {
            return Projection::Unprojectable(Unprojectable::OffPlane);
        }
        self.apply(world.x, world.y)
    }

    /// Same map, signed so that the ground seen at the bottom center of an
    /// image of `size` lies in front of the camera (the image center is
    /// tried if the horizon passes through that pixel).
    pub fn oriented_for_image(&self, size: (u32, u32)) -> Self {
        let inv = self.inverse_matrix();
        let (w, h) = (size.0 as f64, size.1 as f64);
        for (x, y) in [(w / 2.0, h), (w / 2.0, h / 2.0)] {
            let v = inv * Vector3::new(x, y, 1.0);
            // The ground point maps back with w = 1 / v.z.
            if v.z.abs() > 1e-12 * v.xy().norm() {
                return if v.z > 0.0 {
                    *self
                } else {
                    Self { h: -self.h }
                };
            }
        }
        *self
    }

    pub fn ray_to_ground(&self, image: &Point2<f64>) -> Result<Point3<f64>, CameraError> {
        let v = self.inverse_matrix() * Vector3::new(image.x, image.y, 1.0);
        let scale = v.xy().norm().max(1e-300);
        if v.z <= 1e-12 * scale {
            return Err(CameraError::NoGroundIntersection);
        }
        Ok(Point3::new(v.x / v.z, v.y / v.z, 0.0))
    }
}

/// Single focal length, square pixels, zero skew.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplifiedPinhole {
    pub focal: f64,
    pub principal_point: Point2<f64>,
    /// World-to-camera rotation.
    pub rotation: Matrix3<f64>,
    /// World-to-camera translation (meters).
    pub translation: Vector3<f64>,
}

/// Max-norm of RᵀR − I combined with |det R − 1|.
pub fn rotation_error(r: &Matrix3<f64>) -> f64 {
    let ortho = (r.transpose() * r - Matrix3::identity()).amax();
    ortho.max((r.determinant() - 1.0).abs())
}

impl SimplifiedPinhole {
    pub fn new(
        focal: f64,
        principal_point: Point2<f64>,
        rotation: Matrix3<f64>,
        translation: Vector3<f64>,
    ) -> Result<Self, CameraError> {
        if !(focal.is_finite() && focal > 0.0) {
            return Err(CameraError::InvalidFocal(focal));
        }
        if !(principal_point.coords.iter().all(|v| v.is_finite())
            && rotation.iter().all(|v| v.is_finite())
            && translation.iter().all(|v| v.is_finite()))
        {
            return Err(CameraError::NonFinite);
        }
        let err = rotation_error(&rotation);
        if err > 1e-9 {
            return Err(CameraError::InvalidRotation(err));
        }
        Ok(Self {
            focal,
            principal_point,
            rotation,
            translation,
        })
    }

    /// Camera at `center` looking at `target`, image x to the right of the
    /// view direction and image y pointing down (world Z is up).
    pub fn look_at(
        focal: f64,
        principal_point: Point2<f64>,
        center: Point3<f64>,
        target: Point3<f64>,
    ) -> Result<Self, CameraError> {
        let forward = (target - center).normalize();
        let right = forward.cross(&Vector3::z());
        if right.norm() < 1e-9 {
            // Looking straight down or up: pick world X as image right.
            let right = Vector3::x();
            let down = forward.cross(&right).normalize();
            let right = down.cross(&forward);
            return Self::from_axes(focal, principal_point, center, right, down, forward);
        }
        let right = right.normalize();
        let down = forward.cross(&right);
        Self::from_axes(focal, principal_point, center, right, down, forward)
    }

    fn from_axes(
        focal: f64,
        principal_point: Point2<f64>,
        center: Point3<f64>,
        right: Vector3<f64>,
        down: Vector3<f64>,
        forward: Vector3<f64>,
    ) -> Result<Self, CameraError> {
        let rotation =
            Matrix3::from_rows(&[right.transpose(), down.transpose(), forward.transpose()]);
        let translation = -(rotation * center.coords);
        Self::new(focal, principal_point, rotation, translation)
    }

    pub fn intrinsics(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.focal,
            0.0,
            self.principal_point.x,
            0.0,
            self.focal,
            self.principal_point.y,
            0.0,
            0.0,
            1.0,
        )
    }

    pub fn center(&self) -> Point3<f64> {
        Point3::from(-(self.rotation.transpose() * self.translation))
    }

    pub fn to_camera_frame(&self, world: &Point3<f64>) -> Vector3<f64> {
        self.rotation * world.coords + self.translation
    }

    /// Same camera observing a world displaced by `offset`: it images world
    /// point X where this camera images X + offset.
    pub fn with_world_offset(&self, offset: Vector3<f64>) -> Self {
        Self {
            translation: self.translation + self.rotation * offset,
            ..*self
        }
    }

    fn to_pixels(self, normalized: Vector2<f64>) -> Point2<f64> {
        Point2::new(
            self.focal * normalized.x + self.principal_point.x,
            self.focal * normalized.y + self.principal_point.y,
        )
    }

    fn to_normalized(self, image: &Point2<f64>) -> Vector2<f64> {
        (image - self.principal_point) / self.focal
    }

    /// Intersects the ray through an undistorted normalized point with Z = 0.
    fn normalized_ray_to_ground(&self, n: Vector2<f64>) -> Result<Point3<f64>, CameraError> {
        let rt = self.rotation.transpose();
        let dir = rt * Vector3::new(n.x, n.y, 1.0);
        let center = self.center();
        if dir.z.abs() < 1e-12 {
            return Err(CameraError::NoGroundIntersection);
        }
        let s = -center.z / dir.z;
        if s <= 0.0 {
            return Err(CameraError::GroundBehindCamera);
        }
        let p = center + dir * s;
        Ok(Point3::new(p.x, p.y, 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PinholeRadial {
    pub base: SimplifiedPinhole,
    pub k1: f64,
    pub k2: f64,
}

impl PinholeRadial {
    pub fn new(base: SimplifiedPinhole, k1: f64, k2: f64) -> Result<Self, CameraError> {
        if !(k1.is_finite() && k2.is_finite()) {
            return Err(CameraError::NonFinite);
        }
        Ok(Self { base, k1, k2 })
    }

    pub fn has_distortion(&self) -> bool {
        self.k1 != 0.0 || self.k2 != 0.0
    }
}

/// Radial model x·(1 + k1·r² + k2·r⁴) in normalized coordinates.
pub fn distort(p: Vector2<f64>, k1: f64, k2: f64) -> Vector2<f64> {
    let r2 = p.norm_squared();
    p * (1.0 + k1 * r2 + k2 * r2 * r2)
}

/// Largest undistorted r² for which the radial map is still monotonic in r:
/// the first positive root of 1 + 3·k1·u + 5·k2·u² (u = r²).
pub fn distortion_domain_r2(k1: f64, k2: f64) -> f64 {
    let (a, b, c) = (5.0 * k2, 3.0 * k1, 1.0);
    if a == 0.0 {
        return if b < 0.0 { -c / b } else { f64::INFINITY };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return f64::INFINITY;
    }
    let sq = disc.sqrt();
    [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)]
        .into_iter()
        .filter(|u| *u > 0.0)
        .fold(f64::INFINITY, f64::min)
}

/// Inverts [`distort`] by fixed-point iteration.
pub fn undistort(distorted: Vector2<f64>, k1: f64, k2: f64) -> Result<Vector2<f64>, CameraError> {
    if k1 == 0.0 && k2 == 0.0 {
        return Ok(distorted);
    }
    let mut x = distorted;
    for _ in 0..UNDISTORT_MAX_ITERATIONS {
        let r2 = x.norm_squared();
        let factor = 1.0 + k1 * r2 + k2 * r2 * r2;
        if factor.abs() < 1e-300 {
            break;
        }
        let next = distorted / factor;
        let step = (next - x).norm();
        x = next;
        if step < UNDISTORT_TOLERANCE {
            return Ok(x);
        }
    }
    let residual = (distort(x, k1, k2) - distorted).norm();
    if residual.is_finite() && residual < UNDISTORT_TOLERANCE {
        Ok(x)
    } else {
        Err(CameraError::UndistortionDiverged { residual })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CameraModel {
    Homography(Homography),
    Pinhole(SimplifiedPinhole),
    PinholeRadial(PinholeRadial),
}

impl From<Homography> for CameraModel {
    fn from(h: Homography) -> Self {
        CameraModel::Homography(h)
    }
}

impl From<SimplifiedPinhole> for CameraModel {
    fn from(c: SimplifiedPinhole) -> Self {
        CameraModel::Pinhole(c)
    }
}

impl From<PinholeRadial> for CameraModel {
    fn from(c: PinholeRadial) -> Self {
        CameraModel::PinholeRadial(c)
    }
}

impl CameraModel {
    pub fn kind(&self) -> &'static str {
        match self {
            CameraModel::Homography(_) => "homography",
            CameraModel::Pinhole(_) => "pinhole",
            CameraModel::PinholeRadial(_) => "pinhole_radial",
        }
    }

    pub fn project(&self, world: &Point3<f64>) -> Projection {
        match self {
            CameraModel::Homography(h) => h.project(world),
            CameraModel::Pinhole(c) => project_pinhole(c, 0.0, 0.0, world),
            CameraModel::PinholeRadial(c) => project_pinhole(&c.base, c.k1, c.k2, world),
        }
    }

    /// Projects every vertex and splits the polyline at unprojectable ones.
    /// Pieces with fewer than two vertices are dropped.
    pub fn project_polyline(&self, points: &[Point3<f64>]) -> Vec<Vec<Point2<f64>>> {
        let mut pieces = Vec::new();
        let mut current: Vec<Point2<f64>> = Vec::new();
        for p in points {
            match self.project(p) {
                Projection::Point(q) => current.push(q),
                Projection::Unprojectable(_) => {
                    if current.len() >= 2 {
                        pieces.push(std::mem::take(&mut current));
                    } else {
                        current.clear();
                    }
                }
            }
        }
        if current.len() >= 2 {
            pieces.push(current);
        }
        pieces
    }

    /// Back-projects a pixel onto the Z = 0 plane.
    pub fn ray_to_ground(&self, image: &Point2<f64>) -> Result<Point3<f64>, CameraError> {
        match self {
            CameraModel::Homography(h) => h.ray_to_ground(image),
            CameraModel::Pinhole(c) => c.normalized_ray_to_ground(c.to_normalized(image)),
            CameraModel::PinholeRadial(c) => {
                let n = undistort(c.base.to_normalized(image), c.k1, c.k2)?;
                c.base.normalized_ray_to_ground(n)
            }
        }
    }

    /// Ground-plane homography K·[r1 r2 t]. Refuses to drop radial distortion
    /// unless `ignore_distortion` is set.
    pub fn ground_homography(&self, ignore_distortion: bool) -> Result<Homography, CameraError> {
        match self {
            CameraModel::Homography(h) => Ok(*h),
            CameraModel::Pinhole(c) => pinhole_ground_homography(c),
            CameraModel::PinholeRadial(c) => {
                if c.has_distortion() && !ignore_distortion {
                    return Err(CameraError::DistortionRefused { k1: c.k1, k2: c.k2 });
                }
                pinhole_ground_homography(&c.base)
            }
        }
    }

    pub fn as_pinhole_radial(&self) -> Option<PinholeRadial> {
        match self {
            CameraModel::Homography(_) => None,
            CameraModel::Pinhole(c) => Some(PinholeRadial {
                base: *c,
                k1: 0.0,
                k2: 0.0,
            }),
            CameraModel::PinholeRadial(c) => Some(*c),
        }
    }
}

/// Free-function form of [`CameraModel::ground_homography`].
pub fn ground_homography_of(
    camera: &CameraModel,
    ignore_distortion: bool,
) -> Result<Homography, CameraError> {
    camera.ground_homography(ignore_distortion)
}

fn pinhole_ground_homography(c: &SimplifiedPinhole) -> Result<Homography, CameraError> {
    let mut rt = Matrix3::zeros();
    rt.set_column(0, &c.rotation.column(0));
    rt.set_column(1, &c.rotation.column(1));
    rt.set_column(2, &c.translation);
    Homography::new(c.intrinsics() * rt)
}

fn project_pinhole(c: &SimplifiedPinhole, k1: f64, k2: f64, world: &Point3<f64>) -> Projection {
    let pc = c.to_camera_frame(world);
    if pc.z <= MIN_DEPTH {
        return Projection::Unprojectable(Unprojectable::BehindCamera);
    }
    let n = Vector2::new(pc.x / pc.z, pc.y / pc.z);
    let n = if k1 != 0.0 || k2 != 0.0 {
        if n.norm_squared() >= distortion_domain_r2(k1, k2) {
            return Projection::Unprojectable(Unprojectable::OutsideDistortionDomain);
        }
        distort(n, k1, k2)
    } else {
        n
    };
    let p = c.to_pixels(n);
    if !(p.x.is_finite() && p.y.is_finite()) {
        return Projection::Unprojectable(Unprojectable::BehindCamera);
    }
    Projection::Point(p)
}

/// Rotation matrix from an axis-angle vector.
pub fn rotation_from_axis_angle(omega: Vector3<f64>) -> Matrix3<f64> {
    Rotation3::new(omega).into_inner()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn overhead(focal: f64) -> SimplifiedPinhole {
        SimplifiedPinhole::new(
            focal,
            Point2::new(960.0, 540.0),
            Matrix3::identity(),
            Vector3::new(0.0, 0.0, 10.0),
        )
        .unwrap()
    }

    fn random_broadcast(rng: &mut ChaCha8Rng) -> SimplifiedPinhole {
        let center = Point3::new(
            rng.random_range(-10.0..10.0),
            rng.random_range(-45.0..-35.0),
            rng.random_range(8.0..25.0),
        );
        let target = Point3::new(
            rng.random_range(-40.0..40.0),
            rng.random_range(-20.0..20.0),
            0.0,
        );
        SimplifiedPinhole::look_at(
            rng.random_range(1500.0..6000.0),
            Point2::new(960.0, 540.0),
            center,
            target,
        )
        .unwrap()
    }

    #[test]
    fn identity_homography_maps_ground_points() {
        let h = CameraModel::Homography(Homography::identity());
        let p = h.project(&Point3::new(3.0, 4.0, 0.0)).point().unwrap();
        assert!((p - Point2::new(3.0, 4.0)).norm() < 1e-15);
        assert_eq!(
            h.project(&Point3::new(0.0, 0.0, 2.44)),
            Projection::Unprojectable(Unprojectable::OffPlane)
        );
        let g = h.ray_to_ground(&Point2::new(3.0, 4.0)).unwrap();
        assert!((g - Point3::new(3.0, 4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn pinhole_projection_chain() {
        let cam = CameraModel::Pinhole(overhead(1000.0));
        assert_eq!(
            cam.project(&Point3::origin()).point().unwrap(),
            Point2::new(960.0, 540.0)
        );
        assert_eq!(
            cam.project(&Point3::new(1.0, 0.0, 0.0)).point().unwrap(),
            Point2::new(1060.0, 540.0)
        );
        assert_eq!(
            cam.project(&Point3::new(0.0, 0.0, -10.0)),
            Projection::Unprojectable(Unprojectable::BehindCamera)
        );
    }

    #[test]
    fn distortion_examples() {
        assert_eq!(distort(Vector2::zeros(), 0.3, -0.2), Vector2::zeros());
        let d = distort(Vector2::new(0.5, 0.0), 0.1, 0.0);
        assert!((d.x - 0.5125).abs() < 1e-15 && d.y == 0.0);
        let p = Vector2::new(0.3, -0.7);
        assert_eq!(distort(p, 0.0, 0.0), p);
    }

    #[test]
    fn distortion_domain_roots() {
        assert_eq!(distortion_domain_r2(0.1, 0.0), f64::INFINITY);
        assert!((distortion_domain_r2(-0.12, 0.0) - 1.0 / 0.36).abs() < 1e-12);
        let u = distortion_domain_r2(-0.2, 0.01);
        assert!((1.0 - 0.6 * u + 0.05 * u * u).abs() < 1e-12);
    }

    #[test]
    fn undistort_inverts_distort() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let p = Vector2::new(rng.random_range(-0.8..0.8), rng.random_range(-0.5..0.5));
            let k1 = rng.random_range(-0.12..0.05);
            let d = distort(p, k1, 0.0);
            let u = undistort(d, k1, 0.0).unwrap();
            assert!((u - p).norm() < 1e-11, "{p} {k1}");
        }
    }

    #[test]
    fn ground_round_trip_random_cameras() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut worst: f64 = 0.0;
        for i in 0..200 {
            let base = random_broadcast(&mut rng);
            let k1 = if i % 2 == 0 {
                -0.05
            } else {
                rng.random_range(-0.12..0.02)
            };
            let cams = [
                CameraModel::Pinhole(base),
                CameraModel::PinholeRadial(PinholeRadial::new(base, k1, 0.0).unwrap()),
                CameraModel::Homography(pinhole_ground_homography(&base).unwrap()),
            ];
            assert!(rotation_error(&base.rotation) <= 1e-9);
            for cam in cams {
                for _ in 0..20 {
                    let g = Point3::new(
                        rng.random_range(-52.5..52.5),
                        rng.random_range(-34.0..34.0),
                        0.0,
                    );
                    let Some(px) = cam.project(&g).point() else {
                        continue;
                    };
                    if !(0.0..=1920.0).contains(&px.x) || !(0.0..=1080.0).contains(&px.y) {
                        continue;
                    }
                    let back = cam.ray_to_ground(&px).unwrap();
                    worst = worst.max((back - g).norm());
                }
            }
        }
        assert!(worst <= 1e-8, "worst round trip {worst}");
    }

    #[test]
    fn ground_homography_agrees_with_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut checked = 0;
        for _ in 0..10 {
            let cam = random_broadcast(&mut rng);
            let model = CameraModel::Pinhole(cam);
            let h = model.ground_homography(false).unwrap();
            for _ in 0..100 {
                let px = Point2::new(rng.random_range(0.0..1920.0), rng.random_range(0.0..1080.0));
                let Ok(g) = cam.normalized_ray_to_ground(cam.to_normalized(&px)) else {
                    continue;
                };
                let a = model.project(&g).point().unwrap();
                let b = h.project(&g).point().unwrap();
                assert!((a - b).norm() < 1e-9, "{a} {b}");
                checked += 1;
            }
        }
        assert!(checked > 500);
        let top = CameraModel::Pinhole(overhead(1000.0))
            .ground_homography(false)
            .unwrap();
        assert!((top.apply(0.0, 0.0).point().unwrap() - Point2::new(960.0, 540.0)).norm() < 1e-9);
    }

    #[test]
    fn distortion_must_be_acknowledged() {
        let cam =
            CameraModel::PinholeRadial(PinholeRadial::new(overhead(1000.0), -0.1, 0.0).unwrap());
        assert!(matches!(
            cam.ground_homography(false),
            Err(CameraError::DistortionRefused { .. })
        ));
        assert!(cam.ground_homography(true).is_ok());
    }

    #[test]
    fn homography_projection_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let base = pinhole_ground_homography(&random_broadcast(&mut rng)).unwrap();
        let scaled = Homography::new(base.matrix() * 37.5).unwrap();
        for _ in 0..100 {
            let (x, y) = (rng.random_range(-50.0..50.0), rng.random_range(-30.0..30.0));
            if let (Some(a), Some(b)) = (base.apply(x, y).point(), scaled.apply(x, y).point()) {
                assert!((a - b).norm() <= 1e-12 * a.coords.norm());
            }
        }
    }

    #[test]
    fn orientation_follows_the_visible_ground() {
        // Looking away from the pitch center: the origin is behind the camera.
        let cam = SimplifiedPinhole::look_at(
            3000.0,
            Point2::new(960.0, 540.0),
            Point3::new(-10.0, -20.0, 10.0),
            Point3::new(-50.0, -34.0, 0.0),
        )
        .unwrap();
        let h = CameraModel::Pinhole(cam).ground_homography(false).unwrap();
        assert!(h.apply(-50.0, -34.0).point().is_some());
        assert!(h.apply(0.0, 0.0).point().is_none());
        let flipped = Homography::new(-h.matrix()).unwrap();
        assert!(flipped.apply(-50.0, -34.0).point().is_none());
        assert_eq!(flipped.oriented_for_image((1920, 1080)), h);
        assert_eq!(h.oriented_for_image((1920, 1080)), h);
    }

    #[test]
    fn homography_normalization() {
        let h = Homography::new(Matrix3::identity() * -4.0).unwrap();
        assert!((h.matrix().norm() - 1.0).abs() < 1e-15);
        assert!(h.matrix()[(2, 2)] < 0.0);
        assert!(matches!(
            Homography::new(Matrix3::zeros()),
            Err(CameraError::SingularHomography(_))
        ));
        let rank2 = Matrix3::new(1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 0.0, 1.0);
        assert!(Homography::new(rank2).is_err());
    }

    #[test]
    fn polyline_splits_at_unprojectable_vertices() {
        // Camera at pitch level on the bottom side line, looking along it.
        let cam = CameraModel::Pinhole(
            SimplifiedPinhole::look_at(
                1000.0,
                Point2::new(960.0, 540.0),
                Point3::new(0.0, -34.0, 1.0),
                Point3::new(50.0, -34.0, 0.5),
            )
            .unwrap(),
        );
        let line: Vec<Point3<f64>> = [-20.0, -10.0, 0.0, 10.0, 20.0]
            .iter()
            .map(|&x| Point3::new(x, -30.0, 0.0))
            .collect();
        // Vertices at x <= 0 are behind; rotate the polyline so the behind
        // vertex sits in the middle.
        let mid: Vec<Point3<f64>> = vec![
            line[4],
            line[3],
            Point3::new(-5.0, -30.0, 0.0),
            line[3],
            line[4],
        ];
        let pieces = cam.project_polyline(&mid);
        assert_eq!(pieces.len(), 2);
        assert!(pieces.iter().all(|p| p.len() == 2));

        let goal = [
            Point3::new(-52.5, -3.66, 2.44),
            Point3::new(-52.5, 3.66, 2.44),
        ];
        assert!(CameraModel::Homography(Homography::identity())
            .project_polyline(&goal)
            .is_empty());

        let ahead: Vec<Point3<f64>> = (0..5)
            .map(|i| Point3::new(10.0 + i as f64, -30.0, 0.0))
            .collect();
        assert_eq!(
            cam.project_polyline(&ahead),
            vec![ahead
                .iter()
                .map(|p| cam.project(p).point().unwrap())
                .collect::<Vec<_>>()]
        );
    }

    #[test]
    fn parallel_ray_has_no_ground_intersection() {
        let cam = CameraModel::Pinhole(
            SimplifiedPinhole::look_at(
                1000.0,
                Point2::new(960.0, 540.0),
                Point3::new(0.0, -40.0, 10.0),
                Point3::new(0.0, 0.0, 10.0),
            )
            .unwrap(),
        );
        assert_eq!(
            cam.ray_to_ground(&Point2::new(960.0, 540.0)),
            Err(CameraError::NoGroundIntersection)
        );
        assert_eq!(
            cam.ray_to_ground(&Point2::new(960.0, 100.0)),
            Err(CameraError::GroundBehindCamera)
        );
    }

    #[test]
    fn world_offset_shifts_back_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cam = random_broadcast(&mut rng);
        let shifted = CameraModel::Pinhole(cam.with_world_offset(Vector3::new(1.0, 0.0, 0.0)));
        let cam = CameraModel::Pinhole(cam);
        let px = Point2::new(960.0, 700.0);
        let a = cam.ray_to_ground(&px).unwrap();
        let b = shifted.ray_to_ground(&px).unwrap();
        assert!(((a - b).norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn invalid_rotation_rejected() {
        let mut r = Matrix3::identity();
        r[(0, 1)] = 1e-6;
        assert!(matches!(
            SimplifiedPinhole::new(1000.0, Point2::origin(), r, Vector3::zeros()),
            Err(CameraError::InvalidRotation(_))
        ));
        assert!(SimplifiedPinhole::new(
            -1.0,
            Point2::origin(),
            Matrix3::identity(),
            Vector3::zeros()
        )
        .is_err());
    }
}
