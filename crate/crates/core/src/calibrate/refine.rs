//! Nonlinear refinement of cameras against semantic annotations.
//!
//! Each annotated point contributes the 2D offset to the closest point of
//! its class's projected polyline; the squared norm of that offset is the
//! squared point-to-polyline distance, so the cost is the summed squared
//! distance the metrics use.

use nalgebra::{DVector, Matrix3, Point2, Point3, Vector3};
use serde::{Deserialize, Serialize};

use super::lm::{levenberg_marquardt, FitReport, LmConfig, Residuals};
use super::CalibrateError;
use crate::camera::{
    rotation_from_axis_angle, CameraModel, Homography, PinholeRadial, SimplifiedPinhole,
};
use crate::field::{SampledTemplate, SemanticClass};
use crate::geometry::closest_on_polylines;
use crate::metrics::{ImageAnnotation, MetricError};

/// Fewest annotated points the seed must project before a fit is attempted.
pub const MIN_SEED_POINTS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitParam {
    Focal,
    Rotation,
    Translation,
    K1,
    K2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefineOptions {
    pub max_iterations: usize,
    /// Let k2 vary (it is held at its initial value otherwise).
    pub unlock_k2: bool,
    /// Parameter groups held at their initial values.
    pub fixed: Vec<FitParam>,
}

impl Default for RefineOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            unlock_k2: false,
            fixed: Vec::new(),
        }
    }
}

impl RefineOptions {
    fn lm_config(&self) -> LmConfig {
        LmConfig {
            max_iterations: self.max_iterations,
            ..LmConfig::default()
        }
    }

    fn is_free(&self, p: FitParam) -> bool {
        !self.fixed.contains(&p) && (p != FitParam::K2 || self.unlock_k2)
    }
}

struct Target<'a> {
    world: &'a [Point3<f64>],
    points: &'a [Point2<f64>],
}

/// Annotated classes with their sampled template polylines, keeping only
/// those `seed` can project. Also returns the total annotated point count.
fn targets<'a>(
    seed: &CameraModel,
    template: &'a SampledTemplate,
    annotation: &'a ImageAnnotation,
) -> Result<(Vec<Target<'a>>, usize), CalibrateError> {
    let mut out = Vec::new();
    let mut total = 0;
    for (class, points) in &annotation.elements {
        let element = template
            .get(*class)
            .ok_or(MetricError::ClassNotInTemplate(*class))?;
        total += points.len();
        if !seed.project_polyline(&element.points).is_empty() {
            out.push(Target {
                world: &element.points,
                points,
            });
        }
    }
    Ok((out, total))
}

fn polyline_residuals(camera: &CameraModel, targets: &[Target], penalty: f64) -> DVector<f64> {
    let n: usize = targets.iter().map(|t| t.points.len()).sum();
    let mut r = DVector::zeros(2 * n);
    let mut k = 0;
    for t in targets {
        let pieces = camera.project_polyline(t.world);
        for x in t.points {
            let offset = match closest_on_polylines(x, &pieces) {
                Some((c, _)) => x - c,
                None => nalgebra::Vector2::new(penalty, 0.0),
            };
            r[k] = offset.x;
            r[k + 1] = offset.y;
            k += 2;
        }
    }
    r
}

fn check_counts(points: usize, usable: usize, params: usize) -> Result<(), CalibrateError> {
    if points < params {
        return Err(CalibrateError::UnderDetermined {
            points,
            parameters: params,
        });
    }
    if usable < MIN_SEED_POINTS.max(params) {
        return Err(CalibrateError::InvalidSeed(format!(
            "seed projects {usable} annotated points, need {}",
            MIN_SEED_POINTS.max(params)
        )));
    }
    Ok(())
}

/// Least-squares problem behind [`refine_camera`]. The full parameter vector
/// is [f, ω (3), t (3), k1, k2], where ω is an axis-angle rotation applied on
/// top of the initial rotation; only the free entries are optimized.
pub struct PinholeProblem<'a> {
    initial: PinholeRadial,
    free: Vec<usize>,
    targets: Vec<Target<'a>>,
    penalty: f64,
}

impl<'a> PinholeProblem<'a> {
    pub fn new(
        initial: PinholeRadial,
        template: &'a SampledTemplate,
        annotation: &'a ImageAnnotation,
        options: &RefineOptions,
    ) -> Result<Self, CalibrateError> {
        let groups = [
            (FitParam::Focal, 0..1),
            (FitParam::Rotation, 1..4),
            (FitParam::Translation, 4..7),
            (FitParam::K1, 7..8),
            (FitParam::K2, 8..9),
        ];
        let free: Vec<usize> = groups
            .into_iter()
            .filter(|(p, _)| options.is_free(*p))
            .flat_map(|(_, r)| r)
            .collect();
        let (targets, total) = targets(&CameraModel::PinholeRadial(initial), template, annotation)?;
        let usable = targets.iter().map(|t| t.points.len()).sum();
        check_counts(total, usable, free.len())?;
        let (w, h) = annotation.size();
        Ok(Self {
            initial,
            free,
            targets,
            penalty: w.hypot(h),
        })
    }

    pub fn parameter_count(&self) -> usize {
        self.free.len()
    }

    pub fn initial_params(&self) -> DVector<f64> {
        let full = self.full_initial();
        DVector::from_iterator(self.free.len(), self.free.iter().map(|&i| full[i]))
    }

    fn full_initial(&self) -> [f64; 9] {
        let c = &self.initial;
        let t = c.base.translation;
        [c.base.focal, 0.0, 0.0, 0.0, t.x, t.y, t.z, c.k1, c.k2]
    }

    pub fn camera(&self, x: &DVector<f64>) -> Option<PinholeRadial> {
        let mut full = self.full_initial();
        for (k, &i) in self.free.iter().enumerate() {
            full[i] = x[k];
        }
        let omega = Vector3::new(full[1], full[2], full[3]);
        let rotation: Matrix3<f64> = rotation_from_axis_angle(omega) * self.initial.base.rotation;
        let base = SimplifiedPinhole::new(
            full[0],
            self.initial.base.principal_point,
            rotation,
            Vector3::new(full[4], full[5], full[6]),
        )
        .ok()?;
        PinholeRadial::new(base, full[7], full[8]).ok()
    }
}

impl Residuals for PinholeProblem<'_> {
    fn residuals(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        let cam = CameraModel::PinholeRadial(self.camera(x)?);
        Some(polyline_residuals(&cam, &self.targets, self.penalty))
    }
}

/// Refines a pinhole camera (with radial distortion) so that the projected
/// template passes through the annotated points. The principal point is
/// never changed.
pub fn refine_camera(
    initial: PinholeRadial,
    template: &SampledTemplate,
    annotation: &ImageAnnotation,
    options: &RefineOptions,
) -> Result<(PinholeRadial, FitReport), CalibrateError> {
    let problem = PinholeProblem::new(initial, template, annotation, options)?;
    let (x, report) = levenberg_marquardt(&problem, problem.initial_params(), &options.lm_config())
        .map_err(|_| CalibrateError::InvalidSeed("cost is not finite at the seed".into()))?;
    let cam = problem
        .camera(&x)
        .expect("accepted parameters always form a valid camera");
    Ok((cam, report))
}

/// Least-squares problem over the entries of a homography, with the
/// bottom-right entry held fixed to remove the scale freedom.
pub struct HomographyProblem<'a> {
    initial: [f64; 9],
    targets: Vec<Target<'a>>,
    penalty: f64,
}

impl<'a> HomographyProblem<'a> {
    pub fn new(
        initial: Homography,
        template: &'a SampledTemplate,
        annotation: &'a ImageAnnotation,
    ) -> Result<Self, CalibrateError> {
        let (targets, total) = targets(&CameraModel::Homography(initial), template, annotation)?;
        // Off-plane classes cannot be modelled; they do not count as data.
        let plane_total = annotation
            .elements
            .iter()
            .filter(|(c, _)| !c.is_goal())
            .map(|(_, p)| p.len())
            .sum::<usize>()
            .min(total);
        let usable = targets.iter().map(|t| t.points.len()).sum();
        check_counts(plane_total, usable, 8)?;
        let (w, h) = annotation.size();
        Ok(Self {
            initial: initial.to_row_array(),
            targets,
            penalty: w.hypot(h),
        })
    }

    pub fn initial_params(&self) -> DVector<f64> {
        DVector::from_row_slice(&self.initial[..8])
    }

    pub fn homography(&self, x: &DVector<f64>) -> Option<Homography> {
        let mut m = self.initial;
        m[..8].copy_from_slice(x.as_slice());
        Homography::from_row_slice(&m).ok()
    }
}

impl Residuals for HomographyProblem<'_> {
    fn residuals(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        let cam = CameraModel::Homography(self.homography(x)?);
        Some(polyline_residuals(&cam, &self.targets, self.penalty))
    }
}

/// Homography counterpart of [`refine_camera`]. Goal annotations are off the
/// ground plane and are ignored.
pub fn refine_homography(
    initial: Homography,
    template: &SampledTemplate,
    annotation: &ImageAnnotation,
    options: &RefineOptions,
) -> Result<(Homography, FitReport), CalibrateError> {
    let problem = HomographyProblem::new(initial, template, annotation)?;
    let (x, report) = levenberg_marquardt(&problem, problem.initial_params(), &options.lm_config())
        .map_err(|_| CalibrateError::InvalidSeed("cost is not finite at the seed".into()))?;
    let h = problem
        .homography(&x)
        .expect("accepted parameters always form a valid homography");
    Ok((h, report))
}

/// Classes whose annotations took part in a fit seeded with `seed`.
pub fn fitted_classes(
    seed: &CameraModel,
    template: &SampledTemplate,
    annotation: &ImageAnnotation,
) -> Vec<SemanticClass> {
    annotation
        .elements
        .keys()
        .filter(|c| {
            template
                .get(**c)
                .is_some_and(|e| !seed.project_polyline(&e.points).is_empty())
        })
        .copied()
        .collect()
}
