//! Thresholded Jaccard index for calibrations (JaC_τ) and the reprojection
//! error it is built on.

use nalgebra::Point2;
use serde::{Deserialize, Serialize};

use super::{ImageAnnotation, MetricError};
use crate::camera::CameraModel;
use crate::field::{FieldElement, SampledTemplate, SemanticClass};
use crate::geometry::point_polyline_distance;

/// Default discretization of curved and long elements for scoring (meters).
pub const DEFAULT_SPACING: f64 = 0.2;

/// One template element as seen by a camera.
#[derive(Debug, Clone)]
pub struct ProjectedElement {
    pub class: SemanticClass,
    pub is_curve: bool,
    pub pieces: Vec<Vec<Point2<f64>>>,
    /// At least one projected vertex inside the image.
    pub predicted: bool,
}

pub fn inside_image(p: &Point2<f64>, width: f64, height: f64) -> bool {
    p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height
}

/// Projects every sampled element and decides which ones the camera predicts
/// to be visible in a `width`×`height` image.
pub fn project_template(
    camera: &CameraModel,
    template: &SampledTemplate,
    width: f64,
    height: f64,
) -> Vec<ProjectedElement> {
    template
        .elements
        .iter()
        .map(|e| {
            let pieces = camera.project_polyline(&e.points);
            let predicted = pieces
                .iter()
                .flatten()
                .any(|p| inside_image(p, width, height));
            ProjectedElement {
                class: e.class,
                is_curve: e.is_curve,
                pieces,
                predicted,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    TruePositive,
    /// Annotated and predicted, but some annotated point is at least τ away.
    FalsePositiveInaccurate,
    /// Predicted but not annotated.
    FalsePositiveHallucinated,
    /// Annotated but not predicted.
    FalseNegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp_hallucinated: usize,
    pub fp_inaccurate: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn fp(&self) -> usize {
        self.fp_hallucinated + self.fp_inaccurate
    }

    /// tp / (tp + fp + fn); `None` when all three are zero.
    pub fn jaccard(&self) -> Option<f64> {
        let denom = self.tp + self.fp() + self.fn_;
        (denom > 0).then(|| self.tp as f64 / denom as f64)
    }

    fn record(&mut self, verdict: Verdict) {
        match verdict {
            Verdict::TruePositive => self.tp += 1,
            Verdict::FalsePositiveInaccurate => self.fp_inaccurate += 1,
            Verdict::FalsePositiveHallucinated => self.fp_hallucinated += 1,
            Verdict::FalseNegative => self.fn_ += 1,
        }
    }
}

impl std::ops::Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            tp: self.tp + o.tp,
            fp_hallucinated: self.fp_hallucinated + o.fp_hallucinated,
            fp_inaccurate: self.fp_inaccurate + o.fp_inaccurate,
            fn_: self.fn_ + o.fn_,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassVerdict {
    pub class: SemanticClass,
    pub verdict: Verdict,
    /// Largest annotated-point distance, when the element projects at all.
    pub worst_distance: Option<f64>,
    /// Distance of each annotated point, in annotation order; empty when the
    /// class is not annotated or does not project.
    pub distances: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReprojectionError {
    /// Mean point-to-projection distance in pixels.
    pub pixels: Option<f64>,
    /// `pixels` divided by the image height.
    pub normalized: Option<f64>,
    pub used_points: usize,
    /// Annotated points of classes the camera does not predict.
    pub excluded_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageEval {
    pub tau: f64,
    pub image_width: u32,
    pub image_height: u32,
    pub counts: ConfusionCounts,
    pub jaccard: f64,
    /// Nothing annotated and nothing predicted; `jaccard` is 1 by convention.
    pub vacuous: bool,
    pub classes: Vec<ClassVerdict>,
    pub reprojection: ReprojectionError,
}

impl ImageEval {
    pub fn verdict(&self, class: SemanticClass) -> Option<Verdict> {
        self.classes
            .iter()
            .find(|c| c.class == class)
            .map(|c| c.verdict)
    }
}

/// Threshold-independent part of an evaluation: which classes are predicted
/// and how far each annotated point is from its class's projection.
#[derive(Debug, Clone)]
pub struct ImageMeasurement {
    image_width: u32,
    image_height: u32,
    entries: Vec<MeasuredClass>,
}

#[derive(Debug, Clone)]
struct MeasuredClass {
    class: SemanticClass,
    annotated: bool,
    annotated_points: usize,
    predicted: bool,
    distances: Vec<f64>,
}

impl ImageMeasurement {
    pub fn new(
        camera: &CameraModel,
        template: &SampledTemplate,
        annotation: &ImageAnnotation,
    ) -> Result<Self, MetricError> {
        annotation.validate()?;
        for class in annotation.elements.keys() {
            if template.get(*class).is_none() {
                return Err(MetricError::ClassNotInTemplate(*class));
            }
        }
        let (w, h) = annotation.size();
        let projected = project_template(camera, template, w, h);
        let entries = projected
            .into_iter()
            .filter_map(|pe| {
                let points = annotation.elements.get(&pe.class);
                if points.is_none() && !pe.predicted {
                    return None;
                }
                let distances = match points {
                    Some(pts) if !pe.pieces.is_empty() => pts
                        .iter()
                        .map(|x| point_polyline_distance(x, &pe.pieces).expect("non-empty pieces"))
                        .collect(),
                    _ => Vec::new(),
                };
                Some(MeasuredClass {
                    class: pe.class,
                    annotated: points.is_some(),
                    annotated_points: points.map_or(0, Vec::len),
                    predicted: pe.predicted,
                    distances,
                })
            })
            .collect();
        Ok(Self {
            image_width: annotation.image_width,
            image_height: annotation.image_height,
            entries,
        })
    }

    pub fn reprojection(&self) -> ReprojectionError {
        let mut sum = 0.0;
        let mut used = 0;
        let mut excluded = 0;
        for e in self.entries.iter().filter(|e| e.annotated) {
            if e.predicted {
                sum += e.distances.iter().sum::<f64>();
                used += e.distances.len();
            } else {
                excluded += e.annotated_points;
            }
        }
        let pixels = (used > 0).then(|| sum / used as f64);
        ReprojectionError {
            pixels,
            normalized: pixels.map(|p| p / self.image_height as f64),
            used_points: used,
            excluded_points: excluded,
        }
    }

    pub fn score(&self, tau: f64) -> Result<ImageEval, MetricError> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(MetricError::InvalidTau(tau));
        }
        let mut counts = ConfusionCounts::default();
        let classes: Vec<ClassVerdict> = self
            .entries
            .iter()
            .map(|e| {
                let verdict = classify(e.annotated, e.predicted, &e.distances, tau);
                counts.record(verdict);
                ClassVerdict {
                    class: e.class,
                    verdict,
                    worst_distance: e.distances.iter().copied().reduce(f64::max),
                    distances: e.distances.clone(),
                }
            })
            .collect();
        let jaccard = counts.jaccard();
        Ok(ImageEval {
            tau,
            image_width: self.image_width,
            image_height: self.image_height,
            counts,
            jaccard: jaccard.unwrap_or(1.0),
            vacuous: jaccard.is_none(),
            classes,
            reprojection: self.reprojection(),
        })
    }
}

/// Confusion rule for one class. A predicted, annotated element that misses
/// the threshold is a single false positive, not also a false negative.
fn classify(annotated: bool, predicted: bool, distances: &[f64], tau: f64) -> Verdict {
    match (annotated, predicted) {
        (true, true) if distances.iter().all(|&d| d < tau) => Verdict::TruePositive,
        (true, true) => Verdict::FalsePositiveInaccurate,
        (false, true) => Verdict::FalsePositiveHallucinated,
        (true, false) => Verdict::FalseNegative,
        (false, false) => unreachable!("unobserved classes are not measured"),
    }
}

/// Scores one image at threshold `tau` (pixels).
pub fn evaluate_image(
    camera: &CameraModel,
    template: &[FieldElement],
    annotation: &ImageAnnotation,
    tau: f64,
    spacing: f64,
) -> Result<ImageEval, MetricError> {
    let sampled = SampledTemplate::new(template, spacing)?;
    ImageMeasurement::new(camera, &sampled, annotation)?.score(tau)
}

/// Reprojection error over classes that are both annotated and predicted.
pub fn reprojection_error(
    camera: &CameraModel,
    template: &[FieldElement],
    annotation: &ImageAnnotation,
    spacing: f64,
) -> Result<ReprojectionError, MetricError> {
    let sampled = SampledTemplate::new(template, spacing)?;
    Ok(ImageMeasurement::new(camera, &sampled, annotation)?.reprojection())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub images: usize,
    pub counts: ConfusionCounts,
    /// Jaccard of the summed counts.
    pub micro_jaccard: f64,
    pub mean_image_jaccard: f64,
    pub mean_reprojection_px: Option<f64>,
    pub median_reprojection_px: Option<f64>,
    pub mean_reprojection_norm: Option<f64>,
}

/// Micro-aggregates per-image evaluations. Order-independent.
pub fn aggregate(evals: &[ImageEval]) -> Result<DatasetSummary, MetricError> {
    if evals.is_empty() {
        return Err(MetricError::EmptyDataset);
    }
    let counts = evals
        .iter()
        .fold(ConfusionCounts::default(), |acc, e| acc + e.counts);
    // Sorting before summation makes the floating-point result independent
    // of the input order.
    let mut jac: Vec<f64> = evals.iter().map(|e| e.jaccard).collect();
    jac.sort_by(f64::total_cmp);
    let mean_image_jaccard = jac.iter().sum::<f64>() / evals.len() as f64;
    let mut px: Vec<f64> = evals.iter().filter_map(|e| e.reprojection.pixels).collect();
    let mut norm: Vec<f64> = evals
        .iter()
        .filter_map(|e| e.reprojection.normalized)
        .collect();
    px.sort_by(f64::total_cmp);
    norm.sort_by(f64::total_cmp);
    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    let median = (!px.is_empty()).then(|| {
        let n = px.len();
        if n % 2 == 1 {
            px[n / 2]
        } else {
            0.5 * (px[n / 2 - 1] + px[n / 2])
        }
    });
    Ok(DatasetSummary {
        images: evals.len(),
        counts,
        micro_jaccard: counts.jaccard().unwrap_or(1.0),
        mean_image_jaccard,
        mean_reprojection_px: mean(&px),
        median_reprojection_px: median,
        mean_reprojection_norm: mean(&norm),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::camera::{Homography, SimplifiedPinhole};
    use crate::field::{build_pitch_template, PitchSpec};
    use nalgebra::{Matrix3, Point3, Vector3};

    fn overhead(pp: (f64, f64)) -> CameraModel {
        // 20 px per meter, looking straight down at the pitch center.
        CameraModel::Pinhole(
            SimplifiedPinhole::new(
                2000.0,
                Point2::new(pp.0, pp.1),
                Matrix3::identity(),
                Vector3::new(0.0, 0.0, 100.0),
            )
            .unwrap(),
        )
    }

    fn template() -> Vec<FieldElement> {
        build_pitch_template(&PitchSpec::default()).unwrap()
    }

    /// Annotates every predicted class by copying projected vertices.
    fn identity_annotation(camera: &CameraModel, w: u32, h: u32) -> ImageAnnotation {
        let sampled = SampledTemplate::new(&template(), DEFAULT_SPACING).unwrap();
        let mut ann = ImageAnnotation::new(w, h);
        for pe in project_template(camera, &sampled, w as f64, h as f64) {
            if pe.predicted {
                let pts: Vec<_> = pe
                    .pieces
                    .iter()
                    .flatten()
                    .filter(|p| inside_image(p, w as f64, h as f64))
                    .copied()
                    .collect();
                ann.elements.insert(pe.class, pts);
            }
        }
        ann
    }

    #[test]
    fn identity_scene_scores_perfectly() {
        let cam = overhead((1100.0, 700.0));
        let ann = identity_annotation(&cam, 2200, 1400);
        assert!(ann.elements.len() >= 20);
        let eval = evaluate_image(&cam, &template(), &ann, 5.0, DEFAULT_SPACING).unwrap();
        assert_eq!(eval.counts.fp(), 0);
        assert_eq!(eval.counts.fn_, 0);
        assert_eq!(eval.jaccard, 1.0);
        assert!(eval.reprojection.pixels.unwrap() < 1e-9);
    }

    #[test]
    fn jaccard_arithmetic() {
        let c = ConfusionCounts {
            tp: 2,
            fp_hallucinated: 1,
            fp_inaccurate: 0,
            fn_: 1,
        };
        assert_eq!(c.jaccard(), Some(0.5));
        assert_eq!(ConfusionCounts::default().jaccard(), None);
    }

    #[test]
    fn threshold_is_strict() {
        // Middle line projects to the vertical line u = 1000.
        let cam = overhead((1000.0, 500.0));
        let ann = ImageAnnotation::new(2000, 1000).with_element(
            SemanticClass::MiddleLine,
            vec![Point2::new(1000.0, 300.0), Point2::new(1005.0, 500.0)],
        );
        let sampled = SampledTemplate::new(&template(), DEFAULT_SPACING).unwrap();
        let m = ImageMeasurement::new(&cam, &sampled, &ann).unwrap();
        let at = m.score(5.0).unwrap();
        assert_eq!(
            at.verdict(SemanticClass::MiddleLine),
            Some(Verdict::FalsePositiveInaccurate)
        );
        assert_eq!(
            at.classes
                .iter()
                .find(|c| c.class == SemanticClass::MiddleLine)
                .unwrap()
                .worst_distance,
            Some(5.0)
        );
        let above = m.score(5.0 + 1e-9).unwrap();
        assert_eq!(
            above.verdict(SemanticClass::MiddleLine),
            Some(Verdict::TruePositive)
        );
        // The denominator does not move with tau.
        assert_eq!(
            at.counts.tp + at.counts.fp() + at.counts.fn_,
            above.counts.tp + above.counts.fp() + above.counts.fn_
        );
    }

    #[test]
    fn goals_are_false_negatives_under_homography() {
        let cam = overhead((1100.0, 700.0));
        let ann = identity_annotation(&cam, 2200, 1400);
        assert!(ann.elements.contains_key(&SemanticClass::GoalLeftCrossbar));
        let h = CameraModel::Homography(cam.ground_homography(false).unwrap());
        let eval = evaluate_image(&h, &template(), &ann, 5.0, DEFAULT_SPACING).unwrap();
        for class in SemanticClass::ALL.iter().filter(|c| c.is_goal()) {
            if ann.elements.contains_key(class) {
                assert_eq!(
                    eval.verdict(*class),
                    Some(Verdict::FalseNegative),
                    "{class}"
                );
            }
        }
        assert_eq!(eval.counts.fp(), 0);
        assert!(eval.counts.fn_ >= 4);
        assert!(eval.reprojection.excluded_points > 0);
    }

    #[test]
    fn hallucinated_and_missing_classes() {
        let cam = overhead((1100.0, 700.0));
        let mut ann = identity_annotation(&cam, 2200, 1400);
        ann.elements.remove(&SemanticClass::MiddleLine);
        let eval = evaluate_image(&cam, &template(), &ann, 5.0, DEFAULT_SPACING).unwrap();
        assert_eq!(
            eval.verdict(SemanticClass::MiddleLine),
            Some(Verdict::FalsePositiveHallucinated)
        );
        // A class the camera cannot see.
        let far = CameraModel::Pinhole(
            SimplifiedPinhole::look_at(
                2000.0,
                Point2::new(960.0, 540.0),
                Point3::new(-60.0, 0.0, 10.0),
                Point3::new(-52.5, 0.0, 0.0),
            )
            .unwrap(),
        );
        let ann = ImageAnnotation::new(1920, 1080)
            .with_element(SemanticClass::SideLineRight, vec![Point2::new(10.0, 10.0)]);
        let eval = evaluate_image(&far, &template(), &ann, 5.0, DEFAULT_SPACING).unwrap();
        assert_eq!(
            eval.verdict(SemanticClass::SideLineRight),
            Some(Verdict::FalseNegative)
        );
    }

    #[test]
    fn empty_image_is_vacuous_success() {
        let h = CameraModel::Homography(
            Homography::new(Matrix3::new(
                1.0, 0.0, 5000.0, 0.0, 1.0, 5000.0, 0.0, 0.0, 1.0,
            ))
            .unwrap(),
        );
        let eval =
            evaluate_image(&h, &template(), &ImageAnnotation::new(100, 100), 5.0, 0.2).unwrap();
        assert!(eval.vacuous);
        assert_eq!(eval.jaccard, 1.0);
        assert_eq!(eval.reprojection.pixels, None);
    }

    #[test]
    fn invalid_inputs() {
        let cam = overhead((1000.0, 500.0));
        assert!(matches!(
            evaluate_image(&cam, &template(), &ImageAnnotation::new(10, 10), 0.0, 0.2),
            Err(MetricError::InvalidTau(_))
        ));
        let partial: Vec<_> = template()
            .into_iter()
            .filter(|e| e.class != SemanticClass::MiddleLine)
            .collect();
        let ann = ImageAnnotation::new(2000, 1000)
            .with_element(SemanticClass::MiddleLine, vec![Point2::new(1.0, 1.0)]);
        assert_eq!(
            evaluate_image(&cam, &partial, &ann, 5.0, 0.2),
            Err(MetricError::ClassNotInTemplate(SemanticClass::MiddleLine))
        );
    }

    #[test]
    fn reprojection_of_shifted_principal_point() {
        // Straight-line annotations; moving the principal point 3 px
        // sideways moves the vertical lines 3 px away.
        let truth = overhead((1000.0, 500.0));
        let ann = ImageAnnotation::new(2000, 1000).with_element(
            SemanticClass::MiddleLine,
            vec![Point2::new(1000.0, 200.0), Point2::new(1000.0, 800.0)],
        );
        let shifted = overhead((1003.0, 500.0));
        let r = reprojection_error(&shifted, &template(), &ann, 0.2).unwrap();
        assert!((r.pixels.unwrap() - 3.0).abs() < 1e-9);
        assert!((r.normalized.unwrap() - 0.003).abs() < 1e-12);
        assert!(
            reprojection_error(&truth, &template(), &ann, 0.2)
                .unwrap()
                .pixels
                .unwrap()
                < 1e-9
        );
    }

    #[test]
    fn reversing_point_order_changes_nothing() {
        let cam = overhead((1100.0, 700.0));
        let ann = identity_annotation(&cam, 2200, 1400);
        let shifted = overhead((1103.0, 702.0));
        let mut rev = ann.clone();
        for pts in rev.elements.values_mut() {
            pts.reverse();
        }
        let a = evaluate_image(&shifted, &template(), &ann, 2.0, 0.2).unwrap();
        let b = evaluate_image(&shifted, &template(), &rev, 2.0, 0.2).unwrap();
        assert_eq!(a.counts, b.counts);
        let (pa, pb) = (
            a.reprojection.pixels.unwrap(),
            b.reprojection.pixels.unwrap(),
        );
        assert!((pa - pb).abs() <= 1e-12 * pa);
    }

    fn eval_with(counts: ConfusionCounts, jaccard: f64, px: Option<f64>) -> ImageEval {
        ImageEval {
            tau: 5.0,
            image_width: 100,
            image_height: 100,
            counts,
            jaccard,
            vacuous: false,
            classes: vec![],
            reprojection: ReprojectionError {
                pixels: px,
                normalized: px.map(|p| p / 100.0),
                used_points: 1,
                excluded_points: 0,
            },
        }
    }

    #[test]
    fn aggregation() {
        let a = eval_with(
            ConfusionCounts {
                tp: 1,
                ..Default::default()
            },
            1.0,
            Some(1.0),
        );
        let b = eval_with(
            ConfusionCounts {
                fp_inaccurate: 1,
                fn_: 1,
                ..Default::default()
            },
            0.0,
            Some(3.0),
        );
        let s = aggregate(&[a.clone(), b.clone()]).unwrap();
        assert!((s.micro_jaccard - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.mean_image_jaccard, 0.5);
        assert_eq!(s.mean_reprojection_px, Some(2.0));
        assert_eq!(s.median_reprojection_px, Some(2.0));
        let swapped = aggregate(&[b, a.clone()]).unwrap();
        assert_eq!(s, swapped);
        let single = aggregate(std::slice::from_ref(&a)).unwrap();
        assert_eq!(single.micro_jaccard, a.jaccard);
        assert_eq!(single.mean_reprojection_px, a.reprojection.pixels);
        assert_eq!(aggregate(&[]), Err(MetricError::EmptyDataset));
    }
}
