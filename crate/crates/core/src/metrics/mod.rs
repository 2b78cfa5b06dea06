//! Calibration quality metrics: the thresholded Jaccard index over semantic
//! annotations, plus reprojection error, projection error and the
//! ground-plane IoU metrics used by older benchmarks.

mod annotation;
mod jaccard;
mod legacy;

use thiserror::Error;

pub use annotation::{AnnotationError, ImageAnnotation, OUT_OF_FRAME_TOLERANCE};
pub use jaccard::{
    aggregate, evaluate_image, inside_image, project_template, reprojection_error, ClassVerdict,
    ConfusionCounts, DatasetSummary, ImageEval, ImageMeasurement, ProjectedElement,
    ReprojectionError, Verdict, DEFAULT_SPACING,
};
pub use legacy::{iou_part, iou_whole, projection_error, ProjectionErrorReport};

use crate::camera::CameraError;
use crate::field::{FieldError, SemanticClass};
use crate::geometry::GeometryError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("tau must be positive and finite, got {0}")]
    InvalidTau(f64),
    #[error("annotated class {0} is not part of the template")]
    ClassNotInTemplate(SemanticClass),
    #[error("invalid annotation: {0}")]
    Annotation(#[from] AnnotationError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Camera(#[from] CameraError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("cannot aggregate an empty dataset")]
    EmptyDataset,
    #[error("metric undefined: {0}")]
    Undefined(&'static str),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),
}
