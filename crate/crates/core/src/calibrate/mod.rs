//! Baseline calibration: normalized DLT for homographies, a closed-form
//! pinhole seed from a homography, and Levenberg–Marquardt refinement of
//! either model against semantic annotations.

mod dlt;
mod init;
pub mod lm;
mod refine;

use thiserror::Error;

pub use dlt::{dlt_homography, line_intersection_correspondences, Correspondence};
pub use init::init_pinhole_from_homography;
pub use lm::{FitReport, Iteration, LmConfig, Termination};
pub use refine::{
    fitted_classes, refine_camera, refine_homography, FitParam, HomographyProblem, PinholeProblem,
    RefineOptions, MIN_SEED_POINTS,
};

use crate::camera::{CameraError, CameraModel, PinholeRadial};
use crate::metrics::MetricError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalibrateError {
    #[error("need at least 4 correspondences, got {0}")]
    TooFewCorrespondences(usize),
    #[error("correspondence {0} is non-finite or has a negative weight")]
    InvalidCorrespondence(usize),
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("initialization failed: {0}")]
    Initialization(String),
    #[error("under-determined fit: {points} annotated points for {parameters} parameters")]
    UnderDetermined { points: usize, parameters: usize },
    #[error("invalid seed: {0}")]
    InvalidSeed(String),
    #[error(transparent)]
    Camera(#[from] CameraError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Turns any camera into a pinhole seed. Homographies go through
/// [`init_pinhole_from_homography`] and start without distortion.
pub fn pinhole_seed(
    seed: &CameraModel,
    image_size: (u32, u32),
) -> Result<PinholeRadial, CalibrateError> {
    match seed {
        CameraModel::Homography(h) => Ok(PinholeRadial::new(
            init_pinhole_from_homography(h, image_size)?,
            0.0,
            0.0,
        )?),
        other => Ok(other.as_pinhole_radial().expect("pinhole variants convert")),
    }
}
