//! Benchmarking toolkit for sports-field camera calibration.
//!
//! The crate builds a 3D soccer pitch template, projects it through
//! interchangeable camera models, and scores calibrations against semantic
//! polyline annotations with a thresholded Jaccard index (plus the older
//! reprojection, projection-error and IoU metrics). Baseline fitters and a
//! synthetic scene generator make every metric testable against known truth.

pub mod calibrate;
pub mod camera;
pub mod field;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod synth;

pub use camera::{
    CameraError, CameraModel, Homography, PinholeRadial, Projection, SimplifiedPinhole,
};
pub use field::{build_pitch_template, FieldElement, PitchSpec, SampledTemplate, SemanticClass};
