//! Plain-text 3×3 homographies as shipped by older field-registration
//! datasets. Which way the matrix maps, and in which units and frame, is not
//! recorded in the files, so the caller must state it.

use std::path::Path;
use std::str::FromStr;

use nalgebra::{Matrix3, Point3};
use serde::{Deserialize, Serialize};

use super::{read_text, with_path, write_text, FormatError, IoError};
use crate::camera::{CameraModel, Homography};
use crate::field::PitchSpec;
use crate::metrics::inside_image;

/// Meters per yard.
pub const YARD: f64 = 0.9144;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LegacyConvention {
    /// Pixels to yards, origin at the top-left pitch corner (X = −L/2,
    /// Y = +W/2), second axis pointing from the top side line toward the
    /// bottom one.
    PixelsToYardsCorner,
    /// Center-origin meters to pixels: this toolkit's own convention.
    MetersToPixelsCenter,
    /// The world-to-pixel homography is `post · file · pre`.
    Custom {
        pre: [[f64; 3]; 3],
        post: [[f64; 3]; 3],
    },
}

impl FromStr for LegacyConvention {
    type Err = FormatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pixels_to_yards_corner" => Ok(Self::PixelsToYardsCorner),
            "meters_to_pixels_center" => Ok(Self::MetersToPixelsCenter),
            other => Err(FormatError::Legacy(format!(
                "unknown convention {other:?}; expected pixels_to_yards_corner, meters_to_pixels_center or a custom pre/post document"
            ))),
        }
    }
}

fn matrix(r: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| r[i][j])
}

/// Center-origin meters to corner-origin yards.
fn meters_to_corner_yards(spec: &PitchSpec) -> Matrix3<f64> {
    Matrix3::new(
        1.0 / YARD,
        0.0,
        spec.length / 2.0 / YARD,
        0.0,
        -1.0 / YARD,
        spec.width / 2.0 / YARD,
        0.0,
        0.0,
        1.0,
    )
}

fn invert(m: &Matrix3<f64>, what: &str) -> Result<Matrix3<f64>, FormatError> {
    m.try_inverse()
        .ok_or_else(|| FormatError::Legacy(format!("{what} is not invertible")))
}

impl LegacyConvention {
    /// World-to-pixel matrix from the file's matrix.
    fn to_world(&self, file: &Matrix3<f64>, spec: &PitchSpec) -> Result<Matrix3<f64>, FormatError> {
        Ok(match self {
            Self::MetersToPixelsCenter => *file,
            Self::PixelsToYardsCorner => {
                invert(file, "file matrix")? * meters_to_corner_yards(spec)
            }
            Self::Custom { pre, post } => matrix(post) * file * matrix(pre),
        })
    }

    /// File matrix from a world-to-pixel matrix.
    fn to_file(&self, world: &Matrix3<f64>, spec: &PitchSpec) -> Result<Matrix3<f64>, FormatError> {
        Ok(match self {
            Self::MetersToPixelsCenter => *world,
            Self::PixelsToYardsCorner => {
                meters_to_corner_yards(spec) * invert(world, "homography")?
            }
            Self::Custom { pre, post } => {
                invert(&matrix(post), "post matrix")? * world * invert(&matrix(pre), "pre matrix")?
            }
        })
    }
}

pub fn parse_legacy_homography(
    text: &str,
    convention: &LegacyConvention,
    spec: &PitchSpec,
) -> Result<Homography, FormatError> {
    let values = text
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| FormatError::Legacy(format!("{t:?} is not a finite number")))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    if values.len() != 9 {
        return Err(FormatError::Legacy(format!(
            "expected 9 numbers, found {}",
            values.len()
        )));
    }
    let file = Matrix3::from_row_slice(&values);
    Ok(Homography::new(convention.to_world(&file, spec)?)?)
}

/// Three lines of three numbers, each printed so that it parses back to the
/// same value.
pub fn legacy_homography_to_string(
    h: &Homography,
    convention: &LegacyConvention,
    spec: &PitchSpec,
) -> Result<String, FormatError> {
    let m = convention.to_file(h.matrix(), spec)?;
    let mut s = String::new();
    for i in 0..3 {
        let row: Vec<String> = (0..3).map(|j| format!("{:e}", m[(i, j)])).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    Ok(s)
}

pub fn read_legacy_homography(
    path: &Path,
    convention: &LegacyConvention,
    spec: &PitchSpec,
) -> Result<Homography, IoError> {
    let text = read_text(path)?;
    with_path(path, parse_legacy_homography(&text, convention, spec))
}

pub fn write_legacy_homography(
    h: &Homography,
    path: &Path,
    convention: &LegacyConvention,
    spec: &PitchSpec,
) -> Result<(), IoError> {
    let text = with_path(path, legacy_homography_to_string(h, convention, spec))?;
    write_text(path, &text)
}

/// Plausibility warnings for a homography read under some convention. A
/// calibrated broadcast view shows part of the pitch, so a matrix that sends
/// no point of an 11×7 grid over the pitch into the image (once oriented for
/// that image) was most likely read with the wrong convention.
pub fn sanity_check_homography(
    h: &Homography,
    image_size: (u32, u32),
    spec: &PitchSpec,
) -> Vec<String> {
    let (w, hgt) = (image_size.0 as f64, image_size.1 as f64);
    let mut warnings = Vec::new();
    let model = CameraModel::Homography(h.oriented_for_image(image_size));
    let visible = (0..=10)
        .flat_map(|i| (0..=6).map(move |j| (i, j)))
        .filter_map(|(i, j)| {
            let x = spec.length * (i as f64 / 10.0 - 0.5);
            let y = spec.width * (j as f64 / 6.0 - 0.5);
            model.project(&Point3::new(x, y, 0.0)).point()
        })
        .filter(|p| inside_image(p, w, hgt))
        .count();
    if visible == 0 {
        warnings.push("no pitch grid point projects into the image".to_string());
    }
    warnings
}
