use std::path::Path;

use nalgebra::{Matrix3, Point2, Vector3};
use serde::{Deserialize, Serialize};

use super::{read_text, to_canonical_json, with_path, write_text, FormatError, IoError};
use crate::camera::{CameraModel, Homography, PinholeRadial, SimplifiedPinhole};

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
enum CameraFile {
    Homography(HomographyFile),
    Pinhole(PinholeFile),
    PinholeRadial(PinholeRadialFile),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HomographyFile {
    /// Row-major, world ground meters to pixels.
    h: [f64; 9],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PinholeFile {
    focal: f64,
    principal_point: [f64; 2],
    /// Row-major, world to camera.
    rotation: [f64; 9],
    translation: [f64; 3],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PinholeRadialFile {
    focal: f64,
    principal_point: [f64; 2],
    rotation: [f64; 9],
    translation: [f64; 3],
    k1: f64,
    k2: f64,
}

fn row_major(m: &Matrix3<f64>) -> [f64; 9] {
    std::array::from_fn(|k| m[(k / 3, k % 3)])
}

fn matrix(r: &[f64; 9]) -> Matrix3<f64> {
    Matrix3::from_row_slice(r)
}

fn pinhole_file(c: &SimplifiedPinhole) -> PinholeFile {
    PinholeFile {
        focal: c.focal,
        principal_point: [c.principal_point.x, c.principal_point.y],
        rotation: row_major(&c.rotation),
        translation: c.translation.into(),
    }
}

fn pinhole(
    focal: f64,
    pp: [f64; 2],
    rotation: &[f64; 9],
    translation: [f64; 3],
) -> Result<SimplifiedPinhole, FormatError> {
    Ok(SimplifiedPinhole::new(
        focal,
        Point2::new(pp[0], pp[1]),
        matrix(rotation),
        Vector3::from(translation),
    )?)
}

pub fn parse_camera(text: &str) -> Result<CameraModel, FormatError> {
    let file: CameraFile = serde_json::from_str(text)?;
    Ok(match file {
        CameraFile::Homography(h) => CameraModel::Homography(Homography::new(matrix(&h.h))?),
        CameraFile::Pinhole(p) => CameraModel::Pinhole(pinhole(
            p.focal,
            p.principal_point,
            &p.rotation,
            p.translation,
        )?),
        CameraFile::PinholeRadial(p) => CameraModel::PinholeRadial(PinholeRadial::new(
            pinhole(p.focal, p.principal_point, &p.rotation, p.translation)?,
            p.k1,
            p.k2,
        )?),
    })
}

/// Full-precision JSON for any camera model.
pub fn camera_to_string(camera: &CameraModel) -> String {
    let file = match camera {
        CameraModel::Homography(h) => CameraFile::Homography(HomographyFile {
            h: row_major(h.matrix()),
        }),
        CameraModel::Pinhole(c) => CameraFile::Pinhole(pinhole_file(c)),
        CameraModel::PinholeRadial(c) => {
            let p = pinhole_file(&c.base);
            CameraFile::PinholeRadial(PinholeRadialFile {
                focal: p.focal,
                principal_point: p.principal_point,
                rotation: p.rotation,
                translation: p.translation,
                k1: c.k1,
                k2: c.k2,
            })
        }
    };
    to_canonical_json(&file).expect("camera parameters are finite")
}

pub fn read_camera(path: &Path) -> Result<CameraModel, IoError> {
    let text = read_text(path)?;
    with_path(path, parse_camera(&text))
}

pub fn write_camera(camera: &CameraModel, path: &Path) -> Result<(), IoError> {
    write_text(path, &camera_to_string(camera))
}
