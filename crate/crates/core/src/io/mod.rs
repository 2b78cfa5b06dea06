//! File formats: annotations, camera parameters, legacy homography text
//! files, evaluation reports and SVG overlays.
//!
//! Every JSON document written here has its object keys in sorted order.
//! Readers reject malformed input instead of repairing it.

mod annotation;
mod camera;
mod legacy;
mod report;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

pub use annotation::{annotation_to_string, parse_annotation, read_annotation, write_annotation};
pub use camera::{camera_to_string, parse_camera, read_camera, write_camera};
pub use legacy::{
    legacy_homography_to_string, parse_legacy_homography, read_legacy_homography,
    sanity_check_homography, write_legacy_homography, LegacyConvention, YARD,
};
pub use report::{dataset_csv, image_report_json, CSV_HEADER};
pub use svg::{render_overlay, write_overlay};

use crate::camera::CameraError;
use crate::field::PitchSpec;

/// A problem with the content of a document, independent of where it came
/// from.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormatError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("unknown class {name:?}; valid labels are: {valid}")]
    UnknownClass { name: String, valid: String },
    #[error("legacy homography: {0}")]
    Legacy(String),
    #[error(transparent)]
    Camera(#[from] CameraError),
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        if e.is_data() {
            FormatError::Schema(e.to_string())
        } else {
            FormatError::Json {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Format { path: PathBuf, source: FormatError },
}

pub(crate) fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn with_path<T>(path: &Path, r: Result<T, FormatError>) -> Result<T, IoError> {
    r.map_err(|source| IoError::Format {
        path: path.to_path_buf(),
        source,
    })
}

fn sort_keys(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut entries: Vec<(String, Value)> = m.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Map::new();
            for (k, v) in entries {
                out.insert(k, sort_keys(v));
            }
            Value::Object(out)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(sort_keys).collect()),
        other => other,
    }
}

/// Pretty-printed JSON with sorted keys and a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String, FormatError> {
    let v = sort_keys(serde_json::to_value(value)?);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let text = with_path(path, to_canonical_json(value))?;
    write_text(path, &text)
}

/// Pitch dimensions from JSON; omitted fields take their defaults.
pub fn read_pitch_spec(path: &Path) -> Result<PitchSpec, IoError> {
    let text = read_text(path)?;
    let spec: PitchSpec = with_path(path, serde_json::from_str(&text).map_err(FormatError::from))?;
    with_path(
        path,
        spec.validate()
            .map_err(|e| FormatError::Schema(e.to_string())),
    )?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_json_sorts_nested_keys() {
        let v = serde_json::json!({"b": 1, "a": {"z": 1, "y": [{"d": 0, "c": 0}]}});
        let s = to_canonical_json(&v).unwrap();
        let order: Vec<usize> = ["\"a\"", "\"y\"", "\"c\"", "\"d\"", "\"z\"", "\"b\""]
            .iter()
            .map(|k| s.find(k).unwrap())
            .collect();
        assert!(order.windows(2).all(|w| w[0] < w[1]), "{s}");
    }

    #[test]
    fn pitch_spec_defaults_and_rejects_unknown_fields() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("pitch.json");
        write_text(&p, r#"{"length": 100.0}"#).unwrap();
        let spec = read_pitch_spec(&p).unwrap();
        assert_eq!(spec.length, 100.0);
        assert_eq!(spec.width, 68.0);
        write_text(&p, r#"{"lenght": 100.0}"#).unwrap();
        assert!(read_pitch_spec(&p).is_err());
        write_text(&p, r#"{"width": 200.0}"#).unwrap();
        assert!(read_pitch_spec(&p).is_err());
    }

    #[test]
    fn json_errors_carry_positions() {
        let e: FormatError = serde_json::from_str::<Value>("{\n  \"a\": ,\n}")
            .unwrap_err()
            .into();
        assert!(matches!(e, FormatError::Json { line: 2, .. }), "{e:?}");
    }
}
