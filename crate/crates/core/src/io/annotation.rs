use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Point2;
use serde_json::Value;

use super::{read_text, with_path, write_text, FormatError, IoError};
use crate::field::{FieldError, SemanticClass};
use crate::metrics::ImageAnnotation;

fn schema(msg: impl Into<String>) -> FormatError {
    FormatError::Schema(msg.into())
}

fn check_keys(
    obj: &serde_json::Map<String, Value>,
    allowed: &[&str],
    what: &str,
) -> Result<(), FormatError> {
    for k in obj.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(schema(format!("unexpected key {k:?} in {what}")));
        }
    }
    for k in allowed {
        if !obj.contains_key(*k) {
            return Err(schema(format!("missing key {k:?} in {what}")));
        }
    }
    Ok(())
}

fn dimension(v: &Value, name: &str) -> Result<u32, FormatError> {
    v.as_u64()
        .filter(|&d| d > 0 && d <= u32::MAX as u64)
        .map(|d| d as u32)
        .ok_or_else(|| schema(format!("{name} must be a positive integer")))
}

fn coordinate(v: &Value, what: &str) -> Result<f64, FormatError> {
    v.as_f64()
        .filter(|c| c.is_finite())
        .ok_or_else(|| schema(format!("{what} must be a finite number")))
}

pub fn parse_annotation(text: &str) -> Result<ImageAnnotation, FormatError> {
    let root: Value = serde_json::from_str(text)?;
    let obj = root
        .as_object()
        .ok_or_else(|| schema("annotation must be a JSON object"))?;
    check_keys(
        obj,
        &["elements", "image_height", "image_width"],
        "annotation",
    )?;
    let mut ann = ImageAnnotation::new(
        dimension(&obj["image_width"], "image_width")?,
        dimension(&obj["image_height"], "image_height")?,
    );
    let elements = obj["elements"]
        .as_object()
        .ok_or_else(|| schema("elements must be an object"))?;
    for (label, points) in elements {
        let class: SemanticClass = label.parse().map_err(|e| match e {
            FieldError::UnknownClass { name, valid } => FormatError::UnknownClass { name, valid },
            other => schema(other.to_string()),
        })?;
        let list = points
            .as_array()
            .ok_or_else(|| schema(format!("{label}: points must be an array")))?;
        if list.is_empty() {
            return Err(schema(format!("{label}: point list is empty")));
        }
        let mut pts = Vec::with_capacity(list.len());
        for (i, p) in list.iter().enumerate() {
            let po = p
                .as_object()
                .ok_or_else(|| schema(format!("{label}[{i}] must be an object")))?;
            let what = format!("{label}[{i}]");
            check_keys(po, &["x", "y"], &what)?;
            pts.push(Point2::new(
                coordinate(&po["x"], &format!("{what}.x"))?,
                coordinate(&po["y"], &format!("{what}.y"))?,
            ));
        }
        ann.elements.insert(class, pts);
    }
    Ok(ann)
}

fn fixed6(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

/// Canonical text: sorted keys, two-space indentation, six decimals.
pub fn annotation_to_string(ann: &ImageAnnotation) -> String {
    let mut entries: Vec<(&str, &Vec<Point2<f64>>)> =
        ann.elements.iter().map(|(c, p)| (c.label(), p)).collect();
    entries.sort_by(|a, b| a.0.cmp(b.0));
    let mut s = String::from("{\n  \"elements\": {");
    for (k, (label, points)) in entries.iter().enumerate() {
        s.push_str(if k == 0 { "\n" } else { ",\n" });
        let key = serde_json::to_string(label).expect("strings serialize");
        let _ = write!(s, "    {key}: [");
        for (i, p) in points.iter().enumerate() {
            s.push_str(if i == 0 { "\n" } else { ",\n" });
            let _ = write!(
                s,
                "      {{\"x\": {}, \"y\": {}}}",
                fixed6(p.x),
                fixed6(p.y)
            );
        }
        s.push_str("\n    ]");
    }
    if !entries.is_empty() {
        s.push_str("\n  ");
    }
    let _ = write!(
        s,
        "}},\n  \"image_height\": {},\n  \"image_width\": {}\n}}\n",
        ann.image_height, ann.image_width
    );
    s
}

pub fn read_annotation(path: &Path) -> Result<ImageAnnotation, IoError> {
    let text = read_text(path)?;
    with_path(path, parse_annotation(&text))
}

pub fn write_annotation(ann: &ImageAnnotation, path: &Path) -> Result<(), IoError> {
    write_text(path, &annotation_to_string(ann))
}
