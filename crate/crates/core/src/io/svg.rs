//! Evaluation overlays: projected template colored by verdict on top of the
//! annotated points.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Point2;

use super::{write_text, IoError};
use crate::camera::CameraModel;
use crate::field::SampledTemplate;
use crate::metrics::{project_template, ImageAnnotation, ImageEval, Verdict};

const GREEN: &str = "#1a9850";
const ORANGE: &str = "#f28e2b";
const RED: &str = "#d73027";
const GRAY: &str = "#7f7f7f";

fn color(v: Option<Verdict>) -> &'static str {
    match v {
        Some(Verdict::TruePositive) => GREEN,
        Some(Verdict::FalsePositiveInaccurate | Verdict::FalsePositiveHallucinated) => ORANGE,
        Some(Verdict::FalseNegative) => RED,
        None => GRAY,
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn points_attr(pts: &[Point2<f64>]) -> String {
    pts.iter()
        .map(|p| format!("{:.2},{:.2}", p.x, p.y))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Coordinates this far outside the frame are dropped from polylines to keep
/// the document small; the frame itself is clipped by the viewport.
fn near_frame(p: &Point2<f64>, w: f64, h: f64) -> bool {
    let m = 4.0 * w.max(h);
    p.x > -m && p.x < w + m && p.y > -m && p.y < h + m
}

/// SVG 1.1 document the size of the image. Projected elements are drawn as
/// polylines colored by verdict (true positive green, false positive
/// orange); false negatives are red dashed polylines through the annotated
/// points. Annotated points are circles of radius τ/2.
pub fn render_overlay(
    camera: &CameraModel,
    template: &SampledTemplate,
    annotation: &ImageAnnotation,
    eval: &ImageEval,
) -> String {
    let (w, h) = annotation.size();
    let stroke = (h / 400.0).max(1.0);
    let mut s = String::new();
    let _ = writeln!(s, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">"
    );
    let _ = writeln!(
        s,
        "<rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"#202020\"/>"
    );

    let _ = writeln!(
        s,
        "<g id=\"elements\" fill=\"none\" stroke-width=\"{stroke:.2}\">"
    );
    for pe in project_template(camera, template, w, h) {
        let verdict = eval.verdict(pe.class);
        if verdict.is_none() || verdict == Some(Verdict::FalseNegative) {
            continue;
        }
        for piece in &pe.pieces {
            let pts: Vec<_> = piece
                .iter()
                .copied()
                .filter(|p| near_frame(p, w, h))
                .collect();
            if pts.len() < 2 {
                continue;
            }
            let _ = writeln!(
                s,
                "<polyline class=\"projection\" stroke=\"{}\" points=\"{}\"><title>{}</title></polyline>",
                color(verdict),
                points_attr(&pts),
                escape(pe.class.label())
            );
        }
    }
    for (class, pts) in &annotation.elements {
        if eval.verdict(*class) == Some(Verdict::FalseNegative) && pts.len() >= 2 {
            let _ = writeln!(
                s,
                "<polyline class=\"missed\" stroke=\"{RED}\" stroke-dasharray=\"{0:.1},{0:.1}\" points=\"{1}\"><title>{2}</title></polyline>",
                4.0 * stroke,
                points_attr(pts),
                escape(class.label())
            );
        }
    }
    let _ = writeln!(s, "</g>");

    let radius = eval.tau / 2.0;
    let _ = writeln!(s, "<g id=\"annotations\" fill=\"none\" stroke-width=\"1\">");
    for (class, pts) in &annotation.elements {
        let c = color(eval.verdict(*class));
        for p in pts {
            let _ = writeln!(
                s,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{radius}\" stroke=\"{c}\"/>",
                p.x, p.y
            );
        }
    }
    let _ = writeln!(s, "</g>");

    let font = (h / 40.0).max(10.0);
    let line = font * 1.4;
    let _ = writeln!(
        s,
        "<g id=\"legend\" font-family=\"sans-serif\" font-size=\"{font:.1}\">"
    );
    let _ = writeln!(
        s,
        "<rect x=\"{0:.1}\" y=\"{0:.1}\" width=\"{1:.1}\" height=\"{2:.1}\" fill=\"#000000\" fill-opacity=\"0.6\"/>",
        font * 0.5,
        font * 14.0,
        line * 4.6
    );
    let entries = [
        (GREEN, "true positive", false),
        (ORANGE, "false positive", false),
        (RED, "false negative", true),
    ];
    for (i, (c, label, dashed)) in entries.iter().enumerate() {
        let y = font * 0.5 + line * (i as f64 + 1.0);
        let dash = if *dashed {
            " stroke-dasharray=\"6,4\""
        } else {
            ""
        };
        let _ = writeln!(
            s,
            "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"{c}\" stroke-width=\"3\"{dash}/>",
            font,
            font * 3.0
        );
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"#ffffff\">{label}</text>",
            font * 3.5,
            y + font * 0.35
        );
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"#ffffff\">tau = {} px, JaC = {:.3}</text>",
        font,
        font * 0.5 + line * 4.2,
        eval.tau,
        eval.jaccard
    );
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    s
}

pub fn write_overlay(
    path: &Path,
    camera: &CameraModel,
    template: &SampledTemplate,
    annotation: &ImageAnnotation,
    eval: &ImageEval,
) -> Result<(), IoError> {
    write_text(path, &render_overlay(camera, template, annotation, eval))
}
