use serde::Serialize;

use super::{to_canonical_json, FormatError};
use crate::metrics::ImageEval;

pub const CSV_HEADER: [&str; 8] = [
    "image_id",
    "tp",
    "fp_halluc",
    "fp_inacc",
    "fn",
    "jaccard",
    "reproj_px",
    "reproj_norm",
];

#[derive(Serialize)]
struct ImageReport<'a> {
    image_id: &'a str,
    evaluations: &'a [ImageEval],
}

/// Per-image document: counts, per-class verdicts and distances for every
/// threshold evaluated.
pub fn image_report_json(image_id: &str, evals: &[ImageEval]) -> Result<String, FormatError> {
    to_canonical_json(&ImageReport {
        image_id,
        evaluations: evals,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per image for a single threshold. Missing reprojection values
/// (nothing annotated and predicted) are left empty.
pub fn dataset_csv<'a, I>(rows: I) -> Result<String, FormatError>
where
    I: IntoIterator<Item = (&'a str, &'a ImageEval)>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| FormatError::Schema(e.to_string());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for (id, e) in rows {
        w.write_record([
            id.to_string(),
            e.counts.tp.to_string(),
            e.counts.fp_hallucinated.to_string(),
            e.counts.fp_inaccurate.to_string(),
            e.counts.fn_.to_string(),
            e.jaccard.to_string(),
            opt(e.reprojection.pixels),
            opt(e.reprojection.normalized),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| FormatError::Schema(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{ConfusionCounts, ReprojectionError};

    fn eval() -> ImageEval {
        ImageEval {
            tau: 5.0,
            image_width: 1920,
            image_height: 1080,
            counts: ConfusionCounts {
                tp: 3,
                fp_hallucinated: 1,
                fp_inaccurate: 0,
                fn_: 1,
            },
            jaccard: 0.6,
            vacuous: false,
            classes: Vec::new(),
            reprojection: ReprojectionError {
                pixels: Some(1.5),
                normalized: Some(1.5 / 1080.0),
                used_points: 10,
                excluded_points: 2,
            },
        }
    }

    #[test]
    fn csv_layout() {
        let e = eval();
        let vacuous = ImageEval {
            reprojection: ReprojectionError::default(),
            ..eval()
        };
        let text = dataset_csv([("a,b", &e), ("c", &vacuous)]).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "image_id,tp,fp_halluc,fp_inacc,fn,jaccard,reproj_px,reproj_norm"
        );
        assert!(lines[1].starts_with("\"a,b\",3,1,0,1,0.6,1.5,"));
        assert_eq!(lines[2], "c,3,1,0,1,0.6,,");
    }

    #[test]
    fn image_report_has_sorted_keys() {
        let text = image_report_json("x", &[eval()]).unwrap();
        assert!(text.find("\"evaluations\"").unwrap() < text.find("\"image_id\"").unwrap());
        assert!(text.contains("\"fn\": 1"));
    }
}
