use std::collections::BTreeMap;

use nalgebra::Point2;
use thiserror::Error;

use crate::field::SemanticClass;

/// Fraction of each image dimension an annotated point may stray outside the
/// frame.
pub const OUT_OF_FRAME_TOLERANCE: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnnotationError {
    #[error("image size must be positive, got {0}x{1}")]
    InvalidImageSize(u32, u32),
    #[error("class {0} has no annotated points")]
    EmptyClass(SemanticClass),
    #[error("class {class}: point {index} has a non-finite coordinate")]
    NonFinite { class: SemanticClass, index: usize },
    #[error("class {class}: point {index} ({x}, {y}) lies more than 5% outside the image")]
    OutOfFrame {
        class: SemanticClass,
        index: usize,
        x: f64,
        y: f64,
    },
}

/// Semantic polyline annotations of one image: for each labelled class, the
/// ordered pixel points an annotator clicked along it.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageAnnotation {
    pub image_width: u32,
    pub image_height: u32,
    pub elements: BTreeMap<SemanticClass, Vec<Point2<f64>>>,
}

impl ImageAnnotation {
    pub fn new(image_width: u32, image_height: u32) -> Self {
        Self {
            image_width,
            image_height,
            elements: BTreeMap::new(),
        }
    }

    pub fn with_element(mut self, class: SemanticClass, points: Vec<Point2<f64>>) -> Self {
        self.elements.insert(class, points);
        self
    }

    pub fn size(&self) -> (f64, f64) {
        (self.image_width as f64, self.image_height as f64)
    }

    pub fn point_count(&self) -> usize {
        self.elements.values().map(Vec::len).sum()
    }

    pub fn validate(&self) -> Result<(), AnnotationError> {
        if self.image_width == 0 || self.image_height == 0 {
            return Err(AnnotationError::InvalidImageSize(
                self.image_width,
                self.image_height,
            ));
        }
        let (w, h) = self.size();
        let (mx, my) = (w * OUT_OF_FRAME_TOLERANCE, h * OUT_OF_FRAME_TOLERANCE);
        for (&class, points) in &self.elements {
            if points.is_empty() {
                return Err(AnnotationError::EmptyClass(class));
            }
            for (index, p) in points.iter().enumerate() {
                if !(p.x.is_finite() && p.y.is_finite()) {
                    return Err(AnnotationError::NonFinite { class, index });
                }
                if p.x < -mx || p.x > w + mx || p.y < -my || p.y > h + my {
                    return Err(AnnotationError::OutOfFrame {
                        class,
                        index,
                        x: p.x,
                        y: p.y,
                    });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_band() {
        let ok = ImageAnnotation::new(1000, 500).with_element(
            SemanticClass::MiddleLine,
            vec![Point2::new(-49.0, 10.0), Point2::new(1049.0, 524.0)],
        );
        assert!(ok.validate().is_ok());
        let bad = ImageAnnotation::new(1000, 500)
            .with_element(SemanticClass::MiddleLine, vec![Point2::new(1051.0, 10.0)]);
        assert!(matches!(
            bad.validate(),
            Err(AnnotationError::OutOfFrame { index: 0, .. })
        ));
    }

    #[test]
    fn rejects_empty_and_non_finite() {
        let empty = ImageAnnotation::new(10, 10).with_element(SemanticClass::MiddleLine, vec![]);
        assert!(matches!(
            empty.validate(),
            Err(AnnotationError::EmptyClass(_))
        ));
        let nan = ImageAnnotation::new(10, 10)
            .with_element(SemanticClass::MiddleLine, vec![Point2::new(f64::NAN, 1.0)]);
        assert!(matches!(
            nan.validate(),
            Err(AnnotationError::NonFinite { .. })
        ));
        assert!(ImageAnnotation::new(0, 10).validate().is_err());
    }
}
