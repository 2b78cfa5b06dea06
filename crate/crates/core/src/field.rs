//! Soccer pitch template: the semantic field elements and their world geometry.
//!
//! World frame: origin at the pitch center, X along the pitch length (the
//! "left" goal sits at negative X), Y along the width (the "top" side line
//! sits at positive Y), Z up. All ground markings lie on Z = 0.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("invalid pitch spec: {0}")]
    InvalidSpec(String),
    #[error("unknown semantic class {name:?}; valid labels are: {valid}")]
    UnknownClass { name: String, valid: String },
    #[error("sampling spacing must be positive, got {0}")]
    InvalidSpacing(f64),
}

/// Pitch dimensions in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PitchSpec {
    pub length: f64,
    pub width: f64,
    pub circle_radius: f64,
    pub penalty_area_length: f64,
    pub penalty_area_width: f64,
    pub goal_area_length: f64,
    pub goal_area_width: f64,
    pub penalty_mark_distance: f64,
    pub goal_width: f64,
    pub goal_height: f64,
}

impl Default for PitchSpec {
    fn default() -> Self {
        Self {
            length: 105.0,
            width: 68.0,
            circle_radius: 9.15,
            penalty_area_length: 16.5,
            penalty_area_width: 40.32,
            goal_area_length: 5.5,
            goal_area_width: 18.32,
            penalty_mark_distance: 11.0,
            goal_width: 7.32,
            goal_height: 2.44,
        }
    }
}

impl PitchSpec {
    pub fn validate(&self) -> Result<(), FieldError> {
        let fields = [
            ("length", self.length),
            ("width", self.width),
            ("circle_radius", self.circle_radius),
            ("penalty_area_length", self.penalty_area_length),
            ("penalty_area_width", self.penalty_area_width),
            ("goal_area_length", self.goal_area_length),
            ("goal_area_width", self.goal_area_width),
            ("penalty_mark_distance", self.penalty_mark_distance),
            ("goal_width", self.goal_width),
            ("goal_height", self.goal_height),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(FieldError::InvalidSpec(format!(
                    "{name} must be strictly positive and finite, got {value}"
                )));
            }
        }
        let checks = [
            (self.length > self.width, "length > width"),
            (
                self.penalty_area_width < self.width,
                "penalty_area_width < width",
            ),
            (
                self.goal_area_length < self.penalty_area_length,
                "goal_area_length < penalty_area_length",
            ),
            (
                self.goal_width < self.goal_area_width,
                "goal_width < goal_area_width",
            ),
            (
                self.goal_area_width < self.penalty_area_width,
                "goal_area_width < penalty_area_width",
            ),
            (
                self.penalty_area_length < self.length / 2.0,
                "penalty_area_length < length / 2",
            ),
        ];
        for (ok, what) in checks {
            if !ok {
                return Err(FieldError::InvalidSpec(format!("violated {what}")));
            }
        }
        Ok(())
    }

    /// Corners of the pitch rectangle on the ground plane, counterclockwise.
    pub fn ground_rectangle(&self) -> [(f64, f64); 4] {
        let (hl, hw) = (self.length / 2.0, self.width / 2.0);
        [(-hl, -hw), (hl, -hw), (hl, hw), (-hl, hw)]
    }
}

macro_rules! semantic_classes {
    ($($variant:ident => $label:literal,)*) => {
        /// Closed registry of the 26 annotated pitch element classes.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum SemanticClass {
            $($variant,)*
        }

        impl SemanticClass {
            pub const ALL: [SemanticClass; 26] = [$(SemanticClass::$variant,)*];

            pub fn label(self) -> &'static str {
                match self {
                    $(SemanticClass::$variant => $label,)*
                }
            }
        }
    };
}

semantic_classes! {
    SideLineTop => "Side line top",
    SideLineBottom => "Side line bottom",
    SideLineLeft => "Side line left",
    SideLineRight => "Side line right",
    MiddleLine => "Middle line",
    BigRectLeftTop => "Big rect. left top",
    BigRectLeftMain => "Big rect. left main",
    BigRectLeftBottom => "Big rect. left bottom",
    BigRectRightTop => "Big rect. right top",
    BigRectRightMain => "Big rect. right main",
    BigRectRightBottom => "Big rect. right bottom",
    SmallRectLeftTop => "Small rect. left top",
    SmallRectLeftMain => "Small rect. left main",
    SmallRectLeftBottom => "Small rect. left bottom",
    SmallRectRightTop => "Small rect. right top",
    SmallRectRightMain => "Small rect. right main",
    SmallRectRightBottom => "Small rect. right bottom",
    CircleCentral => "Circle central",
    CircleLeft => "Circle left",
    CircleRight => "Circle right",
    GoalLeftPostLeft => "Goal left post left",
    GoalLeftPostRight => "Goal left post right",
    GoalLeftCrossbar => "Goal left crossbar",
    GoalRightPostLeft => "Goal right post left",
    GoalRightPostRight => "Goal right post right",
    GoalRightCrossbar => "Goal right crossbar",
}

impl SemanticClass {
    /// Goal posts and crossbars: the only elements off the ground plane.
    pub fn is_goal(self) -> bool {
        use SemanticClass::*;
        matches!(
            self,
            GoalLeftPostLeft
                | GoalLeftPostRight
                | GoalLeftCrossbar
                | GoalRightPostLeft
                | GoalRightPostRight
                | GoalRightCrossbar
        )
    }

    /// Image of this class under the X -> -X reflection.
    pub fn mirrored_x(self) -> SemanticClass {
        use SemanticClass::*;
        match self {
            SideLineLeft => SideLineRight,
            SideLineRight => SideLineLeft,
            BigRectLeftTop => BigRectRightTop,
            BigRectLeftMain => BigRectRightMain,
            BigRectLeftBottom => BigRectRightBottom,
            BigRectRightTop => BigRectLeftTop,
            BigRectRightMain => BigRectLeftMain,
            BigRectRightBottom => BigRectLeftBottom,
            SmallRectLeftTop => SmallRectRightTop,
            SmallRectLeftMain => SmallRectRightMain,
            SmallRectLeftBottom => SmallRectRightBottom,
            SmallRectRightTop => SmallRectLeftTop,
            SmallRectRightMain => SmallRectLeftMain,
            SmallRectRightBottom => SmallRectLeftBottom,
            CircleLeft => CircleRight,
            CircleRight => CircleLeft,
            GoalLeftPostLeft => GoalRightPostLeft,
            GoalLeftPostRight => GoalRightPostRight,
            GoalLeftCrossbar => GoalRightCrossbar,
            GoalRightPostLeft => GoalLeftPostLeft,
            GoalRightPostRight => GoalLeftPostRight,
            GoalRightCrossbar => GoalLeftCrossbar,
            other => other,
        }
    }

    /// Image of this class under the Y -> -Y reflection.
    pub fn mirrored_y(self) -> SemanticClass {
        use SemanticClass::*;
        match self {
            SideLineTop => SideLineBottom,
            SideLineBottom => SideLineTop,
            BigRectLeftTop => BigRectLeftBottom,
            BigRectLeftBottom => BigRectLeftTop,
            BigRectRightTop => BigRectRightBottom,
            BigRectRightBottom => BigRectRightTop,
            SmallRectLeftTop => SmallRectLeftBottom,
            SmallRectLeftBottom => SmallRectLeftTop,
            SmallRectRightTop => SmallRectRightBottom,
            SmallRectRightBottom => SmallRectRightTop,
            GoalLeftPostLeft => GoalLeftPostRight,
            GoalLeftPostRight => GoalLeftPostLeft,
            GoalRightPostLeft => GoalRightPostRight,
            GoalRightPostRight => GoalRightPostLeft,
            other => other,
        }
    }
}

impl fmt::Display for SemanticClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SemanticClass {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SemanticClass::ALL
            .iter()
            .copied()
            .find(|c| c.label() == s)
            .ok_or_else(|| FieldError::UnknownClass {
                name: s.to_string(),
                valid: SemanticClass::ALL
                    .iter()
                    .map(|c| c.label())
                    .collect::<Vec<_>>()
                    .join(", "),
            })
    }
}

impl Serialize for SemanticClass {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for SemanticClass {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A circle (or arc of it) in 3D. Angles are measured in the plane basis
/// returned by [`Circle3D::basis`]; for a +Z normal that is the world X/Y axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle3D {
    pub center: Point3<f64>,
    pub radius: f64,
    pub normal: Vector3<f64>,
    pub start_angle: f64,
    /// Counterclockwise angular extent, in (0, 2π].
    pub sweep: f64,
}

impl Circle3D {
    pub fn is_full(&self) -> bool {
        self.sweep >= 2.0 * PI
    }

    /// Orthonormal in-plane axes (u, v) with u × v = normal.
    pub fn basis(&self) -> (Vector3<f64>, Vector3<f64>) {
        let n = self.normal.normalize();
        if (n - Vector3::z()).norm() < 1e-15 {
            return (Vector3::x(), Vector3::y());
        }
        let helper = if n.z.abs() < 0.9 {
            Vector3::z()
        } else {
            Vector3::x()
        };
        let u = helper.cross(&n).normalize();
        let v = n.cross(&u);
        (u, v)
    }

    pub fn point_at(&self, angle: f64) -> Point3<f64> {
        let (u, v) = self.basis();
        self.center + (u * angle.cos() + v * angle.sin()) * self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    Segment(Point3<f64>, Point3<f64>),
    Circle(Circle3D),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldElement {
    pub class: SemanticClass,
    pub geometry: Geometry,
}

impl FieldElement {
    pub fn segment(class: SemanticClass, a: [f64; 3], b: [f64; 3]) -> Self {
        Self {
            class,
            geometry: Geometry::Segment(Point3::from(a), Point3::from(b)),
        }
    }

    pub fn is_curve(&self) -> bool {
        matches!(self.geometry, Geometry::Circle(_))
    }
}

/// Builds the 26-element soccer template.
pub fn build_pitch_template(spec: &PitchSpec) -> Result<Vec<FieldElement>, FieldError> {
    use SemanticClass::*;
    spec.validate()?;

    let hl = spec.length / 2.0;
    let hw = spec.width / 2.0;
    let pa_x = hl - spec.penalty_area_length;
    let pa_y = spec.penalty_area_width / 2.0;
    let ga_x = hl - spec.goal_area_length;
    let ga_y = spec.goal_area_width / 2.0;
    let gy = spec.goal_width / 2.0;
    let gz = spec.goal_height;

    let mut elements = vec![
        FieldElement::segment(SideLineTop, [-hl, hw, 0.0], [hl, hw, 0.0]),
        FieldElement::segment(SideLineBottom, [-hl, -hw, 0.0], [hl, -hw, 0.0]),
        FieldElement::segment(SideLineLeft, [-hl, -hw, 0.0], [-hl, hw, 0.0]),
        FieldElement::segment(SideLineRight, [hl, -hw, 0.0], [hl, hw, 0.0]),
        FieldElement::segment(MiddleLine, [0.0, -hw, 0.0], [0.0, hw, 0.0]),
    ];

    // Left-half elements; the right half is generated by X -> -X.
    let left = [
        FieldElement::segment(BigRectLeftTop, [-hl, pa_y, 0.0], [-pa_x, pa_y, 0.0]),
        FieldElement::segment(BigRectLeftMain, [-pa_x, -pa_y, 0.0], [-pa_x, pa_y, 0.0]),
        FieldElement::segment(BigRectLeftBottom, [-hl, -pa_y, 0.0], [-pa_x, -pa_y, 0.0]),
        FieldElement::segment(SmallRectLeftTop, [-hl, ga_y, 0.0], [-ga_x, ga_y, 0.0]),
        FieldElement::segment(SmallRectLeftMain, [-ga_x, -ga_y, 0.0], [-ga_x, ga_y, 0.0]),
        FieldElement::segment(SmallRectLeftBottom, [-hl, -ga_y, 0.0], [-ga_x, -ga_y, 0.0]),
        FieldElement::segment(GoalLeftPostLeft, [-hl, -gy, 0.0], [-hl, -gy, gz]),
        FieldElement::segment(GoalLeftPostRight, [-hl, gy, 0.0], [-hl, gy, gz]),
        FieldElement::segment(GoalLeftCrossbar, [-hl, -gy, gz], [-hl, gy, gz]),
    ];
    for e in left {
        elements.push(e);
        if let Geometry::Segment(a, b) = e.geometry {
            elements.push(FieldElement {
                class: e.class.mirrored_x(),
                geometry: Geometry::Segment(mirror_x(a), mirror_x(b)),
            });
        }
    }

    elements.push(FieldElement {
        class: CircleCentral,
        geometry: Geometry::Circle(Circle3D {
            center: Point3::origin(),
            radius: spec.circle_radius,
            normal: Vector3::z(),
            start_angle: 0.0,
            sweep: 2.0 * PI,
        }),
    });

    // Penalty arcs: the part of the circle around the penalty mark that lies
    // outside the penalty area.
    let mark_x = hl - spec.penalty_mark_distance;
    let inside = mark_x - pa_x;
    let half_angle = if inside >= spec.circle_radius {
        0.0
    } else {
        (inside / spec.circle_radius).clamp(-1.0, 1.0).acos()
    };
    if half_angle > 0.0 {
        elements.push(FieldElement {
            class: CircleLeft,
            geometry: Geometry::Circle(Circle3D {
                center: Point3::new(-mark_x, 0.0, 0.0),
                radius: spec.circle_radius,
                normal: Vector3::z(),
                start_angle: -half_angle,
                sweep: 2.0 * half_angle,
            }),
        });
        elements.push(FieldElement {
            class: CircleRight,
            geometry: Geometry::Circle(Circle3D {
                center: Point3::new(mark_x, 0.0, 0.0),
                radius: spec.circle_radius,
                normal: Vector3::z(),
                start_angle: PI - half_angle,
                sweep: 2.0 * half_angle,
            }),
        });
    } else {
        return Err(FieldError::InvalidSpec(
            "penalty arc does not reach beyond the penalty area".into(),
        ));
    }

    elements.sort_by_key(|e| e.class);
    Ok(elements)
}

fn mirror_x(p: Point3<f64>) -> Point3<f64> {
    Point3::new(-p.x, p.y, p.z)
}

/// Discretizes an element into an ordered polyline with consecutive spacing
/// (chord length for circles) at most `max_spacing`.
///
/// Full circles are closed: the first point is repeated at the end.
pub fn sample_element(
    element: &FieldElement,
    max_spacing: f64,
) -> Result<Vec<Point3<f64>>, FieldError> {
    if !(max_spacing.is_finite() && max_spacing > 0.0) {
        return Err(FieldError::InvalidSpacing(max_spacing));
    }
    Ok(match element.geometry {
        Geometry::Segment(a, b) => {
            let len = (b - a).norm();
            let n = ((len / max_spacing).ceil() as usize).max(1);
            (0..=n)
                .map(|i| {
                    if i == 0 {
                        a
                    } else if i == n {
                        b
                    } else {
                        a + (b - a) * (i as f64 / n as f64)
                    }
                })
                .collect()
        }
        Geometry::Circle(c) => {
            let half_chord = (max_spacing / (2.0 * c.radius)).min(1.0);
            let max_step = 2.0 * half_chord.asin();
            let sweep = c.sweep.min(2.0 * PI);
            let n = ((sweep / max_step).ceil() as usize).max(1);
            let (u, v) = c.basis();
            let mut pts: Vec<Point3<f64>> = (0..=n)
                .map(|i| {
                    let angle = c.start_angle + sweep * (i as f64 / n as f64);
                    c.center + (u * angle.cos() + v * angle.sin()) * c.radius
                })
                .collect();
            if c.is_full() {
                pts[n] = pts[0];
            }
            pts
        }
    })
}

/// A template with every element already discretized.
#[derive(Debug, Clone)]
pub struct SampledTemplate {
    pub spacing: f64,
    pub elements: Vec<SampledElement>,
}

#[derive(Debug, Clone)]
pub struct SampledElement {
    pub class: SemanticClass,
    pub is_curve: bool,
    pub points: Vec<Point3<f64>>,
}

impl SampledTemplate {
    pub fn new(template: &[FieldElement], spacing: f64) -> Result<Self, FieldError> {
        let elements = template
            .iter()
            .map(|e| {
                Ok(SampledElement {
                    class: e.class,
                    is_curve: e.is_curve(),
                    points: sample_element(e, spacing)?,
                })
            })
            .collect::<Result<Vec<_>, FieldError>>()?;
        Ok(Self { spacing, elements })
    }

    pub fn get(&self, class: SemanticClass) -> Option<&SampledElement> {
        self.elements.iter().find(|e| e.class == class)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn template() -> Vec<FieldElement> {
        build_pitch_template(&PitchSpec::default()).unwrap()
    }

    fn find(t: &[FieldElement], class: SemanticClass) -> FieldElement {
        *t.iter().find(|e| e.class == class).unwrap()
    }

    #[test]
    fn registry_has_26_unique_labels() {
        let mut labels: Vec<_> = SemanticClass::ALL.iter().map(|c| c.label()).collect();
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), 26);
        for c in SemanticClass::ALL {
            assert_eq!(c.label().parse::<SemanticClass>().unwrap(), c);
        }
    }

    #[test]
    fn unknown_label_lists_valid_ones() {
        let err = "Centre dot".parse::<SemanticClass>().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("Centre dot"));
        assert!(msg.contains("Middle line"));
    }

    #[test]
    fn default_template_has_one_element_per_class() {
        let t = template();
        assert_eq!(t.len(), 26);
        for c in SemanticClass::ALL {
            assert_eq!(t.iter().filter(|e| e.class == c).count(), 1, "{c}");
        }
    }

    #[test]
    fn middle_line_and_central_circle() {
        let t = template();
        assert_eq!(
            find(&t, SemanticClass::MiddleLine).geometry,
            Geometry::Segment(Point3::new(0.0, -34.0, 0.0), Point3::new(0.0, 34.0, 0.0))
        );
        match find(&t, SemanticClass::CircleCentral).geometry {
            Geometry::Circle(c) => {
                assert_eq!(c.center, Point3::origin());
                assert_eq!(c.radius, 9.15);
                assert_eq!(c.normal, Vector3::z());
                assert!(c.is_full());
            }
            g => panic!("unexpected {g:?}"),
        }
    }

    #[test]
    fn left_crossbar_endpoints() {
        let t = template();
        let Geometry::Segment(a, b) = find(&t, SemanticClass::GoalLeftCrossbar).geometry else {
            panic!()
        };
        assert_eq!(a, Point3::new(-52.5, -3.66, 2.44));
        assert_eq!(b, Point3::new(-52.5, 3.66, 2.44));
    }

    #[test]
    fn elevation_invariants() {
        for e in template() {
            let pts = sample_element(&e, 0.5).unwrap();
            if e.class.is_goal() {
                assert!(pts.iter().any(|p| p.z > 0.0), "{}", e.class);
            } else {
                assert!(pts.iter().all(|p| p.z == 0.0), "{}", e.class);
            }
        }
    }

    fn point_set(e: &FieldElement) -> Vec<[f64; 3]> {
        let mut pts: Vec<[f64; 3]> = match e.geometry {
            Geometry::Segment(a, b) => vec![a.into(), b.into()],
            Geometry::Circle(c) if c.is_full() => vec![c.center.into()],
            Geometry::Circle(c) => vec![
                c.point_at(c.start_angle).into(),
                c.point_at(c.start_angle + c.sweep).into(),
                c.center.into(),
            ],
        };
        sort_rounded(&mut pts);
        pts
    }

    fn sort_rounded(pts: &mut [[f64; 3]]) {
        pts.sort_by_key(|p| p.map(|v| (v * 1e6).round() as i64));
    }

    #[test]
    fn template_is_mirror_symmetric() {
        let t = template();
        for e in &t {
            for (other, map) in [
                (e.class.mirrored_x(), [-1.0, 1.0, 1.0]),
                (e.class.mirrored_y(), [1.0, -1.0, 1.0]),
            ] {
                let o = find(&t, other);
                let mut mirrored: Vec<[f64; 3]> = point_set(e)
                    .into_iter()
                    .map(|p| [p[0] * map[0], p[1] * map[1], p[2] * map[2]])
                    .collect();
                sort_rounded(&mut mirrored);
                let expected = point_set(&o);
                for (p, q) in mirrored.iter().zip(&expected) {
                    for k in 0..3 {
                        let tol = if e.is_curve() { 1e-12 } else { 0.0 };
                        assert!((p[k] - q[k]).abs() <= tol, "{} vs {}", e.class, o.class);
                    }
                }
            }
        }
    }

    #[test]
    fn penalty_arcs_start_on_penalty_area_line() {
        let t = template();
        let Geometry::Circle(c) = find(&t, SemanticClass::CircleLeft).geometry else {
            panic!()
        };
        let start = c.point_at(c.start_angle);
        let end = c.point_at(c.start_angle + c.sweep);
        assert!((start.x + 36.0).abs() < 1e-12);
        assert!((end.x + 36.0).abs() < 1e-12);
        assert!((start.y + end.y).abs() < 1e-12);
    }

    #[test]
    fn invalid_spec_names_invariant() {
        let spec = PitchSpec {
            width: 120.0,
            ..Default::default()
        };
        let err = build_pitch_template(&spec).unwrap_err();
        assert!(err.to_string().contains("length > width"));
        let spec = PitchSpec {
            goal_height: -1.0,
            ..Default::default()
        };
        assert!(build_pitch_template(&spec)
            .unwrap_err()
            .to_string()
            .contains("goal_height"));
    }

    #[test]
    fn segment_sampling() {
        let e = FieldElement::segment(SemanticClass::MiddleLine, [0.0; 3], [10.0, 0.0, 0.0]);
        assert_eq!(sample_element(&e, 10.0).unwrap().len(), 2);
        let pts = sample_element(&e, 3.0).unwrap();
        assert_eq!(pts.len(), 5);
        for (i, p) in pts.iter().enumerate() {
            assert!((p.x - 2.5 * i as f64).abs() < 1e-12);
        }
        assert!(sample_element(&e, 0.0).is_err());
    }

    #[test]
    fn circle_sampling_chords() {
        let t = template();
        let e = find(&t, SemanticClass::CircleCentral);
        let pts = sample_element(&e, 0.5).unwrap();
        assert!(pts.len() >= 115, "{}", pts.len());
        assert_eq!(pts.first(), pts.last());
        let max_chord = pts
            .windows(2)
            .map(|w| (w[1] - w[0]).norm())
            .fold(0.0, f64::max);
        assert!(max_chord <= 0.5);
        // Starts at angle 0, counterclockwise from +Z.
        assert!((pts[0] - Point3::new(9.15, 0.0, 0.0)).norm() < 1e-12);
        assert!(pts[1].y > 0.0);
        for p in &pts {
            assert!(((p - Point3::origin()).norm() - 9.15).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        for e in template() {
            assert_eq!(
                sample_element(&e, 0.2).unwrap(),
                sample_element(&e, 0.2).unwrap()
            );
        }
    }

    #[test]
    fn pitch_spec_json_defaults() {
        let spec: PitchSpec = serde_json::from_str(r#"{"length": 100.0}"#).unwrap();
        assert_eq!(spec.length, 100.0);
        assert_eq!(spec.width, 68.0);
        assert!(serde_json::from_str::<PitchSpec>(r#"{"lenght": 100.0}"#).is_err());
    }
}
