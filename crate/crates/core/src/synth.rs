//! Synthetic ground truth: random broadcast-style cameras, the annotations
//! they would produce, and controlled corruption of those annotations.

use std::collections::BTreeSet;

use nalgebra::{Point2, Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::calibrate::{dlt_homography, CalibrateError, Correspondence};
use crate::camera::{
    rotation_from_axis_angle, CameraError, CameraModel, Homography, PinholeRadial,
    SimplifiedPinhole,
};
use crate::field::{build_pitch_template, FieldError, PitchSpec, SampledTemplate, SemanticClass};
use crate::metrics::{inside_image, project_template, ImageAnnotation, DEFAULT_SPACING};

/// Redraws allowed before giving up on a configuration.
pub const MAX_ATTEMPTS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid scene configuration: {0}")]
    InvalidConfig(String),
    #[error("no usable camera after {0} draws")]
    NoVisibleElement(usize),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Camera(#[from] CameraError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    pub seed: u64,
    pub image_width: u32,
    pub image_height: u32,
    pub pitch: PitchSpec,
    /// Camera center box (meters), as [min, max] per axis.
    pub center_x: [f64; 2],
    pub center_y: [f64; 2],
    pub center_z: [f64; 2],
    /// Ground point the camera looks at.
    pub look_at_x: [f64; 2],
    pub look_at_y: [f64; 2],
    pub focal: [f64; 2],
    pub k1: [f64; 2],
    /// Standard deviation of the image-space noise on each coordinate (px).
    pub noise_sigma: f64,
    pub dropout_rate: f64,
    pub hallucination_rate: f64,
    pub points_per_line: usize,
    pub points_per_curve: usize,
    /// Template discretization used for projection (meters).
    pub spacing: f64,
    /// Redraw cameras that predict no goal element.
    pub require_goal: bool,
    /// Redraw cameras that predict fewer elements.
    pub min_elements: usize,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            image_width: 1920,
            image_height: 1080,
            pitch: PitchSpec::default(),
            center_x: [-10.0, 10.0],
            center_y: [-45.0, -35.0],
            center_z: [8.0, 25.0],
            look_at_x: [-52.5, 52.5],
            look_at_y: [-34.0, 34.0],
            focal: [1500.0, 6000.0],
            k1: [-0.12, 0.02],
            noise_sigma: 0.0,
            dropout_rate: 0.0,
            hallucination_rate: 0.0,
            points_per_line: 5,
            points_per_curve: 12,
            spacing: DEFAULT_SPACING,
            require_goal: false,
            min_elements: 1,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidConfig(m.to_string()));
        for (name, r) in [
            ("center_x", self.center_x),
            ("center_y", self.center_y),
            ("center_z", self.center_z),
            ("look_at_x", self.look_at_x),
            ("look_at_y", self.look_at_y),
            ("focal", self.focal),
            ("k1", self.k1),
        ] {
            if !(r[0].is_finite() && r[1].is_finite() && r[0] <= r[1]) {
                return bad(&format!("range {name} is empty or non-finite"));
            }
        }
        if self.focal[0] <= 0.0 {
            return bad("focal range must be positive");
        }
        for (name, rate) in [
            ("dropout_rate", self.dropout_rate),
            ("hallucination_rate", self.hallucination_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) {
                return bad(&format!("{name} must lie in [0, 1]"));
            }
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad("noise_sigma must be non-negative");
        }
        if self.points_per_line < 2 || self.points_per_curve < 2 {
            return bad("at least 2 points per element");
        }
        if self.image_width == 0 || self.image_height == 0 {
            return bad("image size must be positive");
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return bad("spacing must be positive");
        }
        if self.min_elements > SemanticClass::ALL.len() {
            return bad("min_elements exceeds the number of classes");
        }
        self.pitch.validate()?;
        Ok(())
    }
}

/// What the generator did to the clean annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    /// Camera draws used (1 when the first draw was accepted).
    pub attempts: usize,
    pub noise_sigma: f64,
    /// Classes the generating camera predicts in the frame.
    pub predicted: Vec<SemanticClass>,
    pub dropped: Vec<SemanticClass>,
    /// Fabricated annotations of classes the camera does not predict.
    pub hallucinated: Vec<SemanticClass>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub camera: PinholeRadial,
    pub annotation: ImageAnnotation,
    pub provenance: Provenance,
    /// Best ground-plane homography for the camera, fitted by DLT to a grid
    /// of ground points it sees. Plays the role of a legacy homography
    /// annotation.
    pub homography: Homography,
}

/// Independent per-scene seed derived from a base seed (SplitMix64).
pub fn scene_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn draw(rng: &mut ChaCha8Rng, r: [f64; 2]) -> f64 {
    if r[0] == r[1] {
        r[0]
    } else {
        rng.random_range(r[0]..r[1])
    }
}

fn draw_camera(rng: &mut ChaCha8Rng, config: &SceneConfig) -> Result<PinholeRadial, CameraError> {
    let center = Point3::new(
        draw(rng, config.center_x),
        draw(rng, config.center_y),
        draw(rng, config.center_z),
    );
    let target = Point3::new(
        draw(rng, config.look_at_x),
        draw(rng, config.look_at_y),
        0.0,
    );
    let focal = draw(rng, config.focal);
    let k1 = draw(rng, config.k1);
    let pp = Point2::new(
        config.image_width as f64 / 2.0,
        config.image_height as f64 / 2.0,
    );
    PinholeRadial::new(
        SimplifiedPinhole::look_at(focal, pp, center, target)?,
        k1,
        0.0,
    )
}

/// Parts of a polyline inside the `w`×`h` frame, each segment clipped to it.
fn clip_to_frame(piece: &[Point2<f64>], w: f64, h: f64) -> Vec<Vec<Point2<f64>>> {
    let mut runs: Vec<Vec<Point2<f64>>> = Vec::new();
    let mut current: Vec<Point2<f64>> = Vec::new();
    for s in piece.windows(2) {
        match clip_segment(s[0], s[1], w, h) {
            Some((a, b)) => {
                if current.last() != Some(&a) {
                    if current.len() >= 2 {
                        runs.push(std::mem::take(&mut current));
                    }
                    current = vec![a];
                }
                current.push(b);
            }
            None => {
                if current.len() >= 2 {
                    runs.push(std::mem::take(&mut current));
                }
                current.clear();
            }
        }
    }
    if current.len() >= 2 {
        runs.push(current);
    }
    runs
}

/// Liang–Barsky clipping of segment ab to [0, w]×[0, h]. Endpoints that are
/// already inside are returned unchanged.
fn clip_segment(
    a: Point2<f64>,
    b: Point2<f64>,
    w: f64,
    h: f64,
) -> Option<(Point2<f64>, Point2<f64>)> {
    let d = b - a;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, q) in [(-d.x, a.x), (d.x, w - a.x), (-d.y, a.y), (d.y, h - a.y)] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    if t0 > t1 {
        return None;
    }
    let pa = if t0 == 0.0 { a } else { a + d * t0 };
    let pb = if t1 == 1.0 { b } else { a + d * t1 };
    (pa != pb).then_some((pa, pb))
}

/// `n` points at evenly spaced arc lengths (bin centers) along the runs.
fn sample_runs(runs: &[Vec<Point2<f64>>], n: usize) -> Vec<Point2<f64>> {
    let segs: Vec<(Point2<f64>, Point2<f64>, f64)> = runs
        .iter()
        .flat_map(|r| r.windows(2).map(|s| (s[0], s[1], (s[1] - s[0]).norm())))
        .collect();
    let total: f64 = segs.iter().map(|s| s.2).sum();
    if total <= 0.0 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(n);
    let mut k = 0;
    let mut before = 0.0;
    for i in 0..n {
        let s = total * (i as f64 + 0.5) / n as f64;
        while k + 1 < segs.len() && before + segs[k].2 < s {
            before += segs[k].2;
            k += 1;
        }
        let (a, b, len) = segs[k];
        let u = if len > 0.0 {
            ((s - before) / len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        out.push(a + (b - a) * u);
    }
    out
}

/// Short fabricated stroke within 30 px of a random image border.
fn hallucinate(rng: &mut ChaCha8Rng, w: f64, h: f64, n: usize) -> Vec<Point2<f64>> {
    let side = rng.random_range(0..4);
    let along = rng.random_range(0.1..0.7);
    let depth = rng.random_range(2.0..30.0);
    let len = rng.random_range(0.05..0.25);
    (0..n)
        .map(|i| {
            let s = along + len * i as f64 / (n - 1) as f64;
            match side {
                0 => Point2::new(s * w, depth),
                1 => Point2::new(s * w, h - depth),
                2 => Point2::new(depth, s * h),
                _ => Point2::new(w - depth, s * h),
            }
        })
        .collect()
}

/// Normalized DLT on a 16×9 grid of pixels back-projected to the ground by
/// `camera`, keeping ground points within 20 m of the pitch.
pub fn fit_ground_homography(
    camera: &PinholeRadial,
    image_size: (u32, u32),
    pitch: &PitchSpec,
) -> Result<Homography, CalibrateError> {
    let model = CameraModel::PinholeRadial(*camera);
    let (w, h) = (image_size.0 as f64, image_size.1 as f64);
    let (hx, hy) = (pitch.length / 2.0 + 20.0, pitch.width / 2.0 + 20.0);
    let mut corrs = Vec::new();
    for j in 0..9 {
        for i in 0..16 {
            let px = Point2::new((i as f64 + 0.5) * w / 16.0, (j as f64 + 0.5) * h / 9.0);
            if let Ok(g) = model.ray_to_ground(&px) {
                if g.x.abs() <= hx && g.y.abs() <= hy {
                    corrs.push(Correspondence::new(g, px));
                }
            }
        }
    }
    dlt_homography(&corrs)
}

/// Draws one scene. Identical configurations give identical scenes.
pub fn generate_scene(config: &SceneConfig) -> Result<SyntheticScene, SynthError> {
    config.validate()?;
    let template = SampledTemplate::new(&build_pitch_template(&config.pitch)?, config.spacing)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (w, h) = (config.image_width as f64, config.image_height as f64);
    let size = (config.image_width, config.image_height);

    for attempt in 1..=MAX_ATTEMPTS {
        let camera = draw_camera(&mut rng, config)?;
        let projected = project_template(&CameraModel::PinholeRadial(camera), &template, w, h);
        let predicted: Vec<_> = projected.iter().filter(|p| p.predicted).collect();
        if predicted.len() < config.min_elements.max(1)
            || (config.require_goal && !predicted.iter().any(|p| p.class.is_goal()))
        {
            continue;
        }
        let Ok(homography) = fit_ground_homography(&camera, size, &config.pitch) else {
            continue;
        };

        let noise = Normal::new(0.0, config.noise_sigma).expect("sigma validated");
        let mut annotation = ImageAnnotation::new(config.image_width, config.image_height);
        let mut dropped = Vec::new();
        let mut hallucinated = Vec::new();
        for pe in &projected {
            let n = if pe.is_curve {
                config.points_per_curve
            } else {
                config.points_per_line
            };
            if !pe.predicted {
                if config.hallucination_rate > 0.0 && rng.random_bool(config.hallucination_rate) {
                    annotation
                        .elements
                        .insert(pe.class, hallucinate(&mut rng, w, h, n));
                    hallucinated.push(pe.class);
                }
                continue;
            }
            if config.dropout_rate > 0.0 && rng.random_bool(config.dropout_rate) {
                dropped.push(pe.class);
                continue;
            }
            let runs: Vec<_> = pe
                .pieces
                .iter()
                .flat_map(|p| clip_to_frame(p, w, h))
                .collect();
            let mut points = sample_runs(&runs, n);
            if points.is_empty() {
                // A single in-frame vertex with no in-frame length.
                points = pe
                    .pieces
                    .iter()
                    .flatten()
                    .filter(|p| inside_image(p, w, h))
                    .take(1)
                    .copied()
                    .collect();
            }
            if config.noise_sigma > 0.0 {
                for p in &mut points {
                    p.x += noise.sample(&mut rng);
                    p.y += noise.sample(&mut rng);
                }
            }
            annotation.elements.insert(pe.class, points);
        }
        let provenance = Provenance {
            seed: config.seed,
            attempts: attempt,
            noise_sigma: config.noise_sigma,
            predicted: predicted.iter().map(|p| p.class).collect(),
            dropped,
            hallucinated,
        };
        return Ok(SyntheticScene {
            camera,
            annotation,
            provenance,
            homography,
        });
    }
    Err(SynthError::NoVisibleElement(MAX_ATTEMPTS))
}

/// Scene `index` of a dataset generated from `config` (whose own seed acts
/// as the dataset seed).
pub fn generate_indexed(config: &SceneConfig, index: u64) -> Result<SyntheticScene, SynthError> {
    generate_scene(&SceneConfig {
        seed: scene_seed(config.seed, index),
        ..config.clone()
    })
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
            StandardNormal.sample(rng),
        );
        let n: f64 = v.norm();
        if n > 1e-6 {
            return v / n;
        }
    }
}

/// Rotates the camera by magnitude·0.5° about a random axis, moves its
/// center by magnitude·0.1 m in a random direction and scales the focal
/// length by 1 ± magnitude·0.5%. Distortion is unchanged.
pub fn perturb_camera(camera: &PinholeRadial, magnitude: f64, seed: u64) -> PinholeRadial {
    assert!(
        magnitude >= 0.0,
        "perturbation magnitude must be non-negative"
    );
    if magnitude == 0.0 {
        return *camera;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let axis = random_unit(&mut rng);
    let shift = random_unit(&mut rng) * (magnitude * 0.1);
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let delta = rotation_from_axis_angle(axis * (magnitude * 0.5).to_radians());
    let base = &camera.base;
    let mut out = *camera;
    out.base.rotation = delta * base.rotation;
    out.base.translation = delta * (base.translation - base.rotation * shift);
    out.base.focal = base.focal * (1.0 + sign * magnitude * 0.005);
    out
}

/// Classes annotated in `scene` that the generating camera predicts.
pub fn genuine_classes(scene: &SyntheticScene) -> BTreeSet<SemanticClass> {
    let hallucinated: BTreeSet<_> = scene.provenance.hallucinated.iter().collect();
    scene
        .annotation
        .elements
        .keys()
        .filter(|c| !hallucinated.contains(c))
        .copied()
        .collect()
}
