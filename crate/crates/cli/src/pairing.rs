//! Matching annotation files with camera files.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use pitchcal::io::{
    read_camera, read_legacy_homography, sanity_check_homography, LegacyConvention,
};
use pitchcal::{CameraModel, PitchSpec};

pub const CAMERA_SUFFIX: &str = ".camera.json";
pub const LEGACY_SUFFIX: &str = ".homography";

#[derive(Debug, Clone)]
pub struct Pair {
    pub id: String,
    pub annotation: PathBuf,
    /// `None` when no camera file exists for the image.
    pub camera: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestEntry {
    id: String,
    annotation: PathBuf,
    camera: Option<PathBuf>,
}

/// Annotation ids in a directory: every `X.json` that is not a camera file.
pub fn annotation_ids(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut ids = Vec::new();
    let entries = std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))?;
    for entry in entries {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if !path.is_file() || name.ends_with(CAMERA_SUFFIX) {
            continue;
        }
        if let Some(stem) = name.strip_suffix(".json") {
            ids.push((stem.to_string(), path.clone()));
        }
    }
    ids.sort();
    Ok(ids)
}

/// Camera file for `id`: `id.camera.json`, else `id.homography` if a legacy
/// convention was given.
pub fn camera_path(dir: &Path, id: &str, legacy: bool) -> Option<PathBuf> {
    let json = dir.join(format!("{id}{CAMERA_SUFFIX}"));
    if json.is_file() {
        return Some(json);
    }
    let text = dir.join(format!("{id}{LEGACY_SUFFIX}"));
    (legacy && text.is_file()).then_some(text)
}

pub fn pair_directory(annotations: &Path, cameras: &Path, legacy: bool) -> Result<Vec<Pair>> {
    Ok(annotation_ids(annotations)?
        .into_iter()
        .map(|(id, annotation)| Pair {
            camera: camera_path(cameras, &id, legacy),
            id,
            annotation,
        })
        .collect())
}

/// JSON array of `{"id", "annotation", "camera"}`; relative paths are taken
/// from the manifest's directory.
pub fn read_manifest(path: &Path) -> Result<Vec<Pair>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let entries: Vec<ManifestEntry> = serde_json::from_str(&text)
        .with_context(|| format!("parsing manifest {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut pairs: Vec<Pair> = entries
        .into_iter()
        .map(|e| Pair {
            id: e.id,
            annotation: base.join(e.annotation),
            camera: e.camera.map(|c| base.join(c)).filter(|c| c.is_file()),
        })
        .collect();
    pairs.sort_by(|a, b| a.id.cmp(&b.id));
    if let Some(w) = pairs.windows(2).find(|w| w[0].id == w[1].id) {
        bail!("manifest lists image {:?} twice", w[0].id);
    }
    Ok(pairs)
}

/// Either `pixels_to_yards_corner`, `meters_to_pixels_center`, or a path to
/// a JSON document `{"custom": {"pre": [[..]], "post": [[..]]}}`.
pub fn parse_convention(arg: &str) -> Result<LegacyConvention> {
    if let Ok(c) = arg.parse::<LegacyConvention>() {
        return Ok(c);
    }
    let path = Path::new(arg);
    if !path.is_file() {
        bail!("{arg:?} is neither a known convention nor a readable file");
    }
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).with_context(|| format!("parsing convention {arg}"))
}

pub fn load_camera(
    path: &Path,
    convention: Option<&LegacyConvention>,
    spec: &PitchSpec,
    image_size: (u32, u32),
) -> Result<CameraModel> {
    let is_legacy = path.to_str().is_some_and(|p| p.ends_with(LEGACY_SUFFIX));
    match (is_legacy, convention) {
        (true, Some(conv)) => {
            let h = read_legacy_homography(path, conv, spec)?.oriented_for_image(image_size);
            for w in sanity_check_homography(&h, image_size, spec) {
                log::warn!("{}: {w}; is the convention right?", path.display());
            }
            Ok(CameraModel::Homography(h))
        }
        (true, None) => bail!("{} needs --legacy-homography-convention", path.display()),
        (false, _) => Ok(read_camera(path)?),
    }
}
