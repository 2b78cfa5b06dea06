use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context as _, Result};
use rayon::prelude::*;
use serde::Serialize;

use pitchcal::calibrate::{
    dlt_homography, line_intersection_correspondences, pinhole_seed, refine_camera,
    refine_homography, FitReport, RefineOptions,
};
use pitchcal::io::{
    dataset_csv, image_report_json, read_annotation, read_pitch_spec, to_canonical_json,
    write_annotation, write_camera, write_json, write_overlay, write_text, LegacyConvention,
};
use pitchcal::metrics::{aggregate, DatasetSummary, ImageAnnotation, ImageEval, ImageMeasurement};
use pitchcal::synth::{generate_indexed, SceneConfig};
use pitchcal::{build_pitch_template, CameraModel, FieldElement, PitchSpec, SampledTemplate};

use crate::pairing::{self, Pair, CAMERA_SUFFIX};
use crate::{
    check_taus, CompareArgs, EvaluateArgs, FitArgs, FitModel, RenderArgs, Shared, Status, SynthArgs,
};

struct Context {
    spec: PitchSpec,
    template: Vec<FieldElement>,
    sampled: SampledTemplate,
    pool: rayon::ThreadPool,
    convention: Option<LegacyConvention>,
}

impl Context {
    fn new(shared: &Shared) -> Result<Self> {
        let spec = match &shared.pitch {
            Some(p) => read_pitch_spec(p)?,
            None => PitchSpec::default(),
        };
        if !(shared.spacing.is_finite() && shared.spacing > 0.0) {
            bail!("--spacing must be positive");
        }
        let template = build_pitch_template(&spec)?;
        let sampled = SampledTemplate::new(&template, shared.spacing)?;
        let jobs = shared.jobs.unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        });
        if jobs == 0 {
            bail!("--jobs must be at least 1");
        }
        let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
        let convention = shared
            .legacy_homography_convention
            .as_deref()
            .map(pairing::parse_convention)
            .transpose()?;
        Ok(Self {
            spec,
            template,
            sampled,
            pool,
            convention,
        })
    }

    fn load(&self, pair: &Pair) -> Result<(ImageAnnotation, CameraModel)> {
        let ann = read_annotation(&pair.annotation)?;
        let path = pair
            .camera
            .as_ref()
            .ok_or_else(|| anyhow!("no camera file for image {:?}", pair.id))?;
        let cam = pairing::load_camera(
            path,
            self.convention.as_ref(),
            &self.spec,
            (ann.image_width, ann.image_height),
        )?;
        Ok((ann, cam))
    }

    /// Runs `f` on every pair in the worker pool; results keep input order.
    fn map<T: Send>(
        &self,
        pairs: &[Pair],
        f: impl Fn(&Pair) -> Result<T> + Sync,
    ) -> Vec<Result<T>> {
        self.pool.install(|| {
            pairs
                .par_iter()
                .map(|p| {
                    let r = f(p);
                    match &r {
                        Ok(_) => log::info!("{}: done", p.id),
                        Err(e) => log::debug!("{}: {e:#}", p.id),
                    }
                    r
                })
                .collect()
        })
    }
}

#[derive(Debug, Serialize)]
struct Failure {
    image_id: String,
    error: String,
}

fn failure(id: &str, e: &anyhow::Error) -> Failure {
    Failure {
        image_id: id.to_string(),
        error: format!("{e:#}"),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn collect_pairs(
    annotations: &Path,
    cameras: Option<&Path>,
    manifest: Option<&Path>,
    legacy: bool,
) -> Result<Vec<Pair>> {
    let pairs = match (manifest, cameras) {
        (Some(m), _) => pairing::read_manifest(m)?,
        (None, Some(c)) => pairing::pair_directory(annotations, c, legacy)?,
        (None, None) => bail!("either --cameras or --manifest is required"),
    };
    if pairs.iter().all(|p| p.camera.is_none()) {
        bail!("no annotation/camera pairs found");
    }
    Ok(pairs)
}

fn tau_label(tau: f64) -> String {
    format!("{tau}")
}

fn evaluate_pairs(ctx: &Context, pairs: &[Pair], taus: &[f64]) -> Vec<Result<Vec<ImageEval>>> {
    ctx.map(pairs, |pair| {
        let (ann, cam) = ctx.load(pair)?;
        let m = ImageMeasurement::new(&cam, &ctx.sampled, &ann)?;
        taus.iter()
            .map(|&t| m.score(t).map_err(Into::into))
            .collect::<Result<Vec<_>>>()
    })
}

#[derive(Serialize)]
struct ThresholdSummary {
    tau: f64,
    #[serde(flatten)]
    summary: DatasetSummary,
}

#[derive(Serialize)]
struct EvaluationSummary {
    images: usize,
    evaluated: usize,
    failures: Vec<Failure>,
    thresholds: Vec<ThresholdSummary>,
}

/// Splits results into successes (id, evals) and failures.
fn partition<T>(pairs: &[Pair], results: Vec<Result<T>>) -> (Vec<(&str, T)>, Vec<Failure>) {
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for (pair, r) in pairs.iter().zip(results) {
        match r {
            Ok(v) => ok.push((pair.id.as_str(), v)),
            Err(e) => failed.push(failure(&pair.id, &e)),
        }
    }
    (ok, failed)
}

fn summarize(taus: &[f64], ok: &[(&str, Vec<ImageEval>)]) -> Result<Vec<ThresholdSummary>> {
    if ok.is_empty() {
        return Ok(Vec::new());
    }
    taus.iter()
        .enumerate()
        .map(|(k, &tau)| {
            let evals: Vec<ImageEval> = ok.iter().map(|(_, e)| e[k].clone()).collect();
            Ok(ThresholdSummary {
                tau,
                summary: aggregate(&evals)?,
            })
        })
        .collect()
}

pub fn evaluate(args: &EvaluateArgs) -> Result<Status> {
    check_taus(&args.tau)?;
    let ctx = Context::new(&args.shared)?;
    let pairs = collect_pairs(
        &args.annotations,
        args.cameras.as_deref(),
        args.manifest.as_deref(),
        ctx.convention.is_some(),
    )?;
    let results = evaluate_pairs(&ctx, &pairs, &args.tau);
    let (ok, failures) = partition(&pairs, results);

    let images_dir = args.out.join("images");
    create_dir(&images_dir)?;
    for (id, evals) in &ok {
        write_text(
            &images_dir.join(format!("{id}.json")),
            &image_report_json(id, evals)?,
        )?;
    }
    for (k, &tau) in args.tau.iter().enumerate() {
        let csv = dataset_csv(ok.iter().map(|(id, e)| (*id, &e[k])))?;
        write_text(
            &args.out.join(format!("dataset_tau{}.csv", tau_label(tau))),
            &csv,
        )?;
    }
    let thresholds = summarize(&args.tau, &ok)?;
    for t in &thresholds {
        println!(
            "JaC_{} = {:.4}  mean reprojection = {}",
            tau_label(t.tau),
            t.summary.micro_jaccard,
            t.summary
                .mean_reprojection_px
                .map_or("n/a".to_string(), |v| format!("{v:.3} px"))
        );
    }
    let partial = !failures.is_empty();
    for f in &failures {
        eprintln!("failed: {}: {}", f.image_id, f.error);
    }
    write_json(
        &args.out.join("summary.json"),
        &EvaluationSummary {
            images: pairs.len(),
            evaluated: ok.len(),
            failures,
            thresholds,
        },
    )?;
    Ok(if partial {
        Status::Partial
    } else {
        Status::Success
    })
}

fn split_model_arg(arg: &str) -> (String, PathBuf) {
    match arg.split_once('=') {
        Some((name, dir)) if !name.is_empty() => (name.to_string(), PathBuf::from(dir)),
        _ => {
            let path = PathBuf::from(arg);
            let name = path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| arg.to_string());
            (name, path)
        }
    }
}

#[derive(Serialize)]
struct ModelRow {
    model: String,
    images: usize,
    failures: Vec<Failure>,
    thresholds: Vec<ThresholdSummary>,
}

fn comparison_table(taus: &[f64], rows: &[ModelRow]) -> Vec<Vec<String>> {
    let mut header = vec!["model".to_string(), "images".to_string()];
    header.extend(taus.iter().map(|t| format!("jac_{}", tau_label(*t))));
    header.extend(["reproj_px".to_string(), "reproj_norm".to_string()]);
    let mut table = vec![header];
    for r in rows {
        let mut line = vec![r.model.clone(), r.images.to_string()];
        let first = r.thresholds.first().map(|t| &t.summary);
        line.extend(
            r.thresholds
                .iter()
                .map(|t| format!("{:.4}", t.summary.micro_jaccard)),
        );
        line.extend(taus.iter().skip(r.thresholds.len()).map(|_| String::new()));
        let opt = |v: Option<f64>, p: usize| v.map_or(String::new(), |v| format!("{v:.p$}"));
        line.push(opt(first.and_then(|s| s.mean_reprojection_px), 4));
        line.push(opt(first.and_then(|s| s.mean_reprojection_norm), 6));
        table.push(line);
    }
    table
}

fn aligned(table: &[Vec<String>]) -> String {
    let widths: Vec<usize> = (0..table[0].len())
        .map(|c| table.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut s = String::new();
    for row in table {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, v)| {
                if c == 0 {
                    format!("{v:<w$}", w = widths[c])
                } else {
                    format!("{v:>w$}", w = widths[c])
                }
            })
            .collect();
        let _ = writeln!(s, "{}", cells.join("  ").trim_end());
    }
    s
}

fn to_csv(table: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in table {
        w.write_record(row)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn compare(args: &CompareArgs) -> Result<Status> {
    check_taus(&args.tau)?;
    if args.cameras.len() < 2 {
        bail!("compare needs at least two --cameras directories");
    }
    let ctx = Context::new(&args.shared)?;
    let models: Vec<(String, PathBuf)> = args.cameras.iter().map(|a| split_model_arg(a)).collect();
    let legacy = ctx.convention.is_some();
    let mut paired = Vec::new();
    for (name, dir) in &models {
        let pairs: Vec<Pair> = pairing::pair_directory(&args.annotations, dir, legacy)?;
        let with_camera: Vec<String> = pairs
            .iter()
            .filter(|p| p.camera.is_some())
            .map(|p| p.id.clone())
            .collect();
        if with_camera.is_empty() {
            bail!(
                "model {name:?}: no annotation/camera pairs in {}",
                dir.display()
            );
        }
        paired.push((name.clone(), pairs, with_camera));
    }
    if let Some((name, _, ids)) = paired.iter().find(|(_, _, ids)| *ids != paired[0].2) {
        bail!(
            "annotation mismatch: model {name:?} covers {} images, model {:?} covers {}",
            ids.len(),
            paired[0].0,
            paired[0].2.len()
        );
    }

    let mut rows = Vec::new();
    for (name, pairs, _) in &paired {
        let pairs: Vec<Pair> = pairs
            .iter()
            .filter(|p| p.camera.is_some())
            .cloned()
            .collect();
        let results = evaluate_pairs(&ctx, &pairs, &args.tau);
        let (ok, failures) = partition(&pairs, results);
        rows.push(ModelRow {
            model: name.clone(),
            images: ok.len(),
            failures,
            thresholds: summarize(&args.tau, &ok)?,
        });
    }
    let table = comparison_table(&args.tau, &rows);
    let text = aligned(&table);
    print!("{text}");
    create_dir(&args.out)?;
    write_text(&args.out.join("compare.txt"), &text)?;
    write_text(&args.out.join("compare.csv"), &to_csv(&table)?)?;
    let partial = rows.iter().any(|r| !r.failures.is_empty());
    write_json(&args.out.join("compare.json"), &rows)?;
    Ok(if partial {
        Status::Partial
    } else {
        Status::Success
    })
}

#[derive(Serialize)]
struct FitSummary {
    images: usize,
    fitted: usize,
    failures: Vec<Failure>,
}

fn fit_one(
    ctx: &Context,
    args: &FitArgs,
    options: &RefineOptions,
    pair: &Pair,
) -> Result<(CameraModel, FitReport)> {
    let ann = read_annotation(&pair.annotation)?;
    let size = (ann.image_width, ann.image_height);
    let seed = match &pair.camera {
        Some(path) => pairing::load_camera(path, ctx.convention.as_ref(), &ctx.spec, size)?,
        None => {
            let corrs = line_intersection_correspondences(&ctx.template, &ann);
            CameraModel::Homography(
                dlt_homography(&corrs)
                    .context("no seed camera and no usable line intersections")?,
            )
        }
    };
    Ok(match args.model {
        FitModel::Homography => {
            let h = match seed {
                CameraModel::Homography(h) => h,
                other => other.ground_homography(true)?,
            };
            let (h, report) = refine_homography(h, &ctx.sampled, &ann, options)?;
            (CameraModel::Homography(h), report)
        }
        FitModel::PinholeRadial => {
            let start = pinhole_seed(&seed, size)?;
            let (c, report) = refine_camera(start, &ctx.sampled, &ann, options)?;
            (CameraModel::PinholeRadial(c), report)
        }
    })
}

pub fn fit(args: &FitArgs) -> Result<Status> {
    let ctx = Context::new(&args.shared)?;
    let options = RefineOptions {
        max_iterations: args.max_iterations,
        unlock_k2: args.unlock_k2,
        fixed: args.fix.iter().map(|&f| f.into()).collect(),
    };
    let pairs: Vec<Pair> = match &args.seeds {
        Some(dir) => pairing::pair_directory(&args.annotations, dir, ctx.convention.is_some())?,
        None => pairing::annotation_ids(&args.annotations)?
            .into_iter()
            .map(|(id, annotation)| Pair {
                id,
                annotation,
                camera: None,
            })
            .collect(),
    };
    if pairs.is_empty() {
        bail!("no annotations found in {}", args.annotations.display());
    }
    if args.seeds.is_some() {
        for p in pairs.iter().filter(|p| p.camera.is_none()) {
            log::warn!("{}: no seed camera, using line intersections", p.id);
        }
    }
    let results = ctx.map(&pairs, |pair| fit_one(&ctx, args, &options, pair));
    let (ok, failures) = partition(&pairs, results);
    let reports = args.out.join("reports");
    create_dir(&reports)?;
    for (id, (camera, report)) in &ok {
        write_camera(camera, &args.out.join(format!("{id}{CAMERA_SUFFIX}")))?;
        write_json(&reports.join(format!("{id}.json")), report)?;
    }
    let partial = !failures.is_empty();
    for f in &failures {
        eprintln!("failed: {}: {}", f.image_id, f.error);
    }
    println!("fitted {} of {} images", ok.len(), pairs.len());
    write_json(
        &args.out.join("fit_summary.json"),
        &FitSummary {
            images: pairs.len(),
            fitted: ok.len(),
            failures,
        },
    )?;
    Ok(if partial {
        Status::Partial
    } else {
        Status::Success
    })
}

pub fn synth(args: &SynthArgs) -> Result<Status> {
    let ctx = Context::new(&args.shared)?;
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<SceneConfig>(&text)
                .with_context(|| format!("parsing {}", path.display()))?
        }
        None => SceneConfig::default(),
    };
    config.seed = args.seed;
    config.spacing = args.shared.spacing;
    if args.shared.pitch.is_some() {
        config.pitch = ctx.spec;
    }
    config.validate()?;
    if args.n == 0 {
        bail!("--n must be at least 1");
    }
    let names: Vec<Pair> = (0..args.n)
        .map(|i| Pair {
            id: format!("scene_{i:05}"),
            annotation: PathBuf::new(),
            camera: None,
        })
        .collect();
    let scenes = ctx.map(&names, |p| {
        let index: u64 = p.id["scene_".len()..].parse().expect("generated name");
        Ok(generate_indexed(&config, index)?)
    });
    let dirs = ["annotations", "cameras", "homographies", "provenance"].map(|d| args.out.join(d));
    for d in &dirs {
        create_dir(d)?;
    }
    let (ok, failures) = partition(&names, scenes);
    for (id, scene) in &ok {
        write_annotation(&scene.annotation, &dirs[0].join(format!("{id}.json")))?;
        write_camera(
            &CameraModel::PinholeRadial(scene.camera),
            &dirs[1].join(format!("{id}{CAMERA_SUFFIX}")),
        )?;
        write_camera(
            &CameraModel::Homography(scene.homography),
            &dirs[2].join(format!("{id}{CAMERA_SUFFIX}")),
        )?;
        write_json(&dirs[3].join(format!("{id}.json")), &scene.provenance)?;
    }
    write_text(&args.out.join("config.json"), &to_canonical_json(&config)?)?;
    println!("wrote {} scenes to {}", ok.len(), args.out.display());
    for f in &failures {
        eprintln!("failed: {}: {}", f.image_id, f.error);
    }
    Ok(if failures.is_empty() {
        Status::Success
    } else {
        Status::Partial
    })
}

pub fn render(args: &RenderArgs) -> Result<Status> {
    check_taus(&[args.tau])?;
    let ctx = Context::new(&args.shared)?;
    let pairs = collect_pairs(
        &args.annotations,
        args.cameras.as_deref(),
        args.manifest.as_deref(),
        ctx.convention.is_some(),
    )?;
    create_dir(&args.out)?;
    let results = ctx.map(&pairs, |pair| {
        let (ann, cam) = ctx.load(pair)?;
        let eval = ImageMeasurement::new(&cam, &ctx.sampled, &ann)?.score(args.tau)?;
        write_overlay(
            &args.out.join(format!("{}.svg", pair.id)),
            &cam,
            &ctx.sampled,
            &ann,
            &eval,
        )?;
        Ok(())
    });
    let (ok, failures) = partition(&pairs, results);
    println!("rendered {} of {} images", ok.len(), pairs.len());
    for f in &failures {
        eprintln!("failed: {}: {}", f.image_id, f.error);
    }
    Ok(if failures.is_empty() {
        Status::Success
    } else {
        Status::Partial
    })
}
