//! `pitchcal`: batch evaluation, comparison, fitting, synthesis and
//! rendering of sports-field camera calibrations.
//!
//! Exit codes: 0 on success, 1 when nothing could be done (no matching
//! pairs, mismatched inputs, bad arguments), 2 when some images failed; the
//! failures are listed in the command's summary file.

mod commands;
mod pairing;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pitchcal::calibrate::FitParam;

#[derive(Parser)]
#[command(
    name = "pitchcal",
    version,
    about = "Sports-field camera calibration benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score cameras against annotations (JaC per threshold, reprojection).
    Evaluate(EvaluateArgs),
    /// Evaluate several camera directories against the same annotations.
    Compare(CompareArgs),
    /// Fit a camera model to each annotation.
    Fit(FitArgs),
    /// Generate synthetic scenes with known cameras.
    Synth(SynthArgs),
    /// Draw SVG overlays of projected templates and annotations.
    Render(RenderArgs),
}

#[derive(Args, Clone)]
pub struct Shared {
    /// Pitch dimensions (JSON); defaults to a 105 × 68 m pitch.
    #[arg(long)]
    pub pitch: Option<PathBuf>,
    /// Template sampling step in meters.
    #[arg(long, default_value_t = pitchcal::metrics::DEFAULT_SPACING)]
    pub spacing: f64,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// How to read `X.homography` files: pixels_to_yards_corner,
    /// meters_to_pixels_center, or a JSON file with custom pre/post matrices.
    #[arg(long)]
    pub legacy_homography_convention: Option<String>,
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub annotations: PathBuf,
    #[arg(long)]
    pub cameras: Option<PathBuf>,
    /// Explicit image list, replacing directory pairing.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Pixel thresholds; repeat the flag or separate with commas.
    #[arg(long, value_delimiter = ',', default_values_t = [5.0, 2.0])]
    pub tau: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub shared: Shared,
}

#[derive(Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub annotations: PathBuf,
    /// Camera directories, as `DIR` or `NAME=DIR`; at least two.
    #[arg(long, required = true, num_args = 1..)]
    pub cameras: Vec<String>,
    #[arg(long, value_delimiter = ',', default_values_t = [5.0, 2.0])]
    pub tau: Vec<f64>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub shared: Shared,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitModel {
    Homography,
    PinholeRadial,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Fixed {
    Focal,
    Rotation,
    Translation,
    K1,
    K2,
}

impl From<Fixed> for FitParam {
    fn from(f: Fixed) -> Self {
        match f {
            Fixed::Focal => FitParam::Focal,
            Fixed::Rotation => FitParam::Rotation,
            Fixed::Translation => FitParam::Translation,
            Fixed::K1 => FitParam::K1,
            Fixed::K2 => FitParam::K2,
        }
    }
}

#[derive(Args)]
pub struct FitArgs {
    #[arg(long)]
    pub annotations: PathBuf,
    /// Seed cameras paired by stem; without one, the seed is a DLT homography
    /// from annotated line intersections.
    #[arg(long)]
    pub seeds: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FitModel::PinholeRadial)]
    pub model: FitModel,
    #[arg(long, default_value_t = 200)]
    pub max_iterations: usize,
    #[arg(long)]
    pub unlock_k2: bool,
    /// Parameter groups held at their seed values.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub fix: Vec<Fixed>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub shared: Shared,
}

#[derive(Args)]
pub struct SynthArgs {
    /// Number of scenes.
    #[arg(long, short)]
    pub n: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Scene configuration (JSON); its seed is replaced by --seed.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub shared: Shared,
}

#[derive(Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub annotations: PathBuf,
    #[arg(long)]
    pub cameras: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Threshold used to color the overlay.
    #[arg(long, default_value_t = 5.0)]
    pub tau: f64,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub shared: Shared,
}

/// How a command ended when it did not fail outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    Partial,
}

pub fn check_taus(taus: &[f64]) -> Result<()> {
    if taus.is_empty() {
        bail!("at least one --tau is required");
    }
    if let Some(t) = taus.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        bail!("--tau must be positive, got {t}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<Status> {
    match cli.command {
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::Synth(a) => commands::synth(&a),
        Command::Render(a) => commands::render(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(Status::Success) => ExitCode::SUCCESS,
        Ok(Status::Partial) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
