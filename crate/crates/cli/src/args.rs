use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qpcircle::solver::ResidualForm;
use qpcircle::{MapFamily, MapSpec, Point2};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "qpcircle", version, about = "Quasiperiodic invariant circles of area-preserving planar maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether a seed orbit lies on an invariant circle.
    Classify(ClassifyArgs),
    /// Run the full recipe from a seed and store the solved circle system.
    Circle(CircleArgs),
    /// Continue a stored circle in its rotation number.
    Continue(ContinueArgs),
    /// Re-check a stored circle or family file.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MapName {
    Henon,
    Standard,
    Rotation,
    Twist,
}

impl From<MapName> for MapFamily {
    fn from(m: MapName) -> Self {
        match m {
            MapName::Henon => MapFamily::HenonAP,
            MapName::Standard => MapFamily::Standard,
            MapName::Rotation => MapFamily::Rotation,
            MapName::Twist => MapFamily::Twist,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormName {
    Auto,
    Quadratic,
    Recast,
    Sampled,
}

impl From<FormName> for ResidualForm {
    fn from(f: FormName) -> Self {
        match f {
            FormName::Auto => ResidualForm::Auto,
            FormName::Quadratic => ResidualForm::Quadratic,
            FormName::Recast => ResidualForm::Recast,
            FormName::Sampled => ResidualForm::Sampled,
        }
    }
}

#[derive(Clone, Debug, Args)]
pub struct MapArgs {
    #[arg(long, value_enum, default_value = "henon")]
    pub map: MapName,
    /// Map parameter in radians.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "alpha_cos")]
    pub alpha: Option<f64>,
    /// Sets alpha = acos(value).
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_cos: Option<f64>,
}

impl MapArgs {
    pub fn spec(&self) -> Result<MapSpec<f64>, CliError> {
        let alpha = match (self.alpha, self.alpha_cos) {
            (Some(a), None) => a,
            (None, Some(c)) if (-1.0..=1.0).contains(&c) => c.acos(),
            (None, Some(c)) => return Err(CliError::Usage(format!("--alpha-cos {c} is outside [-1, 1]"))),
            (None, None) => return Err(CliError::Usage("one of --alpha or --alpha-cos is required".into())),
            (Some(_), Some(_)) => return Err(CliError::Usage("--alpha and --alpha-cos are exclusive".into())),
        };
        if !alpha.is_finite() {
            return Err(CliError::Usage("alpha must be finite".into()));
        }
        Ok(MapSpec::new(self.map.into(), alpha))
    }
}

/// Parses `x,y`.
pub fn parse_point(s: &str) -> Result<Point2<f64>, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y but got `{s}`"))?;
    let x: f64 = x.trim().parse().map_err(|e| format!("bad x in `{s}`: {e}"))?;
    let y: f64 = y.trim().parse().map_err(|e| format!("bad y in `{s}`: {e}"))?;
    if !(x.is_finite() && y.is_finite()) {
        return Err(format!("point `{s}` is not finite"));
    }
    Ok(Point2::new(x, y))
}

#[derive(Clone, Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub seed: Point2<f64>,
    /// Orbit length, counted in iterates of the period map.
    #[arg(long, default_value_t = 200_000)]
    pub m: usize,
    /// Projection center; defaults to the map's elliptic fixed point.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub center: Option<Point2<f64>>,
    #[arg(long, default_value_t = 1)]
    pub period: usize,
    #[arg(long, default_value_t = qpcircle::birkhoff::DEFAULT_CLASSIFY_TOL)]
    pub tol: f64,
    /// Writes the classification report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct CircleArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub seed: Point2<f64>,
    #[arg(long, default_value_t = 1)]
    pub period: usize,
    /// Fixes the truncation order instead of estimating it.
    #[arg(long)]
    pub n_modes: Option<usize>,
    #[arg(long)]
    pub max_modes: Option<usize>,
    #[arg(long)]
    pub m_classify: Option<usize>,
    #[arg(long)]
    pub m_rho: Option<usize>,
    #[arg(long)]
    pub m_coeff: Option<usize>,
    #[arg(long, value_enum, default_value = "auto")]
    pub form: FormName,
    #[arg(long)]
    pub out: PathBuf,
    /// CSV of curve samples with columns theta,x,y,component_index.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Samples per component in the CSV.
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    /// Reduces x modulo 2 pi in the CSV.
    #[arg(long)]
    pub mod_2pi: bool,
}

#[derive(Clone, Debug, Args)]
pub struct ContinueArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Sign of the rotation-number increment.
    #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
    pub direction: i32,
    #[arg(long, default_value_t = 500)]
    pub max_steps: usize,
    #[arg(long, default_value_t = 1e-13)]
    pub min_step: f64,
    #[arg(long, default_value_t = 256)]
    pub n_max: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub record_tol: f64,
    #[arg(long, default_value_t = 1e6)]
    pub blowup_factor: f64,
}

#[derive(Clone, Debug, Args)]
pub struct VerifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1e-10)]
    pub defect_tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub unfolding_tol: f64,
    #[arg(long, default_value_t = 1e-7)]
    pub area_tol: f64,
    #[arg(long, default_value_t = qpcircle::fourier::SYMMETRY_TOL)]
    pub symmetry_tol: f64,
}
