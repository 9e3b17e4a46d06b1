use std::fmt;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;

use np3_core::catalog::{self, CatalogEntry, CatalogParams, FieldEntry};
use np3_core::sampling::DEFAULT_SEED;
use np3_core::triad::NumericConfig;
use np3_core::Error;

use crate::Status;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Args, Debug, Clone)]
pub struct CatalogArgs {
    /// Parameter override, `r=<radius>` or `lambda=<stretch>`; repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Built-in manifold id (see `catalog list`).
    #[arg(long, required_unless_present = "metric_file", conflicts_with = "metric_file")]
    pub manifold: Option<String>,
    /// TOML file with metric component expressions, instead of --manifold.
    #[arg(long)]
    pub metric_file: Option<PathBuf>,
    /// Vector field id on the chosen manifold.
    #[arg(long)]
    pub field: String,
    /// Parameter override, `r=<radius>` or `lambda=<stretch>`; repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    /// Chart coordinates "u1,u2,u3"; replaces sampling or the default flow start.
    #[arg(long, value_parser = parse_point)]
    pub point: Option<[f64; 3]>,
    /// Number of seeded sample points.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Finite-difference step for metric partials of charts without analytic partials.
    #[arg(long)]
    pub fd_step: Option<f64>,
    /// Flow length in geodesic parameter.
    #[arg(long)]
    pub length: Option<f64>,
    /// Flow integration step.
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the primary output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn parse_point(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected three comma-separated numbers, got `{s}`"));
    }
    let mut out = [0.0; 3];
    for (slot, p) in out.iter_mut().zip(&parts) {
        *slot = p.parse::<f64>().map_err(|_| format!("`{p}` is not a number"))?;
        if !slot.is_finite() {
            return Err(format!("`{p}` is not finite"));
        }
    }
    Ok(out)
}

pub fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (key, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let key = key.trim();
    if key != "r" && key != "lambda" {
        return Err(format!("unknown parameter `{key}` (expected r or lambda)"));
    }
    let v = value
        .trim()
        .parse::<f64>()
        .map_err(|_| format!("`{value}` is not a number"))?;
    Ok((key.to_string(), v))
}

pub fn catalog_params(params: &[(String, f64)]) -> CatalogParams {
    let mut out = CatalogParams::default();
    for (k, v) in params {
        match k.as_str() {
            "r" => out.r = Some(*v),
            _ => out.lambda = Some(*v),
        }
    }
    out
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
    Io(String),
}

impl CliError {
    pub fn status(&self) -> Status {
        match self {
            CliError::Usage(_) | CliError::Io(_) => Status::Usage,
            CliError::Core(e) => core_status(e),
        }
    }
}

/// Configuration and hypothesis errors exit 2, numerical failures exit 3.
pub fn core_status(e: &Error) -> Status {
    match e {
        Error::PointOutsideChart { .. }
        | Error::StepNotPositive(_)
        | Error::NotUnitVelocity(_)
        | Error::NotGeodesicField { .. }
        | Error::HypothesesViolated(_)
        | Error::UnknownManifold(_)
        | Error::UnknownField { .. }
        | Error::BadParameter(_)
        | Error::Expression(_)
        | Error::MetricFile(_) => Status::Usage,
        Error::MetricNotPositiveDefinite { .. }
        | Error::StencilLeavesChart { .. }
        | Error::LeftChartDomain { .. }
        | Error::ZeroField { .. }
        | Error::NotUnitField { .. }
        | Error::FrameSeedDegenerate(_)
        | Error::NonFinite(_) => Status::Numeric,
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

/// Everything that determines a run's output, echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub manifold_id: String,
    pub field_id: String,
    pub params: CatalogParams,
    pub metric_file: Option<PathBuf>,
    pub point: Option<[f64; 3]>,
    pub samples: Option<usize>,
    pub seed: u64,
    pub sample_box: [(f64, f64); 3],
    pub tol: f64,
    pub fd_step: f64,
    pub analytic_partials: bool,
    pub numeric: NumericConfig,
    pub length: Option<f64>,
    pub step: Option<f64>,
    pub format: Format,
    pub out: Option<PathBuf>,
}

pub struct Run {
    pub cfg: RunConfig,
    pub entry: CatalogEntry,
    pub field: FieldEntry,
}

pub struct Defaults {
    pub command: &'static str,
    /// Tolerance for analytic-partial charts; charts without analytic
    /// partials use `fd_tol`.
    pub tol: f64,
    pub fd_tol: f64,
    pub format: Format,
    pub flow: bool,
    pub sampled: bool,
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("--{name} must be positive, got {v}")))
    }
}

impl Run {
    pub fn resolve(args: &RunArgs, d: Defaults) -> Result<Self, CliError> {
        let mut entry = match (&args.manifold, &args.metric_file) {
            (_, Some(path)) => {
                if !args.params.is_empty() {
                    return Err(CliError::Usage("--param does not apply to --metric-file".into()));
                }
                catalog::load_metric_file(path)?
            }
            (Some(id), None) => catalog::load(id, catalog_params(&args.params))?,
            (None, None) => return Err(CliError::Usage("one of --manifold or --metric-file is required".into())),
        };
        if let Some(h) = args.fd_step {
            entry.chart = entry.chart.clone().with_fd_step(positive("fd-step", h)?);
        }
        let field = entry.field(&args.field)?.clone();
        let analytic = entry.chart.has_analytic_partials();
        let tol = match args.tol {
            Some(t) => positive("tol", t)?,
            None if analytic => d.tol,
            None => d.fd_tol,
        };
        if let Some(n) = args.samples {
            if n == 0 {
                return Err(CliError::Usage("--samples must be at least 1".into()));
            }
        }
        let (length, step) = if d.flow {
            let length = args.length.unwrap_or(field.flow_length);
            if !(length >= 0.0 && length.is_finite()) {
                return Err(CliError::Usage(format!("--length must be nonnegative, got {length}")));
            }
            (Some(length), Some(positive("step", args.step.unwrap_or(1e-3))?))
        } else {
            (None, None)
        };
        let samples = if d.sampled && args.point.is_none() {
            Some(args.samples.unwrap_or(entry.default_samples))
        } else {
            None
        };
        let cfg = RunConfig {
            command: d.command,
            manifold_id: entry.manifold_id.clone(),
            field_id: field.spec.field_id.clone(),
            params: entry.params,
            metric_file: args.metric_file.clone(),
            point: args.point,
            samples,
            seed: args.seed,
            sample_box: field.sample_box,
            tol,
            fd_step: entry.chart.fd_step,
            analytic_partials: analytic,
            numeric: NumericConfig::default(),
            length,
            step,
            format: args.format.unwrap_or(d.format),
            out: args.out.clone(),
        };
        Ok(Run { cfg, entry, field })
    }

    /// The explicit point, or `fallback` when none was given.
    pub fn point_or(&self, fallback: [f64; 3]) -> [f64; 3] {
        self.cfg.point.unwrap_or(fallback)
    }

    /// The explicit point, or seeded samples from the field's box.
    pub fn points(&self) -> Result<Vec<[f64; 3]>, CliError> {
        if let Some(p) = self.cfg.point {
            self.entry.chart.check_point(&p)?;
            return Ok(vec![p]);
        }
        let n = self.cfg.samples.unwrap_or(self.entry.default_samples);
        let reach = self.cfg.numeric.reach(&self.entry.chart);
        Ok(np3_core::sampling::sample_points(
            &self.entry.chart,
            &self.field.sample_box,
            n,
            self.cfg.seed,
            reach,
        )?)
    }
}
