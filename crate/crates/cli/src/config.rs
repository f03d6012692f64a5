use std::path::{Path, PathBuf};

use clap::Args;
use frac_talenti::{BumpSource, LogBranch, Normalization, ProblemParams, RadialProfile, SourceFunction};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Every option a command may read. Fields come from an optional JSON file
/// given with `--config` and are then overridden by flags.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// JSON configuration file; flags given on the command line win.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Dimension N (1, 2 or 3).
    #[arg(long = "N")]
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,

    /// Order s of the fractional Laplacian.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,

    /// `delta` (default) or `green`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalization: Option<String>,

    /// `printed` (default) or `consistent`; only affects (N, s) = (1, 1/2).
    #[arg(long = "log-branch")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_branch: Option<String>,

    /// Radial step profile "r1:v1,r2:v2,...", last radius 1.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,

    /// Source in JSON form; only settable from the config file.
    #[arg(skip)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceFunction>,

    /// Bump centre or Green-check point ξ, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<f64>>,

    /// Bump radius ρ.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,

    /// Bump height (default 1).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,

    /// Evaluation point x.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,

    /// Second kernel point y.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,

    /// Boundary point θ.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Vec<f64>>,

    /// Exponent τ for the spherical moment.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,

    /// Largest k in the Martin limit sequence (default 20).
    #[arg(long = "k-max")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,

    /// Radii for the mass-concentration check.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,

    /// Decreasing ε values for the sharpness sweep.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,

    /// Radial grid size for interior profiles.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,

    /// Sphere rule order for boundary traces.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,

    /// Relative verdict tolerance (default 1e-7).
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,

    /// Quadrature tolerance (default 1e-8, 1e-6 in sweeps).
    #[arg(long = "quad-tol")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad_tol: Option<f64>,

    /// Seed for randomized suites (default 0).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    /// Number of random cases to draw instead of a single given source.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random: Option<usize>,

    /// Sweep values of s.
    #[arg(long = "s-values", value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_values: Option<Vec<f64>>,

    /// Sweep values of N.
    #[arg(long = "N-values", value_delimiter = ',')]
    #[serde(rename = "N_values", skip_serializing_if = "Option::is_none")]
    pub n_values: Option<Vec<usize>>,

    /// Worker threads for sweeps.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,

    /// JSON report path (stdout when absent).
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,

    /// CSV table path.
    #[arg(long)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident; $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl RunConfig {
    /// Reads `--config` if present and overlays the flags on top of it.
    pub fn load(flags: &RunConfig) -> Result<RunConfig, CliError> {
        let mut base = match &flags.config {
            Some(path) => read_config(path)?,
            None => RunConfig::default(),
        };
        overlay!(base, flags; dim, s, normalization, log_branch, profile, source, xi, rho, height, x, y,
            theta, tau, k_max, radii, epsilons, grid, order, tol, quad_tol, seed, random, s_values,
            n_values, threads, out, csv);
        if flags.profile.is_some() {
            base.source = None;
        }
        Ok(base)
    }
}

fn read_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(vec![format!("{}: {e}", path.display())]))
}

/// Collects every violation before reporting.
#[derive(Debug, Default)]
pub struct Validator {
    errors: Vec<String>,
}

impl Validator {
    pub fn error(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    pub fn finish(self) -> Result<(), CliError> {
        if self.errors.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(self.errors))
        }
    }

    pub fn check(&mut self, ok: bool, msg: impl Into<String>) {
        if !ok {
            self.error(msg);
        }
    }

    pub fn dim(&mut self, cfg: &RunConfig) -> Option<usize> {
        match cfg.dim {
            Some(n) if (1..=3).contains(&n) => Some(n),
            Some(n) => {
                self.error(format!("N = {n} is not supported (1, 2 or 3)"));
                None
            }
            None => {
                self.error("N is required (--N)");
                None
            }
        }
    }

    /// Normalization and log branch, both with defaults.
    pub fn conventions(&mut self, cfg: &RunConfig) -> Option<(Normalization, LogBranch)> {
        let normalization = match cfg.normalization.as_deref().map(str::parse::<Normalization>) {
            None => Some(Normalization::default()),
            Some(Ok(n)) => Some(n),
            Some(Err(e)) => {
                self.error(e);
                None
            }
        };
        let log_branch = match cfg.log_branch.as_deref().map(str::to_ascii_lowercase).as_deref() {
            None | Some("printed") => Some(LogBranch::Printed),
            Some("consistent") => Some(LogBranch::Consistent),
            Some(other) => {
                self.error(format!("unknown log branch `{other}` (printed or consistent)"));
                None
            }
        };
        Some((normalization?, log_branch?))
    }

    /// `ProblemParams` from `N`, `s`, normalization and log branch.
    pub fn params(&mut self, cfg: &RunConfig) -> Option<ProblemParams> {
        let dim = self.dim(cfg);
        let s = match cfg.s {
            Some(s) if s.is_finite() && s > 0.0 => Some(s),
            Some(s) => {
                self.error(format!("s = {s} must be positive"));
                None
            }
            None => {
                self.error("s is required (--s)");
                None
            }
        };
        let conv = self.conventions(cfg);
        let (dim, s, (normalization, log_branch)) = (dim?, s?, conv?);
        ProblemParams::new(dim, s)
            .map(|p| p.with_normalization(normalization).with_log_branch(log_branch))
            .map_err(|e| self.error(e.to_string()))
            .ok()
    }

    pub fn profile(&mut self, cfg: &RunConfig) -> Option<RadialProfile> {
        match self.source(cfg)? {
            SourceFunction::Radial(p) => Some(p),
            SourceFunction::Bump(_) => {
                self.error("a radial profile is required (--profile \"r1:v1,...,1:vk\")");
                None
            }
        }
    }

    /// The source from `--profile`, the config `source`, or a bump from
    /// `--xi/--rho/--height`.
    pub fn source(&mut self, cfg: &RunConfig) -> Option<SourceFunction> {
        if let Some(text) = &cfg.profile {
            return match RadialProfile::parse(text) {
                Ok(p) => Some(p.into()),
                Err(e) => {
                    self.error(e.to_string());
                    None
                }
            };
        }
        if let Some(src) = &cfg.source {
            return Some(src.clone());
        }
        if cfg.xi.is_some() && cfg.rho.is_some() {
            return self.bump(cfg).map(Into::into);
        }
        self.error("a source is required (--profile, --xi with --rho, or `source` in the config)");
        None
    }

    pub fn bump(&mut self, cfg: &RunConfig) -> Option<BumpSource> {
        let xi = cfg.xi.clone();
        let rho = cfg.rho;
        if xi.is_none() {
            self.error("--xi is required");
        }
        if rho.is_none() {
            self.error("--rho is required");
        }
        let (xi, rho) = (xi?, rho?);
        if let Some(n) = cfg.dim {
            if xi.len() != n {
                self.error(format!("--xi has {} components but N = {n}", xi.len()));
                return None;
            }
        }
        BumpSource::new(xi, rho, cfg.height.unwrap_or(1.0))
            .map_err(|e| self.error(e.to_string()))
            .ok()
    }

    pub fn point(&mut self, name: &str, value: &Option<Vec<f64>>, dim: Option<usize>) -> Option<Vec<f64>> {
        match value {
            None => {
                self.error(format!("--{name} is required"));
                None
            }
            Some(v) => {
                if let Some(n) = dim {
                    if v.len() != n {
                        self.error(format!("--{name} has {} components but N = {n}", v.len()));
                        return None;
                    }
                }
                Some(v.clone())
            }
        }
    }

    pub fn positive(&mut self, name: &str, value: Option<f64>, default: f64) -> f64 {
        let v = value.unwrap_or(default);
        self.check(v.is_finite() && v > 0.0, format!("{name} = {v} must be positive"));
        v
    }

    pub fn count(&mut self, name: &str, value: Option<usize>, default: usize, min: usize, max: usize) -> usize {
        let v = value.unwrap_or(default);
        self.check((min..=max).contains(&v), format!("{name} = {v} outside [{min}, {max}]"));
        v
    }
}
