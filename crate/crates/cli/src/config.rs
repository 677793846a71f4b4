//! Run and sweep configuration files (JSON) and their validation.
//!
//! Every error is anchored to a line of the file: syntax errors through the
//! parser position, semantic errors through the first line that mentions the
//! offending key.

use std::fmt;
use std::path::{Path, PathBuf};

use bps_vortex::{GridSpec, SigmaModel, SolverConfig, VortexSet};
use serde::{Deserialize, Serialize};

pub const DEFAULT_SWEEP_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physical {
    pub g: f64,
    pub v0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialSettings {
    pub outer_radius: Option<f64>,
    #[serde(default = "default_radial_nodes")]
    pub nodes: usize,
}

fn default_radial_nodes() -> usize {
    4001
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSpec,
    #[serde(default)]
    pub sigma: SigmaModel,
    #[serde(default = "VortexSet::vacuum")]
    pub vortices: VortexSet,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical: Option<Physical>,
    /// Output directory; relative paths are taken from the config file's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Settings of the 1-D oracle for the `oracle` subcommand.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial: Option<RadialSettings>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    #[serde(default)]
    pub beta: Vec<f64>,
    #[serde(default)]
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub lambda: Vec<f64>,
    #[serde(default, rename = "L")]
    pub half_width: Vec<f64>,
    #[serde(default, rename = "N")]
    pub points: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: RunConfig,
    #[serde(default)]
    pub axes: SweepAxes,
    /// Manifest file; defaults to `manifest.csv` in the base output directory.
    #[serde(default)]
    pub manifest: Option<PathBuf>,
    #[serde(default = "default_cap")]
    pub cap: usize,
}

fn default_cap() -> usize {
    DEFAULT_SWEEP_CAP
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub file: PathBuf,
    pub line: Option<usize>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.file.display())?;
        if let Some(line) = self.line {
            write!(f, ":{line}")?;
            if let Some(col) = self.column {
                write!(f, ":{col}")?;
            }
        }
        write!(f, ": config error: {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

/// A parsed configuration together with its source text, for anchoring
/// later validation errors.
#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub value: T,
    pub path: PathBuf,
    pub text: String,
}

impl<T> Loaded<T> {
    /// Error pointing at the first line that mentions `key` after `section`
    /// (or anywhere, if the section is not found).
    pub fn error_at(
        &self,
        section: Option<&str>,
        key: &str,
        message: impl Into<String>,
    ) -> ConfigError {
        ConfigError {
            file: self.path.clone(),
            line: locate_key(&self.text, section, key),
            column: None,
            message: message.into(),
        }
    }

    pub fn base_dir(&self) -> PathBuf {
        self.path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default()
    }
}

fn locate_key(text: &str, section: Option<&str>, key: &str) -> Option<usize> {
    let quoted = |k: &str| format!("\"{k}\"");
    let start = match section {
        Some(s) => text
            .lines()
            .position(|l| l.contains(&quoted(s)))
            .unwrap_or(0),
        None => 0,
    };
    text.lines()
        .enumerate()
        .skip(start)
        .find(|(_, l)| l.contains(&quoted(key)))
        .or_else(|| section.map(|_| (start, "")))
        .map(|(i, _)| i + 1)
}

pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Loaded<T>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        file: path.to_path_buf(),
        line: None,
        column: None,
        message: format!("cannot read file: {e}"),
    })?;
    let value = serde_json::from_str(&text).map_err(|e| ConfigError {
        file: path.to_path_buf(),
        line: Some(e.line()),
        column: Some(e.column()),
        message: e.to_string(),
    })?;
    Ok(Loaded {
        value,
        path: path.to_path_buf(),
        text,
    })
}

impl Loaded<RunConfig> {
    /// Checks the grid and the impurity profile only (what `check` needs).
    pub fn validate_sigma(&self) -> Result<(), ConfigError> {
        let c = &self.value;
        c.sigma
            .validate()
            .and_then(|_| bps_vortex::eval_sigma(&c.sigma, &c.grid).map(|_| ()))
            .map_err(|e| self.error_at(Some("sigma"), "type", e.to_string()))?;
        if let Some(p) = c.physical {
            if !(p.g.is_finite() && p.g > 0.0 && p.v0.is_finite() && p.v0 > 0.0) {
                return Err(self.error_at(Some("physical"), "g", "g and v0 must be positive"));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.validate_sigma()?;
        let c = &self.value;
        if let Err(e) = c.vortices.validate(&c.grid) {
            let key = if e.to_string().contains("lambda") {
                "lambda"
            } else {
                "n"
            };
            return Err(self.error_at(Some("vortices"), key, e.to_string()));
        }
        c.solver
            .validate()
            .map_err(|m| self.error_at(Some("solver"), "solver", m))?;
        if let Some(r) = &c.radial {
            if let Some(radius) = r.outer_radius {
                if !(radius.is_finite() && radius > 0.0) {
                    return Err(self.error_at(
                        Some("radial"),
                        "outer_radius",
                        "outer_radius must be positive",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn output_dir(&self, override_dir: Option<&Path>) -> PathBuf {
        match override_dir {
            Some(d) => d.to_path_buf(),
            None => {
                let out = self
                    .value
                    .output
                    .clone()
                    .unwrap_or_else(|| PathBuf::from("."));
                if out.is_absolute() {
                    out
                } else {
                    self.base_dir().join(out)
                }
            }
        }
    }
}

/// Parameters of one sweep cell, in manifest order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellParams {
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
    pub n: usize,
    pub lambda: f64,
    pub half_width: f64,
    pub points: usize,
}

impl Loaded<SweepConfig> {
    pub fn base(&self) -> Loaded<RunConfig> {
        Loaded {
            value: self.value.base.clone(),
            path: self.path.clone(),
            text: self.text.clone(),
        }
    }

    /// Cartesian product of the axes, last axis fastest, axis order
    /// beta, alpha, n, lambda, L, N. Empty axes keep the base value.
    pub fn cells(&self) -> Result<Vec<(CellParams, RunConfig)>, ConfigError> {
        let s = &self.value;
        let axes = &s.axes;
        let lens = [
            axes.beta.len(),
            axes.alpha.len(),
            axes.n.len(),
            axes.lambda.len(),
            axes.half_width.len(),
            axes.points.len(),
        ];
        let size = lens
            .iter()
            .try_fold(1usize, |acc, &k| acc.checked_mul(k.max(1)));
        match size {
            Some(k) if k <= s.cap => {}
            _ => {
                return Err(self.error_at(
                    Some("axes"),
                    "axes",
                    format!("sweep size exceeds the cap of {} cells", s.cap),
                ))
            }
        }
        let gaussian = s.base.sigma.gaussian_terms().filter(|t| t.len() == 1);
        if (!axes.beta.is_empty() || !axes.alpha.is_empty()) && gaussian.is_none() {
            return Err(self.error_at(
                Some("base"),
                "sigma",
                "alpha/beta axes need a single-Gaussian base sigma",
            ));
        }

        let total = size.unwrap_or(0);
        let mut out = Vec::with_capacity(total);
        for cell in 0..total {
            // mixed-radix digits, last axis fastest; an empty axis has one "keep" digit
            let mut digits = [None; 6];
            let mut rest = cell;
            for (d, &len) in digits.iter_mut().zip(&lens).rev() {
                if len > 0 {
                    *d = Some(rest % len);
                    rest /= len;
                }
            }
            let pick = |v: &[f64], d: Option<usize>| d.map(|i| v[i]);
            let (beta, alpha) = (pick(&axes.beta, digits[0]), pick(&axes.alpha, digits[1]));
            let n = digits[2].map(|i| axes.n[i]);
            let lambda = pick(&axes.lambda, digits[3]);
            let half_width = pick(&axes.half_width, digits[4]);
            let points = digits[5].map(|i| axes.points[i]);

            let mut cfg = s.base.clone();
            if let (Some(g), true) = (&gaussian, beta.is_some() || alpha.is_some()) {
                let t = g[0];
                cfg.sigma = SigmaModel::Gaussian {
                    alpha: alpha.unwrap_or(t.alpha),
                    beta: beta.unwrap_or(t.beta),
                    center: t.center,
                };
            }
            if let Some(n) = n.filter(|&n| n != cfg.vortices.n) {
                cfg.vortices = VortexSet {
                    n,
                    positions: None,
                    lambda: cfg.vortices.lambda,
                };
            }
            if lambda.is_some() {
                cfg.vortices.lambda = lambda;
            }
            if half_width.is_some() || points.is_some() {
                let l = half_width.unwrap_or(cfg.grid.half_width());
                let p = points.unwrap_or(cfg.grid.points_per_side());
                let key = if half_width.is_some() { "L" } else { "N" };
                cfg.grid = GridSpec::new(l, p)
                    .map_err(|e| self.error_at(Some("axes"), key, e.to_string()))?;
            }
            let single = cfg.sigma.gaussian_terms().filter(|t| t.len() == 1);
            let params = CellParams {
                beta: single.as_ref().map(|t| t[0].beta),
                alpha: single.as_ref().map(|t| t[0].alpha),
                n: cfg.vortices.n,
                lambda: cfg.vortices.lambda(),
                half_width: cfg.grid.half_width(),
                points: cfg.grid.points_per_side(),
            };
            out.push((params, cfg));
        }
        Ok(out)
    }

    pub fn manifest_path(&self, output_dir: &Path) -> PathBuf {
        match &self.value.manifest {
            Some(m) if m.is_absolute() => m.clone(),
            Some(m) => self.base_dir().join(m),
            None => output_dir.join("manifest.csv"),
        }
    }
}
