use super::CliError;
use crate::model::{build_system, DelayPlacement, DelaySystem, InteractionMatrix};
use crate::sim::HistoryFunction;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// One coefficient axis of a scan grid: `count` evenly spaced values in `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisRange {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl AxisRange {
    pub fn value(&self, k: usize) -> f64 {
        if self.count <= 1 {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) * k as f64 / (self.count - 1) as f64
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BaselineFilter {
    #[default]
    Any,
    Stable,
    Unstable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    /// Ranges for a11, a12, a21, a22; defaults to the integers in [−9, 9].
    #[serde(default)]
    pub ranges: Option<Vec<AxisRange>>,
    /// Switch counts for which witnesses are collected.
    #[serde(default)]
    pub requested: Vec<usize>,
    /// Fraction of counted grid points re-checked by the spectral oracle.
    #[serde(default = "default_verify_fraction")]
    pub verify_fraction: f64,
    /// Grid points processed before the result is flagged partial.
    #[serde(default = "default_max_points")]
    pub max_points: usize,
    #[serde(default)]
    pub baseline: BaselineFilter,
    /// Witnesses per requested count that are checked by the oracle.
    #[serde(default = "default_verified_witnesses")]
    pub verified_witnesses: usize,
    /// Cap on stored witness points per requested count.
    #[serde(default)]
    pub witness_limit: Option<usize>,
}

fn default_verify_fraction() -> f64 {
    1e-3
}

fn default_max_points() -> usize {
    10_000_000
}

fn default_verified_witnesses() -> usize {
    3
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            ranges: None,
            requested: Vec::new(),
            verify_fraction: default_verify_fraction(),
            max_points: default_max_points(),
            baseline: BaselineFilter::Any,
            verified_witnesses: default_verified_witnesses(),
            witness_limit: None,
        }
    }
}

impl ScanConfig {
    pub fn axes(&self) -> Result<[AxisRange; 4], CliError> {
        let Some(ranges) = &self.ranges else {
            return Ok([AxisRange {
                lo: -9.0,
                hi: 9.0,
                count: 19,
            }; 4]);
        };
        let axes: [AxisRange; 4] = ranges
            .as_slice()
            .try_into()
            .map_err(|_| CliError::Config(format!("scan needs 4 ranges, got {}", ranges.len())))?;
        for a in &axes {
            if !(a.lo.is_finite() && a.hi.is_finite() && a.lo <= a.hi) || a.count == 0 {
                return Err(CliError::Config(format!("invalid scan range {a:?}")));
            }
        }
        Ok(axes)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// `a11,a12,a21,a22` or `a11,a12,a21,a22,a23,a32,a33`.
    #[serde(default)]
    pub matrix: Option<Vec<f64>>,
    #[serde(default)]
    pub placement: Option<String>,
    /// Undelayed own-state coefficient of the `mixed_self` placement.
    #[serde(default)]
    pub a13: Option<f64>,
    #[serde(default)]
    pub tau: Option<f64>,
    #[serde(default)]
    pub tau_min: Option<f64>,
    #[serde(default)]
    pub tau_max: Option<f64>,
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub step: Option<f64>,
    /// Constant initial history; all ones when absent.
    #[serde(default)]
    pub history: Option<Vec<f64>>,
    #[serde(default)]
    pub scan: Option<ScanConfig>,
    /// Output directory.
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Write a gnuplot script next to the trajectory.
    #[serde(default)]
    pub plot: Option<bool>,
    /// Grid intervals of the numeric switch scan.
    #[serde(default)]
    pub oracle_grid: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn matrix(&self) -> Result<InteractionMatrix, CliError> {
        let c = self
            .matrix
            .as_ref()
            .ok_or_else(|| CliError::Config("no matrix given".into()))?;
        Ok(InteractionMatrix::from_coefficients(c)?)
    }

    pub fn placement(&self, dim: usize) -> Result<DelayPlacement, CliError> {
        match &self.placement {
            Some(name) => {
                if name.trim().eq_ignore_ascii_case("mixed_self") && self.a13.is_none() {
                    return Err(CliError::Config("mixed_self needs a13".into()));
                }
                Ok(DelayPlacement::parse(name, self.a13)?)
            }
            None if dim == 3 => Ok(DelayPlacement::TriadJOwn),
            None => Ok(DelayPlacement::Own),
        }
    }

    pub fn system(&self) -> Result<DelaySystem, CliError> {
        let m = self.matrix()?;
        let p = self.placement(m.dimension())?;
        Ok(build_system(m, p)?)
    }

    pub fn tau(&self) -> Result<f64, CliError> {
        let t = self.tau.ok_or_else(|| CliError::Config("no tau given".into()))?;
        non_negative("tau", t)
    }

    pub fn tau_min(&self) -> Result<f64, CliError> {
        non_negative("tau_min", self.tau_min.unwrap_or(0.0))
    }

    pub fn tau_max(&self, default: f64) -> Result<f64, CliError> {
        let t = self.tau_max.unwrap_or(default);
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Config(format!("tau_max must be positive, got {t}")));
        }
        Ok(t)
    }

    pub fn history(&self, dim: usize) -> Result<HistoryFunction, CliError> {
        match &self.history {
            None => Ok(HistoryFunction::constant_ones(dim)),
            Some(v) if v.len() == dim && v.iter().all(|x| x.is_finite()) => Ok(HistoryFunction::Constant(v.clone())),
            Some(v) => Err(CliError::Config(format!(
                "history needs {dim} finite values, got {v:?}"
            ))),
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

fn non_negative(name: &str, v: f64) -> Result<f64, CliError> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Config(format!(
            "{name} must be a finite non-negative number, got {v}"
        )))
    }
}
