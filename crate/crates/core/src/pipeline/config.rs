use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::colorfilter::{FilterConfig, Fusion, HsvRange};
use crate::dbscan::DbscanParams;
use crate::retinex::{auto_sigma, SsrParams, DEFAULT_EPSILON_FLOOR};

/// Masks with more true pixels than this are pooled 2×2 before clustering
/// when decimation is enabled.
pub const DECIMATE_ABOVE: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldIssue {
    pub field: String,
    pub message: String,
}

/// One or more invalid configuration fields.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigError {
    pub issues: Vec<FieldIssue>,
}

impl ConfigError {
    pub fn single(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            issues: vec![FieldIssue {
                field: field.into(),
                message: message.into(),
            }],
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: ")?;
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{}: {}", issue.field, issue.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Retinex settings; `sigma: null` picks [`auto_sigma`] per image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SsrConfig {
    pub sigma: Option<f64>,
    pub epsilon_floor: f64,
}

impl Default for SsrConfig {
    fn default() -> Self {
        Self {
            sigma: None,
            epsilon_floor: DEFAULT_EPSILON_FLOOR,
        }
    }
}

impl SsrConfig {
    pub fn resolve(&self, width: usize, height: usize) -> SsrParams {
        SsrParams {
            sigma: self.sigma.unwrap_or_else(|| auto_sigma(width, height)),
            epsilon_floor: self.epsilon_floor,
        }
    }

    fn check(&self, issues: &mut Vec<FieldIssue>) {
        if let Some(s) = self.sigma {
            if !(s > 0.0 && s.is_finite()) {
                push(issues, "ssr.sigma", format!("must be positive, got {s}"));
            }
        }
        let e = self.epsilon_floor;
        if !(e > 0.0 && e <= 1e-3) {
            push(issues, "ssr.epsilon_floor", format!("must be in (0, 1e-3], got {e}"));
        }
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DbscanConfig {
    pub eps: f64,
    pub min_pts: usize,
    /// Pool very large masks 2×2 before clustering.
    #[serde(default, skip_serializing_if = "is_false")]
    pub decimate: bool,
}

impl Default for DbscanConfig {
    fn default() -> Self {
        let p = DbscanParams::default();
        Self {
            eps: p.eps,
            min_pts: p.min_pts,
            decimate: false,
        }
    }
}

impl DbscanConfig {
    pub fn params(&self) -> DbscanParams {
        DbscanParams {
            eps: self.eps,
            min_pts: self.min_pts,
        }
    }

    pub fn decimate_above(&self) -> Option<usize> {
        self.decimate.then_some(DECIMATE_ABOVE)
    }
}

/// Artifacts to write next to each report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Emit {
    pub mask: bool,
    pub overlay: bool,
    pub report: bool,
    /// Fused colour/threshold mask before clustering.
    pub premask: bool,
}

impl std::str::FromStr for Emit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut emit = Emit::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "mask" => emit.mask = true,
                "overlay" => emit.overlay = true,
                "report" => emit.report = true,
                "premask" => emit.premask = true,
                other => {
                    return Err(format!(
                        "unknown artifact `{other}` (expected mask, overlay, report, premask)"
                    ))
                }
            }
        }
        Ok(emit)
    }
}

/// Every tunable of the pipeline. Serializes to the JSON config file schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub ssr: SsrConfig,
    #[serde(flatten)]
    pub filter: FilterConfig,
    pub dbscan: DbscanConfig,
    pub min_area: usize,
    pub rust_threshold_pct: f64,
    #[serde(skip)]
    pub emit: Emit,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            ssr: SsrConfig::default(),
            filter: FilterConfig::default(),
            dbscan: DbscanConfig::default(),
            min_area: 64,
            rust_threshold_pct: 0.5,
            emit: Emit::default(),
        }
    }
}

fn push(issues: &mut Vec<FieldIssue>, field: impl Into<String>, message: String) {
    issues.push(FieldIssue {
        field: field.into(),
        message,
    });
}

pub(crate) fn check_ranges(ranges: &[HsvRange], issues: &mut Vec<FieldIssue>) {
    if ranges.is_empty() {
        push(issues, "ranges", "at least one range is required".into());
    }
    for (i, r) in ranges.iter().enumerate() {
        for (field, message) in r.problems() {
            push(issues, format!("ranges[{i}].{field}"), message);
        }
    }
}

pub(crate) fn check_ssr(ssr: &SsrConfig, issues: &mut Vec<FieldIssue>) {
    ssr.check(issues);
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut issues = Vec::new();
        self.ssr.check(&mut issues);
        check_ranges(&self.filter.ranges, &mut issues);
        if !(self.dbscan.eps > 0.0 && self.dbscan.eps.is_finite()) {
            push(&mut issues, "dbscan.eps", format!("must be positive, got {}", self.dbscan.eps));
        }
        if self.dbscan.min_pts == 0 {
            push(&mut issues, "dbscan.min_pts", "must be at least 1".into());
        }
        let pct = self.rust_threshold_pct;
        if !(0.0..=100.0).contains(&pct) {
            push(&mut issues, "rust_threshold_pct", format!("{pct} not in [0, 100]"));
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ConfigError { issues })
        }
    }

    pub fn fusion(&self) -> Fusion {
        self.filter.fusion
    }

    /// Parses and validates a JSON config body.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: PipelineConfig = serde_json::from_str(text)
            .map_err(|e| ConfigError::single("<json>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::single("<file>", format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Canonical pretty-printed JSON; stable across export/import cycles.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}
