//! Strict `key = value` configuration with `[section]` headers.

use std::path::{Path, PathBuf};

use dwlab_core::Rational;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: Option<String>,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub ensemble: EnsembleSection,
    #[serde(default)]
    pub exponents: ExponentSection,
    #[serde(default)]
    pub tolerances: ToleranceSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub d: Option<usize>,
    pub n: Option<usize>,
    #[serde(rename = "L")]
    pub box_length: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(rename = "T")]
    pub horizon: Option<f64>,
    pub steps: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub size: Option<usize>,
    pub seed: Option<u64>,
    pub spectrum: Option<String>,
    pub scales: Option<Vec<f64>>,
    pub bumps: Option<usize>,
}

/// Exponents are `"num/den"` or `"inf"` strings; bare numbers are rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentSection {
    pub q: Option<Rational>,
    pub r: Option<Rational>,
    pub qt: Option<Rational>,
    pub rt: Option<Rational>,
    pub endpoint: Option<bool>,
    pub kind: Option<String>,
    pub s: Option<f64>,
    pub loss_shift: Option<f64>,
    pub control_shifts: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSection {
    pub trend_slope_max: Option<f64>,
    pub slope_tol: Option<f64>,
    pub control_slope_min: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

pub fn parse(text: &str) -> Result<Config, String> {
    let cfg: Config = toml::from_str(text).map_err(|e| e.to_string())?;
    if let Some(s) = &cfg.ensemble.spectrum {
        if s != "mexican_hat" {
            return Err(format!("key `ensemble.spectrum`: unsupported family {s:?} (only \"mexican_hat\")"));
        }
    }
    Ok(cfg)
}

pub fn load(path: &Path) -> Result<Config, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}
