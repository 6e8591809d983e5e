//! Declarative run configuration (JSON file plus flag overrides).

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Deserialize;

use nlgc_core::dp::{Bandwidth, BandwidthRule};
use nlgc_core::nonlin::BdsConfig;
use nlgc_core::pipeline::{Analysis, AnalysisSettings};
use nlgc_core::stationarity::Deterministic;
use nlgc_core::windows::{FamilyKind, PipelineConfig};

/// One input series: ticker label and CSV path (`date,price` header).
#[derive(Debug, Clone, Deserialize)]
pub struct InputSpec {
    pub ticker: String,
    pub path: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandwidthSection {
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub floor: Option<f64>,
    #[serde(default)]
    pub cap: Option<f64>,
    /// Fixed bandwidth overriding the rule everywhere.
    #[serde(default)]
    pub fixed: Option<f64>,
    /// Per-window overrides keyed "family/label", e.g. "expanding/1991".
    #[serde(default)]
    pub overrides: BTreeMap<String, f64>,
}

fn default_c() -> f64 {
    BandwidthRule::default().c
}

fn default_beta() -> f64 {
    BandwidthRule::default().beta
}

impl Default for BandwidthSection {
    fn default() -> Self {
        Self {
            c: default_c(),
            beta: default_beta(),
            floor: None,
            cap: None,
            fixed: None,
            overrides: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinSection {
    #[serde(default = "default_bds_dim")]
    pub bds_max_dim: usize,
    #[serde(default = "default_bds_multipliers")]
    pub bds_multipliers: Vec<f64>,
    #[serde(default = "default_tsay_lags")]
    pub tsay_lags: usize,
    /// AR bound for pre-whitening; null uses the Schwert bound.
    #[serde(default)]
    pub prewhiten_max_lag: Option<usize>,
}

fn default_bds_dim() -> usize {
    4
}

fn default_bds_multipliers() -> Vec<f64> {
    vec![0.5, 1.0, 1.5, 2.0]
}

fn default_tsay_lags() -> usize {
    7
}

impl Default for NonlinSection {
    fn default() -> Self {
        Self {
            bds_max_dim: default_bds_dim(),
            bds_multipliers: default_bds_multipliers(),
            tsay_lags: default_tsay_lags(),
            prewhiten_max_lag: None,
        }
    }
}

/// Full run configuration.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Exactly three inputs, in (x, y, z) column order.
    pub inputs: Vec<InputSpec>,
    /// Optional inclusive date range filter, ISO-8601.
    #[serde(default)]
    pub start: Option<String>,
    #[serde(default)]
    pub end: Option<String>,
    /// Analyses to run; default all.
    #[serde(default = "default_analyses")]
    pub analyses: Vec<String>,
    /// Window families for the causality stage; default all four.
    #[serde(default = "default_families")]
    pub windows: Vec<String>,
    /// Battery depth (lags 1..=lags).
    #[serde(default = "default_lags")]
    pub lags: usize,
    #[serde(default = "default_var_max_lag")]
    pub var_max_lag: usize,
    #[serde(default = "default_min_years")]
    pub min_years: usize,
    #[serde(default)]
    pub bandwidth: BandwidthSection,
    #[serde(default)]
    pub nonlinearity: NonlinSection,
    /// Unit-root BIC bound; null uses the Schwert bound.
    #[serde(default)]
    pub unit_root_max_lag: Option<usize>,
    /// Deterministic terms for the unit-root block: "both", "trend", "drift".
    #[serde(default = "default_unit_root_spec")]
    pub unit_root_spec: String,
    pub output_dir: PathBuf,
}

fn default_analyses() -> Vec<String> {
    ["descriptive", "unit_root", "nonlinearity", "causality"]
        .map(String::from)
        .to_vec()
}

fn default_families() -> Vec<String> {
    ["full", "expanding", "anchored", "yearly"].map(String::from).to_vec()
}

fn default_lags() -> usize {
    5
}

fn default_unit_root_spec() -> String {
    "both".into()
}

fn default_var_max_lag() -> usize {
    10
}

fn default_min_years() -> usize {
    5
}

pub fn parse_analysis(name: &str) -> Result<Analysis, String> {
    match name {
        "descriptive" => Ok(Analysis::Descriptive),
        "unit_root" => Ok(Analysis::UnitRoot),
        "nonlinearity" => Ok(Analysis::Nonlinearity),
        "causality" => Ok(Analysis::Causality),
        other => Err(format!(
            "unknown analysis {other:?} (expected descriptive|unit_root|nonlinearity|causality)"
        )),
    }
}

pub fn parse_family(name: &str) -> Result<FamilyKind, String> {
    match name {
        "full" => Ok(FamilyKind::Full),
        "expanding" => Ok(FamilyKind::Expanding),
        "anchored" => Ok(FamilyKind::AnchoredEnd),
        "yearly" => Ok(FamilyKind::Yearly),
        other => Err(format!(
            "unknown window family {other:?} (expected full|expanding|anchored|yearly)"
        )),
    }
}

impl RunConfig {
    /// Translate into library settings, validating every field.
    pub fn to_settings(&self) -> Result<AnalysisSettings, String> {
        if self.inputs.len() != 3 {
            return Err(format!("exactly three inputs required, got {}", self.inputs.len()));
        }
        let analyses: Vec<Analysis> = self
            .analyses
            .iter()
            .map(|a| parse_analysis(a))
            .collect::<Result<_, _>>()?;
        if analyses.is_empty() {
            return Err("at least one analysis must be selected".into());
        }
        let families: Vec<FamilyKind> = self
            .windows
            .iter()
            .map(|f| parse_family(f))
            .collect::<Result<_, _>>()?;
        if self.lags == 0 {
            return Err("lags must be >= 1".into());
        }

        let bandwidth = match self.bandwidth.fixed {
            Some(e) if e > 0.0 => Bandwidth::Fixed(e),
            Some(e) => return Err(format!("fixed bandwidth {e} must be positive")),
            None => {
                let rule = BandwidthRule {
                    c: self.bandwidth.c,
                    beta: self.bandwidth.beta,
                    floor: self.bandwidth.floor,
                    cap: self.bandwidth.cap,
                };
                rule.validate().map_err(|e| e.to_string())?;
                Bandwidth::Rule(rule)
            }
        };

        let unit_root_deterministics = match self.unit_root_spec.as_str() {
            "both" => vec![Deterministic::TrendAndIntercept, Deterministic::Drift],
            "trend" => vec![Deterministic::TrendAndIntercept],
            "drift" => vec![Deterministic::Drift],
            other => {
                return Err(format!(
                    "unknown unit_root_spec {other:?} (expected both|trend|drift)"
                ))
            }
        };

        Ok(AnalysisSettings {
            analyses,
            families,
            window: PipelineConfig {
                lags: self.lags,
                var_max_lag: self.var_max_lag,
                bandwidth,
                epsilon_overrides: self.bandwidth.overrides.clone(),
                min_years: self.min_years,
            },
            bds: BdsConfig {
                max_dim: self.nonlinearity.bds_max_dim,
                eps_multipliers: self.nonlinearity.bds_multipliers.clone(),
                min_n: 200,
            },
            prewhiten_max_lag: self.nonlinearity.prewhiten_max_lag,
            tsay_lags: self.nonlinearity.tsay_lags,
            unit_root_max_lag: self.unit_root_max_lag,
            unit_root_deterministics,
        })
    }
}
