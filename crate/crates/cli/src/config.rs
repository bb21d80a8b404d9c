//! Run configuration: one JSON document drives every stage.
//!
//! Defaults match the pipeline's reference constants (500 m neighborhood
//! radius, 1000-word vocabulary, top-10 explanations). The configuration
//! is echoed verbatim into reports and manifests; snapshot paths may be
//! workdir-relative so reruns in different workdirs stay byte-identical.

use std::path::{Path, PathBuf};

use bizsurv_core::corpus::synth::SynthConfig;
use bizsurv_core::learn::{HyperParams, ModelKind, SmoteConfig};
use bizsurv_core::text::PolarityMap;
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Survival,
    Sentiment,
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Task::Survival => f.write_str("survival"),
            Task::Sentiment => f.write_str("sentiment"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExplainSettings {
    pub top_k: usize,
    pub num_samples: usize,
    pub text_num_samples: usize,
    /// None: 0.75 * sqrt(#features) for tabular models.
    pub kernel_width: Option<f64>,
    pub text_kernel_width: f64,
    pub ridge_alpha: f64,
}

impl Default for ExplainSettings {
    fn default() -> Self {
        ExplainSettings {
            top_k: 10,
            num_samples: 5000,
            text_num_samples: 3000,
            kernel_width: None,
            text_kernel_width: 0.25,
            ridge_alpha: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Snapshot directories; relative paths resolve against the workdir.
    /// Defaults point at the synth stage's output.
    pub observation_dir: PathBuf,
    pub prediction_dir: PathBuf,
    pub observation_end: NaiveDate,
    pub prediction_end: NaiveDate,
    pub seed: u64,
    pub task: Task,
    pub radius_m: f64,
    pub vocab_size: usize,
    /// Maximum review gap (days) for a transition; None keeps all
    /// consecutive pairs.
    pub max_gap_days: Option<i64>,
    /// Count only transitions whose other endpoint is inside the
    /// restaurant's neighborhood toward inflow/outflow.
    pub flows_within_neighborhood: bool,
    pub polarity_map: PolarityMap,
    pub dump_transitions: bool,
    pub test_fraction: f64,
    pub smote: SmoteConfig,
    pub model_kind: ModelKind,
    /// Feature families concatenated into the single trained model
    /// (survival task only).
    pub families: Vec<String>,
    pub hyper: HyperParams,
    pub explain: ExplainSettings,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            observation_dir: PathBuf::from("synthetic/observation"),
            prediction_dir: PathBuf::from("synthetic/prediction"),
            observation_end: NaiveDate::from_ymd_opt(2017, 12, 31).unwrap(),
            prediction_end: NaiveDate::from_ymd_opt(2019, 12, 31).unwrap(),
            seed: 7,
            task: Task::Survival,
            radius_m: 500.0,
            vocab_size: 1000,
            max_gap_days: None,
            flows_within_neighborhood: false,
            polarity_map: PolarityMap::default(),
            dump_transitions: false,
            test_fraction: 0.2,
            smote: SmoteConfig::default(),
            model_kind: ModelKind::Gbdt,
            families: vec!["geo".to_string(), "mobility".to_string()],
            hyper: HyperParams::default(),
            explain: ExplainSettings::default(),
            synth: SynthConfig::default(),
        }
    }
}

pub const ENV_PREFIX: &str = "BIZSURV_";

impl RunConfig {
    /// Load a config file (or defaults), then apply `BIZSURV_*`
    /// environment overrides and CLI overrides.
    pub fn load(path: Option<&Path>, seed_override: Option<u64>) -> Result<RunConfig> {
        let mut config = match path {
            Some(p) => {
                let bytes = std::fs::read(p)
                    .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                serde_json::from_slice::<RunConfig>(&bytes).map_err(|e| CliError::Config {
                    field: "<root>".to_string(),
                    message: e.to_string(),
                })?
            }
            None => RunConfig::default(),
        };
        if let Ok(seed) = std::env::var(format!("{ENV_PREFIX}SEED")) {
            config.seed = seed.parse().map_err(|_| CliError::Config {
                field: "seed".to_string(),
                message: format!("{ENV_PREFIX}SEED is not an integer: {seed:?}"),
            })?;
        }
        if let Some(seed) = seed_override {
            config.seed = seed;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |field: &str, message: String| {
            Err(CliError::Config {
                field: field.to_string(),
                message,
            })
        };
        if self.radius_m <= 0.0 {
            return fail("radius_m", format!("must be positive, got {}", self.radius_m));
        }
        if self.vocab_size == 0 {
            return fail("vocab_size", "must be at least 1".to_string());
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return fail(
                "test_fraction",
                format!("must be in (0, 1), got {}", self.test_fraction),
            );
        }
        if self.observation_end >= self.prediction_end {
            return fail(
                "observation_end",
                format!(
                    "must precede prediction_end ({} >= {})",
                    self.observation_end, self.prediction_end
                ),
            );
        }
        if self.smote.k == 0 {
            return fail("smote.k", "must be at least 1".to_string());
        }
        if self.smote.target_ratio <= 0.0 {
            return fail(
                "smote.target_ratio",
                format!("must be positive, got {}", self.smote.target_ratio),
            );
        }
        if let Some(gap) = self.max_gap_days {
            if gap <= 0 {
                return fail("max_gap_days", format!("must be positive, got {gap}"));
            }
        }
        if self.families.is_empty() {
            return fail("families", "select at least one feature family".to_string());
        }
        for f in &self.families {
            if !matches!(f.as_str(), "geo" | "mobility" | "attributes" | "text") {
                return fail(
                    "families",
                    format!("unknown family {f:?}; expected geo, mobility, attributes, text"),
                );
            }
        }
        if self.explain.top_k == 0 {
            return fail("explain.top_k", "must be at least 1".to_string());
        }
        if self.explain.num_samples < 10 || self.explain.text_num_samples < 10 {
            return fail(
                "explain.num_samples",
                "perturbation sample counts below 10 are meaningless".to_string(),
            );
        }
        if self.hyper.gbdt.trees == 0 || self.hyper.gbdt.max_depth == 0 {
            return fail(
                "hyper.gbdt",
                "trees and max_depth must be at least 1".to_string(),
            );
        }
        if self.hyper.mlp.hidden == 0 || self.hyper.mlp.epochs == 0 {
            return fail(
                "hyper.mlp",
                "hidden and epochs must be at least 1".to_string(),
            );
        }
        Ok(())
    }

    pub fn resolve(&self, workdir: &Path, dir: &Path) -> PathBuf {
        if dir.is_absolute() {
            dir.to_path_buf()
        } else {
            workdir.join(dir)
        }
    }
}

/// Workdir resolution: CLI flag, then BIZSURV_WORKDIR, then cwd.
pub fn resolve_workdir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var(format!("{ENV_PREFIX}WORKDIR")).ok().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}
