//! TOML pipeline configuration and the run-directory layout.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortalSection {
    pub base_url: String,
    #[serde(default)]
    pub api_key_env: Option<String>,
    pub cpc_prefix: String,
    pub min_filing_date: NaiveDate,
    #[serde(default = "default_true")]
    pub require_rejection: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlmSection {
    pub endpoint: String,
    #[serde(default)]
    pub api_key_env: Option<String>,
    pub extraction_model: String,
    pub agent_model: String,
    pub judge_model: String,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_train")]
    pub train_fraction: f64,
    #[serde(default = "default_test")]
    pub test_fraction: f64,
    #[serde(default = "default_validation")]
    pub validation_fraction: f64,
    /// Fuzzy recitation-match score floor in [0,1].
    #[serde(default = "default_match_threshold")]
    pub match_threshold: f64,
}

impl Default for DatasetSection {
    fn default() -> Self {
        DatasetSection {
            seed: default_seed(),
            train_fraction: default_train(),
            test_fraction: default_test(),
            validation_fraction: default_validation(),
            match_threshold: default_match_threshold(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSection {
    #[serde(default = "default_tool_calls")]
    pub max_tool_calls: usize,
    #[serde(default = "default_extraction_retries")]
    pub extraction_retries: u32,
}

impl Default for AgentSection {
    fn default() -> Self {
        AgentSection {
            max_tool_calls: default_tool_calls(),
            extraction_retries: default_extraction_retries(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSection {
    #[serde(default = "default_max_features")]
    pub max_features: usize,
    /// Empty list means the built-in trigger lexicon.
    #[serde(default)]
    pub trigger_lexicon: Vec<String>,
}

impl Default for FeatureSection {
    fn default() -> Self {
        FeatureSection {
            max_features: default_max_features(),
            trigger_lexicon: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JudgeSection {
    #[serde(default = "default_judge_threshold")]
    pub threshold: f64,
}

impl Default for JudgeSection {
    fn default() -> Self {
        JudgeSection {
            threshold: default_judge_threshold(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub portal: PortalSection,
    pub llm: LlmSection,
    #[serde(default)]
    pub dataset: DatasetSection,
    #[serde(default)]
    pub agent: AgentSection,
    #[serde(default)]
    pub features: FeatureSection,
    #[serde(default)]
    pub judge: JudgeSection,
}

fn default_true() -> bool {
    true
}
fn default_in_flight() -> usize {
    4
}
fn default_seed() -> u64 {
    17
}
fn default_train() -> f64 {
    0.6
}
fn default_test() -> f64 {
    0.3
}
fn default_validation() -> f64 {
    0.1
}
fn default_match_threshold() -> f64 {
    0.8
}
fn default_tool_calls() -> usize {
    10
}
fn default_extraction_retries() -> u32 {
    2
}
fn default_max_features() -> usize {
    20_000
}
fn default_judge_threshold() -> f64 {
    75.0
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<PipelineConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: PipelineConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let d = &self.dataset;
        let sum = d.train_fraction + d.test_fraction + d.validation_fraction;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(CliError::Config(format!(
                "split fractions sum to {sum}, expected 1"
            )));
        }
        if !(0.0..=1.0).contains(&d.match_threshold) {
            return Err(CliError::Config(format!(
                "match_threshold {} outside [0,1]",
                d.match_threshold
            )));
        }
        if !(0.0..=100.0).contains(&self.judge.threshold) {
            return Err(CliError::Config(format!(
                "judge threshold {} outside [0,100]",
                self.judge.threshold
            )));
        }
        if self.portal.cpc_prefix.is_empty() {
            return Err(CliError::Config("portal.cpc_prefix is empty".into()));
        }
        Ok(())
    }

    pub fn split_fractions(&self) -> [f64; 3] {
        [
            self.dataset.train_fraction,
            self.dataset.test_fraction,
            self.dataset.validation_fraction,
        ]
    }
}

/// All stage artifacts live under one run directory; the directory is the
/// unit of reproducibility.
#[derive(Debug, Clone)]
pub struct RunPaths {
    pub root: PathBuf,
}

impl RunPaths {
    pub fn new(root: impl Into<PathBuf>) -> RunPaths {
        RunPaths { root: root.into() }
    }

    pub fn portal_cache(&self) -> PathBuf {
        self.root.join("cache").join("portal")
    }
    pub fn llm_cache(&self) -> PathBuf {
        self.root.join("cache").join("llm")
    }
    pub fn applications_list(&self) -> PathBuf {
        self.root.join("applications.txt")
    }
    pub fn skips(&self) -> PathBuf {
        self.root.join("skips.jsonl")
    }
    pub fn parsed_dir(&self) -> PathBuf {
        self.root.join("parsed")
    }
    pub fn parsed_applications(&self) -> PathBuf {
        self.parsed_dir().join("applications.jsonl")
    }
    pub fn parsed_indefinite(&self) -> PathBuf {
        self.parsed_dir().join("indefinite.jsonl")
    }
    pub fn clean_applications(&self) -> PathBuf {
        self.parsed_dir().join("clean_applications.txt")
    }
    pub fn corpus(&self) -> PathBuf {
        self.root.join("corpus.jsonl")
    }
    pub fn stats_dir(&self) -> PathBuf {
        self.root.join("stats")
    }
    pub fn models_dir(&self) -> PathBuf {
        self.root.join("models")
    }
    pub fn predictions(&self, split: &str) -> PathBuf {
        self.root.join("predictions").join(format!("{split}.jsonl"))
    }
    pub fn judge_dir(&self) -> PathBuf {
        self.root.join("judge")
    }
    pub fn judge_verdicts(&self, split: &str) -> PathBuf {
        self.judge_dir().join(format!("verdicts_{split}.jsonl"))
    }
    pub fn judge_matrices(&self, split: &str) -> PathBuf {
        self.judge_dir().join(format!("matrices_{split}.jsonl"))
    }
    pub fn reports_dir(&self) -> PathBuf {
        self.root.join("reports")
    }
    pub fn audit_dir(&self) -> PathBuf {
        self.root.join("audit")
    }

    /// Fails with a prerequisite error naming the stage that produces `path`.
    pub fn require(&self, path: &Path, produced_by: &str) -> Result<(), CliError> {
        if path.exists() {
            Ok(())
        } else {
            Err(CliError::Prerequisite(format!(
                "missing {}; run `{}` first",
                path.display(),
                produced_by
            )))
        }
    }
}
