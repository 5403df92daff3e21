//! Staged pipeline driver. Each subcommand reads the persisted artifacts of
//! the prior stage from the run directory and writes its own; every stage is
//! re-runnable against warm caches.

mod config;
mod report;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{PipelineConfig, RunPaths};

/// Exit codes: 0 success, 2 configuration, 3 missing prerequisite artifact,
/// 4 network, 5 extraction/judge protocol failure, 1 anything else.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("prerequisite error: {0}")]
    Prerequisite(String),
    #[error(transparent)]
    Core(#[from] claimscope::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use claimscope::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Prerequisite(_) => 3,
            CliError::Core(e) => match e {
                E::Config(_) | E::Invalid(_) | E::EmptyInput(_) => 2,
                E::Transport(_) | E::Remote { .. } => 4,
                E::ExtractionFailure { .. } | E::Protocol(_) | E::GradeExtraction => 5,
                _ => 1,
            },
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(name = "claimscope", version, about = "Patent-claim definiteness pipeline")]
struct Cli {
    /// TOML pipeline configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Directory holding all stage artifacts and caches.
    #[arg(long)]
    run_dir: PathBuf,
    /// Overrides the dataset seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides a model for one role, e.g. `--model-role judge=big-model`.
    /// Roles: extraction, agent, judge.
    #[arg(long = "model-role", global = true, value_name = "ROLE=MODEL")]
    model_roles: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Searches seed applications and caches their document bundles.
    Fetch,
    /// Extracts indefiniteness rejections from cached office actions.
    Parse,
    /// Samples definite claims, splits, and writes the corpus + statistics.
    Build,
    /// Fits feature spaces and trains the logistic models.
    Train,
    /// Scores a split with the logistic models and/or the examiner agent.
    Predict {
        #[arg(long, default_value = "test")]
        split: String,
        /// One of: logreg, agent, ensemble.
        #[arg(long, default_value = "logreg")]
        method: String,
    },
    /// Judges stored agent reasons against examiner reasons pairwise.
    Judge {
        #[arg(long, default_value = "test")]
        split: String,
    },
    /// Emits the metric and calibration reports for a split.
    Evaluate {
        #[arg(long, default_value = "test")]
        split: String,
    },
    /// Exports a seeded random sample of rows with their office-action text
    /// for manual review.
    SampleAudit {
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
}

/// Everything a stage needs: validated config with overrides applied and the
/// run-directory map.
pub struct Context {
    pub config: PipelineConfig,
    pub paths: RunPaths,
}

impl Context {
    pub fn gateway(&self) -> Result<claimscope::gateway::Gateway, CliError> {
        let llm = &self.config.llm;
        Ok(claimscope::gateway::Gateway::new(claimscope::gateway::GatewayConfig {
            endpoint: llm.endpoint.clone(),
            api_key_env: llm.api_key_env.clone(),
            max_in_flight: llm.max_in_flight,
            max_retries: 3,
            backoff_base_ms: 250,
            cache_dir: Some(self.paths.llm_cache()),
        })?)
    }

    pub fn portal(&self) -> claimscope::ingest::PortalClient {
        let mut pc = claimscope::ingest::PortalConfig::new(
            self.config.portal.base_url.clone(),
            self.paths.portal_cache(),
        );
        pc.api_key_env = self.config.portal.api_key_env.clone();
        claimscope::ingest::PortalClient::new(pc)
    }
}

fn parse_split(name: &str) -> Result<claimscope::Split, CliError> {
    claimscope::Split::ALL
        .into_iter()
        .find(|s| s.name() == name)
        .ok_or_else(|| CliError::Config(format!("unknown split `{name}`")))
}

fn apply_overrides(config: &mut PipelineConfig, cli: &Cli) -> Result<(), CliError> {
    if let Some(seed) = cli.seed {
        config.dataset.seed = seed;
    }
    for spec in &cli.model_roles {
        let (role, model) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("bad --model-role `{spec}`, want ROLE=MODEL")))?;
        match role {
            "extraction" => config.llm.extraction_model = model.to_string(),
            "agent" => config.llm.agent_model = model.to_string(),
            "judge" => config.llm.judge_model = model.to_string(),
            other => {
                return Err(CliError::Config(format!(
                    "unknown model role `{other}` (extraction|agent|judge)"
                )))
            }
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let mut config = PipelineConfig::load(&cli.config)?;
    apply_overrides(&mut config, cli)?;
    std::fs::create_dir_all(&cli.run_dir)?;
    let ctx = Context {
        config,
        paths: RunPaths::new(&cli.run_dir),
    };
    match &cli.command {
        Command::Fetch => stages::fetch(&ctx),
        Command::Parse => stages::parse(&ctx),
        Command::Build => stages::build(&ctx),
        Command::Train => stages::train(&ctx),
        Command::Predict { split, method } => {
            stages::predict(&ctx, parse_split(split)?, method)
        }
        Command::Judge { split } => report::judge(&ctx, parse_split(split)?),
        Command::Evaluate { split } => report::evaluate(&ctx, parse_split(split)?),
        Command::SampleAudit { count } => report::sample_audit(&ctx, *count),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
