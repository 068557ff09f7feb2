//! Experiment runner for the collective-spin simulator.

use std::path::{Path, PathBuf};

use spincat_core::SpinError;
use thiserror::Error;

pub mod config;
pub mod output;
pub mod scenario;

pub use config::{validate_config, validate_config_with, ConfigIssue, ScenarioConfig, ScenarioKind};
pub use output::OutputRecord;
pub use scenario::{run_scenario, RunOutcome};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid configuration: {}", join_issues(.0))]
    Config(Vec<ConfigIssue>),

    #[error("{0}")]
    Numerical(#[from] SpinError),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn join_issues(issues: &[ConfigIssue]) -> String {
    issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Numerical(_) => EXIT_NUMERICAL,
            RunError::Io { .. } => EXIT_IO,
        }
    }
}

/// Where a run writes: `output_path` (resolved against `base`) or
/// `<base>/<scenario>.<ext>`.
pub fn output_location(cfg: &ScenarioConfig, base: &Path) -> PathBuf {
    match &cfg.output_path {
        Some(p) => base.join(p),
        None => base.join(format!("{}.{}", cfg.scenario.name(), cfg.format.extension())),
    }
}

/// Runs a validated config and writes its record under `base`.
pub fn execute(cfg: &ScenarioConfig, base: &Path) -> Result<(PathBuf, RunOutcome), RunError> {
    let outcome = run_scenario(cfg)?;
    let path = output_location(cfg, base);
    outcome
        .record
        .write(&path, cfg.format)
        .map_err(|source| RunError::Io { path: path.clone(), source })?;
    Ok((path, outcome))
}

/// Reads and validates a config file.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<ScenarioConfig, RunError> {
    let raw = std::fs::read_to_string(path).map_err(|source| RunError::Io { path: path.to_path_buf(), source })?;
    validate_config_with(&raw, overrides).map_err(RunError::Config)
}

/// Default config for a named scenario with `key=value` overrides.
pub fn scenario_config(name: &str, overrides: &[String]) -> Result<ScenarioConfig, RunError> {
    let kind: ScenarioKind =
        name.parse().map_err(|message| RunError::Config(vec![ConfigIssue { key: "scenario".into(), message }]))?;
    let mut table = toml::Table::new();
    let mut issues = config::apply_overrides(&mut table, overrides);
    match config::build(kind, &table) {
        Ok(cfg) if issues.is_empty() => Ok(cfg),
        Ok(_) => Err(RunError::Config(issues)),
        Err(more) => {
            issues.extend(more);
            Err(RunError::Config(issues))
        }
    }
}
