//! Configuration-driven runner for the conullity check suites.
//!
//! A run reads a TOML [`config::RunConfig`], executes one scenario (or all
//! of them), and writes `report.txt` plus CSV tables to the output
//! directory.

use std::path::{Path, PathBuf};

pub mod config;
pub mod report;
pub mod scenarios;

pub use config::{ConfigError, RunConfig};
pub use report::Report;

/// Overrides `output_dir` from the configuration when set.
pub const OUTPUT_DIR_ENV: &str = "CONULLITY_OUTPUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot start the worker pool: {0}")]
    Pool(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

/// Runs a parsed configuration and writes its outputs into `output_dir`.
pub fn execute(cfg: RunConfig, output_dir: &Path) -> Result<Report, RunError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(|e| RunError::Pool(e.to_string()))?;
    let scenario = cfg.scenario.clone();
    let seed = cfg.seed;
    let ctx = scenarios::Context::new(cfg)?;
    let sections = pool.install(|| scenarios::run(&scenario, &ctx));
    let report = Report {
        scenario,
        seed,
        sections,
    };
    report
        .write(output_dir)
        .map_err(|source| RunError::Output {
            path: output_dir.to_path_buf(),
            source,
        })?;
    Ok(report)
}

/// Output directory: the environment override, else the configured one.
pub fn output_dir(cfg: &RunConfig) -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| cfg.output_dir.clone())
}

/// Loads `config_path`, runs it, and returns the report and where it went.
pub fn run(config_path: &Path) -> Result<(Report, PathBuf), RunError> {
    let cfg = config::load(config_path)?;
    let dir = output_dir(&cfg);
    let report = execute(cfg, &dir)?;
    Ok((report, dir))
}
