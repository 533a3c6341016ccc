//! Experiment orchestration: configs, game loops, training, sweeps and result files.

mod config;
mod metrics;
mod output;
mod players;
mod runner;

pub use config::{
    draw_opponent, expand_cells, load_config, ConfigError, ExperimentConfig, FieldError, OutputConfig, OutputFormat,
    SweepAxes, SweepCell,
};
pub use metrics::{moving_average, summarize, AgentResult, ConvergedStats, GameResult, RunSummary};
pub use output::{games_csv, write_results, write_sweep, RunMeta};
pub use players::{DqnPlayer, GameContext, GreedyPlayer, Player, RenewalPlayer, StepOutcome, TabularPlayer};
pub use runner::{
    audit, build_players, run_cell, run_experiment, run_experiment_with, run_game, run_game_traced, run_sweep, run_training,
    CellOutcome, ExperimentOutcome,
};

use std::path::PathBuf;

use thiserror::Error;

use crate::engine::EngineError;
use crate::learner::LearnerError;
use crate::strategies::StrategyError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Learner(#[from] LearnerError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("score audit failed: {0}")]
    Audit(String),
    #[error("this run needs exactly one dqn agent")]
    NoLearner,
    #[error("{have} games is fewer than the moving-average window {window}")]
    TooFewGames { have: usize, window: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl HarnessError {
    /// Process exit code: 1 for invalid input, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Strategy(_) => 1,
            _ => 2,
        }
    }
}
