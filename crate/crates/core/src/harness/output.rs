//! Result files.
//!
//! CSV output writes four files into the target directory:
//!
//! * `games.csv`: `game,agent,strategy,score,score_per_iter,flips,ownership`
//! * `moving_average.csv`: `game,agent,moving_average` (game index of the window's last game)
//! * `summary.csv`: `agent,strategy,converged_mean,converged_flip_rate,converged_games,tail_at_floor`
//! * `meta.csv`: `key,value` run metadata (config hash, seeds, cell)
//!
//! JSON output writes the same content to a single `results.json`. Floats use the
//! shortest representation that parses back to the same value, so both formats
//! carry identical numbers and reruns are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ExperimentConfig, OutputFormat, SweepCell};
use super::metrics::{ConvergedStats, GameResult, RunSummary};
use super::runner::CellOutcome;
use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMeta {
    pub name: String,
    pub config_hash: String,
    pub base_seed: u64,
    pub cell_index: Option<usize>,
    pub cell_params: Option<String>,
    pub n_games: usize,
    pub window: usize,
    pub tail_fraction: f64,
    pub version: String,
}

impl RunMeta {
    pub fn new(config: &ExperimentConfig) -> Self {
        RunMeta {
            name: config.name.clone(),
            config_hash: config.hash(),
            base_seed: config.base_seed,
            cell_index: None,
            cell_params: None,
            n_games: config.n_games,
            window: config.window,
            tail_fraction: config.tail_fraction,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// Metadata for a sweep cell: the parent's seed and hash plus the cell index.
    pub fn for_cell(parent: &ExperimentConfig, cell: &SweepCell) -> Self {
        RunMeta {
            name: cell.config.name.clone(),
            cell_index: Some(cell.index),
            cell_params: Some(cell.label()),
            ..RunMeta::new(parent)
        }
    }

    fn rows(&self) -> Vec<(&'static str, String)> {
        vec![
            ("name", self.name.clone()),
            ("config_hash", self.config_hash.clone()),
            ("base_seed", self.base_seed.to_string()),
            ("cell_index", self.cell_index.map(|c| c.to_string()).unwrap_or_default()),
            ("cell_params", self.cell_params.clone().unwrap_or_default()),
            ("n_games", self.n_games.to_string()),
            ("window", self.window.to_string()),
            ("tail_fraction", self.tail_fraction.to_string()),
            ("version", self.version.clone()),
        ]
    }
}

#[derive(Serialize)]
struct JsonResults<'a> {
    meta: &'a RunMeta,
    games: Vec<JsonGame<'a>>,
    moving_average: &'a [Vec<f64>],
    converged: &'a [ConvergedStats],
    tail_at_floor: bool,
}

#[derive(Serialize)]
struct JsonGame<'a> {
    game: usize,
    length: u64,
    agents: &'a [super::metrics::AgentResult],
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

fn write_file(path: PathBuf, contents: &str) -> Result<PathBuf, HarnessError> {
    fs::write(&path, contents).map_err(io_err(&path))?;
    Ok(path)
}

/// Quotes a CSV field when needed.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn games_csv(results: &[GameResult]) -> String {
    let mut out = String::from("game,agent,strategy,score,score_per_iter,flips,ownership\n");
    for r in results {
        for (i, a) in r.agents.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{i},{},{},{},{},{}",
                r.game,
                csv_field(&a.strategy),
                a.score,
                a.score_per_iter,
                a.flips,
                a.ownership
            );
        }
    }
    out
}

/// Writes the run's result files into `dir` (created if missing) and returns their paths.
pub fn write_results(
    summary: &RunSummary,
    meta: &RunMeta,
    format: OutputFormat,
    dir: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    match format {
        OutputFormat::Csv => {
            let mut ma = String::from("game,agent,moving_average\n");
            for (agent, series) in summary.moving_average.iter().enumerate() {
                for (k, v) in series.iter().enumerate() {
                    let _ = writeln!(ma, "{},{agent},{v}", k + summary.window - 1);
                }
            }
            let mut sm = String::from("agent,strategy,converged_mean,converged_flip_rate,converged_games,tail_at_floor\n");
            for (i, c) in summary.converged.iter().enumerate() {
                let _ = writeln!(
                    sm,
                    "{i},{},{},{},{},{}",
                    csv_field(&c.strategy),
                    c.mean_score_per_iter,
                    c.flip_rate,
                    c.games,
                    summary.tail_at_floor
                );
            }
            let mut mt = String::from("key,value\n");
            for (k, v) in meta.rows() {
                let _ = writeln!(mt, "{k},{}", csv_field(&v));
            }
            Ok(vec![
                write_file(dir.join("games.csv"), &games_csv(&summary.results))?,
                write_file(dir.join("moving_average.csv"), &ma)?,
                write_file(dir.join("summary.csv"), &sm)?,
                write_file(dir.join("meta.csv"), &mt)?,
            ])
        }
        OutputFormat::Json => {
            let doc = JsonResults {
                meta,
                games: summary
                    .results
                    .iter()
                    .map(|r| JsonGame { game: r.game, length: r.length, agents: &r.agents })
                    .collect(),
                moving_average: &summary.moving_average,
                converged: &summary.converged,
                tail_at_floor: summary.tail_at_floor,
            };
            let text = serde_json::to_string_pretty(&doc).expect("results serialize");
            Ok(vec![write_file(dir.join("results.json"), &(text + "\n"))?])
        }
    }
}

/// Writes every cell into `dir/cell_<index>/` plus a `sweep.csv` overview with
/// columns `cell,params,agent,strategy,converged_mean,converged_flip_rate,best_opponent`,
/// where `best_opponent` marks the highest-scoring opponent of agent 0.
pub fn write_sweep(
    parent: &ExperimentConfig,
    cells: &[CellOutcome],
    format: OutputFormat,
    dir: &Path,
) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    let mut table = String::from("cell,params,agent,strategy,converged_mean,converged_flip_rate,best_opponent\n");
    for c in cells {
        let meta = RunMeta::for_cell(parent, &c.cell);
        let sub = dir.join(format!("cell_{}", c.cell.index));
        written.extend(write_results(&c.outcome.summary, &meta, format, &sub)?);
        let summary = &c.outcome.summary;
        let best = summary.best_opponent(0);
        for (i, s) in summary.converged.iter().enumerate() {
            let _ = writeln!(
                table,
                "{},{},{i},{},{},{},{}",
                c.cell.index,
                csv_field(&c.cell.label()),
                csv_field(&s.strategy),
                s.mean_score_per_iter,
                s.flip_rate,
                u8::from(best == Some(i))
            );
        }
    }
    written.push(write_file(dir.join("sweep.csv"), &table)?);
    Ok(written)
}
