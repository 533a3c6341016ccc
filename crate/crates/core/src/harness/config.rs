//! Experiment configuration files (TOML).
//!
//! ```toml
//! name = "dqn-vs-pa50"
//! agents = ["dqn", "periodic:50"]   # agent 0 is the defender
//! n_games = 2000
//! game_length = 500                 # or: geometric_stop = 0.002
//! reward = 1.0
//! flip_cost = 4.0
//! base_seed = 7
//! window = 100
//! tail_fraction = 0.2
//!
//! [train]                           # DQN hyper-parameters, all optional
//! epsilon_min = 0.01
//!
//! [output]
//! dir = "results/dqn-vs-pa50"
//! format = "csv"                    # or "json"
//!
//! [sweep]                           # optional; cells are the cartesian product
//! period = [10, 20, 30]             # replaces every renewal opponent's period
//! rate = [0.02, 0.05]               # replaces every opponent with exponential:<rate>
//! players = [2, 3, 4]               # with move_rate: n-player cells with random opponents
//! move_rate = [0.01, 0.05, 0.1]
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::engine::{Feedback, GameConfig, Horizon};
use crate::learner::TrainConfig;
use crate::rng::{derive_seed, stream_rng, STREAM_OPPONENT_DRAW};
use crate::strategies::{RenewalSpec, StrategySpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid config:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<FieldError>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}` (csv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("results")
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: default_out_dir(), format: OutputFormat::Csv }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub players: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub move_rate: Option<Vec<f64>>,
}

impl SweepAxes {
    pub fn is_empty(&self) -> bool {
        self.period.is_none() && self.rate.is_none() && self.players.is_none() && self.move_rate.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    /// Optional cross-check against `agents.len()`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_agents: Option<usize>,
    pub agents: Vec<StrategySpec>,
    #[serde(default = "default_n_games")]
    pub n_games: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub game_length: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometric_stop: Option<f64>,
    #[serde(default = "one")]
    pub reward: f64,
    #[serde(default = "four")]
    pub flip_cost: f64,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_tail")]
    pub tail_fraction: f64,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepAxes>,
}

fn default_name() -> String {
    "experiment".into()
}
fn default_n_games() -> usize {
    2000
}
fn one() -> f64 {
    1.0
}
fn four() -> f64 {
    4.0
}
fn default_window() -> usize {
    100
}
fn default_tail() -> f64 {
    0.2
}

impl ExperimentConfig {
    /// Two-player config with every optional field at its default.
    pub fn new(agents: Vec<StrategySpec>, n_games: usize, game_length: u64) -> Self {
        ExperimentConfig {
            name: default_name(),
            n_agents: None,
            agents,
            n_games,
            game_length: Some(game_length),
            geometric_stop: None,
            reward: 1.0,
            flip_cost: 4.0,
            base_seed: 0,
            window: default_window(),
            tail_fraction: default_tail(),
            train: TrainConfig::default(),
            output: OutputConfig::default(),
            sweep: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn horizon(&self) -> Horizon {
        match (self.game_length, self.geometric_stop) {
            (Some(t), _) => Horizon::Fixed(t),
            (None, Some(p)) => Horizon::GeometricStop(p),
            (None, None) => Horizon::Fixed(0),
        }
    }

    pub fn dqn_count(&self) -> usize {
        self.agents.iter().filter(|a| matches!(a, StrategySpec::Dqn)).count()
    }

    /// Engine config: shared R and C, defender first in tie order, feedback by strategy kind.
    pub fn game_config(&self) -> GameConfig {
        let n = self.agents.len();
        let feedback = self
            .agents
            .iter()
            .map(|a| if a.is_adaptive() { Feedback::LastMove } else { Feedback::NonAdaptive })
            .collect();
        GameConfig::uniform(n, self.reward, self.flip_cost, self.horizon()).with_feedback(feedback)
    }

    /// Hex SHA-256 (first 16 characters) of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errs = Vec::new();
        let mut err = |path: &str, message: String| errs.push(FieldError { path: path.into(), message });
        let n = self.agents.len();
        if let Some(declared) = self.n_agents {
            if declared != n {
                err("n_agents", format!("declares {declared} agents but `agents` lists {n}"));
            }
        }
        if n < 2 {
            err("agents", format!("need at least 2 agents, got {n}"));
        }
        if self.dqn_count() > 1 {
            err("agents", "at most one dqn agent per experiment".into());
        }
        for (i, a) in self.agents.iter().enumerate() {
            if matches!(a, StrategySpec::Greedy(_)) && n != 2 {
                err(&format!("agents[{i}]"), "greedy is defined for two-player games only".into());
            }
        }
        if self.n_games == 0 {
            err("n_games", "must be >= 1".into());
        }
        match (self.game_length, self.geometric_stop) {
            (Some(_), Some(_)) => err("game_length", "set either game_length or geometric_stop, not both".into()),
            (None, None) => err("game_length", "set game_length or geometric_stop".into()),
            (Some(0), None) => err("game_length", "must be >= 1".into()),
            (None, Some(p)) if !(p > 0.0 && p < 1.0) => {
                err("geometric_stop", format!("{p} must lie strictly inside (0,1)"))
            }
            _ => {}
        }
        if self.train.features.time_remaining && self.game_length.is_none() {
            err("train.features.time_remaining", "needs a fixed game_length".into());
        }
        if !(self.reward.is_finite() && self.reward >= 0.0) {
            err("reward", "must be a finite value >= 0".into());
        }
        if !(self.flip_cost.is_finite() && self.flip_cost >= 0.0) {
            err("flip_cost", "must be a finite value >= 0".into());
        }
        if self.window == 0 {
            err("window", "must be >= 1".into());
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            err("tail_fraction", "must lie in (0,1]".into());
        }
        if let Err(train_errs) = self.train.validate() {
            for (f, m) in train_errs {
                err(&format!("train.{f}"), m);
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.is_empty() {
                err("sweep", "at least one axis is required".into());
            }
            for (name, empty) in [
                ("sweep.period", sweep.period.as_ref().is_some_and(|v| v.is_empty())),
                ("sweep.rate", sweep.rate.as_ref().is_some_and(|v| v.is_empty())),
                ("sweep.players", sweep.players.as_ref().is_some_and(|v| v.is_empty())),
                ("sweep.move_rate", sweep.move_rate.as_ref().is_some_and(|v| v.is_empty())),
            ] {
                if empty {
                    err(name, "axis must not be empty".into());
                }
            }
            if sweep.period.iter().flatten().any(|&p| p == 0) {
                err("sweep.period", "periods must be >= 1".into());
            }
            for (name, axis) in [("sweep.rate", &sweep.rate), ("sweep.move_rate", &sweep.move_rate)] {
                if axis.iter().flatten().any(|&r| !(r > 0.0 && r <= 1.0)) {
                    err(name, "rates must lie in (0,1]".into());
                }
            }
            if sweep.players.iter().flatten().any(|&p| p < 2) {
                err("sweep.players", "need at least 2 players per cell".into());
            }
            if sweep.players.is_some() != sweep.move_rate.is_some() {
                err("sweep.players", "players and move_rate must be swept together".into());
            }
            if sweep.players.is_some() && self.dqn_count() != 1 {
                err("sweep.players", "n-player cells pit exactly one dqn against random opponents".into());
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(errs))
        }
    }

    /// Replaces `random:<rate>` opponents by concrete renewal strategies drawn with `seed`.
    pub fn resolve_random(&self, seed: u64) -> ExperimentConfig {
        let mut rng = stream_rng(seed, STREAM_OPPONENT_DRAW);
        let mut out = self.clone();
        for a in out.agents.iter_mut() {
            if let StrategySpec::Random { rate } = *a {
                *a = StrategySpec::Renewal(draw_opponent(rate, &mut rng));
            }
        }
        out
    }
}

/// Uniform draw among periodic, random-phase periodic and exponential with the
/// given move rate (periods rounded to the nearest integer).
pub fn draw_opponent<R: rand::Rng + ?Sized>(rate: f64, rng: &mut R) -> RenewalSpec {
    let period = ((1.0 / rate).round() as u64).max(1);
    match rng.random_range(0..3) {
        0 => RenewalSpec::Periodic { period },
        1 => RenewalSpec::PeriodicRandomPhase { period },
        _ => RenewalSpec::Exponential { rate },
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
    ExperimentConfig::parse(&text)
}

/// One point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub index: usize,
    /// Axis name to value, e.g. `period -> 50`.
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
    pub config: ExperimentConfig,
}

impl SweepCell {
    pub fn label(&self) -> String {
        self.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(",")
    }
}

/// Cartesian product of the sweep axes, in axis order period, rate, players x move_rate.
/// Each cell gets a seed derived from `(base_seed, index)` and a config without sweep.
pub fn expand_cells(config: &ExperimentConfig) -> Vec<SweepCell> {
    let Some(axes) = &config.sweep else {
        return Vec::new();
    };
    let mut combos: Vec<BTreeMap<String, f64>> = vec![BTreeMap::new()];
    let mut extend = |name: &str, values: &[f64]| {
        combos = combos
            .iter()
            .flat_map(|c| {
                values.iter().map(move |&v| {
                    let mut c = c.clone();
                    c.insert(name.to_string(), v);
                    c
                })
            })
            .collect();
    };
    if let Some(p) = &axes.period {
        extend("period", &p.iter().map(|&x| x as f64).collect::<Vec<_>>());
    }
    if let Some(r) = &axes.rate {
        extend("rate", r);
    }
    if let Some(p) = &axes.players {
        extend("players", &p.iter().map(|&x| x as f64).collect::<Vec<_>>());
    }
    if let Some(r) = &axes.move_rate {
        extend("move_rate", r);
    }
    combos
        .into_iter()
        .enumerate()
        .map(|(index, params)| {
            let seed = derive_seed(config.base_seed, index as u64);
            let mut cfg = config.clone();
            cfg.sweep = None;
            cfg.base_seed = seed;
            cfg.name = format!("{}[{index}]", config.name);
            apply_params(&mut cfg, &params);
            let cfg = cfg.resolve_random(opponent_draw_seed(config.base_seed, &params, seed));
            SweepCell { index, params, seed, config: cfg }
        })
        .collect()
}

/// Opponent kinds in n-player cells depend on the player count only, so cells
/// that differ in move rate face the same kinds.
fn opponent_draw_seed(base_seed: u64, params: &BTreeMap<String, f64>, cell_seed: u64) -> u64 {
    match (params.get("players"), params.contains_key("move_rate")) {
        (Some(&players), true) => derive_seed(base_seed ^ OPPONENT_KIND_SALT, players as u64),
        _ => cell_seed,
    }
}

const OPPONENT_KIND_SALT: u64 = 0x6b69_6e64_7365_6564;

fn apply_params(cfg: &mut ExperimentConfig, params: &BTreeMap<String, f64>) {
    if let Some(&p) = params.get("period") {
        let period = p as u64;
        for a in cfg.agents.iter_mut() {
            if let StrategySpec::Renewal(r) = a {
                *r = match r {
                    RenewalSpec::PeriodicRandomPhase { .. } => RenewalSpec::PeriodicRandomPhase { period },
                    _ => RenewalSpec::Periodic { period },
                };
            }
        }
    }
    if let Some(&rate) = params.get("rate") {
        for a in cfg.agents.iter_mut() {
            if let StrategySpec::Renewal(r) = a {
                *r = RenewalSpec::Exponential { rate };
            }
        }
    }
    if let (Some(&players), Some(&move_rate)) = (params.get("players"), params.get("move_rate")) {
        let opponents = players as usize - 1;
        let per = move_rate / opponents as f64;
        cfg.agents = std::iter::once(StrategySpec::Dqn)
            .chain(std::iter::repeat_n(StrategySpec::Random { rate: per }, opponents))
            .collect();
    }
}
