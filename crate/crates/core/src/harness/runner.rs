//! Game, training and sweep loops.

use std::time::Instant;

use crate::engine::{Action, Game, GameConfig, DEFENDER};
use crate::learner::DqnLearner;
use crate::rng::derive_seed;
use crate::strategies::StrategySpec;

use super::config::{expand_cells, ExperimentConfig, SweepCell};
use super::metrics::{summarize, AgentResult, GameResult, RunSummary};
use super::players::{DqnPlayer, GameContext, GreedyPlayer, Player, RenewalPlayer, StepOutcome};
use super::HarnessError;

/// Builds the players for one game. The DQN slot borrows the persistent learner.
pub fn build_players<'a>(
    agents: &[StrategySpec],
    mut learner: Option<&'a mut DqnLearner>,
) -> Result<Vec<Box<dyn Player + 'a>>, HarnessError> {
    agents
        .iter()
        .map(|spec| -> Result<Box<dyn Player + 'a>, HarnessError> {
            Ok(match *spec {
                StrategySpec::Renewal(r) => Box::new(RenewalPlayer::new(r)),
                StrategySpec::Greedy(r) => Box::new(GreedyPlayer::new(r)),
                StrategySpec::Dqn => {
                    let l = learner.take().ok_or(HarnessError::NoLearner)?;
                    Box::new(DqnPlayer::new(l))
                }
                StrategySpec::Random { .. } => {
                    return Err(HarnessError::Unsupported(format!("unresolved `{spec}` opponent")))
                }
            })
        })
        .collect()
}

/// Plays one game to completion. Feedback modes come from the players; `seed`
/// drives the stopping time and every player's private stream.
pub fn run_game(
    config: &GameConfig,
    players: &mut [Box<dyn Player + '_>],
    seed: u64,
    index: usize,
) -> Result<GameResult, HarnessError> {
    run_game_traced(config, players, seed, index).map(|(r, _)| r)
}

/// As [`run_game`], also returning the engine's event trace.
pub fn run_game_traced(
    config: &GameConfig,
    players: &mut [Box<dyn Player + '_>],
    seed: u64,
    index: usize,
) -> Result<(GameResult, String), HarnessError> {
    let mut cfg = config.clone();
    cfg.feedback = players.iter().map(|p| p.feedback()).collect();
    cfg.seed = seed;
    let mut game = Game::new(cfg, seed)?;
    let cfg = game.config().clone();
    let horizon = game.state().realized_end;
    for (i, p) in players.iter_mut().enumerate() {
        p.begin_game(&GameContext {
            agent: i,
            n_agents: cfg.n_agents,
            horizon,
            reward: cfg.reward_per_iteration[i],
            cost: cfg.flip_cost[i],
            has_tie_priority: cfg.tie_priority[0] == i,
            seed: derive_seed(seed, i as u64),
        })?;
    }
    let mut actions = vec![Action::NoFlip; players.len()];
    while !game.is_over() {
        let t = game.t();
        for (a, p) in actions.iter_mut().zip(players.iter_mut()) {
            *a = p.act(t)?;
        }
        let rewards = game.step(&actions)?;
        let terminal = game.is_over();
        for (i, p) in players.iter_mut().enumerate() {
            let obs = if actions[i].is_flip() && cfg.feedback[i].is_adaptive() {
                Some(game.observe(i)?)
            } else {
                None
            };
            p.after_step(&StepOutcome {
                t,
                action: actions[i],
                reward: rewards[i],
                observation: obs.as_ref(),
                terminal,
            })?;
        }
    }
    audit(&game)?;
    let tallies = game.final_scores()?;
    let length = game.state().realized_end;
    let result = GameResult {
        game: index,
        seed,
        length,
        agents: tallies
            .iter()
            .zip(players.iter())
            .map(|(t, p)| AgentResult {
                strategy: p.label(),
                score: t.score,
                score_per_iter: t.score / length as f64,
                flips: t.flips,
                ownership: t.ownership,
            })
            .collect(),
        at_epsilon_floor: None,
    };
    Ok((result, game.trace()))
}

/// Re-checks the accounting identities of a finished game: ownership covers every
/// iteration, each score is `R*owned - C*flips`, and with shared R and C the scores
/// sum to `R*T - C*flips`.
pub fn audit(game: &Game) -> Result<(), HarnessError> {
    let st = game.state();
    let cfg = game.config();
    let owned: u64 = st.owned_iterations.iter().sum();
    if owned != st.realized_end {
        return Err(HarnessError::Audit(format!("owned iterations {owned} != length {}", st.realized_end)));
    }
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()));
    for i in 0..cfg.n_agents {
        let expect = cfg.reward_per_iteration[i] * st.owned_iterations[i] as f64 - cfg.flip_cost[i] * st.flips[i] as f64;
        if !close(st.accumulated_score[i], expect) {
            return Err(HarnessError::Audit(format!(
                "agent {i} scored {} but R*owned - C*flips = {expect}",
                st.accumulated_score[i]
            )));
        }
    }
    if cfg.shared_reward_and_cost() {
        let total: f64 = st.accumulated_score.iter().sum();
        let expect = cfg.reward_per_iteration[DEFENDER] * st.realized_end as f64
            - cfg.flip_cost[DEFENDER] * st.history.len() as f64;
        if !close(total, expect) {
            return Err(HarnessError::Audit(format!("score total {total} != R*T - C*flips = {expect}")));
        }
    }
    Ok(())
}

/// Result of an experiment: statistics plus the trained learner, if any.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub summary: RunSummary,
    pub learner: Option<DqnLearner>,
}

/// Plays `n_games` games. With a DQN agent the learner persists across games
/// (replay buffer included); otherwise the strategies are simply evaluated.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome, HarnessError> {
    run_experiment_with(config, |_, _| {})
}

/// As [`run_experiment`], calling `on_game` after every game.
pub fn run_experiment_with(
    config: &ExperimentConfig,
    mut on_game: impl FnMut(&GameResult, Option<&DqnLearner>),
) -> Result<ExperimentOutcome, HarnessError> {
    config.validate()?;
    let config = config.resolve_random(config.base_seed);
    let start = Instant::now();
    let game_cfg = config.game_config();
    let mut learner = match config.dqn_count() {
        0 => None,
        _ => {
            let dim = config.train.features.dim(config.agents.len());
            Some(DqnLearner::new(config.train.clone(), dim, config.base_seed)?)
        }
    };
    let mut results = Vec::with_capacity(config.n_games);
    for g in 0..config.n_games {
        let floor = learner.as_ref().map(|l| l.at_epsilon_floor());
        let mut players = build_players(&config.agents, learner.as_mut())?;
        let mut result = run_game(&game_cfg, &mut players, derive_seed(config.base_seed, g as u64), g)?;
        drop(players);
        result.at_epsilon_floor = floor;
        on_game(&result, learner.as_ref());
        results.push(result);
    }
    let mut summary = summarize(results, config.window.min(config.n_games), config.tail_fraction)?;
    summary.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(ExperimentOutcome { config, summary, learner })
}

/// Training run: as [`run_experiment`] but requires exactly one DQN agent.
pub fn run_training(config: &ExperimentConfig) -> Result<ExperimentOutcome, HarnessError> {
    if config.dqn_count() != 1 {
        return Err(HarnessError::NoLearner);
    }
    run_experiment(config)
}

#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub cell: SweepCell,
    pub outcome: ExperimentOutcome,
}

/// Runs every sweep cell independently (own seed, engine, agents and learner).
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<CellOutcome>, HarnessError> {
    config.validate()?;
    if config.sweep.is_none() {
        return Err(HarnessError::Unsupported("config has no [sweep] section".into()));
    }
    expand_cells(config).into_iter().map(run_cell).collect()
}

pub fn run_cell(cell: SweepCell) -> Result<CellOutcome, HarnessError> {
    let outcome = run_experiment(&cell.config)?;
    Ok(CellOutcome { cell, outcome })
}
