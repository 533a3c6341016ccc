//! Discrete-time n-player FlipIt state machine.
//!
//! Every iteration `t` each agent either flips or not. Agent `i` receives
//! `R_i * o_{t-1}^i - C_i * a_t^i`, where `o_{t-1}` is the owner at the end of the
//! previous iteration (the defender before the first iteration). After rewards
//! are paid, all flips of iteration `t` are applied and the new owner is the
//! flipper ranked highest in the tie priority order.

use std::fmt::Write as _;

use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::stream_rng;

/// Agent index. The defender is always agent [`DEFENDER`].
pub type AgentId = usize;

/// The defender is the initial owner and wins every tie it takes part in.
pub const DEFENDER: AgentId = 0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid game config: {field}: {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error("expected {expected} actions, got {got}")]
    ActionCount { expected: usize, got: usize },
    #[error("game is over (length {0})")]
    GameOver(u64),
    #[error("game is still running (t={t}, end={end})")]
    NotOver { t: u64, end: u64 },
    #[error("agent {0} is out of range")]
    UnknownAgent(AgentId),
    #[error("agent {0} is non-adaptive and receives no feedback")]
    NoFeedback(AgentId),
    #[error("agent {agent} did not flip at iteration {t}; feedback is only released on flips")]
    NotFlipInstant { agent: AgentId, t: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    /// Known number of iterations.
    Fixed(u64),
    /// Length drawn once per game from a geometric law on {1, 2, ...}.
    GeometricStop(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feedback {
    NonAdaptive,
    LastMove,
    FullHistory,
}

impl Feedback {
    pub fn is_adaptive(self) -> bool {
        !matches!(self, Feedback::NonAdaptive)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    NoFlip,
    Flip,
}

impl Action {
    pub fn is_flip(self) -> bool {
        matches!(self, Action::Flip)
    }

    /// Network output index: 0 = NoFlip, 1 = Flip.
    pub fn index(self) -> usize {
        match self {
            Action::NoFlip => 0,
            Action::Flip => 1,
        }
    }

    pub fn from_index(i: usize) -> Action {
        if i == 0 {
            Action::NoFlip
        } else {
            Action::Flip
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub n_agents: usize,
    pub reward_per_iteration: Vec<f64>,
    pub flip_cost: Vec<f64>,
    pub horizon: Horizon,
    pub feedback: Vec<Feedback>,
    /// Permutation of agent ids, highest priority first. Must start with the defender.
    pub tie_priority: Vec<AgentId>,
    pub seed: u64,
}

impl GameConfig {
    /// Shared reward and cost for every agent, LM feedback, ascending tie priority.
    pub fn uniform(n_agents: usize, reward: f64, cost: f64, horizon: Horizon) -> Self {
        GameConfig {
            n_agents,
            reward_per_iteration: vec![reward; n_agents],
            flip_cost: vec![cost; n_agents],
            horizon,
            feedback: vec![Feedback::LastMove; n_agents],
            tie_priority: (0..n_agents).collect(),
            seed: 0,
        }
    }

    pub fn with_feedback(mut self, feedback: Vec<Feedback>) -> Self {
        self.feedback = feedback;
        self
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |field, reason: String| Err(EngineError::InvalidConfig { field, reason });
        let n = self.n_agents;
        if n < 2 {
            return bad("n_agents", format!("need at least 2 agents, got {n}"));
        }
        if self.reward_per_iteration.len() != n {
            return bad("reward_per_iteration", format!("expected {n} entries"));
        }
        if self.flip_cost.len() != n {
            return bad("flip_cost", format!("expected {n} entries"));
        }
        if self.feedback.len() != n {
            return bad("feedback", format!("expected {n} entries"));
        }
        if let Some(r) = self.reward_per_iteration.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return bad("reward_per_iteration", format!("{r} is not a finite value >= 0"));
        }
        if let Some(c) = self.flip_cost.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
            return bad("flip_cost", format!("{c} is not a finite value >= 0"));
        }
        match self.horizon {
            Horizon::Fixed(0) => return bad("horizon", "fixed horizon must be >= 1".into()),
            Horizon::GeometricStop(p) if !(p > 0.0 && p < 1.0) => {
                return bad("horizon", format!("geometric stop p={p} must lie strictly inside (0,1)"))
            }
            _ => {}
        }
        let mut seen = vec![false; n];
        if self.tie_priority.len() != n {
            return bad("tie_priority", format!("expected a permutation of {n} agents"));
        }
        for &a in &self.tie_priority {
            if a >= n || seen[a] {
                return bad("tie_priority", format!("not a permutation (agent {a})"));
            }
            seen[a] = true;
        }
        if self.tie_priority[0] != DEFENDER {
            return bad("tie_priority", "defender must have the highest priority".into());
        }
        Ok(())
    }

    /// True when every agent has the same R and C.
    pub fn shared_reward_and_cost(&self) -> bool {
        let r0 = self.reward_per_iteration[0];
        let c0 = self.flip_cost[0];
        self.reward_per_iteration.iter().all(|&r| r == r0) && self.flip_cost.iter().all(|&c| c == c0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlipEvent {
    pub agent: AgentId,
    pub time: u64,
}

/// Ground-truth view of a running game.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineState {
    pub t: u64,
    pub owner: AgentId,
    pub last_flip: Vec<Option<u64>>,
    pub history: Vec<FlipEvent>,
    pub accumulated_score: Vec<f64>,
    pub flips: Vec<u64>,
    /// Iterations for which the agent collected the ownership reward.
    pub owned_iterations: Vec<u64>,
    pub realized_end: u64,
}

/// What an adaptive agent learns when it flips.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub agent: AgentId,
    pub t: u64,
    /// Last flip time of every agent (own entry included), indexed by agent id.
    pub last_flip: Vec<Option<u64>>,
    /// Complete flip list up to and including `t`, only for full-history agents.
    pub full_history: Option<Vec<FlipEvent>>,
}

/// One agent's belief about the game. Refreshed only at the agent's own flip instants.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeState {
    pub agent: AgentId,
    pub t: u64,
    pub own_last_flip: Option<u64>,
    /// Opponent ids in ascending order, aligned with `opp_last_known_flip`.
    pub opponents: Vec<AgentId>,
    pub opp_last_known_flip: Vec<Option<u64>>,
}

impl KnowledgeState {
    pub fn new(agent: AgentId, n_agents: usize) -> Self {
        let opponents: Vec<AgentId> = (0..n_agents).filter(|&j| j != agent).collect();
        KnowledgeState {
            agent,
            t: 0,
            own_last_flip: None,
            opp_last_known_flip: vec![None; opponents.len()],
            opponents,
        }
    }

    pub fn advance_to(&mut self, t: u64) {
        self.t = t;
    }

    pub fn absorb(&mut self, obs: &Observation) {
        debug_assert_eq!(obs.agent, self.agent);
        self.own_last_flip = obs.last_flip[self.agent];
        for (slot, &j) in self.opp_last_known_flip.iter_mut().zip(&self.opponents) {
            *slot = obs.last_flip[j];
        }
    }

    /// Iterations since `flip`, counting from game start when it never happened.
    pub fn elapsed(&self, flip: Option<u64>) -> u64 {
        self.t - flip.unwrap_or(0)
    }
}

/// Final per-agent tally.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentTally {
    pub score: f64,
    pub flips: u64,
    pub ownership: f64,
}

#[derive(Debug, Clone)]
pub struct Game {
    config: GameConfig,
    state: EngineState,
    /// Owner after each completed iteration; kept for trace export and audits.
    owners: Vec<AgentId>,
}

impl Game {
    /// Starts a game. For geometric stopping the length is drawn here, once.
    pub fn new(config: GameConfig, rng_seed: u64) -> Result<Game, EngineError> {
        config.validate()?;
        let realized_end = match config.horizon {
            Horizon::Fixed(t) => t,
            Horizon::GeometricStop(p) => sample_stop_time(p, rng_seed),
        };
        let n = config.n_agents;
        Ok(Game {
            state: EngineState {
                t: 0,
                owner: DEFENDER,
                last_flip: vec![None; n],
                history: Vec::new(),
                accumulated_score: vec![0.0; n],
                flips: vec![0; n],
                owned_iterations: vec![0; n],
                realized_end,
            },
            owners: Vec::with_capacity(realized_end.min(1 << 20) as usize),
            config,
        })
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn state(&self) -> &EngineState {
        &self.state
    }

    pub fn t(&self) -> u64 {
        self.state.t
    }

    pub fn is_over(&self) -> bool {
        self.state.t >= self.state.realized_end
    }

    /// Owner at the end of every completed iteration.
    pub fn owner_timeline(&self) -> &[AgentId] {
        &self.owners
    }

    /// Plays iteration `t` and returns each agent's immediate reward.
    pub fn step(&mut self, actions: &[Action]) -> Result<Vec<f64>, EngineError> {
        let n = self.config.n_agents;
        if actions.len() != n {
            return Err(EngineError::ActionCount { expected: n, got: actions.len() });
        }
        if self.is_over() {
            return Err(EngineError::GameOver(self.state.realized_end));
        }
        let t = self.state.t;
        let prev_owner = self.state.owner;
        let mut rewards = vec![0.0; n];
        for (i, (reward, action)) in rewards.iter_mut().zip(actions).enumerate() {
            if i == prev_owner {
                *reward += self.config.reward_per_iteration[i];
            }
            if action.is_flip() {
                *reward -= self.config.flip_cost[i];
            }
        }
        self.state.owned_iterations[prev_owner] += 1;

        for (i, action) in actions.iter().enumerate() {
            if action.is_flip() {
                self.state.history.push(FlipEvent { agent: i, time: t });
                self.state.last_flip[i] = Some(t);
                self.state.flips[i] += 1;
            }
        }
        if let Some(&winner) = self.config.tie_priority.iter().find(|&&a| actions[a].is_flip()) {
            self.state.owner = winner;
        }
        for (acc, r) in self.state.accumulated_score.iter_mut().zip(&rewards) {
            *acc += r;
        }
        self.owners.push(self.state.owner);
        self.state.t += 1;
        Ok(rewards)
    }

    /// Feedback for an adaptive agent that flipped in the iteration just played.
    pub fn observe(&self, agent: AgentId) -> Result<Observation, EngineError> {
        let feedback = *self.config.feedback.get(agent).ok_or(EngineError::UnknownAgent(agent))?;
        if !feedback.is_adaptive() {
            return Err(EngineError::NoFeedback(agent));
        }
        let now = self.state.t.checked_sub(1);
        if now.is_none() || self.state.last_flip[agent] != now {
            return Err(EngineError::NotFlipInstant { agent, t: self.state.t.saturating_sub(1) });
        }
        let full_history = (feedback == Feedback::FullHistory).then(|| self.state.history.clone());
        Ok(Observation {
            agent,
            t: now.unwrap_or(0),
            last_flip: self.state.last_flip.clone(),
            full_history,
        })
    }

    pub fn final_scores(&self) -> Result<Vec<AgentTally>, EngineError> {
        if !self.is_over() {
            return Err(EngineError::NotOver { t: self.state.t, end: self.state.realized_end });
        }
        let len = self.state.realized_end as f64;
        Ok((0..self.config.n_agents)
            .map(|i| AgentTally {
                score: self.state.accumulated_score[i],
                flips: self.state.flips[i],
                ownership: self.state.owned_iterations[i] as f64 / len,
            })
            .collect())
    }

    /// Newline-delimited trace: header `t,agent_id,event`, one `flip` row per flip,
    /// one `owner` row per ownership change, then one `end` summary row per agent
    /// with payload `score=..;flips=..;ownership=..`.
    pub fn trace(&self) -> String {
        let mut out = String::from("t,agent_id,event\n");
        let mut prev_owner = DEFENDER;
        let mut events = self.state.history.iter().peekable();
        for (t, &owner) in self.owners.iter().enumerate() {
            let t = t as u64;
            while let Some(ev) = events.next_if(|ev| ev.time == t) {
                let _ = writeln!(out, "{t},{},flip", ev.agent);
            }
            if owner != prev_owner {
                let _ = writeln!(out, "{t},{owner},owner");
                prev_owner = owner;
            }
        }
        if let Ok(tallies) = self.final_scores() {
            for (i, tally) in tallies.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "end,{i},score={};flips={};ownership={}",
                    tally.score, tally.flips, tally.ownership
                );
            }
        }
        out
    }
}

/// Draws a game length from Geometric(p) on {1, 2, ...}.
pub fn sample_stop_time(p: f64, seed: u64) -> u64 {
    let mut rng = stream_rng(seed, crate::rng::STREAM_STOP_TIME);
    let geom = Geometric::new(p).expect("p validated inside (0,1)");
    1 + geom.sample(&mut rng)
}

/// Replays fixed flip schedules; used by tests and examples.
pub fn play_schedule(config: GameConfig, flip_times: &[Vec<u64>]) -> Result<Game, EngineError> {
    let mut game = Game::new(config, 0)?;
    while !game.is_over() {
        let t = game.t();
        let actions: Vec<Action> = flip_times
            .iter()
            .map(|times| if times.contains(&t) { Action::Flip } else { Action::NoFlip })
            .collect();
        game.step(&actions)?;
    }
    Ok(game)
}
