//! Agents that drive the engine: renewal, Greedy, DQN and a tabular Q-learner.

use crate::engine::{Action, AgentId, Feedback, KnowledgeState, Observation};
use crate::learner::{encode_state, tabular_q_update, DqnLearner, FeatureConfig, QTable, Transition};
use crate::rng::{stream_rng, FlipRng, STREAM_AGENT_BASE};
use crate::strategies::{greedy_next_move, GreedyMove, GreedySpec, RenewalProcess, RenewalSpec};

use super::HarnessError;

/// Per-game facts handed to a player before iteration 0.
#[derive(Debug, Clone, Copy)]
pub struct GameContext {
    pub agent: AgentId,
    pub n_agents: usize,
    /// Known horizon for fixed-length games, used only by time-aware features.
    pub horizon: u64,
    pub reward: f64,
    pub cost: f64,
    /// True when this agent wins every tie it is part of.
    pub has_tie_priority: bool,
    pub seed: u64,
}

/// What happened to one player in the iteration just played.
#[derive(Debug, Clone, Copy)]
pub struct StepOutcome<'a> {
    pub t: u64,
    pub action: Action,
    pub reward: f64,
    /// Present only for adaptive players that flipped.
    pub observation: Option<&'a Observation>,
    pub terminal: bool,
}

pub trait Player {
    fn label(&self) -> String;
    fn feedback(&self) -> Feedback;
    fn begin_game(&mut self, ctx: &GameContext) -> Result<(), HarnessError>;
    fn act(&mut self, t: u64) -> Result<Action, HarnessError>;
    fn after_step(&mut self, outcome: &StepOutcome<'_>) -> Result<(), HarnessError>;
}

/// Non-adaptive renewal player; flips whenever its sampled delay elapses.
pub struct RenewalPlayer {
    spec: RenewalSpec,
    process: Option<RenewalProcess>,
    rng: FlipRng,
    next_flip: u64,
}

impl RenewalPlayer {
    pub fn new(spec: RenewalSpec) -> Self {
        RenewalPlayer { spec, process: None, rng: stream_rng(0, 0), next_flip: 0 }
    }
}

impl Player for RenewalPlayer {
    fn label(&self) -> String {
        self.spec.to_string()
    }

    fn feedback(&self) -> Feedback {
        Feedback::NonAdaptive
    }

    fn begin_game(&mut self, ctx: &GameContext) -> Result<(), HarnessError> {
        let mut process = RenewalProcess::new(self.spec)?;
        self.rng = stream_rng(ctx.seed, STREAM_AGENT_BASE + ctx.agent as u64);
        self.next_flip = process.next_flip_delay(&mut self.rng);
        self.process = Some(process);
        Ok(())
    }

    fn act(&mut self, t: u64) -> Result<Action, HarnessError> {
        if t != self.next_flip {
            return Ok(Action::NoFlip);
        }
        let process = self.process.as_mut().expect("begin_game not called");
        self.next_flip = t + process.next_flip_delay(&mut self.rng);
        Ok(Action::Flip)
    }

    fn after_step(&mut self, _: &StepOutcome<'_>) -> Result<(), HarnessError> {
        Ok(())
    }
}

/// Last-move Greedy player for two-player games. It plans its next flip at game
/// start (as if the opponent had just flipped) and again at each of its own
/// flips, from the observed time since the opponent's last flip.
pub struct GreedyPlayer {
    opponent: RenewalSpec,
    spec: Option<GreedySpec>,
    knowledge: KnowledgeState,
    next_flip: Option<u64>,
    replan_at: Option<u64>,
}

impl GreedyPlayer {
    pub fn new(opponent: RenewalSpec) -> Self {
        GreedyPlayer {
            opponent,
            spec: None,
            knowledge: KnowledgeState::new(0, 2),
            next_flip: None,
            replan_at: None,
        }
    }

    fn plan(&mut self, t: u64) {
        let spec = self.spec.as_ref().expect("begin_game not called");
        self.knowledge.advance_to(t);
        let delta = self.knowledge.elapsed(self.knowledge.opp_last_known_flip[0]);
        match greedy_next_move(spec, delta) {
            GreedyMove::Flip { delay, .. } => {
                self.next_flip = Some(t + delay);
                self.replan_at = None;
            }
            GreedyMove::NoProfitableFlip => {
                self.next_flip = None;
                self.replan_at = Some(t + 1);
            }
        }
    }
}

impl Player for GreedyPlayer {
    fn label(&self) -> String {
        format!("greedy:{}", self.opponent)
    }

    fn feedback(&self) -> Feedback {
        Feedback::LastMove
    }

    fn begin_game(&mut self, ctx: &GameContext) -> Result<(), HarnessError> {
        if ctx.n_agents != 2 {
            return Err(HarnessError::Unsupported("greedy players need a two-player game".into()));
        }
        self.spec = Some(GreedySpec::new(
            self.opponent.inter_flip_pmf(),
            ctx.reward,
            ctx.cost,
            ctx.has_tie_priority,
        ));
        self.knowledge = KnowledgeState::new(ctx.agent, ctx.n_agents);
        self.next_flip = None;
        self.replan_at = Some(0);
        Ok(())
    }

    fn act(&mut self, t: u64) -> Result<Action, HarnessError> {
        if self.replan_at == Some(t) {
            self.plan(t);
        }
        Ok(if self.next_flip == Some(t) { Action::Flip } else { Action::NoFlip })
    }

    fn after_step(&mut self, outcome: &StepOutcome<'_>) -> Result<(), HarnessError> {
        if let Some(obs) = outcome.observation {
            self.knowledge.absorb(obs);
            self.plan(outcome.t);
        }
        Ok(())
    }
}

/// Adapter that lets a persistent [`DqnLearner`] play (and learn from) one game.
pub struct DqnPlayer<'a> {
    learner: &'a mut DqnLearner,
    features: FeatureConfig,
    knowledge: KnowledgeState,
    horizon: u64,
    state: Vec<f64>,
}

impl<'a> DqnPlayer<'a> {
    pub fn new(learner: &'a mut DqnLearner) -> Self {
        let features = learner.config().features;
        DqnPlayer { learner, features, knowledge: KnowledgeState::new(0, 2), horizon: 0, state: Vec::new() }
    }
}

impl Player for DqnPlayer<'_> {
    fn label(&self) -> String {
        "dqn".into()
    }

    fn feedback(&self) -> Feedback {
        Feedback::LastMove
    }

    fn begin_game(&mut self, ctx: &GameContext) -> Result<(), HarnessError> {
        self.knowledge = KnowledgeState::new(ctx.agent, ctx.n_agents);
        self.horizon = ctx.horizon;
        let dim = self.features.dim(ctx.n_agents);
        if dim != self.learner.online().input_dim() {
            return Err(HarnessError::Unsupported(format!(
                "learner expects {} inputs but a {}-player game yields {dim}",
                self.learner.online().input_dim(),
                ctx.n_agents
            )));
        }
        Ok(())
    }

    fn act(&mut self, t: u64) -> Result<Action, HarnessError> {
        self.knowledge.advance_to(t);
        self.state = encode_state(&self.knowledge, &self.features, self.horizon);
        Ok(self.learner.act(&self.state)?)
    }

    fn after_step(&mut self, outcome: &StepOutcome<'_>) -> Result<(), HarnessError> {
        self.knowledge.advance_to(outcome.t + 1);
        if let Some(obs) = outcome.observation {
            self.knowledge.absorb(obs);
        }
        let next_state = encode_state(&self.knowledge, &self.features, self.horizon);
        self.learner.record(Transition {
            state: std::mem::take(&mut self.state),
            action: outcome.action,
            reward: outcome.reward,
            next_state,
            terminal: outcome.terminal,
        })?;
        Ok(())
    }
}

/// Tabular Q-learner over elapsed times capped at `cap`, for two-player games.
/// State index = `min(own, cap) * (cap + 1) + min(opp, cap)`.
pub struct TabularPlayer<'a> {
    pub table: &'a mut QTable,
    pub cap: u64,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    rng: FlipRng,
    knowledge: KnowledgeState,
    state: usize,
}

impl<'a> TabularPlayer<'a> {
    pub fn new(table: &'a mut QTable, cap: u64, alpha: f64, gamma: f64, epsilon: f64) -> Self {
        assert_eq!(table.q.len() as u64, (cap + 1) * (cap + 1));
        TabularPlayer {
            table,
            cap,
            alpha,
            gamma,
            epsilon,
            rng: stream_rng(0, 0),
            knowledge: KnowledgeState::new(0, 2),
            state: 0,
        }
    }

    pub fn state_index(knowledge: &KnowledgeState, cap: u64) -> usize {
        let own = knowledge.elapsed(knowledge.own_last_flip).min(cap);
        let opp = knowledge.elapsed(knowledge.opp_last_known_flip[0]).min(cap);
        (own * (cap + 1) + opp) as usize
    }
}

impl Player for TabularPlayer<'_> {
    fn label(&self) -> String {
        "tabular".into()
    }

    fn feedback(&self) -> Feedback {
        Feedback::LastMove
    }

    fn begin_game(&mut self, ctx: &GameContext) -> Result<(), HarnessError> {
        if ctx.n_agents != 2 {
            return Err(HarnessError::Unsupported("tabular player needs a two-player game".into()));
        }
        self.knowledge = KnowledgeState::new(ctx.agent, 2);
        self.rng = stream_rng(ctx.seed, STREAM_AGENT_BASE + ctx.agent as u64);
        Ok(())
    }

    fn act(&mut self, t: u64) -> Result<Action, HarnessError> {
        use rand::Rng;
        self.knowledge.advance_to(t);
        self.state = Self::state_index(&self.knowledge, self.cap);
        if self.rng.random::<f64>() < self.epsilon {
            return Ok(Action::from_index(self.rng.random_range(0..2)));
        }
        Ok(Action::from_index(self.table.greedy(self.state)))
    }

    fn after_step(&mut self, outcome: &StepOutcome<'_>) -> Result<(), HarnessError> {
        self.knowledge.advance_to(outcome.t + 1);
        if let Some(obs) = outcome.observation {
            self.knowledge.absorb(obs);
        }
        let next = (!outcome.terminal).then(|| Self::state_index(&self.knowledge, self.cap));
        tabular_q_update(self.table, self.state, outcome.action.index(), outcome.reward, next, self.alpha, self.gamma);
        Ok(())
    }
}
