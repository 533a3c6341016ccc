//! Deep Q-learning agent: epsilon-greedy acting, experience replay, TD targets
//! and Adam updates on the mean squared TD error.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::adam::{adam_step, AdamConfig, AdamState};
use super::features::FeatureConfig;
use super::mlp::{Mlp, Sample};
use super::replay::{ReplayBuffer, Transition};
use super::LearnerError;
use crate::engine::Action;
use crate::rng::{stream_rng, FlipRng, STREAM_LEARNER};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub gamma: f64,
    pub learning_rate: f64,
    pub epsilon_start: f64,
    pub epsilon_min: f64,
    /// Multiplicative decay applied once per environment step.
    pub epsilon_decay: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub hidden: Vec<usize>,
    /// Copy the online network into the target network every this many train
    /// steps; 0 bootstraps from the online network.
    pub target_sync: u64,
    /// One train step per this many environment steps.
    pub train_every: u64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub features: FeatureConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            gamma: 0.99,
            learning_rate: 1e-3,
            epsilon_start: 0.6,
            epsilon_min: 0.05,
            epsilon_decay: 0.999,
            batch_size: 32,
            buffer_capacity: 10_000,
            hidden: vec![64, 64],
            target_sync: 0,
            train_every: 1,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            features: FeatureConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), Vec<(String, String)>> {
        let mut errs = Vec::new();
        let mut check = |ok: bool, field: &str, msg: String| {
            if !ok {
                errs.push((field.to_string(), msg));
            }
        };
        check((0.0..1.0).contains(&self.gamma), "gamma", format!("{} not in [0,1)", self.gamma));
        check(self.learning_rate > 0.0, "learning_rate", "must be > 0".into());
        check(
            0.0 <= self.epsilon_min && self.epsilon_min <= self.epsilon_start && self.epsilon_start <= 1.0,
            "epsilon_min",
            "need 0 <= epsilon_min <= epsilon_start <= 1".into(),
        );
        check(
            self.epsilon_decay > 0.0 && self.epsilon_decay <= 1.0,
            "epsilon_decay",
            "must lie in (0,1]".into(),
        );
        check(self.batch_size >= 1, "batch_size", "must be >= 1".into());
        check(
            self.buffer_capacity >= self.batch_size,
            "buffer_capacity",
            "must be >= batch_size".into(),
        );
        check(
            !self.hidden.is_empty() && self.hidden.iter().all(|&h| h > 0),
            "hidden",
            "need at least one non-empty hidden layer".into(),
        );
        check(self.train_every >= 1, "train_every", "must be >= 1".into());
        check(self.features.scale > 0.0, "features.scale", "must be > 0".into());
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            epsilon: self.adam_epsilon,
        }
    }

    pub fn layer_dims(&self, input_dim: usize) -> Vec<usize> {
        let mut dims = vec![input_dim];
        dims.extend(&self.hidden);
        dims.push(super::mlp::N_ACTIONS);
        dims
    }
}

/// Epsilon-greedy: uniform random action with probability `epsilon`, otherwise the
/// argmax of the Q-values with ties going to `NoFlip`.
pub fn select_action<R: Rng + ?Sized>(
    net: &Mlp,
    state: &[f64],
    epsilon: f64,
    rng: &mut R,
) -> Result<Action, LearnerError> {
    if rng.random::<f64>() < epsilon {
        return Ok(Action::from_index(rng.random_range(0..2)));
    }
    Ok(greedy_action(&net.forward(state)?))
}

pub fn greedy_action(q: &[f64; 2]) -> Action {
    if q[1] > q[0] {
        Action::Flip
    } else {
        Action::NoFlip
    }
}

/// `r` for terminal transitions, else `r + gamma * max_a' Q(s', a')`.
pub fn td_targets(net: &Mlp, batch: &[&Transition], gamma: f64) -> Result<Vec<f64>, LearnerError> {
    batch
        .iter()
        .map(|t| {
            if t.terminal {
                Ok(t.reward)
            } else {
                let q = net.forward(&t.next_state)?;
                Ok(t.reward + gamma * q[0].max(q[1]))
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct DqnLearner {
    config: TrainConfig,
    online: Mlp,
    target: Option<Mlp>,
    adam: AdamState,
    buffer: ReplayBuffer,
    epsilon: f64,
    env_steps: u64,
    train_steps: u64,
    rng: FlipRng,
    frozen: bool,
}

impl DqnLearner {
    pub fn new(config: TrainConfig, input_dim: usize, seed: u64) -> Result<Self, LearnerError> {
        config
            .validate()
            .map_err(|errs| LearnerError::BadConfig(errs.into_iter().map(|(f, m)| format!("{f}: {m}")).collect()))?;
        let mut rng = stream_rng(seed, STREAM_LEARNER);
        let online = Mlp::random(&config.layer_dims(input_dim), &mut rng)?;
        let target = (config.target_sync > 0).then(|| online.clone());
        Ok(DqnLearner {
            adam: AdamState::new(online.params().len()),
            buffer: ReplayBuffer::new(config.buffer_capacity),
            epsilon: config.epsilon_start,
            env_steps: 0,
            train_steps: 0,
            online,
            target,
            rng,
            frozen: false,
            config,
        })
    }

    /// Rebuilds a learner from saved parameters; the replay buffer starts empty.
    pub(crate) fn from_parts(
        config: TrainConfig,
        online: Mlp,
        target: Option<Mlp>,
        adam: AdamState,
        epsilon: f64,
        env_steps: u64,
        train_steps: u64,
        seed: u64,
    ) -> Self {
        DqnLearner {
            buffer: ReplayBuffer::new(config.buffer_capacity),
            rng: stream_rng(seed, STREAM_LEARNER),
            frozen: false,
            config,
            online,
            target,
            adam,
            epsilon,
            env_steps,
            train_steps,
        }
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn online(&self) -> &Mlp {
        &self.online
    }

    pub fn target(&self) -> Option<&Mlp> {
        self.target.as_ref()
    }

    pub fn adam_state(&self) -> &AdamState {
        &self.adam
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn at_epsilon_floor(&self) -> bool {
        self.epsilon <= self.config.epsilon_min
    }

    pub fn env_steps(&self) -> u64 {
        self.env_steps
    }

    pub fn train_steps(&self) -> u64 {
        self.train_steps
    }

    /// A frozen learner acts greedily and neither stores transitions nor trains.
    pub fn set_frozen(&mut self, frozen: bool) {
        self.frozen = frozen;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn q_values(&self, state: &[f64]) -> Result<[f64; 2], LearnerError> {
        self.online.forward(state)
    }

    pub fn act(&mut self, state: &[f64]) -> Result<Action, LearnerError> {
        if self.frozen {
            return Ok(greedy_action(&self.online.forward(state)?));
        }
        select_action(&self.online, state, self.epsilon, &mut self.rng)
    }

    /// Stores one environment step, decays epsilon and trains when due.
    /// Returns the loss when a train step ran.
    pub fn record(&mut self, transition: Transition) -> Result<Option<f64>, LearnerError> {
        if self.frozen {
            return Ok(None);
        }
        self.buffer.push(transition);
        self.env_steps += 1;
        self.epsilon = (self.epsilon * self.config.epsilon_decay).max(self.config.epsilon_min);
        if self.env_steps % self.config.train_every != 0 || self.buffer.len() < self.config.batch_size {
            return Ok(None);
        }
        self.train_step().map(Some)
    }

    /// One minibatch update. Fails with `BufferUnderfull` (nothing changes) when the
    /// buffer holds fewer transitions than the batch size.
    pub fn train_step(&mut self) -> Result<f64, LearnerError> {
        let need = self.config.batch_size;
        if self.buffer.len() < need {
            return Err(LearnerError::BufferUnderfull { len: self.buffer.len(), need });
        }
        let slots = self.buffer.sample_slots(&mut self.rng, need);
        let batch: Vec<&Transition> = slots.iter().map(|&s| self.buffer.get(s)).collect();
        let bootstrap = self.target.as_ref().unwrap_or(&self.online);
        let targets = td_targets(bootstrap, &batch, self.config.gamma)?;
        let samples: Vec<Sample<'_>> = batch
            .iter()
            .zip(&targets)
            .map(|(t, &target)| Sample { input: &t.state, action: t.action, target })
            .collect();
        let (grad, loss) = self.online.gradient(&samples)?;
        adam_step(self.online.params_mut(), &mut self.adam, &grad, &self.config.adam());
        self.train_steps += 1;
        if let Some(target) = self.target.as_mut() {
            if self.train_steps % self.config.target_sync == 0 {
                target.params_mut().copy_from_slice(self.online.params());
            }
        }
        Ok(loss)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn transition(s: f64, a: Action, r: f64, terminal: bool) -> Transition {
        Transition { state: vec![s, s], action: a, reward: r, next_state: vec![s, s], terminal }
    }

    #[test]
    fn td_target_examples() {
        let mut net = Mlp::zeros(&[2, 1, 2]).unwrap();
        net.layer_mut(1).1.copy_from_slice(&[2.0, 1.5]);
        let term = transition(0.1, Action::Flip, 5.0, true);
        let live = transition(0.1, Action::Flip, 1.0, false);
        let t = td_targets(&net, &[&term, &live], 0.9).unwrap();
        assert_eq!(t[0], 5.0);
        assert!((t[1] - 2.8).abs() < 1e-12);
        let t = td_targets(&net, &[&live], 0.0).unwrap();
        assert_eq!(t[0], 1.0);
    }

    #[test]
    fn epsilon_zero_is_greedy_and_ties_do_not_flip() {
        let mut net = Mlp::zeros(&[2, 1, 2]).unwrap();
        let mut rng = stream_rng(1, 1);
        net.layer_mut(1).1.copy_from_slice(&[3.0, 3.0]);
        for _ in 0..50 {
            assert_eq!(select_action(&net, &[0.0, 0.0], 0.0, &mut rng).unwrap(), Action::NoFlip);
        }
        net.layer_mut(1).1.copy_from_slice(&[1.0, 3.0]);
        for _ in 0..50 {
            assert_eq!(select_action(&net, &[0.0, 0.0], 0.0, &mut rng).unwrap(), Action::Flip);
        }
    }

    #[test]
    fn underfull_buffer_skips_training() {
        let cfg = TrainConfig { batch_size: 4, hidden: vec![3], ..Default::default() };
        let mut learner = DqnLearner::new(cfg, 2, 0).unwrap();
        for _ in 0..3 {
            assert_eq!(learner.record(transition(0.1, Action::NoFlip, 1.0, false)).unwrap(), None);
        }
        assert!(matches!(learner.train_step(), Err(LearnerError::BufferUnderfull { len: 3, need: 4 })));
        assert!(learner.record(transition(0.1, Action::NoFlip, 1.0, false)).unwrap().is_some());
    }

    #[test]
    fn epsilon_schedule() {
        let cfg = TrainConfig {
            epsilon_decay: 0.9,
            epsilon_min: 0.3,
            batch_size: 1_000,
            buffer_capacity: 1_000,
            hidden: vec![2],
            ..Default::default()
        };
        let mut learner = DqnLearner::new(cfg, 2, 0).unwrap();
        assert_eq!(learner.epsilon(), 0.6);
        let mut expected = 0.6;
        for _ in 0..20 {
            learner.record(transition(0.0, Action::NoFlip, 0.0, false)).unwrap();
            expected = f64::max(expected * 0.9, 0.3);
            assert_eq!(learner.epsilon(), expected);
        }
        assert!(learner.at_epsilon_floor());
    }

    #[test]
    fn single_transition_converges() {
        let cfg = TrainConfig { batch_size: 1, hidden: vec![8, 8], gamma: 0.5, ..Default::default() };
        let mut learner = DqnLearner::new(cfg, 2, 11).unwrap();
        let t = Transition {
            state: vec![0.2, 0.4],
            action: Action::Flip,
            reward: 1.5,
            next_state: vec![0.3, 0.5],
            terminal: true,
        };
        learner.buffer.push(t.clone());
        for _ in 0..3000 {
            learner.train_step().unwrap();
        }
        let q = learner.q_values(&t.state).unwrap();
        assert!((q[1] - 1.5).abs() < 1e-3, "q={q:?}");
    }

    #[test]
    fn bad_config_rejected() {
        let cfg = TrainConfig { gamma: 1.0, ..Default::default() };
        assert!(matches!(DqnLearner::new(cfg, 2, 0), Err(LearnerError::BadConfig(_))));
    }
}
