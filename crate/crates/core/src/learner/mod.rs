//! From-scratch deep Q-learning for the adaptive agent.

mod adam;
mod checkpoint;
mod dqn;
mod features;
mod mlp;
mod replay;
mod tabular;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{Checkpoint, CHECKPOINT_VERSION};
pub use dqn::{greedy_action, select_action, td_targets, DqnLearner, TrainConfig};
pub use features::{encode_state, FeatureConfig};
pub use mlp::{Mlp, Sample, N_ACTIONS};
pub use replay::{ReplayBuffer, Transition};
pub use tabular::{tabular_q_update, value_iteration, FiniteMdp, QTable};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnerError {
    #[error("input has {got} values, network expects {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("layer dims {0:?} must be non-zero and end in 2 outputs")]
    BadDims(Vec<usize>),
    #[error("empty batch")]
    EmptyBatch,
    #[error("replay buffer holds {len} transitions, batch needs {need}")]
    BufferUnderfull { len: usize, need: usize },
    #[error("invalid train config: {0:?}")]
    BadConfig(Vec<String>),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}
