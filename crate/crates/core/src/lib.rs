//! A desk-scale FlipIt laboratory.
//!
//! * [`engine`]: the discrete-time n-player game with defender tie priority and
//!   flip-gated feedback.
//! * [`strategies`]: periodic, random-phase periodic and exponential renewal
//!   players, plus the Greedy local-benefit best response.
//! * [`learner`]: a deep Q-learning agent built on a hand-written MLP, Adam and
//!   experience replay, with tabular oracles.
//! * [`harness`]: experiment configs, game and training loops, sweeps, metrics
//!   and result files.
//!
//! Runnable walkthroughs live in `examples/`.

pub mod engine;
pub mod harness;
pub mod learner;
pub mod rng;
pub mod strategies;

pub use engine::{Action, AgentId, Feedback, Game, GameConfig, Horizon, KnowledgeState, DEFENDER};
pub use strategies::{GreedySpec, InterFlipPmf, RenewalSpec, StrategySpec};
