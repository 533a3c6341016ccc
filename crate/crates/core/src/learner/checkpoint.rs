//! Line-oriented text checkpoints.
//!
//! ```text
//! flipit-dqn-checkpoint
//! version 1
//! config_hash <hex>
//! dims 2 64 64 2
//! epsilon <f64>
//! env_steps <u64>
//! train_steps <u64>
//! adam_step <u64>
//! layer <l> weights <row-major values...>
//! layer <l> bias <values...>
//! adam_m <values...>
//! adam_v <values...>
//! target none | target <values...>
//! end
//! ```
//!
//! Floats are written in Rust's shortest round-trip form, so a load restores
//! every value bit for bit.

use std::fmt::Write as _;

use super::adam::AdamState;
use super::dqn::{DqnLearner, TrainConfig};
use super::mlp::Mlp;
use super::LearnerError;

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &str = "flipit-dqn-checkpoint";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub config_hash: String,
    pub online: Mlp,
    pub target: Option<Mlp>,
    pub adam: AdamState,
    pub epsilon: f64,
    pub env_steps: u64,
    pub train_steps: u64,
}

impl Checkpoint {
    pub fn capture(learner: &DqnLearner, config_hash: &str) -> Self {
        Checkpoint {
            config_hash: config_hash.to_string(),
            online: learner.online().clone(),
            target: learner.target().cloned(),
            adam: learner.adam_state().clone(),
            epsilon: learner.epsilon(),
            env_steps: learner.env_steps(),
            train_steps: learner.train_steps(),
        }
    }

    pub fn into_learner(self, config: TrainConfig, seed: u64) -> Result<DqnLearner, LearnerError> {
        let dims = config.layer_dims(self.online.input_dim());
        if dims != self.online.dims() {
            return Err(LearnerError::Checkpoint(format!(
                "checkpoint dims {:?} do not match config dims {dims:?}",
                self.online.dims()
            )));
        }
        Ok(DqnLearner::from_parts(
            config,
            self.online,
            self.target,
            self.adam,
            self.epsilon,
            self.env_steps,
            self.train_steps,
            seed,
        ))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC}");
        let _ = writeln!(out, "version {CHECKPOINT_VERSION}");
        let _ = writeln!(out, "config_hash {}", self.config_hash);
        let _ = writeln!(out, "dims {}", join(self.online.dims().iter()));
        let _ = writeln!(out, "epsilon {:?}", self.epsilon);
        let _ = writeln!(out, "env_steps {}", self.env_steps);
        let _ = writeln!(out, "train_steps {}", self.train_steps);
        let _ = writeln!(out, "adam_step {}", self.adam.step);
        for l in 0..self.online.n_layers() {
            let (w, b) = self.online.layer(l);
            let _ = writeln!(out, "layer {l} weights {}", floats(w));
            let _ = writeln!(out, "layer {l} bias {}", floats(b));
        }
        let _ = writeln!(out, "adam_m {}", floats(&self.adam.m));
        let _ = writeln!(out, "adam_v {}", floats(&self.adam.v));
        match &self.target {
            Some(t) => {
                let _ = writeln!(out, "target {}", floats(t.params()));
            }
            None => out.push_str("target none\n"),
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<Self, LearnerError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mut next = |what: &str| {
            lines.next().ok_or_else(|| LearnerError::Checkpoint(format!("truncated before `{what}`")))
        };
        if next("magic")?.trim() != MAGIC {
            return Err(LearnerError::Checkpoint("not a flipit checkpoint".into()));
        }
        let version: u32 = parse_one(field(next("version")?, "version")?)?;
        if version != CHECKPOINT_VERSION {
            return Err(LearnerError::Checkpoint(format!("unsupported version {version}")));
        }
        let config_hash = field(next("config_hash")?, "config_hash")?.trim().to_string();
        let dims: Vec<usize> = parse_many(field(next("dims")?, "dims")?)?;
        let epsilon: f64 = parse_one(field(next("epsilon")?, "epsilon")?)?;
        let env_steps: u64 = parse_one(field(next("env_steps")?, "env_steps")?)?;
        let train_steps: u64 = parse_one(field(next("train_steps")?, "train_steps")?)?;
        let adam_step: u64 = parse_one(field(next("adam_step")?, "adam_step")?)?;
        let mut online = Mlp::zeros(&dims)?;
        for l in 0..online.n_layers() {
            let w: Vec<f64> = parse_many(field(next("layer")?, &format!("layer {l} weights"))?)?;
            let b: Vec<f64> = parse_many(field(next("layer")?, &format!("layer {l} bias"))?)?;
            let (dw, db) = online.layer_mut(l);
            if w.len() != dw.len() || b.len() != db.len() {
                return Err(LearnerError::Checkpoint(format!("layer {l} has the wrong number of values")));
            }
            dw.copy_from_slice(&w);
            db.copy_from_slice(&b);
        }
        let m: Vec<f64> = parse_many(field(next("adam_m")?, "adam_m")?)?;
        let v: Vec<f64> = parse_many(field(next("adam_v")?, "adam_v")?)?;
        let n = online.params().len();
        if m.len() != n || v.len() != n {
            return Err(LearnerError::Checkpoint("Adam moments do not match the network".into()));
        }
        let target_line = field(next("target")?, "target")?;
        let target = if target_line.trim() == "none" {
            None
        } else {
            Some(Mlp::from_parts(dims.clone(), parse_many(target_line)?)?)
        };
        if next("end")?.trim() != "end" {
            return Err(LearnerError::Checkpoint("missing `end`".into()));
        }
        Ok(Checkpoint {
            config_hash,
            online,
            target,
            adam: AdamState { m, v, step: adam_step },
            epsilon,
            env_steps,
            train_steps,
        })
    }
}

fn join<T: ToString>(it: impl Iterator<Item = T>) -> String {
    it.map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn floats(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(" ")
}

fn field<'a>(line: &'a str, key: &str) -> Result<&'a str, LearnerError> {
    line.strip_prefix(key)
        .map(|rest| rest.trim_start())
        .ok_or_else(|| LearnerError::Checkpoint(format!("expected `{key}`, found `{}`", truncate(line))))
}

fn truncate(line: &str) -> &str {
    &line[..line.len().min(40)]
}

fn parse_one<T: std::str::FromStr>(s: &str) -> Result<T, LearnerError> {
    s.trim().parse().map_err(|_| LearnerError::Checkpoint(format!("cannot parse `{}`", truncate(s))))
}

fn parse_many<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, LearnerError> {
    s.split_whitespace().map(parse_one).collect()
}
