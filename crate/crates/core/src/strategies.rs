//! Renewal strategies and the Greedy local-benefit best response.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrategyError {
    #[error("bad strategy token `{token}` in `{input}`: {reason}")]
    Parse { input: String, token: String, reason: String },
    #[error("invalid renewal parameter: {0}")]
    InvalidParameter(String),
    #[error("opponent is overdue: no inter-flip mass beyond delta={delta}")]
    Overdue { delta: u64 },
    #[error("pmf must be non-negative and sum to 1 (sum={0})")]
    BadPmf(f64),
}

/// Inter-flip law of a renewal strategy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RenewalSpec {
    /// First flip at iteration 0, then every `period` iterations.
    Periodic { period: u64 },
    /// Phase drawn uniformly from `[0, period)` once per game, then every `period`.
    PeriodicRandomPhase { period: u64 },
    /// Flips independently with probability `rate` in every iteration, so gaps are
    /// geometric on {1, 2, ...} with mean `1 / rate`.
    Exponential { rate: f64 },
}

impl RenewalSpec {
    pub fn validate(&self) -> Result<(), StrategyError> {
        match *self {
            RenewalSpec::Periodic { period } | RenewalSpec::PeriodicRandomPhase { period } if period == 0 => {
                Err(StrategyError::InvalidParameter("period must be >= 1".into()))
            }
            RenewalSpec::Exponential { rate } if !(rate > 0.0 && rate <= 1.0) => Err(
                StrategyError::InvalidParameter(format!("rate {rate} must lie in (0, 1] per iteration")),
            ),
            _ => Ok(()),
        }
    }

    pub fn mean_gap(&self) -> f64 {
        match *self {
            RenewalSpec::Periodic { period } | RenewalSpec::PeriodicRandomPhase { period } => period as f64,
            RenewalSpec::Exponential { rate } => 1.0 / rate,
        }
    }

    pub fn move_rate(&self) -> f64 {
        1.0 / self.mean_gap()
    }

    /// An "active agent" flips more often than the flip cost can pay for.
    pub fn is_active(&self, flip_cost: f64) -> bool {
        self.mean_gap() < flip_cost
    }

    /// Inter-flip pmf of this strategy, as handed to Greedy.
    pub fn inter_flip_pmf(&self) -> InterFlipPmf {
        match *self {
            RenewalSpec::Periodic { period } | RenewalSpec::PeriodicRandomPhase { period } => {
                InterFlipPmf::point_mass(period)
            }
            RenewalSpec::Exponential { rate } => InterFlipPmf::Geometric { q: rate },
        }
    }

    fn label(&self) -> String {
        match *self {
            RenewalSpec::Periodic { period } => format!("periodic:{period}"),
            RenewalSpec::PeriodicRandomPhase { period } => format!("periodic_rp:{period}"),
            RenewalSpec::Exponential { rate } => format!("exponential:{rate}"),
        }
    }
}

impl fmt::Display for RenewalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Stateful sampler of flip delays for one game.
#[derive(Debug, Clone)]
pub struct RenewalProcess {
    spec: RenewalSpec,
    started: bool,
}

impl RenewalProcess {
    pub fn new(spec: RenewalSpec) -> Result<Self, StrategyError> {
        spec.validate()?;
        Ok(RenewalProcess { spec, started: false })
    }

    pub fn spec(&self) -> RenewalSpec {
        self.spec
    }

    /// The first call returns the offset of the first flip from game start (0 for
    /// plain periodic); later calls return the gap to the next flip, always >= 1.
    pub fn next_flip_delay<R: Rng + ?Sized>(&mut self, rng: &mut R) -> u64 {
        let first = !self.started;
        self.started = true;
        match self.spec {
            RenewalSpec::Periodic { period } => {
                if first {
                    0
                } else {
                    period
                }
            }
            RenewalSpec::PeriodicRandomPhase { period } => {
                if first {
                    rng.random_range(0..period)
                } else {
                    period
                }
            }
            RenewalSpec::Exponential { rate } => {
                // failures before the first success
                let failures = if rate >= 1.0 {
                    0
                } else {
                    Geometric::new(rate).expect("validated rate").sample(rng)
                };
                if first {
                    failures
                } else {
                    failures + 1
                }
            }
        }
    }
}

/// Inter-flip time distribution over {1, 2, ...}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InterFlipPmf {
    /// `probs[k]` is the mass at `k + 1`.
    Table(Vec<f64>),
    /// Geometric on {1, 2, ...} with success probability `q` per iteration.
    Geometric { q: f64 },
}

impl InterFlipPmf {
    pub fn point_mass(at: u64) -> Self {
        assert!(at >= 1, "inter-flip times start at 1");
        let mut probs = vec![0.0; at as usize];
        probs[at as usize - 1] = 1.0;
        InterFlipPmf::Table(probs)
    }

    /// Checks non-negativity and unit total mass (within 1e-9).
    pub fn from_table(probs: Vec<f64>) -> Result<Self, StrategyError> {
        let sum: f64 = probs.iter().sum();
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
            return Err(StrategyError::BadPmf(sum));
        }
        Ok(InterFlipPmf::Table(probs))
    }

    pub fn mass(&self, s: u64) -> f64 {
        if s == 0 {
            return 0.0;
        }
        match self {
            InterFlipPmf::Table(p) => p.get(s as usize - 1).copied().unwrap_or(0.0),
            InterFlipPmf::Geometric { q } => (1.0 - q).powi((s - 1) as i32) * q,
        }
    }

    /// P(S > s).
    pub fn survival(&self, s: u64) -> f64 {
        match self {
            InterFlipPmf::Table(p) => p.iter().skip(s as usize).sum(),
            InterFlipPmf::Geometric { q } => (1.0 - q).powi(s as i32),
        }
    }

    /// Smallest `s` with P(S <= s) >= `level`.
    pub fn quantile(&self, level: f64) -> u64 {
        match self {
            InterFlipPmf::Table(p) => {
                let mut acc = 0.0;
                for (k, m) in p.iter().enumerate() {
                    acc += m;
                    if acc >= level - 1e-12 {
                        return k as u64 + 1;
                    }
                }
                p.len().max(1) as u64
            }
            InterFlipPmf::Geometric { q } => {
                if *q >= 1.0 {
                    1
                } else {
                    ((1.0 - level).ln() / (1.0 - q).ln()).ceil().max(1.0) as u64
                }
            }
        }
    }
}

/// Distribution of the time until the opponent's next flip, given that `delta`
/// iterations have passed since its last one: `g(s) = f0(delta + s) / P(S > delta)`.
pub fn conditional_remaining_pmf(f0: &InterFlipPmf, delta: u64) -> Result<InterFlipPmf, StrategyError> {
    match f0 {
        InterFlipPmf::Geometric { .. } => Ok(f0.clone()),
        InterFlipPmf::Table(p) => {
            let tail = p.get(delta as usize..).unwrap_or(&[]);
            let mass: f64 = tail.iter().sum();
            if mass <= 0.0 {
                return Err(StrategyError::Overdue { delta });
            }
            Ok(InterFlipPmf::Table(tail.iter().map(|m| m / mass).collect()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedySpec {
    pub opponent_pmf: InterFlipPmf,
    pub horizon_cap: u64,
    pub reward: f64,
    pub cost: f64,
    pub has_tie_priority: bool,
}

impl GreedySpec {
    /// `horizon_cap` defaults to four times the 0.999 quantile of the opponent pmf.
    pub fn new(opponent_pmf: InterFlipPmf, reward: f64, cost: f64, has_tie_priority: bool) -> Self {
        let horizon_cap = 4 * opponent_pmf.quantile(0.999).max(1);
        GreedySpec { opponent_pmf, horizon_cap, reward, cost, has_tie_priority }
    }
}

/// Expected reward rate of flipping now and again in `z` iterations, when the
/// opponent's next flip is `s ~ g` iterations away. The agent collects reward for
/// `min(s, z)` iterations; without tie priority a simultaneous opponent flip at `z`
/// costs the boundary iteration.
pub fn greedy_local_benefit(spec: &GreedySpec, g: &InterFlipPmf, z: u64) -> f64 {
    debug_assert!(z >= 1);
    // E[min(S, z)] = sum_{k<z} P(S > k)
    let mut owned: f64 = (0..z).map(|k| g.survival(k)).sum();
    if !spec.has_tie_priority {
        owned -= g.mass(z);
    }
    (spec.reward * owned - spec.cost) / z as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GreedyMove {
    Flip { delay: u64, benefit: f64 },
    /// Every candidate delay has negative benefit.
    NoProfitableFlip,
}

/// Delay maximizing the local benefit over `[1, horizon_cap]`; ties go to the largest
/// delay. An overdue opponent is treated as about to flip, giving delay 1.
pub fn greedy_next_move(spec: &GreedySpec, delta: u64) -> GreedyMove {
    let g = match conditional_remaining_pmf(&spec.opponent_pmf, delta) {
        Ok(g) => g,
        Err(_) => {
            let imminent = InterFlipPmf::point_mass(1);
            return GreedyMove::Flip { delay: 1, benefit: greedy_local_benefit(spec, &imminent, 1) };
        }
    };
    let mut best = (0, f64::NEG_INFINITY);
    // Incremental E[min(S, z)] keeps the scan linear in horizon_cap.
    let mut owned_before = 0.0;
    for z in 1..=spec.horizon_cap.max(1) {
        owned_before += g.survival(z - 1);
        let mut owned = owned_before;
        if !spec.has_tie_priority {
            owned -= g.mass(z);
        }
        let benefit = (spec.reward * owned - spec.cost) / z as f64;
        if benefit >= best.1 {
            best = (z, benefit);
        }
    }
    if best.1 < 0.0 {
        GreedyMove::NoProfitableFlip
    } else {
        GreedyMove::Flip { delay: best.0, benefit: best.1 }
    }
}

/// Strategy grammar used by config files: `periodic:50`, `periodic_rp:50`,
/// `exponential:0.05`, `greedy:<renewal spec>`, `dqn`, and `random:<rate>` (an
/// opponent whose kind is drawn per experiment cell). Case-insensitive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum StrategySpec {
    Renewal(RenewalSpec),
    Greedy(RenewalSpec),
    Dqn,
    Random { rate: f64 },
}

impl StrategySpec {
    pub fn is_adaptive(&self) -> bool {
        matches!(self, StrategySpec::Greedy(_) | StrategySpec::Dqn)
    }
}

impl fmt::Display for StrategySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrategySpec::Renewal(r) => write!(f, "{r}"),
            StrategySpec::Greedy(r) => write!(f, "greedy:{r}"),
            StrategySpec::Dqn => f.write_str("dqn"),
            StrategySpec::Random { rate } => write!(f, "random:{rate}"),
        }
    }
}

impl From<StrategySpec> for String {
    fn from(s: StrategySpec) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for StrategySpec {
    type Error = StrategyError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

fn parse_renewal(input: &str, kind: &str, arg: Option<&str>) -> Result<RenewalSpec, StrategyError> {
    let err = |token: &str, reason: &str| StrategyError::Parse {
        input: input.to_string(),
        token: token.to_string(),
        reason: reason.to_string(),
    };
    let arg = arg.ok_or_else(|| err(kind, "missing parameter after `:`"))?;
    let spec = match kind {
        "periodic" | "periodic_rp" => {
            let period: u64 = arg.parse().map_err(|_| err(arg, "period must be a positive integer"))?;
            if kind == "periodic" {
                RenewalSpec::Periodic { period }
            } else {
                RenewalSpec::PeriodicRandomPhase { period }
            }
        }
        "exponential" => {
            let rate: f64 = arg.parse().map_err(|_| err(arg, "rate must be a number"))?;
            RenewalSpec::Exponential { rate }
        }
        other => return Err(err(other, "unknown renewal strategy")),
    };
    spec.validate().map_err(|e| err(arg, &e.to_string()))?;
    Ok(spec)
}

impl FromStr for StrategySpec {
    type Err = StrategyError;

    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let lower = input.trim().to_ascii_lowercase();
        let (head, rest) = match lower.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (lower.as_str(), None),
        };
        match head {
            "dqn" if rest.is_none() => Ok(StrategySpec::Dqn),
            "greedy" => {
                let rest = rest.ok_or_else(|| StrategyError::Parse {
                    input: input.to_string(),
                    token: "greedy".into(),
                    reason: "expected greedy:<opponent spec>".into(),
                })?;
                let (kind, arg) = match rest.split_once(':') {
                    Some((k, a)) => (k, Some(a)),
                    None => (rest, None),
                };
                Ok(StrategySpec::Greedy(parse_renewal(input, kind, arg)?))
            }
            "random" => {
                let arg = rest.unwrap_or("");
                let rate: f64 = arg.parse().map_err(|_| StrategyError::Parse {
                    input: input.to_string(),
                    token: arg.to_string(),
                    reason: "random:<move rate> needs a numeric rate".into(),
                })?;
                if !(rate > 0.0 && rate <= 1.0) {
                    return Err(StrategyError::Parse {
                        input: input.to_string(),
                        token: arg.to_string(),
                        reason: "move rate must lie in (0, 1]".into(),
                    });
                }
                Ok(StrategySpec::Random { rate })
            }
            _ => parse_renewal(input, head, rest).map(StrategySpec::Renewal),
        }
    }
}
