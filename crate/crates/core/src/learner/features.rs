//! Turning an agent's knowledge into network input.

use serde::{Deserialize, Serialize};

use crate::engine::KnowledgeState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Elapsed times are divided by this.
    pub scale: f64,
    /// Append the iterations left in a fixed-horizon game.
    pub time_remaining: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig { scale: 100.0, time_remaining: false }
    }
}

impl FeatureConfig {
    pub fn dim(&self, n_agents: usize) -> usize {
        n_agents + usize::from(self.time_remaining)
    }
}

/// `[own elapsed, elapsed since each opponent's last known flip, (time left)]`,
/// all divided by the scale. A flip never seen counts from game start.
pub fn encode_state(knowledge: &KnowledgeState, cfg: &FeatureConfig, horizon: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(knowledge.opponents.len() + 2);
    out.push(knowledge.elapsed(knowledge.own_last_flip) as f64 / cfg.scale);
    out.extend(knowledge.opp_last_known_flip.iter().map(|&f| knowledge.elapsed(f) as f64 / cfg.scale));
    if cfg.time_remaining {
        out.push(horizon.saturating_sub(knowledge.t) as f64 / cfg.scale);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let unit = FeatureConfig { scale: 1.0, time_remaining: false };
        let mut k = KnowledgeState::new(0, 2);
        k.t = 100;
        k.own_last_flip = Some(90);
        k.opp_last_known_flip = vec![Some(60)];
        assert_eq!(encode_state(&k, &unit, 500), vec![10.0, 40.0]);

        let mut k = KnowledgeState::new(0, 2);
        k.t = 5;
        k.own_last_flip = Some(3);
        assert_eq!(encode_state(&k, &unit, 500), vec![2.0, 5.0]);

        let k = KnowledgeState::new(1, 4);
        assert_eq!(encode_state(&k, &unit, 10).len(), 4);
        let with_time = FeatureConfig { time_remaining: true, ..unit };
        assert_eq!(encode_state(&k, &with_time, 10), vec![0.0, 0.0, 0.0, 0.0, 10.0]);
        assert_eq!(with_time.dim(4), 5);
    }
}
