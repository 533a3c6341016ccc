//! Per-game results and run statistics.

use serde::Serialize;

use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentResult {
    pub strategy: String,
    pub score: f64,
    pub score_per_iter: f64,
    pub flips: u64,
    pub ownership: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameResult {
    pub game: usize,
    pub seed: u64,
    pub length: u64,
    pub agents: Vec<AgentResult>,
    /// Whether the learner's exploration rate sat at its floor when the game
    /// started; `None` when no learner played.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at_epsilon_floor: Option<bool>,
}

impl GameResult {
    pub fn total_flips(&self) -> u64 {
        self.agents.iter().map(|a| a.flips).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergedStats {
    pub strategy: String,
    /// Mean per-iteration score over the converged tail.
    pub mean_score_per_iter: f64,
    /// Flips per iteration over the converged tail.
    pub flip_rate: f64,
    pub games: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub results: Vec<GameResult>,
    pub window: usize,
    pub tail_fraction: f64,
    /// Per agent: trailing `window`-game mean of score per iteration, one entry per
    /// game from game `window` onward.
    pub moving_average: Vec<Vec<f64>>,
    pub converged: Vec<ConvergedStats>,
    /// False when no tail game started at the exploration floor, in which case the
    /// converged statistics fall back to the whole tail.
    pub tail_at_floor: bool,
    #[serde(skip)]
    pub wall_time_secs: f64,
}

impl RunSummary {
    pub fn n_agents(&self) -> usize {
        self.converged.len()
    }

    pub fn converged_mean(&self, agent: usize) -> f64 {
        self.converged[agent].mean_score_per_iter
    }

    /// Agent (other than `me`) with the highest converged mean.
    pub fn best_opponent(&self, me: usize) -> Option<usize> {
        (0..self.n_agents())
            .filter(|&i| i != me)
            .max_by(|&a, &b| self.converged_mean(a).total_cmp(&self.converged_mean(b)))
    }
}

/// Moving averages over `window` games and converged means over the final
/// `ceil(tail_fraction * n)` games, restricted to games played at the exploration
/// floor when a learner is present (the whole tail when none was).
pub fn summarize(results: Vec<GameResult>, window: usize, tail_fraction: f64) -> Result<RunSummary, HarnessError> {
    if window == 0 || results.len() < window {
        return Err(HarnessError::TooFewGames { have: results.len(), window });
    }
    let n_agents = results[0].agents.len();
    let moving_average = (0..n_agents)
        .map(|i| {
            let series: Vec<f64> = results.iter().map(|r| r.agents[i].score_per_iter).collect();
            moving_average(&series, window)
        })
        .collect();

    let tail_len = ((tail_fraction * results.len() as f64).ceil() as usize).clamp(1, results.len());
    let window_games = &results[results.len() - tail_len..];
    let mut tail: Vec<&GameResult> = window_games.iter().filter(|r| r.at_epsilon_floor != Some(false)).collect();
    let tail_at_floor = !tail.is_empty();
    if !tail_at_floor {
        tail = window_games.iter().collect();
    }
    let iterations: u64 = tail.iter().map(|r| r.length).sum();
    let converged = (0..n_agents)
        .map(|i| {
            let score: f64 = tail.iter().map(|r| r.agents[i].score).sum();
            let flips: u64 = tail.iter().map(|r| r.agents[i].flips).sum();
            ConvergedStats {
                strategy: results[0].agents[i].strategy.clone(),
                mean_score_per_iter: score / iterations as f64,
                flip_rate: flips as f64 / iterations as f64,
                games: tail.len(),
            }
        })
        .collect();
    Ok(RunSummary { results, window, tail_fraction, moving_average, converged, tail_at_floor, wall_time_secs: 0.0 })
}

pub fn moving_average(series: &[f64], window: usize) -> Vec<f64> {
    series.windows(window).map(|w| w.iter().sum::<f64>() / window as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn game(i: usize, score: f64) -> GameResult {
        GameResult {
            game: i,
            seed: 0,
            length: 10,
            agents: vec![AgentResult {
                strategy: "x".into(),
                score,
                score_per_iter: score / 10.0,
                flips: 1,
                ownership: 1.0,
            }],
            at_epsilon_floor: None,
        }
    }

    #[test]
    fn moving_average_examples() {
        assert_eq!(moving_average(&[0.0, 2.0, 4.0], 2), vec![1.0, 3.0]);
        assert_eq!(moving_average(&[1.5; 5], 3), vec![1.5; 3]);
    }

    #[test]
    fn constant_series() {
        let s = summarize((0..10).map(|i| game(i, 7.0)).collect(), 4, 0.5).unwrap();
        assert!(s.moving_average[0].iter().all(|&m| (m - 0.7).abs() < 1e-15));
        assert!((s.converged_mean(0) - 0.7).abs() < 1e-15);
        assert_eq!(s.converged[0].flip_rate, 0.1);
    }

    #[test]
    fn tail_uses_final_games() {
        let s = summarize((0..100).map(|i| game(i, i as f64 + 1.0)).collect(), 1, 0.2).unwrap();
        assert_eq!(s.converged[0].games, 20);
        // games 81..=100 in 1-based numbering
        let expect = (81..=100).map(|v| v as f64).sum::<f64>() / 200.0;
        assert!((s.converged_mean(0) - expect).abs() < 1e-12);
    }

    #[test]
    fn too_few_games() {
        assert!(matches!(
            summarize(vec![game(0, 1.0)], 2, 0.2),
            Err(HarnessError::TooFewGames { have: 1, window: 2 })
        ));
    }

    #[test]
    fn skips_games_before_epsilon_floor() {
        let mut results: Vec<GameResult> = (0..10).map(|i| game(i, i as f64)).collect();
        for r in results.iter_mut() {
            r.at_epsilon_floor = Some(r.game >= 9);
        }
        let s = summarize(results, 1, 0.5).unwrap();
        assert_eq!(s.converged[0].games, 1);
        assert!((s.converged_mean(0) - 0.9).abs() < 1e-15);
        assert!(s.tail_at_floor);
    }

    #[test]
    fn falls_back_to_whole_tail_before_floor() {
        let mut results: Vec<GameResult> = (0..10).map(|i| game(i, i as f64)).collect();
        for r in results.iter_mut() {
            r.at_epsilon_floor = Some(false);
        }
        let s = summarize(results, 1, 0.2).unwrap();
        assert!(!s.tail_at_floor);
        assert_eq!(s.converged[0].games, 2);
    }
}
