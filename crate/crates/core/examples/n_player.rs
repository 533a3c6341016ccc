//! One DQN against two periodic attackers with periods 20 and 50.
//!
//! ```text
//! cargo run --release --example n_player -- [n_games]
//! ```

use flipit::harness::{run_training, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ExperimentConfig::parse(include_str!("../configs/n_player.toml"))?;
    if let Some(n) = std::env::args().nth(1) {
        cfg.n_games = n.parse()?;
        cfg.window = cfg.window.min(cfg.n_games);
    }
    let out = run_training(&cfg)?;
    let s = &out.summary;
    for c in &s.converged {
        println!("{:<14} converged {:>8.4}  flip rate {:.4}", c.strategy, c.mean_score_per_iter, c.flip_rate);
    }
    if let Some(best) = s.best_opponent(0) {
        println!("best opponent: {} at {:.4}", s.converged[best].strategy, s.converged_mean(best));
    }
    Ok(())
}
