//! Trains the DQN defender against a renewal attacker, printing the 100-game
//! moving average as it goes, then writes result files and a checkpoint.
//!
//! ```text
//! cargo run --release --example train_dqn -- [config.toml] [n_games]
//! ```
//! The default config is `configs/dqn_vs_pa50.toml` (2000 games, a few minutes).

use std::path::PathBuf;

use flipit::harness::{load_config, run_experiment_with, write_results, RunMeta};
use flipit::learner::Checkpoint;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/dqn_vs_pa50.toml"));
    let mut cfg = load_config(&path)?;
    if let Some(n) = args.next() {
        cfg.n_games = n.parse()?;
        cfg.window = cfg.window.min(cfg.n_games);
    }

    let mut recent = Vec::new();
    let outcome = run_experiment_with(&cfg, |game, learner| {
        recent.push(game.agents[0].score_per_iter);
        if recent.len() == 100 {
            let eps = learner.map_or(0.0, |l| l.epsilon());
            let mean = recent.iter().sum::<f64>() / 100.0;
            println!("games {:>5}: mean score/iter {mean:>7.4}  epsilon {eps:.4}", game.game + 1);
            recent.clear();
        }
    })?;

    let s = &outcome.summary;
    for c in &s.converged {
        println!("{:<20} converged {:>8.4}  flip rate {:.4}", c.strategy, c.mean_score_per_iter, c.flip_rate);
    }
    let meta = RunMeta::new(&cfg);
    write_results(s, &meta, cfg.output.format, &cfg.output.dir)?;
    if let Some(learner) = &outcome.learner {
        let text = Checkpoint::capture(learner, &meta.config_hash).to_text();
        std::fs::write(cfg.output.dir.join("checkpoint.txt"), text)?;
    }
    println!("results in {} ({:.0}s)", cfg.output.dir.display(), s.wall_time_secs);
    Ok(())
}
