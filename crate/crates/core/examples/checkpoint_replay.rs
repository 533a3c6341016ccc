//! Trains briefly, saves a checkpoint, restores it and plays one frozen game.
//!
//! ```text
//! cargo run --release --example checkpoint_replay
//! ```

use flipit::harness::{build_players, run_game_traced, run_training, ExperimentConfig};
use flipit::learner::Checkpoint;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ExperimentConfig::parse(include_str!("../configs/dqn_vs_pa50.toml"))?;
    cfg.n_games = 300;
    let out = run_training(&cfg)?;
    let learner = out.learner.expect("dqn present");

    let dir = tempdir();
    let path = dir.join("checkpoint.txt");
    std::fs::write(&path, Checkpoint::capture(&learner, &cfg.hash()).to_text())?;
    let restored = Checkpoint::from_text(&std::fs::read_to_string(&path)?)?;
    assert_eq!(restored.online.params(), learner.online().params());
    println!("checkpoint {} bytes, config hash {}", std::fs::metadata(&path)?.len(), restored.config_hash);

    let mut frozen = restored.into_learner(cfg.train.clone(), cfg.base_seed)?;
    frozen.set_frozen(true);
    let mut players = build_players(&cfg.agents, Some(&mut frozen))?;
    let (result, trace) = run_game_traced(&cfg.game_config(), &mut players, 12345, 0)?;
    for line in trace.lines().filter(|l| l.ends_with("flip")).take(12) {
        println!("  {line}");
    }
    println!("frozen policy: {:.4} per iteration, {} flips", result.agents[0].score_per_iter, result.agents[0].flips);
    Ok(())
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("flipit-checkpoint-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    dir
}
