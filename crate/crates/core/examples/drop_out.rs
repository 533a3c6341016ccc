//! Against an attacker flipping every 3 iterations with a flip cost of 4, every
//! flip loses money; the trained DQN learns to stop flipping.
//!
//! ```text
//! cargo run --release --example drop_out -- [n_games]
//! ```

use flipit::harness::{run_training, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut cfg = ExperimentConfig::parse(include_str!("../configs/dqn_vs_pa3.toml"))?;
    if let Some(n) = std::env::args().nth(1) {
        cfg.n_games = n.parse()?;
        cfg.window = cfg.window.min(cfg.n_games);
    }
    let out = run_training(&cfg)?;
    let s = &out.summary;
    for (i, series) in s.moving_average.iter().enumerate() {
        let picks: Vec<String> = series.iter().step_by((series.len() / 8).max(1)).map(|v| format!("{v:.3}")).collect();
        println!("agent {i} moving average: {}", picks.join(" "));
    }
    let dqn = &s.converged[0];
    println!("dqn converged: mean {:.4}, flips per iteration {:.4}", dqn.mean_score_per_iter, dqn.flip_rate);
    let learner = out.learner.as_ref().expect("dqn present");
    for own in [1.0, 3.0, 10.0, 50.0] {
        let q = learner.q_values(&[own / 100.0, 1.0 / 100.0])?;
        println!("  own elapsed {own:>4}: Q(no flip) {:>8.3}  Q(flip) {:>8.3}", q[0], q[1]);
    }
    Ok(())
}
