//! Runs a sweep config cell by cell and writes `sweep.csv` plus per-cell files.
//!
//! ```text
//! cargo run --release --example sweep -- [config.toml] [n_games per cell]
//! ```
//! Defaults to `configs/period_sweep.toml`; `configs/move_rate_sweep.toml` runs
//! the players x move-rate grid with random opponents.

use std::path::PathBuf;

use flipit::harness::{expand_cells, load_config, run_cell, write_sweep};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/period_sweep.toml"));
    let mut cfg = load_config(&path)?;
    if let Some(n) = args.next() {
        cfg.n_games = n.parse()?;
        cfg.window = cfg.window.min(cfg.n_games);
    }
    let mut done = Vec::new();
    for cell in expand_cells(&cfg) {
        let out = run_cell(cell)?;
        let s = &out.outcome.summary;
        let best = s.best_opponent(0).map_or(f64::NAN, |b| s.converged_mean(b));
        println!(
            "cell {:>2} [{}]  dqn {:>8.4}  best opponent {:>8.4}  ({:.0}s)",
            out.cell.index,
            out.cell.label(),
            s.converged_mean(0),
            best,
            s.wall_time_secs
        );
        done.push(out);
    }
    write_sweep(&cfg, &done, cfg.output.format, &cfg.output.dir)?;
    println!("wrote {}", cfg.output.dir.join("sweep.csv").display());
    Ok(())
}
