use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use flipit::harness::{
    self, build_players, load_config, run_experiment, run_game_traced, run_sweep, run_training, write_results, write_sweep,
    ExperimentConfig, HarnessError, OutputFormat, RunMeta,
};
use flipit::learner::{Checkpoint, DqnLearner};
use flipit::StrategySpec;

#[derive(Parser)]
#[command(name = "flipit", version, about = "FlipIt game engine, strategies and DQN experiments")]
struct Cli {
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `base_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// csv or json; overrides the config.
    #[arg(long, global = true)]
    format: Option<OutputFormat>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play a single game and dump its full timeline.
    Run {
        /// Trained learner for the dqn slot (played greedily).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Train the dqn agent over `n_games` games; writes results and a checkpoint.
    Train,
    /// Run every cell of the config's [sweep] section.
    Sweep,
    /// Evaluate a greedy agent against its renewal opponent.
    GreedyBench,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, HarnessError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| HarnessError::Unsupported("--config is required".into()))?;
    let mut cfg = load_config(path)?;
    if let Some(seed) = cli.seed {
        cfg.base_seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    if let Some(format) = cli.format {
        cfg.output.format = format;
    }
    Ok(cfg)
}

fn print_summary(summary: &harness::RunSummary) {
    for (i, c) in summary.converged.iter().enumerate() {
        println!(
            "agent {i} {:<24} converged mean/iter {:>9.5}  flip rate {:.5}  ({} games)",
            c.strategy, c.mean_score_per_iter, c.flip_rate, c.games
        );
    }
    eprintln!("wall time {:.1}s", summary.wall_time_secs);
}

fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|source| HarnessError::Io { path: parent.into(), source })?;
    }
    std::fs::write(path, text).map_err(|source| HarnessError::Io { path: path.into(), source })
}

fn run(cli: &Cli) -> Result<(), HarnessError> {
    let cfg = load(cli)?;
    match &cli.command {
        Command::Run { checkpoint } => {
            let cfg = cfg.resolve_random(cfg.base_seed);
            let mut learner = match (cfg.dqn_count(), checkpoint) {
                (0, _) => None,
                (_, Some(path)) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|source| HarnessError::Io { path: path.clone(), source })?;
                    let mut l = Checkpoint::from_text(&text)?.into_learner(cfg.train.clone(), cfg.base_seed)?;
                    l.set_frozen(true);
                    Some(l)
                }
                (_, None) => {
                    let dim = cfg.train.features.dim(cfg.agents.len());
                    Some(DqnLearner::new(cfg.train.clone(), dim, cfg.base_seed)?)
                }
            };
            let mut players = build_players(&cfg.agents, learner.as_mut())?;
            let game_cfg = cfg.game_config();
            let (result, trace) = run_game_traced(&game_cfg, &mut players, cfg.base_seed, 0)?;
            match &cli.out {
                Some(dir) => write_text(&dir.join("trace.csv"), &trace)?,
                None => print!("{trace}"),
            }
            for (i, a) in result.agents.iter().enumerate() {
                eprintln!(
                    "agent {i} {:<24} score {:>8} flips {:>4} ownership {:.4}",
                    a.strategy, a.score, a.flips, a.ownership
                );
            }
        }
        Command::Train => {
            let outcome = run_training(&cfg)?;
            let meta = RunMeta::new(&cfg);
            let dir = &cfg.output.dir;
            for p in write_results(&outcome.summary, &meta, cfg.output.format, dir)? {
                eprintln!("wrote {}", p.display());
            }
            let learner = outcome.learner.as_ref().expect("training keeps its learner");
            let ckpt = dir.join("checkpoint.txt");
            write_text(&ckpt, &Checkpoint::capture(learner, &meta.config_hash).to_text())?;
            eprintln!("wrote {}", ckpt.display());
            print_summary(&outcome.summary);
        }
        Command::Sweep => {
            let cells = run_sweep(&cfg)?;
            write_sweep(&cfg, &cells, cfg.output.format, &cfg.output.dir)?;
            for c in &cells {
                println!("cell {} [{}]", c.cell.index, c.cell.label());
                print_summary(&c.outcome.summary);
            }
        }
        Command::GreedyBench => {
            if !cfg.agents.iter().any(|a| matches!(a, StrategySpec::Greedy(_))) {
                return Err(HarnessError::Unsupported("greedy-bench needs a greedy:<opponent> agent".into()));
            }
            let outcome = run_experiment(&cfg)?;
            write_results(&outcome.summary, &RunMeta::new(&cfg), cfg.output.format, &cfg.output.dir)?;
            print_summary(&outcome.summary);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
