//! Greedy's planned delay as a function of the time since the opponent's last
//! flip, then Greedy playing 100 games against each opponent.
//!
//! ```text
//! cargo run --release --example greedy_response
//! ```

use flipit::harness::{run_experiment, ExperimentConfig};
use flipit::strategies::{greedy_next_move, GreedyMove, GreedySpec, RenewalSpec, StrategySpec};

fn main() {
    let opponents = [RenewalSpec::Periodic { period: 50 }, RenewalSpec::Exponential { rate: 0.05 }];
    for opp in opponents {
        let spec = GreedySpec::new(opp.inter_flip_pmf(), 1.0, 4.0, true);
        println!("against {opp} (z_max {})", spec.horizon_cap);
        for delta in [0, 10, 25, 49, 60] {
            match greedy_next_move(&spec, delta) {
                GreedyMove::Flip { delay, benefit } => {
                    println!("  delta {delta:>3}: flip in {delay:>3}, local benefit {benefit:.4}")
                }
                GreedyMove::NoProfitableFlip => println!("  delta {delta:>3}: no profitable flip"),
            }
        }
    }

    for opp in opponents {
        let mut cfg = ExperimentConfig::new(vec![StrategySpec::Greedy(opp), StrategySpec::Renewal(opp)], 100, 1000);
        cfg.window = 10;
        cfg.tail_fraction = 1.0;
        let out = run_experiment(&cfg).expect("valid experiment");
        let s = &out.summary;
        println!(
            "greedy vs {opp}: greedy {:.4} per iteration, opponent {:.4}",
            s.converged_mean(0),
            s.converged_mean(1)
        );
    }
}
