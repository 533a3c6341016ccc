//! Tabular Q-learning on a small chain MDP, checked against value iteration.
//!
//! ```text
//! cargo run --release --example tabular_oracle
//! ```

use flipit::learner::{tabular_q_update, value_iteration, FiniteMdp, QTable};
use flipit::rng::stream_rng;
use rand::Rng;

fn main() {
    let mdp = FiniteMdp::chain(5, 0.5, 1.0, 10.0);
    let gamma = 0.9;
    let exact = value_iteration(&mdp, gamma, 1e-12);
    let mut table = QTable::new(mdp.n_states());
    let mut rng = stream_rng(0, 0);
    for step in 1..=100_000u32 {
        let s = rng.random_range(0..mdp.n_states());
        let a = rng.random_range(0..2);
        let (r, next) = mdp.step[s][a];
        tabular_q_update(&mut table, s, a, r, next, 0.5, gamma);
        if step.is_power_of_two() && step >= 64 {
            let err = (0..mdp.n_states())
                .flat_map(|s| (0..2).map(move |a| (s, a)))
                .map(|(s, a)| (table.q[s][a] - exact.q[s][a]).abs())
                .fold(0.0, f64::max);
            println!("after {step:>6} updates: max |Q - Q*| = {err:.3e}");
        }
    }
    for s in 0..mdp.n_states() {
        println!("state {s}: Q* = {:?}, greedy action {}", exact.q[s], exact.greedy(s));
    }
}
