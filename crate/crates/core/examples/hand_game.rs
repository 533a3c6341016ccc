//! Replays two tiny hand-checkable games and prints their traces.
//!
//! ```text
//! cargo run --example hand_game
//! ```

use flipit::engine::{play_schedule, Action, Feedback, Game, GameConfig, Horizon, KnowledgeState};

fn main() {
    // Defender flips at 7, attacker at 3; R = 1, C = 4, T = 10.
    let cfg = GameConfig::uniform(2, 1.0, 4.0, Horizon::Fixed(10));
    let game = play_schedule(cfg, &[vec![7], vec![3]]).expect("valid schedule");
    print!("{}", game.trace());

    // Knowledge of an LM defender that flips at 1 and 6 while the attacker flips at 0, 2, 4.
    let cfg = GameConfig::uniform(2, 1.0, 4.0, Horizon::Fixed(8))
        .with_feedback(vec![Feedback::LastMove, Feedback::NonAdaptive]);
    let mut game = Game::new(cfg, 0).expect("valid config");
    let mut knowledge = KnowledgeState::new(0, 2);
    let (mine, theirs) = ([1u64, 6], [0u64, 2, 4]);
    println!("\nt  opp_last_known");
    while !game.is_over() {
        let t = game.t();
        let act = |s: &[u64]| if s.contains(&t) { Action::Flip } else { Action::NoFlip };
        game.step(&[act(&mine), act(&theirs)]).expect("game running");
        knowledge.advance_to(t + 1);
        if mine.contains(&t) {
            knowledge.absorb(&game.observe(0).expect("own flip"));
        }
        let known = knowledge.opp_last_known_flip[0].map_or("never".to_string(), |f| f.to_string());
        println!("{t}  {known}");
    }
}
