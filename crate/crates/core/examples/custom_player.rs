//! Plugging a hand-written strategy into the game loop.
//!
//! `Shadow` is a last-move player that, after each of its flips, schedules the next
//! one for the moment it expects the opponent to flip again, using the gap between
//! the opponent's last two observed flips. Three players share the resource.
//!
//! ```text
//! cargo run --release --example custom_player
//! ```

use flipit::engine::{Action, Feedback};
use flipit::harness::{run_game, GameContext, HarnessError, Player, RenewalPlayer, StepOutcome};
use flipit::{GameConfig, Horizon, RenewalSpec};

struct Shadow {
    watch: usize,
    seen: Vec<u64>,
    next_flip: u64,
}

impl Player for Shadow {
    fn label(&self) -> String {
        format!("shadow:{}", self.watch)
    }

    fn feedback(&self) -> Feedback {
        Feedback::LastMove
    }

    fn begin_game(&mut self, _: &GameContext) -> Result<(), HarnessError> {
        self.seen.clear();
        self.next_flip = 30;
        Ok(())
    }

    fn act(&mut self, t: u64) -> Result<Action, HarnessError> {
        Ok(if t == self.next_flip { Action::Flip } else { Action::NoFlip })
    }

    fn after_step(&mut self, outcome: &StepOutcome<'_>) -> Result<(), HarnessError> {
        let Some(obs) = outcome.observation else { return Ok(()) };
        if let Some(last) = obs.last_flip[self.watch] {
            if self.seen.last() != Some(&last) {
                self.seen.push(last);
            }
        }
        self.next_flip = match self.seen.as_slice() {
            [.., a, b] => {
                let gap = (b - a).max(1);
                // next multiple of the gap after b that is still in the future
                let mut next = b + gap;
                while next <= outcome.t {
                    next += gap;
                }
                next
            }
            _ => outcome.t + 30,
        };
        Ok(())
    }
}

fn main() -> Result<(), HarnessError> {
    let cfg = GameConfig::uniform(3, 1.0, 4.0, Horizon::Fixed(1000));
    let mut totals = [0.0; 3];
    let games = 50;
    for g in 0..games {
        let mut players: Vec<Box<dyn Player>> = vec![
            Box::new(Shadow { watch: 1, seen: Vec::new(), next_flip: 0 }),
            Box::new(RenewalPlayer::new(RenewalSpec::Periodic { period: 40 })),
            Box::new(RenewalPlayer::new(RenewalSpec::Exponential { rate: 0.01 })),
        ];
        let r = run_game(&cfg, &mut players, g, g as usize)?;
        for (t, a) in totals.iter_mut().zip(&r.agents) {
            *t += a.score_per_iter / games as f64;
        }
    }
    for (name, mean) in ["shadow:1", "periodic:40", "exponential:0.01"].iter().zip(totals) {
        println!("{name:<18} {mean:>8.4} per iteration");
    }
    Ok(())
}
