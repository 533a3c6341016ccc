//! Samples renewal strategies and compares empirical gap statistics with theory.
//!
//! ```text
//! cargo run --release --example renewal_gaps
//! ```

use flipit::rng::stream_rng;
use flipit::strategies::{RenewalProcess, RenewalSpec};

fn main() {
    let n = 100_000;
    for spec in [
        RenewalSpec::Periodic { period: 50 },
        RenewalSpec::PeriodicRandomPhase { period: 50 },
        RenewalSpec::Exponential { rate: 0.05 },
        RenewalSpec::Exponential { rate: 0.2 },
    ] {
        let mut rng = stream_rng(1, 0);
        let mut process = RenewalProcess::new(spec).expect("valid spec");
        let first = process.next_flip_delay(&mut rng);
        let gaps: Vec<f64> = (0..n).map(|_| process.next_flip_delay(&mut rng) as f64).collect();
        let mean = gaps.iter().sum::<f64>() / n as f64;
        let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        println!(
            "{spec:<18} first flip {first:>3}  mean gap {mean:>8.3} (expected {:>6.2})  sd {:.3}",
            spec.mean_gap(),
            var.sqrt()
        );
    }

    let phases: Vec<u64> = (0..10_000)
        .map(|s| {
            let mut rng = stream_rng(s, 0);
            RenewalProcess::new(RenewalSpec::PeriodicRandomPhase { period: 50 })
                .expect("valid spec")
                .next_flip_delay(&mut rng)
        })
        .collect();
    let mut hist = [0u32; 5];
    for p in phases {
        hist[(p / 10) as usize] += 1;
    }
    println!("periodic_rp:50 phase histogram by decade: {hist:?}");
}
