use flipit::rng::stream_rng;
use flipit::strategies::{
    conditional_remaining_pmf, greedy_local_benefit, greedy_next_move, GreedyMove, GreedySpec, InterFlipPmf,
    RenewalProcess, RenewalSpec,
};
use proptest::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn gaps(spec: RenewalSpec, n: usize, seed: u64) -> Vec<u64> {
    let mut rng = stream_rng(seed, 0);
    let mut p = RenewalProcess::new(spec).unwrap();
    p.next_flip_delay(&mut rng);
    (0..n).map(|_| p.next_flip_delay(&mut rng)).collect()
}

#[test]
fn exponential_mean_gap() {
    let n = 100_000;
    let rate = 0.05;
    let g = gaps(RenewalSpec::Exponential { rate }, n, 3);
    assert!(g.iter().all(|&x| x >= 1));
    let mean = g.iter().sum::<u64>() as f64 / n as f64;
    // geometric on {1, 2, ...}: variance (1 - q) / q^2
    let se = ((1.0 - rate) / (rate * rate) / n as f64).sqrt();
    assert!((mean - 20.0).abs() < 3.0 * se, "mean {mean}, se {se}");
}

#[test]
fn periodic_gaps_are_exact() {
    assert!(gaps(RenewalSpec::Periodic { period: 50 }, 1000, 1).iter().all(|&g| g == 50));
    assert!(gaps(RenewalSpec::PeriodicRandomPhase { period: 50 }, 1000, 1).iter().all(|&g| g == 50));
}

/// Kolmogorov statistic of integer phases against the discrete uniform on [0, p),
/// evaluated at every support point.
fn ks_discrete_uniform(phases: &[u64], p: u64) -> f64 {
    let n = phases.len() as f64;
    let mut counts = vec![0u64; p as usize];
    for &x in phases {
        counts[x as usize] += 1;
    }
    let mut cum = 0u64;
    let mut d: f64 = 0.0;
    for (k, c) in counts.iter().enumerate() {
        cum += c;
        d = d.max((cum as f64 / n - (k + 1) as f64 / p as f64).abs());
    }
    d
}

#[test]
fn random_phase_is_uniform() {
    let n = 20_000;
    let phases: Vec<u64> = (0..n)
        .map(|s| {
            let mut rng = stream_rng(s, 9);
            RenewalProcess::new(RenewalSpec::PeriodicRandomPhase { period: 50 }).unwrap().next_flip_delay(&mut rng)
        })
        .collect();
    assert!(phases.iter().all(|&x| x < 50));
    // 1% critical value of the Kolmogorov distribution (conservative for discrete data)
    let crit = 1.628 / (n as f64).sqrt();
    let d = ks_discrete_uniform(&phases, 50);
    assert!(d < crit, "KS statistic {d} >= {crit}");
}

#[test]
fn exponential_gaps_are_independent() {
    // chi-square test of independence between consecutive gaps, binned at the median
    let g = gaps(RenewalSpec::Exponential { rate: 0.05 }, 100_001, 17);
    let bin = |x: u64| usize::from(x > 14); // P(gap <= 14) is close to 1/2
    let mut table = [[0f64; 2]; 2];
    for w in g.windows(2) {
        table[bin(w[0])][bin(w[1])] += 1.0;
    }
    let n: f64 = table.iter().flatten().sum();
    let rows = [table[0][0] + table[0][1], table[1][0] + table[1][1]];
    let cols = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
    let mut chi = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let e = rows[i] * cols[j] / n;
            chi += (table[i][j] - e).powi(2) / e;
        }
    }
    let crit = ChiSquared::new(1.0).unwrap().inverse_cdf(0.99);
    assert!(chi < crit, "chi-square {chi} >= {crit}");
}

/// Enumeration oracle: expected owned iterations and their rate, summed directly
/// over the support of the remaining time `s`.
fn oracle_benefit(g: &InterFlipPmf, z: u64, r: f64, c: f64, tie: bool, s_max: u64) -> f64 {
    let mut owned = 0.0;
    for s in 1..=s_max {
        let p = g.mass(s);
        let held = if s < z {
            s as f64
        } else if s == z && !tie {
            (z - 1) as f64
        } else {
            z as f64
        };
        owned += p * held;
    }
    // mass beyond s_max holds for the full z
    let tail = g.survival(s_max);
    owned += tail * z as f64;
    (r * owned - c) / z as f64
}

fn oracle_argmax(spec: &GreedySpec, g: &InterFlipPmf) -> (u64, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for z in 1..=spec.horizon_cap {
        let l = oracle_benefit(g, z, spec.reward, spec.cost, spec.has_tie_priority, spec.horizon_cap + 1);
        if l >= best.1 - 1e-12 {
            best = (z, l);
        }
    }
    best
}

#[test]
fn greedy_against_periodic_fifty() {
    let spec = GreedySpec::new(RenewalSpec::Periodic { period: 50 }.inter_flip_pmf(), 1.0, 4.0, true);
    let g = conditional_remaining_pmf(&spec.opponent_pmf, 10).unwrap();
    let (z, l) = oracle_argmax(&spec, &g);
    assert_eq!((z, l), (40, 0.9));
    assert_eq!(greedy_next_move(&spec, 10), GreedyMove::Flip { delay: 40, benefit: 0.9 });
}

#[test]
fn greedy_against_exponential_ignores_elapsed_time() {
    let spec = GreedySpec::new(RenewalSpec::Exponential { rate: 0.05 }.inter_flip_pmf(), 1.0, 4.0, true);
    let first = greedy_next_move(&spec, 0);
    for delta in [1, 5, 17, 40, 200] {
        assert_eq!(greedy_next_move(&spec, delta), first);
    }
    let GreedyMove::Flip { delay, benefit } = first else { panic!("expected a flip") };
    let g = conditional_remaining_pmf(&spec.opponent_pmf, 0).unwrap();
    let (z, l) = oracle_argmax(&spec, &g);
    assert_eq!(delay, z);
    assert!((benefit - l).abs() < 1e-9);
}

fn renewal_spec() -> impl Strategy<Value = RenewalSpec> {
    prop_oneof![
        (1u64..120).prop_map(|period| RenewalSpec::Periodic { period }),
        (0.01f64..0.9).prop_map(|rate| RenewalSpec::Exponential { rate }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn greedy_matches_enumeration(
        opp in renewal_spec(),
        delta_frac in 0.0f64..1.0,
        cost in 0.0f64..30.0,
        tie in any::<bool>(),
    ) {
        let spec = GreedySpec::new(opp.inter_flip_pmf(), 1.0, cost, tie);
        let delta = (delta_frac * opp.mean_gap()).floor() as u64;
        let g = conditional_remaining_pmf(&spec.opponent_pmf, delta).unwrap();
        let (z, l) = oracle_argmax(&spec, &g);
        match greedy_next_move(&spec, delta) {
            GreedyMove::Flip { delay, benefit } => {
                prop_assert!((benefit - l).abs() < 1e-9, "benefit {} vs oracle {}", benefit, l);
                let at_delay = greedy_local_benefit(&spec, &g, delay);
                prop_assert!((at_delay - l).abs() < 1e-9);
                prop_assert!(l >= 0.0);
                // ties resolved to the largest delay: nothing beyond it does as well
                prop_assert!(delay >= z || (greedy_local_benefit(&spec, &g, z) - l).abs() < 1e-9);
            }
            GreedyMove::NoProfitableFlip => prop_assert!(l < 0.0, "oracle found {} at {}", l, z),
        }
    }

    #[test]
    fn conditional_pmf_is_normalized(opp in renewal_spec(), delta in 0u64..100) {
        let f0 = opp.inter_flip_pmf();
        if f0.survival(delta) > 0.0 {
            let g = conditional_remaining_pmf(&f0, delta).unwrap();
            let total: f64 = (1..=2000).map(|s| g.mass(s)).sum::<f64>() + g.survival(2000);
            prop_assert!((total - 1.0).abs() < 1e-9);
        }
    }
}
