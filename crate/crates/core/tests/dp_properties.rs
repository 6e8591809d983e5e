//! Distributional properties of the causality test that need many seeded
//! replications: exchangeability under permutation and directional symmetry.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use nlgc_core::dp::{dp_direction_battery, dp_statistic, DpConfig};
use nlgc_core::mc::{simulate_rep, ProcessKind, ProcessSpec};

/// Permuting the cause series destroys temporal linkage, so the rejection
/// rate on a causally linked pair must fall back to nominal size.
#[test]
fn permutation_restores_the_null() {
    let spec = ProcessSpec::new(ProcessKind::NonlinearCausal { coeff: 0.5 }, 300, 424_242).unwrap();
    let cfg = DpConfig::with_lag(1, 1.5);
    let reps = 500u64;
    let rejections: usize = (0..reps)
        .into_par_iter()
        .map(|r| {
            let (mut x, y) = simulate_rep(&spec, r).into_pair();
            let mut rng = ChaCha8Rng::seed_from_u64(9_000_000 + r);
            x.shuffle(&mut rng);
            usize::from(dp_statistic(&x, &y, &cfg).unwrap().p < 0.05)
        })
        .sum();
    let rate = rejections as f64 / reps as f64;
    assert!(
        (0.02..=0.09).contains(&rate),
        "permuted rejection rate {rate} outside [0.02, 0.09]"
    );
}

/// On an independent pair, both battery directions sit near nominal size.
#[test]
fn battery_directions_are_symmetric_under_independence() {
    let spec = ProcessSpec::new(ProcessKind::IidNormal, 400, 515_151).unwrap();
    let reps = 400u64;
    let counts: Vec<(usize, usize)> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let x = simulate_rep(&spec, 2 * r).into_single();
            let y = simulate_rep(&spec, 2 * r + 1).into_single();
            let entries = dp_direction_battery(&x, &y, 1, 1.5).unwrap();
            let fwd = usize::from(entries[0].outcome.p < 0.05);
            let rev = usize::from(entries[1].outcome.p < 0.05);
            (fwd, rev)
        })
        .collect();
    let fwd_rate = counts.iter().map(|c| c.0).sum::<usize>() as f64 / reps as f64;
    let rev_rate = counts.iter().map(|c| c.1).sum::<usize>() as f64 / reps as f64;
    for (name, rate) in [("x=>y", fwd_rate), ("y=>x", rev_rate)] {
        assert!(
            (0.01..=0.10).contains(&rate),
            "{name} rejection rate {rate} far from nominal size"
        );
    }
}
