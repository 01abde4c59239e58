use rand::Rng;
use rayon::prelude::*;

use y00_core::attack::{observe, LRule};
use y00_core::infotheory::{channel_matrix, exact_entropies, KeyModel};
use y00_core::keystream::{expand_key, LfsrConfig, SeedKey};
use y00_core::measurement::NoiseModel;
use y00_core::modulation::ProtocolParams;
use y00_core::rng::stream_rng;

const SEEDS: usize = 15;
const OUTPUTS: usize = 8;

/// Plug-in `H(X | Y)` and its delta-method standard error from joint counts,
/// with `group(cell)` naming the conditioning value of each cell.
fn plug_in(counts: &[u64], group: impl Fn(usize) -> usize, groups: usize) -> (f64, f64) {
    let mut totals = vec![0u64; groups];
    for (cell, &c) in counts.iter().enumerate() {
        totals[group(cell)] += c;
    }
    let n: u64 = counts.iter().sum();
    let (mut mean, mut sq) = (0.0, 0.0);
    for (cell, &c) in counts.iter().enumerate() {
        if c > 0 {
            let surprisal = -(c as f64 / totals[group(cell)] as f64).log2();
            mean += c as f64 * surprisal;
            sq += c as f64 * surprisal * surprisal;
        }
    }
    let n = n as f64;
    mean /= n;
    let var = sq / n - mean * mean;
    (mean, (var / n).sqrt())
}

#[test]
fn exact_oracle_agrees_with_plug_in_estimate() {
    let cfg = LfsrConfig::primitive(4).unwrap();
    let params = ProtocolParams::new(1.0, 4, 1).unwrap();
    let first_blocks: Vec<u32> = (1..=SEEDS as u64)
        .map(|v| {
            expand_key(&SeedKey::from_u64(v, 4).unwrap(), &cfg, 1, 4)
                .unwrap()
                .blocks()[0]
        })
        .collect();

    let total = 10_000_000u64;
    let chunk = 250_000u64;
    // Cells indexed (seed, r, j).
    let cell = |seed: usize, r: usize, j: usize| (seed * 2 + r) * OUTPUTS + j;
    let counts = (0..total / chunk)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(50, 0, c);
            let mut counts = vec![0u64; SEEDS * 2 * OUTPUTS];
            for _ in 0..chunk {
                let seed = rng.gen_range(0..SEEDS);
                let r = rng.gen_range(0..2u8);
                let j = observe(
                    first_blocks[seed],
                    r,
                    &params,
                    NoiseModel::QFunction,
                    &mut rng,
                )
                .unwrap();
                counts[cell(seed, r as usize, j.j() as usize)] += 1;
            }
            counts
        })
        .reduce(
            || vec![0; SEEDS * 2 * OUTPUTS],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let exact = exact_entropies(
        &channel_matrix(&params).unwrap(),
        1,
        &KeyModel::new(cfg),
        &LRule::Mod2,
    )
    .unwrap();
    // H(J | R, K): group by (seed, r).
    let (h_j, se_j) = plug_in(&counts, |c| c / OUTPUTS, SEEDS * 2);
    // H(R | J, K): group by (seed, j).
    let (h_r, se_r) = plug_in(
        &counts,
        |c| (c / (2 * OUTPUTS)) * OUTPUTS + c % OUTPUTS,
        SEEDS * OUTPUTS,
    );
    assert!(
        (h_j - exact.h_j_given_rk).abs() < 3.0 * se_j,
        "{h_j} ± {se_j} vs {}",
        exact.h_j_given_rk
    );
    assert!(
        (h_r - exact.h_r_given_jk).abs() < 3.0 * se_r,
        "{h_r} ± {se_r} vs {}",
        exact.h_r_given_jk
    );
}
