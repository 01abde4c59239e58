use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use y00_core::attack::{
    build_decrypt_table, candidate_keys, eve_decrypt, known_plaintext_search, observe, WedgeIndex,
};
use y00_core::keystream::{expand_key, LfsrConfig, SeedKey};
use y00_core::measurement::NoiseModel;
use y00_core::modulation::ProtocolParams;
use y00_core::rng::stream_rng;

const CHUNK: u64 = 50_000;

/// Decryption errors of the key-holding wedge attack over `total` symbols.
fn keyed_errors(s: f64, m: u32, total: u64, master: u64) -> u64 {
    let params = ProtocolParams::new(s, m, 1).unwrap();
    let table = build_decrypt_table(m).unwrap();
    (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(master, 1, c);
            let mut errors = 0;
            for _ in 0..CHUNK.min(total - c * CHUNK) {
                let k = rng.gen_range(0..m);
                let r = rng.gen_range(0..2u8);
                let j = observe(k, r, &params, NoiseModel::QFunction, &mut rng).unwrap();
                errors += u64::from(eve_decrypt(j, k, &table).unwrap() != r);
            }
            errors
        })
        .sum()
}

#[test]
fn keyed_wedge_decryption_is_error_free_at_high_energy() {
    assert_eq!(keyed_errors(100.0, 200, 1_000_000, 11), 0);
}

#[test]
fn keyed_wedge_decryption_errs_at_high_noise() {
    assert!(keyed_errors(0.25, 4, 100_000, 12) > 0);
}

/// Mean candidate-set size over `trials` noisy observations.
fn mean_candidates(s: f64, m: u32, c: f64, trials: u64, master: u64) -> f64 {
    let params = ProtocolParams::new(s, m, 1).unwrap();
    let mut rng = stream_rng(master, 2, 0);
    let total: usize = (0..trials)
        .map(|_| {
            let k = rng.gen_range(0..m);
            let r = rng.gen_range(0..2u8);
            let j = observe(k, r, &params, NoiseModel::QFunction, &mut rng).unwrap();
            candidate_keys(j, r, &params, c).unwrap().len()
        })
        .sum();
    total as f64 / trials as f64
}

#[test]
fn candidate_count_matches_band_oracle() {
    // Bit-r end points have density M/2π around the circle, so a band of
    // half-width c/√S holds about cM/(π√S) of them.
    let (s, m, c) = (100.0f64, 200, std::f64::consts::PI);
    let oracle = c * m as f64 / (std::f64::consts::PI * s.sqrt());
    let mean = mean_candidates(s, m, c, 20_000, 21);
    assert!((mean / oracle - 1.0).abs() < 0.25, "{mean} vs {oracle}");
}

#[test]
fn candidate_count_doubles_with_m() {
    let c = std::f64::consts::PI;
    let sizes: Vec<f64> = [64, 128, 256]
        .iter()
        .map(|&m| mean_candidates(100.0, m, c, 20_000, 22))
        .collect();
    for w in sizes.windows(2) {
        assert!((w[1] / w[0] / 2.0 - 1.0).abs() < 0.1, "{sizes:?}");
    }
}

#[test]
fn true_key_is_always_a_candidate_within_the_band() {
    let params = ProtocolParams::new(100.0, 200, 1).unwrap();
    let mut rng = stream_rng(23, 0, 0);
    for _ in 0..10_000 {
        let k = rng.gen_range(0..200);
        let r = rng.gen_range(0..2u8);
        let state = y00_core::modulation::encode(k, r, &params).unwrap();
        let outcome = NoiseModel::QFunction.sample(&state, &mut rng);
        let j = y00_core::attack::wedge_of(&outcome, 200).unwrap();
        let dev = (outcome.phase().unwrap() - state.phase()).rem_euclid(2.0 * std::f64::consts::PI);
        let dev = dev.min(2.0 * std::f64::consts::PI - dev);
        // Wedge rounding adds at most half a wedge to the deviation.
        if dev + std::f64::consts::PI / 400.0 <= 3.0 / 10.0 {
            assert!(candidate_keys(j, r, &params, 3.0)
                .unwrap()
                .keys
                .contains(&k));
        }
    }
}

struct Transcript {
    wedges: Vec<WedgeIndex>,
    plaintext: Vec<u8>,
}

fn transmit(
    seed: &SeedKey,
    cfg: &LfsrConfig,
    params: &ProtocolParams,
    rng: &mut impl Rng,
) -> Transcript {
    let key = expand_key(seed, cfg, params.n, params.m).unwrap();
    let plaintext: Vec<u8> = (0..params.n).map(|_| rng.gen_range(0..2)).collect();
    let wedges = key
        .blocks()
        .iter()
        .zip(&plaintext)
        .map(|(&k, &r)| observe(k, r, params, NoiseModel::QFunction, rng).unwrap())
        .collect();
    Transcript { wedges, plaintext }
}

#[test]
fn known_plaintext_search_ranks_true_seed_first() {
    let cfg = LfsrConfig::primitive(8).unwrap();
    let params = ProtocolParams::new(100.0, 16, 64).unwrap();
    let mut rng = stream_rng(31, 0, 0);
    for value in [1u64, 0x5a, 0xff] {
        let seed = SeedKey::from_u64(value, 8).unwrap();
        let t = transmit(&seed, &cfg, &params, &mut rng);
        let ranked = known_plaintext_search(&t.wedges, &t.plaintext, &cfg, &params).unwrap();
        assert_eq!(ranked[0].seed, value);
        assert_eq!(ranked[0].score, 64);
        assert!(ranked[1].score < 64);
    }
}

#[test]
fn vacuum_rank_is_uniform() {
    let cfg = LfsrConfig::primitive(8).unwrap();
    let params = ProtocolParams::new(0.0, 16, 16).unwrap();
    let reps = 3_000;
    let bins = 15;
    let ranks: Vec<usize> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(32, 0, i as u64);
            let value = rng.gen_range(1..=255u64);
            let seed = SeedKey::from_u64(value, 8).unwrap();
            let t = transmit(&seed, &cfg, &params, &mut rng);
            let ranked = known_plaintext_search(&t.wedges, &t.plaintext, &cfg, &params).unwrap();
            ranked.iter().position(|s| s.seed == value).unwrap()
        })
        .collect();
    let mut counts = vec![0f64; bins];
    for r in ranks {
        counts[r * bins / 255] += 1.0;
    }
    let expected = reps as f64 / bins as f64;
    let chi2: f64 = counts
        .iter()
        .map(|c| (c - expected).powi(2) / expected)
        .sum();
    let critical = ChiSquared::new((bins - 1) as f64)
        .unwrap()
        .inverse_cdf(1.0 - 1e-3);
    assert!(chi2 < critical, "chi2 = {chi2}, critical = {critical}");
}

#[test]
fn true_seed_score_dominates_a_wrong_seed() {
    let cfg = LfsrConfig::primitive(8).unwrap();
    let params = ProtocolParams::new(1.0, 16, 32).unwrap();
    let (truth, wrong) = (0x3cu64, 0xa1u64);
    let seed = SeedKey::from_u64(truth, 8).unwrap();
    let reps = 400;
    let (mut true_scores, mut wrong_scores): (Vec<usize>, Vec<usize>) = (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(33, 0, i);
            let t = transmit(&seed, &cfg, &params, &mut rng);
            let ranked = known_plaintext_search(&t.wedges, &t.plaintext, &cfg, &params).unwrap();
            let score = |v| ranked.iter().find(|s| s.seed == v).unwrap().score;
            (score(truth), score(wrong))
        })
        .unzip();
    true_scores.sort_unstable();
    wrong_scores.sort_unstable();
    let cdf = |xs: &[usize], x: usize| xs.partition_point(|&v| v <= x) as f64 / xs.len() as f64;
    // One-sided two-sample KS: F_wrong - F_true large, F_true - F_wrong small.
    let (mut d_plus, mut d_minus) = (0f64, 0f64);
    for x in 0..=params.n {
        let diff = cdf(&wrong_scores, x) - cdf(&true_scores, x);
        d_plus = d_plus.max(diff);
        d_minus = d_minus.max(-diff);
    }
    let n = reps as f64;
    let critical = ((1e-3f64).ln() * -(2.0 * n) / (2.0 * n * n)).sqrt();
    assert!(d_plus > critical, "D+ = {d_plus}, critical = {critical}");
    assert!(d_minus < critical, "D- = {d_minus}, critical = {critical}");
}
