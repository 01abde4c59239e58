use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use y00_core::attack::{build_decrypt_table, eve_decrypt, observe};
use y00_core::keystream::expand_key_with;
use y00_core::measurement::bob_channel;
use y00_core::rng::stream_rng;

use super::Outcome;
use crate::config::RunConfig;
use crate::error::CliResult;
use crate::report::{num, Payload};

/// RNG domain of the `simulate` subcommand.
pub const DOMAIN: u64 = 1;

/// Symbols per RNG chunk; chunk `c` always draws from stream `c`.
pub const CHUNK: usize = 1 << 16;

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct ErrorCounts {
    pub bob: u64,
    pub eve_without_key: u64,
    pub eve_with_key: u64,
}

impl std::ops::Add for ErrorCounts {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            bob: self.bob + o.bob,
            eve_without_key: self.eve_without_key + o.eve_without_key,
            eve_with_key: self.eve_with_key + o.eve_with_key,
        }
    }
}

/// Transmit `cfg.n` uniform bits and count errors for each receiver.
///
/// Per symbol, in order: data bit, Bob's channel, Eve's heterodyne outcome,
/// Eve's key guess. Eve's two decryptions share the one measurement.
pub fn count_errors(cfg: &RunConfig) -> CliResult<ErrorCounts> {
    let params = cfg.params()?;
    let m = params.m;
    let key = expand_key_with(&cfg.seed_key, &cfg.lfsr, cfg.n, m, cfg.extraction)?;
    let table = build_decrypt_table(m)?;
    let counts = key
        .blocks()
        .par_chunks(CHUNK)
        .enumerate()
        .map(|(c, blocks)| {
            let mut rng = stream_rng(cfg.master_seed, DOMAIN, c as u64);
            let mut counts = ErrorCounts::default();
            for &k in blocks {
                let r: u8 = rng.gen_range(0..2);
                counts.bob += u64::from(bob_channel(r, params.s, &mut rng) != r);
                let j = observe(k, r, &params, cfg.noise, &mut rng)?;
                let guess = rng.gen_range(0..m);
                counts.eve_with_key += u64::from(eve_decrypt(j, k, &table)? != r);
                counts.eve_without_key += u64::from(eve_decrypt(j, guess, &table)? != r);
            }
            Ok(counts)
        })
        .collect::<y00_core::Result<Vec<_>>>()?;
    Ok(counts
        .into_iter()
        .fold(ErrorCounts::default(), |a, b| a + b))
}

pub fn run(cfg: &RunConfig) -> CliResult<Outcome> {
    let mut payload = Payload::table(&["role", "errors", "trials", "ber"]);
    if cfg.n > 0 {
        let counts = count_errors(cfg)?;
        let trials = cfg.n as u64;
        for (role, errors) in [
            ("bob", counts.bob),
            ("eve_without_key", counts.eve_without_key),
            ("eve_with_key", counts.eve_with_key),
        ] {
            payload.push_row(vec![
                json!(role),
                json!(errors),
                json!(trials),
                num(errors as f64 / trials as f64),
            ]);
        }
    }
    Ok(Outcome {
        options: Vec::new(),
        payload,
    })
}
