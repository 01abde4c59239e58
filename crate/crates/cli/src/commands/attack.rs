use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Map, Value};

use y00_core::attack::{
    build_decrypt_table, candidate_keys, eve_decrypt, g_varies_with_key, g_varies_with_measurement,
    known_plaintext_search_with, observe, split_g_l, LRule, WedgeIndex,
};
use y00_core::keystream::expand_key_with;
use y00_core::rng::stream_rng;

use super::{read_file, Outcome};
use crate::config::{Entries, RunConfig};
use crate::error::{usage, CliResult};
use crate::report::{num, Payload};

/// RNG domain of the `attack` subcommand.
pub const DOMAIN: u64 = 2;

const CHUNK: usize = 1 << 16;
const TOP_SEEDS: usize = 10;

/// `mod2`, `const0`, `const1`, or a path to a `j bit` table file.
pub fn resolve_rule(text: &str, m: u32) -> CliResult<LRule> {
    let rule = match text {
        "mod2" => LRule::Mod2,
        "const0" => LRule::Constant(0),
        "const1" => LRule::Constant(1),
        path => LRule::parse_table(&read_file(Path::new(path))?, m)?,
    };
    rule.check(2 * m)?;
    Ok(rule)
}

/// Known plaintext as ASCII `0`/`1`; whitespace is ignored.
pub fn parse_plaintext(text: &str) -> CliResult<Vec<u8>> {
    text.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(usage(format!(
                "known plaintext contains {other:?}; expected 0 or 1"
            ))),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackOptions {
    pub known_plaintext: PathBuf,
    pub band_constant: f64,
    pub l_rule: String,
}

impl AttackOptions {
    pub const DEFAULT_BAND_CONSTANT: f64 = 1.0;

    pub fn resolve(
        known_plaintext: Option<&Path>,
        band_constant: Option<f64>,
        l_rule: Option<&str>,
        entries: &Entries,
    ) -> CliResult<Self> {
        let known_plaintext = known_plaintext
            .map(Path::to_path_buf)
            .or_else(|| entries.get("attack.known_plaintext").map(PathBuf::from))
            .ok_or_else(|| usage("attack needs --known-plaintext <file>"))?;
        let band_constant = match band_constant {
            Some(c) => c,
            None => entries
                .parsed("attack.band_constant")?
                .unwrap_or(Self::DEFAULT_BAND_CONSTANT),
        };
        let l_rule = l_rule
            .or(entries.get("attack.l_rule"))
            .unwrap_or("mod2")
            .to_string();
        Ok(Self {
            known_plaintext,
            band_constant,
            l_rule,
        })
    }
}

pub fn run(cfg: &RunConfig, opts: &AttackOptions) -> CliResult<Outcome> {
    let plaintext = parse_plaintext(&read_file(&opts.known_plaintext)?)?;
    if plaintext.is_empty() {
        return Err(usage("known plaintext is empty"));
    }
    let params = cfg.params_with(cfg.s, cfg.m, plaintext.len())?;
    let m = params.m;
    let rule = resolve_rule(&opts.l_rule, m)?;
    let table = build_decrypt_table(m)?;
    let key = expand_key_with(&cfg.seed_key, &cfg.lfsr, plaintext.len(), m, cfg.extraction)?;

    let wedges: Vec<WedgeIndex> = key
        .blocks()
        .par_chunks(CHUNK)
        .zip(plaintext.par_chunks(CHUNK))
        .enumerate()
        .map(|(c, (blocks, bits))| {
            let mut rng = stream_rng(cfg.master_seed, DOMAIN, c as u64);
            blocks
                .iter()
                .zip(bits)
                .map(|(&k, &r)| observe(k, r, &params, cfg.noise, &mut rng))
                .collect::<y00_core::Result<Vec<_>>>()
        })
        .collect::<y00_core::Result<Vec<_>>>()?
        .concat();

    let mut keyed_errors = 0u64;
    let mut candidate_total = 0usize;
    let mut candidate_hits = 0usize;
    for ((&j, &r), &k) in wedges.iter().zip(&plaintext).zip(key.blocks()) {
        keyed_errors += u64::from(eve_decrypt(j, k, &table)? != r);
        let set = candidate_keys(j, r, &params, opts.band_constant)?;
        candidate_total += set.len();
        candidate_hits += usize::from(set.keys.contains(&k));
    }
    let n = plaintext.len() as f64;

    let ranked =
        known_plaintext_search_with(&wedges, &plaintext, &cfg.lfsr, &params, cfg.extraction)?;
    let truth = cfg.seed_key.to_u64();
    let (rank, true_score) = ranked
        .iter()
        .enumerate()
        .find(|(_, s)| s.seed == truth)
        .map(|(i, s)| (i + 1, s.score))
        .expect("every nonzero seed is scored");
    let hex_width = cfg.lfsr.degree().div_ceil(4) as usize;
    let top: Vec<Value> = ranked
        .iter()
        .take(TOP_SEEDS)
        .map(|s| json!({"seed": format!("{:0hex_width$x}", s.seed), "score": s.score}))
        .collect();

    let split = split_g_l(&table, &rule)?;
    let witness_j =
        g_varies_with_measurement(&split).map(|(q, j, j2)| json!({"q": q, "j": j, "j2": j2}));
    let witness_q = g_varies_with_key(&split).map(|(j, q, q2)| json!({"j": j, "q": q, "q2": q2}));

    let mut map = Map::new();
    map.insert("M".into(), json!(m));
    map.insert("S".into(), num(params.s));
    map.insert("N".into(), json!(plaintext.len()));
    map.insert("keyed_decrypt_errors".into(), json!(keyed_errors));
    map.insert("band_constant".into(), num(opts.band_constant));
    map.insert("mean_candidates".into(), num(candidate_total as f64 / n));
    map.insert("candidate_hit_rate".into(), num(candidate_hits as f64 / n));
    map.insert(
        "band_estimate".into(),
        num(opts.band_constant * m as f64 / (PI * params.s.sqrt())),
    );
    map.insert(
        "n_sigma_estimate".into(),
        num(m as f64 / (2.0 * PI * params.s.sqrt())),
    );
    map.insert("seeds_searched".into(), json!(ranked.len()));
    map.insert("true_seed".into(), json!(format!("{truth:0hex_width$x}")));
    map.insert("true_seed_rank".into(), json!(rank));
    map.insert("true_seed_score".into(), json!(true_score));
    map.insert("top_seeds".into(), Value::Array(top));
    map.insert("l_rule".into(), json!(rule.name()));
    map.insert(
        "g_witness_measurement".into(),
        witness_j.unwrap_or(Value::Null),
    );
    map.insert("g_witness_key".into(), witness_q.unwrap_or(Value::Null));

    let options = vec![
        (
            "attack.known_plaintext".to_string(),
            opts.known_plaintext.display().to_string(),
        ),
        (
            "attack.band_constant".to_string(),
            opts.band_constant.to_string(),
        ),
        ("attack.l_rule".to_string(), opts.l_rule.clone()),
    ];
    Ok(Outcome {
        options,
        payload: Payload::Object(map),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plaintext_parsing() {
        assert_eq!(parse_plaintext("01 1\n0").unwrap(), vec![0, 1, 1, 0]);
        assert_eq!(parse_plaintext("012").unwrap_err().exit_code(), 2);
    }

    #[test]
    fn builtin_rules() {
        assert_eq!(resolve_rule("mod2", 4).unwrap(), LRule::Mod2);
        assert_eq!(resolve_rule("const0", 4).unwrap(), LRule::Constant(0));
        assert_eq!(
            resolve_rule("/nonexistent/rule", 4)
                .unwrap_err()
                .exit_code(),
            2
        );
    }
}
