use serde_json::{json, Map, Value};

use y00_core::attack::LRule;
use y00_core::infotheory::decryption_failure_prob;
use y00_core::infotheory::{
    channel_matrix_with, exact_entropies, exhaustive_l_search, EntropyReport, KeyModel,
};
use y00_core::measurement::{advantage_db, bob_energy_for_error, heterodyne_energy_for_error};

use super::attack::resolve_rule;
use super::Outcome;
use crate::config::{bool_entry, Entries, RunConfig};
use crate::error::CliResult;
use crate::report::{num, Payload};

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyOptions {
    pub l_rule: String,
    pub search_rules: bool,
}

impl EntropyOptions {
    pub fn resolve(l_rule: Option<&str>, search_rules: bool, entries: &Entries) -> CliResult<Self> {
        Ok(Self {
            l_rule: l_rule
                .or(entries.get("entropy.l_rule"))
                .unwrap_or("mod2")
                .to_string(),
            search_rules: search_rules
                || bool_entry(entries, "entropy.search_rules")?.unwrap_or(false),
        })
    }
}

pub fn entropy_json(report: &EntropyReport) -> Map<String, Value> {
    let inst = &report.instance;
    let mut map = Map::new();
    map.insert("H_J_given_RK".into(), num(report.h_j_given_rk));
    map.insert("H_R_given_JK".into(), num(report.h_r_given_jk));
    map.insert("H_L_given_RK".into(), num(report.h_l_given_rk));
    map.insert("H_R_given_LK".into(), num(report.h_r_given_lk));
    map.insert("H_Ks_given_JR".into(), num(report.h_k_given_jr));
    map.insert(
        "instance".into(),
        json!({
            "M": inst.m,
            "S": inst.s.map_or(Value::Null, num),
            "N": inst.n,
            "lfsr_degree": inst.lfsr_degree,
            "l_rule": inst.l_rule,
        }),
    );
    map
}

pub fn entropy(cfg: &RunConfig, opts: &EntropyOptions) -> CliResult<Outcome> {
    let params = cfg.params()?;
    let channel = channel_matrix_with(&params, cfg.noise)?;
    let key_model = KeyModel {
        cfg: cfg.lfsr.clone(),
        extraction: cfg.extraction,
    };
    let rule: LRule = resolve_rule(&opts.l_rule, params.m)?;
    let report = exact_entropies(&channel, params.n, &key_model, &rule)?;
    let mut map = entropy_json(&report);
    if opts.search_rules {
        let best = exhaustive_l_search(&channel, &key_model)?;
        map.insert(
            "rule_search".into(),
            json!({
                "N": 1,
                "min_H_R_given_LK": num(best.min_h_r_given_lk),
                "rule": best.rule.name(),
                "rules_checked": best.rules_checked,
            }),
        );
    }
    let options = vec![
        ("entropy.l_rule".to_string(), opts.l_rule.clone()),
        (
            "entropy.search_rules".to_string(),
            opts.search_rules.to_string(),
        ),
    ];
    Ok(Outcome {
        options,
        payload: Payload::Object(map),
    })
}

pub fn failprob(cfg: &RunConfig) -> CliResult<Outcome> {
    let params = cfg.params_with(cfg.s, cfg.m, 1)?;
    let log10_p = decryption_failure_prob(&params)?;
    let mut map = Map::new();
    map.insert("M".into(), json!(params.m));
    map.insert("S".into(), num(params.s));
    map.insert("log10_failure_prob".into(), num(log10_p));
    Ok(Outcome {
        options: Vec::new(),
        payload: Payload::Object(map),
    })
}

pub const DEFAULT_TARGET: f64 = 1e-9;

pub fn advantage(target: f64) -> CliResult<Outcome> {
    let db = advantage_db(target)?;
    let mut map = Map::new();
    map.insert("target_error".into(), num(target));
    map.insert("S_bob".into(), num(bob_energy_for_error(target)));
    map.insert("S_eve".into(), num(heterodyne_energy_for_error(target)?));
    map.insert("advantage_db".into(), num(db));
    let options = vec![("advantage.target".to_string(), format!("{target:e}"))];
    Ok(Outcome {
        options,
        payload: Payload::Object(map),
    })
}
