//! Exact conditional entropies by joint enumeration over (seed, plaintext,
//! output sequence).
//!
//! Seeds are uniform over the nonzero LFSR states, plaintext bits are uniform
//! and independent. Every conditional entropy `H(X | Y)` is accumulated group by
//! group (one group per value of `Y`), so a deterministic group contributes an
//! exact zero rather than the round-off of `H(X, Y) - H(Y)`.

use rayon::prelude::*;

use super::ChannelMatrix;
use crate::attack::LRule;
use crate::keystream::{all_seeds, expand_key_with, BlockExtraction, LfsrConfig};
use crate::{Error, Result};

/// Joint-enumeration budget: `outputs^N · |seeds| · 2^N`.
pub const ENUMERATION_BUDGET: f64 = 1e8;

/// Largest output alphabet for which every one-bit rule is enumerated.
pub const MAX_RULE_SEARCH_OUTPUTS: u32 = 16;

/// Uniform prior over all nonzero seeds of an LFSR, expanded to key symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyModel {
    pub cfg: LfsrConfig,
    pub extraction: BlockExtraction,
}

impl KeyModel {
    pub fn new(cfg: LfsrConfig) -> Self {
        Self {
            cfg,
            extraction: BlockExtraction::PowerOfTwo,
        }
    }

    fn running_keys(&self, n: usize, symbols: u32) -> Result<Vec<Vec<u32>>> {
        all_seeds(&self.cfg)
            .map(|seed| {
                Ok(
                    expand_key_with(&seed, &self.cfg, n, symbols, self.extraction)?
                        .blocks()
                        .to_vec(),
                )
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceDescriptor {
    pub m: u32,
    /// `None` for a noiseless classical channel.
    pub s: Option<f64>,
    pub n: usize,
    pub lfsr_degree: u32,
    pub l_rule: String,
}

/// Conditional entropies in bits; `K` is the seed key.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub h_j_given_rk: f64,
    pub h_r_given_jk: f64,
    pub h_l_given_rk: f64,
    pub h_r_given_lk: f64,
    pub h_k_given_jr: f64,
    pub instance: InstanceDescriptor,
}

/// Accumulates `Σ_groups Σ_x w·(-log2 (w / W_group))`.
#[derive(Debug, Default, Clone, Copy)]
struct CondEntropy {
    bits: f64,
}

impl CondEntropy {
    /// Add one conditioning group given its joint weights.
    fn add_group(&mut self, weights: &[f64]) {
        self.bits += group_entropy(weights);
    }

    /// Add a group whose weights are `prior · p` with `p` already a normalised
    /// conditional distribution.
    fn add_normalised(&mut self, prior: f64, p: &[f64]) {
        self.bits += prior
            * p.iter()
                .filter(|&&x| x > 0.0)
                .map(|&x| -x * x.log2())
                .sum::<f64>();
    }
}

/// `Σ_x w_x·(-log2(w_x / W))`. The largest weight's conditional probability is
/// taken as `1 - (others / W)` so near-deterministic groups keep their tiny
/// entropy instead of rounding it away.
fn group_entropy(weights: &[f64]) -> f64 {
    let (imax, &wmax) = match weights.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)) {
        Some(x) => x,
        None => return 0.0,
    };
    if wmax <= 0.0 {
        return 0.0;
    }
    let others: f64 = weights
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != imax)
        .map(|(_, &w)| w)
        .sum();
    let total = wmax + others;
    let log2_total = total.log2();
    let mut bits = wmax * -(-others / total).ln_1p() / std::f64::consts::LN_2;
    for (i, &w) in weights.iter().enumerate() {
        if i != imax && w > 0.0 {
            bits += w * (log2_total - w.log2());
        }
    }
    bits
}

struct Enumeration<'a> {
    channel: &'a ChannelMatrix,
    n: usize,
    keys: Vec<Vec<u32>>,
    /// `p(seed)·p(r)`, identical for every (seed, plaintext) pair.
    prior: f64,
    y_count: usize,
    r_count: usize,
}

impl<'a> Enumeration<'a> {
    fn new(channel: &'a ChannelMatrix, n: usize, key_model: &KeyModel) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("need at least one symbol".into()));
        }
        let seeds = key_model.cfg.keyspace_size() as f64;
        let outputs = channel.outputs() as f64;
        let work = outputs.powi(n as i32) * seeds * 2f64.powi(n as i32);
        if work > ENUMERATION_BUDGET {
            return Err(Error::ScaleGuard(format!(
                "(outputs)^N·|seeds|·2^N = {outputs}^{n}·{seeds}·2^{n} = {work:.3e} exceeds the \
                 enumeration budget of {ENUMERATION_BUDGET:e}"
            )));
        }
        let keys = key_model.running_keys(n, channel.key_symbols())?;
        Ok(Self {
            channel,
            n,
            prior: 1.0 / (keys.len() as f64 * 2f64.powi(n as i32)),
            keys,
            y_count: channel.outputs().pow(n as u32) as usize,
            r_count: 1 << n,
        })
    }

    /// Symbol `i` of the sequence with mixed-radix code `code`.
    fn y_symbol(&self, code: usize, i: usize) -> u32 {
        (code / self.channel.outputs().pow(i as u32) as usize % self.channel.outputs() as usize)
            as u32
    }

    fn r_symbol(code: usize, i: usize) -> u8 {
        ((code >> i) & 1) as u8
    }

    /// `P(y | seed, r)` for every plaintext `r`, written into `out`.
    fn likelihoods(&self, seed: usize, y: usize, out: &mut [f64]) {
        let key = &self.keys[seed];
        for (r, slot) in out.iter_mut().enumerate() {
            *slot = (0..self.n)
                .map(|i| {
                    self.channel
                        .prob(self.y_symbol(y, i), key[i], Self::r_symbol(r, i))
                })
                .product();
        }
    }

    fn l_code(&self, rule: &LRule, y: usize) -> usize {
        (0..self.n).fold(0, |acc, i| {
            acc | (rule.apply(self.y_symbol(y, i)) as usize) << i
        })
    }

    /// `P(l | seed, r)` as a `[r][l]` table.
    fn l_table(&self, rule: &LRule, lik: &[Vec<f64>]) -> Vec<f64> {
        let l_count = self.r_count;
        let mut table = vec![0.0; self.r_count * l_count];
        for (y, row) in lik.iter().enumerate() {
            let l = self.l_code(rule, y);
            for (r, &p) in row.iter().enumerate() {
                table[r * l_count + l] += p;
            }
        }
        table
    }

    /// All `P(y | seed, r)`, indexed `[y][r]`.
    fn seed_likelihoods(&self, seed: usize) -> Vec<Vec<f64>> {
        (0..self.y_count)
            .map(|y| {
                let mut row = vec![0.0; self.r_count];
                self.likelihoods(seed, y, &mut row);
                row
            })
            .collect()
    }

    /// `H(R | L, K)` contribution of one seed.
    fn h_r_given_lk_for_seed(&self, table: &[f64]) -> f64 {
        let l_count = self.r_count;
        let mut acc = CondEntropy::default();
        let mut group = vec![0.0; self.r_count];
        for l in 0..l_count {
            for (r, w) in group.iter_mut().enumerate() {
                *w = self.prior * table[r * l_count + l];
            }
            acc.add_group(&group);
        }
        acc.bits
    }
}

/// Exact `H(J|R,K)`, `H(R|J,K)`, `H(L|R,K)`, `H(R|L,K)` and `H(K|J,R)` for `n`
/// symbols, with `L` the per-symbol image of `J` under `rule`.
pub fn exact_entropies(
    channel: &ChannelMatrix,
    n: usize,
    key_model: &KeyModel,
    rule: &LRule,
) -> Result<EntropyReport> {
    rule.check(channel.outputs())?;
    let e = Enumeration::new(channel, n, key_model)?;
    let l_count = e.r_count;

    // Per-seed terms, reduced below in seed order.
    let per_seed: Vec<[f64; 4]> = (0..e.keys.len())
        .into_par_iter()
        .map(|seed| {
            let lik = e.seed_likelihoods(seed);
            let mut h_j_rk = CondEntropy::default();
            let mut h_r_jk = CondEntropy::default();
            let mut h_l_rk = CondEntropy::default();

            let mut column = vec![0.0; e.y_count];
            for r in 0..e.r_count {
                for (y, row) in lik.iter().enumerate() {
                    column[y] = row[r];
                }
                h_j_rk.add_normalised(e.prior, &column);
            }
            let mut group = vec![0.0; e.r_count];
            for row in &lik {
                for (w, &p) in group.iter_mut().zip(row) {
                    *w = e.prior * p;
                }
                h_r_jk.add_group(&group);
            }
            let table = e.l_table(rule, &lik);
            let mut l_group = vec![0.0; l_count];
            for r in 0..e.r_count {
                for (l, w) in l_group.iter_mut().enumerate() {
                    *w = e.prior * table[r * l_count + l];
                }
                h_l_rk.add_group(&l_group);
            }
            let h_r_lk = e.h_r_given_lk_for_seed(&table);
            [h_j_rk.bits, h_r_jk.bits, h_l_rk.bits, h_r_lk]
        })
        .collect();

    // H(K | J, R): one group per (y, r), weights over seeds.
    let per_y: Vec<f64> = (0..e.y_count)
        .into_par_iter()
        .map(|y| {
            let mut lik = vec![vec![0.0; e.r_count]; e.keys.len()];
            for (seed, row) in lik.iter_mut().enumerate() {
                e.likelihoods(seed, y, row);
            }
            let mut acc = CondEntropy::default();
            let mut group = vec![0.0; e.keys.len()];
            for r in 0..e.r_count {
                for (w, row) in group.iter_mut().zip(&lik) {
                    *w = e.prior * row[r];
                }
                acc.add_group(&group);
            }
            acc.bits
        })
        .collect();

    let mut sums = [0.0; 4];
    for terms in &per_seed {
        for (s, t) in sums.iter_mut().zip(terms) {
            *s += t;
        }
    }
    let h_k_given_jr = per_y.iter().sum();

    Ok(EntropyReport {
        h_j_given_rk: sums[0],
        h_r_given_jk: sums[1],
        h_l_given_rk: sums[2],
        h_r_given_lk: sums[3],
        h_k_given_jr,
        instance: InstanceDescriptor {
            m: channel.m(),
            s: channel.s(),
            n,
            lfsr_degree: key_model.cfg.degree(),
            l_rule: rule.name(),
        },
    })
}

/// Best one-bit ciphertext: the rule minimising `H(R|L,K)` at `N = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleSearchResult {
    pub min_h_r_given_lk: f64,
    pub rule: LRule,
    pub rules_checked: u64,
}

/// Evaluate `H(R|L,K)` for every function `l: {0..outputs-1} → {0,1}`.
pub fn exhaustive_l_search(
    channel: &ChannelMatrix,
    key_model: &KeyModel,
) -> Result<RuleSearchResult> {
    let outputs = channel.outputs();
    if outputs > MAX_RULE_SEARCH_OUTPUTS {
        return Err(Error::ScaleGuard(format!(
            "{outputs} outputs give 2^{outputs} one-bit rules; the search is limited to \
             {MAX_RULE_SEARCH_OUTPUTS} outputs (2M <= 16)"
        )));
    }
    let e = Enumeration::new(channel, 1, key_model)?;
    let lik: Vec<Vec<Vec<f64>>> = (0..e.keys.len()).map(|s| e.seed_likelihoods(s)).collect();
    let rules = 1u64 << outputs;
    let values: Vec<f64> = (0..rules)
        .into_par_iter()
        .map(|code| {
            let rule = LRule::from_code(code, outputs / 2);
            lik.iter()
                .map(|l| e.h_r_given_lk_for_seed(&e.l_table(&rule, l)))
                .sum::<f64>()
        })
        .collect();
    let (best, &min) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .expect("at least two rules");
    Ok(RuleSearchResult {
        min_h_r_given_lk: min,
        rule: LRule::from_code(best as u64, outputs / 2),
        rules_checked: rules,
    })
}
