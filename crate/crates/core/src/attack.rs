//! Heterodyne wedge attack.
//!
//! Eve heterodynes every symbol and keeps only the wedge `j ∈ {0..2M-1}` whose
//! centre `θ_j = jπ/M` is nearest the measured phase. Given the key block `q`,
//! the table `F_j(q)` decodes the bit by maximum likelihood: the end point of
//! basis `q` angularly closest to `θ_j`. Any one-bit function `l(j)` of the
//! wedge splits the table as `F_j(q) = l(j) ⊕ G_j(q)`, but `G` then still
//! depends on `j`.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;

use crate::keystream::{expand_key_with, BlockExtraction, LfsrConfig, SeedKey};
use crate::measurement::{HeterodyneOutcome, NoiseModel};
use crate::modulation::{
    constellation_bit, constellation_index, encode, grid_distance, ConstellationIndex,
    ProtocolParams,
};
use crate::{Error, Result};

/// Largest keyspace the brute-force search will walk.
pub const MAX_SEARCH_KEYSPACE: u128 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WedgeIndex {
    j: u32,
    m: u32,
}

impl WedgeIndex {
    pub fn new(j: u32, m: u32) -> Result<Self> {
        if m == 0 || j >= 2 * m {
            return Err(Error::Domain(format!("wedge {j} outside 0..{}", 2 * m)));
        }
        Ok(Self { j, m })
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn center(&self) -> f64 {
        self.j as f64 * PI / self.m as f64
    }
}

/// Wedge containing `phase`: `[θ_j - π/2M, θ_j + π/2M)`, lower edge inclusive.
pub fn wedge_of_phase(phase: f64, m: u32) -> Result<WedgeIndex> {
    if m == 0 {
        return Err(Error::Domain("basis count M must be at least 1".into()));
    }
    if !phase.is_finite() {
        return Err(Error::Domain(format!("phase {phase} is not finite")));
    }
    let width = PI / m as f64;
    let phase = phase.rem_euclid(2.0 * PI);
    let raw = ((phase + 0.5 * width) / width).floor() as i64;
    let j = raw.rem_euclid(2 * m as i64) as u32;
    WedgeIndex::new(j, m)
}

pub fn wedge_of(outcome: &HeterodyneOutcome, m: u32) -> Result<WedgeIndex> {
    let phase = outcome
        .phase()
        .ok_or_else(|| Error::Domain("heterodyne outcome at the origin has no phase".into()))?;
    wedge_of_phase(phase, m)
}

/// Transmit `(k, r)`, heterodyne it and discretise to a wedge.
pub fn observe<R: Rng + ?Sized>(
    k: u32,
    r: u8,
    params: &ProtocolParams,
    noise: NoiseModel,
    rng: &mut R,
) -> Result<WedgeIndex> {
    let state = encode(k, r, params)?;
    wedge_of(&noise.sample(&state, rng), params.m)
}

/// `F_j(q)` for all `j < 2M`, `q < M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecryptTable {
    m: u32,
    bits: Vec<u8>,
}

impl DecryptTable {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn get(&self, j: u32, q: u32) -> u8 {
        self.bits[(j * self.m + q) as usize]
    }
}

pub fn build_decrypt_table(m: u32) -> Result<DecryptTable> {
    if m == 0 {
        return Err(Error::Domain("basis count M must be at least 1".into()));
    }
    let mut bits = Vec::with_capacity((2 * m * m) as usize);
    for j in 0..2 * m {
        for q in 0..m {
            let zero_end = constellation_index(q, 0, m)?.index();
            let d = grid_distance(j, zero_end, m);
            // Past a quarter turn the bit-1 end is closer; an exact quarter turn ties to 0.
            bits.push(u8::from(2 * d > m));
        }
    }
    Ok(DecryptTable { m, bits })
}

pub fn eve_decrypt(j: WedgeIndex, k: u32, table: &DecryptTable) -> Result<u8> {
    if j.m != table.m {
        return Err(Error::Domain(format!(
            "wedge for M = {} used with table for M = {}",
            j.m, table.m
        )));
    }
    if k >= table.m {
        return Err(Error::Domain(format!(
            "key block {k} outside 0..{}",
            table.m
        )));
    }
    Ok(table.get(j.j, k))
}

/// The one-bit "ciphertext" `l(j)` extracted from a wedge index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LRule {
    /// `l(j) = j mod 2`.
    Mod2,
    Constant(u8),
    /// Explicit bit per wedge.
    Table(Vec<u8>),
}

impl LRule {
    pub fn apply(&self, j: u32) -> u8 {
        match self {
            LRule::Mod2 => (j & 1) as u8,
            LRule::Constant(b) => *b,
            LRule::Table(t) => t[j as usize],
        }
    }

    pub fn name(&self) -> String {
        match self {
            LRule::Mod2 => "mod2".into(),
            LRule::Constant(b) => format!("const{b}"),
            LRule::Table(t) => {
                let bits: String = t.iter().map(|b| char::from(b'0' + b)).collect();
                format!("table:{bits}")
            }
        }
    }

    /// Bit `l(j)` for the rule `l(j) = constellation_bit(j)`.
    pub fn constellation(m: u32) -> Self {
        LRule::Table(
            (0..2 * m)
                .map(|j| constellation_bit(ConstellationIndex::new(j, m).expect("j < 2M")))
                .collect(),
        )
    }

    /// The rule whose bit for wedge `j` is bit `j` of `code`.
    pub fn from_code(code: u64, m: u32) -> Self {
        LRule::Table((0..2 * m).map(|j| ((code >> j) & 1) as u8).collect())
    }

    /// Parse a custom rule file: one `j bit` pair per line, ASCII decimal, every
    /// wedge `0..2M` exactly once. Blank lines and `#` comments are skipped.
    pub fn parse_table(text: &str, m: u32) -> Result<Self> {
        let mut table: Vec<Option<u8>> = vec![None; 2 * m as usize];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let bad = || Error::Config(format!("l-rule line {}: expected `j bit`", lineno + 1));
            let j: u32 = fields.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            let bit: u8 = fields.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            if fields.next().is_some() || bit > 1 {
                return Err(bad());
            }
            let slot = table.get_mut(j as usize).ok_or_else(|| {
                Error::Config(format!(
                    "l-rule line {}: wedge {j} outside 0..{}",
                    lineno + 1,
                    2 * m
                ))
            })?;
            if slot.replace(bit).is_some() {
                return Err(Error::Config(format!(
                    "l-rule line {}: wedge {j} repeated",
                    lineno + 1
                )));
            }
        }
        let bits = table
            .into_iter()
            .enumerate()
            .map(|(j, b)| {
                b.ok_or_else(|| Error::Config(format!("l-rule has no entry for wedge {j}")))
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(LRule::Table(bits))
    }

    /// Validate the rule for an output alphabet of `outputs` symbols.
    pub fn check(&self, outputs: u32) -> Result<()> {
        match self {
            LRule::Constant(b) if *b > 1 => Err(Error::Config(format!("constant l-rule bit {b}"))),
            LRule::Table(t) if t.len() != outputs as usize || t.iter().any(|&b| b > 1) => Err(
                Error::Config(format!("l-rule table must hold {outputs} bits")),
            ),
            _ => Ok(()),
        }
    }
}

/// `F_j(q) = l(j) ⊕ G_j(q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitSplit {
    m: u32,
    l: Vec<u8>,
    g: Vec<u8>,
}

impl BitSplit {
    pub fn l(&self, j: u32) -> u8 {
        self.l[j as usize]
    }

    pub fn g(&self, j: u32, q: u32) -> u8 {
        self.g[(j * self.m + q) as usize]
    }

    pub fn m(&self) -> u32 {
        self.m
    }
}

pub fn split_g_l(table: &DecryptTable, rule: &LRule) -> Result<BitSplit> {
    let m = table.m;
    rule.check(2 * m)?;
    let l: Vec<u8> = (0..2 * m).map(|j| rule.apply(j)).collect();
    let g = (0..2 * m)
        .flat_map(|j| (0..m).map(move |q| (j, q)))
        .map(|(j, q)| table.get(j, q) ^ l[j as usize])
        .collect();
    Ok(BitSplit { m, l, g })
}

/// Some `(q, j, j')` with `G_j(q) ≠ G_{j'}(q)`.
pub fn g_varies_with_measurement(split: &BitSplit) -> Option<(u32, u32, u32)> {
    let m = split.m;
    (0..m).find_map(|q| {
        (1..2 * m)
            .find(|&j| split.g(j, q) != split.g(0, q))
            .map(|j| (q, 0, j))
    })
}

/// Some `(j, q, q')` with `G_j(q) ≠ G_j(q')`.
pub fn g_varies_with_key(split: &BitSplit) -> Option<(u32, u32, u32)> {
    let m = split.m;
    (0..2 * m).find_map(|j| {
        (1..m)
            .find(|&q| split.g(j, q) != split.g(j, 0))
            .map(|q| (j, 0, q))
    })
}

/// Key blocks consistent with one wedge observation and a known bit.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub keys: Vec<u32>,
    pub band_constant: f64,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

/// All `q` whose bit-`r` end point lies within `c/√S` of the wedge centre.
pub fn candidate_keys(
    j: WedgeIndex,
    r: u8,
    params: &ProtocolParams,
    band_constant: f64,
) -> Result<CandidateSet> {
    if band_constant.is_nan() || band_constant <= 0.0 {
        return Err(Error::Domain(format!(
            "band constant {band_constant} must be positive"
        )));
    }
    if j.m != params.m {
        return Err(Error::Domain("wedge and parameters disagree on M".into()));
    }
    let m = params.m;
    // Band half-width in grid units of π/M.
    let band = if params.s == 0.0 {
        f64::INFINITY
    } else {
        band_constant / params.s.sqrt() * m as f64 / PI
    };
    let keys = (0..m)
        .filter_map(|q| {
            let end = constellation_index(q, r, m).ok()?.index();
            (grid_distance(end, j.j, m) as f64 <= band).then_some(q)
        })
        .collect();
    Ok(CandidateSet {
        keys,
        band_constant,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedScore {
    /// Seed register contents as an integer, MSB = first output bit.
    pub seed: u64,
    /// Positions where decryption under this seed matches the known plaintext.
    pub score: usize,
}

/// Score every nonzero seed against known plaintext; best first, ties by seed.
pub fn known_plaintext_search(
    wedges: &[WedgeIndex],
    plaintext: &[u8],
    cfg: &LfsrConfig,
    params: &ProtocolParams,
) -> Result<Vec<SeedScore>> {
    known_plaintext_search_with(wedges, plaintext, cfg, params, BlockExtraction::PowerOfTwo)
}

pub fn known_plaintext_search_with(
    wedges: &[WedgeIndex],
    plaintext: &[u8],
    cfg: &LfsrConfig,
    params: &ProtocolParams,
    extraction: BlockExtraction,
) -> Result<Vec<SeedScore>> {
    let keyspace = cfg.keyspace_size();
    if keyspace > MAX_SEARCH_KEYSPACE {
        return Err(Error::ScaleGuard(format!(
            "keyspace 2^{} - 1 exceeds the brute-force limit of 2^20 seeds",
            cfg.degree()
        )));
    }
    if wedges.len() != plaintext.len() {
        return Err(Error::Domain(format!(
            "{} wedges but {} plaintext bits",
            wedges.len(),
            plaintext.len()
        )));
    }
    if let Some(w) = wedges.iter().find(|w| w.m != params.m) {
        return Err(Error::Domain(format!(
            "wedge for M = {} in an M = {} search",
            w.m, params.m
        )));
    }
    let table = build_decrypt_table(params.m)?;
    let n = wedges.len();
    let mut scores = (1..=keyspace as u64)
        .into_par_iter()
        .map(|value| {
            let seed = SeedKey::from_u64(value, cfg.degree())?;
            let key = expand_key_with(&seed, cfg, n, params.m, extraction)?;
            let score = wedges
                .iter()
                .zip(plaintext)
                .zip(key.blocks())
                .filter(|((w, &r), &k)| table.get(w.j, k) == r)
                .count();
            Ok(SeedScore { seed: value, score })
        })
        .collect::<Result<Vec<_>>>()?;
    scores.sort_by(|a, b| b.score.cmp(&a.score).then(a.seed.cmp(&b.seed)));
    Ok(scores)
}
