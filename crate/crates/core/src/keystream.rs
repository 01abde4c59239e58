//! Seed keys and their expansion into an M-ary running key by a Fibonacci LFSR.
//!
//! Register convention: the state is the window `(s_n, ..., s_{n+d-1})` of the
//! output sequence, oldest bit first. A step emits `s_n` and appends
//!
//! ```text
//! s_{n+d} = XOR over t in taps of s_{n+d-t}
//! ```
//!
//! so the first `d` output bits are the seed bits themselves, MSB-first. Tap `d`
//! must be present, otherwise the oldest bit never feeds back and the map on
//! states is not invertible.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LfsrConfig {
    degree: u32,
    taps: Vec<u32>,
    tap_mask: u64,
}

impl LfsrConfig {
    pub fn new(degree: u32, taps: &[u32]) -> Result<Self> {
        if !(2..=64).contains(&degree) {
            return Err(Error::Config(format!(
                "LFSR degree {degree} outside [2, 64]"
            )));
        }
        if taps.is_empty() {
            return Err(Error::Config("LFSR tap set is empty".into()));
        }
        let mut sorted = taps.to_vec();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        sorted.dedup();
        if let Some(&bad) = sorted.iter().find(|&&t| t == 0 || t > degree) {
            return Err(Error::Config(format!(
                "LFSR tap {bad} outside 1..={degree}"
            )));
        }
        if sorted[0] != degree {
            return Err(Error::Config(format!(
                "LFSR taps must include the degree {degree}; without it the register is singular"
            )));
        }
        let tap_mask = sorted.iter().fold(0u64, |acc, &t| acc | 1u64 << (t - 1));
        Ok(Self {
            degree,
            taps: sorted,
            tap_mask,
        })
    }

    /// A maximal-length configuration for the given degree, where one is tabulated.
    pub fn primitive(degree: u32) -> Result<Self> {
        let taps: &[u32] = match degree {
            2 => &[2, 1],
            3 => &[3, 2],
            4 => &[4, 3],
            5 => &[5, 3],
            6 => &[6, 5],
            7 => &[7, 6],
            8 => &[8, 6, 5, 4],
            9 => &[9, 5],
            10 => &[10, 7],
            11 => &[11, 9],
            12 => &[12, 11, 10, 4],
            13 => &[13, 12, 11, 8],
            14 => &[14, 13, 12, 2],
            15 => &[15, 14],
            16 => &[16, 14, 13, 11],
            17 => &[17, 14],
            18 => &[18, 11],
            19 => &[19, 18, 17, 14],
            20 => &[20, 17],
            24 => &[24, 23, 22, 17],
            32 => &[32, 22, 2, 1],
            64 => &[64, 63, 61, 60],
            _ => {
                return Err(Error::Config(format!(
                    "no tabulated primitive polynomial for degree {degree}; give taps explicitly"
                )))
            }
        };
        Self::new(degree, taps)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    /// Tap positions, descending.
    pub fn taps(&self) -> &[u32] {
        &self.taps
    }

    pub(crate) fn state_mask(&self) -> u64 {
        if self.degree == 64 {
            u64::MAX
        } else {
            (1u64 << self.degree) - 1
        }
    }

    /// Number of nonzero seeds, i.e. `2^degree - 1`.
    pub fn keyspace_size(&self) -> u128 {
        (1u128 << self.degree) - 1
    }
}

impl Default for LfsrConfig {
    fn default() -> Self {
        Self::primitive(16).expect("degree 16 is tabulated")
    }
}

/// The shared secret: the initial LFSR register contents, MSB-first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SeedKey {
    bits: Vec<u8>,
}

impl SeedKey {
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if bits.len() < 2 {
            return Err(Error::Config("seed key needs at least 2 bits".into()));
        }
        if bits.len() > 64 {
            return Err(Error::Config("seed key longer than 64 bits".into()));
        }
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::Config(format!("seed bit {b} is not 0 or 1")));
        }
        if bits.iter().all(|&b| b == 0) {
            return Err(Error::Config(
                "all-zero seed is a fixed point of the LFSR".into(),
            ));
        }
        Ok(Self {
            bits: bits.to_vec(),
        })
    }

    /// Seed of `degree` bits taken from the low bits of `value`, MSB-first.
    pub fn from_u64(value: u64, degree: u32) -> Result<Self> {
        if !(2..=64).contains(&degree) {
            return Err(Error::Config(format!(
                "seed width {degree} outside [2, 64]"
            )));
        }
        if degree < 64 && value >> degree != 0 {
            return Err(Error::Config(format!(
                "seed value {value:#x} does not fit in {degree} bits"
            )));
        }
        let bits: Vec<u8> = (0..degree)
            .rev()
            .map(|i| ((value >> i) & 1) as u8)
            .collect();
        Self::from_bits(&bits)
    }

    /// Parse a hex string (optional `0x`), MSB-first, into a `degree`-bit seed.
    pub fn from_hex(hex: &str, degree: u32) -> Result<Self> {
        let trimmed = hex.trim();
        let digits = trimmed
            .strip_prefix("0x")
            .or_else(|| trimmed.strip_prefix("0X"))
            .unwrap_or(trimmed);
        let value = u64::from_str_radix(digits, 16)
            .map_err(|e| Error::Config(format!("seed.bits {hex:?} is not hex: {e}")))?;
        Self::from_u64(value, degree)
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn to_u64(&self) -> u64 {
        self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }
}

/// One Fibonacci step on an explicit bit-sequence state.
///
/// `state[i]` holds `s_{n+i}`. Returns the emitted bit `s_n` and the next state.
pub fn lfsr_step(state: &[u8], cfg: &LfsrConfig) -> Result<(u8, Vec<u8>)> {
    let d = cfg.degree as usize;
    if state.len() != d {
        return Err(Error::Domain(format!(
            "state has {} bits, LFSR degree is {d}",
            state.len()
        )));
    }
    if state.iter().all(|&b| b == 0) {
        return Err(Error::Domain("all-zero LFSR state".into()));
    }
    let feedback = cfg
        .taps
        .iter()
        .fold(0u8, |acc, &t| acc ^ (state[d - t as usize] & 1));
    let mut next = Vec::with_capacity(d);
    next.extend_from_slice(&state[1..]);
    next.push(feedback);
    Ok((state[0], next))
}

/// Packed-word LFSR; `state` bit `t-1` holds the tap-`t` position.
#[derive(Debug, Clone)]
pub struct Lfsr {
    state: u64,
    tap_mask: u64,
    state_mask: u64,
    out_shift: u32,
}

impl Lfsr {
    pub fn new(seed: &SeedKey, cfg: &LfsrConfig) -> Result<Self> {
        if seed.len() != cfg.degree as usize {
            return Err(Error::Config(format!(
                "seed has {} bits, LFSR degree is {}",
                seed.len(),
                cfg.degree
            )));
        }
        Ok(Self {
            state: seed.to_u64(),
            tap_mask: cfg.tap_mask,
            state_mask: cfg.state_mask(),
            out_shift: cfg.degree - 1,
        })
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    pub fn next_bit(&mut self) -> u8 {
        let out = (self.state >> self.out_shift) & 1;
        let feedback = (self.state & self.tap_mask).count_ones() as u64 & 1;
        self.state = ((self.state << 1) | feedback) & self.state_mask;
        out as u8
    }
}

impl Iterator for Lfsr {
    type Item = u8;

    fn next(&mut self) -> Option<u8> {
        Some(self.next_bit())
    }
}

/// The M-ary running key `K_1..K_N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunningKey {
    blocks: Vec<u32>,
    m: u32,
}

impl RunningKey {
    pub fn blocks(&self) -> &[u32] {
        &self.blocks
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// How LFSR output bits are turned into blocks in `{0, ..., M-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockExtraction {
    /// `log2 M` bits per block; M must be a power of two.
    #[default]
    PowerOfTwo,
    /// `ceil(log2 M)` bits reduced mod M. Biased toward small blocks whenever M
    /// is not a power of two.
    FoldModM,
}

/// Bits consumed per running-key block.
pub fn block_width(m: u32) -> u32 {
    if m <= 1 {
        0
    } else {
        32 - (m - 1).leading_zeros()
    }
}

/// Expand `seed` into `n` blocks for basis count `m` (power of two), MSB-first.
pub fn expand_key(seed: &SeedKey, cfg: &LfsrConfig, n: usize, m: u32) -> Result<RunningKey> {
    expand_key_with(seed, cfg, n, m, BlockExtraction::PowerOfTwo)
}

pub fn expand_key_with(
    seed: &SeedKey,
    cfg: &LfsrConfig,
    n: usize,
    m: u32,
    extraction: BlockExtraction,
) -> Result<RunningKey> {
    if m == 0 {
        return Err(Error::Config("basis count M must be at least 1".into()));
    }
    if extraction == BlockExtraction::PowerOfTwo && !m.is_power_of_two() {
        return Err(Error::Config(format!(
            "M = {m} is not a power of two; enable mod-M folding to accept the bias"
        )));
    }
    let width = block_width(m);
    let mut lfsr = Lfsr::new(seed, cfg)?;
    let blocks = (0..n)
        .map(|_| {
            let raw = (0..width).fold(0u32, |acc, _| (acc << 1) | lfsr.next_bit() as u32);
            raw % m
        })
        .collect();
    Ok(RunningKey { blocks, m })
}

/// Every nonzero seed of the configuration, in increasing numeric order.
pub fn all_seeds(cfg: &LfsrConfig) -> impl Iterator<Item = SeedKey> + '_ {
    (1..=cfg.state_mask()).map(move |v| {
        SeedKey::from_u64(v, cfg.degree).expect("nonzero value within the register width")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn period_by_stepping(cfg: &LfsrConfig, seed: &[u8]) -> usize {
        let mut state = seed.to_vec();
        for step in 1.. {
            state = lfsr_step(&state, cfg).unwrap().1;
            if state == seed {
                return step;
            }
        }
        unreachable!()
    }

    #[test]
    fn degree_four_period_fifteen() {
        let cfg = LfsrConfig::new(4, &[4, 3]).unwrap();
        assert_eq!(period_by_stepping(&cfg, &[0, 0, 0, 1]), 15);
    }

    #[test]
    fn degree_two_period_three() {
        let cfg = LfsrConfig::new(2, &[2, 1]).unwrap();
        assert_eq!(period_by_stepping(&cfg, &[0, 1]), 3);
    }

    #[test]
    fn zero_seed_rejected() {
        assert!(SeedKey::from_bits(&[0, 0, 0, 0]).is_err());
        assert!(SeedKey::from_u64(0, 4).is_err());
        assert!(SeedKey::from_hex("0", 8).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(LfsrConfig::new(1, &[1]).is_err());
        assert!(LfsrConfig::new(65, &[65]).is_err());
        assert!(LfsrConfig::new(4, &[]).is_err());
        assert!(LfsrConfig::new(4, &[5, 4]).is_err());
        assert!(LfsrConfig::new(4, &[3, 1]).is_err());
        assert!(LfsrConfig::new(64, &[64, 63, 61, 60]).is_ok());
    }

    #[test]
    fn hex_seed_is_msb_first() {
        let seed = SeedKey::from_hex("0xB", 4).unwrap();
        assert_eq!(seed.bits(), &[1, 0, 1, 1]);
        assert!(SeedKey::from_hex("1F", 4).is_err());
    }

    #[test]
    fn packed_register_matches_bit_stepping() {
        let cfg = LfsrConfig::primitive(7).unwrap();
        let seed = SeedKey::from_u64(0x5a, 7).unwrap();
        let mut packed = Lfsr::new(&seed, &cfg).unwrap();
        let mut state = seed.bits().to_vec();
        for _ in 0..300 {
            let (bit, next) = lfsr_step(&state, &cfg).unwrap();
            assert_eq!(bit, packed.next_bit());
            state = next;
        }
    }

    #[test]
    fn primitive_configs_have_full_period() {
        for degree in 2..=16 {
            let cfg = LfsrConfig::primitive(degree).unwrap();
            let seed = SeedKey::from_u64(1, degree).unwrap();
            let mut lfsr = Lfsr::new(&seed, &cfg).unwrap();
            let start = lfsr.state();
            let mut period = 0u64;
            loop {
                lfsr.next_bit();
                period += 1;
                if lfsr.state() == start {
                    break;
                }
            }
            assert_eq!(period, (1u64 << degree) - 1, "degree {degree}");
        }
    }

    #[test]
    fn expand_consumes_two_bits_per_block_for_m4() {
        let cfg = LfsrConfig::primitive(8).unwrap();
        let seed = SeedKey::from_u64(0x9c, 8).unwrap();
        let key = expand_key(&seed, &cfg, 3, 4).unwrap();
        assert_eq!(key.len(), 3);
        let bits: Vec<u8> = Lfsr::new(&seed, &cfg).unwrap().take(6).collect();
        let expect: Vec<u32> = bits
            .chunks(2)
            .map(|c| (c[0] as u32) << 1 | c[1] as u32)
            .collect();
        assert_eq!(key.blocks(), expect.as_slice());
        assert!(key.blocks().iter().all(|&k| k < 4));
    }

    #[test]
    fn expand_matches_sixteen_direct_steps() {
        let cfg = LfsrConfig::new(4, &[4, 3]).unwrap();
        let seed = SeedKey::from_bits(&[0, 1, 1, 0]).unwrap();
        let key = expand_key(&seed, &cfg, 8, 4).unwrap();

        let mut state = seed.bits().to_vec();
        let mut stream = Vec::new();
        for _ in 0..16 {
            let (bit, next) = lfsr_step(&state, &cfg).unwrap();
            stream.push(bit);
            state = next;
        }
        let from_key: Vec<u8> = key
            .blocks()
            .iter()
            .flat_map(|&k| [(k >> 1) as u8 & 1, k as u8 & 1])
            .collect();
        assert_eq!(from_key, stream);
    }

    #[test]
    fn expand_is_deterministic_and_rejects_non_power_of_two() {
        let cfg = LfsrConfig::default();
        let seed = SeedKey::from_hex("ACE1", 16).unwrap();
        let a = expand_key(&seed, &cfg, 100, 64).unwrap();
        let b = expand_key(&seed, &cfg, 100, 64).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            expand_key(&seed, &cfg, 10, 200),
            Err(Error::Config(_))
        ));
        let folded = expand_key_with(&seed, &cfg, 1000, 200, BlockExtraction::FoldModM).unwrap();
        assert!(folded.blocks().iter().all(|&k| k < 200));
        assert_eq!(block_width(200), 8);
        assert_eq!(block_width(1), 0);
    }

    #[test]
    fn block_counts_balanced_over_full_period() {
        // 255 blocks of width 2 cover every 2-bit window of the m-sequence once.
        let cfg = LfsrConfig::primitive(8).unwrap();
        let seed = SeedKey::from_u64(1, 8).unwrap();
        let key = expand_key(&seed, &cfg, 255, 4).unwrap();
        let mut counts = [0usize; 4];
        for &k in key.blocks() {
            counts[k as usize] += 1;
        }
        let expected = 255.0 / 4.0;
        for c in counts {
            assert!((c as f64 - expected).abs() <= 1.0, "{counts:?}");
        }
    }

    #[test]
    fn distinct_seeds_give_distinct_running_keys() {
        for degree in 2..=8 {
            let cfg = LfsrConfig::primitive(degree).unwrap();
            let keys: Vec<_> = all_seeds(&cfg)
                .map(|s| expand_key(&s, &cfg, 2 * degree as usize, 2).unwrap())
                .collect();
            for i in 0..keys.len() {
                for j in i + 1..keys.len() {
                    assert_ne!(keys[i], keys[j], "degree {degree}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn step_never_reaches_zero(seed in 1u64..(1 << 12), steps in 1usize..200) {
            let cfg = LfsrConfig::primitive(12).unwrap();
            let mut lfsr = Lfsr::new(&SeedKey::from_u64(seed, 12).unwrap(), &cfg).unwrap();
            for _ in 0..steps {
                lfsr.next_bit();
                prop_assert_ne!(lfsr.state(), 0);
            }
        }
    }
}
