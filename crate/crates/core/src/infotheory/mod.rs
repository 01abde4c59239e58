//! Random versus non-random cipher classification on small instances.
//!
//! A cipher with output `Y` is decryptable when `H(R|Y,K) = 0` and random when
//! additionally `H(Y|R,K) > 0`. The oracle here computes both exactly for the
//! wedge-attack output `J`, for any one-bit reduction `L = l(J)`, and for the
//! additive stream cipher on the same footing.

mod channel;
mod entropy;

use std::f64::consts::{FRAC_PI_2, PI};

use crate::attack::DecryptTable;
use crate::keystream::{expand_key, LfsrConfig, SeedKey};
use crate::measurement::ln_phase_tail;
use crate::modulation::ProtocolParams;
use crate::special::ln_add_exp;
use crate::{Error, Result};

pub use channel::{channel_matrix, channel_matrix_with, ChannelMatrix, MAX_ORACLE_M};
pub use entropy::{
    exact_entropies, exhaustive_l_search, EntropyReport, InstanceDescriptor, KeyModel,
    RuleSearchResult, ENUMERATION_BUDGET, MAX_RULE_SEARCH_OUTPUTS,
};

/// Binary entropy `h2(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// Fano bound on `H(R | Y, K)` for a binary `R` decoded with error `p_fail`:
/// `h2(p) + p·log2(|R| - 1) = h2(p)`.
pub fn fano_bound(p_fail: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&p_fail) {
        return Err(Error::Domain(format!(
            "failure probability {p_fail} outside [0, 1/2]"
        )));
    }
    Ok(binary_entropy(p_fail))
}

/// Exact per-symbol probability that the wedge decryption `F_j(k)` differs from
/// `r`, averaged over uniform `k` and `r`.
pub fn wedge_decrypt_failure(channel: &ChannelMatrix, table: &DecryptTable) -> Result<f64> {
    let m = table.m();
    if channel.key_symbols() != m || channel.outputs() != 2 * m {
        return Err(Error::Domain(
            "channel and decryption table disagree on M".into(),
        ));
    }
    let mut fail = 0.0;
    for k in 0..m {
        for r in 0..2u8 {
            fail += (0..2 * m)
                .filter(|&j| table.get(j, k) != r)
                .map(|j| channel.prob(j, k, r))
                .sum::<f64>();
        }
    }
    Ok(fail / (2 * m) as f64)
}

/// `log10` of the probability that key-holding wedge decryption fails on one
/// symbol, from analytic tails of the heterodyne phase marginal.
///
/// For odd `M` the discretised ML boundary sits exactly a quarter turn from the
/// transmitted point. For even `M` the wedges a quarter turn away tie to bit 0,
/// which moves the boundary to `π/2 + π/2M` when `r = 0` and `π/2 - π/2M` when
/// `r = 1`; the two tails are averaged.
pub fn decryption_failure_prob(params: &ProtocolParams) -> Result<f64> {
    let m = params.m;
    let ln_p = if m % 2 == 1 {
        ln_phase_tail(FRAC_PI_2, params.s)?
    } else {
        let half_wedge = PI / (2.0 * m as f64);
        let inner = ln_phase_tail(FRAC_PI_2 - half_wedge, params.s)?;
        let outer = ln_phase_tail(FRAC_PI_2 + half_wedge, params.s)?;
        ln_add_exp(inner, outer) - std::f64::consts::LN_2
    };
    Ok(ln_p / std::f64::consts::LN_10)
}

/// Additive stream cipher `l_i = r_i ⊕ k̃_i` keyed by the same LFSR.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamCipherBaseline {
    pub keystream: Vec<u8>,
    pub ciphertext: Vec<u8>,
}

impl StreamCipherBaseline {
    pub fn encrypt(plaintext: &[u8], seed: &SeedKey, cfg: &LfsrConfig) -> Result<Self> {
        if let Some(b) = plaintext.iter().find(|&&b| b > 1) {
            return Err(Error::Domain(format!("plaintext bit {b} is not 0 or 1")));
        }
        let keystream: Vec<u8> = expand_key(seed, cfg, plaintext.len(), 2)?
            .blocks()
            .iter()
            .map(|&k| k as u8)
            .collect();
        let ciphertext = plaintext
            .iter()
            .zip(&keystream)
            .map(|(r, k)| r ^ k)
            .collect();
        Ok(Self {
            keystream,
            ciphertext,
        })
    }

    pub fn decrypt(&self) -> Vec<u8> {
        self.ciphertext
            .iter()
            .zip(&self.keystream)
            .map(|(l, k)| l ^ k)
            .collect()
    }

    /// The cipher as a per-symbol channel: key bit `k̃`, output `r ⊕ k̃`.
    pub fn channel() -> ChannelMatrix {
        ChannelMatrix::deterministic(2, 2, |k, r| k ^ r as u32).expect("outputs in range")
    }
}

/// Encrypt and decrypt; returns `(ciphertext, recovered plaintext)`.
pub fn stream_cipher_roundtrip(
    plaintext: &[u8],
    seed: &SeedKey,
    cfg: &LfsrConfig,
) -> Result<(Vec<u8>, Vec<u8>)> {
    let cipher = StreamCipherBaseline::encrypt(plaintext, seed, cfg)?;
    let recovered = cipher.decrypt();
    Ok((cipher.ciphertext, recovered))
}
