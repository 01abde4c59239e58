use std::f64::consts::PI;

use crate::measurement::NoiseModel;
use crate::modulation::{constellation_index, ProtocolParams};
use crate::{Error, Result};

/// Largest basis count the wedge channel is tabulated for.
pub const MAX_ORACLE_M: u32 = 64;

const ROW_RESIDUAL_TOL: f64 = 1e-9;

/// Per-symbol law `p(y | k, r)` of a cipher's output given key symbol and data bit.
///
/// For Y-00 under the wedge attack `k < M` and `y = j < 2M`. The additive stream
/// cipher is the deterministic channel `y = r ⊕ k` with `k, y ∈ {0, 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    key_symbols: u32,
    outputs: u32,
    probs: Vec<f64>,
    s: Option<f64>,
    m: u32,
}

impl ChannelMatrix {
    /// A noiseless channel `y = f(k, r)`.
    pub fn deterministic(
        key_symbols: u32,
        outputs: u32,
        f: impl Fn(u32, u8) -> u32,
    ) -> Result<Self> {
        let mut probs = vec![0.0; (key_symbols * 2 * outputs) as usize];
        for k in 0..key_symbols {
            for r in 0..2u8 {
                let y = f(k, r);
                if y >= outputs {
                    return Err(Error::Domain(format!("output {y} outside 0..{outputs}")));
                }
                probs[((k * 2 + r as u32) * outputs + y) as usize] = 1.0;
            }
        }
        Ok(Self {
            key_symbols,
            outputs,
            probs,
            s: None,
            m: key_symbols,
        })
    }

    pub fn key_symbols(&self) -> u32 {
        self.key_symbols
    }

    pub fn outputs(&self) -> u32 {
        self.outputs
    }

    /// Signal energy for a Y-00 channel; `None` for a noiseless classical one.
    pub fn s(&self) -> Option<f64> {
        self.s
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn prob(&self, y: u32, k: u32, r: u8) -> f64 {
        self.probs[((k * 2 + r as u32) * self.outputs + y) as usize]
    }

    pub fn row(&self, k: u32, r: u8) -> &[f64] {
        let start = ((k * 2 + r as u32) * self.outputs) as usize;
        &self.probs[start..start + self.outputs as usize]
    }
}

/// Wedge channel under the Q-function heterodyne model.
pub fn channel_matrix(params: &ProtocolParams) -> Result<ChannelMatrix> {
    channel_matrix_with(params, NoiseModel::QFunction)
}

pub fn channel_matrix_with(params: &ProtocolParams, noise: NoiseModel) -> Result<ChannelMatrix> {
    let m = params.m;
    if m > MAX_ORACLE_M {
        return Err(Error::ScaleGuard(format!(
            "M = {m} exceeds the oracle limit of {MAX_ORACLE_M}"
        )));
    }
    let outputs = 2 * m;
    let width = PI / m as f64;

    // The wedge law depends only on the offset between wedge and transmitted point.
    let mut by_offset = Vec::with_capacity(outputs as usize);
    for offset in 0..outputs {
        let signed = if offset <= m {
            offset as f64
        } else {
            offset as f64 - outputs as f64
        };
        let lo = (signed - 0.5) * width;
        let hi = (signed + 0.5) * width;
        let mass = if hi > PI {
            noise.deviation_mass(lo, PI, params.s)?
                + noise.deviation_mass(-PI, hi - 2.0 * PI, params.s)?
        } else {
            noise.deviation_mass(lo, hi, params.s)?
        };
        by_offset.push(mass.max(0.0));
    }
    let total: f64 = by_offset.iter().sum();
    if (total - 1.0).abs() > ROW_RESIDUAL_TOL {
        return Err(Error::Numerical(format!(
            "wedge masses at S = {}, M = {m} sum to {total}",
            params.s
        )));
    }
    for p in &mut by_offset {
        *p /= total;
    }

    let mut probs = Vec::with_capacity((m * 2 * outputs) as usize);
    for k in 0..m {
        for r in 0..2u8 {
            let sent = constellation_index(k, r, m)?.index();
            probs
                .extend((0..outputs).map(|j| by_offset[((j + outputs - sent) % outputs) as usize]));
        }
    }
    Ok(ChannelMatrix {
        key_symbols: m,
        outputs,
        probs,
        s: Some(params.s),
        m,
    })
}
