//! Phase encoding of (running-key block, data bit) pairs.
//!
//! Every transmitted state sits on the grid of `2M` phases `m·π/M`. Block `k`
//! selects the antipodal pair `{k, k + M}`; the data bit picks an end point,
//! with the labeling flipped on odd `k` so neighbouring points carry opposite
//! bits. Phases are kept as grid indices and only converted to radians at
//! measurement time.

use std::f64::consts::PI;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    /// Mean photon number `S = |α|²`.
    pub s: f64,
    /// Basis count `M`.
    pub m: u32,
    /// Message length in bits.
    pub n: usize,
}

impl ProtocolParams {
    pub fn new(s: f64, m: u32, n: usize) -> Result<Self> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::Config(format!(
                "signal energy S = {s} must be finite and >= 0"
            )));
        }
        if m == 0 {
            return Err(Error::Config("basis count M must be at least 1".into()));
        }
        if n == 0 {
            return Err(Error::Config("message length N must be at least 1".into()));
        }
        Ok(Self { s, m, n })
    }

    /// Coherent amplitude `|α| = √S`.
    pub fn amplitude(&self) -> f64 {
        self.s.sqrt()
    }
}

/// One of the `2M` constellation points, at angle `index·π/M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConstellationIndex {
    index: u32,
    m: u32,
}

impl ConstellationIndex {
    pub fn new(index: u32, m: u32) -> Result<Self> {
        if m == 0 || index >= 2 * m {
            return Err(Error::Domain(format!(
                "constellation index {index} outside 0..{}",
                2 * m
            )));
        }
        Ok(Self { index, m })
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Angle in radians, in `[0, 2π)`.
    pub fn phase(&self) -> f64 {
        self.index as f64 * PI / self.m as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentState {
    s: f64,
    point: ConstellationIndex,
}

impl CoherentState {
    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn point(&self) -> ConstellationIndex {
        self.point
    }

    pub fn phase(&self) -> f64 {
        self.point.phase()
    }

    /// Mean quadratures `(√S cos θ, √S sin θ)`.
    pub fn mean_quadratures(&self) -> (f64, f64) {
        let (sin, cos) = self.phase().sin_cos();
        let amp = self.s.sqrt();
        (amp * cos, amp * sin)
    }
}

/// `Π(k)`: 0 for even blocks, 1 for odd.
pub fn parity(k: u32) -> u8 {
    (k & 1) as u8
}

/// Grid index of the state carrying bit `r` on basis `k`.
pub fn constellation_index(k: u32, r: u8, m: u32) -> Result<ConstellationIndex> {
    if k >= m {
        return Err(Error::Domain(format!("key block {k} outside 0..{m}")));
    }
    if r > 1 {
        return Err(Error::Domain(format!("data bit {r} is not 0 or 1")));
    }
    let half_turn = (r ^ parity(k)) as u32;
    ConstellationIndex::new(k + m * half_turn, m)
}

/// The state `|α e^{iθ(k, r)}⟩` with `θ = (k/M + (r ⊕ Π(k)))·π`.
pub fn encode(k: u32, r: u8, params: &ProtocolParams) -> Result<CoherentState> {
    Ok(CoherentState {
        s: params.s,
        point: constellation_index(k, r, params.m)?,
    })
}

/// Data bit carried by the constellation point at `index·π/M`.
pub fn constellation_bit(point: ConstellationIndex) -> u8 {
    let k = point.index % point.m;
    let half_turn = (point.index / point.m) as u8;
    half_turn ^ parity(k)
}

/// Circular distance between two grid indices, in units of `π/M`; in `0..=M`.
pub(crate) fn grid_distance(a: u32, b: u32, m: u32) -> u32 {
    let d = a.abs_diff(b) % (2 * m);
    d.min(2 * m - d)
}
