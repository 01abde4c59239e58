//! Measurement models: heterodyne sampling, Bob's optimal two-state receiver,
//! Eve's mixed-state Helstrom bound, and the user-over-heterodyne advantage.

mod fock;
mod phase;

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::modulation::CoherentState;
use crate::special::ln_gaussian_tail;
use crate::{Error, Result};

pub use fock::{
    default_truncation, helstrom_mixed, mixed_state_density, trace_norm, DensityOperator,
};
pub use phase::{ln_phase_tail, phase_density, phase_marginal_cdf, phase_mass};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeterodyneOutcome {
    pub q1: f64,
    pub q2: f64,
}

impl HeterodyneOutcome {
    /// Measured phase in `[0, 2π)`, or `None` at the origin.
    pub fn phase(&self) -> Option<f64> {
        if self.q1 == 0.0 && self.q2 == 0.0 {
            return None;
        }
        Some(self.q2.atan2(self.q1).rem_euclid(2.0 * PI))
    }
}

/// A minimum-error probability, always in `[0, 1/2]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ErrorProbability(f64);

impl ErrorProbability {
    pub(crate) fn clamped(p: f64) -> Self {
        Self(p.clamp(0.0, 0.5))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Phase-noise model for simulated heterodyne outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseModel {
    /// Coherent-state Q-function: per-quadrature Gaussian noise of variance 1/2.
    #[default]
    QFunction,
    /// Back-of-envelope comparison model: amplitude `|α|` kept exact, phase
    /// uniform within `±1/|α|` of the transmitted value.
    PaperUniform,
}

impl NoiseModel {
    pub fn name(self) -> &'static str {
        match self {
            NoiseModel::QFunction => "qfunction",
            NoiseModel::PaperUniform => "paper_uniform",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "qfunction" => Ok(NoiseModel::QFunction),
            "paper_uniform" => Ok(NoiseModel::PaperUniform),
            other => Err(Error::Config(format!(
                "unknown noise model {other:?} (expected qfunction or paper_uniform)"
            ))),
        }
    }

    /// Half-width of the uniform phase band of `PaperUniform`, capped at π.
    fn uniform_half_width(s: f64) -> f64 {
        if s == 0.0 {
            PI
        } else {
            (1.0 / s.sqrt()).min(PI)
        }
    }

    /// Probability that the phase deviation lies in `[lo, hi] ⊂ [-π, π]`.
    pub fn deviation_mass(self, lo: f64, hi: f64, s: f64) -> Result<f64> {
        match self {
            NoiseModel::QFunction => phase_mass(lo, hi, s),
            NoiseModel::PaperUniform => {
                let w = Self::uniform_half_width(s);
                let overlap = (hi.min(w) - lo.max(-w)).max(0.0);
                Ok(overlap / (2.0 * w))
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(self, state: &CoherentState, rng: &mut R) -> HeterodyneOutcome {
        match self {
            NoiseModel::QFunction => heterodyne_sample(state, rng),
            NoiseModel::PaperUniform => {
                let w = Self::uniform_half_width(state.s());
                let phase = state.phase() + rng.gen_range(-w..=w);
                // Keep the vacuum off the origin so a phase is always defined.
                let amp = state.s().sqrt().max(f64::MIN_POSITIVE);
                HeterodyneOutcome {
                    q1: amp * phase.cos(),
                    q2: amp * phase.sin(),
                }
            }
        }
    }
}

/// Draw a heterodyne outcome: `(√S cos θ, √S sin θ)` plus independent
/// Gaussian noise of variance 1/2 on each quadrature.
pub fn heterodyne_sample<R: Rng + ?Sized>(state: &CoherentState, rng: &mut R) -> HeterodyneOutcome {
    let (m1, m2) = state.mean_quadratures();
    let n1: f64 = rng.sample(StandardNormal);
    let n2: f64 = rng.sample(StandardNormal);
    HeterodyneOutcome {
        q1: m1 + FRAC_1_SQRT_2 * n1,
        q2: m2 + FRAC_1_SQRT_2 * n2,
    }
}

/// Optimal error for discriminating `|α⟩` from `|-α⟩`, whose overlap is
/// `exp(-4S)`: `(1/2)(1 - √(1 - e^{-4S}))`.
pub fn helstrom_two_state(s: f64) -> ErrorProbability {
    let overlap = (-4.0 * s).exp();
    // Rationalised to avoid cancellation when the overlap is tiny.
    ErrorProbability::clamped(0.5 * overlap / (1.0 + (1.0 - overlap).sqrt()))
}

/// Bob at the Helstrom rate: a binary symmetric channel flipping `r` with
/// probability `helstrom_two_state(s)`.
pub fn bob_channel<R: Rng + ?Sized>(r: u8, s: f64, rng: &mut R) -> u8 {
    let flip = rng.gen::<f64>() < helstrom_two_state(s).value();
    r ^ flip as u8
}

/// Energy at which Bob's Helstrom error equals `p`:
/// `e^{-4S} = 1 - (1 - 2p)² = 4p(1 - p)`.
pub fn bob_energy_for_error(p: f64) -> f64 {
    -(4.0 * p * (1.0 - p)).ln() / 4.0
}

/// Energy at which a key-holding heterodyne receiver's antipodal error
/// `Q(√(2S))` equals `p`, by bisection on `ln Q`.
pub fn heterodyne_energy_for_error(p: f64) -> Result<f64> {
    let target = p.ln();
    let f = |s: f64| ln_gaussian_tail((2.0 * s).sqrt()) - target;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Numerical(format!(
                "could not bracket heterodyne energy for error {p:e}"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::Numerical(format!(
        "heterodyne energy bisection for error {p:e} did not converge"
    )))
}

/// Energy advantage (dB) of the key-holding optimal receiver over a key-holding
/// heterodyne receiver at equal error `target_error`.
pub fn advantage_db(target_error: f64) -> Result<f64> {
    if !(target_error > 0.0 && target_error < 0.5) {
        return Err(Error::Domain(format!(
            "target error {target_error} outside (0, 1/2)"
        )));
    }
    let s_bob = bob_energy_for_error(target_error);
    let s_eve = heterodyne_energy_for_error(target_error)?;
    Ok(10.0 * (s_eve / s_bob).log10())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulation::{encode, ProtocolParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn state(s: f64, k: u32, r: u8, m: u32) -> CoherentState {
        encode(k, r, &ProtocolParams::new(s, m, 1).unwrap()).unwrap()
    }

    #[test]
    fn helstrom_two_state_values() {
        assert_eq!(helstrom_two_state(0.0).value(), 0.5);
        let p1 = helstrom_two_state(1.0).value();
        assert!((p1 - 0.004600).abs() < 1e-6, "{p1}");
        let asymptote = 0.25 * (-4.0f64).exp();
        assert!(((p1 / asymptote) - 1.0).abs() < 0.005);
        let p_half = helstrom_two_state(0.5).value();
        assert!((p_half - 0.03506).abs() < 1e-5, "{p_half}");
        assert!(helstrom_two_state(50.0).value() < 1e-80);
        assert!(helstrom_two_state(50.0).value() > 0.0);
    }

    #[test]
    fn vacuum_heterodyne_is_circular() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let st = state(0.0, 0, 0, 4);
        let n = 200_000;
        let (mut s1, mut s2, mut ss1, mut ss2) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let o = heterodyne_sample(&st, &mut rng);
            s1 += o.q1;
            s2 += o.q2;
            ss1 += o.q1 * o.q1;
            ss2 += o.q2 * o.q2;
        }
        let n = n as f64;
        let se = (0.5 / n).sqrt();
        assert!((s1 / n).abs() < 4.0 * se);
        assert!((s2 / n).abs() < 4.0 * se);
        assert!((ss1 / n - 0.5).abs() < 0.01);
        assert!((ss2 / n - 0.5).abs() < 0.01);
    }

    #[test]
    fn heterodyne_mean_and_phase_spread_at_s100() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let st = state(100.0, 0, 0, 4);
        let n = 1_000_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        let (mut cs, mut sn) = (0.0, 0.0);
        for _ in 0..n {
            let o = heterodyne_sample(&st, &mut rng);
            s1 += o.q1;
            s2 += o.q2;
            let ph = o.q2.atan2(o.q1);
            cs += ph.cos();
            sn += ph.sin();
        }
        let nf = n as f64;
        let se = (0.5 / nf).sqrt();
        assert!((s1 / nf - 10.0).abs() < 4.0 * se);
        assert!((s2 / nf).abs() < 4.0 * se);
        // Circular standard deviation √(-2 ln R̄).
        let rbar = (cs * cs + sn * sn).sqrt() / nf;
        let circ_sd = (-2.0 * rbar.ln()).sqrt();
        let expected = 1.0 / (2.0f64 * 100.0).sqrt();
        assert!(((circ_sd - expected) / expected).abs() < 0.05, "{circ_sd}");
    }

    #[test]
    fn bob_channel_flip_rates() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        assert!((0..100_000).all(|_| bob_channel(1, 50.0, &mut rng) == 1));

        let trials = 100_000;
        let flips = (0..trials)
            .filter(|_| bob_channel(0, 0.0, &mut rng) == 1)
            .count();
        let sigma = (0.25 / trials as f64).sqrt();
        assert!((flips as f64 / trials as f64 - 0.5).abs() < 3.0 * sigma);

        let trials = 1_000_000;
        let p = helstrom_two_state(0.5).value();
        let flips = (0..trials)
            .filter(|_| bob_channel(1, 0.5, &mut rng) == 0)
            .count();
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((flips as f64 / trials as f64 - 0.0351).abs() < 3.0 * sigma);
    }

    #[test]
    fn advantage_values() {
        let a9 = advantage_db(1e-9).unwrap();
        assert!((a9 - 6.0).abs() < 0.3, "{a9}");
        let quarter = advantage_db(0.25).unwrap();
        assert!(quarter.is_finite() && quarter > 0.0);
        assert!(advantage_db(0.0).is_err());
        assert!(advantage_db(0.5).is_err());
        // Bisection lands on the defining equation.
        let s = heterodyne_energy_for_error(1e-12).unwrap();
        assert!((ln_gaussian_tail((2.0 * s).sqrt()) - 1e-12f64.ln()).abs() < 1e-9);
        assert!(
            (helstrom_two_state(bob_energy_for_error(1e-12)).value() / 1e-12 - 1.0).abs() < 1e-6
        );
    }

    #[test]
    fn paper_uniform_model_band() {
        let m = NoiseModel::PaperUniform;
        assert!((m.deviation_mass(-PI, PI, 100.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((m.deviation_mass(0.0, 0.05, 100.0).unwrap() - 0.25).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let st = state(100.0, 0, 0, 4);
        for _ in 0..1000 {
            let o = m.sample(&st, &mut rng);
            let ph = o.q2.atan2(o.q1);
            assert!(ph.abs() <= 0.1 + 1e-12);
        }
        assert_eq!(
            NoiseModel::parse("qfunction").unwrap(),
            NoiseModel::QFunction
        );
        assert!(NoiseModel::parse("gaussian").is_err());
    }
}
