//! Angular marginal of the heterodyne outcome.
//!
//! With outcome density `(1/π)·exp(-|β-α|²)` and `a = √S·cos φ`, the phase
//! deviation `φ` from the transmitted phase has density
//!
//! ```text
//! p(φ) = (1/2π)·[exp(-S) + √π·a·exp(-S sin²φ)·erfc(-a)]
//! ```
//!
//! For `a < 0` this is rewritten through `erfcx` so that nothing underflows
//! before the final `exp(-S)` scale.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::special::{erfc, erfcx, integrate};
use crate::{Error, Result};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Quadrature tolerance for marginal masses.
pub const PHASE_QUAD_TOL: f64 = 1e-13;

/// `p(φ)·exp(S·scale)` for `φ ∈ [-π, π]`.
///
/// `scale` must satisfy `scale ≤ sin²φ` wherever `cos φ ≥ 0`, and `scale ≤ 1`,
/// so that every exponent stays non-positive.
fn scaled_density(phi: f64, s: f64, scale: f64) -> f64 {
    let (sin, cos) = phi.sin_cos();
    let a = s.sqrt() * cos;
    let floor = (-s * (1.0 - scale)).exp();
    if a >= 0.0 {
        (floor + SQRT_PI * a * (-s * (sin * sin - scale)).exp() * erfc(-a)) / (2.0 * PI)
    } else {
        floor * (1.0 - SQRT_PI * (-a) * erfcx(-a)) / (2.0 * PI)
    }
}

/// Density of the heterodyne phase deviation `φ ∈ [-π, π]`.
pub fn phase_density(phi: f64, s: f64) -> f64 {
    scaled_density(phi, s, 0.0)
}

fn breakpoints(s: f64) -> Vec<f64> {
    // Concentrate nodes around the peak at 0, whose width is ~1/√(2S).
    let mut pts = vec![0.0, FRAC_PI_2, -FRAC_PI_2];
    if s > 0.0 {
        let w = 1.0 / (2.0 * s).sqrt();
        for k in [1.0, 3.0, 8.0, 20.0] {
            if k * w < FRAC_PI_2 {
                pts.push(k * w);
                pts.push(-k * w);
            }
        }
    }
    pts
}

/// Probability mass of the phase deviation on `[lo, hi] ⊂ [-π, π]`.
pub fn phase_mass(lo: f64, hi: f64, s: f64) -> Result<f64> {
    if s == 0.0 {
        return Ok((hi - lo) / (2.0 * PI));
    }
    integrate(
        |x| phase_density(x, s),
        lo,
        hi,
        &breakpoints(s),
        PHASE_QUAD_TOL,
    )
}

/// `P(|φ| ≤ δ)`: probability that the measured phase deviates from the
/// transmitted one by at most `delta ∈ [0, π]`.
pub fn phase_marginal_cdf(delta: f64, s: f64) -> Result<f64> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(Error::Domain(format!("S = {s} must be finite and >= 0")));
    }
    if !(0.0..=PI).contains(&delta) {
        return Err(Error::Domain(format!("delta = {delta} outside [0, π]")));
    }
    if delta == PI {
        return Ok(1.0);
    }
    let half = phase_mass(0.0, delta, s)
        .map_err(|e| Error::Numerical(format!("phase CDF at δ = {delta}, S = {s}: {e}")))?;
    Ok((2.0 * half).clamp(0.0, 1.0))
}

/// `ln P(|φ| > δ)`, accurate when the tail is far below `f64::MIN_POSITIVE`.
pub fn ln_phase_tail(delta: f64, s: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&delta) {
        return Err(Error::Domain(format!("delta = {delta} outside [0, π]")));
    }
    if delta == PI {
        return Ok(f64::NEG_INFINITY);
    }
    if s == 0.0 {
        return Ok(((PI - delta) / PI).ln());
    }
    // Factor out the integrand's largest exponential on [δ, π].
    let scale = if delta <= FRAC_PI_2 {
        delta.sin().powi(2)
    } else {
        1.0
    };
    let mut pts = vec![FRAC_PI_2];
    if s > 0.0 && delta < FRAC_PI_2 {
        // Scaled integrand decays from δ over ~1/(S·sin 2δ).
        let w = 1.0 / (s * (2.0 * delta).sin().abs()).max(1.0);
        for k in [1.0, 4.0, 16.0] {
            pts.push(delta + k * w);
        }
    }
    let f = |x| scaled_density(x, s, scale);
    let numerical = |e| Error::Numerical(format!("phase tail at δ = {delta}, S = {s}: {e}"));
    // Coarse pass sets the magnitude, second pass refines to relative 1e-12.
    let rough = integrate(f, delta, PI, &pts, f64::INFINITY).map_err(numerical)?;
    let scaled = integrate(f, delta, PI, &pts, 1e-12 * rough.abs()).map_err(numerical)?;
    if scaled <= 0.0 {
        return Err(Error::Numerical(format!(
            "non-positive scaled phase tail {scaled:e} at δ = {delta}, S = {s}"
        )));
    }
    Ok((2.0 * scaled).ln() - s * scale)
}
