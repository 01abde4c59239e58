//! Special functions and adaptive quadrature shared by the measurement and
//! information-theory modules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

pub use statrs::function::erf::erfc;

/// Scaled complementary error function `exp(x²)·erfc(x)`.
///
/// Finite for all `x ≥ -26`; beyond `x = 25` the asymptotic series is used so
/// that `exp(x²)` never overflows.
pub fn erfcx(x: f64) -> f64 {
    if x < 25.0 {
        (x * x).exp() * erfc(x)
    } else {
        let inv2 = 1.0 / (x * x);
        let series = 1.0 - 0.5 * inv2 + 0.75 * inv2 * inv2 - 1.875 * inv2 * inv2 * inv2
            + 6.5625 * inv2 * inv2 * inv2 * inv2;
        series / (x * std::f64::consts::PI.sqrt())
    }
}

/// Natural log of the Gaussian tail `Q(x) = P(Z > x)`.
///
/// For `x > 8` the asymptotic expansion is evaluated in the log domain, so
/// values far below `f64::MIN_POSITIVE` stay representable.
pub fn ln_gaussian_tail(x: f64) -> f64 {
    if x <= 8.0 {
        (0.5 * erfc(x / std::f64::consts::SQRT_2)).ln()
    } else {
        // Alternating asymptotic series, truncated at its smallest term.
        let inv2 = 1.0 / (x * x);
        let mut term = 1.0;
        let mut series = 1.0;
        for k in 1..60 {
            let next = -term * (2 * k - 1) as f64 * inv2;
            if next.abs() >= term.abs() {
                break;
            }
            series += next;
            term = next;
        }
        -0.5 * x * x - x.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() + series.ln()
    }
}

/// `ln(exp(a) + exp(b))` without overflow.
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (i, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        // Odd Kronrod nodes coincide with the 7-point Gauss nodes.
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

const MAX_SEGMENTS: usize = 4000;

/// Globally adaptive Gauss-Kronrod integration of `f` over `[a, b]` to absolute
/// tolerance `abs_tol`.
///
/// `breakpoints` are interior points where the integrand has a kink or a sharp
/// peak; they seed the initial partition.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    abs_tol: f64,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let mut edges = vec![lo];
    let mut interior: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > lo && x < hi)
        .collect();
    interior.sort_by(f64::total_cmp);
    edges.extend(interior);
    edges.push(hi);

    let mut heap = BinaryHeap::new();
    let mut total_err = 0.0;
    for w in edges.windows(2) {
        let (value, error) = gk15(&f, w[0], w[1]);
        total_err += error;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value,
            error,
        });
    }

    while total_err > abs_tol {
        if heap.len() >= MAX_SEGMENTS {
            return Err(Error::Numerical(format!(
                "quadrature on [{lo}, {hi}] did not converge: error estimate {total_err:e} \
                 exceeds tolerance {abs_tol:e} after {MAX_SEGMENTS} segments"
            )));
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Numerical(format!(
                "quadrature segment [{}, {}] cannot be bisected further (error {:e})",
                worst.a, worst.b, worst.error
            )));
        }
        let (lv, le) = gk15(&f, worst.a, mid);
        let (rv, re) = gk15(&f, mid, worst.b);
        total_err += le + re - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: lv,
            error: le,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: rv,
            error: re,
        });
    }

    let value: f64 = heap.iter().map(|s| s.value).sum();
    Ok(sign * value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn integrates_polynomials_and_peaks() {
        let v = integrate(|x| x * x, 0.0, 3.0, &[], 1e-14).unwrap();
        assert!((v - 9.0).abs() < 1e-12);

        let width: f64 = 1e-3;
        let v = integrate(
            |x| (-(x * x) / (2.0 * width * width)).exp(),
            -1.0,
            1.0,
            &[0.0],
            1e-14,
        )
        .unwrap();
        assert!((v - width * (2.0 * PI).sqrt()).abs() < 1e-12);

        let v = integrate(|x| x.sin(), PI, 0.0, &[], 1e-14).unwrap();
        assert!((v + 2.0).abs() < 1e-12);
    }

    #[test]
    fn erfcx_is_continuous_across_branch() {
        let below = erfcx(25.0 - 1e-9);
        let above = erfcx(25.0);
        assert!(((below - above) / above).abs() < 1e-9);
        assert!((erfcx(0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_tail_matches_erfc_and_extends_below_underflow() {
        for &x in &[0.0, 1.0, 3.0, 7.9, 8.1, 12.0, 30.0] {
            let direct = (0.5 * erfc(x / std::f64::consts::SQRT_2)).ln();
            assert!((ln_gaussian_tail(x) - direct).abs() < 1e-9, "x = {x}");
        }
        // Q(50) = 1.08e-545 (mpmath): not representable, but its log is.
        let l = ln_gaussian_tail(50.0) / std::f64::consts::LN_10;
        assert!((l + 544.966_335_862).abs() < 1e-9, "{l}");
    }

    #[test]
    fn ln_add_exp_handles_extremes() {
        assert_eq!(ln_add_exp(f64::NEG_INFINITY, -3.0), -3.0);
        let v = ln_add_exp(-1000.0, -1000.0);
        assert!((v - (-1000.0 + 2f64.ln())).abs() < 1e-12);
    }
}
