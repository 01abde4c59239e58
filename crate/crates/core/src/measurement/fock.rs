use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use super::ErrorProbability;
use crate::modulation::{encode, ProtocolParams};
use crate::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-9;
const EIGEN_TOL: f64 = 1e-9;
const TAIL_TOL: f64 = 1e-12;

/// Hermitian, unit-trace, positive semidefinite matrix in the number basis
/// `|0⟩..|n_max⟩`.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    matrix: DMatrix<Complex64>,
}

impl DensityOperator {
    /// Validates all three invariants; costs one eigendecomposition.
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::Domain(format!(
                "density matrix must be square and nonempty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let dim = matrix.nrows();
        for i in 0..dim {
            for j in i..dim {
                if (matrix[(i, j)] - matrix[(j, i)].conj()).norm() > HERMITIAN_TOL {
                    return Err(Error::Domain(format!("matrix not Hermitian at ({i}, {j})")));
                }
            }
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::Domain(format!("trace {trace} differs from 1")));
        }
        let min_eig = SymmetricEigen::new(matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -EIGEN_TOL {
            return Err(Error::Domain(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Truncation photon number.
    pub fn n_max(&self) -> usize {
        self.dim() - 1
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect()
    }
}

/// `ceil(S + 10√S + 20)`.
pub fn default_truncation(s: f64) -> usize {
    (s + 10.0 * s.sqrt() + 20.0).ceil() as usize
}

fn ln_poisson(n: usize, s: f64) -> f64 {
    if s == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -s + n as f64 * s.ln() - ln_gamma(n as f64 + 1.0)
}

/// Poisson mass of photon numbers above `n_max`.
fn poisson_tail(n_max: usize, s: f64) -> f64 {
    let mut tail = 0.0;
    let mut n = n_max + 1;
    loop {
        let term = ln_poisson(n, s).exp();
        tail += term;
        // Past the mode the terms decrease geometrically.
        if (n as f64 > s && term <= 1e-20 * tail) || term == 0.0 {
            return tail;
        }
        n += 1;
    }
}

/// Number-basis amplitudes of the coherent state `|√S e^{iθ}⟩`.
fn coherent_amplitudes(s: f64, theta: f64, n_max: usize) -> DVector<Complex64> {
    DVector::from_fn(n_max + 1, |n, _| {
        let magnitude = (0.5 * ln_poisson(n, s)).exp();
        Complex64::from_polar(magnitude, n as f64 * theta)
    })
}

/// `ρ^b = (1/M) Σ_k |ψ(k, b)⟩⟨ψ(k, b)|`, truncated at `n_max` photons.
pub fn mixed_state_density(
    b: u8,
    params: &ProtocolParams,
    n_max: usize,
) -> Result<DensityOperator> {
    if b > 1 {
        return Err(Error::Domain(format!("data bit {b} is not 0 or 1")));
    }
    let tail = poisson_tail(n_max, params.s);
    if tail > TAIL_TOL {
        return Err(Error::Numerical(format!(
            "truncation at n_max = {n_max} leaves tail mass {tail:e} at S = {}; need at least {}",
            params.s,
            default_truncation(params.s)
        )));
    }
    let dim = n_max + 1;
    let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
    let weight = Complex64::new(1.0 / params.m as f64, 0.0);
    for k in 0..params.m {
        let psi = coherent_amplitudes(params.s, encode(k, b, params)?.phase(), n_max);
        rho.ger(weight, &psi, &psi.conjugate(), Complex64::new(1.0, 0.0));
    }
    // Exact hermiticity; the rank-one updates leave round-off asymmetry.
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let trace = rho.trace().re;
    if (trace - 1.0).abs() > TRACE_TOL {
        return Err(Error::Numerical(format!(
            "mixture trace {trace} differs from 1"
        )));
    }
    Ok(DensityOperator { matrix: rho })
}

/// Trace norm of a Hermitian matrix: the sum of absolute eigenvalues.
pub fn trace_norm(h: &DMatrix<Complex64>) -> f64 {
    SymmetricEigen::new(h.clone())
        .eigenvalues
        .iter()
        .map(|l| l.abs())
        .sum()
}

/// Minimum error for discriminating equiprobable `ρ⁰` and `ρ¹`:
/// `1/2 - (1/4)‖ρ¹ - ρ⁰‖₁`.
pub fn helstrom_mixed(rho0: &DensityOperator, rho1: &DensityOperator) -> Result<ErrorProbability> {
    if rho0.dim() != rho1.dim() {
        return Err(Error::Domain(format!(
            "dimension mismatch: {} vs {}",
            rho0.dim(),
            rho1.dim()
        )));
    }
    let diff = &rho1.matrix - &rho0.matrix;
    Ok(ErrorProbability::clamped(0.5 - 0.25 * trace_norm(&diff)))
}
