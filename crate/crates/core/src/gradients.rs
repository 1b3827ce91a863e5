//! Gradient estimators and spectral oracles.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::ModelKind;
use crate::linalg::{hermitian_eig, partial_trace_hidden, BipartiteDims, ComplexMatrix, Spectrum};

/// Default central-difference step.
pub const DEFAULT_STEP: f64 = 1e-4;
/// Minimum eigenvalue gap for the non-degenerate perturbation formula.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;
/// Minimum gap accepted by [`gap_statistic`].
pub const GAP_STATISTIC_THRESHOLD: f64 = 1e-10;

/// One sampled model instance and its gradient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientRecord {
    pub model: ModelKind,
    pub dims: BipartiteDims,
    pub instance: usize,
    pub seed: u64,
    pub gradient: Vec<f64>,
    pub inf_norm: f64,
}

impl GradientRecord {
    pub fn new(
        model: ModelKind,
        dims: BipartiteDims,
        instance: usize,
        seed: u64,
        gradient: Vec<f64>,
    ) -> Self {
        let inf_norm = inf_norm(&gradient);
        Self {
            model,
            dims,
            instance,
            seed,
            gradient,
            inf_norm,
        }
    }
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Central differences `(f(theta + h e_k) - f(theta - h e_k)) / 2h`.
pub fn finite_diff_gradient<F>(f: F, theta: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "step must be positive, got {h}"
        )));
    }
    let mut probe = theta.to_vec();
    let mut grad = Vec::with_capacity(theta.len());
    for k in 0..theta.len() {
        probe[k] = theta[k] + h;
        let plus = f(&probe);
        probe[k] = theta[k] - h;
        let minus = f(&probe);
        probe[k] = theta[k];
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFinite { index: k });
        }
        grad.push((plus - minus) / (2.0 * h));
    }
    Ok(grad)
}

/// Divided difference of `x -> exp(-x)` at `(x, y)`, stable as `x -> y`.
fn exp_divided_difference(x: f64, y: f64) -> f64 {
    let d = x - y;
    if d == 0.0 {
        -(-y).exp()
    } else {
        (-y).exp() * (-d).exp_m1() / d
    }
}

/// Exact `d/dtheta Tr((O (x) I) exp(-(H + theta H_k)) / Z)` at `theta = 0`.
///
/// In the eigenbasis of `H` the Frechet derivative of `exp(-H)` along `H_k` is
/// `M_ij f[lambda_i, lambda_j]` with `M = U^dagger H_k U` and `f[., .]` the
/// divided difference of `exp(-x)`. Eigenvalues are shifted by their minimum;
/// the common factor cancels in the quotient rule.
pub fn exact_thermal_derivative(
    h: &ComplexMatrix,
    h_k: &ComplexMatrix,
    obs: &ComplexMatrix,
    dims: BipartiteDims,
) -> Result<f64> {
    if h.dim() != dims.dim() || h_k.dim() != dims.dim() {
        return Err(Error::DimensionMismatch {
            expected: dims.dim(),
            found: if h.dim() != dims.dim() {
                h.dim()
            } else {
                h_k.dim()
            },
        });
    }
    if obs.dim() != dims.d_v() {
        return Err(Error::DimensionMismatch {
            expected: dims.d_v(),
            found: obs.dim(),
        });
    }
    h_k.check_hermitian()?;
    let spec = hermitian_eig(h)?;
    let n = spec.dim();
    let lmin = spec.eigenvalues[0];
    let lam: Vec<f64> = spec.eigenvalues.iter().map(|x| x - lmin).collect();
    let u = &spec.eigenvectors;

    let k_rho = spec.recombine(
        &lam.iter()
            .map(|&x| Complex64::new((-x).exp(), 0.0))
            .collect::<Vec<_>>(),
    );
    let m = &(&u.adjoint() * h_k) * u;
    let dk_eig =
        ComplexMatrix::from_fn(n, |i, j| m[(i, j)] * exp_divided_difference(lam[i], lam[j]));
    let dk = &(u * &dk_eig) * &u.adjoint();

    let z = k_rho.trace().re;
    let dz = dk.trace().re;
    let a = (obs * &partial_trace_hidden(&k_rho, dims)?).trace().re;
    let da = (obs * &partial_trace_hidden(&dk, dims)?).trace().re;
    Ok(da / z - a * dz / (z * z))
}

/// First-order eigenvector correction per unit coupling:
/// `sum_{j != n} |j> <j|H_k|n> / (E_n - E_j)`, in the computational basis.
pub fn first_order_eigvec_shift(
    spec: &Spectrum,
    h_k: &ComplexMatrix,
    n: usize,
) -> Result<Vec<Complex64>> {
    let dim = spec.dim();
    if h_k.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: h_k.dim(),
        });
    }
    if n >= dim {
        return Err(Error::InvalidParameter(format!(
            "eigen-index {n} out of range ({dim})"
        )));
    }
    let e_n = spec.eigenvalues[n];
    let min_gap = spec
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != n)
        .map(|(_, e)| (e_n - e).abs())
        .fold(f64::INFINITY, f64::min);
    if min_gap < DEGENERACY_THRESHOLD {
        return Err(Error::Degenerate {
            gap: min_gap,
            threshold: DEGENERACY_THRESHOLD,
        });
    }
    let ket_n = spec.eigenvector(n);
    let hk_n = h_k.apply(&ket_n);
    let mut shift = vec![Complex64::new(0.0, 0.0); dim];
    for j in (0..dim).filter(|&j| j != n) {
        let ket_j = spec.eigenvector(j);
        let amp: Complex64 = ket_j
            .iter()
            .zip(&hk_n)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            / (e_n - spec.eigenvalues[j]);
        for (s, v) in shift.iter_mut().zip(&ket_j) {
            *s += amp * v;
        }
    }
    Ok(shift)
}

/// `max_k |(1/D) sum_{j != k} 1 / (E_j - E_k)|`.
pub fn gap_statistic(spec: &Spectrum) -> Result<f64> {
    let e = &spec.eigenvalues;
    let d = e.len();
    let min_gap = e
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if min_gap < GAP_STATISTIC_THRESHOLD {
        return Err(Error::Degenerate {
            gap: min_gap,
            threshold: GAP_STATISTIC_THRESHOLD,
        });
    }
    Ok((0..d)
        .map(|k| {
            let s: f64 = (0..d)
                .filter(|&j| j != k)
                .map(|j| 1.0 / (e[j] - e[k]))
                .sum();
            (s / d as f64).abs()
        })
        .fold(0.0, f64::max))
}

/// Multiplies `v` by the phase that makes `<reference|v>` real and positive.
pub fn align_phase(v: &[Complex64], reference: &[Complex64]) -> Vec<Complex64> {
    let overlap: Complex64 = reference.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
    if overlap.norm() == 0.0 {
        return v.to_vec();
    }
    let phase = overlap.conj() / overlap.norm();
    v.iter().map(|z| z * phase).collect()
}
