//! The two network models and the functionals evaluated on their states.
//!
//! A [`UnitaryAnsatz`] applies one Pauli rotation `exp(-i theta_j P_j)` per
//! enumerated two-local term to `|0...0>`. A [`BoltzmannModel`] is the Gibbs
//! state `exp(-H) / Z` of a two-local Hamiltonian, optionally rescaled to unit
//! operator norm first.

use num_complex::Complex64;

use crate::ensembles::{
    assemble_hamiltonian, enumerate_two_local_terms, PauliString, TwoLocalHamiltonian,
};
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig, operator_norm, partial_trace_hidden, reduced_density, trace_distance,
    von_neumann_entropy, BipartiteDims, ComplexMatrix, Spectrum,
};

/// Parameterized unitary network with one rotation per Pauli term.
#[derive(Debug, Clone)]
pub struct UnitaryAnsatz {
    dims: BipartiteDims,
    terms: Vec<PauliString>,
    params: Vec<f64>,
}

impl UnitaryAnsatz {
    /// Ansatz over every two-local term on the `n_v + n_h` qubits.
    pub fn two_local(dims: BipartiteDims, params: Vec<f64>) -> Result<Self> {
        Self::with_terms(dims, enumerate_two_local_terms(dims.qubits()), params)
    }

    pub fn with_terms(
        dims: BipartiteDims,
        terms: Vec<PauliString>,
        params: Vec<f64>,
    ) -> Result<Self> {
        if terms.len() != params.len() {
            return Err(Error::DimensionMismatch {
                expected: terms.len(),
                found: params.len(),
            });
        }
        if let Some(bad) = terms.iter().find(|t| t.qubits() != dims.qubits()) {
            return Err(Error::InvalidParameter(format!(
                "term {bad} acts on {} qubits, ansatz has {}",
                bad.qubits(),
                dims.qubits()
            )));
        }
        Ok(Self {
            dims,
            terms,
            params,
        })
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::DimensionMismatch {
                expected: self.params.len(),
                found: params.len(),
            });
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    pub fn state(&self) -> Vec<Complex64> {
        rotate_sequence(&self.terms, &self.params, self.dims.dim())
    }
}

/// `prod_j exp(-i theta_j P_j) |0...0>` with the product ordered by term
/// index, so the last term acts on `|0...0>` first and term 0 acts last.
/// Each factor is `cos(theta_j) I - i sin(theta_j) P_j` since `P_j^2 = I`.
fn rotate_sequence(terms: &[PauliString], params: &[f64], dim: usize) -> Vec<Complex64> {
    let mut psi = vec![Complex64::new(0.0, 0.0); dim];
    psi[0] = Complex64::new(1.0, 0.0);
    let mut scratch = vec![Complex64::new(0.0, 0.0); dim];
    for (term, &theta) in terms.iter().zip(params).rev() {
        let (s, c) = theta.sin_cos();
        term.apply_into(&psi, &mut scratch);
        let minus_i_s = Complex64::new(0.0, -s);
        for (p, q) in psi.iter_mut().zip(&scratch) {
            *p = *p * c + q * minus_i_s;
        }
    }
    psi
}

pub fn unitary_qnn_state(ansatz: &UnitaryAnsatz) -> Vec<Complex64> {
    ansatz.state()
}

/// Quantum Boltzmann machine over a two-local Hamiltonian.
#[derive(Debug, Clone)]
pub struct BoltzmannModel {
    hamiltonian: TwoLocalHamiltonian,
    normalize: bool,
    base: ComplexMatrix,
    scale: f64,
}

impl BoltzmannModel {
    pub fn new(hamiltonian: TwoLocalHamiltonian, normalize: bool) -> Result<Self> {
        let base = assemble_hamiltonian(&hamiltonian);
        let scale = if normalize {
            let norm = operator_norm(&base)?;
            if norm > 0.0 {
                norm
            } else {
                1.0
            }
        } else {
            1.0
        };
        Ok(Self {
            hamiltonian,
            normalize,
            base,
            scale,
        })
    }

    pub fn hamiltonian(&self) -> &TwoLocalHamiltonian {
        &self.hamiltonian
    }

    pub fn is_normalized(&self) -> bool {
        self.normalize
    }

    /// Divisor applied to the assembled Hamiltonian (1 when not normalizing).
    pub fn normalization(&self) -> f64 {
        self.scale
    }

    pub fn num_params(&self) -> usize {
        self.hamiltonian.coefficients().len()
    }

    /// Effective Hamiltonian `H / normalization`.
    pub fn effective_hamiltonian(&self) -> ComplexMatrix {
        self.base.scale_real(1.0 / self.scale)
    }

    pub fn thermal_state(&self) -> Result<ComplexMatrix> {
        thermal_state(&self.effective_hamiltonian())
    }

    /// Effective Hamiltonian with coupling `k` shifted by `delta`, reusing the
    /// base normalization constant.
    pub fn perturbed_hamiltonian(&self, k: usize, delta: f64) -> Result<ComplexMatrix> {
        let terms = enumerate_two_local_terms(self.hamiltonian.qubits());
        let term = terms.get(k).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "parameter index {k} out of range ({})",
                terms.len()
            ))
        })?;
        let mut h = self.base.clone();
        term.add_to(&mut h, delta);
        Ok(h.scale_real(1.0 / self.scale))
    }
}

/// Gibbs weights `exp(-(lambda - lambda_min))`, normalized.
fn gibbs_weights(spec: &Spectrum) -> Vec<Complex64> {
    let lmin = spec.eigenvalues.first().copied().unwrap_or(0.0);
    let w: Vec<f64> = spec
        .eigenvalues
        .iter()
        .map(|&x| (-(x - lmin)).exp())
        .collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| Complex64::new(x / z, 0.0)).collect()
}

/// `exp(-H) / Tr exp(-H)`.
pub fn thermal_state(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let spec = hermitian_eig(h)?;
    Ok(thermal_state_from_spectrum(&spec))
}

pub fn thermal_state_from_spectrum(spec: &Spectrum) -> ComplexMatrix {
    spec.recombine(&gibbs_weights(spec))
}

/// `Tr(O_obj Tr_h rho)`.
pub fn visible_expectation(
    obs: &ComplexMatrix,
    rho: &ComplexMatrix,
    dims: BipartiteDims,
) -> Result<f64> {
    if obs.dim() != dims.d_v() {
        return Err(Error::DimensionMismatch {
            expected: dims.d_v(),
            found: obs.dim(),
        });
    }
    let marginal = partial_trace_hidden(rho, dims)?;
    Ok((obs * &marginal).trace().re)
}

/// Trace distance between the visible marginal and `I / D_v`.
pub fn mixedness_distance(rho: &ComplexMatrix, dims: BipartiteDims) -> Result<f64> {
    let marginal = partial_trace_hidden(rho, dims)?;
    trace_distance(&marginal, &ComplexMatrix::maximally_mixed(dims.d_v()))
}

/// [`mixedness_distance`] of `|psi><psi|`.
pub fn mixedness_distance_pure(psi: &[Complex64], dims: BipartiteDims) -> Result<f64> {
    let marginal = reduced_density(psi, dims)?;
    trace_distance(&marginal, &ComplexMatrix::maximally_mixed(dims.d_v()))
}

/// `|S(Tr_h rho) - ln D_v|` in nats.
pub fn volume_law_gap(rho: &ComplexMatrix, dims: BipartiteDims) -> Result<f64> {
    let s = von_neumann_entropy(&partial_trace_hidden(rho, dims)?)?;
    Ok((s - (dims.d_v() as f64).ln()).abs())
}

pub fn volume_law_gap_pure(psi: &[Complex64], dims: BipartiteDims) -> Result<f64> {
    let s = von_neumann_entropy(&reduced_density(psi, dims)?)?;
    Ok((s - (dims.d_v() as f64).ln()).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::Pauli;
    use crate::linalg::kron;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_parameters_give_all_zeros_state() {
        let dims = BipartiteDims::new(1, 2).unwrap();
        let n = enumerate_two_local_terms(3).len();
        let psi = UnitaryAnsatz::two_local(dims, vec![0.0; n])
            .unwrap()
            .state();
        assert_eq!(psi[0], c(1.0, 0.0));
        assert!(psi[1..].iter().all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn x_rotation_by_half_pi() {
        let dims = BipartiteDims::new(1, 0).unwrap();
        let ansatz = UnitaryAnsatz::with_terms(
            dims,
            vec![PauliString::from_ops(&[Pauli::X])],
            vec![std::f64::consts::FRAC_PI_2],
        )
        .unwrap();
        let psi = unitary_qnn_state(&ansatz);
        assert!(psi[0].norm() < 1e-15);
        assert!((psi[1] - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn parameter_length_mismatch() {
        let dims = BipartiteDims::new(1, 1).unwrap();
        assert!(matches!(
            UnitaryAnsatz::two_local(dims, vec![0.0; 3]),
            Err(Error::DimensionMismatch {
                expected: 15,
                found: 3
            })
        ));
    }

    #[test]
    fn thermal_state_examples() {
        let t = thermal_state(&ComplexMatrix::zeros(4)).unwrap();
        assert!((&t - &ComplexMatrix::maximally_mixed(4)).max_abs() < 1e-15);
        let t = thermal_state(&ComplexMatrix::from_real_diagonal(&[0.0, 3f64.ln()])).unwrap();
        assert!((&t - &ComplexMatrix::from_real_diagonal(&[0.75, 0.25])).max_abs() < 1e-15);
    }

    #[test]
    fn thermal_state_survives_large_spectra() {
        let t = thermal_state(&ComplexMatrix::from_real_diagonal(&[-900.0, 0.0, 900.0])).unwrap();
        assert!((t[(0, 0)].re - 1.0).abs() < 1e-15);
        assert!(t.as_slice().iter().all(|z| z.re.is_finite()));
    }

    #[test]
    fn visible_expectation_examples() {
        let dims = BipartiteDims::new(1, 2).unwrap();
        let mm = ComplexMatrix::maximally_mixed(8);
        let z = ComplexMatrix::from_real_diagonal(&[1.0, -1.0]);
        assert!(
            (visible_expectation(&ComplexMatrix::identity(2), &mm, dims).unwrap() - 1.0).abs()
                < 1e-15
        );
        assert!(visible_expectation(&z, &mm, dims).unwrap().abs() < 1e-15);
        assert!(visible_expectation(&ComplexMatrix::identity(4), &mm, dims).is_err());
    }

    #[test]
    fn mixedness_examples() {
        let dims = BipartiteDims::new(1, 2).unwrap();
        assert!(
            mixedness_distance(&ComplexMatrix::maximally_mixed(8), dims)
                .unwrap()
                .abs()
                < 1e-15
        );
        let rho = kron(
            &ComplexMatrix::from_real_diagonal(&[1.0, 0.0]),
            &ComplexMatrix::from_real_diagonal(&[0.1, 0.2, 0.3, 0.4]),
        );
        assert!((mixedness_distance(&rho, dims).unwrap() - 0.5).abs() < 1e-15);
        assert!(mixedness_distance(&ComplexMatrix::identity(4), dims).is_err());
    }

    #[test]
    fn volume_law_gap_examples() {
        let dims = BipartiteDims::new(1, 1).unwrap();
        let product = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        assert!((volume_law_gap_pure(&product, dims).unwrap() - 2f64.ln()).abs() < 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)];
        assert!(volume_law_gap(&ComplexMatrix::projector(&bell), dims).unwrap() < 1e-12);
    }

    #[test]
    fn boltzmann_normalization() {
        let h = TwoLocalHamiltonian::new(1, vec![0.0, 0.0, 3.0], vec![]).unwrap();
        let m = BoltzmannModel::new(h.clone(), true).unwrap();
        assert!((m.normalization() - 3.0).abs() < 1e-14);
        let eff = m.effective_hamiltonian();
        assert!((operator_norm(&eff).unwrap() - 1.0).abs() < 1e-14);
        let raw = BoltzmannModel::new(h, false).unwrap();
        assert_eq!(raw.normalization(), 1.0);
        // perturbing J_z by 3 at normalization 3 doubles the field
        let p = m.perturbed_hamiltonian(2, 3.0).unwrap();
        assert!((p[(0, 0)].re - 2.0).abs() < 1e-14);
        assert!(m.perturbed_hamiltonian(3, 1.0).is_err());
    }
}
