use std::fmt;

use num_complex::Complex64;
use rand::Rng;

use super::CoeffDistribution;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// The three non-identity axes in `x, y, z` order.
    pub const AXES: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }
}

/// Tensor product of single-qubit Paulis, stored as X/Z bit masks.
///
/// Qubit 0 is the most significant bit of the basis index, so the first
/// `n_v` qubits are the visible ones under visible-major ordering.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: u32,
    x_mask: usize,
    z_mask: usize,
}

impl PauliString {
    pub fn identity(n: u32) -> Self {
        Self {
            n,
            x_mask: 0,
            z_mask: 0,
        }
    }

    pub fn from_ops(ops: &[Pauli]) -> Self {
        let n = ops.len() as u32;
        let mut s = Self::identity(n);
        for (q, &p) in ops.iter().enumerate() {
            s = s.with(q as u32, p);
        }
        s
    }

    /// Sets the operator on `qubit`, which must currently be identity.
    pub fn with(mut self, qubit: u32, p: Pauli) -> Self {
        assert!(
            qubit < self.n,
            "qubit {qubit} out of range for {} qubits",
            self.n
        );
        let bit = 1usize << (self.n - 1 - qubit);
        let (x, z) = p.bits();
        if x {
            self.x_mask |= bit;
        }
        if z {
            self.z_mask |= bit;
        }
        self
    }

    pub fn qubits(&self) -> u32 {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn op(&self, qubit: u32) -> Pauli {
        let bit = 1usize << (self.n - 1 - qubit);
        match (self.x_mask & bit != 0, self.z_mask & bit != 0) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// `i^{#Y}`, from `Y = i X Z`.
    fn y_phase(&self) -> Complex64 {
        match (self.x_mask & self.z_mask).count_ones() % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }

    /// Matrix element `<b xor x| P |b>`; `P|b> = i^{#Y} (-1)^{|b & z|} |b xor x>`.
    #[inline]
    fn amplitude(&self, b: usize, phase: Complex64) -> Complex64 {
        if (b & self.z_mask).count_ones() % 2 == 1 {
            -phase
        } else {
            phase
        }
    }

    /// `out = P psi`.
    pub fn apply_into(&self, psi: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(psi.len(), self.dim());
        assert_eq!(out.len(), self.dim());
        let phase = self.y_phase();
        for (b, &amp) in psi.iter().enumerate() {
            out[b ^ self.x_mask] = self.amplitude(b, phase) * amp;
        }
    }

    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        self.apply_into(psi, &mut out);
        out
    }

    /// Adds `coeff * P` into a dense matrix.
    pub fn add_to(&self, m: &mut ComplexMatrix, coeff: f64) {
        let phase = self.y_phase();
        for b in 0..self.dim() {
            m[(b ^ self.x_mask, b)] += self.amplitude(b, phase) * coeff;
        }
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim());
        self.add_to(&mut m, 1.0);
        m
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n {
            let c = match self.op(q) {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// `3n + 9 n (n - 1) / 2`.
pub fn two_local_term_count(n: u32) -> usize {
    let n = n as usize;
    3 * n + 9 * n * n.saturating_sub(1) / 2
}

/// All one- and two-qubit Pauli terms on `n` qubits in canonical order:
/// onsite `sigma_a^i` (site ascending, then axis x, y, z), followed by offsite
/// `sigma_a^i sigma_b^j` for `i < j` lexicographically, then `a`, then `b`.
pub fn enumerate_two_local_terms(n: u32) -> Vec<PauliString> {
    let mut terms = Vec::with_capacity(two_local_term_count(n));
    for i in 0..n {
        for a in Pauli::AXES {
            terms.push(PauliString::identity(n).with(i, a));
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            for a in Pauli::AXES {
                for b in Pauli::AXES {
                    terms.push(PauliString::identity(n).with(i, a).with(j, b));
                }
            }
        }
    }
    terms
}

/// Random two-local Hamiltonian with onsite couplings `J_a^i` and offsite
/// couplings `J_{a,b}^{i,j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoLocalHamiltonian {
    n: u32,
    onsite: Vec<f64>,
    offsite: Vec<f64>,
}

impl TwoLocalHamiltonian {
    pub fn new(n: u32, onsite: Vec<f64>, offsite: Vec<f64>) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidParameter(
                "two-local Hamiltonian needs n >= 1".into(),
            ));
        }
        let n_us = n as usize;
        if onsite.len() != 3 * n_us {
            return Err(Error::DimensionMismatch {
                expected: 3 * n_us,
                found: onsite.len(),
            });
        }
        let pairs = 9 * n_us * (n_us - 1) / 2;
        if offsite.len() != pairs {
            return Err(Error::DimensionMismatch {
                expected: pairs,
                found: offsite.len(),
            });
        }
        Ok(Self { n, onsite, offsite })
    }

    /// Splits a coefficient vector given in term-enumeration order.
    pub fn from_coefficients(n: u32, coeffs: &[f64]) -> Result<Self> {
        let k = 3 * n as usize;
        if coeffs.len() != two_local_term_count(n) {
            return Err(Error::DimensionMismatch {
                expected: two_local_term_count(n),
                found: coeffs.len(),
            });
        }
        Self::new(n, coeffs[..k].to_vec(), coeffs[k..].to_vec())
    }

    pub fn qubits(&self) -> u32 {
        self.n
    }

    /// `J_a^i` with axis index `a` in `0..3` for x, y, z.
    pub fn onsite(&self, site: u32, axis: usize) -> f64 {
        self.onsite[3 * site as usize + axis]
    }

    pub fn onsite_coefficients(&self) -> &[f64] {
        &self.onsite
    }

    pub fn offsite_coefficients(&self) -> &[f64] {
        &self.offsite
    }

    /// Coefficients in term-enumeration order.
    pub fn coefficients(&self) -> Vec<f64> {
        self.onsite.iter().chain(&self.offsite).copied().collect()
    }
}

/// Draws onsite then offsite couplings, in term-enumeration order.
pub fn sample_two_local<R: Rng + ?Sized>(
    n: u32,
    onsite_dist: &CoeffDistribution,
    offsite_dist: &CoeffDistribution,
    rng: &mut R,
) -> Result<TwoLocalHamiltonian> {
    if n < 1 {
        return Err(Error::InvalidParameter(
            "two-local Hamiltonian needs n >= 1".into(),
        ));
    }
    onsite_dist.validate()?;
    offsite_dist.validate()?;
    let n_us = n as usize;
    let onsite = onsite_dist.sample_n(3 * n_us, rng)?;
    let offsite = offsite_dist.sample_n(9 * n_us * (n_us - 1) / 2, rng)?;
    TwoLocalHamiltonian::new(n, onsite, offsite)
}

/// `sum_k c_k P_k` over the enumerated terms.
pub fn assemble_hamiltonian(h: &TwoLocalHamiltonian) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(1 << h.n);
    for (term, c) in enumerate_two_local_terms(h.n).iter().zip(h.coefficients()) {
        if c != 0.0 {
            term.add_to(&mut m, c);
        }
    }
    m
}
