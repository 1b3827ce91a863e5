//! Random ensembles: Haar unitaries and states, GUE Hamiltonians and the
//! random two-local Hamiltonian, all driven by reproducible seeded streams.

mod pauli;

pub use pauli::{
    assemble_hamiltonian, enumerate_two_local_terms, sample_two_local, two_local_term_count, Pauli,
    PauliString, TwoLocalHamiltonian,
};

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{qr, vector_norm, BipartiteDims, ComplexMatrix};

/// SplitMix64 output function.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of stream `stream` split off `base_seed`.
pub fn derive_seed(base_seed: u64, stream: u64) -> u64 {
    splitmix64(base_seed ^ splitmix64(stream))
}

/// ChaCha8 generator keyed by a derived 64-bit seed.
///
/// Two generators built from the same `(base_seed, stream)` produce identical
/// sequences, independent of which thread consumes them.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(base_seed: u64, stream: u64) -> Self {
        Self::from_seed(derive_seed(base_seed, stream))
    }

    /// Rebuilds a stream from its derived seed (the value recorded per instance).
    pub fn from_seed(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Complex standard normal: real and imaginary parts each N(0, 1/2).
    pub fn complex_normal(&mut self) -> Complex64 {
        let re: f64 = self.sample(StandardNormal);
        let im: f64 = self.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Distribution of Hamiltonian coefficients or circuit parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoeffDistribution {
    Normal {
        mean: f64,
        variance: f64,
    },
    /// Half-open interval `[lo, hi)`.
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// Point mass; the zero-width limit of both families above.
    Constant {
        value: f64,
    },
}

impl CoeffDistribution {
    pub fn normal(mean: f64, variance: f64) -> Self {
        Self::Normal { mean, variance }
    }

    pub fn uniform(lo: f64, hi: f64) -> Self {
        Self::Uniform { lo, hi }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Normal { mean, variance } => {
                if !mean.is_finite() || !(variance.is_finite() && variance > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "normal distribution needs finite mean and variance > 0 (got mean {mean}, variance {variance})"
                    )));
                }
            }
            Self::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::InvalidParameter(format!(
                        "uniform distribution needs lo < hi (got [{lo}, {hi}))"
                    )));
                }
            }
            Self::Constant { value } => {
                if !value.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "constant distribution needs a finite value (got {value})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Draws `count` independent values.
    pub fn sample_n<R: Rng + ?Sized>(&self, count: usize, rng: &mut R) -> Result<Vec<f64>> {
        self.validate()?;
        Ok(match *self {
            Self::Normal { mean, variance } => {
                let d = Normal::new(mean, variance.sqrt())
                    .map_err(|e| Error::InvalidParameter(e.to_string()))?;
                (0..count).map(|_| d.sample(rng)).collect()
            }
            Self::Uniform { lo, hi } => {
                let d = Uniform::new(lo, hi).map_err(|e| Error::InvalidParameter(e.to_string()))?;
                (0..count).map(|_| d.sample(rng)).collect()
            }
            Self::Constant { value } => vec![value; count],
        })
    }
}

/// Haar-random unitary from the QR decomposition of a complex Ginibre matrix.
pub fn haar_unitary(dim: usize, rng: &mut SeededRng) -> ComplexMatrix {
    let ginibre = ComplexMatrix::from_fn(dim, |_, _| rng.complex_normal());
    let (q, r) = qr(&ginibre);
    // Q diag(r_jj / |r_jj|) makes the factorization unique and the law of Q Haar
    let phases: Vec<Complex64> = (0..dim)
        .map(|j| {
            let d = r[(j, j)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                Complex64::new(1.0, 0.0)
            }
        })
        .collect();
    ComplexMatrix::from_fn(dim, |i, j| q[(i, j)] * phases[j])
}

/// Haar-random pure state on the full `D_v * D_h` space.
pub fn haar_state(dims: BipartiteDims, rng: &mut SeededRng) -> Vec<Complex64> {
    haar_vector(dims.dim(), rng)
}

pub fn haar_vector(dim: usize, rng: &mut SeededRng) -> Vec<Complex64> {
    loop {
        let mut v: Vec<Complex64> = (0..dim).map(|_| rng.complex_normal()).collect();
        let norm = vector_norm(&v);
        if norm > 0.0 {
            v.iter_mut().for_each(|z| *z /= norm);
            return v;
        }
    }
}

/// GUE sample `H = (A + A^dagger) / 2` with `A` complex standard normal.
///
/// Diagonal entries are N(0, 1/2); off-diagonal entries have `E|H_ij|^2 = 1/2`,
/// so `E Tr(H^2) = D^2 / 2`.
pub fn gue_hamiltonian(dim: usize, rng: &mut SeededRng) -> ComplexMatrix {
    let a = ComplexMatrix::from_fn(dim, |_, _| rng.complex_normal());
    let mut h = ComplexMatrix::from_fn(dim, |i, j| 0.5 * (a[(i, j)] + a[(j, i)].conj()));
    for i in 0..dim {
        h[(i, i)].im = 0.0;
    }
    h
}
