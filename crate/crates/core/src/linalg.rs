//! Dense complex linear algebra.
//!
//! Matrices are stored row-major. Tensor products use visible-major ordering
//! throughout the crate: for a bipartite space with dimensions `(D_v, D_h)`
//! the full basis index of `|v>|h>` is `v * D_h + h`, so [`kron`] and
//! [`partial_trace_hidden`] agree with each other.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative Hermiticity tolerance, scaled by `max(1, max |A_ij|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Off-diagonal Frobenius threshold for the Jacobi sweeps, scaled by
/// `max(1, ||A - Tr(A)/n I||_F)`. One extra sweep runs after it is met.
pub const JACOBI_TOL: f64 = 1e-12;
/// Maximum number of cyclic Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Eigenvalues below this are treated as zero before taking logarithms.
pub const EIGEN_CLIP: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense square complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = Complex64::new(d, 0.0);
        }
        m
    }

    /// `|psi><psi|`.
    pub fn projector(psi: &[Complex64]) -> Self {
        Self::from_fn(psi.len(), |i, j| psi[i] * psi[j].conj())
    }

    /// `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self::identity(dim).scale_real(1.0 / dim as f64)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self.data[i * self.dim + j]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.data[j * self.dim + i].conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * c).collect(),
        }
    }

    /// `max_ij |A_ij - conj(A_ji)|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        dev
    }

    /// Checks Hermiticity at [`HERMITIAN_TOL`] relative to the largest entry.
    pub fn check_hermitian(&self) -> Result<()> {
        let deviation = self.hermiticity_deviation();
        if deviation > HERMITIAN_TOL * self.max_abs().max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for (o, b) in row.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Self { dim: n, data: out }
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.dim, v.len(), "apply dimension mismatch");
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `<psi| A |psi>`.
    pub fn expectation(&self, psi: &[Complex64]) -> Complex64 {
        inner(psi, &self.apply(psi))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "sub dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for row in self.data.chunks_exact(self.dim) {
            let cells: Vec<String> = row
                .iter()
                .map(|z| format!("{:+.4}{:+.4}i", z.re, z.im))
                .collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

/// `<a|b>` (conjugate-linear in the first argument).
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vector_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Visible/hidden dimension pair for an `n_v + n_h` qubit register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BipartiteDims {
    n_v: u32,
    n_h: u32,
}

impl BipartiteDims {
    pub fn new(n_v: u32, n_h: u32) -> Result<Self> {
        if n_v < 1 {
            return Err(Error::InvalidParameter(
                "at least one visible qubit is required".into(),
            ));
        }
        if n_v + n_h > 30 {
            return Err(Error::InvalidParameter(format!(
                "{} qubits cannot be represented densely",
                n_v + n_h
            )));
        }
        Ok(Self { n_v, n_h })
    }

    pub fn n_v(&self) -> u32 {
        self.n_v
    }

    pub fn n_h(&self) -> u32 {
        self.n_h
    }

    pub fn qubits(&self) -> u32 {
        self.n_v + self.n_h
    }

    pub fn d_v(&self) -> usize {
        1 << self.n_v
    }

    pub fn d_h(&self) -> usize {
        1 << self.n_h
    }

    /// Full dimension `D_v * D_h`.
    pub fn dim(&self) -> usize {
        self.d_v() * self.d_h()
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// Column `j` of `eigenvectors` is the eigenvector for `eigenvalues[j]`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, j: usize) -> Vec<Complex64> {
        self.eigenvectors.column(j)
    }

    /// `U diag(f(lambda)) U^dagger`.
    pub fn map(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let weights: Vec<Complex64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        self.recombine(&weights)
    }

    pub(crate) fn recombine(&self, weights: &[Complex64]) -> ComplexMatrix {
        let n = self.dim();
        let u = &self.eigenvectors;
        // U * diag(w), then times U^dagger
        let mut uw = u.clone();
        for i in 0..n {
            for k in 0..n {
                uw[(i, k)] *= weights[k];
            }
        }
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += uw[(i, k)] * u[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

/// Cyclic Jacobi eigen-decomposition of a Hermitian matrix.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<Spectrum> {
    h.check_hermitian()?;
    let n = h.dim();
    // work on the exactly Hermitian part
    let mut a = ComplexMatrix::from_fn(n, |i, j| 0.5 * (h[(i, j)] + h[(j, i)].conj()));
    let mut v = ComplexMatrix::identity(n);
    // scale by the traceless part so that H and H + alpha I stop at the same point
    let mean_diag = a.trace().re / n as f64;
    let spread = (a.frobenius_norm().powi(2) - n as f64 * mean_diag * mean_diag)
        .max(0.0)
        .sqrt();
    let threshold = JACOBI_TOL * spread.max(1.0);

    let off_norm = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    let mut converged = false;
    loop {
        let off = off_norm(&a);
        if off <= threshold {
            // convergence is quadratic, so one more sweep takes the residual down to roundoff
            if converged || off == 0.0 {
                break;
            }
            converged = true;
        } else if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = apq / mag;
                let theta = (aqq - app) / (2.0 * mag);
                let t = if theta.is_infinite() {
                    0.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                if t == 0.0 {
                    continue;
                }
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] on (p, q); A <- G^dagger A G
                let ph_c = phase.conj();
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * ph_c * s;
                    a[(k, q)] = akp * s + akq * ph_c * c;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * phase * s;
                    a[(q, k)] = apk * s + aqk * phase * c;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * ph_c * s;
                    v[(k, q)] = vkp * s + vkq * ph_c * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, |i, j| v[(i, order[j])]);
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// `U f(Lambda) U^dagger` for Hermitian `h`.
pub fn func_of_hermitian(h: &ComplexMatrix, f: impl Fn(f64) -> Complex64) -> Result<ComplexMatrix> {
    Ok(hermitian_eig(h)?.map(f))
}

/// Traces out the hidden factor of a `D_v * D_h` operator.
pub fn partial_trace_hidden(rho: &ComplexMatrix, dims: BipartiteDims) -> Result<ComplexMatrix> {
    if rho.dim() != dims.dim() {
        return Err(Error::DimensionMismatch {
            expected: dims.dim(),
            found: rho.dim(),
        });
    }
    let (dv, dh) = (dims.d_v(), dims.d_h());
    Ok(ComplexMatrix::from_fn(dv, |a, b| {
        (0..dh).map(|h| rho[(a * dh + h, b * dh + h)]).sum()
    }))
}

/// Visible marginal `Tr_h |psi><psi|` of a pure state, without forming the full projector.
pub fn reduced_density(psi: &[Complex64], dims: BipartiteDims) -> Result<ComplexMatrix> {
    if psi.len() != dims.dim() {
        return Err(Error::DimensionMismatch {
            expected: dims.dim(),
            found: psi.len(),
        });
    }
    let dh = dims.d_h();
    Ok(ComplexMatrix::from_fn(dims.d_v(), |a, b| {
        let ra = &psi[a * dh..(a + 1) * dh];
        let rb = &psi[b * dh..(b + 1) * dh];
        ra.iter().zip(rb).map(|(x, y)| x * y.conj()).sum()
    }))
}

/// `1/2 ||rho - sigma||_1`.
pub fn trace_distance(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let difference = (rho.trace() - sigma.trace()).norm();
    if difference > 1e-8 {
        return Err(Error::TraceMismatch { difference });
    }
    // fixed operand order so that T(a, b) and T(b, a) agree bit for bit
    let swap = rho
        .data
        .iter()
        .zip(&sigma.data)
        .map(|(a, b)| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)))
        .find(|o| o.is_ne())
        .is_some_and(|o| o.is_lt());
    let diff = if swap { sigma - rho } else { rho - sigma };
    let spec = hermitian_eig(&diff)?;
    Ok(0.5 * spec.eigenvalues.iter().map(|x| x.abs()).sum::<f64>())
}

fn check_density_spectrum(spec: &Spectrum) -> Result<()> {
    if let Some(&min) = spec.eigenvalues.first() {
        if min < -1e-8 {
            return Err(Error::NegativeEigenvalue { value: min });
        }
    }
    Ok(())
}

fn entropy_of(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&p| p > EIGEN_CLIP)
        .map(|&p| -p * p.ln())
        .sum()
}

/// Von Neumann entropy in nats.
pub fn von_neumann_entropy(rho: &ComplexMatrix) -> Result<f64> {
    let spec = hermitian_eig(rho)?;
    check_density_spectrum(&spec)?;
    Ok(entropy_of(&spec.eigenvalues).max(0.0))
}

/// `Tr(rho ln rho - rho ln sigma)` in nats.
pub fn quantum_relative_entropy(rho: &ComplexMatrix, sigma: &ComplexMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let rs = hermitian_eig(rho)?;
    check_density_spectrum(&rs)?;
    let ss = hermitian_eig(sigma)?;
    check_density_spectrum(&ss)?;

    let mut cross = 0.0;
    for (j, &mu) in ss.eigenvalues.iter().enumerate() {
        let w = ss.eigenvector(j);
        let weight = rho.expectation(&w).re;
        if mu <= EIGEN_CLIP {
            if weight > 1e-10 {
                return Err(Error::SupportViolation { weight });
            }
            continue;
        }
        cross += weight * mu.ln();
    }
    Ok(-entropy_of(&rs.eigenvalues) - cross)
}

/// Squared-overlap fidelity `<psi| rho |psi>` between a pure state and a density operator.
pub fn fidelity(psi: &[Complex64], rho: &ComplexMatrix) -> Result<f64> {
    if psi.len() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: psi.len(),
        });
    }
    let norm = vector_norm(psi);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm });
    }
    Ok(rho.expectation(psi).re)
}

/// Largest absolute eigenvalue of a Hermitian matrix.
pub fn operator_norm(h: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eig(h)?.max_abs_eigenvalue())
}

/// Swap operator on `C^d (x) C^d`: `F |a>|b> = |b>|a>`.
pub fn flip_operator(d: usize) -> ComplexMatrix {
    let mut f = ComplexMatrix::zeros(d * d);
    for a in 0..d {
        for b in 0..d {
            f[(b * d + a, a * d + b)] = ONE;
        }
    }
    f
}

/// Kronecker product `A (x) B`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim(), b.dim());
    ComplexMatrix::from_fn(da * db, |r, c| a[(r / db, c / db)] * b[(r % db, c % db)])
}

/// Householder QR of a square matrix: returns `(Q, R)` with `Q` unitary, `R` upper triangular.
pub fn qr(m: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = m.dim();
    let mut r = m.clone();
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(1) {
        let x: Vec<Complex64> = (k..n).map(|i| r[(i, k)]).collect();
        let xnorm = vector_norm(&x);
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            ONE
        };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm = vector_norm(&v);
        if vnorm == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= vnorm);
        // R <- (I - 2 v v^dagger) R on rows k..
        for j in 0..n {
            let dot: Complex64 = (k..n).map(|i| v[i - k].conj() * r[(i, j)]).sum();
            for i in k..n {
                r[(i, j)] -= 2.0 * v[i - k] * dot;
            }
        }
        // Q <- Q (I - 2 v v^dagger) on columns k..
        for i in 0..n {
            let dot: Complex64 = (k..n).map(|j| q[(i, j)] * v[j - k]).sum();
            for j in k..n {
                q[(i, j)] -= 2.0 * dot * v[j - k].conj();
            }
        }
    }
    for i in 1..n {
        for j in 0..i {
            r[(i, j)] = ZERO;
        }
    }
    (q, r)
}
