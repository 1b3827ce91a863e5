#![allow(dead_code)]

use plateaulab_core::ensembles::{gue_hamiltonian, SeededRng};
use plateaulab_core::{Complex64, ComplexMatrix};

pub fn rng(stream: u64) -> SeededRng {
    SeededRng::new(0x5eed_7e57, stream)
}

pub fn random_hermitian(dim: usize, rng: &mut SeededRng) -> ComplexMatrix {
    gue_hamiltonian(dim, rng)
}

/// `G G^dagger / Tr(G G^dagger)` for complex Ginibre `G`: full-rank random density.
pub fn random_density(dim: usize, rng: &mut SeededRng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, |_, _| rng.complex_normal());
    let p = &g * &g.adjoint();
    let tr = p.trace().re;
    p.scale_real(1.0 / tr)
}

pub fn random_matrix(dim: usize, rng: &mut SeededRng) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, |_, _| rng.complex_normal())
}

pub fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).max_abs()
}

pub fn vec_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Mean and standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}
