//! Deterministic generation of random expressions, elements, functionals
//! and matrices for property suites and tests.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::lattice::{ComplexLatticeElem, LatticeExpr};
use crate::rng::{normal, normal_complex_vec, normal_vec};

/// Random lattice expression of depth at most `depth` with generator
/// payloads of realified length `real_dim`.
pub fn random_expr(rng: &mut ChaCha8Rng, real_dim: usize, depth: usize) -> LatticeExpr {
    if depth == 0 {
        return LatticeExpr::Gen(normal_vec(rng, real_dim));
    }
    match rng.gen_range(0..5u8) {
        0 => LatticeExpr::Gen(normal_vec(rng, real_dim)),
        1 => LatticeExpr::scale(normal(rng), random_expr(rng, real_dim, depth - 1)),
        2 => {
            let k = rng.gen_range(2..=3);
            LatticeExpr::Add((0..k).map(|_| random_expr(rng, real_dim, depth - 1)).collect())
        }
        3 => {
            let k = rng.gen_range(2..=3);
            LatticeExpr::Sup((0..k).map(|_| random_expr(rng, real_dim, depth - 1)).collect())
        }
        _ => {
            let k = rng.gen_range(2..=3);
            LatticeExpr::Inf((0..k).map(|_| random_expr(rng, real_dim, depth - 1)).collect())
        }
    }
}

/// Random complex element `f + ig` with independent part trees.
pub fn random_elem(rng: &mut ChaCha8Rng, real_dim: usize, depth: usize) -> ComplexLatticeElem {
    ComplexLatticeElem::new(random_expr(rng, real_dim, depth), random_expr(rng, real_dim, depth))
}

/// Random complex matrix with standard gaussian entries.
pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<Vec<Complex64>> {
    (0..rows).map(|_| normal_complex_vec(rng, cols)).collect()
}

/// Random complex upper-triangular matrix with a positive real diagonal.
pub fn random_triangular_positive(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<Complex64>> {
    let mut m = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        // keep the diagonal separated so eigenvectors are well-conditioned
        m[i][i] = Complex64::new(0.5 + (i as f64) + normal(rng).abs(), 0.0);
        for j in (i + 1)..n {
            m[i][j] = Complex64::new(0.5 * normal(rng), 0.5 * normal(rng));
        }
    }
    m
}

/// Random unitary matrix (QR of a gaussian matrix, via Gram-Schmidt).
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<Complex64>> {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v = normal_complex_vec(rng, n);
        for u in &cols {
            let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for k in 0..n {
                v[k] -= proj * u[k];
            }
        }
        let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for x in v.iter_mut() {
                *x /= norm;
            }
            cols.push(v);
        }
    }
    // cols are orthonormal columns; return as row-major matrix
    (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}

/// Normal matrix `U diag(λ) U*` with prescribed eigenvalues.
pub fn normal_matrix_with_spectrum(rng: &mut ChaCha8Rng, eigs: &[Complex64]) -> Vec<Vec<Complex64>> {
    let n = eigs.len();
    let u = random_unitary(rng, n);
    let mut out = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..n {
                s += u[i][k] * eigs[k] * u[j][k].conj();
            }
            out[i][j] = s;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = rng_for(1, "unitary", 0);
        let u = random_unitary(&mut rng, 4);
        for i in 0..4 {
            for j in 0..4 {
                let dot: Complex64 = (0..4).map(|k| u[k][i].conj() * u[k][j]).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - Complex64::new(expect, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn normal_matrix_keeps_trace() {
        let mut rng = rng_for(2, "normal-mat", 0);
        let eigs = vec![Complex64::new(2.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.0, -1.0)];
        let m = normal_matrix_with_spectrum(&mut rng, &eigs);
        let tr: Complex64 = (0..3).map(|i| m[i][i]).sum();
        let sum: Complex64 = eigs.iter().sum();
        assert!((tr - sum).norm() < 1e-10);
    }
}
