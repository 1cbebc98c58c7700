#![allow(dead_code)]

use ndi_core::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    Matrix::new(n, (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

/// Modified Gram-Schmidt on a random matrix, twice for good orthogonality.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    let mut cols: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    for _ in 0..2 {
        for j in 0..n {
            for i in 0..j {
                let d: f64 = (0..n).map(|k| cols[i][k] * cols[j][k]).sum();
                for k in 0..n {
                    cols[j][k] -= d * cols[i][k];
                }
            }
            let norm = cols[j].iter().map(|v| v * v).sum::<f64>().sqrt();
            cols[j].iter_mut().for_each(|v| *v /= norm);
        }
    }
    let mut m = Matrix::zeros(n);
    for j in 0..n {
        for i in 0..n {
            m[(i, j)] = cols[j][i];
        }
    }
    m
}

/// `Q diag(d) Q^T`.
pub fn with_eigenvalues(q: &Matrix, d: &[f64]) -> Matrix {
    q.matmul(&Matrix::from_diag(d)).unwrap().matmul(&q.transpose()).unwrap().symmetrize()
}

/// `W diag(s) V^T` with random orthogonal `W`, `V`.
pub fn with_singular_values(rng: &mut ChaCha8Rng, s: &[f64]) -> Matrix {
    let n = s.len();
    let w = random_orthogonal(rng, n);
    let v = random_orthogonal(rng, n);
    w.matmul(&Matrix::from_diag(s)).unwrap().matmul(&v.transpose()).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn rel_matrix(a: &Matrix, b: &Matrix) -> f64 {
    a.sub(b).unwrap().frobenius_norm() / b.frobenius_norm()
}
