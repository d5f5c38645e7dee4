#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reim_core::numerics::{dense_sym_eigen, DenseMatrix, SparseOperator};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Orthogonal matrix from the eigenvectors of a random symmetric matrix.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v: f64 = rng.gen_range(-1.0..1.0);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    dense_sym_eigen(&a).unwrap().vectors
}

/// `Q diag(λ) Qᵀ`, symmetrized exactly, with log-uniform `λ ∈ [lo, hi]`
/// including both endpoints.
pub fn random_spd(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> (DenseMatrix, Vec<f64>) {
    assert!(n >= 2);
    let mut lambdas: Vec<f64> = (0..n)
        .map(|_| lo * (hi / lo).powf(rng.gen_range(0.0..1.0)))
        .collect();
    lambdas[0] = lo;
    lambdas[1] = hi;
    let q = random_orthogonal(rng, n);
    let ql = DenseMatrix::from_fn(n, n, |i, j| q[(i, j)] * lambdas[j]);
    let a = ql.matmul(&q.transpose());
    let sym = DenseMatrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    (sym, lambdas)
}

pub fn to_sparse(a: &DenseMatrix) -> SparseOperator {
    SparseOperator::from_dense(a).unwrap()
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Slope of the least-squares line through `(x_i, y_i)`.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
