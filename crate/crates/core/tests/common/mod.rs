//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use nmf_core::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn uniform(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| 1.0 - rng.random::<f64>())
}

pub fn signed(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random::<f64>() * 2.0 - 1.0)
}

/// Noiseless `W* H*` with uniform factors.
pub fn planted(m: usize, n: usize, r: usize, seed: u64) -> DenseMatrix {
    let w = uniform(m, r, seed);
    let h = uniform(r, n, seed ^ 0xabcdef);
    w.matmul(&h).unwrap()
}

/// Cyclic two-sided Jacobi eigen-decomposition of a symmetric matrix.
/// Returns eigenvalues in decreasing order and matching eigenvectors (columns).
pub fn symmetric_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut a: Vec<Vec<f64>> = a.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j][j].total_cmp(&a[i][i]));
    let values = order.iter().map(|&i| a[i][i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|k| v[k][i]).collect())
        .collect();
    (values, vectors)
}

fn gram(a: &DenseMatrix) -> Vec<Vec<f64>> {
    let (m, n) = a.shape();
    let mut g = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            g[i][j] = (0..m).map(|k| a[(k, i)] * a[(k, j)]).sum();
        }
    }
    g
}

/// All singular values of `a` via the eigenvalues of the Gram matrix.
pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    let small = if a.rows() < a.cols() { a.transpose() } else { a.clone() };
    symmetric_eigen(&gram(&small))
        .0
        .into_iter()
        .map(|l| l.max(0.0).sqrt())
        .collect()
}

/// Full SVD oracle: right vectors from the Gram eigenvectors, left vectors
/// as `a v / σ` (valid for the non-degenerate leading triplets only).
pub fn svd_oracle(a: &DenseMatrix) -> (Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>) {
    let (values, vectors) = symmetric_eigen(&gram(a));
    let sigma: Vec<f64> = values.iter().map(|l| l.max(0.0).sqrt()).collect();
    let u = vectors
        .iter()
        .zip(&sigma)
        .map(|(v, s)| {
            (0..a.rows())
                .map(|i| (0..a.cols()).map(|j| a[(i, j)] * v[j]).sum::<f64>() / s)
                .collect()
        })
        .collect();
    (u, sigma, vectors)
}

/// Solves a small dense system by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

pub fn residual_sq(a: &DenseMatrix, y: &[f64], b: &[f64]) -> f64 {
    (0..a.rows())
        .map(|i| {
            let r = b[i] - (0..a.cols()).map(|j| a[(i, j)] * y[j]).sum::<f64>();
            r * r
        })
        .sum()
}

/// Best objective `‖b − a y‖²` over `y ≥ 0` by enumerating every support set,
/// solving its normal equations, and keeping the best feasible candidate.
pub fn nnls_bruteforce(a: &DenseMatrix, b: &[f64]) -> f64 {
    let n = a.cols();
    let mut best = b.iter().map(|v| v * v).sum::<f64>();
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|&j| mask & (1 << j) != 0).collect();
        let k = support.len();
        let mut ata = vec![vec![0.0; k]; k];
        let mut atb = vec![0.0; k];
        for (p, &jp) in support.iter().enumerate() {
            atb[p] = (0..a.rows()).map(|i| a[(i, jp)] * b[i]).sum();
            for (q, &jq) in support.iter().enumerate() {
                ata[p][q] = (0..a.rows()).map(|i| a[(i, jp)] * a[(i, jq)]).sum();
            }
        }
        let Some(ys) = solve(ata, atb) else { continue };
        if ys.iter().any(|&v| v < 0.0) {
            continue;
        }
        let mut y = vec![0.0; n];
        for (p, &j) in support.iter().enumerate() {
            y[j] = ys[p];
        }
        best = best.min(residual_sq(a, &y, b));
    }
    best
}

/// Non-negative matrix with exactly `per_col` nonzeros in every column.
pub fn sparse_columns(rows: usize, cols: usize, per_col: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = DenseMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in rand::seq::index::sample(&mut rng, rows, per_col) {
            x[(i, j)] = 1.0 - rng.random::<f64>();
        }
    }
    x
}

/// Mean iteration-0 relative error of ten uniform random pairs.
pub fn mean_random_error(x: &DenseMatrix, r: usize, base_seed: u64) -> f64 {
    let (m, n) = x.shape();
    (0..10)
        .map(|s| {
            let p = nmf_core::init::init_random(m, n, r, base_seed + s).unwrap();
            nmf_core::linalg::relative_error(x, &p.w, &p.h).unwrap()
        })
        .sum::<f64>()
        / 10.0
}
