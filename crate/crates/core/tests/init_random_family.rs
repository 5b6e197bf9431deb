mod common;

use common::sparse_columns;
use nmf_core::init::random::{cooccurrence_ranking, gabor_kernel};
use nmf_core::init::{init_cooccurrence, init_random_acol, init_random_c, GaborBank};
use nmf_core::DenseMatrix;

fn column_nnz(a: &DenseMatrix, j: usize) -> usize {
    (0..a.rows()).filter(|&i| a[(i, j)] != 0.0).count()
}

#[test]
fn acol_on_sparse_data_stays_sparse() {
    // 10% density per column; averaging q=3 columns touches at most 30% of rows.
    let x = sparse_columns(50, 40, 5, 1);
    for seed in 0..20 {
        let p = init_random_acol(&x, 6, 3, seed).unwrap();
        let max_col = (0..x.cols()).map(|j| column_nnz(&x, j)).max().unwrap();
        let total: usize = (0..6).map(|k| column_nnz(&p.w, k)).sum();
        for k in 0..6 {
            assert!(column_nnz(&p.w, k) as f64 <= 0.30 * 50.0);
        }
        assert!(total <= 3 * max_col * 6);
    }
}

#[test]
fn random_c_draws_only_from_the_longest_columns() {
    let mut x = sparse_columns(8, 10, 3, 2);
    for i in 0..8 {
        x[(i, 7)] = 50.0;
    }
    let p = init_random_c(&x, 3, 1, 1, 9).unwrap();
    for k in 0..3 {
        assert_eq!(p.w.column(k), x.column(7));
    }
}

#[test]
fn cooccurrence_ranking_matches_nnz_oracle() {
    let x = DenseMatrix::from_rows(&[
        [1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0],
        [0.0, 3.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        [1.0, 0.0, 0.0, 4.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0],
        [0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0, 1.0],
    ])
    .unwrap();
    let m = x.rows();
    let mut c = vec![vec![0.0; m]; m];
    for i in 0..m {
        for k in 0..m {
            for j in 0..x.cols() {
                c[i][k] += x[(i, j)] * x[(k, j)];
            }
        }
    }
    let nnz: Vec<usize> = (0..m).map(|k| (0..m).filter(|&i| c[i][k] != 0.0).count()).collect();
    let norm: Vec<f64> = (0..m).map(|k| (0..m).map(|i| c[i][k] * c[i][k]).sum::<f64>().sqrt()).collect();
    let mut oracle: Vec<usize> = (0..m).collect();
    oracle.sort_by(|&a, &b| nnz[b].cmp(&nnz[a]).then(norm[b].total_cmp(&norm[a])).then(a.cmp(&b)));

    let cm = x.matmul_t(&x).unwrap();
    assert_eq!(cooccurrence_ranking(&cm), oracle);
    assert_eq!(*oracle.last().unwrap(), 3);

    let p = init_cooccurrence(&x, 2, 4).unwrap();
    let pool = [oracle[0], oracle[1], oracle[2], oracle[3]];
    for k in 0..2 {
        assert!(pool.iter().any(|&j| cm.column(j) == p.w.column(k)));
    }
}

#[test]
fn gabor_kernel_has_no_dc_component() {
    let bank = GaborBank {
        window: 65,
        ..GaborBank::default()
    };
    for mu in 0..bank.orientations {
        let k = gabor_kernel(&bank, mu, 0).unwrap();
        let sum = k.values.iter().fold((0.0, 0.0), |acc, z| (acc.0 + z.re, acc.1 + z.im));
        assert!(sum.0.abs() < 1e-6 && sum.1.abs() < 1e-6, "mu {mu}: {sum:?}");
    }
}
