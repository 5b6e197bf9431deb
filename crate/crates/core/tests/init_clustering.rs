mod common;

use common::{singular_values, uniform};
use nmf_core::init::clustering::{cro_cluster, fcm, kmeans};
use nmf_core::init::{init_cro, init_fcm, init_random};
use nmf_core::linalg::{frobenius_norm, relative_error};
use nmf_core::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn blobs(m: usize, per: usize, k: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centres: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..m).map(|_| 1.0 + 9.0 * rng.random::<f64>()).collect())
        .collect();
    let mut x = DenseMatrix::zeros(m, per * k);
    for c in 0..k {
        for p in 0..per {
            for i in 0..m {
                x[(i, c * per + p)] = centres[c][i] + 0.1 * rng.random::<f64>();
            }
        }
    }
    x
}

#[test]
fn kmeans_objective_never_increases() {
    for seed in 0..50 {
        let x = uniform(5, 30, 100 + seed);
        let c = kmeans(&x, 4, seed, 100).unwrap();
        for w in c.history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "seed {seed}: {:?}", c.history);
        }
        assert_eq!(*c.history.last().unwrap(), c.objective);
    }
}

#[test]
fn fcm_memberships_sum_to_one() {
    for seed in 0..20 {
        let x = uniform(4, 25, seed);
        let (_, membership) = fcm(&x, 3, 2.0, seed, 200, 1e-9).unwrap();
        for j in 0..25 {
            let col = membership.u.column(j);
            assert!(col.iter().all(|&v| (0.0..=1.0).contains(&v)));
            assert!((col.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        }
    }
}

#[test]
fn fcm_beats_random_on_separable_blobs() {
    let mut wins = 0;
    for trial in 0..100 {
        let x = blobs(6, 10, 3, trial);
        let f = init_fcm(&x, 3, trial).unwrap();
        let r = init_random(6, 30, 3, trial).unwrap();
        if relative_error(&x, &f.w, &f.h).unwrap() < relative_error(&x, &r.w, &r.h).unwrap() {
            wins += 1;
        }
    }
    assert!(wins >= 80, "FCM won {wins}/100");
}

fn cro_oracle(x: &DenseMatrix, rows: &[usize]) -> f64 {
    let block = x.select_rows(rows);
    let s = singular_values(&block);
    let total: f64 = s.iter().map(|v| v * v).sum();
    if total == 0.0 {
        1.0
    } else {
        s[0] * s[0] / total
    }
}

#[test]
fn cro_merge_order_matches_exhaustive_search() {
    let x = DenseMatrix::from_rows(&[
        [1.0, 2.0, 0.5, 3.0],
        [2.1, 4.0, 1.0, 6.2],
        [0.2, 0.1, 5.0, 0.3],
        [0.4, 0.3, 9.0, 0.5],
        [3.0, 0.2, 1.0, 0.1],
    ])
    .unwrap();
    let dendrogram = cro_cluster(&x, 1).unwrap();
    let mut clusters: Vec<Vec<usize>> = (0..5).map(|i| vec![i]).collect();
    for merge in &dendrogram.merges {
        let mut best = (0, 1, f64::NEG_INFINITY);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let rows: Vec<usize> = clusters[a].iter().chain(&clusters[b]).copied().collect();
                let v = cro_oracle(&x, &rows);
                if v > best.2 + 1e-12 {
                    best = (a, b, v);
                }
            }
        }
        let (a, b, v) = best;
        assert_eq!((merge.a, merge.b), (clusters[a][0], clusters[b][0]));
        assert!((merge.cro - v).abs() < 1e-8);
        let absorbed = clusters.remove(b);
        clusters[a].extend(absorbed);
        clusters[a].sort_unstable();
    }
    assert_eq!(dendrogram.merges.len(), 4);
}

#[test]
fn cro_residual_is_the_discarded_cluster_energy() {
    let x = DenseMatrix::from_rows(&[
        [1.0, 2.0, 0.5, 3.0, 1.0],
        [2.0, 4.1, 1.0, 6.0, 2.2],
        [0.2, 0.1, 5.0, 0.3, 4.0],
        [0.4, 0.3, 9.5, 0.5, 8.0],
        [3.0, 0.2, 1.0, 0.1, 0.7],
        [6.1, 0.5, 2.0, 0.3, 1.5],
    ])
    .unwrap();
    let p = init_cro(&x, 3).unwrap();
    let clusters = cro_cluster(&x, 3).unwrap().clusters;
    let discarded: f64 = clusters
        .iter()
        .map(|rows| singular_values(&x.select_rows(rows))[1..].iter().map(|s| s * s).sum::<f64>())
        .sum();
    let resid = frobenius_norm(&x.sub(&p.product()).unwrap());
    assert!((resid - discarded.sqrt()).abs() < 1e-8, "{resid} vs {}", discarded.sqrt());
    // Disjoint row supports in W.
    for i in 0..6 {
        assert!((0..3).filter(|&c| p.w[(i, c)] != 0.0).count() <= 1);
    }
}
