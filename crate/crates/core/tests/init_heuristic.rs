mod common;

use common::{residual_sq, uniform};
use nmf_core::init::heuristic::{de_minimize, DeConfig};
use nmf_core::init::{init_pba, init_random};
use nmf_core::solvers::{nnls_solve, sed_objective};

#[test]
fn de_reaches_nnls_optimum_on_row_problems() {
    for instance in 0..10 {
        let x = uniform(8, 6, 700 + instance);
        let h = uniform(3, 6, 710 + instance);
        let ht = h.transpose();
        for i in 0..8 {
            let target = x.row(i).to_vec();
            let optimum = residual_sq(&ht, &nnls_solve(&ht, &target).unwrap(), &target);
            let mut objective = |w: &[f64]| residual_sq(&ht, w, &target);
            let cfg = DeConfig {
                upper: 10.0,
                ..DeConfig::default()
            };
            let best = de_minimize(&mut objective, 3, &cfg, instance * 8 + i as u64).unwrap();
            assert!(
                best.value <= optimum * 1.05 + 1e-12,
                "instance {instance} row {i}: {} vs {optimum}",
                best.value
            );
        }
    }
}

#[test]
fn pba_fits_the_data_better_than_random() {
    let mut wins = 0;
    for trial in 0..100 {
        let x = uniform(6, 5, 5000 + trial);
        let p = init_pba(&x, 2, &DeConfig::for_data(&x), trial).unwrap();
        let r = init_random(6, 5, 2, trial).unwrap();
        if sed_objective(&x, &p.w, &p.h).unwrap() <= sed_objective(&x, &r.w, &r.h).unwrap() {
            wins += 1;
        }
    }
    assert!(wins >= 90, "PBA won {wins}/100");
}
