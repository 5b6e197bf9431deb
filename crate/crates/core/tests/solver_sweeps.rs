mod common;

use common::{nnls_bruteforce, planted, residual_sq, uniform};
use nmf_core::init::init_random;
use nmf_core::linalg::relative_error;
use nmf_core::solvers::{
    anls_step, kl_divergence, mu_kl_step, mu_sed_step, nnls_solve, run_nmf, sed_objective,
    DEFAULT_EPSILON_GUARD,
};
use nmf_core::{SolverConfig, SolverKind, StopReason};

#[test]
fn nnls_matches_active_set_enumeration() {
    for seed in 0..50 {
        let a = common::signed(6, 3, seed);
        let b = common::signed(6, 1, 500 + seed).column(0);
        let y = nnls_solve(&a, &b).unwrap();
        assert!(y.iter().all(|&v| v >= 0.0));
        let got = residual_sq(&a, &y, &b);
        let best = nnls_bruteforce(&a, &b);
        assert!((got - best).abs() <= 1e-8, "seed {seed}: {got} vs {best}");
    }
}

#[test]
fn nnls_matches_enumeration_on_wider_systems() {
    for seed in 0..20 {
        let a = common::signed(9, 6, 70 + seed);
        let b = common::signed(9, 1, 900 + seed).column(0);
        let y = nnls_solve(&a, &b).unwrap();
        let got = residual_sq(&a, &y, &b);
        assert!((got - nnls_bruteforce(&a, &b)).abs() <= 1e-8);
    }
}

#[test]
fn sed_mu_descends_for_200_steps() {
    let x = uniform(6, 5, 11);
    let mut pair = init_random(6, 5, 2, 12).unwrap();
    let mut prev = sed_objective(&x, &pair.w, &pair.h).unwrap();
    for _ in 0..200 {
        pair = mu_sed_step(&x, &pair, DEFAULT_EPSILON_GUARD).unwrap();
        let cur = sed_objective(&x, &pair.w, &pair.h).unwrap();
        assert!(cur <= prev * (1.0 + 1e-10));
        prev = cur;
    }
}

#[test]
fn kl_mu_descends_for_200_steps() {
    let x = uniform(5, 4, 13);
    let mut pair = init_random(5, 4, 2, 14).unwrap();
    let mut prev = kl_divergence(&x, &pair.w, &pair.h).unwrap();
    for _ in 0..200 {
        pair = mu_kl_step(&x, &pair, DEFAULT_EPSILON_GUARD).unwrap();
        let cur = kl_divergence(&x, &pair.w, &pair.h).unwrap();
        assert!(cur <= prev + 1e-8 * prev.abs().max(1.0));
        prev = cur;
    }
}

#[test]
fn anls_step_beats_mu_step_from_same_point() {
    let mut wins = 0;
    for trial in 0..100 {
        let x = uniform(5, 4, 2000 + trial);
        let pair = init_random(5, 4, 2, 3000 + trial).unwrap();
        let a = anls_step(&x, &pair).unwrap();
        let m = mu_sed_step(&x, &pair, DEFAULT_EPSILON_GUARD).unwrap();
        if sed_objective(&x, &a.w, &a.h).unwrap() <= sed_objective(&x, &m.w, &m.h).unwrap() {
            wins += 1;
        }
    }
    assert!(wins >= 90, "ANLS won {wins}/100");
}

#[test]
fn sed_mu_recovers_planted_factorization() {
    let x = planted(6, 6, 2, 77);
    let init = init_random(6, 6, 2, 78).unwrap();
    let cfg = SolverConfig::new(SolverKind::SedMu, 500);
    let (pair, trace) = run_nmf(&x, &init, &cfg).unwrap();
    let err = relative_error(&x, &pair.w, &pair.h).unwrap();
    assert!(err < 1e-3, "relative error {err}");
    assert!((trace.last().rel_error - err).abs() < 1e-12);
    assert!(trace.entries.len() <= 501);
}

#[test]
fn every_solver_keeps_iterates_nonnegative() {
    let x = uniform(8, 7, 5);
    let init = init_random(8, 7, 3, 6).unwrap();
    for kind in SolverKind::ALL {
        let (pair, trace) = run_nmf(&x, &init, &SolverConfig::new(kind, 40)).unwrap();
        assert!(pair.w.is_nonnegative() && pair.h.is_nonnegative(), "{kind:?}");
        assert_eq!(trace.entries[0].iteration, 0);
        assert!(matches!(trace.stop_reason, StopReason::MaxIter | StopReason::Tolerance));
    }
}
