//! NMF objectives, update engines and the iterate-until-stable driver.

mod nnls;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{NmfError, Result};
use crate::linalg::{frobenius_norm, DenseMatrix, Rank};

pub use nnls::nnls_solve;

/// Default stopping threshold on `‖WᵏHᵏ − Wᵏ⁻¹Hᵏ⁻¹‖_F`.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Added to multiplicative-update denominators.
pub const DEFAULT_EPSILON_GUARD: f64 = 1e-12;

/// Which initializer produced a pair, and with what seed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Origin {
    pub initializer: String,
    pub seed: Option<u64>,
}

impl Origin {
    pub fn new(initializer: impl Into<String>, seed: Option<u64>) -> Self {
        Self {
            initializer: initializer.into(),
            seed,
        }
    }
}

/// A candidate factorization `(W, H)` with non-negative finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    pub w: DenseMatrix,
    pub h: DenseMatrix,
    pub rank: Rank,
    pub origin: Origin,
}

impl FactorPair {
    pub fn new(w: DenseMatrix, h: DenseMatrix, origin: Origin) -> Result<Self> {
        if w.cols() != h.rows() {
            return Err(NmfError::Shape(format!(
                "W is {}x{} but H is {}x{}",
                w.rows(),
                w.cols(),
                h.rows(),
                h.cols()
            )));
        }
        for m in [&w, &h] {
            if !m.is_finite() {
                return Err(NmfError::InvalidParameter("factor has non-finite entries".into()));
            }
            if let Some((row, col)) = m.first_negative() {
                return Err(NmfError::NegativeEntry { row, col });
            }
        }
        let rank = Rank::new(w.cols())?;
        Ok(Self { w, h, rank, origin })
    }

    /// Checks that `W·H` has the shape of `x`.
    pub fn conforms_to(&self, x: &DenseMatrix) -> Result<()> {
        if self.w.rows() != x.rows() || self.h.cols() != x.cols() {
            return Err(NmfError::Shape(format!(
                "factors give a {}x{} product for a {}x{} target",
                self.w.rows(),
                self.h.cols(),
                x.rows(),
                x.cols()
            )));
        }
        Ok(())
    }

    pub fn product(&self) -> DenseMatrix {
        self.w.matmul(&self.h).expect("conforming factors")
    }

    fn with_factors(&self, w: DenseMatrix, h: DenseMatrix) -> Self {
        Self {
            w,
            h,
            rank: self.rank,
            origin: self.origin.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverKind {
    SedMu,
    KlMu,
    Anls,
}

impl SolverKind {
    pub const ALL: [SolverKind; 3] = [SolverKind::SedMu, SolverKind::KlMu, SolverKind::Anls];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::SedMu => "sed-mu",
            SolverKind::KlMu => "kl-mu",
            SolverKind::Anls => "anls",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = NmfError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| NmfError::InvalidParameter(format!("unknown solver `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub kind: SolverKind,
    pub max_iter: usize,
    pub tol: f64,
    pub epsilon_guard: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            kind: SolverKind::SedMu,
            max_iter: 500,
            tol: DEFAULT_TOL,
            epsilon_guard: DEFAULT_EPSILON_GUARD,
        }
    }
}

impl SolverConfig {
    pub fn new(kind: SolverKind, max_iter: usize) -> Self {
        Self {
            kind,
            max_iter,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(NmfError::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(NmfError::InvalidParameter("max_iter must be at least 1".into()));
        }
        if !(self.epsilon_guard > 0.0) {
            return Err(NmfError::InvalidParameter("epsilon_guard must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopReason {
    /// Successive products moved by at most `tol`.
    Tolerance,
    MaxIter,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::Tolerance => "tol",
            StopReason::MaxIter => "max_iter",
        }
    }
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    pub objective: f64,
    pub rel_error: f64,
    pub elapsed_ms: f64,
}

/// Per-iteration history of a solver run. Entry 0 is the untouched initial point.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub entries: Vec<TraceEntry>,
    pub stop_reason: StopReason,
}

impl IterationTrace {
    pub fn last(&self) -> &TraceEntry {
        self.entries.last().expect("trace always holds iteration 0")
    }
}

fn check_shapes(x: &DenseMatrix, w: &DenseMatrix, h: &DenseMatrix) -> Result<()> {
    if w.rows() != x.rows() || h.cols() != x.cols() || w.cols() != h.rows() {
        return Err(NmfError::Shape(format!(
            "target {}x{} with factors {}x{} and {}x{}",
            x.rows(),
            x.cols(),
            w.rows(),
            w.cols(),
            h.rows(),
            h.cols()
        )));
    }
    Ok(())
}

/// `½‖x − wh‖_F²`.
pub fn sed_objective(x: &DenseMatrix, w: &DenseMatrix, h: &DenseMatrix) -> Result<f64> {
    check_shapes(x, w, h)?;
    let wh = w.matmul(h)?;
    Ok(sed_from_product(x, &wh))
}

fn sed_from_product(x: &DenseMatrix, wh: &DenseMatrix) -> f64 {
    0.5 * x
        .data()
        .iter()
        .zip(wh.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
}

/// Generalized Kullback–Leibler divergence `Σ x log(x / wh) − x + wh`, with `0 log 0 = 0`.
pub fn kl_divergence(x: &DenseMatrix, w: &DenseMatrix, h: &DenseMatrix) -> Result<f64> {
    check_shapes(x, w, h)?;
    let wh = w.matmul(h)?;
    kl_from_product(x, &wh, 0.0)
}

fn kl_from_product(x: &DenseMatrix, wh: &DenseMatrix, guard: f64) -> Result<f64> {
    let cols = x.cols();
    let mut total = 0.0;
    for (pos, (&a, &b)) in x.data().iter().zip(wh.data()).enumerate() {
        let b = b + guard;
        if a > 0.0 {
            if b <= 0.0 {
                return Err(NmfError::Domain {
                    row: pos / cols,
                    col: pos % cols,
                });
            }
            total += a * (a / b).ln() - a + b;
        } else {
            total += b;
        }
    }
    Ok(total)
}

/// One Lee–Seung multiplicative step on `½‖X − WH‖²`: W first, then H with the new W.
pub fn mu_sed_step(x: &DenseMatrix, pair: &FactorPair, epsilon_guard: f64) -> Result<FactorPair> {
    check_shapes(x, &pair.w, &pair.h)?;
    let (w, h) = (&pair.w, &pair.h);

    let xht = x.matmul_t(h)?;
    let hht = h.matmul_t(h)?;
    let whht = w.matmul(&hht)?;
    let mut w_new = w.clone();
    for ((wv, num), den) in w_new.data_mut().iter_mut().zip(xht.data()).zip(whht.data()) {
        *wv *= num / (den + epsilon_guard);
    }

    let wtx = w_new.t_matmul(x)?;
    let wtw = w_new.t_matmul(&w_new)?;
    let wtwh = wtw.matmul(h)?;
    let mut h_new = h.clone();
    for ((hv, num), den) in h_new.data_mut().iter_mut().zip(wtx.data()).zip(wtwh.data()) {
        *hv *= num / (den + epsilon_guard);
    }
    Ok(pair.with_factors(w_new, h_new))
}

/// One multiplicative step on the generalized KL divergence.
///
/// W is updated, its columns are normalized to unit sum, and the matching H
/// rows absorb the column sums so `WH` is unchanged by the normalization.
/// H is then updated against the normalized W.
pub fn mu_kl_step(x: &DenseMatrix, pair: &FactorPair, epsilon_guard: f64) -> Result<FactorPair> {
    check_shapes(x, &pair.w, &pair.h)?;
    let (m, n) = x.shape();
    let r = pair.w.cols();
    let ratio = |wh: &DenseMatrix| -> DenseMatrix {
        DenseMatrix::from_fn(m, n, |i, j| {
            let xv = x[(i, j)];
            if xv == 0.0 {
                0.0
            } else {
                xv / (wh[(i, j)] + epsilon_guard)
            }
        })
    };

    let wh = pair.w.matmul(&pair.h)?;
    let q = ratio(&wh);
    let qht = q.matmul_t(&pair.h)?;
    let h_row_sums: Vec<f64> = (0..r).map(|a| pair.h.row(a).iter().sum()).collect();
    let mut w_new = pair.w.clone();
    for i in 0..m {
        for a in 0..r {
            w_new[(i, a)] *= qht[(i, a)] / (h_row_sums[a] + epsilon_guard);
        }
    }

    let mut h_scaled = pair.h.clone();
    for a in 0..r {
        let s: f64 = (0..m).map(|i| w_new[(i, a)]).sum();
        if s > 0.0 {
            for i in 0..m {
                w_new[(i, a)] /= s;
            }
            h_scaled.row_mut(a).iter_mut().for_each(|v| *v *= s);
        }
    }

    let wh = w_new.matmul(&h_scaled)?;
    let q = ratio(&wh);
    let wtq = w_new.t_matmul(&q)?;
    let w_col_sums: Vec<f64> = (0..r).map(|a| (0..m).map(|i| w_new[(i, a)]).sum()).collect();
    let mut h_new = h_scaled;
    for a in 0..r {
        for j in 0..n {
            h_new[(a, j)] *= wtq[(a, j)] / (w_col_sums[a] + epsilon_guard);
        }
    }
    Ok(pair.with_factors(w_new, h_new))
}

/// One alternating non-negative least-squares sweep: every row of W is solved
/// exactly against the current H, then every column of H against the new W.
pub fn anls_step(x: &DenseMatrix, pair: &FactorPair) -> Result<FactorPair> {
    check_shapes(x, &pair.w, &pair.h)?;
    let (m, n) = x.shape();
    let r = pair.w.cols();

    let ht = pair.h.transpose();
    let mut w_new = DenseMatrix::zeros(m, r);
    for i in 0..m {
        let row = nnls_solve(&ht, x.row(i))?;
        w_new.row_mut(i).copy_from_slice(&row);
    }

    let mut h_new = DenseMatrix::zeros(r, n);
    for j in 0..n {
        let col = nnls_solve(&w_new, &x.column(j))?;
        h_new.set_column(j, &col);
    }
    Ok(pair.with_factors(w_new, h_new))
}

/// Objective the configured solver descends.
fn objective_of(kind: SolverKind, x: &DenseMatrix, wh: &DenseMatrix, guard: f64) -> Result<f64> {
    match kind {
        SolverKind::SedMu | SolverKind::Anls => Ok(sed_from_product(x, wh)),
        SolverKind::KlMu => kl_from_product(x, wh, guard),
    }
}

/// Runs the configured update until successive products differ by at most
/// `cfg.tol` in Frobenius norm or `cfg.max_iter` steps have been taken.
///
/// The trace starts with the untouched initial pair at iteration 0. Products
/// are materialized each step, so the stopping test costs `O(m·n·r)`. The KL
/// objective in the trace is evaluated with `epsilon_guard` added to `WH`.
pub fn run_nmf(
    x: &DenseMatrix,
    init: &FactorPair,
    cfg: &SolverConfig,
) -> Result<(FactorPair, IterationTrace)> {
    cfg.validate()?;
    init.conforms_to(x)?;
    let x_norm = frobenius_norm(x);
    if x_norm == 0.0 {
        return Err(NmfError::ZeroMatrix);
    }
    let start = Instant::now();
    let mut pair = init.clone();
    let mut prev = pair.product();
    let mut entries = vec![TraceEntry {
        iteration: 0,
        objective: objective_of(cfg.kind, x, &prev, cfg.epsilon_guard)?,
        rel_error: frobenius_norm(&x.sub(&prev)?) / x_norm,
        elapsed_ms: 0.0,
    }];
    let mut stop_reason = StopReason::MaxIter;

    for iteration in 1..=cfg.max_iter {
        pair = match cfg.kind {
            SolverKind::SedMu => mu_sed_step(x, &pair, cfg.epsilon_guard)?,
            SolverKind::KlMu => mu_kl_step(x, &pair, cfg.epsilon_guard)?,
            SolverKind::Anls => anls_step(x, &pair)?,
        };
        let cur = pair.product();
        let change = frobenius_norm(&cur.sub(&prev)?);
        entries.push(TraceEntry {
            iteration,
            objective: objective_of(cfg.kind, x, &cur, cfg.epsilon_guard)?,
            rel_error: frobenius_norm(&x.sub(&cur)?) / x_norm,
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        });
        if change <= cfg.tol {
            stop_reason = StopReason::Tolerance;
            break;
        }
        prev = cur;
    }
    Ok((pair, IterationTrace { entries, stop_reason }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn m(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    fn pair(w: DenseMatrix, h: DenseMatrix) -> FactorPair {
        FactorPair::new(w, h, Origin::new("test", None)).unwrap()
    }

    fn uniform(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |_, _| 1.0 - rng.random::<f64>())
    }

    #[test]
    fn factor_pair_rejects_negative_and_mismatched() {
        let w = m(&[&[1.0, -1.0]]);
        let h = m(&[&[1.0], &[1.0]]);
        assert!(matches!(
            FactorPair::new(w, h, Origin::new("t", None)),
            Err(NmfError::NegativeEntry { row: 0, col: 1 })
        ));
        let w = m(&[&[1.0, 1.0]]);
        let h = m(&[&[1.0]]);
        assert!(matches!(
            FactorPair::new(w, h, Origin::new("t", None)),
            Err(NmfError::Shape(_))
        ));
    }

    #[test]
    fn sed_examples() {
        let one = m(&[&[1.0]]);
        assert_eq!(sed_objective(&m(&[&[2.0]]), &one, &one).unwrap(), 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = uniform(5, 2, &mut rng);
        let h = uniform(2, 4, &mut rng);
        let x = w.matmul(&h).unwrap();
        assert_eq!(sed_objective(&x, &w, &h).unwrap(), 0.0);

        let x = uniform(5, 4, &mut rng);
        let mut oracle = 0.0;
        for i in 0..5 {
            for j in 0..4 {
                let wh: f64 = (0..2).map(|k| w[(i, k)] * h[(k, j)]).sum();
                oracle += (x[(i, j)] - wh).powi(2);
            }
        }
        assert!((sed_objective(&x, &w, &h).unwrap() - 0.5 * oracle).abs() < 1e-12);
    }

    #[test]
    fn kl_examples() {
        let one = m(&[&[1.0]]);
        assert_eq!(kl_divergence(&m(&[&[0.0]]), &one, &one).unwrap(), 1.0);
        let got = kl_divergence(&m(&[&[2.0]]), &one, &one).unwrap();
        assert!((got - (2.0 * 2f64.ln() - 1.0)).abs() < 1e-15);
        assert!((got - 0.386294).abs() < 1e-6);
        let w = m(&[&[1.0, 2.0], &[0.5, 1.0]]);
        let h = m(&[&[1.0, 3.0], &[2.0, 1.0]]);
        let x = w.matmul(&h).unwrap();
        assert!(kl_divergence(&x, &w, &h).unwrap().abs() < 1e-15);
        let zero = m(&[&[0.0]]);
        assert_eq!(
            kl_divergence(&one, &zero, &one),
            Err(NmfError::Domain { row: 0, col: 0 })
        );
    }

    #[test]
    fn mu_sed_one_by_one() {
        let p = pair(m(&[&[1.0]]), m(&[&[1.0]]));
        let x = m(&[&[4.0]]);
        let next = mu_sed_step(&x, &p, DEFAULT_EPSILON_GUARD).unwrap();
        assert!((next.w[(0, 0)] - 4.0).abs() < 1e-10);
        assert!((next.h[(0, 0)] - 1.0).abs() < 1e-10);
        assert!((next.product()[(0, 0)] - 4.0).abs() < 1e-10);
    }

    #[test]
    fn mu_sed_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = pair(uniform(6, 2, &mut rng), uniform(2, 5, &mut rng));
        let x = p.product();
        let next = mu_sed_step(&x, &p, DEFAULT_EPSILON_GUARD).unwrap();
        for (a, b) in next.w.data().iter().zip(p.w.data()) {
            assert!((a - b).abs() <= 1e-12);
        }
        for (a, b) in next.h.data().iter().zip(p.h.data()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn mu_sed_monotone_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = uniform(6, 5, &mut rng);
        let mut p = pair(uniform(6, 2, &mut rng), uniform(2, 5, &mut rng));
        let mut prev = sed_objective(&x, &p.w, &p.h).unwrap();
        for _ in 0..200 {
            p = mu_sed_step(&x, &p, DEFAULT_EPSILON_GUARD).unwrap();
            let cur = sed_objective(&x, &p.w, &p.h).unwrap();
            assert!(cur <= prev * (1.0 + 1e-10));
            assert!(p.w.is_nonnegative() && p.h.is_nonnegative());
            prev = cur;
        }
    }

    #[test]
    fn mu_kl_normalizes_and_descends() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = uniform(5, 4, &mut rng);
        let mut p = pair(uniform(5, 2, &mut rng), uniform(2, 4, &mut rng));
        let mut prev = kl_divergence(&x, &p.w, &p.h).unwrap();
        for _ in 0..200 {
            p = mu_kl_step(&x, &p, DEFAULT_EPSILON_GUARD).unwrap();
            for a in 0..2 {
                let s: f64 = p.w.column(a).iter().sum();
                assert!((s - 1.0).abs() <= 1e-12);
            }
            let cur = kl_divergence(&x, &p.w, &p.h).unwrap();
            assert!(cur <= prev + 1e-8 * prev.abs().max(1e-300));
            prev = cur;
        }
    }

    #[test]
    fn mu_kl_fixed_point() {
        let w = m(&[&[0.25, 0.5], &[0.75, 0.5]]);
        let h = m(&[&[2.0, 1.0, 3.0], &[1.0, 4.0, 2.0]]);
        let p = pair(w, h);
        let x = p.product();
        let before = kl_divergence(&x, &p.w, &p.h).unwrap();
        let next = mu_kl_step(&x, &p, DEFAULT_EPSILON_GUARD).unwrap();
        let after = kl_divergence(&x, &next.w, &next.h).unwrap();
        assert!((after - before).abs() <= 1e-10);
    }

    #[test]
    fn anls_one_by_one_closed_form() {
        let x = m(&[&[4.0]]);
        let h = m(&[&[2.0]]);
        let ht = h.transpose();
        let w = nnls_solve(&ht, x.row(0)).unwrap();
        assert!((w[0] - 2.0).abs() < 1e-15);

        let p = pair(m(&[&[1.0]]), h);
        let next = anls_step(&x, &p).unwrap();
        assert!((next.w[(0, 0)] - 2.0).abs() < 1e-12);
        assert!(sed_objective(&x, &next.w, &next.h).unwrap() < 1e-20);
    }

    #[test]
    fn anls_exact_data_stays_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = pair(uniform(5, 2, &mut rng), uniform(2, 4, &mut rng));
        let x = p.product();
        let next = anls_step(&x, &p).unwrap();
        assert!(sed_objective(&x, &next.w, &next.h).unwrap() < 1e-20);
    }

    #[test]
    fn run_stops_immediately_on_exact_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p = pair(uniform(4, 2, &mut rng), uniform(2, 3, &mut rng));
        let x = p.product();
        let (_, trace) = run_nmf(&x, &p, &SolverConfig::default()).unwrap();
        assert_eq!(trace.entries.len(), 2);
        assert_eq!(trace.stop_reason, StopReason::Tolerance);
        assert_eq!(trace.entries[0].iteration, 0);
        assert_eq!(trace.entries[0].rel_error, 0.0);
    }

    #[test]
    fn run_records_max_iter_and_initial_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = uniform(6, 5, &mut rng);
        let p = pair(uniform(6, 2, &mut rng), uniform(2, 5, &mut rng));
        let cfg = SolverConfig::new(SolverKind::SedMu, 5);
        let (_, trace) = run_nmf(&x, &p, &cfg).unwrap();
        assert_eq!(trace.entries.len(), 6);
        assert_eq!(trace.stop_reason, StopReason::MaxIter);
        assert_eq!(
            trace.entries[0].objective,
            sed_objective(&x, &p.w, &p.h).unwrap()
        );
        assert!(trace
            .entries
            .windows(2)
            .all(|e| e[1].iteration == e[0].iteration + 1));
    }

    #[test]
    fn config_validation() {
        assert_eq!(SolverConfig::default().tol, 1e-10);
        let mut cfg = SolverConfig::default();
        cfg.tol = 0.0;
        assert!(cfg.validate().is_err());
        cfg = SolverConfig::new(SolverKind::Anls, 0);
        assert!(cfg.validate().is_err());
        assert_eq!("kl-mu".parse::<SolverKind>().unwrap(), SolverKind::KlMu);
        assert!("gd".parse::<SolverKind>().is_err());
    }
}
