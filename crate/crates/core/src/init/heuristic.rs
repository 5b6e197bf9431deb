//! Population-based seeding: each row of W, then each column of H, is fitted
//! by a derivative-free box-constrained minimizer (differential evolution).

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{check_nonnegative, check_rank, derive_seed, rng_for, uniform_matrix};
use crate::error::{NmfError, Result};
use crate::linalg::{dot, DenseMatrix};
use crate::solvers::{FactorPair, Origin};

/// DE/rand/1/bin settings. The search box is `[0, upper]` in every coordinate;
/// out-of-box mutants are repaired by bounce-back toward the base vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeConfig {
    pub population: usize,
    pub weight: f64,
    pub crossover: f64,
    pub generations: usize,
    pub upper: f64,
}

impl Default for DeConfig {
    fn default() -> Self {
        Self {
            population: 20,
            weight: 0.8,
            crossover: 0.9,
            generations: 200,
            upper: 1.0,
        }
    }
}

impl DeConfig {
    /// Defaults with the box bounded by the largest data entry.
    pub fn for_data(x: &DenseMatrix) -> Self {
        Self {
            upper: x.max_value().max(f64::MIN_POSITIVE),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population < 4 {
            return Err(NmfError::InvalidParameter(format!(
                "DE population must be at least 4, got {}",
                self.population
            )));
        }
        if !(0.0..=1.0).contains(&self.crossover) {
            return Err(NmfError::InvalidParameter("DE crossover must lie in [0, 1]".into()));
        }
        if !(self.weight > 0.0) || !(self.upper > 0.0) {
            return Err(NmfError::InvalidParameter("DE weight and upper bound must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub point: Vec<f64>,
    pub value: f64,
    /// Best value after seeding and after every generation.
    pub history: Vec<f64>,
}

/// A derivative-free minimizer over a non-negative box.
pub trait PopulationMinimizer {
    fn minimize(&self, objective: &mut dyn FnMut(&[f64]) -> f64, dim: usize, seed: u64) -> Minimum;
}

/// Differential evolution state; one call to [`step`](Self::step) is one generation.
pub struct DifferentialEvolution<'a> {
    cfg: DeConfig,
    objective: &'a mut dyn FnMut(&[f64]) -> f64,
    rng: ChaCha8Rng,
    population: Vec<Vec<f64>>,
    fitness: Vec<f64>,
    dim: usize,
}

impl<'a> DifferentialEvolution<'a> {
    pub fn new(cfg: DeConfig, objective: &'a mut dyn FnMut(&[f64]) -> f64, dim: usize, seed: u64) -> Self {
        let mut rng = rng_for(seed);
        let population: Vec<Vec<f64>> = (0..cfg.population)
            .map(|_| (0..dim).map(|_| rng.random::<f64>() * cfg.upper).collect())
            .collect();
        let fitness = population.iter().map(|p| objective(p)).collect();
        Self {
            cfg,
            objective,
            rng,
            population,
            fitness,
            dim,
        }
    }

    pub fn population(&self) -> &[Vec<f64>] {
        &self.population
    }

    pub fn best(&self) -> (usize, f64) {
        self.fitness
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, &f)| if f < best.1 { (i, f) } else { best })
    }

    pub fn step(&mut self) {
        let np = self.population.len();
        for target in 0..np {
            let mut picks = [0usize; 3];
            let mut filled = 0;
            for cand in index::sample(&mut self.rng, np - 1, 3) {
                picks[filled] = if cand >= target { cand + 1 } else { cand };
                filled += 1;
            }
            let [a, b, c] = picks;
            let forced = self.rng.random_range(0..self.dim);
            let mut trial = self.population[target].clone();
            for (d, t) in trial.iter_mut().enumerate() {
                if d == forced || self.rng.random::<f64>() < self.cfg.crossover {
                    let base = self.population[a][d];
                    let mutant = base + self.cfg.weight * (self.population[b][d] - self.population[c][d]);
                    // Bounce back between the base and the violated bound; plain
                    // clamping piles the population onto the boundary.
                    *t = if mutant < 0.0 {
                        base * self.rng.random::<f64>()
                    } else if mutant > self.cfg.upper {
                        base + (self.cfg.upper - base) * self.rng.random::<f64>()
                    } else {
                        mutant
                    };
                }
            }
            let f = (self.objective)(&trial);
            if f <= self.fitness[target] {
                self.population[target] = trial;
                self.fitness[target] = f;
            }
        }
    }
}

impl PopulationMinimizer for DeConfig {
    fn minimize(&self, objective: &mut dyn FnMut(&[f64]) -> f64, dim: usize, seed: u64) -> Minimum {
        let mut de = DifferentialEvolution::new(*self, objective, dim, seed);
        let mut history = vec![de.best().1];
        for _ in 0..self.generations {
            de.step();
            history.push(de.best().1);
        }
        let (idx, value) = de.best();
        Minimum {
            point: de.population[idx].clone(),
            value,
            history,
        }
    }
}

/// Minimizes `objective` over `[0, cfg.upper]^dim` with DE/rand/1/bin.
pub fn de_minimize(
    objective: &mut dyn FnMut(&[f64]) -> f64,
    dim: usize,
    cfg: &DeConfig,
    seed: u64,
) -> Result<Minimum> {
    cfg.validate()?;
    if dim == 0 {
        return Err(NmfError::InvalidParameter("DE dimension must be at least 1".into()));
    }
    Ok(cfg.minimize(objective, dim, seed))
}

/// Population-based seeding with differential evolution.
pub fn init_pba(x: &DenseMatrix, r: usize, cfg: &DeConfig, seed: u64) -> Result<FactorPair> {
    cfg.validate()?;
    init_pba_with(x, r, cfg, seed)
}

/// H⁰ is drawn uniformly; every row of W is fitted against it, then every
/// column of H against the fitted W. Sub-problem seeds derive from
/// `(seed, row)` and `(seed, m + column)`.
pub fn init_pba_with(
    x: &DenseMatrix,
    r: usize,
    minimizer: &impl PopulationMinimizer,
    seed: u64,
) -> Result<FactorPair> {
    let (m, n) = x.shape();
    check_rank(r, m, n)?;
    check_nonnegative(x)?;
    let mut rng = rng_for(seed);
    let h0 = uniform_matrix(r, n, &mut rng);
    let h0_cols: Vec<Vec<f64>> = (0..n).map(|j| h0.column(j)).collect();

    let mut w = DenseMatrix::zeros(m, r);
    for i in 0..m {
        let target = x.row(i);
        let mut objective = |wi: &[f64]| -> f64 {
            target
                .iter()
                .zip(&h0_cols)
                .map(|(t, hc)| {
                    let d = t - dot(wi, hc);
                    d * d
                })
                .sum()
        };
        let best = minimizer.minimize(&mut objective, r, derive_seed(seed, i as u64));
        w.row_mut(i).copy_from_slice(&best.point);
    }

    let mut h = DenseMatrix::zeros(r, n);
    for j in 0..n {
        let target = x.column(j);
        let mut objective = |hj: &[f64]| -> f64 {
            target
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    let d = t - dot(w.row(i), hj);
                    d * d
                })
                .sum()
        };
        let best = minimizer.minimize(&mut objective, r, derive_seed(seed, (m + j) as u64));
        h.set_column(j, &best.point);
    }
    FactorPair::new(w, h, Origin::new("pba", Some(seed)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_minimum() {
        let cfg = DeConfig {
            upper: 10.0,
            ..DeConfig::default()
        };
        let mut f = |y: &[f64]| (y[0] - 3.0).powi(2);
        let best = de_minimize(&mut f, 1, &cfg, 1).unwrap();
        assert!((best.point[0] - 3.0).abs() < 1e-2);
    }

    #[test]
    fn clips_to_lower_bound() {
        let cfg = DeConfig {
            upper: 10.0,
            ..DeConfig::default()
        };
        let mut f = |y: &[f64]| (y[0] + 1.0).powi(2);
        let best = de_minimize(&mut f, 1, &cfg, 2).unwrap();
        assert!(best.point[0].abs() < 1e-3);
        assert!(best.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn population_stays_in_bounds() {
        let cfg = DeConfig {
            upper: 2.0,
            weight: 1.5,
            ..DeConfig::default()
        };
        let mut f = |y: &[f64]| y.iter().map(|v| (v - 5.0).powi(2)).sum::<f64>();
        let mut de = DifferentialEvolution::new(cfg, &mut f, 3, 4);
        for _ in 0..50 {
            de.step();
            assert!(de
                .population()
                .iter()
                .flatten()
                .all(|&v| (0.0..=2.0).contains(&v)));
        }
    }

    #[test]
    fn config_validation() {
        let bad = DeConfig {
            population: 3,
            ..DeConfig::default()
        };
        assert!(bad.validate().is_err());
        let mut f = |_: &[f64]| 0.0;
        assert!(de_minimize(&mut f, 0, &DeConfig::default(), 0).is_err());
    }

    #[test]
    fn zero_row_fits_to_origin() {
        let x = DenseMatrix::from_rows(&[[0.0, 0.0, 0.0, 0.0], [1.0, 2.0, 0.5, 1.5], [2.0, 1.0, 1.0, 0.5]]).unwrap();
        let p = init_pba(&x, 2, &DeConfig::for_data(&x), 9).unwrap();
        assert!(p.w.row(0).iter().all(|v| v.abs() < 1e-6));
        let q = init_pba(&x, 2, &DeConfig::for_data(&x), 9).unwrap();
        assert_eq!(p, q);
    }
}
