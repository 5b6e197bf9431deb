//! Random-family initializers: uniform, Random Acol, Random C, co-occurrence
//! and Gabor-feature seeding. All of them draw H⁰ uniformly.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;

use super::{check_rank, rng_for, uniform_matrix};
use crate::error::{NmfError, Result};
use crate::linalg::{column_2norms, mean_of_columns, DenseMatrix};
use crate::solvers::{FactorPair, Origin};

/// W and H with i.i.d. entries uniform on `(0, 1]`.
pub fn init_random(m: usize, n: usize, r: usize, seed: u64) -> Result<FactorPair> {
    check_rank(r, m, n)?;
    let mut rng = rng_for(seed);
    let w = uniform_matrix(m, r, &mut rng);
    let h = uniform_matrix(r, n, &mut rng);
    FactorPair::new(w, h, Origin::new("random", Some(seed)))
}

/// Default number of averaged columns for Acol / Random C: `⌈n / 10⌉`.
pub fn default_q(n: usize) -> usize {
    n.div_ceil(10).clamp(1, n.max(1))
}

/// Default Random C candidate pool: `max(2r, ⌈n/5⌉)` clamped to `[q, n]`.
pub fn default_pool(r: usize, q: usize, n: usize) -> usize {
    (2 * r).max(n.div_ceil(5)).clamp(q.min(n), n)
}

/// Each W column is the mean of `q` distinct columns sampled from `candidates`.
fn averaged_columns(
    x: &DenseMatrix,
    candidates: &[usize],
    r: usize,
    q: usize,
    rng: &mut impl Rng,
) -> Result<DenseMatrix> {
    let mut w = DenseMatrix::zeros(x.rows(), r);
    for k in 0..r {
        let picked: Vec<usize> = index::sample(rng, candidates.len(), q)
            .into_iter()
            .map(|pos| candidates[pos])
            .collect();
        w.set_column(k, &mean_of_columns(x, &picked)?);
    }
    Ok(w)
}

/// Random Acol: every W column averages `q` random columns of `x`.
pub fn init_random_acol(x: &DenseMatrix, r: usize, q: usize, seed: u64) -> Result<FactorPair> {
    let (m, n) = x.shape();
    check_rank(r, m, n)?;
    if q == 0 || q > n {
        return Err(NmfError::BadQ { q, limit: n });
    }
    let mut rng = rng_for(seed);
    let all: Vec<usize> = (0..n).collect();
    let w = averaged_columns(x, &all, r, q, &mut rng)?;
    let h = uniform_matrix(r, n, &mut rng);
    FactorPair::new(w, h, Origin::new("random-acol", Some(seed)))
}

/// Indices of the `pool` longest columns, returned in ascending index order.
/// Equal norms favour the lower index.
pub fn longest_columns(x: &DenseMatrix, pool: usize) -> Vec<usize> {
    let norms = column_2norms(x);
    let mut order: Vec<usize> = (0..x.cols()).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]).then(a.cmp(&b)));
    let mut top: Vec<usize> = order.into_iter().take(pool).collect();
    top.sort_unstable();
    top
}

/// Random C: like Acol, but columns are drawn from the `pool` longest ones.
///
/// The pool is kept in index order, so `pool = n` follows exactly the same
/// sample path as [`init_random_acol`] for a given seed.
pub fn init_random_c(
    x: &DenseMatrix,
    r: usize,
    q: usize,
    pool: usize,
    seed: u64,
) -> Result<FactorPair> {
    let (m, n) = x.shape();
    check_rank(r, m, n)?;
    if q == 0 || q > pool || pool > n {
        return Err(NmfError::BadQ {
            q,
            limit: pool.min(n),
        });
    }
    let mut rng = rng_for(seed);
    let candidates = longest_columns(x, pool);
    let w = averaged_columns(x, &candidates, r, q, &mut rng)?;
    let h = uniform_matrix(r, n, &mut rng);
    FactorPair::new(w, h, Origin::new("random-c", Some(seed)))
}

const DENSITY_THRESHOLD: f64 = 1e-12;

/// Columns of `C = x xᵀ` ranked densest first: by nonzero count, then by
/// 2-norm, then by lowest index.
pub fn cooccurrence_ranking(c: &DenseMatrix) -> Vec<usize> {
    let norms = column_2norms(c);
    let nnz: Vec<usize> = (0..c.cols())
        .map(|j| (0..c.rows()).filter(|&i| c[(i, j)].abs() > DENSITY_THRESHOLD).count())
        .collect();
    let mut order: Vec<usize> = (0..c.cols()).collect();
    order.sort_by(|&a, &b| {
        nnz[b]
            .cmp(&nnz[a])
            .then(norms[b].total_cmp(&norms[a]))
            .then(a.cmp(&b))
    });
    order
}

/// Co-occurrence seeding: W columns are `r` distinct columns sampled from the
/// densest `max(2r, ⌈m/5⌉)` columns of `x xᵀ`.
pub fn init_cooccurrence(x: &DenseMatrix, r: usize, seed: u64) -> Result<FactorPair> {
    let (m, n) = x.shape();
    check_rank(r, m, n)?;
    let c = x.matmul_t(x)?;
    let ranking = cooccurrence_ranking(&c);
    let pool = (2 * r).max(m.div_ceil(5)).clamp(r, m);
    let mut rng = rng_for(seed);
    let picked = index::sample(&mut rng, pool, r);
    let mut w = DenseMatrix::zeros(m, r);
    for (k, pos) in picked.into_iter().enumerate() {
        w.set_column(k, &c.column(ranking[pos]));
    }
    let h = uniform_matrix(r, n, &mut rng);
    FactorPair::new(w, h, Origin::new("cooc", Some(seed)))
}

/// Gabor filter bank parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaborBank {
    pub scales: usize,
    pub orientations: usize,
    pub sigma: f64,
    pub k_max: f64,
    pub spacing: f64,
    /// Odd side length of the square kernel window.
    pub window: usize,
}

impl Default for GaborBank {
    fn default() -> Self {
        Self {
            scales: 5,
            orientations: 8,
            sigma: 2.0 * PI,
            k_max: PI / 2.0,
            spacing: SQRT_2,
            window: 31,
        }
    }
}

impl GaborBank {
    pub fn validate(&self) -> Result<()> {
        if self.scales == 0 || self.orientations == 0 {
            return Err(NmfError::InvalidParameter("gabor bank needs scales and orientations".into()));
        }
        if !(self.sigma > 0.0 && self.k_max > 0.0 && self.spacing > 0.0) {
            return Err(NmfError::InvalidParameter("gabor parameters must be positive".into()));
        }
        if self.window % 2 == 0 {
            return Err(NmfError::InvalidParameter(format!(
                "gabor window must be odd, got {}",
                self.window
            )));
        }
        Ok(())
    }

    /// Wave vector `k_v e^{-iφ_μ}` as a plane vector.
    pub fn wave_vector(&self, mu: usize, v: usize) -> (f64, f64) {
        let k = self.k_max / self.spacing.powi(v as i32);
        let phi = PI * mu as f64 / self.orientations as f64;
        (k * phi.cos(), -k * phi.sin())
    }
}

/// Square complex kernel sampled on the integer grid, row-major, centred.
#[derive(Debug, Clone, PartialEq)]
pub struct GaborKernel {
    pub size: usize,
    pub values: Vec<Complex64>,
}

impl GaborKernel {
    /// Value at offset `(dy, dx)` from the centre.
    pub fn at(&self, dy: isize, dx: isize) -> Complex64 {
        let half = (self.size / 2) as isize;
        self.values[((dy + half) as usize) * self.size + (dx + half) as usize]
    }
}

/// Samples `ψ_{μ,v}(z) = (‖k‖²/σ²) exp(−‖k‖²‖z‖²/(2σ²)) [exp(−i k·z) − exp(−σ²/2)]`
/// with `z = (dx, dy)` over the bank's window.
pub fn gabor_kernel(bank: &GaborBank, mu: usize, v: usize) -> Result<GaborKernel> {
    bank.validate()?;
    if mu >= bank.orientations || v >= bank.scales {
        return Err(NmfError::InvalidParameter(format!(
            "gabor index (μ={mu}, v={v}) outside the bank"
        )));
    }
    let (kx, ky) = bank.wave_vector(mu, v);
    let k2 = kx * kx + ky * ky;
    let s2 = bank.sigma * bank.sigma;
    let dc = (-s2 / 2.0).exp();
    let half = (bank.window / 2) as isize;
    let mut values = Vec::with_capacity(bank.window * bank.window);
    for dy in -half..=half {
        for dx in -half..=half {
            let (x, y) = (dx as f64, dy as f64);
            let envelope = (k2 / s2) * (-k2 * (x * x + y * y) / (2.0 * s2)).exp();
            let wave = Complex64::from_polar(1.0, -(kx * x + ky * y)) - dc;
            values.push(wave * envelope);
        }
    }
    Ok(GaborKernel {
        size: bank.window,
        values,
    })
}

/// `|I * ψ|` with edge-replicating borders. `image` is row-major `rows × cols`.
fn gabor_magnitude(image: &[f64], rows: usize, cols: usize, kernel: &GaborKernel) -> Vec<f64> {
    let half = (kernel.size / 2) as isize;
    let mut out = vec![0.0; rows * cols];
    for i in 0..rows as isize {
        for j in 0..cols as isize {
            let mut acc = Complex64::new(0.0, 0.0);
            for dy in -half..=half {
                let si = (i - dy).clamp(0, rows as isize - 1) as usize;
                for dx in -half..=half {
                    let sj = (j - dx).clamp(0, cols as isize - 1) as usize;
                    acc += kernel.at(dy, dx) * image[si * cols + sj];
                }
            }
            out[i as usize * cols + j as usize] = acc.norm();
        }
    }
    out
}

/// Gabor seeding: `r` random dataset images are filtered by randomly chosen
/// kernels of the bank; each W column is the filter magnitude, vectorized
/// column-major like the dataset and scaled to a maximum of one.
///
/// The truncated kernel has its mean removed before filtering so that flat
/// regions respond with zero. When an image's response vanishes (a constant
/// image, for instance) the raw image column is used instead.
pub fn init_gabor(
    x: &DenseMatrix,
    image_shape: (usize, usize),
    r: usize,
    bank: &GaborBank,
    seed: u64,
) -> Result<FactorPair> {
    let (m, n) = x.shape();
    let (img_rows, img_cols) = image_shape;
    if img_rows * img_cols != m {
        return Err(NmfError::NotAnImageDataset {
            rows: m,
            image_rows: img_rows,
            image_cols: img_cols,
        });
    }
    check_rank(r, m, n)?;
    bank.validate()?;
    let mut rng = rng_for(seed);
    let images = index::sample(&mut rng, n, r).into_vec();
    let mut w = DenseMatrix::zeros(m, r);
    for (k, &col) in images.iter().enumerate() {
        let mu = rng.random_range(0..bank.orientations);
        let v = rng.random_range(0..bank.scales);
        let mut kernel = gabor_kernel(bank, mu, v)?;
        let mean = kernel.values.iter().sum::<Complex64>() / kernel.values.len() as f64;
        kernel.values.iter_mut().for_each(|z| *z -= mean);
        let kernel_mass: f64 = kernel.values.iter().map(|z| z.norm()).sum();

        let column = x.column(col);
        let mut image = vec![0.0; m];
        for c in 0..img_cols {
            for rr in 0..img_rows {
                image[rr * img_cols + c] = column[c * img_rows + rr];
            }
        }
        let response = gabor_magnitude(&image, img_rows, img_cols, &kernel);
        let peak = response.iter().copied().fold(0.0f64, f64::max);
        let image_peak = image.iter().copied().fold(0.0f64, |a, b| a.max(b.abs()));

        let mut feature = vec![0.0; m];
        if peak > 1e-9 * image_peak * kernel_mass && peak > 0.0 {
            for c in 0..img_cols {
                for rr in 0..img_rows {
                    feature[c * img_rows + rr] = response[rr * img_cols + c];
                }
            }
        } else {
            feature.copy_from_slice(&column);
        }
        let top = feature.iter().copied().fold(0.0f64, f64::max);
        if top > 0.0 {
            feature.iter_mut().for_each(|f| *f /= top);
        }
        w.set_column(k, &feature);
    }
    let h = uniform_matrix(r, n, &mut rng);
    FactorPair::new(w, h, Origin::new("gabor", Some(seed)))
}
