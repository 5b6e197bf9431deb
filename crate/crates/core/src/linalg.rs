//! Dense linear-algebra primitives: the row-major [`DenseMatrix`], norms,
//! products, column statistics and a deterministic truncated SVD.

use std::fmt;
use std::ops::{Index, IndexMut};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{NmfError, Result};

/// Row-major dense matrix of `f64`.
///
/// Constructors reject NaN and infinities.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(NmfError::Shape(format!(
                "{} values supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(NmfError::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(NmfError::Shape(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns<C: AsRef<[f64]>>(columns: &[C]) -> Result<Self> {
        let rows = columns.first().map_or(0, |c| c.as_ref().len());
        let cols = columns.len();
        let mut m = Self::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            let c = c.as_ref();
            if c.len() != rows {
                return Err(NmfError::Shape(format!(
                    "column {j} has {} entries, expected {rows}",
                    c.len()
                )));
            }
            m.set_column(j, c);
        }
        if let Some(pos) = m.data.iter().position(|v| !v.is_finite()) {
            return Err(NmfError::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Fills a matrix from a closure over `(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Row-major backing storage.
    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[f64]) {
        debug_assert_eq!(values.len(), self.rows);
        for (i, &v) in values.iter().enumerate() {
            self.data[i * self.cols + j] = v;
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(NmfError::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ * other` without materializing the transpose.
    pub fn t_matmul(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(NmfError::Shape(format!(
                "cannot multiply ({}x{})ᵀ by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let b_row = other.row(k);
            for (i, &a) in self.row(k).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self * otherᵀ` without materializing the transpose.
    pub fn matmul_t(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(NmfError::Shape(format!(
                "cannot multiply {}x{} by ({}x{})ᵀ",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self::from_fn(self.rows, other.rows, |i, j| {
            dot(self.row(i), other.row(j))
        }))
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(NmfError::Shape(format!(
                "cannot multiply {}x{} by a vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), v)).collect())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(NmfError::Shape(format!(
                "elementwise operation on {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    /// Elementwise `max(v, 0)`.
    pub fn positive_part(&self) -> Self {
        self.map(|v| v.max(0.0))
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&v| v >= 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Position of the first negative entry, if any.
    pub fn first_negative(&self) -> Option<(usize, usize)> {
        self.data
            .iter()
            .position(|&v| v < 0.0)
            .map(|p| (p / self.cols, p % self.cols))
    }

    /// Number of entries with magnitude above `threshold`.
    pub fn count_nonzero(&self, threshold: f64) -> usize {
        self.data.iter().filter(|v| v.abs() > threshold).count()
    }

    /// Copy of the listed columns, in order.
    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.rows, idx.len(), |i, j| self[(i, idx[j])])
    }

    /// Copy of the listed rows, in order.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    /// Leading `n` columns.
    pub fn leading_columns(&self, n: usize) -> Self {
        Self::from_fn(self.rows, n, |i, j| self[(i, j)])
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Factorization rank. Always at least one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rank(usize);

impl Rank {
    pub fn new(r: usize) -> Result<Self> {
        if r == 0 {
            return Err(NmfError::BadRank {
                rank: 0,
                rows: 0,
                cols: 0,
            });
        }
        Ok(Self(r))
    }

    /// Rank checked against `r <= min(rows, cols)`.
    pub fn for_shape(r: usize, rows: usize, cols: usize) -> Result<Self> {
        if r == 0 || r > rows.min(cols) {
            return Err(NmfError::BadRank { rank: r, rows, cols });
        }
        Ok(Self(r))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }
}

/// Leading singular triplets `a ≈ u · diag(sigma) · vᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSvd {
    /// `m × p`, orthonormal columns.
    pub u: DenseMatrix,
    /// Non-increasing, non-negative.
    pub sigma: Vec<f64>,
    /// `n × p`, orthonormal columns.
    pub v: DenseMatrix,
}

impl TruncatedSvd {
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        let p = self.sigma.len();
        let us = DenseMatrix::from_fn(self.u.rows(), p, |i, j| self.u[(i, j)] * self.sigma[j]);
        us.matmul_t(&self.v).expect("conforming svd factors")
    }
}

/// Tuning knobs for [`truncated_svd_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvdOptions {
    /// Above this `min(m, n)` the randomized subspace iteration is used.
    pub dense_limit: usize,
    pub oversample: usize,
    pub power_iters: usize,
    pub seed: u64,
}

impl Default for SvdOptions {
    fn default() -> Self {
        Self {
            dense_limit: 64,
            oversample: 8,
            power_iters: 2,
            seed: 0x5eed_5eed,
        }
    }
}

const JACOBI_MAX_SWEEPS: usize = 80;
const JACOBI_TOL: f64 = 1e-15;

pub fn frobenius_norm(a: &DenseMatrix) -> f64 {
    a.data().iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `‖x − wh‖_F / ‖x‖_F`.
pub fn relative_error(x: &DenseMatrix, w: &DenseMatrix, h: &DenseMatrix) -> Result<f64> {
    let wh = w.matmul(h)?;
    let nx = frobenius_norm(x);
    if nx == 0.0 {
        return Err(NmfError::ZeroMatrix);
    }
    Ok(frobenius_norm(&x.sub(&wh)?) / nx)
}

pub fn column_2norms(a: &DenseMatrix) -> Vec<f64> {
    let mut sq = vec![0.0; a.cols()];
    for i in 0..a.rows() {
        for (s, v) in sq.iter_mut().zip(a.row(i)) {
            *s += v * v;
        }
    }
    sq.into_iter().map(f64::sqrt).collect()
}

/// Elementwise average of the selected columns.
pub fn mean_of_columns(a: &DenseMatrix, idx: &[usize]) -> Result<Vec<f64>> {
    if idx.is_empty() {
        return Err(NmfError::EmptySelection);
    }
    if let Some(&bad) = idx.iter().find(|&&j| j >= a.cols()) {
        return Err(NmfError::IndexOutOfRange {
            index: bad,
            len: a.cols(),
        });
    }
    let mut out = vec![0.0; a.rows()];
    for (i, o) in out.iter_mut().enumerate() {
        let row = a.row(i);
        *o = idx.iter().map(|&j| row[j]).sum::<f64>() / idx.len() as f64;
    }
    Ok(out)
}

/// Leading `p` singular triplets with the default [`SvdOptions`].
pub fn truncated_svd(a: &DenseMatrix, p: Rank) -> Result<TruncatedSvd> {
    truncated_svd_with(a, p, &SvdOptions::default())
}

/// Leading `p` singular triplets.
///
/// Small problems (`min(m, n) <= dense_limit`) use one-sided Jacobi rotations,
/// which diagonalize the Gram matrix without forming it. Larger ones use a
/// seeded randomized range finder with power passes followed by a Jacobi SVD
/// of the projected matrix. Each `u` column is signed so its largest-magnitude
/// entry is positive.
pub fn truncated_svd_with(a: &DenseMatrix, p: Rank, opts: &SvdOptions) -> Result<TruncatedSvd> {
    let (m, n) = a.shape();
    let p = p.get();
    if p > m.min(n) {
        return Err(NmfError::BadRank {
            rank: p,
            rows: m,
            cols: n,
        });
    }
    let (u, sigma, v) = if m.min(n) <= opts.dense_limit {
        jacobi_svd(a)?
    } else {
        randomized_svd(a, p, opts)?
    };
    let mut u: Vec<Vec<f64>> = u.into_iter().take(p).collect();
    let mut v: Vec<Vec<f64>> = v.into_iter().take(p).collect();
    let sigma: Vec<f64> = sigma.into_iter().take(p).collect();
    for (uc, vc) in u.iter_mut().zip(v.iter_mut()) {
        let lead = uc
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |best, (i, &x)| {
                if x.abs() > best.1.abs() {
                    (i, x)
                } else {
                    best
                }
            })
            .1;
        if lead < 0.0 {
            uc.iter_mut().for_each(|x| *x = -*x);
            vc.iter_mut().for_each(|x| *x = -*x);
        }
    }
    Ok(TruncatedSvd {
        u: DenseMatrix::from_columns(&u)?,
        sigma,
        v: DenseMatrix::from_columns(&v)?,
    })
}

/// Thin SVD with `k = min(m, n)` triplets sorted by decreasing singular value.
pub fn thin_svd(a: &DenseMatrix) -> Result<TruncatedSvd> {
    let k = a.rows().min(a.cols());
    let rank = Rank::new(k)?;
    truncated_svd_with(
        a,
        rank,
        &SvdOptions {
            dense_limit: usize::MAX,
            ..SvdOptions::default()
        },
    )
}

type Columns = Vec<Vec<f64>>;

/// Full thin SVD as column lists `(u, sigma, v)`, sorted by decreasing sigma.
fn jacobi_svd(a: &DenseMatrix) -> Result<(Columns, Vec<f64>, Columns)> {
    let (m, n) = a.shape();
    if m >= n {
        let cols: Columns = (0..n).map(|j| a.column(j)).collect();
        one_sided_jacobi(cols, m)
    } else {
        let cols: Columns = (0..m).map(|i| a.row(i).to_vec()).collect();
        let (v, s, u) = one_sided_jacobi(cols, n)?;
        Ok((u, s, v))
    }
}

/// Hestenes one-sided Jacobi on the `k` columns (each of length `len >= k`).
/// Returns left vectors, singular values and right vectors.
fn one_sided_jacobi(mut cols: Columns, len: usize) -> Result<(Columns, Vec<f64>, Columns)> {
    let k = cols.len();
    let mut v: Columns = (0..k)
        .map(|j| {
            let mut e = vec![0.0; k];
            e[j] = 1.0;
            e
        })
        .collect();

    // Columns below this squared norm are numerical noise and are completed
    // to an orthonormal basis afterwards instead of being rotated.
    let total: f64 = cols.iter().map(|c| dot(c, c)).sum();
    let negligible = total * 1e-30;
    let mut converged = k < 2;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..k - 1 {
            for q in p + 1..k {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if alpha <= negligible || beta <= negligible || gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut cols, p, q, c, s);
                rotate_pair(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(NmfError::ConvergenceFailure("jacobi svd"));
    }

    let mut sigma: Vec<f64> = cols.iter().map(|c| norm2(c)).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]).then(i.cmp(&j)));
    let sigma_max = order.first().map_or(0.0, |&i| sigma[i]);
    let cutoff = sigma_max * 1e-14;

    let mut u: Columns = Vec::with_capacity(k);
    let mut missing = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        if sigma[j] > cutoff && sigma[j] > 0.0 {
            u.push(cols[j].iter().map(|x| x / sigma[j]).collect());
        } else {
            u.push(vec![0.0; len]);
            missing.push(slot);
        }
    }
    complete_orthonormal(&mut u, &missing, len);
    let v_sorted: Columns = order.iter().map(|&j| v[j].clone()).collect();
    let s_sorted: Vec<f64> = order.iter().map(|&j| sigma[j]).collect();
    sigma.clear();
    Ok((u, s_sorted, v_sorted))
}

fn rotate_pair(cols: &mut Columns, p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let cp = &mut left[p];
    let cq = &mut right[0];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let a = *x;
        let b = *y;
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Replaces the columns at `missing` with unit vectors orthogonal to all the
/// others, drawn from the standard basis.
fn complete_orthonormal(cols: &mut Columns, missing: &[usize], len: usize) {
    for &slot in missing {
        let mut best: Option<Vec<f64>> = None;
        let mut best_norm = -1.0;
        for e in 0..len {
            let mut cand = vec![0.0; len];
            cand[e] = 1.0;
            for _ in 0..2 {
                for (j, c) in cols.iter().enumerate() {
                    if j == slot || (missing.contains(&j) && norm2(c) == 0.0) {
                        continue;
                    }
                    let d = dot(&cand, c);
                    cand.iter_mut().zip(c).for_each(|(x, y)| *x -= d * y);
                }
            }
            let nrm = norm2(&cand);
            if nrm > best_norm + 1e-12 {
                best_norm = nrm;
                best = Some(cand);
            }
            if nrm > 0.7 {
                break;
            }
        }
        let cand = best.expect("len >= number of columns");
        cols[slot] = cand.iter().map(|x| x / best_norm).collect();
    }
}

/// Modified Gram-Schmidt with one reorthogonalization pass. Dependent columns
/// are replaced by completing vectors.
fn orthonormalize(cols: &mut Columns, len: usize) {
    let mut missing = Vec::new();
    for j in 0..cols.len() {
        let original = norm2(&cols[j]);
        for _ in 0..2 {
            for i in 0..j {
                if missing.contains(&i) {
                    continue;
                }
                let d = dot(&cols[j], &cols[i]);
                let (done, rest) = cols.split_at_mut(j);
                rest[0].iter_mut().zip(&done[i]).for_each(|(x, y)| *x -= d * y);
            }
        }
        let nrm = norm2(&cols[j]);
        if nrm <= 1e-12 * original.max(f64::MIN_POSITIVE) || nrm == 0.0 {
            cols[j].iter_mut().for_each(|x| *x = 0.0);
            missing.push(j);
        } else {
            cols[j].iter_mut().for_each(|x| *x /= nrm);
        }
    }
    complete_orthonormal(cols, &missing, len);
}

fn randomized_svd(a: &DenseMatrix, p: usize, opts: &SvdOptions) -> Result<(Columns, Vec<f64>, Columns)> {
    let (m, n) = a.shape();
    let k = (p + opts.oversample).min(m.min(n));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let omega = DenseMatrix::from_fn(n, k, |_, _| StandardNormal.sample(&mut rng));

    let to_cols = |mat: &DenseMatrix| -> Columns { (0..mat.cols()).map(|j| mat.column(j)).collect() };

    let mut q = to_cols(&a.matmul(&omega)?);
    orthonormalize(&mut q, m);
    for _ in 0..opts.power_iters {
        let qm = DenseMatrix::from_columns(&q)?;
        let mut z = to_cols(&a.t_matmul(&qm)?);
        orthonormalize(&mut z, n);
        let zm = DenseMatrix::from_columns(&z)?;
        q = to_cols(&a.matmul(&zm)?);
        orthonormalize(&mut q, m);
    }
    let qm = DenseMatrix::from_columns(&q)?;
    // B = Qᵀ A is k × n with k <= n; its SVD lifts back through Q.
    let b = qm.t_matmul(a)?;
    let (ub, sigma, vb) = jacobi_svd(&b)?;
    let u: Columns = ub
        .iter()
        .map(|c| qm.mul_vec(c).expect("k-length coefficient vector"))
        .collect();
    Ok((u, sigma, vb))
}

/// Least-squares solution of `min ‖a y − b‖₂` by Householder QR.
///
/// Columns whose pivot collapses below `1e-12 · max pivot` are treated as
/// dependent and their coefficients fixed at zero.
pub fn least_squares(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(NmfError::Shape(format!(
            "right-hand side of length {} for {m} equations",
            b.len()
        )));
    }
    let mut cols: Columns = (0..n).map(|j| a.column(j)).collect();
    let mut rhs = b.to_vec();
    let steps = n.min(m);
    let mut diag = vec![0.0; n];
    for k in 0..steps {
        let x = &cols[k][k..];
        let alpha = norm2(x);
        if alpha == 0.0 {
            diag[k] = 0.0;
            continue;
        }
        let alpha = if x[0] > 0.0 { -alpha } else { alpha };
        let mut hv: Vec<f64> = x.to_vec();
        hv[0] -= alpha;
        let hn = dot(&hv, &hv);
        if hn == 0.0 {
            diag[k] = alpha;
            continue;
        }
        for col in cols.iter_mut().skip(k) {
            let d = 2.0 * dot(&hv, &col[k..]) / hn;
            col[k..].iter_mut().zip(&hv).for_each(|(c, h)| *c -= d * h);
        }
        let d = 2.0 * dot(&hv, &rhs[k..]) / hn;
        rhs[k..].iter_mut().zip(&hv).for_each(|(c, h)| *c -= d * h);
        diag[k] = cols[k][k];
    }
    let max_pivot = diag.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
    let mut y = vec![0.0; n];
    for k in (0..steps).rev() {
        if diag[k].abs() <= 1e-12 * max_pivot || diag[k] == 0.0 {
            y[k] = 0.0;
            continue;
        }
        let mut s = rhs[k];
        for j in k + 1..n {
            s -= cols[j][k] * y[j];
        }
        y[k] = s / cols[k][k];
    }
    Ok(y)
}
