//! Low-rank seeding: SVD magnitudes, NNDSVD, NNSVD with low-rank correction,
//! non-negative PCA and non-negative ICA.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{check_rank, rng_for, uniform_matrix};
use crate::error::{NmfError, Result};
use crate::linalg::{frobenius_norm, norm2, thin_svd, truncated_svd, DenseMatrix, Rank, TruncatedSvd};
use crate::solvers::{nnls_solve, FactorPair, Origin, DEFAULT_EPSILON_GUARD};

/// Cumulative singular-value fraction that fixes the rank.
pub const RANK_SELECTION_THRESHOLD: f64 = 0.90;
/// Explained-variance fraction used by PCA when the rank is chosen from data.
pub const NPCA_ALPHA: f64 = 0.9;
/// Low-rank multiplicative refinement steps applied by NNSVD-LRC.
pub const LRC_REFINE_STEPS: usize = 20;

/// `W = |U_r|`, `H = |Σ_r V_rᵀ|`.
pub fn init_svd_abs(x: &DenseMatrix, r: usize) -> Result<FactorPair> {
    let rank = check_rank(r, x.rows(), x.cols())?;
    let svd = truncated_svd(x, rank)?;
    let w = svd.u.abs();
    let h = DenseMatrix::from_fn(r, x.cols(), |k, j| (svd.sigma[k] * svd.v[(j, k)]).abs());
    FactorPair::new(w, h, Origin::new("svd-abs", None))
}

/// Smallest `i` whose leading singular values reach 90% of the total.
pub fn select_rank_90(sigma: &[f64]) -> Result<Rank> {
    select_rank(sigma, RANK_SELECTION_THRESHOLD, false)
}

/// Smallest `i` with `Σ_{j≤i} s_j / Σ_j s_j ≥ threshold`, where `s` is the
/// spectrum itself or, with `squared`, its squares.
pub fn select_rank(sigma: &[f64], threshold: f64, squared: bool) -> Result<Rank> {
    if sigma.is_empty() {
        return Err(NmfError::ZeroSpectrum);
    }
    if sigma.iter().any(|s| !(*s >= 0.0)) {
        return Err(NmfError::InvalidParameter("singular values must be non-negative".into()));
    }
    let weight = |s: f64| if squared { s * s } else { s };
    let total: f64 = sigma.iter().map(|&s| weight(s)).sum();
    if total == 0.0 {
        return Err(NmfError::ZeroSpectrum);
    }
    let mut running = 0.0;
    for (i, &s) in sigma.iter().enumerate() {
        running += weight(s);
        // Relative slack absorbs rounding in the cumulative sum.
        if running / total >= threshold - 1e-12 {
            return Rank::new(i + 1);
        }
    }
    Rank::new(sigma.len())
}

fn split_parts(v: &[f64]) -> (Vec<f64>, Vec<f64>) {
    (
        v.iter().map(|x| x.max(0.0)).collect(),
        v.iter().map(|x| (-x).max(0.0)).collect(),
    )
}

/// Non-negative double SVD. The leading pair is `√σ₁|u₁|`, `√σ₁|v₁|`; every
/// later pair keeps whichever of its positive or negative sections carries
/// more mass (`‖u±‖·‖v±‖`), normalized and scaled by `√(σ_j · mass)`.
pub fn init_nndsvd(x: &DenseMatrix, r: usize) -> Result<FactorPair> {
    let (m, n) = x.shape();
    let rank = check_rank(r, m, n)?;
    let svd = truncated_svd(x, rank)?;
    let mut w = DenseMatrix::zeros(m, r);
    let mut h = DenseMatrix::zeros(r, n);

    let s1 = svd.sigma[0].sqrt();
    w.set_column(0, &svd.u.column(0).iter().map(|v| s1 * v.abs()).collect::<Vec<_>>());
    for j in 0..n {
        h[(0, j)] = s1 * svd.v[(j, 0)].abs();
    }

    for k in 1..r {
        let (up, un) = split_parts(&svd.u.column(k));
        let (vp, vn) = split_parts(&svd.v.column(k));
        let (nup, nun, nvp, nvn) = (norm2(&up), norm2(&un), norm2(&vp), norm2(&vn));
        let (mass_p, mass_n) = (nup * nvp, nun * nvn);
        let (u_part, v_part, nu, nv, mass) = if mass_p >= mass_n {
            (up, vp, nup, nvp, mass_p)
        } else {
            (un, vn, nun, nvn, mass_n)
        };
        if mass == 0.0 {
            continue;
        }
        let scale = (svd.sigma[k] * mass).sqrt();
        w.set_column(k, &u_part.iter().map(|v| scale * v / nu).collect::<Vec<_>>());
        for j in 0..n {
            h[(k, j)] = scale * v_part[j] / nv;
        }
    }
    FactorPair::new(w, h, Origin::new("nndsvd", None))
}

/// `p = ⌊r/2 + 1⌋`, the SVD rank NNSVD-LRC needs for `r` components.
pub fn lrc_rank(r: usize) -> usize {
    r / 2 + 1
}

/// Balanced rank-`p` factors `Y_p = UΣ^{1/2}`, `Z_p = Σ^{1/2}Vᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LrcFactors {
    pub y: DenseMatrix,
    pub z: DenseMatrix,
}

impl LrcFactors {
    pub fn from_svd(svd: &TruncatedSvd) -> Self {
        let p = svd.rank();
        let root: Vec<f64> = svd.sigma.iter().map(|s| s.sqrt()).collect();
        let y = DenseMatrix::from_fn(svd.u.rows(), p, |i, k| svd.u[(i, k)] * root[k]);
        let z = DenseMatrix::from_fn(p, svd.v.rows(), |k, j| root[k] * svd.v[(j, k)]);
        Self { y, z }
    }
}

/// NNSVD-LRC factors before refinement, with the low-rank pair they came from.
///
/// Column 1 takes `|Y_p(:,1)|`; afterwards each remaining SVD component `j`
/// fills an even-numbered column from its positive part and the following
/// odd-numbered column from its negative part. H rows mirror this from `Z_p`.
pub fn nnsvd_lrc_seed(x: &DenseMatrix, r: usize) -> Result<(FactorPair, LrcFactors)> {
    let (m, n) = x.shape();
    check_rank(r, m, n)?;
    if r < 2 {
        return Err(NmfError::BadRank { rank: r, rows: m, cols: n });
    }
    let p = lrc_rank(r);
    let svd = truncated_svd(x, Rank::for_shape(p, m, n)?)?;
    let lrc = LrcFactors::from_svd(&svd);
    let mut w = DenseMatrix::zeros(m, r);
    let mut h = DenseMatrix::zeros(r, n);
    for i in 0..m {
        w[(i, 0)] = lrc.y[(i, 0)].abs();
    }
    for jj in 0..n {
        h[(0, jj)] = lrc.z[(0, jj)].abs();
    }
    let mut j = 1;
    for col in 1..r {
        // `col + 1` is the one-based column number.
        let sign = if (col + 1) % 2 == 0 { 1.0 } else { -1.0 };
        for i in 0..m {
            w[(i, col)] = (sign * lrc.y[(i, j)]).max(0.0);
        }
        for jj in 0..n {
            h[(col, jj)] = (sign * lrc.z[(j, jj)]).max(0.0);
        }
        if sign < 0.0 {
            j += 1;
        }
    }
    Ok((FactorPair::new(w, h, Origin::new("nnsvd-lrc", None))?, lrc))
}

/// NNSVD-LRC with [`LRC_REFINE_STEPS`] low-rank multiplicative refinements.
pub fn init_nnsvd_lrc(x: &DenseMatrix, r: usize) -> Result<FactorPair> {
    init_nnsvd_lrc_with(x, r, LRC_REFINE_STEPS)
}

/// Seeds as [`nnsvd_lrc_seed`], then runs `steps` multiplicative updates on
/// `½‖Y_pZ_p − WH‖²`, so every product with the data goes through the rank-p
/// factors. Numerators are clipped at zero because `Y_pZ_p` may have
/// negative entries.
pub fn init_nnsvd_lrc_with(x: &DenseMatrix, r: usize, steps: usize) -> Result<FactorPair> {
    let (seed, lrc) = nnsvd_lrc_seed(x, r)?;
    let mut w = seed.w;
    let mut h = seed.h;
    let eps = DEFAULT_EPSILON_GUARD;
    for _ in 0..steps {
        // X Hᵀ ≈ Y (Z Hᵀ)
        let xht = lrc.y.matmul(&lrc.z.matmul_t(&h)?)?;
        let whht = w.matmul(&h.matmul_t(&h)?)?;
        for ((wv, num), den) in w.data_mut().iter_mut().zip(xht.data()).zip(whht.data()) {
            *wv *= num.max(0.0) / (den + eps);
        }
        // Wᵀ X ≈ (Wᵀ Y) Z
        let wtx = w.t_matmul(&lrc.y)?.matmul(&lrc.z)?;
        let wtwh = w.t_matmul(&w)?.matmul(&h)?;
        for ((hv, num), den) in h.data_mut().iter_mut().zip(wtx.data()).zip(wtwh.data()) {
            *hv *= num.max(0.0) / (den + eps);
        }
    }
    FactorPair::new(w, h, Origin::new("nnsvd-lrc", None))
}

/// How many principal components to keep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PcaRank {
    Fixed(usize),
    /// Smallest `r` whose eigenvalues explain at least this fraction.
    Variance(f64),
}

impl Default for PcaRank {
    /// Variance mode at [`NPCA_ALPHA`].
    fn default() -> Self {
        PcaRank::Variance(NPCA_ALPHA)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    /// Column mean `ψ`.
    pub mean: Vec<f64>,
    /// `m × r`, orthonormal columns.
    pub components: DenseMatrix,
    /// Eigenvalues of `X̄X̄ᵀ` for the kept components, non-increasing.
    pub eigenvalues: Vec<f64>,
    /// Sum of all eigenvalues (total scatter `‖X̄‖_F²`).
    pub total: f64,
}

impl PcaModel {
    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `X̄ = X − ψ1ᵀ`.
    pub fn center(&self, x: &DenseMatrix) -> DenseMatrix {
        center_with(x, &self.mean)
    }
}

fn center_with(x: &DenseMatrix, mean: &[f64]) -> DenseMatrix {
    DenseMatrix::from_fn(x.rows(), x.cols(), |i, j| x[(i, j)] - mean[i])
}

/// PCA of the columns of `x` through the SVD of the centred data; eigenvalues
/// are the squared singular values of `X̄` (no `1/(n−1)` factor).
pub fn fit_pca(x: &DenseMatrix, rank: PcaRank) -> Result<PcaModel> {
    let (m, n) = x.shape();
    if n < 2 {
        return Err(NmfError::DegenerateData("PCA needs at least two columns".into()));
    }
    let mean: Vec<f64> = (0..m).map(|i| x.row(i).iter().sum::<f64>() / n as f64).collect();
    let centred = center_with(x, &mean);
    let total = frobenius_norm(&centred).powi(2);
    if total == 0.0 {
        return Err(NmfError::DegenerateData("all columns are identical".into()));
    }
    let svd = match rank {
        PcaRank::Fixed(r) => truncated_svd(&centred, Rank::for_shape(r, m, n)?)?,
        PcaRank::Variance(alpha) => {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(NmfError::InvalidParameter(format!(
                    "explained-variance fraction must lie in (0, 1], got {alpha}"
                )));
            }
            let full = thin_svd(&centred)?;
            let lambdas: Vec<f64> = full.sigma.iter().map(|s| s * s).collect();
            let r = select_rank(&lambdas, alpha, false)?.get();
            TruncatedSvd {
                u: full.u.leading_columns(r),
                sigma: full.sigma[..r].to_vec(),
                v: full.v.leading_columns(r),
            }
        }
    };
    Ok(PcaModel {
        mean,
        components: svd.u,
        eigenvalues: svd.sigma.iter().map(|s| s * s).collect(),
        total,
    })
}

/// Clips components to the non-negative orthant; columns annihilated by the
/// clipping are refilled with uniform random entries.
pub fn nonnegative_components(components: &DenseMatrix, seed: u64) -> DenseMatrix {
    let mut w = components.positive_part();
    let mut rng = rng_for(seed);
    for c in 0..w.cols() {
        if w.column(c).iter().all(|&v| v == 0.0) {
            let fill = uniform_matrix(w.rows(), 1, &mut rng);
            w.set_column(c, fill.data());
        }
    }
    w
}

/// Non-negative PCA: `W = max(C, 0)`, `H = max(CᵀX̄, 0)` for the leading
/// `r` components `C`.
pub fn init_npca(x: &DenseMatrix, r: usize, seed: u64) -> Result<FactorPair> {
    let (m, n) = x.shape();
    check_rank(r, m, n)?;
    let model = fit_pca(x, PcaRank::Fixed(r))?;
    let w = nonnegative_components(&model.components, seed);
    let h = model.components.t_matmul(&model.center(x))?.positive_part();
    FactorPair::new(w, h, Origin::new("npca", Some(seed)))
}

/// PCA whitening to `r` dimensions: `Z = D^{-1/2} Cᵀ X̄` with `D = λ / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Whitening {
    pub pca: PcaModel,
    /// Per-component standard deviations `√(λ_k / n)`.
    pub scales: Vec<f64>,
    /// `r × n` whitened data.
    pub z: DenseMatrix,
}

pub fn whiten(x: &DenseMatrix, r: usize) -> Result<Whitening> {
    let n = x.cols();
    let pca = fit_pca(x, PcaRank::Fixed(r))?;
    let lead = pca.eigenvalues[0];
    if pca.eigenvalues.iter().any(|&l| l <= 1e-12 * lead) {
        return Err(NmfError::DegenerateData(format!(
            "fewer than {r} non-degenerate directions to whiten"
        )));
    }
    let scales: Vec<f64> = pca.eigenvalues.iter().map(|l| (l / n as f64).sqrt()).collect();
    let projected = pca.components.t_matmul(&pca.center(x))?;
    let z = DenseMatrix::from_fn(r, n, |k, j| projected[(k, j)] / scales[k]);
    Ok(Whitening { pca, scales, z })
}

const ICA_MAX_ITER: usize = 400;
const ICA_TOL: f64 = 1e-8;

/// `(W Wᵀ)^{-1/2} W`, i.e. `U Vᵀ` from the SVD of `W`.
fn symmetric_decorrelation(w: &DenseMatrix) -> Result<DenseMatrix> {
    let svd = thin_svd(w)?;
    svd.u.matmul_t(&svd.v)
}

/// Symmetric fixed-point ICA with the log-cosh contrast on whitened data.
/// Returns the `r × r` orthogonal unmixing matrix.
pub fn fastica_unmixing(z: &DenseMatrix, seed: u64) -> Result<DenseMatrix> {
    let (r, n) = z.shape();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = DenseMatrix::from_fn(r, r, |_, _| StandardNormal.sample(&mut rng));
    let mut w = symmetric_decorrelation(&start)?;
    for _ in 0..ICA_MAX_ITER {
        let wz = w.matmul(z)?;
        let g = wz.map(f64::tanh);
        let mut next = g.matmul_t(z)?.scale(1.0 / n as f64);
        for k in 0..r {
            let mean_dg = wz.row(k).iter().map(|u| 1.0 - u.tanh().powi(2)).sum::<f64>() / n as f64;
            for c in 0..r {
                next[(k, c)] -= mean_dg * w[(k, c)];
            }
        }
        let next = symmetric_decorrelation(&next)?;
        let cross = next.matmul_t(&w)?;
        let drift = (0..r).map(|k| (1.0 - cross[(k, k)].abs()).abs()).fold(0.0, f64::max);
        w = next;
        if drift < ICA_TOL {
            break;
        }
    }
    Ok(w)
}

/// Non-negative ICA seeding.
///
/// The data are centred and whitened to `r` dimensions, an orthogonal
/// unmixing is estimated, and the sources `S` and mixing `A` are mapped back
/// to data coordinates so that `X̄ ≈ A S`. Each component is signed so its
/// source has non-negative skew. The mean is folded in by solving
/// `ψ ≈ A c` with `c ≥ 0` and shifting the sources by `c`; the magnitudes of
/// `A` and of the shifted sources become W⁰ and H⁰.
pub fn init_nica(x: &DenseMatrix, r: usize, seed: u64) -> Result<FactorPair> {
    let (m, n) = x.shape();
    check_rank(r, m, n)?;
    let white = whiten(x, r)?;
    let unmix = fastica_unmixing(&white.z, seed)?;
    let mut sources = unmix.matmul(&white.z)?;
    // A = C · diag(scales) · unmixᵀ
    let scaled = DenseMatrix::from_fn(m, r, |i, k| white.pca.components[(i, k)] * white.scales[k]);
    let mut mixing = scaled.matmul_t(&unmix)?;

    for k in 0..r {
        let skew: f64 = sources.row(k).iter().map(|s| s * s * s).sum();
        if skew < 0.0 {
            sources.row_mut(k).iter_mut().for_each(|s| *s = -*s);
            for i in 0..m {
                mixing[(i, k)] = -mixing[(i, k)];
            }
        }
    }
    let shift = nnls_solve(&mixing, &white.pca.mean)?;
    for (k, c) in shift.iter().enumerate() {
        sources.row_mut(k).iter_mut().for_each(|s| *s += c);
    }
    FactorPair::new(mixing.abs(), sources.abs(), Origin::new("nica", Some(seed)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn svd_abs_on_diagonal() {
        let x = m(&[&[3.0, 0.0], &[0.0, 1.0]]);
        let p = init_svd_abs(&x, 2).unwrap();
        assert_eq!(p.w, DenseMatrix::identity(2));
        assert_eq!(p.h, x);
    }

    #[test]
    fn rank_selection_examples() {
        assert_eq!(select_rank_90(&[9.0, 0.5, 0.3, 0.2]).unwrap().get(), 1);
        assert_eq!(select_rank_90(&[1.0, 1.0, 1.0, 1.0]).unwrap().get(), 4);
        assert_eq!(select_rank_90(&[5.0, 4.0, 1.0]).unwrap().get(), 2);
        assert_eq!(select_rank_90(&[0.0, 0.0]), Err(NmfError::ZeroSpectrum));
        assert_eq!(select_rank_90(&[]), Err(NmfError::ZeroSpectrum));
        // Squared sums: 81 / 81.38 already passes at one.
        assert_eq!(select_rank(&[9.0, 0.5, 0.3, 0.2], 0.9, true).unwrap().get(), 1);
        assert_eq!(select_rank(&[5.0, 4.0, 1.0], 0.9, true).unwrap().get(), 2);
    }

    #[test]
    fn nndsvd_on_diagonal() {
        let x = m(&[&[3.0, 0.0], &[0.0, 1.0]]);
        let p = init_nndsvd(&x, 2).unwrap();
        let s3 = 3f64.sqrt();
        assert!((p.w[(0, 0)] - s3).abs() < 1e-15 && (p.w[(1, 1)] - 1.0).abs() < 1e-15);
        assert_eq!((p.w[(0, 1)], p.w[(1, 0)]), (0.0, 0.0));
        assert!(frobenius_norm(&x.sub(&p.product()).unwrap()) < 1e-14);
    }

    #[test]
    fn lrc_rank_matches_floor_rule() {
        for r in 1..20usize {
            assert_eq!(lrc_rank(r), ((r as f64) / 2.0 + 1.0).floor() as usize);
        }
        assert_eq!(lrc_rank(2), 2);
        assert_eq!(lrc_rank(5), 3);
    }

    #[test]
    fn lrc_needs_rank_two() {
        let x = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        assert!(matches!(init_nnsvd_lrc(&x, 1), Err(NmfError::BadRank { .. })));
    }

    #[test]
    fn pca_two_points() {
        let x = m(&[&[0.0, 2.0], &[0.0, 0.0]]);
        let model = fit_pca(&x, PcaRank::Fixed(2)).unwrap();
        assert_eq!(model.mean, vec![1.0, 0.0]);
        assert!((model.components[(0, 0)].abs() - 1.0).abs() < 1e-15);
        assert!((model.eigenvalues[0] - 2.0).abs() < 1e-14);
        assert!(model.eigenvalues[1].abs() < 1e-14);
        let alpha = fit_pca(&x, PcaRank::Variance(NPCA_ALPHA)).unwrap();
        assert_eq!(alpha.rank(), 1);
    }

    #[test]
    fn pca_rejects_degenerate_data() {
        let x = m(&[&[1.0, 1.0, 1.0], &[2.0, 2.0, 2.0]]);
        assert!(matches!(fit_pca(&x, PcaRank::Fixed(1)), Err(NmfError::DegenerateData(_))));
        let single = m(&[&[1.0], &[2.0]]);
        assert!(matches!(fit_pca(&single, PcaRank::Fixed(1)), Err(NmfError::DegenerateData(_))));
    }

    #[test]
    fn clipping_and_fallback() {
        let clipped = nonnegative_components(&m(&[&[-1.0, 2.0], &[3.0, 1.0]]), 0);
        assert_eq!(clipped, m(&[&[0.0, 2.0], &[3.0, 1.0]]));
        let annihilated = nonnegative_components(&m(&[&[-1.0, 2.0], &[-3.0, 1.0]]), 0);
        assert!(annihilated.column(0).iter().all(|&v| v > 0.0));
        assert_eq!(annihilated.column(1), vec![2.0, 1.0]);
        let already = m(&[&[0.5, 0.0], &[0.5, 1.0]]);
        assert_eq!(nonnegative_components(&already, 0), already);
    }
}
