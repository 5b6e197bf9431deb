//! Clustering-based seeding: K-means (four H variants), fuzzy C-means and
//! closeness-to-rank-one hierarchical clustering.

use rand::seq::index;

use super::{check_nonnegative, check_rank, derive_seed, rng_for, uniform_matrix};
use crate::error::{NmfError, Result};
use crate::linalg::{frobenius_norm, norm2, truncated_svd, DenseMatrix, Rank};
use crate::solvers::{FactorPair, Origin};

pub const DEFAULT_KMEANS_ITER: usize = 100;
pub const DEFAULT_FUZZIFIER: f64 = 2.0;
pub const DEFAULT_FCM_ITER: usize = 200;
pub const DEFAULT_FCM_TOL: f64 = 1e-9;

/// Result of clustering the columns of a data matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// `m × k`, one centre per column.
    pub centroids: DenseMatrix,
    /// Cluster index of every data column.
    pub assignment: Vec<usize>,
    /// Final objective value.
    pub objective: f64,
    /// Objective after seeding and after every centroid update.
    pub history: Vec<f64>,
}

/// Soft assignments `u` (`k × n`); every column sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyMembership {
    pub u: DenseMatrix,
    pub fuzzifier: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn columns(x: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..x.cols()).map(|j| x.column(j)).collect()
}

fn nearest(point: &[f64], centres: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centre) in centres.iter().enumerate() {
        let d = sq_dist(point, centre);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn kmeans_objective(points: &[Vec<f64>], centres: &[Vec<f64>], assignment: &[usize]) -> f64 {
    points
        .iter()
        .zip(assignment)
        .map(|(p, &c)| sq_dist(p, &centres[c]))
        .sum()
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(NmfError::BadK { k, n });
    }
    Ok(())
}

/// Lloyd's algorithm on the columns of `x`, seeded with `k` distinct random
/// columns. Empty clusters are re-seeded with the point farthest from its
/// centre. Stops when the assignment no longer changes or after `max_iter`
/// centroid updates.
pub fn kmeans(x: &DenseMatrix, k: usize, seed: u64, max_iter: usize) -> Result<Clustering> {
    let (m, n) = x.shape();
    check_k(k, n)?;
    let points = columns(x);
    let mut rng = rng_for(seed);
    let mut centres: Vec<Vec<f64>> = index::sample(&mut rng, n, k)
        .into_iter()
        .map(|j| points[j].clone())
        .collect();
    let mut assignment: Vec<usize> = points.iter().map(|p| nearest(p, &centres).0).collect();
    let mut history = vec![kmeans_objective(&points, &centres, &assignment)];

    for _ in 0..max_iter {
        update_means(&points, &mut centres, &mut assignment, m);
        history.push(kmeans_objective(&points, &centres, &assignment));
        let next: Vec<usize> = points.iter().map(|p| nearest(p, &centres).0).collect();
        if next == assignment {
            break;
        }
        assignment = next;
    }
    let objective = kmeans_objective(&points, &centres, &assignment);
    Ok(Clustering {
        centroids: DenseMatrix::from_columns(&centres)?,
        assignment,
        objective,
        history,
    })
}

fn update_means(points: &[Vec<f64>], centres: &mut [Vec<f64>], assignment: &mut [usize], m: usize) {
    let k = centres.len();
    let recompute = |centres: &mut [Vec<f64>], assignment: &[usize]| {
        let mut sums = vec![vec![0.0; m]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(assignment.iter()) {
            counts[c] += 1;
            sums[c].iter_mut().zip(p).for_each(|(s, v)| *s += v);
        }
        for c in 0..k {
            if counts[c] > 0 {
                centres[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        counts
    };
    let mut counts = recompute(centres, assignment);
    while let Some(empty) = counts.iter().position(|&c| c == 0) {
        let donor = (0..points.len())
            .filter(|&i| counts[assignment[i]] > 1)
            .max_by(|&a, &b| {
                let da = sq_dist(&points[a], &centres[assignment[a]]);
                let db = sq_dist(&points[b], &centres[assignment[b]]);
                da.total_cmp(&db).then(b.cmp(&a))
            });
        let Some(i) = donor else { break };
        assignment[i] = empty;
        centres[empty] = points[i].clone();
        counts = recompute(centres, assignment);
    }
}

/// Membership of every column of `x` in each centre:
/// `u_kq = 1 / Σ_j (d_kq / d_jq)^{2/(f−1)}`. A point sitting on a centre
/// belongs to it (the lowest-index one when several coincide).
pub fn fuzzy_memberships(x: &DenseMatrix, centroids: &DenseMatrix, fuzzifier: f64) -> Result<DenseMatrix> {
    if !(fuzzifier > 1.0) {
        return Err(NmfError::InvalidParameter(format!(
            "fuzzifier must exceed 1, got {fuzzifier}"
        )));
    }
    if x.rows() != centroids.rows() {
        return Err(NmfError::Shape("centroid length differs from data rows".into()));
    }
    let k = centroids.cols();
    let n = x.cols();
    let centres = columns(centroids);
    let exponent = 1.0 / (fuzzifier - 1.0);
    let mut u = DenseMatrix::zeros(k, n);
    for q in 0..n {
        let p = x.column(q);
        let d: Vec<f64> = centres.iter().map(|c| sq_dist(&p, c)).collect();
        if let Some(hit) = d.iter().position(|&v| v == 0.0) {
            u[(hit, q)] = 1.0;
            continue;
        }
        // (d_k/d_j)^{2/(f-1)} with squared distances becomes (d²_k/d²_j)^{1/(f-1)}.
        let inv: Vec<f64> = d.iter().map(|&v| v.powf(-exponent)).collect();
        let total: f64 = inv.iter().sum();
        for c in 0..k {
            u[(c, q)] = inv[c] / total;
        }
    }
    Ok(u)
}

/// Fuzzy C-means on the columns of `x`.
pub fn fcm(
    x: &DenseMatrix,
    k: usize,
    fuzzifier: f64,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> Result<(Clustering, FuzzyMembership)> {
    let (m, n) = x.shape();
    check_k(k, n)?;
    if !(fuzzifier > 1.0) {
        return Err(NmfError::InvalidParameter(format!(
            "fuzzifier must exceed 1, got {fuzzifier}"
        )));
    }
    let points = columns(x);
    let mut rng = rng_for(seed);
    let seeds: Vec<Vec<f64>> = index::sample(&mut rng, n, k)
        .into_iter()
        .map(|j| points[j].clone())
        .collect();
    let mut centroids = DenseMatrix::from_columns(&seeds)?;
    let mut u = fuzzy_memberships(x, &centroids, fuzzifier)?;
    let objective = |u: &DenseMatrix, c: &DenseMatrix| -> f64 {
        let centres = columns(c);
        let mut total = 0.0;
        for q in 0..n {
            for (kk, centre) in centres.iter().enumerate() {
                total += u[(kk, q)].powf(fuzzifier) * sq_dist(&points[q], centre);
            }
        }
        total
    };
    let mut history = vec![objective(&u, &centroids)];

    for _ in 0..max_iter {
        let mut next = DenseMatrix::zeros(m, k);
        for c in 0..k {
            let weights: Vec<f64> = (0..n).map(|q| u[(c, q)].powf(fuzzifier)).collect();
            let total: f64 = weights.iter().sum();
            if total == 0.0 {
                next.set_column(c, &centroids.column(c));
                continue;
            }
            let mut centre = vec![0.0; m];
            for (p, w) in points.iter().zip(&weights) {
                centre.iter_mut().zip(p).for_each(|(s, v)| *s += w * v);
            }
            centre.iter_mut().for_each(|s| *s /= total);
            next.set_column(c, &centre);
        }
        centroids = next;
        let u_next = fuzzy_memberships(x, &centroids, fuzzifier)?;
        let change = u_next
            .data()
            .iter()
            .zip(u.data())
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        u = u_next;
        history.push(objective(&u, &centroids));
        if change < tol {
            break;
        }
    }

    let assignment: Vec<usize> = (0..n)
        .map(|q| {
            (0..k)
                .max_by(|&a, &b| u[(a, q)].total_cmp(&u[(b, q)]).then(b.cmp(&a)))
                .expect("k >= 1")
        })
        .collect();
    let objective = *history.last().expect("non-empty history");
    Ok((
        Clustering {
            centroids,
            assignment,
            objective,
            history,
        },
        FuzzyMembership { u, fuzzifier },
    ))
}

/// Closeness to rank one, `σ₁² / ‖block‖_F²`.
pub fn cro_measure(block: &DenseMatrix) -> Result<f64> {
    let total = frobenius_norm(block).powi(2);
    if total == 0.0 {
        return Err(NmfError::ZeroMatrix);
    }
    let svd = truncated_svd(block, Rank::new(1)?)?;
    Ok((svd.sigma[0] * svd.sigma[0] / total).min(1.0))
}

/// One agglomeration step of [`cro_cluster`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    /// Label (lowest row index) of the surviving cluster.
    pub a: usize,
    /// Label of the cluster absorbed into `a`.
    pub b: usize,
    pub cro: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CroDendrogram {
    pub merges: Vec<Merge>,
    /// Row indices of each final cluster, ordered by lowest row.
    pub clusters: Vec<Vec<usize>>,
    /// Final cluster index of every row.
    pub membership: Vec<usize>,
}

const CRO_TIE: f64 = 1e-12;

fn pair_cro(x: &DenseMatrix, a: &[usize], b: &[usize]) -> Result<f64> {
    let rows: Vec<usize> = a.iter().chain(b).copied().collect();
    let block = x.select_rows(&rows);
    match cro_measure(&block) {
        Err(NmfError::ZeroMatrix) => Ok(1.0),
        other => other,
    }
}

/// Agglomerates the rows of `x` by repeatedly merging the pair of clusters
/// whose union is closest to rank one, until `r` clusters remain. Ties
/// (within 1e-12) go to the lowest pair of cluster labels.
pub fn cro_cluster(x: &DenseMatrix, r: usize) -> Result<CroDendrogram> {
    let m = x.rows();
    if r == 0 || r > m {
        return Err(NmfError::BadRank {
            rank: r,
            rows: m,
            cols: x.cols(),
        });
    }
    let mut clusters: Vec<Vec<usize>> = (0..m).map(|i| vec![i]).collect();
    let mut score = vec![vec![0.0; m]; m];
    for a in 0..m {
        for b in a + 1..m {
            score[a][b] = pair_cro(x, &clusters[a], &clusters[b])?;
        }
    }
    let mut merges = Vec::with_capacity(m - r);
    while clusters.len() > r {
        let len = clusters.len();
        let mut best = (0, 1, f64::NEG_INFINITY);
        for a in 0..len {
            for b in a + 1..len {
                if score[a][b] > best.2 + CRO_TIE {
                    best = (a, b, score[a][b]);
                }
            }
        }
        let (a, b, cro) = best;
        merges.push(Merge {
            a: clusters[a][0],
            b: clusters[b][0],
            cro,
        });
        let absorbed = clusters.remove(b);
        clusters[a].extend(absorbed);
        clusters[a].sort_unstable();
        score.remove(b);
        for row in score.iter_mut() {
            row.remove(b);
        }
        for other in 0..clusters.len() {
            if other == a {
                continue;
            }
            let (lo, hi) = (a.min(other), a.max(other));
            score[lo][hi] = pair_cro(x, &clusters[lo], &clusters[hi])?;
        }
    }
    let mut membership = vec![0; m];
    for (c, rows) in clusters.iter().enumerate() {
        for &i in rows {
            membership[i] = c;
        }
    }
    Ok(CroDendrogram {
        merges,
        clusters,
        membership,
    })
}

/// How H⁰ is built from the K-means basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KmeansVariant {
    /// Uniform random H.
    RandomH,
    /// `H = |WᵀX|`.
    AbsProjection,
    /// `H = max(WᵀX, 0)`.
    ClippedProjection,
    /// Fuzzy memberships of the data in the K-means centres.
    Fuzzy,
}

/// `|WᵀX|` or `max(WᵀX, 0)` for the two projection variants.
pub fn projection_h(w: &DenseMatrix, x: &DenseMatrix, variant: KmeansVariant) -> Result<DenseMatrix> {
    let wtx = w.t_matmul(x)?;
    match variant {
        KmeansVariant::AbsProjection => Ok(wtx.abs()),
        KmeansVariant::ClippedProjection => Ok(wtx.positive_part()),
        _ => Err(NmfError::InvalidParameter(
            "projection H is defined for the abs and clipped variants only".into(),
        )),
    }
}

/// K-means seeding: W columns are the centres of the data columns.
///
/// For the projection variants the centres are rescaled to a common length
/// `β` chosen so that `W · H(W)` best matches `X` in least squares; since
/// `H(βŴ) = β H(Ŵ)` the H rule still holds exactly for the returned W.
pub fn init_kmeans(x: &DenseMatrix, r: usize, variant: KmeansVariant, seed: u64) -> Result<FactorPair> {
    let (m, n) = x.shape();
    check_rank(r, m, n)?;
    check_nonnegative(x)?;
    let clustering = kmeans(x, r, seed, DEFAULT_KMEANS_ITER)?;
    let centroids = clustering.centroids;
    let (w, h) = match variant {
        KmeansVariant::RandomH => {
            let mut rng = rng_for(derive_seed(seed, 1));
            let h = uniform_matrix(r, n, &mut rng);
            (centroids, h)
        }
        KmeansVariant::Fuzzy => {
            let u = fuzzy_memberships(x, &centroids, DEFAULT_FUZZIFIER)?;
            (centroids, u)
        }
        KmeansVariant::AbsProjection | KmeansVariant::ClippedProjection => {
            let mut unit = centroids.clone();
            for c in 0..r {
                let col = unit.column(c);
                let len = norm2(&col);
                if len > 0.0 {
                    unit.set_column(c, &col.iter().map(|v| v / len).collect::<Vec<_>>());
                }
            }
            let h_unit = projection_h(&unit, x, variant)?;
            let approx = unit.matmul(&h_unit)?;
            let num: f64 = approx.data().iter().zip(x.data()).map(|(a, b)| a * b).sum();
            let den: f64 = approx.data().iter().map(|a| a * a).sum();
            let beta = if den > 0.0 && num > 0.0 {
                (num / den).sqrt()
            } else {
                1.0
            };
            let w = unit.scale(beta);
            let h = projection_h(&w, x, variant)?;
            (w, h)
        }
    };
    let name = match variant {
        KmeansVariant::RandomH => "kmeans-a",
        KmeansVariant::AbsProjection => "kmeans-b",
        KmeansVariant::ClippedProjection => "kmeans-c",
        KmeansVariant::Fuzzy => "kmeans-d",
    };
    FactorPair::new(w, h, Origin::new(name, Some(seed)))
}

/// FCM seeding: W holds the fuzzy centres, H the membership matrix.
pub fn init_fcm(x: &DenseMatrix, r: usize, seed: u64) -> Result<FactorPair> {
    let (m, n) = x.shape();
    check_rank(r, m, n)?;
    check_nonnegative(x)?;
    let (clustering, membership) = fcm(x, r, DEFAULT_FUZZIFIER, seed, DEFAULT_FCM_ITER, DEFAULT_FCM_TOL)?;
    FactorPair::new(clustering.centroids, membership.u, Origin::new("fcm", Some(seed)))
}

/// CRO seeding: rows are grouped into `r` clusters; each cluster's block is
/// replaced by its best rank-one approximation, with the left vector placed
/// on the cluster's rows of one W column and `σ₁ · |v|ᵀ` as the H row.
pub fn init_cro(x: &DenseMatrix, r: usize) -> Result<FactorPair> {
    let (m, n) = x.shape();
    check_rank(r, m, n)?;
    check_nonnegative(x)?;
    let dendrogram = cro_cluster(x, r)?;
    let mut w = DenseMatrix::zeros(m, r);
    let mut h = DenseMatrix::zeros(r, n);
    for (c, rows) in dendrogram.clusters.iter().enumerate() {
        let block = x.select_rows(rows);
        if frobenius_norm(&block) == 0.0 {
            continue;
        }
        let svd = truncated_svd(&block, Rank::new(1)?)?;
        for (k, &i) in rows.iter().enumerate() {
            w[(i, c)] = svd.u[(k, 0)].abs();
        }
        for j in 0..n {
            h[(c, j)] = svd.sigma[0] * svd.v[(j, 0)].abs();
        }
    }
    FactorPair::new(w, h, Origin::new("cro", None))
}
