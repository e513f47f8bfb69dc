//! Dense linear algebra used throughout the crate.
//!
//! Matrices are `nalgebra` types; factorizations are delegated to `faer`.
//! This module pins down the
//! conventions the rest of the code relies on: singular values sorted in
//! nonincreasing order, eigenvalues ascending, and a deterministic sign for
//! every singular/eigen vector (first entry of significant magnitude is
//! positive).

use faer::{Mat, MatRef, Side};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Tolerance on `|a_ij - a_ji|` accepted by [`sym_eig`].
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Relative singular value cut-off used by [`small_inverse`].
pub const SINGULAR_RATIO: f64 = 1e-12;

const KMEANS_MAX_ITERS: usize = 300;

pub const DEFAULT_KMEANS_RESTARTS: usize = 10;

/// Thin singular value decomposition `A = U diag(S) V^T`, with `k = min(m, n)`.
#[derive(Debug, Clone)]
pub struct ThinSvd {
    pub u: Matrix,
    pub s: Vector,
    pub v: Matrix,
}

impl ThinSvd {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for (j, mut col) in us.column_iter_mut().enumerate() {
            col *= self.s[j];
        }
        us * self.v.transpose()
    }
}

pub(crate) fn ensure_finite(a: &Matrix, what: &str) -> Result<()> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::invalid(format!("{what}: empty matrix")));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("{what}: non-finite entry")));
    }
    Ok(())
}

/// Flip the sign of column `j` of `primary` (and of the paired column in
/// `partner`) so that its first entry of significant magnitude is positive.
fn fix_column_sign(primary: &mut Matrix, partner: Option<&mut Matrix>, j: usize) {
    let col = primary.column(j);
    let scale = col.amax();
    if scale == 0.0 {
        return;
    }
    let pivot = col.iter().copied().find(|x| x.abs() > 1e-8 * scale);
    if matches!(pivot, Some(x) if x < 0.0) {
        primary.column_mut(j).neg_mut();
        if let Some(p) = partner {
            p.column_mut(j).neg_mut();
        }
    }
}

pub fn thin_svd(a: &Matrix) -> Result<ThinSvd> {
    ensure_finite(a, "thin_svd")?;
    let svd = to_faer(a)
        .thin_svd()
        .map_err(|e| Error::invalid(format!("thin_svd: factorization failed ({e:?})")))?;
    let k = a.nrows().min(a.ncols());
    let values = svd.S().column_vector();
    let mut u = from_faer(svd.U());
    let mut v = from_faer(svd.V());
    let s = Vector::from_fn(k, |j, _| values[j].max(0.0));
    for j in 0..k {
        fix_column_sign(&mut u, Some(&mut v), j);
    }
    Ok(ThinSvd { u, s, v })
}

/// Singular values only, nonincreasing.
pub fn singular_values(a: &Matrix) -> Result<Vector> {
    ensure_finite(a, "singular_values")?;
    let values = to_faer(a)
        .singular_values()
        .map_err(|e| Error::invalid(format!("singular_values: factorization failed ({e:?})")))?;
    Ok(Vector::from_vec(values))
}

fn to_faer(a: &Matrix) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(m: MatRef<'_, f64>) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Eigendecomposition of a symmetric matrix. Eigenvalues are returned in
/// ascending order; eigenvectors are the matching columns.
pub fn sym_eig(a: &Matrix) -> Result<(Vector, Matrix)> {
    ensure_finite(a, "sym_eig")?;
    if !a.is_square() {
        return Err(Error::invalid(format!(
            "sym_eig: matrix is {}x{}, not square",
            a.nrows(),
            a.ncols()
        )));
    }
    let n = a.nrows();
    let scale = a.amax().max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if (a[(i, j)] - a[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::invalid(format!(
                    "sym_eig: asymmetric at ({i}, {j}): {} vs {}",
                    a[(i, j)],
                    a[(j, i)]
                )));
            }
        }
    }
    // Average out sub-tolerance asymmetry before factorizing.
    let sym = (a + a.transpose()) * 0.5;
    let eig = to_faer(&sym)
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::invalid(format!("sym_eig: factorization failed ({e:?})")))?;
    let diag = eig.S().column_vector();
    let values = Vector::from_fn(n, |i, _| diag[i]);
    let mut vectors = from_faer(eig.U());
    for j in 0..n {
        fix_column_sign(&mut vectors, None, j);
    }
    Ok((values, vectors))
}

/// Inverse of a small square matrix, refusing numerically singular input.
pub fn small_inverse(a: &Matrix) -> Result<Matrix> {
    ensure_finite(a, "small_inverse")?;
    if !a.is_square() {
        return Err(Error::invalid(format!(
            "small_inverse: matrix is {}x{}, not square",
            a.nrows(),
            a.ncols()
        )));
    }
    let sv = singular_values(a)?;
    let largest = sv.max();
    let smallest = sv.min();
    if largest == 0.0 || smallest < SINGULAR_RATIO * largest {
        let ratio = if largest == 0.0 { 0.0 } else { smallest / largest };
        return Err(Error::SingularMatrix { ratio });
    }
    a.clone()
        .try_inverse()
        .ok_or(Error::SingularMatrix { ratio: smallest / largest })
}

/// Outcome of [`kmeans_fit`]: the best clustering over all restarts.
#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub labels: Vec<usize>,
    /// `k x dim`, one centroid per row.
    pub centroids: Matrix,
    pub inertia: f64,
}

fn sq_dist_row(points: &Matrix, i: usize, centroids: &Matrix, c: usize) -> f64 {
    points
        .row(i)
        .iter()
        .zip(centroids.row(c).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// Nearest centroid for row `i`; ties go to the lowest cluster id.
fn nearest(points: &Matrix, i: usize, centroids: &Matrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centroids.nrows() {
        let d = sq_dist_row(points, i, centroids, c);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

pub(crate) fn assign_nearest(points: &Matrix, i: usize, centroids: &Matrix) -> usize {
    nearest(points, i, centroids).0
}

fn seed_centroids(points: &Matrix, k: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let n = points.nrows();
    let mut centroids = Matrix::zeros(k, points.ncols());
    let first = rng.random_range(0..n);
    centroids.set_row(0, &points.row(first));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist_row(points, i, &centroids, 0)).collect();

    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centroids.set_row(c, &points.row(pick));
        for (i, slot) in d2.iter_mut().enumerate() {
            *slot = slot.min(sq_dist_row(points, i, &centroids, c));
        }
    }
    centroids
}

fn lloyd(points: &Matrix, mut centroids: Matrix) -> KMeansFit {
    let n = points.nrows();
    let k = centroids.nrows();
    let mut labels = vec![usize::MAX; n];

    for _ in 0..KMEANS_MAX_ITERS {
        let mut changed = false;
        for i in 0..n {
            let c = assign_nearest(points, i, &centroids);
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }

        let mut sums = Matrix::zeros(k, points.ncols());
        let mut counts = vec![0usize; k];
        for i in 0..n {
            let mut row = sums.row_mut(labels[i]);
            row += points.row(i);
            counts[labels[i]] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                let mean = sums.row(c) / counts[c] as f64;
                centroids.set_row(c, &mean);
            } else {
                // empty cluster: move it onto the worst-served point
                let (far, _) = (0..n)
                    .map(|i| (i, sq_dist_row(points, i, &centroids, labels[i])))
                    .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
                centroids.set_row(c, &points.row(far));
                labels[far] = c;
            }
        }
    }

    let inertia = (0..n)
        .map(|i| sq_dist_row(points, i, &centroids, labels[i]))
        .sum();
    KMeansFit {
        labels,
        centroids,
        inertia,
    }
}

/// Seeded k-means (k-means++ seeding, Lloyd iterations), keeping the restart
/// with the smallest within-cluster sum of squares.
pub fn kmeans_fit(points: &Matrix, k: usize, restarts: usize, seed: u64) -> Result<KMeansFit> {
    ensure_finite(points, "kmeans")?;
    let n = points.nrows();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("kmeans: need 1 <= k <= n, got k={k}, n={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansFit> = None;
    for _ in 0..restarts.max(1) {
        let fit = lloyd(points, seed_centroids(points, k, &mut rng));
        if best.as_ref().is_none_or(|b| fit.inertia < b.inertia) {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart"))
}

pub fn kmeans(points: &Matrix, k: usize, restarts: usize, seed: u64) -> Result<Vec<usize>> {
    kmeans_fit(points, k, restarts, seed).map(|f| f.labels)
}
