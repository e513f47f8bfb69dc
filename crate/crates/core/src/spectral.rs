//! Normalized-cut spectral clustering on the coefficient affinity.

use crate::error::{Error, Result};
use crate::numerics::{assign_nearest, kmeans_fit, sym_eig, Matrix, DEFAULT_KMEANS_RESTARTS};

/// Added to every degree so isolated vertices do not divide by zero.
pub const DEGREE_EPS: f64 = 1e-12;

/// Symmetric, nonnegative affinity with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Affinity(Matrix);

impl Affinity {
    pub fn new(a: Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::invalid("affinity must be square"));
        }
        let n = a.nrows();
        for i in 0..n {
            if a[(i, i)] != 0.0 {
                return Err(Error::invalid(format!("affinity diagonal entry {i} is nonzero")));
            }
            for j in 0..n {
                let v = a[(i, j)];
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::invalid(format!("affinity entry ({i}, {j}) = {v}")));
                }
                if v != a[(j, i)] {
                    return Err(Error::invalid(format!("affinity not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self(a))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `(|W| + |W|^T) / 2` with the diagonal cleared.
pub fn affinity_from_w(w: &Matrix) -> Result<Affinity> {
    if !w.is_square() {
        return Err(Error::invalid("affinity_from_w: W must be square"));
    }
    let n = w.nrows();
    let a = Matrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            (w[(i, j)].abs() + w[(j, i)].abs()) / 2.0
        }
    });
    Affinity::new(a)
}

/// Row-normalized embedding from the `r` eigenvectors of
/// `I - D^{-1/2} A D^{-1/2}` with the smallest eigenvalues.
pub fn spectral_embedding(a: &Affinity, r: usize) -> Result<Matrix> {
    let n = a.len();
    if r == 0 || r > n {
        return Err(Error::invalid(format!("ncut: need 1 <= R <= N, got R={r}, N={n}")));
    }
    let am = a.matrix();
    let inv_sqrt: Vec<f64> = (0..n)
        .map(|i| 1.0 / (am.row(i).sum() + DEGREE_EPS).sqrt())
        .collect();
    let laplacian = Matrix::from_fn(n, n, |i, j| {
        let off = am[(i, j)] * inv_sqrt[i] * inv_sqrt[j];
        if i == j {
            1.0 - off
        } else {
            -off
        }
    });
    let (_, vectors) = sym_eig(&laplacian)?;
    let mut emb = vectors.columns(0, r).into_owned();
    for i in 0..n {
        let isolated = am.row(i).sum() == 0.0;
        let norm = emb.row(i).norm();
        if isolated || norm == 0.0 {
            emb.row_mut(i).fill(0.0);
        } else {
            emb.row_mut(i).unscale_mut(norm);
        }
    }
    Ok(emb)
}

/// Cluster labels in `[0, r)`.
///
/// Isolated vertices get a zero embedding row and are attached to the
/// nearest centroid found from the connected vertices.
pub fn ncut(a: &Affinity, r: usize, seed: u64) -> Result<Vec<usize>> {
    let emb = spectral_embedding(a, r)?;
    let n = a.len();
    let connected: Vec<usize> = (0..n).filter(|&i| a.matrix().row(i).sum() > 0.0).collect();

    if connected.len() < r || connected.len() == n {
        return kmeans_fit(&emb, r, DEFAULT_KMEANS_RESTARTS, seed).map(|f| f.labels);
    }
    let sub = Matrix::from_fn(connected.len(), r, |i, j| emb[(connected[i], j)]);
    let fit = kmeans_fit(&sub, r, DEFAULT_KMEANS_RESTARTS, seed)?;
    let mut labels = vec![0; n];
    for (idx, &i) in connected.iter().enumerate() {
        labels[i] = fit.labels[idx];
    }
    for i in (0..n).filter(|i| !connected.contains(i)) {
        labels[i] = assign_nearest(&emb, i, &fit.centroids);
    }
    Ok(labels)
}
