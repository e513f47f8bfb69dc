use rayon::prelude::*;

use super::NeighborhoodGraph;
use crate::error::{Error, Result};
use crate::grassmann::{log_map, GrassmannPoint};
use crate::numerics::{sym_eig, Matrix};

/// Per-point Gram matrices of tangent vectors:
/// `B_i[j, k] = <Log_{X_i}(X_j), Log_{X_i}(X_k)>`.
///
/// Only the `N_i x N_i` block is stored; every other entry of `B_i` is zero.
#[derive(Debug, Clone)]
pub struct BTensor {
    n: usize,
    blocks: Vec<Block>,
}

#[derive(Debug, Clone)]
pub(crate) struct Block {
    /// Global indices of the neighbors, in graph order.
    pub support: Vec<usize>,
    pub gram: Matrix,
}

impl BTensor {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub(crate) fn block(&self, i: usize) -> &Block {
        &self.blocks[i]
    }

    pub fn support(&self, i: usize) -> &[usize] {
        &self.blocks[i].support
    }

    /// Compact `C x C` Gram block of point `i`, indexed like [`BTensor::support`].
    pub fn gram(&self, i: usize) -> &Matrix {
        &self.blocks[i].gram
    }

    /// `B^i_{jk}`.
    pub fn entry(&self, i: usize, j: usize, k: usize) -> f64 {
        let block = &self.blocks[i];
        let pj = block.support.iter().position(|&s| s == j);
        let pk = block.support.iter().position(|&s| s == k);
        match (pj, pk) {
            (Some(a), Some(b)) => block.gram[(a, b)],
            _ => 0.0,
        }
    }

    /// `B_i` expanded to a full `N x N` matrix.
    pub fn dense(&self, i: usize) -> Matrix {
        let block = &self.blocks[i];
        let mut out = Matrix::zeros(self.n, self.n);
        for (a, &j) in block.support.iter().enumerate() {
            for (b, &k) in block.support.iter().enumerate() {
                out[(j, k)] = block.gram[(a, b)];
            }
        }
        out
    }

    /// Spectral norm of each `B_i` (largest eigenvalue magnitude of the PSD block).
    pub fn spectral_norms(&self) -> Result<Vec<f64>> {
        self.blocks
            .iter()
            .map(|b| {
                if b.gram.is_empty() {
                    return Ok(0.0);
                }
                let (vals, _) = sym_eig(&b.gram)?;
                Ok(vals.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
            })
            .collect()
    }
}

/// Compute every `Log_{X_i}(X_j)` with `j` in `N_i` once, then form each
/// Gram block as `L_i^T L_i` where the columns of `L_i` are the flattened logs.
pub fn build_btensor(points: &[GrassmannPoint], graph: &NeighborhoodGraph) -> Result<BTensor> {
    let n = points.len();
    if graph.len() != n {
        return Err(Error::invalid(format!(
            "build_btensor: graph has {} nodes, {} points given",
            graph.len(),
            n
        )));
    }
    let blocks = (0..n)
        .into_par_iter()
        .map(|i| {
            let support = graph.neighbors(i).to_vec();
            let base = &points[i];
            let len = base.ambient_dim() * base.subspace_dim();
            let mut logs = Matrix::zeros(len, support.len());
            for (col, &j) in support.iter().enumerate() {
                let h = log_map(base, &points[j]).map_err(|e| match e {
                    Error::CutLocus { .. } => Error::PairAtCutLocus { i, j },
                    other => other,
                })?;
                logs.column_mut(col).copy_from_slice(h.matrix().as_slice());
            }
            let gram = logs.tr_mul(&logs);
            Ok(Block { support, gram })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BTensor { n, blocks })
}
