#![allow(dead_code)]

use lglrr::lglrr::{BTensor, NeighborhoodGraph};
use lglrr::numerics::{Matrix, Vector};
use lglrr::GrassmannPoint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

pub fn random_point(d: usize, p: usize, rng: &mut ChaCha8Rng) -> GrassmannPoint {
    GrassmannPoint::from_basis(&gaussian(d, p, rng), p).unwrap()
}

/// Random orthogonal matrix via QR of a Gaussian matrix.
pub fn random_orthogonal(p: usize, rng: &mut ChaCha8Rng) -> Matrix {
    gaussian(p, p, rng).qr().q()
}

pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}

/// Smooth part of the augmented Lagrangian, evaluated directly from its
/// definition with dense `B_i` blocks.
pub fn smooth_objective(
    w: &Matrix,
    y1: &Vector,
    y2: &Matrix,
    beta: f64,
    b: &BTensor,
    graph: &NeighborhoodGraph,
) -> f64 {
    let n = w.nrows();
    let mut total = 0.0;
    for i in 0..n {
        let bi = b.dense(i);
        for j in 0..n {
            for k in 0..n {
                total += 0.5 * w[(i, j)] * bi[(j, k)] * w[(i, k)];
            }
        }
    }
    for i in 0..n {
        let r = w.row(i).sum() - 1.0;
        total += y1[i] * r + 0.5 * beta * r * r;
    }
    for i in 0..n {
        for j in 0..n {
            if graph.in_omega(i, j) {
                total += y2[(i, j)] * w[(i, j)] + 0.5 * beta * w[(i, j)] * w[(i, j)];
            }
        }
    }
    total
}

/// Central finite differences of [`smooth_objective`] with respect to `W`.
pub fn finite_difference_gradient(
    w: &Matrix,
    y1: &Vector,
    y2: &Matrix,
    beta: f64,
    b: &BTensor,
    graph: &NeighborhoodGraph,
    h: f64,
) -> Matrix {
    let n = w.nrows();
    let mut g = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut plus = w.clone();
            plus[(i, j)] += h;
            let mut minus = w.clone();
            minus[(i, j)] -= h;
            g[(i, j)] = (smooth_objective(&plus, y1, y2, beta, b, graph)
                - smooth_objective(&minus, y1, y2, beta, b, graph))
                / (2.0 * h);
        }
    }
    g
}

/// Singular value shrinkage built from nalgebra's full SVD, independent of
/// the crate's sorted thin SVD.
pub fn svt_oracle(m: &Matrix, tau: f64) -> Matrix {
    let svd = m.clone().svd(true, true);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let shrunk = svd.singular_values.map(|s| (s - tau).max(0.0));
    u * Matrix::from_diagonal(&shrunk) * vt
}

/// Maximum over all label permutations, by explicit enumeration.
pub fn permutation_accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    let k = predicted
        .iter()
        .chain(truth)
        .copied()
        .max()
        .map_or(0, |m| m + 1);
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = 0;
    permute(&mut perm, 0, &mut |p| {
        let hits = predicted
            .iter()
            .zip(truth)
            .filter(|(a, b)| p[**a] == **b)
            .count();
        best = best.max(hits);
    });
    best as f64 / predicted.len() as f64
}

fn permute(perm: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == perm.len() {
        visit(perm);
        return;
    }
    for i in start..perm.len() {
        perm.swap(start, i);
        permute(perm, start + 1, visit);
        perm.swap(start, i);
    }
}
