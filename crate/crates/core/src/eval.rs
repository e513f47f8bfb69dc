//! Clustering accuracy under the best one-to-one matching of labels.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Largest cluster count solved by exhaustive matching; above it the
/// Hungarian algorithm is used.
pub const EXHAUSTIVE_LIMIT: usize = 12;

/// `counts[a][b]` = number of points with predicted label `a` and true label `b`,
/// padded to a square matrix over compacted label ids.
pub fn confusion(predicted: &[usize], truth: &[usize]) -> Result<Vec<Vec<usize>>> {
    if predicted.len() != truth.len() {
        return Err(Error::invalid(format!(
            "accuracy: {} predicted labels vs {} true labels",
            predicted.len(),
            truth.len()
        )));
    }
    let compact = |labels: &[usize]| -> BTreeMap<usize, usize> {
        let mut ids = BTreeMap::new();
        for &l in labels {
            ids.entry(l).or_insert(0);
        }
        for (i, v) in ids.values_mut().enumerate() {
            *v = i;
        }
        ids
    };
    let pred_ids = compact(predicted);
    let true_ids = compact(truth);
    let k = pred_ids.len().max(true_ids.len());
    let mut counts = vec![vec![0; k]; k];
    for (p, t) in predicted.iter().zip(truth) {
        counts[pred_ids[p]][true_ids[t]] += 1;
    }
    Ok(counts)
}

/// Best total matches over all bijections, by dynamic programming over
/// subsets of true labels. Exact; `O(k^2 2^k)`.
pub fn best_matching_exhaustive(counts: &[Vec<usize>]) -> usize {
    let k = counts.len();
    let mut best = vec![None::<usize>; 1 << k];
    best[0] = Some(0);
    for mask in 0..(1usize << k) {
        let Some(score) = best[mask] else { continue };
        let row = mask.count_ones() as usize;
        if row == k {
            continue;
        }
        for col in 0..k {
            if mask & (1 << col) == 0 {
                let next = mask | (1 << col);
                let cand = score + counts[row][col];
                if best[next].is_none_or(|b| cand > b) {
                    best[next] = Some(cand);
                }
            }
        }
    }
    best[(1 << k) - 1].unwrap_or(0)
}

/// Best total matches via the Hungarian algorithm on the negated counts.
pub fn best_matching_hungarian(counts: &[Vec<usize>]) -> usize {
    let k = counts.len();
    if k == 0 {
        return 0;
    }
    let cost = |i: usize, j: usize| -(counts[i][j] as i64);
    // 1-based potentials formulation; column 0 is a sentinel.
    let mut u = vec![0i64; k + 1];
    let mut v = vec![0i64; k + 1];
    let mut way = vec![0usize; k + 1];
    let mut owner = vec![0usize; k + 1];
    for i in 1..=k {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![i64::MAX; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0;
            for j in 1..=k {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=k {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=k).map(|j| counts[owner[j] - 1][j - 1]).sum()
}

/// Fraction of points correctly classified under the best label matching.
pub fn accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    let counts = confusion(predicted, truth)?;
    if predicted.is_empty() {
        return Err(Error::invalid("accuracy: no labels"));
    }
    let matched = if counts.len() <= EXHAUSTIVE_LIMIT {
        best_matching_exhaustive(&counts)
    } else {
        best_matching_hungarian(&counts)
    };
    Ok(matched as f64 / predicted.len() as f64)
}
