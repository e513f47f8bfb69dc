use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grassmann::{geodesic_distance_sq, GrassmannPoint};
use crate::numerics::Matrix;

/// KNN graph under geodesic distance. The complement of each neighborhood
/// (plus the point itself) forms the support `Omega` on which coefficients
/// are forced to zero.
#[derive(Debug, Clone)]
pub struct NeighborhoodGraph {
    size: usize,
    neighbors: Vec<Vec<usize>>,
    in_neighborhood: Vec<bool>,
    /// Set when the requested size had to be reduced to `N - 1`.
    pub clamped_from: Option<usize>,
}

impl NeighborhoodGraph {
    /// Build from explicit neighbor lists (already ordered by distance).
    pub fn from_lists(neighbors: Vec<Vec<usize>>) -> Result<Self> {
        let n = neighbors.len();
        let size = neighbors.first().map_or(0, Vec::len);
        let mut in_neighborhood = vec![false; n * n];
        for (i, list) in neighbors.iter().enumerate() {
            if list.len() != size {
                return Err(Error::invalid("neighbor lists must all have the same length"));
            }
            for &j in list {
                if j >= n || j == i {
                    return Err(Error::invalid(format!("invalid neighbor {j} for point {i}")));
                }
                if std::mem::replace(&mut in_neighborhood[i * n + j], true) {
                    return Err(Error::invalid(format!("duplicate neighbor {j} for point {i}")));
                }
            }
        }
        Ok(Self {
            size,
            neighbors,
            in_neighborhood,
            clamped_from: None,
        })
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// Neighborhood size `C` actually used.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn is_neighbor(&self, i: usize, j: usize) -> bool {
        self.in_neighborhood[i * self.len() + j]
    }

    /// `(i, j)` is constrained to zero: `j == i` or `j` is outside `i`'s neighborhood.
    pub fn in_omega(&self, i: usize, j: usize) -> bool {
        !self.is_neighbor(i, j)
    }
}

/// Full matrix of squared geodesic distances.
pub fn pairwise_distances(points: &[GrassmannPoint]) -> Result<Matrix> {
    let n = points.len();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i < j {
                        geodesic_distance_sq(&points[i], &points[j])
                    } else {
                        Ok(0.0)
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            d[(i, j)] = rows[i][j];
            d[(j, i)] = rows[i][j];
        }
    }
    Ok(d)
}

/// The `C` nearest neighbors of every point; ties broken by ascending index.
pub fn build_neighborhood(points: &[GrassmannPoint], c: usize) -> Result<NeighborhoodGraph> {
    let n = points.len();
    if n < 2 {
        return Err(Error::invalid(format!("build_neighborhood: need at least 2 points, got {n}")));
    }
    if c == 0 {
        return Err(Error::invalid("build_neighborhood: neighborhood size must be >= 1"));
    }
    let used = c.min(n - 1);
    let dist = pairwise_distances(points)?;
    let neighbors = (0..n)
        .map(|i| {
            let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            others.sort_by(|&a, &b| dist[(i, a)].total_cmp(&dist[(i, b)]).then(a.cmp(&b)));
            others.truncate(used);
            others
        })
        .collect();
    let mut graph = NeighborhoodGraph::from_lists(neighbors)?;
    if used < c {
        graph.clamped_from = Some(c);
    }
    Ok(graph)
}
