//! End-to-end: points -> coefficients -> affinity -> labels.

use crate::error::Result;
use crate::eval::accuracy;
use crate::grassmann::GrassmannPoint;
use crate::lglrr::{solve, solve_with, BTensor, NeighborhoodGraph, Solution, SolverConfig};
use crate::spectral::{affinity_from_w, ncut};

#[derive(Debug, Clone)]
pub struct ClusteringResult {
    pub predicted: Vec<usize>,
    pub truth: Option<Vec<usize>>,
    pub accuracy: Option<f64>,
    pub solution: Solution,
}

impl ClusteringResult {
    fn new(solution: Solution, clusters: usize, seed: u64, truth: Option<&[usize]>) -> Result<Self> {
        let predicted = ncut(&affinity_from_w(&solution.w)?, clusters, seed)?;
        let accuracy = truth.map(|t| accuracy(&predicted, t)).transpose()?;
        Ok(Self {
            predicted,
            truth: truth.map(<[usize]>::to_vec),
            accuracy,
            solution,
        })
    }
}

pub fn cluster_points(
    points: &[GrassmannPoint],
    config: &SolverConfig,
    clusters: usize,
    seed: u64,
    truth: Option<&[usize]>,
) -> Result<ClusteringResult> {
    ClusteringResult::new(solve(points, config)?, clusters, seed, truth)
}

/// Same as [`cluster_points`] with the neighborhood graph and B-tensor
/// supplied, so sweeps over `lambda` can reuse them.
pub fn cluster_precomputed(
    b: &BTensor,
    graph: &NeighborhoodGraph,
    config: &SolverConfig,
    clusters: usize,
    seed: u64,
    truth: Option<&[usize]>,
) -> Result<ClusteringResult> {
    ClusteringResult::new(solve_with(b, graph, config)?, clusters, seed, truth)
}
