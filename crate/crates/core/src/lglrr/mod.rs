//! Localized low-rank representation on the Grassmann manifold.
//!
//! Each point `X_i` is expressed through its `C` nearest neighbors in its own
//! tangent space. The coefficient matrix `W` solves
//!
//! ```text
//! min_W  1/2 sum_i w_i B_i w_i^T + lambda ||W||_*
//! s.t.   W 1 = 1,  P_Omega(W) = 0
//! ```
//!
//! by a linearized augmented Lagrangian iteration whose `W` step is a
//! singular value thresholding.

mod btensor;
mod neighborhood;
mod solver;

pub use btensor::{build_btensor, BTensor};
pub use neighborhood::{build_neighborhood, pairwise_distances, NeighborhoodGraph};
pub use solver::{
    gradient_f, project_constraints, solve, solve_with, suggested_eta, svt, Solution,
    SolverConfig, SolverState, TraceRow,
};
