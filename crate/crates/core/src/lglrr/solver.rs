use std::io::Write;

use super::{build_btensor, build_neighborhood, BTensor, NeighborhoodGraph};
use crate::error::{Error, Result};
use crate::grassmann::GrassmannPoint;
use crate::numerics::{thin_svd, Matrix, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub lambda: f64,
    /// Neighborhood size `C`.
    pub neighbors: usize,
    pub rho0: f64,
    pub beta0: f64,
    pub beta_max: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub max_iters: usize,
    /// Replaces the suggested proximal constant `max ||B_i||^2 + N + 1`.
    pub eta_w_override: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            neighbors: 10,
            rho0: 1.9,
            beta0: 0.1,
            beta_max: 1e6,
            eps1: 1e-4,
            eps2: 1e-4,
            max_iters: 500,
            eta_w_override: None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda", self.lambda),
            ("rho0", self.rho0),
            ("beta0", self.beta0),
            ("beta_max", self.beta_max),
            ("eps1", self.eps1),
            ("eps2", self.eps2),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.neighbors == 0 {
            return Err(Error::invalid("neighborhood size must be >= 1"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be >= 1"));
        }
        if self.beta0 >= self.beta_max {
            return Err(Error::invalid(format!(
                "beta0 ({}) must be below beta_max ({})",
                self.beta0, self.beta_max
            )));
        }
        if let Some(eta) = self.eta_w_override {
            if !(eta.is_finite() && eta > 0.0) {
                return Err(Error::invalid(format!("eta_w must be positive, got {eta}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    /// Penalty used in this iteration (`beta^(k)`).
    pub beta: f64,
    /// `beta^(k) ||W^(k+1) - W^(k)||_F`
    pub primal_change: f64,
    /// `||W^(k+1) 1 - 1||_2`
    pub affine_residual: f64,
}

#[derive(Debug, Clone)]
pub struct SolverState {
    /// Last iterate before the final projection.
    pub w: Matrix,
    pub y1: Vector,
    /// Multiplier for `P_Omega(W) = 0`; zero off `Omega`.
    pub y2: Matrix,
    pub beta: f64,
    pub iter: usize,
    pub eta_w: f64,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
}

impl SolverState {
    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "iter,beta,primal_change,affine_residual")?;
        for row in &self.trace {
            writeln!(
                out,
                "{},{:e},{:e},{:e}",
                row.iter, row.beta, row.primal_change, row.affine_residual
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    /// Coefficients with `Omega` entries zeroed and rows summing to one.
    pub w: Matrix,
    pub state: SolverState,
    pub graph: NeighborhoodGraph,
}

/// `eta_W = max_i ||B_i||_2^2 + N + 1`.
pub fn suggested_eta(b: &BTensor) -> Result<f64> {
    let max_norm = b.spectral_norms()?.into_iter().fold(0.0_f64, f64::max);
    Ok(max_norm * max_norm + b.len() as f64 + 1.0)
}

/// Gradient of the smooth part of the augmented Lagrangian:
///
/// `W (.) B + Y1 1^T + beta (W 1 - 1) 1^T + P_Omega(Y2) + beta P_Omega(W)`,
///
/// where row `i` of `W (.) B` is `w_i B_i`.
pub fn gradient_f(
    w: &Matrix,
    y1: &Vector,
    y2: &Matrix,
    beta: f64,
    b: &BTensor,
    graph: &NeighborhoodGraph,
) -> Matrix {
    let n = w.nrows();
    let mut grad = Matrix::zeros(n, n);
    for i in 0..n {
        let block = b.block(i);
        for (a, &col) in block.support.iter().enumerate() {
            let mut acc = 0.0;
            for (c, &k) in block.support.iter().enumerate() {
                acc += w[(i, k)] * block.gram[(c, a)];
            }
            grad[(i, col)] = acc;
        }
        let row_shift = y1[i] + beta * (w.row(i).sum() - 1.0);
        for j in 0..n {
            grad[(i, j)] += row_shift;
            if graph.in_omega(i, j) {
                grad[(i, j)] += y2[(i, j)] + beta * w[(i, j)];
            }
        }
    }
    grad
}

/// Singular value thresholding: `U max(S - tau, 0) V^T`.
pub fn svt(m: &Matrix, tau: f64) -> Result<Matrix> {
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::invalid(format!("svt: tau must be >= 0, got {tau}")));
    }
    let svd = thin_svd(m)?;
    let mut u = svd.u;
    for (j, mut col) in u.column_iter_mut().enumerate() {
        col *= (svd.s[j] - tau).max(0.0);
    }
    Ok(u * svd.v.transpose())
}

/// Zero every `Omega` entry and rescale each row to sum to one.
///
/// A row whose remaining mass is too small to rescale is instead shifted
/// uniformly over its neighborhood.
pub fn project_constraints(w: &Matrix, graph: &NeighborhoodGraph) -> Matrix {
    let n = w.nrows();
    let mut out = w.clone();
    for i in 0..n {
        for j in 0..n {
            if graph.in_omega(i, j) {
                out[(i, j)] = 0.0;
            }
        }
        let support = graph.neighbors(i);
        let sum: f64 = support.iter().map(|&j| out[(i, j)]).sum();
        if sum.abs() > 1e-8 {
            for &j in support {
                out[(i, j)] /= sum;
            }
        } else {
            let shift = (1.0 - sum) / support.len() as f64;
            for &j in support {
                out[(i, j)] += shift;
            }
        }
    }
    out
}

pub fn solve(points: &[GrassmannPoint], config: &SolverConfig) -> Result<Solution> {
    config.validate()?;
    let graph = build_neighborhood(points, config.neighbors)?;
    let b = build_btensor(points, &graph)?;
    solve_with(&b, &graph, config)
}

/// Run the iteration on a precomputed B-tensor. The graph must be the one the
/// tensor was built from.
pub fn solve_with(b: &BTensor, graph: &NeighborhoodGraph, config: &SolverConfig) -> Result<Solution> {
    config.validate()?;
    let n = graph.len();
    if n < 2 {
        return Err(Error::invalid("solve: need at least 2 points"));
    }
    if b.len() != n {
        return Err(Error::invalid("solve: B-tensor and graph sizes differ"));
    }
    let eta = match config.eta_w_override {
        Some(eta) => eta,
        None => suggested_eta(b)?,
    };

    let mut w = Matrix::zeros(n, n);
    let mut y1 = Vector::zeros(n);
    let mut y2 = Matrix::zeros(n, n);
    let mut beta = config.beta0;
    let mut trace = Vec::new();
    let mut converged = false;
    let ones = Vector::from_element(n, 1.0);

    for k in 0..config.max_iters {
        let grad = gradient_f(&w, &y1, &y2, beta, b, graph);
        let step = 1.0 / (eta * beta);
        let target = &w - grad * step;
        let next = svt(&target, config.lambda * step)?;

        // Multipliers are driven by the fresh iterate; with the previous one
        // the Omega block of the iteration has unit determinant and never damps.
        let affine = &next * &ones - &ones;
        let affine_residual = affine.norm();
        y1 += affine * beta;
        for i in 0..n {
            for j in 0..n {
                if graph.in_omega(i, j) {
                    y2[(i, j)] += beta * next[(i, j)];
                }
            }
        }

        let primal_change = beta * (&next - &w).norm();
        trace.push(TraceRow {
            iter: k + 1,
            beta,
            primal_change,
            affine_residual,
        });
        w = next;

        let rho = if primal_change <= config.eps1 { config.rho0 } else { 1.0 };
        beta = (rho * beta).min(config.beta_max);

        if primal_change <= config.eps1 && affine_residual <= config.eps2 {
            converged = true;
            break;
        }
    }

    let projected = project_constraints(&w, graph);
    Ok(Solution {
        w: projected,
        state: SolverState {
            w,
            y1,
            y2,
            beta,
            iter: trace.len(),
            eta_w: eta,
            converged,
            trace,
        },
        graph: graph.clone(),
    })
}
