//! Clustering of image sets and video clips as points on the Grassmann
//! manifold.
//!
//! Each set is summarized by the span of its leading singular vectors
//! ([`data`]). Every point is then written as an affine combination of its
//! nearest neighbors in its own tangent space, with a nuclear-norm penalty on
//! the coefficient matrix ([`lglrr`]). The symmetrized coefficients feed a
//! normalized-cut spectral clustering ([`spectral`]).

pub mod data;
pub mod error;
pub mod eval;
pub mod grassmann;
pub mod lglrr;
pub mod numerics;
pub mod pipeline;
pub mod spectral;

pub use error::{Error, Result};
pub use grassmann::{GrassmannPoint, TangentVector};
pub use numerics::Matrix;
