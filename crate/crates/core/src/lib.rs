//! Discrete curvature, potential theory and ends on weighted graphs.
//!
//! The crate computes Bakry-Émery and Ollivier curvature, solves Dirichlet
//! and Green's-function problems on finite truncations of infinite graphs,
//! classifies ends as parabolic or non-parabolic, and checks pointed
//! Gromov-Hausdorff convergence of rooted balls.
//!
//! Graph storage, the Laplacian, `Γ`, `Γ₂` and the simplex solver are generic
//! over [`Scalar`] so the same code runs in `f64` and in exact rationals.

pub mod corpus;
pub mod curvature;
pub mod ends;
pub mod error;
pub mod generators;
pub mod gh;
pub mod graph;
pub mod harmonic;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod report;
pub mod scalar;
pub mod site;

pub use error::{Error, Result};
pub use graph::{Edge, FunctionOnVertices, GraphBuilder, Label, RootedBall, VertexId, VertexSet, WeightedGraph};
pub use scalar::{Rational, Real, Scalar};
pub use site::Site;

/// Double-precision weighted graph.
pub type Graph = WeightedGraph<f64>;
/// Weighted graph with exact rational weights.
pub type ExactGraph = WeightedGraph<Rational>;
/// Double-precision rooted ball.
pub type Ball = RootedBall<f64>;
/// Double-precision vertex function.
pub type Function = FunctionOnVertices<f64>;
