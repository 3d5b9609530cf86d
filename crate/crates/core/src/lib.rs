//! Differential operators on oriented hypergraphs.
//!
//! An oriented hypergraph connects groups of vertices: every hyperarc is a
//! pair of disjoint vertex sets `(out, in)`. On top of that structure this
//! crate provides
//!
//! - a weighted vertex gradient, its adjoint and the divergence
//!   ([`operators`]), parameterized by the exponents α, β, γ, ε, η,
//! - the p-Laplacian `Δ_v^p f = div(|∇f|^{p−2} ∇f)` with a composed and a
//!   literal evaluation path,
//! - explicit scale-space flows: free diffusion, renormalized flow towards a
//!   second eigenfunction, and Dirichlet problems ([`dynamics`]),
//! - a dense eigensolver/linear-solve oracle for small instances
//!   ([`spectral_oracle`]),
//! - follower edge-list ingestion and file formats ([`ingest`],
//!   [`persist`]).
//!
//! ```
//! use hyperlap::{assemble, Hyperarc, OperatorParams, OrientedHypergraph, VertexState};
//!
//! let h = OrientedHypergraph::new(
//!     4,
//!     vec![Hyperarc::new([0], [1, 2]), Hyperarc::new([1, 2], [3])],
//!     None,
//! )?;
//! let sys = assemble(&h, OperatorParams::default())?;
//! let f = VertexState(vec![1.0, 2.0, 3.0, 4.0]);
//! assert_eq!(sys.gradient(&f)?.0, vec![1.5, 1.5]);
//! assert_eq!(sys.p_laplacian(&f, 2.0, 0.0)?.0, vec![1.5, 0.0, 0.0, -1.5]);
//! # Ok::<(), hyperlap::Error>(())
//! ```
//!
//! With the default `parallel` feature, operator applications on large
//! instances are spread over a rayon pool. Every output entry is reduced by a
//! single task in a fixed order, so results do not depend on the schedule.

pub mod dynamics;
pub mod error;
pub mod hypergraph;
pub mod ingest;
pub mod operators;
pub mod persist;
pub mod spectral_oracle;
pub mod synth;

pub use dynamics::{
    dirichlet_solve, estimate_step_size, neumann_flow, renormalized_flow, threshold,
    weighted_mean, BoundaryCondition, FlowConfig, FlowResult, StepSize, TraceEntry,
};
pub use error::{Error, Result};
pub use hypergraph::{
    HyperarcState, Hyperarc, InnerProductParams, OrientedHypergraph, VertexId, VertexState,
    Weights,
};
pub use ingest::{ArcList, HyperarcMode, Leader, ParseOptions};
pub use operators::{assemble, Execution, IncidenceSystem, OperatorParams, Variant};
pub use spectral_oracle::{dense_laplacian, dirichlet_linear_solve, eigendecomposition, DenseOperator};
