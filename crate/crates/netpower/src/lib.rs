//! Network power analysis via symmetric matrix balancing.
//!
//! The central object is the power equation `x = A x^÷`, where `A` is the
//! weighted adjacency matrix of an undirected graph and `x^÷` denotes the
//! entry-wise reciprocal of `x`: a node is powerful when it is connected to
//! nodes that are powerless. Solving the equation is equivalent to finding a
//! positive diagonal `D` such that `D A D` is doubly stochastic, which puts
//! the whole machinery of matrix balancing at our disposal:
//!
//! - [`graph`] holds the sparse symmetric graph and edge-list I/O,
//! - [`operator`] wraps a graph as an instrumented linear operator, with
//!   optional diagonal (`A + αI`) or full (`A + αE`) perturbation,
//! - [`structure`] decides existence and uniqueness of a solution
//!   (support, total support, full indecomposability),
//! - [`balancing`] computes the power vector by Sinkhorn-Knopp and by an
//!   inexact Newton iteration, counting matrix-vector products,
//! - [`measures`] implements the competing node scores (eigenvector
//!   centrality, Bonacich index, Shapley power, Nash bargaining power),
//! - [`stats`] provides the correlation and ranking analytics used to
//!   compare them,
//! - [`generate`] builds the small named graphs and seeded random graphs
//!   used throughout the test and benchmark harnesses.

pub mod balancing;
pub mod generate;
pub mod graph;
pub mod measures;
pub mod operator;
pub mod stats;
pub mod structure;

pub(crate) mod linalg;
pub(crate) mod vecops;

pub use balancing::{
    compute_power, BalanceResult, Normalization, SolveError, SolveMethod, SolverConfig,
};
pub use graph::{Graph, GraphError};
pub use measures::MeasureVector;
pub use operator::{LinearOperator, Perturbation};
pub use structure::StructureReport;
