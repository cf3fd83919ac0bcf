//! Over-squashing diagnostics for message-passing networks.
//!
//! The crate quantifies how well information flows between nodes of a graph
//! under message passing. It provides:
//!
//! - graph construction, synthetic transfer topologies, and shift operators
//!   ([`graph`]),
//! - a dense symmetric eigensolver and the spectral topology metrics built on
//!   it: spectral gap, Cheeger bounds, effective resistance, access and
//!   commute times ([`spectral`]),
//! - exact MPNN Jacobians with the matching sensitivity and
//!   vanishing-gradient bounds ([`sensitivity`]),
//! - expected-Jacobian obstruction values with access-time, commute-time, and
//!   Cheeger envelopes ([`obstruction`]),
//! - spatial and spectral rewiring with before/after connectivity reports
//!   ([`rewiring`]),
//! - synthetic transfer-task generation and training plus the
//!   signal-propagation experiment ([`harness`]),
//! - walk-importance diffusion operators ([`walk_diffusion`]).
//!
//! All computations are dense, deterministic, and seeded where stochastic.

pub mod graph;
pub mod harness;
pub mod io;
pub mod numeric;
pub mod obstruction;
pub mod rewiring;
pub mod sensitivity;
pub mod spectral;
pub mod walk_diffusion;

pub use graph::{Graph, GraphError, MessagePassingMatrix, ShiftOperatorKind, TransferTopology};
pub use spectral::{SpectralDecomposition, SpectralError, TopologyMetrics};
