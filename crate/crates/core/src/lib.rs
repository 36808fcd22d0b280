//! Uniform spanning trees on planar lattices: samplers, exact oracles, the
//! Poissonian cutting dynamics, structure graphs and their gluing chains, and
//! Monte Carlo estimators for the associated scaling exponents.

pub mod dsu;
pub mod dynamics;
pub mod error;
pub mod estimators;
pub mod forest;
pub mod geometry;
pub mod graph;
pub mod lattice;
pub mod rng;
pub mod sampling;
pub mod stats;
pub mod structure;

pub use error::{Error, Result};
pub use forest::{Component, ForestAdjacency, ForestHost, SpanningForest};
pub use graph::{GraphEdge, WeightedGraph};
pub use lattice::{BoundaryCondition, DomainSpec, Duality, LatticeDomain};
pub use sampling::{LerwPath, Root};
