//! Fusing heterogeneous relation graphs over a multi-robot system into a
//! single bistochastic matrix, cutting that matrix into sensor-coverage
//! teams, and scoring team assignments in a seeded coverage simulation.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, the command
//! line and parallel batch runs live in the `teamfuse` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod fusion;
pub mod geometry;
pub mod graph;
pub mod partition;
pub mod prox;
pub mod sim;
pub mod sweep;
pub mod system;

pub use error::{Error, Result};
pub use fusion::{solve, SolveResult, SolverConfig, SolverState};
pub use geometry::{line_of_sight, Position, Wall};
pub use graph::{
    build_capability_graph, build_communication_graph, build_spatial_graph, normalize_graph,
    RelationGraph, RelationKind,
};
pub use partition::{partition, TeamAssignment};
pub use system::{CapabilitySet, Environment, RobotSpec, RobotSystem};
