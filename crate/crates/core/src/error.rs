use alloc::string::String;

use nalgebra::DMatrix;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid robot system: {0}")]
    InvalidSystem(String),

    #[error("invalid relation graph: {0}")]
    InvalidGraph(String),

    #[error("relation graph has no non-zero off-diagonal entry")]
    AllZeroGraph,

    #[error("robots {0} and {1} coincide; spatial epsilon must be positive")]
    CoincidentRobots(usize, usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("singular value decomposition failed to converge")]
    SvdFailed { iterate: DMatrix<f64> },

    #[error("invalid partition request: {0}")]
    InvalidPartition(String),

    #[error("invalid team assignment: {0}")]
    InvalidAssignment(String),

    #[error("event list is empty")]
    NoEvents,

    #[error("could not place robot {robot} clear of walls after {attempts} attempts")]
    PlacementFailed { robot: usize, attempts: usize },
}
