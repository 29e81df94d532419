//! Relation graphs over a robot system.
//!
//! Each graph is a dense, symmetric, non-negative adjacency matrix with a
//! zero diagonal. Three builders cover the relationships used in practice
//! (inverse distance, line-of-sight communication, shared capabilities);
//! anything else can be wrapped as [`RelationKind::Custom`].

use alloc::format;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::line_of_sight;
use crate::system::RobotSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelationKind {
    Spatial,
    Communication,
    Capability,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationGraph {
    kind: RelationKind,
    adjacency: DMatrix<f64>,
}

// Relative tolerance for accepting an externally supplied matrix as symmetric.
const SYMMETRY_TOL: f64 = 1e-12;

impl RelationGraph {
    pub fn new(kind: RelationKind, adjacency: DMatrix<f64>) -> Result<Self> {
        let n = adjacency.nrows();
        if adjacency.ncols() != n {
            return Err(Error::InvalidGraph(format!(
                "adjacency must be square, got {}x{}",
                n,
                adjacency.ncols()
            )));
        }
        if n == 0 {
            return Err(Error::InvalidGraph("adjacency is empty".into()));
        }
        let scale = adjacency.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            if adjacency[(i, i)] != 0.0 {
                return Err(Error::InvalidGraph(format!("diagonal entry {i} is non-zero")));
            }
            for j in 0..n {
                let v = adjacency[(i, j)];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidGraph(format!(
                        "entry ({i}, {j}) = {v} is negative or not finite"
                    )));
                }
                if (v - adjacency[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::InvalidGraph(format!("entry ({i}, {j}) breaks symmetry")));
                }
            }
        }
        Ok(RelationGraph { kind, adjacency })
    }

    pub fn kind(&self) -> RelationKind {
        self.kind
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn into_adjacency(self) -> DMatrix<f64> {
        self.adjacency
    }

    pub fn dim(&self) -> usize {
        self.adjacency.nrows()
    }

    /// Largest off-diagonal entry.
    pub fn max_weight(&self) -> f64 {
        self.adjacency.iter().fold(0.0, |m: f64, &v| m.max(v))
    }

    /// Same graph with robot `i` relabelled to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> RelationGraph {
        let n = self.dim();
        assert_eq!(perm.len(), n);
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(perm[i], perm[j])] = self.adjacency[(i, j)];
            }
        }
        RelationGraph { kind: self.kind, adjacency: out }
    }
}

fn symmetric_from<F: FnMut(usize, usize) -> Result<f64>>(n: usize, mut weight: F) -> Result<DMatrix<f64>> {
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let w = weight(i, j)?;
            a[(i, j)] = w;
            a[(j, i)] = w;
        }
    }
    Ok(a)
}

/// Inverse-distance graph: `a_ij = 1 / (d_ij + epsilon)`.
///
/// Walls do not affect this graph; distance is plain Euclidean.
pub fn build_spatial_graph(system: &RobotSystem, epsilon: f64) -> Result<RelationGraph> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::InvalidGraph(format!("spatial epsilon must be >= 0, got {epsilon}")));
    }
    let robots = &system.robots;
    let adjacency = symmetric_from(robots.len(), |i, j| {
        let d = robots[i].position.distance(&robots[j].position) + epsilon;
        if d <= 0.0 {
            return Err(Error::CoincidentRobots(i, j));
        }
        Ok(1.0 / d)
    })?;
    RelationGraph::new(RelationKind::Spatial, adjacency)
}

/// Binary communication graph: robots within `radius` with a clear line of sight.
pub fn build_communication_graph(system: &RobotSystem, radius: f64) -> Result<RelationGraph> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidGraph(format!(
            "communication radius must be positive, got {radius}"
        )));
    }
    let robots = &system.robots;
    let env = &system.environment;
    let adjacency = symmetric_from(robots.len(), |i, j| {
        let (a, b) = (&robots[i].position, &robots[j].position);
        let linked = a.distance(b) <= radius && line_of_sight(a, b, env);
        Ok(if linked { 1.0 } else { 0.0 })
    })?;
    RelationGraph::new(RelationKind::Communication, adjacency)
}

/// Capability overlap graph: `a_ij = |C_i ∩ C_j|`.
pub fn build_capability_graph(system: &RobotSystem) -> Result<RelationGraph> {
    let robots = &system.robots;
    let adjacency = symmetric_from(robots.len(), |i, j| {
        Ok(robots[i].capabilities.intersection(robots[j].capabilities).len() as f64)
    })?;
    RelationGraph::new(RelationKind::Capability, adjacency)
}

/// Scales a graph so its largest entry is exactly 1.
pub fn normalize_graph(graph: &RelationGraph) -> Result<RelationGraph> {
    let max = graph.max_weight();
    if max <= 0.0 {
        return Err(Error::AllZeroGraph);
    }
    Ok(RelationGraph {
        kind: graph.kind,
        adjacency: graph.adjacency.map(|v| v / max),
    })
}
