use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::Position;
use crate::partition::TeamAssignment;
use crate::system::{CapabilitySet, RobotSystem};

use super::Event;

fn check_covers(system: &RobotSystem, assignment: &TeamAssignment) -> Result<()> {
    if assignment.n_robots() != system.len() {
        return Err(Error::InvalidAssignment(format!(
            "assignment covers {} robots, system has {}",
            assignment.n_robots(),
            system.len()
        )));
    }
    Ok(())
}

/// Index of the robot closest to `p`; ties go to the lower id.
pub fn nearest_robot(system: &RobotSystem, p: &Position) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, r) in system.robots.iter().enumerate() {
        let d = r.position.distance_squared(p);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Union of member capabilities, per team.
pub fn team_capabilities(system: &RobotSystem, assignment: &TeamAssignment) -> Vec<CapabilitySet> {
    assignment
        .teams()
        .iter()
        .map(|team| {
            team.iter()
                .fold(CapabilitySet::EMPTY, |acc, &i| acc.union(system.robots[i].capabilities))
        })
        .collect()
}

/// Fraction of events whose region's team can sense them.
///
/// An event belongs to the team of its nearest robot, i.e. to the union of
/// that team's Voronoi cells.
pub fn detection_rate(system: &RobotSystem, assignment: &TeamAssignment, events: &[Event]) -> Result<f64> {
    check_covers(system, assignment)?;
    if events.is_empty() {
        return Err(Error::NoEvents);
    }
    let caps = team_capabilities(system, assignment);
    let detected = events
        .iter()
        .filter(|e| {
            let team = assignment.team(nearest_robot(system, &e.position));
            caps[team].contains(e.event_type)
        })
        .count();
    Ok(detected as f64 / events.len() as f64)
}

/// Number of robots whose capabilities are already provided by teammates
/// with a lower id.
pub fn duplicate_count(system: &RobotSystem, assignment: &TeamAssignment) -> Result<usize> {
    check_covers(system, assignment)?;
    let mut duplicates = 0;
    for team in assignment.teams() {
        let mut covered = CapabilitySet::EMPTY;
        // teams are stored in ascending id order
        for &i in team {
            let caps = system.robots[i].capabilities;
            if caps.is_subset(covered) {
                duplicates += 1;
            }
            covered = covered.union(caps);
        }
    }
    Ok(duplicates)
}

/// `d / N` with `d` from [`duplicate_count`].
pub fn duplication_rate(system: &RobotSystem, assignment: &TeamAssignment) -> Result<f64> {
    Ok(duplicate_count(system, assignment)? as f64 / system.len() as f64)
}

/// Team ids of the nearest robot to each cell centre, row-major from the
/// `y = 0` edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionRaster {
    pub columns: usize,
    pub rows: usize,
    pub cells: Vec<usize>,
}

impl RegionRaster {
    pub fn get(&self, column: usize, row: usize) -> usize {
        self.cells[row * self.columns + column]
    }

    pub fn rows_iter(&self) -> core::slice::Chunks<'_, usize> {
        self.cells.chunks(self.columns)
    }

    /// Cell containing `p`, clamped to the grid.
    pub fn cell_of(&self, system: &RobotSystem, p: &Position) -> (usize, usize) {
        let env = &system.environment;
        let c = ((p.x / env.width) * self.columns as f64) as usize;
        let r = ((p.y / env.height) * self.rows as f64) as usize;
        (c.min(self.columns - 1), r.min(self.rows - 1))
    }
}

pub fn region_raster(
    system: &RobotSystem,
    assignment: &TeamAssignment,
    columns: usize,
    rows: usize,
) -> Result<RegionRaster> {
    check_covers(system, assignment)?;
    if columns < 2 || rows < 2 {
        return Err(Error::InvalidPartition(format!(
            "raster resolution must be at least 2x2, got {columns}x{rows}"
        )));
    }
    let env = &system.environment;
    let mut cells = vec![0; columns * rows];
    for r in 0..rows {
        let y = (r as f64 + 0.5) * env.height / rows as f64;
        for c in 0..columns {
            let x = (c as f64 + 0.5) * env.width / columns as f64;
            cells[r * columns + c] = assignment.team(nearest_robot(system, &Position::new(x, y)));
        }
    }
    Ok(RegionRaster { columns, rows, cells })
}
