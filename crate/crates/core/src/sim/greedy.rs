use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::Position;
use crate::partition::TeamAssignment;
use crate::system::RobotSystem;

struct Cluster {
    members: Vec<usize>,
    centroid: Position,
}

/// Spatial-only baseline: centroid-linkage agglomerative clustering.
///
/// Starting from singletons, the two clusters with the closest centroids are
/// merged until `r` remain. Clusters are kept ordered by smallest member, so
/// distance ties resolve to the lexicographically smallest pair.
pub fn greedy_assign(system: &RobotSystem, r: usize) -> Result<TeamAssignment> {
    let n = system.len();
    if r < 1 || r > n {
        return Err(Error::InvalidPartition(format!("team count must lie in 1..={n}, got {r}")));
    }
    let mut clusters: Vec<Cluster> = system
        .robots
        .iter()
        .enumerate()
        .map(|(i, robot)| Cluster { members: alloc::vec![i], centroid: robot.position })
        .collect();

    while clusters.len() > r {
        let mut best = (0, 1);
        let mut best_d = f64::INFINITY;
        for a in 0..clusters.len() {
            for b in (a + 1)..clusters.len() {
                let d = clusters[a].centroid.distance_squared(&clusters[b].centroid);
                if d < best_d {
                    best_d = d;
                    best = (a, b);
                }
            }
        }
        let absorbed = clusters.remove(best.1);
        let target = &mut clusters[best.0];
        target.members.extend(absorbed.members);
        target.members.sort_unstable();
        let count = target.members.len() as f64;
        let (sx, sy) = target.members.iter().fold((0.0, 0.0), |(sx, sy), &i| {
            let p = system.robots[i].position;
            (sx + p.x, sy + p.y)
        });
        target.centroid = Position::new(sx / count, sy / count);
    }
    TeamAssignment::from_groups(clusters.into_iter().map(|c| c.members).collect())
}
