//! Robots, their sensing capabilities, and the environment they share.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{Position, Wall};

/// Largest supported capability universe; sets are stored as a bitmask.
pub const MAX_CAPABILITIES: usize = 64;

/// A set of capability indices into a [`RobotSystem`]'s universe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CapabilitySet(u64);

impl CapabilitySet {
    pub const EMPTY: CapabilitySet = CapabilitySet(0);

    pub fn single(index: usize) -> Self {
        assert!(index < MAX_CAPABILITIES, "capability index {index} out of range");
        CapabilitySet(1 << index)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        indices
            .into_iter()
            .fold(CapabilitySet::EMPTY, |acc, i| acc.union(CapabilitySet::single(i)))
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub const fn contains(self, index: usize) -> bool {
        index < MAX_CAPABILITIES && self.0 & (1 << index) != 0
    }

    pub const fn union(self, other: Self) -> Self {
        CapabilitySet(self.0 | other.0)
    }

    pub const fn intersection(self, other: Self) -> Self {
        CapabilitySet(self.0 & other.0)
    }

    pub const fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..MAX_CAPABILITIES).filter(move |&i| self.contains(i))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotSpec {
    pub id: usize,
    pub position: Position,
    pub capabilities: CapabilitySet,
}

/// Axis-aligned rectangle `[0, width] x [0, height]` with wall obstacles.
#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub width: f64,
    pub height: f64,
    pub obstacles: Vec<Wall>,
}

impl Environment {
    pub fn new(width: f64, height: f64, obstacles: Vec<Wall>) -> Result<Self> {
        let env = Environment { width, height, obstacles };
        env.validate()?;
        Ok(env)
    }

    pub fn unit_square() -> Self {
        Environment { width: 1.0, height: 1.0, obstacles: Vec::new() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width.is_finite() && self.width > 0.0 && self.height.is_finite() && self.height > 0.0) {
            return Err(Error::InvalidSystem(format!(
                "environment must have positive finite size, got {} x {}",
                self.width, self.height
            )));
        }
        for (i, wall) in self.obstacles.iter().enumerate() {
            if !self.contains(&wall.start) || !self.contains(&wall.end) {
                return Err(Error::InvalidSystem(format!("wall {i} leaves the environment bounds")));
            }
        }
        Ok(())
    }

    pub fn contains(&self, p: &Position) -> bool {
        p.is_finite() && p.x >= 0.0 && p.x <= self.width && p.y >= 0.0 && p.y <= self.height
    }

    pub fn diagonal(&self) -> f64 {
        libm::hypot(self.width, self.height)
    }

    /// Additive guard for inverse-distance weights: 1e-3 of the diagonal.
    pub fn default_spatial_epsilon(&self) -> f64 {
        1e-3 * self.diagonal()
    }

    /// Distance from `p` to the nearest wall, or infinity without walls.
    pub fn wall_clearance(&self, p: &Position) -> f64 {
        self.obstacles
            .iter()
            .map(|w| w.distance_to(p))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotSystem {
    pub robots: Vec<RobotSpec>,
    pub environment: Environment,
    pub capability_universe: Vec<String>,
}

impl RobotSystem {
    pub fn new(
        robots: Vec<RobotSpec>,
        environment: Environment,
        capability_universe: Vec<String>,
    ) -> Result<Self> {
        let system = RobotSystem { robots, environment, capability_universe };
        system.validate()?;
        Ok(system)
    }

    pub fn len(&self) -> usize {
        self.robots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.robots.is_empty()
    }

    pub fn positions(&self) -> impl Iterator<Item = &Position> + '_ {
        self.robots.iter().map(|r| &r.position)
    }

    pub fn capability_index(&self, name: &str) -> Option<usize> {
        self.capability_universe.iter().position(|c| c == name)
    }

    pub fn validate(&self) -> Result<()> {
        self.environment.validate()?;
        let universe = self.capability_universe.len();
        if universe == 0 || universe > MAX_CAPABILITIES {
            return Err(Error::InvalidSystem(format!(
                "capability universe must hold 1..={MAX_CAPABILITIES} entries, got {universe}"
            )));
        }
        for (i, name) in self.capability_universe.iter().enumerate() {
            if self.capability_universe[..i].contains(name) {
                return Err(Error::InvalidSystem(format!("duplicate capability {name:?}")));
            }
        }
        if self.robots.len() < 2 {
            return Err(Error::InvalidSystem(format!(
                "need at least 2 robots, got {}",
                self.robots.len()
            )));
        }
        let known = CapabilitySet::from_indices(0..universe);
        for (i, robot) in self.robots.iter().enumerate() {
            if robot.id != i {
                return Err(Error::InvalidSystem(format!(
                    "robot ids must be contiguous from 0; position {i} holds id {}",
                    robot.id
                )));
            }
            if !self.environment.contains(&robot.position) {
                return Err(Error::InvalidSystem(format!("robot {i} lies outside the environment")));
            }
            if robot.capabilities.is_empty() {
                return Err(Error::InvalidSystem(format!("robot {i} has no capabilities")));
            }
            if !robot.capabilities.is_subset(known) {
                return Err(Error::InvalidSystem(format!(
                    "robot {i} references a capability outside the universe"
                )));
            }
        }
        Ok(())
    }

    /// Copy of the system with every position and wall shifted by `(dx, dy)`
    /// and the bounds grown to keep everything inside.
    pub fn translated(&self, dx: f64, dy: f64) -> RobotSystem {
        let mut out = self.clone();
        for r in &mut out.robots {
            r.position = r.position.translated(dx, dy);
        }
        for w in &mut out.environment.obstacles {
            *w = w.translated(dx, dy);
        }
        out.environment.width += dx.max(0.0);
        out.environment.height += dy.max(0.0);
        out
    }
}
