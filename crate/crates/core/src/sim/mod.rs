//! Seeded coverage simulation: random robot systems, typed events, the three
//! assignment methods, and their detection/duplication scores.

mod greedy;
mod metrics;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fusion::{solve, SolveResult, SolverConfig};
use crate::geometry::Position;
use crate::graph::{
    build_capability_graph, build_communication_graph, build_spatial_graph, normalize_graph,
    RelationGraph,
};
use crate::partition::{partition, TeamAssignment};
use crate::system::{CapabilitySet, Environment, RobotSpec, RobotSystem, MAX_CAPABILITIES};

pub use greedy::greedy_assign;
pub use metrics::{
    detection_rate, duplicate_count, duplication_rate, nearest_robot, region_raster,
    team_capabilities, RegionRaster,
};

/// Placement attempts per robot before giving up on finding a wall-free spot.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 100_000;

const CAPABILITY_NAMES: [&str; 8] = ["rgb", "depth", "audio", "thermal", "lidar", "gas", "radar", "uv"];

/// Names for a universe of `k` capabilities.
pub fn capability_names(k: usize) -> Vec<String> {
    (0..k)
        .map(|i| match CAPABILITY_NAMES.get(i) {
            Some(name) => name.to_string(),
            None => format!("cap{i}"),
        })
        .collect()
}

/// The deterministic generator used for every trial.
pub fn trial_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_robots: usize,
    pub n_capabilities: usize,
    pub n_regions: usize,
    pub n_events: usize,
    pub comm_radius: f64,
    pub seed: u64,
    pub environment: Environment,
    /// Weights are ordered (spatial, communication, capability).
    pub solver: SolverConfig,
}

impl SimConfig {
    pub const DEFAULT_EVENTS: usize = 100;

    /// Unit square, 100 events, communication radius 0.4 × diagonal, equal
    /// graph weights and default solver settings.
    pub fn new(n_robots: usize, n_capabilities: usize, n_regions: usize, seed: u64) -> Self {
        let environment = Environment::unit_square();
        SimConfig {
            n_robots,
            n_capabilities,
            n_regions,
            n_events: Self::DEFAULT_EVENTS,
            comm_radius: 0.4 * environment.diagonal(),
            seed,
            environment,
            solver: SolverConfig::uniform(3),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_robots < 2 {
            return bad(format!("need at least 2 robots, got {}", self.n_robots));
        }
        if self.n_capabilities < 1 || self.n_capabilities > MAX_CAPABILITIES {
            return bad(format!(
                "capability count must lie in 1..={MAX_CAPABILITIES}, got {}",
                self.n_capabilities
            ));
        }
        if self.n_regions < 1 || self.n_regions > self.n_robots {
            return bad(format!(
                "region count must lie in 1..={}, got {}",
                self.n_robots, self.n_regions
            ));
        }
        if self.n_events < 1 {
            return bad("need at least one event".into());
        }
        if !(self.comm_radius.is_finite() && self.comm_radius > 0.0) {
            return bad(format!("communication radius must be positive, got {}", self.comm_radius));
        }
        if self.solver.alphas.len() != 3 {
            return bad(format!(
                "simulation fuses 3 graphs, got {} weights",
                self.solver.alphas.len()
            ));
        }
        self.environment.validate()?;
        self.solver.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub position: Position,
    /// Index into the capability universe.
    pub event_type: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Full,
    Baseline,
    Greedy,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Full, Method::Baseline, Method::Greedy];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Full => "full",
            Method::Baseline => "baseline",
            Method::Greedy => "greedy",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub method: Method,
    pub n_robots: usize,
    pub n_capabilities: usize,
    pub r: usize,
    pub seed: u64,
    pub detection_rate: f64,
    pub duplication_rate: f64,
    /// Solver outcome for the two fused methods; `None` for greedy.
    pub converged: Option<bool>,
}

/// Uniform positions clear of walls, one uniformly drawn capability each.
pub fn generate_system<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Result<RobotSystem> {
    config.validate()?;
    let env = &config.environment;
    let clearance = env.default_spatial_epsilon();
    let mut robots = Vec::with_capacity(config.n_robots);
    for id in 0..config.n_robots {
        let mut placed = None;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let p = Position::new(rng.random::<f64>() * env.width, rng.random::<f64>() * env.height);
            if env.wall_clearance(&p) > clearance {
                placed = Some(p);
                break;
            }
        }
        let position = placed.ok_or(Error::PlacementFailed { robot: id, attempts: MAX_PLACEMENT_ATTEMPTS })?;
        let capability = rng.random_range(0..config.n_capabilities);
        robots.push(RobotSpec { id, position, capabilities: CapabilitySet::single(capability) });
    }
    RobotSystem::new(robots, env.clone(), capability_names(config.n_capabilities))
}

/// `config.n_events` events, uniform in position and type.
pub fn simulate_events<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Vec<Event> {
    let env = &config.environment;
    (0..config.n_events)
        .map(|_| Event {
            position: Position::new(rng.random::<f64>() * env.width, rng.random::<f64>() * env.height),
            event_type: rng.random_range(0..config.n_capabilities),
        })
        .collect()
}

/// Normalised (spatial, communication, capability) graphs.
pub fn build_graphs(system: &RobotSystem, comm_radius: f64) -> Result<Vec<RelationGraph>> {
    let epsilon = system.environment.default_spatial_epsilon();
    [
        build_spatial_graph(system, epsilon)?,
        build_communication_graph(system, comm_radius)?,
        build_capability_graph(system)?,
    ]
    .iter()
    .map(normalize_graph)
    .collect()
}

/// Solve, then cut the fused matrix into `r` teams.
pub fn fused_assign(graphs: &[RelationGraph], config: &SolverConfig, r: usize) -> Result<(TeamAssignment, SolveResult)> {
    let result = solve(graphs, config)?;
    let teams = partition(&result.z, r)?;
    Ok((teams, result))
}

/// The fused pipeline with both regularisers switched off.
pub fn baseline_assign(graphs: &[RelationGraph], config: &SolverConfig, r: usize) -> Result<TeamAssignment> {
    Ok(fused_assign(graphs, &config.unregularized(), r)?.0)
}

/// Everything in a trial that does not depend on the team count.
#[derive(Debug, Clone)]
pub struct Trial {
    pub system: RobotSystem,
    pub graphs: Vec<RelationGraph>,
    pub full: SolveResult,
    pub baseline: SolveResult,
    pub events: Vec<Event>,
}

// The system is drawn first and the events continue the same stream.
fn sample(config: &SimConfig) -> Result<(RobotSystem, Vec<Event>)> {
    config.validate()?;
    let mut rng = trial_rng(config.seed);
    let system = generate_system(config, &mut rng)?;
    let events = simulate_events(config, &mut rng);
    Ok((system, events))
}

impl Trial {
    pub fn prepare(config: &SimConfig) -> Result<Trial> {
        let (system, events) = sample(config)?;
        let graphs = build_graphs(&system, config.comm_radius)?;
        let full = solve(&graphs, &config.solver)?;
        let baseline = solve(&graphs, &config.solver.unregularized())?;
        Ok(Trial { system, graphs, full, baseline, events })
    }

    pub fn assignment(&self, method: Method, r: usize) -> Result<TeamAssignment> {
        match method {
            Method::Full => partition(&self.full.z, r),
            Method::Baseline => partition(&self.baseline.z, r),
            Method::Greedy => greedy_assign(&self.system, r),
        }
    }

    /// One report per method, in [`Method::ALL`] order.
    pub fn reports(&self, config: &SimConfig, r: usize) -> Result<Vec<MetricsReport>> {
        Method::ALL
            .into_iter()
            .map(|method| {
                let teams = self.assignment(method, r)?;
                Ok(MetricsReport {
                    method,
                    n_robots: config.n_robots,
                    n_capabilities: config.n_capabilities,
                    r,
                    seed: config.seed,
                    detection_rate: detection_rate(&self.system, &teams, &self.events)?,
                    duplication_rate: duplication_rate(&self.system, &teams)?,
                    converged: match method {
                        Method::Full => Some(self.full.converged),
                        Method::Baseline => Some(self.baseline.converged),
                        Method::Greedy => None,
                    },
                })
            })
            .collect()
    }
}

/// The full-method report alone, skipping the baseline solve. Matches the
/// first entry of [`run_trial`].
pub fn run_full(config: &SimConfig) -> Result<MetricsReport> {
    let (system, events) = sample(config)?;
    let graphs = build_graphs(&system, config.comm_radius)?;
    let (teams, result) = fused_assign(&graphs, &config.solver, config.n_regions)?;
    Ok(MetricsReport {
        method: Method::Full,
        n_robots: config.n_robots,
        n_capabilities: config.n_capabilities,
        r: config.n_regions,
        seed: config.seed,
        detection_rate: detection_rate(&system, &teams, &events)?,
        duplication_rate: duplication_rate(&system, &teams)?,
        converged: Some(result.converged),
    })
}

/// Full, baseline and greedy reports for `config.n_regions` teams.
pub fn run_trial(config: &SimConfig) -> Result<Vec<MetricsReport>> {
    Trial::prepare(config)?.reports(config, config.n_regions)
}

/// [`run_trial`] for several team counts, solving once. The system and
/// events do not depend on the team count, so each block of reports equals
/// `run_trial` with `n_regions` set accordingly.
pub fn run_trial_regions(config: &SimConfig, regions: &[usize]) -> Result<Vec<MetricsReport>> {
    let trial = Trial::prepare(config)?;
    let mut out = Vec::with_capacity(3 * regions.len());
    for &r in regions {
        if r < 1 || r > config.n_robots {
            return Err(Error::InvalidConfig(format!(
                "region count must lie in 1..={}, got {r}",
                config.n_robots
            )));
        }
        out.extend(trial.reports(config, r)?);
    }
    Ok(out)
}
