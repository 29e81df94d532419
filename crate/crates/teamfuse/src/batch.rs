//! Multi-seed runners. Trials fan out over rayon; results come back in a
//! fixed order whatever the scheduling.

use rayon::prelude::*;
use teamfuse_core::sim::{run_full, run_trial_regions, MetricsReport, SimConfig};
use teamfuse_core::sweep::simplex_grid;

use crate::error::Result;
use crate::formats::SweepRow;

/// `count` seeds starting at `base`.
pub fn seed_range(base: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|i| base.wrapping_add(i)).collect()
}

/// The grid of a simulation batch. `base` supplies everything not listed.
#[derive(Debug, Clone)]
pub struct BatchSpec {
    pub base: SimConfig,
    pub robots: Vec<usize>,
    pub capabilities: Vec<usize>,
    pub regions: Vec<usize>,
    pub seeds: Vec<u64>,
}

#[derive(Debug)]
pub struct TrialFailure {
    pub n_robots: usize,
    pub n_capabilities: usize,
    pub seed: u64,
    pub error: teamfuse_core::Error,
}

#[derive(Debug, Default)]
pub struct BatchOutcome {
    /// Sorted by robots, capabilities, team count, seed, then method.
    pub reports: Vec<MetricsReport>,
    pub failures: Vec<TrialFailure>,
}

pub fn simulate(spec: &BatchSpec) -> BatchOutcome {
    let mut jobs = Vec::new();
    for &n in &spec.robots {
        for &k in &spec.capabilities {
            for &seed in &spec.seeds {
                jobs.push((n, k, seed));
            }
        }
    }
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(n, k, seed)| {
            let first = spec.regions.iter().copied().min().unwrap_or(1);
            let config = SimConfig {
                n_robots: n,
                n_capabilities: k,
                n_regions: first,
                seed,
                ..spec.base.clone()
            };
            run_trial_regions(&config, &spec.regions)
                .map_err(|error| TrialFailure { n_robots: n, n_capabilities: k, seed, error })
        })
        .collect();

    let mut outcome = BatchOutcome::default();
    for result in results {
        match result {
            Ok(reports) => outcome.reports.extend(reports),
            Err(failure) => outcome.failures.push(failure),
        }
    }
    outcome
        .reports
        .sort_by_key(|m| (m.n_robots, m.n_capabilities, m.r, m.seed, m.method));
    outcome
}

/// Full-method detection and duplication averaged over `seeds` at every
/// lattice point of the weight simplex. Reports that did not converge are
/// still averaged in; the second value counts them.
pub fn sweep(base: &SimConfig, step: f64, seeds: &[u64]) -> Result<(Vec<SweepRow>, usize)> {
    let grid = simplex_grid(step)?;
    let jobs: Vec<([f64; 3], u64)> = grid
        .iter()
        .flat_map(|&alpha| seeds.iter().map(move |&seed| (alpha, seed)))
        .collect();
    let reports = jobs
        .par_iter()
        .map(|&(alpha, seed)| {
            let mut config = SimConfig { seed, ..base.clone() };
            config.solver.alphas = alpha.to_vec();
            run_full(&config)
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;

    let unconverged = reports.iter().filter(|m| m.converged == Some(false)).count();
    let per_point = seeds.len().max(1) as f64;
    let rows = grid
        .iter()
        .zip(reports.chunks(seeds.len().max(1)))
        .map(|(alpha, chunk)| SweepRow {
            alpha1: alpha[0],
            alpha2: alpha[1],
            alpha3: alpha[2],
            detection: chunk.iter().map(|m| m.detection_rate).sum::<f64>() / per_point,
            duplication: chunk.iter().map(|m| m.duplication_rate).sum::<f64>() / per_point,
        })
        .collect();
    Ok((rows, unconverged))
}
