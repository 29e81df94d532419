//! The `teamfuse` command line.
//!
//! Every setting resolves as flag, then `--config` file, then default.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::Deserialize;
use teamfuse_core::fusion::SolverConfig;
use teamfuse_core::sim::{build_graphs, generate_system, region_raster, trial_rng, SimConfig};
use teamfuse_core::{partition, solve, Environment, Position, Wall};

use crate::batch::{self, BatchSpec};
use crate::error::{Error, Result};
use crate::formats::{self, SolveTrace};

#[derive(Debug, Parser)]
#[command(name = "teamfuse", version, about = "Fuse robot relation graphs into coverage teams")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// Random seed (first seed of a batch)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Spatial, communication and capability graph weights
    #[arg(long, global = true, num_args = 3, value_names = ["A1", "A2", "A3"], allow_negative_numbers = true)]
    pub alpha: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub lambda1: Option<f64>,
    #[arg(long, global = true)]
    pub lambda2: Option<f64>,
    /// Convergence tolerance on the largest constraint residual
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_iters: Option<usize>,
    /// JSON file with defaults for any of the flags
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random robot system as JSON
    Generate(GenerateArgs),
    /// Fuse a system's relation graphs and write Z and the residual trace
    Solve(SolveArgs),
    /// Cut a fused matrix into teams
    Partition(PartitionArgs),
    /// Run seeded trials of all three methods and write metrics
    Simulate(SimulateArgs),
    /// Average full-method metrics over the graph-weight simplex
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub robots: Option<usize>,
    #[arg(long)]
    pub capabilities: Option<usize>,
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub height: Option<f64>,
    /// Wall segment `x1,y1,x2,y2`; repeatable
    #[arg(long = "obstacle", value_name = "X1,Y1,X2,Y2")]
    pub obstacles: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Robot system JSON
    #[arg(long)]
    pub system: PathBuf,
    /// Communication radius; defaults to 0.4 × the environment diagonal
    #[arg(long)]
    pub comm_radius: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    /// Fused matrix CSV
    #[arg(long)]
    pub z: PathBuf,
    #[arg(long)]
    pub regions: Option<usize>,
    /// Robot system JSON, needed for `--raster`
    #[arg(long)]
    pub system: Option<PathBuf>,
    /// Also write a RES × RES team-region raster
    #[arg(long, value_name = "RES")]
    pub raster: Option<usize>,
    #[arg(long, value_enum, default_value_t = RasterFormat::Json)]
    pub raster_format: RasterFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RasterFormat {
    Json,
    Pgm,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Robot counts: `20`, `10,20,30` or `10..50` (inclusive)
    #[arg(long)]
    pub robots: Option<String>,
    #[arg(long)]
    pub capabilities: Option<String>,
    #[arg(long)]
    pub regions: Option<String>,
    /// Number of seeds; seed i is `--seed` + i
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub events: Option<usize>,
    /// Add rows to an existing metrics.csv instead of replacing it
    #[arg(long)]
    pub append: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub robots: Option<usize>,
    #[arg(long)]
    pub capabilities: Option<usize>,
    #[arg(long)]
    pub regions: Option<usize>,
    #[arg(long)]
    pub seeds: Option<usize>,
    #[arg(long)]
    pub events: Option<usize>,
    /// Lattice step on the simplex; must divide 1
    #[arg(long)]
    pub step: Option<f64>,
}

/// Values accepted by `--config`. Keys mirror the long flags with `-`
/// replaced by `_`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub alpha: Option<Vec<f64>>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    pub robots: Option<GridValue>,
    pub capabilities: Option<GridValue>,
    pub regions: Option<GridValue>,
    pub seeds: Option<usize>,
    pub events: Option<usize>,
    pub step: Option<f64>,
    pub comm_radius: Option<f64>,
    pub width: Option<f64>,
    pub height: Option<f64>,
}

/// A single count, a list, or the textual form used on the command line.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridValue {
    One(usize),
    Many(Vec<usize>),
    Text(String),
}

impl GridValue {
    fn values(&self) -> Result<Vec<usize>> {
        match self {
            GridValue::One(v) => Ok(vec![*v]),
            GridValue::Many(v) => Ok(v.clone()),
            GridValue::Text(s) => parse_grid(s),
        }
    }

    fn single(&self, flag: &str) -> Result<usize> {
        match self.values()?.as_slice() {
            [v] => Ok(*v),
            _ => Err(Error::Usage(format!("--{flag} takes a single value here"))),
        }
    }
}

/// `7`, `2,4,8` or the inclusive range `2..10`.
pub fn parse_grid(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::Usage(format!("cannot parse {text:?} as a count, list or range"));
    let text = text.trim();
    if let Some((lo, hi)) = text.split_once("..") {
        let hi = hi.strip_prefix('=').unwrap_or(hi);
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    let values = text
        .split(',')
        .map(|v| v.trim().parse::<usize>().map_err(|_| bad()))
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(bad());
    }
    Ok(values)
}

fn parse_wall(text: &str) -> Result<Wall> {
    let v: Vec<f64> = text
        .split(',')
        .map(|c| c.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Usage(format!("obstacle {text:?} is not x1,y1,x2,y2")))?;
    match v.as_slice() {
        [x1, y1, x2, y2] => Ok(Wall::new(Position::new(*x1, *y1), Position::new(*x2, *y2))),
        _ => Err(Error::Usage(format!("obstacle {text:?} is not x1,y1,x2,y2"))),
    }
}

/// What a successful command produced, for the exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    NotConverged,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Done => 0,
            Outcome::NotConverged => 3,
        }
    }
}

/// Command-line flags merged with the optional config file.
struct Settings {
    common: CommonArgs,
    file: ConfigFile,
}

impl Settings {
    fn load(common: CommonArgs) -> Result<Self> {
        let file = match &common.config {
            Some(path) => serde_json::from_str(&formats::read_file(path)?)
                .map_err(|e| Error::format("config file", e))?,
            None => ConfigFile::default(),
        };
        Ok(Settings { common, file })
    }

    fn seed(&self) -> u64 {
        self.common.seed.or(self.file.seed).unwrap_or(0)
    }

    fn out_dir(&self) -> Result<PathBuf> {
        let dir = self.common.out.clone().or_else(|| self.file.out.clone()).unwrap_or_else(|| ".".into());
        fs::create_dir_all(&dir).map_err(|source| Error::Output { path: dir.clone(), source })?;
        Ok(dir)
    }

    fn solver(&self) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::uniform(3);
        if let Some(alpha) = self.common.alpha.clone().or_else(|| self.file.alpha.clone()) {
            cfg.alphas = alpha;
        }
        let pick = |flag: Option<f64>, file: Option<f64>, default: f64| flag.or(file).unwrap_or(default);
        cfg.lambda1 = pick(self.common.lambda1, self.file.lambda1, cfg.lambda1);
        cfg.lambda2 = pick(self.common.lambda2, self.file.lambda2, cfg.lambda2);
        cfg.tolerance = pick(self.common.tol, self.file.tol, cfg.tolerance);
        cfg.max_iterations = self.common.max_iters.or(self.file.max_iters).unwrap_or(cfg.max_iterations);
        if cfg.alphas.len() != 3 {
            return Err(Error::Usage(format!("--alpha takes 3 weights, got {}", cfg.alphas.len())));
        }
        cfg.validate().map_err(|e| Error::Usage(e.to_string()))?;
        Ok(cfg)
    }

    fn grid(&self, flag: &Option<String>, file: &Option<GridValue>, default: usize) -> Result<Vec<usize>> {
        match (flag, file) {
            (Some(text), _) => parse_grid(text),
            (None, Some(v)) => v.values(),
            (None, None) => Ok(vec![default]),
        }
    }

    fn count(&self, flag: Option<usize>, file: &Option<GridValue>, name: &str, default: usize) -> Result<usize> {
        match (flag, file) {
            (Some(v), _) => Ok(v),
            (None, Some(v)) => v.single(name),
            (None, None) => Ok(default),
        }
    }
}

fn sim_config(n: usize, k: usize, r: usize, seed: u64, events: Option<usize>, solver: SolverConfig) -> SimConfig {
    let mut cfg = SimConfig::new(n, k, r, seed);
    if let Some(events) = events {
        cfg.n_events = events;
    }
    cfg.solver = solver;
    cfg
}

fn usage(e: teamfuse_core::Error) -> Error {
    Error::Usage(e.to_string())
}

fn announce(path: &Path) {
    println!("{}", path.display());
}

pub fn run(cli: Cli) -> Result<Outcome> {
    let settings = Settings::load(cli.common)?;
    match cli.command {
        Command::Generate(args) => generate(&settings, args),
        Command::Solve(args) => solve_cmd(&settings, args),
        Command::Partition(args) => partition_cmd(&settings, args),
        Command::Simulate(args) => simulate(&settings, args),
        Command::Sweep(args) => sweep(&settings, args),
    }
}

fn generate(s: &Settings, args: GenerateArgs) -> Result<Outcome> {
    let n = s.count(args.robots, &s.file.robots, "robots", 20)?;
    let k = s.count(args.capabilities, &s.file.capabilities, "capabilities", 3)?;
    let width = args.width.or(s.file.width).unwrap_or(1.0);
    let height = args.height.or(s.file.height).unwrap_or(1.0);
    let walls = args.obstacles.iter().map(|w| parse_wall(w)).collect::<Result<Vec<_>>>()?;
    let environment = Environment::new(width, height, walls).map_err(usage)?;

    let seed = s.seed();
    let mut cfg = SimConfig::new(n, k, 1, seed);
    cfg.comm_radius = 0.4 * environment.diagonal();
    cfg.environment = environment;
    cfg.validate().map_err(usage)?;
    let system = generate_system(&cfg, &mut trial_rng(seed))?;

    let path = s.out_dir()?.join("system.json");
    formats::write_file(&path, formats::system_to_json(&system).as_bytes())?;
    announce(&path);
    Ok(Outcome::Done)
}

fn solve_cmd(s: &Settings, args: SolveArgs) -> Result<Outcome> {
    let solver = s.solver()?;
    let system = formats::system_from_json(&formats::read_file(&args.system)?)?;
    let radius = args
        .comm_radius
        .or(s.file.comm_radius)
        .unwrap_or(0.4 * system.environment.diagonal());
    let graphs = build_graphs(&system, radius)?;
    let result = solve(&graphs, &solver)?;

    let dir = s.out_dir()?;
    let z_path = dir.join("z.csv");
    let trace_path = dir.join("solve.json");
    formats::write_file(&z_path, formats::matrix_to_csv(&result.z).as_bytes())?;
    formats::write_file(&trace_path, SolveTrace::new(&result, Some(&solver)).to_json().as_bytes())?;
    announce(&z_path);
    announce(&trace_path);
    if result.converged {
        info!("converged after {} iterations", result.iterations);
        Ok(Outcome::Done)
    } else {
        warn!("no convergence within {} iterations", result.iterations);
        Ok(Outcome::NotConverged)
    }
}

fn partition_cmd(s: &Settings, args: PartitionArgs) -> Result<Outcome> {
    let z = formats::matrix_from_csv(formats::read_file(&args.z)?.as_bytes())?;
    let r = s.count(args.regions, &s.file.regions, "regions", 2)?;
    let teams = partition(&z, r).map_err(|e| Error::Usage(format!("{}: {e}", args.z.display())))?;

    let raster = match args.raster {
        None => None,
        Some(res) => {
            let path = args
                .system
                .as_ref()
                .ok_or_else(|| Error::Usage("--raster needs --system".into()))?;
            let system = formats::system_from_json(&formats::read_file(path)?)?;
            Some(region_raster(&system, &teams, res, res).map_err(usage)?)
        }
    };

    let dir = s.out_dir()?;
    let path = dir.join("assignment.json");
    formats::write_file(&path, formats::assignment_to_json(&teams).as_bytes())?;
    announce(&path);
    if let Some(raster) = raster {
        let (name, body) = match args.raster_format {
            RasterFormat::Json => ("raster.json", formats::raster_to_json(&raster)),
            RasterFormat::Pgm => ("raster.pgm", formats::raster_to_pgm(&raster)),
        };
        let path = dir.join(name);
        formats::write_file(&path, body.as_bytes())?;
        announce(&path);
    }
    Ok(Outcome::Done)
}

fn simulate(s: &Settings, args: SimulateArgs) -> Result<Outcome> {
    let solver = s.solver()?;
    let robots = s.grid(&args.robots, &s.file.robots, 20)?;
    let capabilities = s.grid(&args.capabilities, &s.file.capabilities, 3)?;
    let regions = s.grid(&args.regions, &s.file.regions, 3)?;
    let count = args.seeds.or(s.file.seeds).unwrap_or(1);
    if count == 0 {
        return Err(Error::Usage("--seeds must be at least 1".into()));
    }
    let events = args.events.or(s.file.events);
    let mut base = sim_config(2, 1, 1, 0, events, solver);
    if let Some(radius) = s.file.comm_radius {
        base.comm_radius = radius;
    }
    let spec = BatchSpec { base, robots, capabilities, regions, seeds: batch::seed_range(s.seed(), count) };
    let outcome = batch::simulate(&spec);

    for f in &outcome.failures {
        warn!("trial n={} k={} seed={} failed: {}", f.n_robots, f.n_capabilities, f.seed, f.error);
    }
    for m in outcome.reports.iter().filter(|m| m.converged == Some(false)) {
        warn!("{} solver did not converge: n={} k={} seed={}", m.method.as_str(), m.n_robots, m.n_capabilities, m.seed);
    }
    if outcome.reports.is_empty() {
        return Err(match outcome.failures.into_iter().next() {
            Some(f) => Error::Core(f.error),
            None => Error::Usage("empty simulation grid".into()),
        });
    }

    let path = s.out_dir()?.join("metrics.csv");
    let append = args.append && path.exists();
    formats::write_or_append(&path, &formats::metrics_to_csv(&outcome.reports, !append), append)?;
    announce(&path);
    Ok(Outcome::Done)
}

fn sweep(s: &Settings, args: SweepArgs) -> Result<Outcome> {
    let solver = s.solver()?;
    let n = s.count(args.robots, &s.file.robots, "robots", 20)?;
    let k = s.count(args.capabilities, &s.file.capabilities, "capabilities", 3)?;
    let r = s.count(args.regions, &s.file.regions, "regions", 3)?;
    let count = args.seeds.or(s.file.seeds).unwrap_or(10);
    if count == 0 {
        return Err(Error::Usage("--seeds must be at least 1".into()));
    }
    let step = args.step.or(s.file.step).unwrap_or(0.1);
    teamfuse_core::sweep::divisions(step).map_err(usage)?;
    let mut base = sim_config(n, k, r, 0, args.events.or(s.file.events), solver);
    if let Some(radius) = s.file.comm_radius {
        base.comm_radius = radius;
    }
    base.validate().map_err(usage)?;

    let (rows, unconverged) = batch::sweep(&base, step, &batch::seed_range(s.seed(), count))?;
    if unconverged > 0 {
        warn!("{unconverged} sweep trials did not converge");
    }
    let path = s.out_dir()?.join("sweep.csv");
    formats::write_file(&path, &formats::sweep_to_csv(&rows))?;
    announce(&path);
    Ok(Outcome::Done)
}
