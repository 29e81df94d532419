//! On-disk formats.
//!
//! | data            | format |
//! |-----------------|--------|
//! | robot system    | JSON `{capabilities, environment: {width, height, obstacles}, robots: [{id, position, capabilities}]}` |
//! | matrix          | headerless CSV, one row per line, `{:.16e}` entries |
//! | solver trace    | JSON `{converged, iterations, residuals: [{r1, r2, r3, r4, objective}]}` |
//! | team assignment | JSON `{r, team_of}` |
//! | metrics batch   | CSV `method,n,k_capabilities,r,seed,detection,duplication` |
//! | region raster   | JSON array of rows, or plain PGM |
//! | alpha sweep     | CSV `alpha1,alpha2,alpha3,detection,duplication` |

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use teamfuse_core::fusion::{SolveResult, SolverConfig};
use teamfuse_core::sim::{Method, MetricsReport, RegionRaster};
use teamfuse_core::{CapabilitySet, Environment, Position, RobotSpec, RobotSystem, TeamAssignment, Wall};

use crate::error::{Error, Result};

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Input { path: path.to_path_buf(), source })
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Output { path: path.to_path_buf(), source })
}

// ---------------------------------------------------------------------------
// robot systems

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SystemDoc {
    capabilities: Vec<String>,
    environment: EnvironmentDoc,
    robots: Vec<RobotDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EnvironmentDoc {
    width: f64,
    height: f64,
    #[serde(default)]
    obstacles: Vec<[[f64; 2]; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RobotDoc {
    id: usize,
    position: [f64; 2],
    capabilities: Vec<String>,
}

pub fn system_to_json(system: &RobotSystem) -> String {
    let universe = &system.capability_universe;
    let doc = SystemDoc {
        capabilities: universe.clone(),
        environment: EnvironmentDoc {
            width: system.environment.width,
            height: system.environment.height,
            obstacles: system
                .environment
                .obstacles
                .iter()
                .map(|w| [w.start.into(), w.end.into()])
                .collect(),
        },
        robots: system
            .robots
            .iter()
            .map(|r| RobotDoc {
                id: r.id,
                position: r.position.into(),
                capabilities: r.capabilities.iter().map(|c| universe[c].clone()).collect(),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("plain data serializes");
    out.push('\n');
    out
}

pub fn system_from_json(text: &str) -> Result<RobotSystem> {
    let doc: SystemDoc = serde_json::from_str(text).map_err(|e| Error::format("robot system", e))?;
    let walls = doc
        .environment
        .obstacles
        .iter()
        .map(|[a, b]| Wall::new(Position::from(*a), Position::from(*b)))
        .collect();
    let environment = Environment::new(doc.environment.width, doc.environment.height, walls)?;
    let mut robots = Vec::with_capacity(doc.robots.len());
    for r in doc.robots {
        let mut indices = Vec::with_capacity(r.capabilities.len());
        for name in &r.capabilities {
            let index = doc
                .capabilities
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::format("robot system", format!("robot {} has unknown capability {name:?}", r.id)))?;
            indices.push(index);
        }
        robots.push(RobotSpec {
            id: r.id,
            position: Position::from(r.position),
            capabilities: CapabilitySet::from_indices(indices),
        });
    }
    Ok(RobotSystem::new(robots, environment, doc.capabilities)?)
}

// ---------------------------------------------------------------------------
// matrices

pub fn matrix_to_csv(m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn matrix_from_csv<R: Read>(reader: R) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    for record in csv.records() {
        let record = record.map_err(|e| Error::format("matrix", e))?;
        let row = record
            .iter()
            .map(|cell| cell.parse::<f64>().map_err(|e| Error::format("matrix", format!("{cell:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::format("matrix", "no rows"));
    }
    if let Some(bad) = rows.iter().position(|r| r.len() != n) {
        return Err(Error::format(
            "matrix",
            format!("expected {n} columns, row {bad} has {}", rows[bad].len()),
        ));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

// ---------------------------------------------------------------------------
// solver traces

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub r4: f64,
    pub objective: f64,
}

/// Solver parameters recorded alongside the trace so a run can be repeated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverDoc {
    pub alphas: Vec<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub mu0: f64,
    pub rho: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl From<&SolverConfig> for SolverDoc {
    fn from(c: &SolverConfig) -> Self {
        SolverDoc {
            alphas: c.alphas.clone(),
            lambda1: c.lambda1,
            lambda2: c.lambda2,
            mu0: c.mu0,
            rho: c.rho,
            tolerance: c.tolerance,
            max_iterations: c.max_iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub converged: bool,
    pub iterations: usize,
    pub residuals: Vec<ResidualRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverDoc>,
}

impl SolveTrace {
    pub fn new(result: &SolveResult, config: Option<&SolverConfig>) -> Self {
        SolveTrace {
            converged: result.converged,
            iterations: result.iterations,
            residuals: result
                .trace
                .iter()
                .map(|rec| ResidualRow {
                    r1: rec.residuals.row_sum,
                    r2: rec.residuals.transpose,
                    r3: rec.residuals.laplacian,
                    r4: rec.residuals.copy,
                    objective: rec.objective,
                })
                .collect(),
            solver: config.map(SolverDoc::from),
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("plain data serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::format("solver trace", e))
    }
}

// ---------------------------------------------------------------------------
// team assignments

#[derive(Serialize, Deserialize)]
struct AssignmentDoc {
    r: usize,
    team_of: Vec<usize>,
}

pub fn assignment_to_json(a: &TeamAssignment) -> String {
    let doc = AssignmentDoc { r: a.r(), team_of: a.team_of().to_vec() };
    let mut out = serde_json::to_string(&doc).expect("plain data serializes");
    out.push('\n');
    out
}

pub fn assignment_from_json(text: &str) -> Result<TeamAssignment> {
    let doc: AssignmentDoc = serde_json::from_str(text).map_err(|e| Error::format("team assignment", e))?;
    Ok(TeamAssignment::from_team_of(doc.team_of, doc.r)?)
}

// ---------------------------------------------------------------------------
// metrics

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub method: String,
    pub n: usize,
    pub k_capabilities: usize,
    pub r: usize,
    pub seed: u64,
    pub detection: f64,
    pub duplication: f64,
}

impl From<&MetricsReport> for MetricsRow {
    fn from(m: &MetricsReport) -> Self {
        MetricsRow {
            method: m.method.as_str().to_string(),
            n: m.n_robots,
            k_capabilities: m.n_capabilities,
            r: m.r,
            seed: m.seed,
            detection: m.detection_rate,
            duplication: m.duplication_rate,
        }
    }
}

impl MetricsRow {
    pub fn method(&self) -> Option<Method> {
        Method::parse(&self.method)
    }
}

fn write_rows<T: Serialize>(rows: &[T], header: bool) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().has_headers(header).from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("writing to memory");
    }
    w.into_inner().expect("writing to memory")
}

fn read_rows<T: for<'de> Deserialize<'de>, R: Read>(reader: R, what: &'static str) -> Result<Vec<T>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(|e| Error::format(what, e))
}

/// Metrics CSV, with the header line unless `header` is false (for appending).
pub fn metrics_to_csv(reports: &[MetricsReport], header: bool) -> Vec<u8> {
    let rows: Vec<MetricsRow> = reports.iter().map(MetricsRow::from).collect();
    if rows.is_empty() && header {
        return b"method,n,k_capabilities,r,seed,detection,duplication\n".to_vec();
    }
    write_rows(&rows, header)
}

pub fn metrics_from_csv<R: Read>(reader: R) -> Result<Vec<MetricsRow>> {
    let rows: Vec<MetricsRow> = read_rows(reader, "metrics")?;
    if let Some(bad) = rows.iter().find(|r| r.method().is_none()) {
        return Err(Error::format("metrics", format!("unknown method {:?}", bad.method)));
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// rasters

/// Rows from the `y = 0` edge upwards.
pub fn raster_to_json(raster: &RegionRaster) -> String {
    let rows: Vec<&[usize]> = raster.rows_iter().collect();
    let mut out = serde_json::to_string(&rows).expect("plain data serializes");
    out.push('\n');
    out
}

pub fn raster_from_json(text: &str) -> Result<RegionRaster> {
    let rows: Vec<Vec<usize>> = serde_json::from_str(text).map_err(|e| Error::format("raster", e))?;
    let columns = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || columns == 0 || rows.iter().any(|r| r.len() != columns) {
        return Err(Error::format("raster", "rows must be non-empty and equally long"));
    }
    Ok(RegionRaster { columns, rows: rows.len(), cells: rows.concat() })
}

/// Plain (P2) greymap with the top edge first, so viewers show it upright.
/// Grey levels are team ids.
pub fn raster_to_pgm(raster: &RegionRaster) -> String {
    let max = raster.cells.iter().copied().max().unwrap_or(0).max(1);
    let mut out = format!("P2\n{} {}\n{max}\n", raster.columns, raster.rows);
    for row in raster.rows_iter().rev() {
        let cells: Vec<String> = row.iter().map(usize::to_string).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// sweeps

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub detection: f64,
    pub duplication: f64,
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> Vec<u8> {
    write_rows(rows, true)
}

pub fn sweep_from_csv<R: Read>(reader: R) -> Result<Vec<SweepRow>> {
    read_rows(reader, "sweep")
}

/// Write `contents` to `path`, appending after any existing data when
/// `append` is set.
pub fn write_or_append(path: &Path, contents: &[u8], append: bool) -> Result<()> {
    if !append {
        return write_file(path, contents);
    }
    let mut f = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|source| Error::Output { path: path.to_path_buf(), source })?;
    f.write_all(contents).map_err(|source| Error::Output { path: path.to_path_buf(), source })
}
