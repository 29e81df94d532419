//! Augmented-Lagrangian fusion of relation graphs into one bistochastic matrix.
//!
//! The solver minimises
//!
//! ```text
//! Σ_m α_m ‖Z − A_m‖_F² + λ₁‖Z‖_F² + λ₂‖L‖_*
//!   s.t.  L = I − Z,  Z𝟏 = 𝟏,  Z = Zᵀ,  Z ≥ 0
//! ```
//!
//! by alternating closed-form updates of `Z`, a symmetric copy `Ẑ`, and the
//! Laplacian iterate `L`, followed by dual ascent on the four equality
//! multipliers and a geometric increase of the penalty `μ`. Non-negativity is
//! enforced by clamping after each `Z` update.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::RelationGraph;
use crate::prox::{nuclear_norm, svt_with_norm};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// One weight per graph; non-negative, summing to 1.
    pub alphas: Vec<f64>,
    /// Weight of the Frobenius penalty on `Z`.
    pub lambda1: f64,
    /// Weight of the nuclear-norm penalty on the Laplacian.
    pub lambda2: f64,
    /// Initial penalty parameter.
    pub mu0: f64,
    /// Penalty growth factor, strictly between 1 and 2.
    pub rho: f64,
    /// Convergence threshold on the largest constraint residual.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl SolverConfig {
    pub const DEFAULT_LAMBDA: f64 = 0.1;
    pub const DEFAULT_MU0: f64 = 0.1;
    pub const DEFAULT_RHO: f64 = 1.1;
    pub const DEFAULT_TOLERANCE: f64 = 1e-6;
    pub const DEFAULT_MAX_ITERATIONS: usize = 1000;

    pub fn with_alphas(alphas: Vec<f64>) -> Self {
        SolverConfig {
            alphas,
            lambda1: Self::DEFAULT_LAMBDA,
            lambda2: Self::DEFAULT_LAMBDA,
            mu0: Self::DEFAULT_MU0,
            rho: Self::DEFAULT_RHO,
            tolerance: Self::DEFAULT_TOLERANCE,
            max_iterations: Self::DEFAULT_MAX_ITERATIONS,
        }
    }

    /// Equal weights over `m` graphs.
    pub fn uniform(m: usize) -> Self {
        Self::with_alphas(alloc::vec![1.0 / m as f64; m])
    }

    /// Same configuration without the two regularisers.
    pub fn unregularized(&self) -> Self {
        SolverConfig { lambda1: 0.0, lambda2: 0.0, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidConfig(msg));
        if self.alphas.is_empty() {
            return bad("at least one graph weight is required".into());
        }
        if self.alphas.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return bad(format!("graph weights must be finite and >= 0: {:?}", self.alphas));
        }
        let total: f64 = self.alphas.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return bad(format!("graph weights must sum to 1, got {total}"));
        }
        if !(self.lambda1.is_finite() && self.lambda1 >= 0.0) {
            return bad(format!("lambda1 must be >= 0, got {}", self.lambda1));
        }
        if !(self.lambda2.is_finite() && self.lambda2 >= 0.0) {
            return bad(format!("lambda2 must be >= 0, got {}", self.lambda2));
        }
        if !(self.mu0.is_finite() && self.mu0 > 0.0) {
            return bad(format!("mu0 must be > 0, got {}", self.mu0));
        }
        if !(self.rho > 1.0 && self.rho < 2.0) {
            return bad(format!("rho must lie in (1, 2), got {}", self.rho));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return bad(format!("tolerance must be > 0, got {}", self.tolerance));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive".into());
        }
        Ok(())
    }
}

/// Every iterate of the optimiser.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub z: DMatrix<f64>,
    pub zhat: DMatrix<f64>,
    pub laplacian: DMatrix<f64>,
    /// Multiplier of `Z𝟏 = 𝟏`.
    pub phi1: DVector<f64>,
    /// Multiplier of `Zᵀ = Ẑ`.
    pub phi2: DMatrix<f64>,
    /// Multiplier of `L = I − Z`.
    pub phi3: DMatrix<f64>,
    /// Multiplier of `Ẑ = Z`.
    pub phi4: DMatrix<f64>,
    pub mu: f64,
    pub k: usize,
}

impl SolverState {
    /// Warm start at the weighted data average with zero multipliers.
    pub fn initial(data: &DataTerm, config: &SolverConfig) -> Self {
        let n = data.dim();
        let z = data.weighted.clone();
        let zhat = z.transpose();
        let laplacian = DMatrix::identity(n, n) - &z;
        SolverState {
            z,
            zhat,
            laplacian,
            phi1: DVector::zeros(n),
            phi2: DMatrix::zeros(n, n),
            phi3: DMatrix::zeros(n, n),
            phi4: DMatrix::zeros(n, n),
            mu: config.mu0,
            k: 0,
        }
    }

    /// Zero iterates of dimension `n` with penalty `mu`.
    pub fn zeros(n: usize, mu: f64) -> Self {
        SolverState {
            z: DMatrix::zeros(n, n),
            zhat: DMatrix::zeros(n, n),
            laplacian: DMatrix::zeros(n, n),
            phi1: DVector::zeros(n),
            phi2: DMatrix::zeros(n, n),
            phi3: DMatrix::zeros(n, n),
            phi4: DMatrix::zeros(n, n),
            mu,
            k: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.z.nrows()
    }
}

/// The data-fit part of the objective, reduced to `Σ α_m A_m` and `Σ α_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataTerm {
    weighted: DMatrix<f64>,
    alpha_total: f64,
}

impl DataTerm {
    pub fn new(graphs: &[RelationGraph], alphas: &[f64]) -> Result<Self> {
        let first = graphs
            .first()
            .ok_or_else(|| Error::InvalidConfig("at least one graph is required".into()))?;
        if graphs.len() != alphas.len() {
            return Err(Error::InvalidConfig(format!(
                "{} graphs but {} weights",
                graphs.len(),
                alphas.len()
            )));
        }
        let n = first.dim();
        let mut weighted = DMatrix::zeros(n, n);
        for (g, &a) in graphs.iter().zip(alphas) {
            if g.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, found: g.dim() });
            }
            weighted += g.adjacency() * a;
        }
        Ok(DataTerm { weighted, alpha_total: alphas.iter().sum() })
    }

    pub fn dim(&self) -> usize {
        self.weighted.nrows()
    }

    /// `Σ α_m A_m`.
    pub fn weighted(&self) -> &DMatrix<f64> {
        &self.weighted
    }
}

fn check_dim(expected: usize, m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != expected || m.ncols() != expected {
        return Err(Error::DimensionMismatch { expected, found: m.nrows().max(m.ncols()) });
    }
    Ok(())
}

/// `Σ_m α_m‖Z − A_m‖_F² + λ₁‖Z‖_F² + λ₂‖L‖_*`.
pub fn objective(
    z: &DMatrix<f64>,
    laplacian: &DMatrix<f64>,
    graphs: &[RelationGraph],
    config: &SolverConfig,
) -> Result<f64> {
    if graphs.len() != config.alphas.len() {
        return Err(Error::InvalidConfig(format!(
            "{} graphs but {} weights",
            graphs.len(),
            config.alphas.len()
        )));
    }
    let n = z.nrows();
    check_dim(n, z)?;
    check_dim(n, laplacian)?;
    let mut fit = 0.0;
    for (g, &a) in graphs.iter().zip(&config.alphas) {
        check_dim(n, g.adjacency())?;
        fit += a * (z - g.adjacency()).norm_squared();
    }
    let nuclear = if config.lambda2 == 0.0 { 0.0 } else { nuclear_norm(laplacian)? };
    Ok(fit + config.lambda1 * z.norm_squared() + config.lambda2 * nuclear)
}

// Objective with the nuclear norm of the Laplacian already known.
fn objective_from_parts(z: &DMatrix<f64>, graphs: &[RelationGraph], config: &SolverConfig, nuclear: f64) -> f64 {
    let fit: f64 = graphs
        .iter()
        .zip(&config.alphas)
        .map(|(g, &a)| a * (z - g.adjacency()).norm_squared())
        .sum();
    fit + config.lambda1 * z.norm_squared() + config.lambda2 * nuclear
}

/// Minimiser of the smooth augmented objective in `Z`, before clamping.
///
/// Setting the gradient to zero gives `Z M = R` with
/// `M = (2Σα + 2λ₁ + 3μ) I + μ𝟏𝟏ᵀ` and
/// `R = 2Σα_m A_m + μ(𝟏𝟏ᵀ + Ẑᵀ + Ẑ + I − L) − φ₁𝟏ᵀ − Φ₂ᵀ − Φ₃ + Φ₄`.
/// `M` is a scaled identity plus a rank-one term, so `M⁻¹` follows from
/// Sherman–Morrison: `Z = (R − β (R𝟏)𝟏ᵀ) / c` with `β = μ / (c + μN)`.
pub fn update_z_unclamped(state: &SolverState, data: &DataTerm, config: &SolverConfig) -> DMatrix<f64> {
    let n = state.dim();
    let mu = state.mu;
    let mut r = &data.weighted * 2.0;
    r += (&state.zhat + state.zhat.transpose() - &state.laplacian) * mu;
    r -= state.phi2.transpose();
    r -= &state.phi3;
    r += &state.phi4;
    for i in 0..n {
        r[(i, i)] += mu;
        for j in 0..n {
            r[(i, j)] += mu - state.phi1[i];
        }
    }
    let c = 2.0 * data.alpha_total + 2.0 * config.lambda1 + 3.0 * mu;
    let beta = mu / (c + mu * n as f64);
    let row_sums: DVector<f64> = r.column_sum();
    for i in 0..n {
        let shift = beta * row_sums[i];
        for j in 0..n {
            r[(i, j)] = (r[(i, j)] - shift) / c;
        }
    }
    r
}

fn clamp_nonnegative(mut z: DMatrix<f64>) -> DMatrix<f64> {
    z.apply(|v| *v = v.max(0.0));
    z
}

/// Closed-form `Z` step followed by `max{Z, 0}`.
pub fn update_z(state: &SolverState, graphs: &[RelationGraph], config: &SolverConfig) -> Result<DMatrix<f64>> {
    let data = DataTerm::new(graphs, &config.alphas)?;
    if data.dim() != state.dim() {
        return Err(Error::DimensionMismatch { expected: state.dim(), found: data.dim() });
    }
    Ok(clamp_nonnegative(update_z_unclamped(state, &data, config)))
}

/// `(2μ)⁻¹ (μZᵀ + μZ + Φ₂ + Φ₄)`.
pub fn update_zhat(state: &SolverState) -> DMatrix<f64> {
    let mu = state.mu;
    (state.z.transpose() * mu + &state.z * mu + &state.phi2 + &state.phi4) / (2.0 * mu)
}

/// Proximal step on the Laplacian: `svt(I − Z − Φ₃/μ, λ₂/μ)`.
pub fn update_laplacian(state: &SolverState, config: &SolverConfig) -> Result<DMatrix<f64>> {
    Ok(laplacian_step(state, config)?.0)
}

fn laplacian_step(state: &SolverState, config: &SolverConfig) -> Result<(DMatrix<f64>, f64)> {
    let n = state.dim();
    let target = DMatrix::identity(n, n) - &state.z - &state.phi3 / state.mu;
    svt_with_norm(&target, config.lambda2 / state.mu)
}

/// Dual ascent with the current `μ`, then `μ ← ρμ` and `k ← k + 1`.
pub fn update_multipliers(state: &mut SolverState, rho: f64) {
    let n = state.dim();
    let mu = state.mu;
    let row_excess = state.z.column_sum().add_scalar(-1.0);
    state.phi1 += row_excess * mu;
    state.phi2 += (state.z.transpose() - &state.zhat) * mu;
    state.phi3 += (&state.laplacian - DMatrix::identity(n, n) + &state.z) * mu;
    state.phi4 += (&state.zhat - &state.z) * mu;
    state.mu = rho * mu;
    state.k += 1;
}

/// Infinity-norm violation of each equality constraint.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residuals {
    /// `‖Z𝟏 − 𝟏‖_∞`
    pub row_sum: f64,
    /// `max|Zᵀ − Ẑ|`
    pub transpose: f64,
    /// `max|L − I + Z|`
    pub laplacian: f64,
    /// `max|Ẑ − Z|`
    pub copy: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.row_sum.max(self.transpose).max(self.laplacian).max(self.copy)
    }
}

pub fn constraint_residuals(state: &SolverState) -> Residuals {
    let n = state.dim();
    let z = &state.z;
    let mut row_sum = 0.0f64;
    let mut transpose = 0.0f64;
    let mut laplacian = 0.0f64;
    let mut copy = 0.0f64;
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..n {
            let zij = z[(i, j)];
            s += zij;
            transpose = transpose.max((z[(j, i)] - state.zhat[(i, j)]).abs());
            let eye = if i == j { 1.0 } else { 0.0 };
            laplacian = laplacian.max((state.laplacian[(i, j)] - eye + zij).abs());
            copy = copy.max((state.zhat[(i, j)] - zij).abs());
        }
        row_sum = row_sum.max((s - 1.0).abs());
    }
    Residuals { row_sum, transpose, laplacian, copy }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub residuals: Residuals,
    pub objective: f64,
    /// Penalty used during this iteration.
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// Symmetrised, row-normalised final `Z`.
    pub z: DMatrix<f64>,
    pub converged: bool,
    pub iterations: usize,
    pub trace: Vec<IterationRecord>,
}

impl SolveResult {
    pub fn final_residuals(&self) -> Option<Residuals> {
        self.trace.last().map(|r| r.residuals)
    }
}

/// One full sweep: `Z`, `Ẑ`, `L`, then multipliers. Returns the record
/// for the primal iterates produced.
pub fn step(
    state: &mut SolverState,
    data: &DataTerm,
    graphs: &[RelationGraph],
    config: &SolverConfig,
) -> Result<IterationRecord> {
    let mu = state.mu;
    state.z = clamp_nonnegative(update_z_unclamped(state, data, config));
    state.zhat = update_zhat(state);
    let (laplacian, nuclear) = laplacian_step(state, config)?;
    state.laplacian = laplacian;
    let record = IterationRecord {
        residuals: constraint_residuals(state),
        objective: objective_from_parts(&state.z, graphs, config, nuclear),
        mu,
    };
    update_multipliers(state, config.rho);
    Ok(record)
}

/// Runs the optimiser until every constraint residual is within
/// `config.tolerance` or the iteration cap is hit.
///
/// Hitting the cap is not an error; check [`SolveResult::converged`].
pub fn solve(graphs: &[RelationGraph], config: &SolverConfig) -> Result<SolveResult> {
    config.validate()?;
    let data = DataTerm::new(graphs, &config.alphas)?;
    if data.dim() < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 robots, got {}", data.dim())));
    }
    let mut state = SolverState::initial(&data, config);
    let mut trace = Vec::new();
    let mut converged = false;
    while state.k < config.max_iterations {
        let record = step(&mut state, &data, graphs, config)?;
        trace.push(record);
        if record.residuals.max() <= config.tolerance {
            converged = true;
            break;
        }
    }
    Ok(SolveResult {
        z: finalize(&state.z),
        converged,
        iterations: trace.len(),
        trace,
    })
}

/// `(Z + Zᵀ)/2` with every row rescaled to sum to one.
pub fn finalize(z: &DMatrix<f64>) -> DMatrix<f64> {
    let mut sym = (z + z.transpose()) * 0.5;
    for mut row in sym.row_iter_mut() {
        let s = row.sum();
        if s > 0.0 {
            row /= s;
        }
    }
    sym
}
