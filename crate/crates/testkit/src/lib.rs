//! Reference implementations used only by tests.
//!
//! Everything here is deliberately slow and written without reusing the
//! production code paths it is compared against: the nuclear-norm prox is
//! found by subgradient descent, gradients by central differences, spectra by
//! cyclic Jacobi rotations, and partitions by enumeration.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use teamfuse_core::sim::capability_names;
use teamfuse_core::{CapabilitySet, Environment, Position, RobotSpec, RobotSystem};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(lo..hi))
}

/// Random symmetric non-negative matrix with zero diagonal.
pub fn random_adjacency<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let w = rng.random_range(0.0..1.0);
            a[(i, j)] = w;
            a[(j, i)] = w;
        }
    }
    a
}

/// Random point on the probability simplex.
pub fn random_simplex<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|v| v / total).collect();
    // push the rounding residue into the last weight
    let head: f64 = w[..m - 1].iter().sum();
    w[m - 1] = 1.0 - head;
    w
}

// ---------------------------------------------------------------------------
// nuclear-norm prox

pub fn nuclear_norm(m: &DMatrix<f64>) -> f64 {
    m.singular_values().sum()
}

/// `tau‖L‖_* + ½‖L − G‖_F²`.
pub fn prox_objective(l: &DMatrix<f64>, g: &DMatrix<f64>, tau: f64) -> f64 {
    tau * nuclear_norm(l) + 0.5 * (l - g).norm_squared()
}

/// Minimises `tau‖L‖_* + ½‖L − G‖_F²` by subgradient descent with steps
/// `1/(k+1)`, using `U Vᵀ` of the current iterate as the nuclear-norm
/// subgradient. Returns the iterate with the lowest objective seen.
pub fn subgradient_prox(g: &DMatrix<f64>, tau: f64, iterations: usize) -> DMatrix<f64> {
    let mut l = g.clone();
    let mut best = l.clone();
    let mut best_f = prox_objective(&l, g, tau);
    for k in 0..iterations {
        let svd = l.clone().svd(true, true);
        let u = svd.u.unwrap();
        let v_t = svd.v_t.unwrap();
        // singular directions with σ = 0 contribute nothing: the zero
        // subgradient is valid there and avoids chattering
        let mut sub = DMatrix::zeros(l.nrows(), l.ncols());
        for (i, s) in svd.singular_values.iter().enumerate() {
            if *s > 1e-12 {
                sub += u.column(i) * v_t.row(i);
            }
        }
        let grad = (&l - g) + sub * tau;
        let step = 1.0 / (k as f64 + 1.0);
        l -= grad * step;
        let f = prox_objective(&l, g, tau);
        if f < best_f {
            best_f = f;
            best = l.clone();
        }
    }
    best
}

// ---------------------------------------------------------------------------
// finite differences

/// Central-difference gradient of `f` at `x`, entry by entry.
pub fn central_gradient<F: Fn(&DMatrix<f64>) -> f64>(f: F, x: &DMatrix<f64>, h: f64) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(x.nrows(), x.ncols());
    let mut probe = x.clone();
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            let orig = probe[(i, j)];
            probe[(i, j)] = orig + h;
            let up = f(&probe);
            probe[(i, j)] = orig - h;
            let down = f(&probe);
            probe[(i, j)] = orig;
            g[(i, j)] = (up - down) / (2.0 * h);
        }
    }
    g
}

/// Iterates entering the smooth `Z` sub-problem.
#[derive(Debug, Clone)]
pub struct AugmentedPoint {
    pub graphs: Vec<DMatrix<f64>>,
    pub alphas: Vec<f64>,
    pub lambda1: f64,
    pub zhat: DMatrix<f64>,
    pub laplacian: DMatrix<f64>,
    pub phi1: DVector<f64>,
    pub phi2: DMatrix<f64>,
    pub phi3: DMatrix<f64>,
    pub phi4: DMatrix<f64>,
    pub mu: f64,
}

impl AugmentedPoint {
    /// Every term of the augmented Lagrangian that depends on `Z`, written
    /// out term by term.
    pub fn smooth_objective(&self, z: &DMatrix<f64>) -> f64 {
        let n = z.nrows();
        let ones = DVector::from_element(n, 1.0);
        let eye = DMatrix::<f64>::identity(n, n);
        let mu = self.mu;
        let fit: f64 = self
            .graphs
            .iter()
            .zip(&self.alphas)
            .map(|(a, w)| w * (z - a).norm_squared())
            .sum();
        let rows = z * &ones - &ones + &self.phi1 / mu;
        let sym = z.transpose() - &self.zhat + &self.phi2 / mu;
        let lap = &self.laplacian - &eye + z + &self.phi3 / mu;
        let copy = &self.zhat - z + &self.phi4 / mu;
        fit + self.lambda1 * z.norm_squared()
            + 0.5 * mu * rows.norm_squared()
            + 0.5 * mu * sym.norm_squared()
            + 0.5 * mu * lap.norm_squared()
            + 0.5 * mu * copy.norm_squared()
    }
}

// ---------------------------------------------------------------------------
// symmetric eigendecomposition

/// Cyclic Jacobi eigendecomposition. Eigenvalues ascending; eigenvectors in
/// the matching columns.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut m = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

/// Unnormalised Laplacian `D − W`.
pub fn laplacian_of(w: &DMatrix<f64>) -> DMatrix<f64> {
    let n = w.nrows();
    let mut l = -w.clone();
    for i in 0..n {
        l[(i, i)] += w.row(i).sum();
    }
    l
}

// ---------------------------------------------------------------------------
// partitions

/// All labelings of `n` items into exactly `r` non-empty, canonically
/// numbered groups (restricted growth strings).
pub fn all_partitions(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, used: usize, n: usize, r: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            if used == r {
                out.push(prefix.clone());
            }
            return;
        }
        if r - used > n - prefix.len() {
            return;
        }
        for label in 0..=used.min(r - 1) {
            prefix.push(label);
            grow(prefix, used.max(label + 1), n, r, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), 0, n, r, &mut out);
    out
}

/// `Σ_teams Σ_{i,j ∈ team} z_ij`.
pub fn within_team_mass(z: &DMatrix<f64>, labels: &[usize]) -> f64 {
    let n = labels.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if labels[i] == labels[j] {
                total += z[(i, j)];
            }
        }
    }
    total
}

/// `Σ_teams cut(T, T̄) / |T|`, the objective relaxed by unnormalised
/// Laplacian bisection.
pub fn ratio_cut(z: &DMatrix<f64>, labels: &[usize]) -> f64 {
    let r = labels.iter().max().map_or(0, |m| m + 1);
    let n = labels.len();
    (0..r)
        .map(|t| {
            let size = labels.iter().filter(|&&l| l == t).count() as f64;
            let mut cut = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if labels[i] == t && labels[j] != t {
                        cut += z[(i, j)];
                    }
                }
            }
            cut / size
        })
        .sum()
}

/// Labeling into `r` teams with the largest within-team mass.
pub fn best_partition_by_mass(z: &DMatrix<f64>, r: usize) -> Vec<usize> {
    all_partitions(z.nrows(), r)
        .into_iter()
        .max_by(|a, b| within_team_mass(z, a).total_cmp(&within_team_mass(z, b)))
        .expect("at least one partition")
}

/// Labeling into `r` teams with the smallest ratio cut.
pub fn best_partition_by_ratio_cut(z: &DMatrix<f64>, r: usize) -> Vec<usize> {
    all_partitions(z.nrows(), r)
        .into_iter()
        .min_by(|a, b| ratio_cut(z, a).total_cmp(&ratio_cut(z, b)))
        .expect("at least one partition")
}

// ---------------------------------------------------------------------------
// planted systems

/// Parameters for systems with `sizes.len()` tight, well separated clusters.
#[derive(Debug, Clone)]
pub struct PlantedSpec {
    pub sizes: Vec<usize>,
    pub n_capabilities: usize,
    /// Distance of cluster centres from the middle of the unit square.
    pub spread: f64,
    /// Half-width of the square each cluster's robots are scattered in.
    pub jitter: f64,
}

impl PlantedSpec {
    pub fn new(sizes: Vec<usize>) -> Self {
        PlantedSpec { sizes, n_capabilities: 3, spread: 0.3, jitter: 0.06 }
    }
}

/// Clusters with centres evenly spaced on a circle. Within each cluster the
/// capabilities cycle through the universe, so every cluster of at least
/// `n_capabilities` robots holds every capability. Returns the system and
/// the planted cluster of each robot.
pub fn planted_system(spec: &PlantedSpec, seed: u64) -> (RobotSystem, Vec<usize>) {
    let mut rng = rng(seed);
    let k = spec.sizes.len();
    let mut robots = Vec::new();
    let mut truth = Vec::new();
    for (c, &size) in spec.sizes.iter().enumerate() {
        let angle = 2.0 * std::f64::consts::PI * c as f64 / k as f64;
        let (cx, cy) = (0.5 + spec.spread * angle.cos(), 0.5 + spec.spread * angle.sin());
        let offset = rng.random_range(0..spec.n_capabilities);
        for m in 0..size {
            let position = Position::new(
                cx + rng.random_range(-spec.jitter..spec.jitter),
                cy + rng.random_range(-spec.jitter..spec.jitter),
            );
            robots.push(RobotSpec {
                id: robots.len(),
                position,
                capabilities: CapabilitySet::single((m + offset) % spec.n_capabilities),
            });
            truth.push(c);
        }
    }
    let system = RobotSystem::new(robots, Environment::unit_square(), capability_names(spec.n_capabilities))
        .expect("planted system is valid");
    (system, truth)
}

/// Random permutation of `0..n`.
pub fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        p.swap(i, j);
    }
    p
}
