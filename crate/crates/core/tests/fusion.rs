use nalgebra::{DMatrix, DVector};
use rand::Rng;
use teamfuse_core::fusion::{
    constraint_residuals, objective, solve, update_laplacian, update_z, update_z_unclamped, DataTerm,
    SolverConfig, SolverState,
};
use teamfuse_core::graph::{RelationGraph, RelationKind};
use teamfuse_core::prox::svt;
use teamfuse_core::sim::{build_graphs, generate_system, trial_rng, SimConfig};
use teamfuse_core::{CapabilitySet, Environment, Position, RobotSpec, RobotSystem};
use teamfuse_testkit as kit;

const SUBGRADIENT_ITERS: usize = 100_000;

#[test]
fn svt_matches_subgradient_oracle() {
    let mut rng = kit::rng(11);
    for _ in 0..20 {
        let g = kit::random_matrix(&mut rng, 4, 4, -1.0, 1.0);
        let fast = svt(&g, 0.3).unwrap();
        let slow = kit::subgradient_prox(&g, 0.3, SUBGRADIENT_ITERS);
        assert!((&fast - &slow).norm() <= 1e-4, "distance {}", (&fast - &slow).norm());
        assert!(kit::prox_objective(&fast, &g, 0.3) <= kit::prox_objective(&slow, &g, 0.3) + 1e-12);
    }
}

fn random_state<R: Rng>(rng: &mut R, n: usize) -> SolverState {
    let mut s = SolverState::zeros(n, rng.random_range(0.1..10.0));
    s.z = kit::random_matrix(rng, n, n, 0.0, 1.0);
    s.zhat = kit::random_matrix(rng, n, n, 0.0, 1.0);
    s.laplacian = kit::random_matrix(rng, n, n, -1.0, 1.0);
    s.phi1 = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    s.phi2 = kit::random_matrix(rng, n, n, -1.0, 1.0);
    s.phi3 = kit::random_matrix(rng, n, n, -1.0, 1.0);
    s.phi4 = kit::random_matrix(rng, n, n, -1.0, 1.0);
    s
}

#[test]
fn laplacian_update_matches_subgradient_oracle() {
    let mut rng = kit::rng(12);
    for _ in 0..20 {
        let state = random_state(&mut rng, 4);
        let cfg = SolverConfig { lambda2: rng.random_range(0.05..1.0), ..SolverConfig::uniform(1) };
        let fast = update_laplacian(&state, &cfg).unwrap();

        // λ₂‖L‖_* + μ/2 ‖L − I + Z + Φ₃/μ‖² = μ (τ‖L‖_* + ½‖L − T‖²)
        let eye = DMatrix::<f64>::identity(4, 4);
        let target = -(-&eye + &state.z + &state.phi3 / state.mu);
        let slow = kit::subgradient_prox(&target, cfg.lambda2 / state.mu, SUBGRADIENT_ITERS);
        assert!((&fast - &slow).norm() <= 1e-4, "distance {}", (&fast - &slow).norm());
    }
}

#[test]
fn laplacian_update_zero_threshold() {
    let mut rng = kit::rng(13);
    let state = random_state(&mut rng, 4);
    let cfg = SolverConfig { lambda2: 0.0, ..SolverConfig::uniform(1) };
    let expected = DMatrix::identity(4, 4) - &state.z - &state.phi3 / state.mu;
    assert!((update_laplacian(&state, &cfg).unwrap() - expected).amax() <= 1e-12);
}

#[test]
fn unclamped_z_is_stationary() {
    let mut rng = kit::rng(14);
    let n = 5;
    for _ in 0..20 {
        let m = rng.random_range(1..4);
        let adjacencies: Vec<DMatrix<f64>> = (0..m).map(|_| kit::random_adjacency(&mut rng, n)).collect();
        let graphs: Vec<RelationGraph> = adjacencies
            .iter()
            .map(|a| RelationGraph::new(RelationKind::Custom, a.clone()).unwrap())
            .collect();
        let alphas = kit::random_simplex(&mut rng, m);
        let cfg = SolverConfig {
            lambda1: rng.random_range(0.0..1.0),
            ..SolverConfig::with_alphas(alphas.clone())
        };
        let state = random_state(&mut rng, n);
        let data = DataTerm::new(&graphs, &cfg.alphas).unwrap();
        let z = update_z_unclamped(&state, &data, &cfg);

        let point = kit::AugmentedPoint {
            graphs: adjacencies,
            alphas,
            lambda1: cfg.lambda1,
            zhat: state.zhat.clone(),
            laplacian: state.laplacian.clone(),
            phi1: state.phi1.clone(),
            phi2: state.phi2.clone(),
            phi3: state.phi3.clone(),
            phi4: state.phi4.clone(),
            mu: state.mu,
        };
        let f = |x: &DMatrix<f64>| point.smooth_objective(x);
        let at_solution = kit::central_gradient(f, &z, 1e-6);
        let reference = kit::central_gradient(f, &DMatrix::zeros(n, n), 1e-6);
        let relative = at_solution.amax() / reference.amax().max(1.0);
        assert!(relative <= 1e-5, "relative gradient {relative}");
    }
}

#[test]
fn clamped_z_is_nonnegative() {
    let mut rng = kit::rng(15);
    for _ in 0..20 {
        let state = random_state(&mut rng, 5);
        let g = RelationGraph::new(RelationKind::Custom, kit::random_adjacency(&mut rng, 5)).unwrap();
        let z = update_z(&state, &[g], &SolverConfig::uniform(1)).unwrap();
        assert!(z.min() >= 0.0);
    }
}

fn pair_system() -> RobotSystem {
    let robots = [(0.20, 0.20, 0), (0.25, 0.20, 1), (0.80, 0.80, 0), (0.85, 0.80, 1)]
        .iter()
        .enumerate()
        .map(|(id, &(x, y, c))| RobotSpec {
            id,
            position: Position::new(x, y),
            capabilities: CapabilitySet::single(c),
        })
        .collect();
    RobotSystem::new(robots, Environment::unit_square(), vec!["rgb".into(), "depth".into()]).unwrap()
}

// Symmetric bistochastic matrices invariant under swapping robots 0↔3 and
// 1↔2, which maps the two-pair system onto itself. The objective is strictly
// convex, so its minimiser lies in this family.
fn pair_family(a: f64, b: f64, p: f64, q: f64) -> Option<DMatrix<f64>> {
    let s = 1.0 - a - p - q;
    let t = 1.0 - b - p - q;
    if [a, b, p, q].iter().any(|v| *v < 0.0) || s < 0.0 || t < 0.0 {
        return None;
    }
    Some(DMatrix::from_row_slice(4, 4, &[a, p, q, s, p, b, t, q, q, t, b, p, s, q, p, a]))
}

// coarse-to-fine grid search over the four free entries
fn grid_minimiser(f: impl Fn(&DMatrix<f64>) -> f64) -> (f64, DMatrix<f64>) {
    let mut best = (f64::INFINITY, [0.5; 4]);
    let (mut centre, mut h, mut span) = ([0.5; 4], 0.05, 10i32);
    for _ in 0..4 {
        for i in -span..=span {
            for j in -span..=span {
                for k in -span..=span {
                    for l in -span..=span {
                        let x = [
                            centre[0] + i as f64 * h,
                            centre[1] + j as f64 * h,
                            centre[2] + k as f64 * h,
                            centre[3] + l as f64 * h,
                        ];
                        if let Some(z) = pair_family(x[0], x[1], x[2], x[3]) {
                            let v = f(&z);
                            if v < best.0 {
                                best = (v, x);
                            }
                        }
                    }
                }
            }
        }
        centre = best.1;
        h /= 5.0;
        span = 6;
    }
    let x = best.1;
    (best.0, pair_family(x[0], x[1], x[2], x[3]).unwrap())
}

#[test]
fn two_pair_system_matches_grid_oracle() {
    let graphs = build_graphs(&pair_system(), 0.3).unwrap();
    let cfg = SolverConfig::uniform(3);
    let f = |z: &DMatrix<f64>| objective(z, &(DMatrix::identity(4, 4) - z), &graphs, &cfg).unwrap();
    let (grid_value, grid_z) = grid_minimiser(f);

    let res = solve(&graphs, &cfg).unwrap();
    assert!(res.converged);
    assert!(f(&res.z) <= grid_value + 1e-6, "solver {} grid {grid_value}", f(&res.z));
    assert!((&res.z - &grid_z).amax() <= 2e-3, "{}", (&res.z - &grid_z).amax());

    // partners dominate, but robots sharing a sensor stay linked across pairs
    assert!(res.z[(0, 1)] > 0.5 && res.z[(2, 3)] > 0.5);
    assert!(res.z[(0, 2)] > 0.25 && res.z[(1, 3)] > 0.25);
    assert!(res.z[(0, 3)] < 0.05 && res.z[(1, 2)] < 0.05);
}

#[test]
fn converged_results_are_feasible() {
    for seed in 0..5 {
        let cfg = SimConfig::new(12, 3, 3, seed);
        let system = generate_system(&cfg, &mut trial_rng(seed)).unwrap();
        let graphs = build_graphs(&system, cfg.comm_radius).unwrap();
        let res = solve(&graphs, &cfg.solver).unwrap();
        assert!(res.converged);
        assert!(res.final_residuals().unwrap().max() <= cfg.solver.tolerance);
        assert!(res.z.min() >= 0.0);
        assert!((&res.z - res.z.transpose()).amax() <= 2.0 * cfg.solver.tolerance);
        for row in res.z.row_iter() {
            assert!((row.sum() - 1.0).abs() <= 1e-12);
        }
        for (k, rec) in res.trace.iter().enumerate() {
            let expected = cfg.solver.mu0 * cfg.solver.rho.powi(k as i32);
            assert!((rec.mu - expected).abs() <= 1e-12 * expected);
        }
    }
}

#[test]
fn solve_is_permutation_equivariant() {
    let mut rng = kit::rng(16);
    for seed in 0..6 {
        let n = 4 + seed as usize % 5;
        let cfg = SimConfig::new(n, 3, 2, 100 + seed);
        let system = generate_system(&cfg, &mut trial_rng(cfg.seed)).unwrap();
        let graphs = build_graphs(&system, cfg.comm_radius).unwrap();
        let perm = kit::random_permutation(&mut rng, n);
        let permuted: Vec<RelationGraph> = graphs.iter().map(|g| g.permuted(&perm)).collect();

        let a = solve(&graphs, &cfg.solver).unwrap();
        let b = solve(&permuted, &cfg.solver).unwrap();
        let mut max_diff = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                max_diff = max_diff.max((a.z[(i, j)] - b.z[(perm[i], perm[j])]).abs());
            }
        }
        assert!(max_diff <= 1e-8, "n = {n}: max difference {max_diff}");
    }
}

#[test]
fn residuals_of_a_feasible_point_vanish() {
    let z = pair_family(0.3, 0.2, 0.4, 0.1).unwrap();
    let mut s = SolverState::zeros(4, 1.0);
    s.zhat = z.clone();
    s.laplacian = DMatrix::identity(4, 4) - &z;
    s.z = z;
    assert!(constraint_residuals(&s).max() <= 1e-15);
}
