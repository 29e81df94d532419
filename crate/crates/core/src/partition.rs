//! Team assignment by recursive Fiedler cuts of the fused matrix.
//!
//! The whole index set is bisected by the sign pattern of the Fiedler vector
//! of its Laplacian; afterwards the largest group is repeatedly bisected using
//! the principal submatrix (minor) of `Z` on that group, until `r` groups exist.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Fiedler components with magnitude at or below this count as zero.
const ZERO_COMPONENT: f64 = 1e-10;
/// Accepted violation of the Laplacian zero-row-sum and symmetry checks.
const LAPLACIAN_TOL: f64 = 1e-8;
const EIGEN_EPS: f64 = 1e-15;
const EIGEN_MAX_ITER: usize = 10_000;

/// A split of robots `0..N` into `r` disjoint, non-empty teams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TeamAssignment {
    teams: Vec<Vec<usize>>,
    team_of: Vec<usize>,
}

impl TeamAssignment {
    /// Builds an assignment from groups, numbering teams by their smallest member.
    pub fn from_groups(mut groups: Vec<Vec<usize>>) -> Result<Self> {
        for g in &mut groups {
            g.sort_unstable();
        }
        if groups.iter().any(|g| g.is_empty()) {
            return Err(Error::InvalidAssignment("empty team".into()));
        }
        groups.sort_unstable_by_key(|g| g[0]);
        let n: usize = groups.iter().map(Vec::len).sum();
        let mut team_of = vec![usize::MAX; n];
        for (t, g) in groups.iter().enumerate() {
            for &i in g {
                if i >= n || team_of[i] != usize::MAX {
                    return Err(Error::InvalidAssignment(format!(
                        "robot {i} is repeated or out of range"
                    )));
                }
                team_of[i] = t;
            }
        }
        Ok(TeamAssignment { teams: groups, team_of })
    }

    /// Builds an assignment from an explicit team id per robot.
    pub fn from_team_of(team_of: Vec<usize>, r: usize) -> Result<Self> {
        let mut teams = vec![Vec::new(); r];
        for (i, &t) in team_of.iter().enumerate() {
            if t >= r {
                return Err(Error::InvalidAssignment(format!(
                    "robot {i} assigned to team {t} but r = {r}"
                )));
            }
            teams[t].push(i);
        }
        if let Some(t) = teams.iter().position(Vec::is_empty) {
            return Err(Error::InvalidAssignment(format!("team {t} has no robots")));
        }
        Ok(TeamAssignment { teams, team_of })
    }

    pub fn r(&self) -> usize {
        self.teams.len()
    }

    pub fn n_robots(&self) -> usize {
        self.team_of.len()
    }

    pub fn teams(&self) -> &[Vec<usize>] {
        &self.teams
    }

    pub fn team_of(&self) -> &[usize] {
        &self.team_of
    }

    pub fn team(&self, robot: usize) -> usize {
        self.team_of[robot]
    }

    /// Same teams with robot `i` relabelled to `perm[i]`, renumbered canonically.
    pub fn permuted(&self, perm: &[usize]) -> TeamAssignment {
        let groups = self
            .teams
            .iter()
            .map(|g| g.iter().map(|&i| perm[i]).collect())
            .collect();
        TeamAssignment::from_groups(groups).expect("permutation preserves validity")
    }

    /// Team numbering by smallest member, for comparisons that ignore labels.
    pub fn canonical(&self) -> TeamAssignment {
        TeamAssignment::from_groups(self.teams.clone()).expect("valid assignment")
    }
}

/// `D − W` on the principal submatrix of `Z` selected by `indices`, with
/// `W` symmetrised and `D` the diagonal of `W`'s row sums.
///
/// For the full index set of an exactly bistochastic `Z` this is `I − Z`.
pub fn minor_laplacian(z: &DMatrix<f64>, indices: &[usize]) -> Result<DMatrix<f64>> {
    if indices.is_empty() {
        return Err(Error::InvalidPartition("empty index set".into()));
    }
    if let Some(&i) = indices.iter().find(|&&i| i >= z.nrows() || i >= z.ncols()) {
        return Err(Error::InvalidPartition(format!("index {i} out of range")));
    }
    let m = indices.len();
    let w = DMatrix::from_fn(m, m, |a, b| {
        let (i, j) = (indices[a], indices[b]);
        0.5 * (z[(i, j)] + z[(j, i)])
    });
    let degrees: DVector<f64> = w.column_sum();
    let mut lap = -w;
    for a in 0..m {
        lap[(a, a)] += degrees[a];
    }
    Ok(lap)
}

/// Second-smallest Laplacian eigenvalue and a unit eigenvector for it.
///
/// The constant vector is deflated to the top of the spectrum first, so the
/// returned vector is orthogonal to `𝟏` even when the graph is disconnected.
/// The sign is fixed so the first non-zero component is positive.
pub fn fiedler_pair(laplacian: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    let n = laplacian.nrows();
    if laplacian.ncols() != n {
        return Err(Error::InvalidPartition("Laplacian must be square".into()));
    }
    if n < 2 {
        return Err(Error::InvalidPartition(format!(
            "Fiedler vector needs dimension >= 2, got {n}"
        )));
    }
    if laplacian.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidPartition("Laplacian has non-finite entries".into()));
    }
    let scale = laplacian.amax().max(1.0);
    for i in 0..n {
        let row_sum: f64 = laplacian.row(i).sum();
        if row_sum.abs() > LAPLACIAN_TOL * scale {
            return Err(Error::InvalidPartition(format!("row {i} sums to {row_sum}, not 0")));
        }
        for j in (i + 1)..n {
            if (laplacian[(i, j)] - laplacian[(j, i)]).abs() > LAPLACIAN_TOL * scale {
                return Err(Error::InvalidPartition("Laplacian is not symmetric".into()));
            }
        }
    }

    // Gershgorin: every eigenvalue is at most twice the largest degree.
    let shift = 2.0 * laplacian.diagonal().iter().map(|d| d.abs()).sum::<f64>() + 1.0;
    let deflated = laplacian + DMatrix::from_element(n, n, shift / n as f64);
    let eig = deflated
        .try_symmetric_eigen(EIGEN_EPS, EIGEN_MAX_ITER)
        .ok_or_else(|| Error::InvalidPartition("eigendecomposition did not converge".into()))?;
    let idx = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("non-empty spectrum");
    let value = eig.eigenvalues[idx];
    let mut v: DVector<f64> = eig.eigenvectors.column(idx).into_owned();
    let mean = v.mean();
    v.add_scalar_mut(-mean);
    let norm = v.norm();
    if norm > 0.0 {
        v /= norm;
    }
    if let Some(first) = v.iter().find(|c| c.abs() > ZERO_COMPONENT) {
        if *first < 0.0 {
            v.neg_mut();
        }
    }
    Ok((value, v))
}

pub fn fiedler_vector(laplacian: &DMatrix<f64>) -> Result<DVector<f64>> {
    Ok(fiedler_pair(laplacian)?.1)
}

/// Splits `indices` by the Fiedler vector of their minor Laplacian.
///
/// Returns `(non-negative side, negative side)`, each sorted ascending. Zero
/// components join the non-negative side. If the sign split leaves one side
/// empty, the indices are ranked by component (ties by index) and the lower
/// `⌈m/2⌉` form the first set.
pub fn fiedler_cut(z: &DMatrix<f64>, indices: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    if indices.len() < 2 {
        return Err(Error::InvalidPartition(format!(
            "cannot cut a group of {} robot(s)",
            indices.len()
        )));
    }
    let lap = minor_laplacian(z, indices)?;
    let v = fiedler_vector(&lap)?;

    let mut positive = Vec::new();
    let mut negative = Vec::new();
    for (&i, &c) in indices.iter().zip(v.iter()) {
        if c >= -ZERO_COMPONENT {
            positive.push(i);
        } else {
            negative.push(i);
        }
    }
    if positive.is_empty() || negative.is_empty() {
        let mut ranked: Vec<(f64, usize)> = v.iter().copied().zip(indices.iter().copied()).collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let lower = ranked.len().div_ceil(2);
        positive = ranked[..lower].iter().map(|&(_, i)| i).collect();
        negative = ranked[lower..].iter().map(|&(_, i)| i).collect();
    }
    positive.sort_unstable();
    negative.sort_unstable();
    Ok((positive, negative))
}

/// Cuts `Z` into `r` teams, always bisecting the largest current group
/// (ties go to the group holding the smallest robot index).
pub fn partition(z: &DMatrix<f64>, r: usize) -> Result<TeamAssignment> {
    let n = z.nrows();
    if z.ncols() != n {
        return Err(Error::InvalidPartition(format!("Z must be square, got {}x{}", n, z.ncols())));
    }
    if z.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidPartition("Z must be finite and non-negative".into()));
    }
    if r < 1 || r > n {
        return Err(Error::InvalidPartition(format!("team count must lie in 1..={n}, got {r}")));
    }
    let mut groups: Vec<Vec<usize>> = vec![(0..n).collect()];
    while groups.len() < r {
        let pick = groups
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.1[0].cmp(&a.1[0])))
            .map(|(i, _)| i)
            .expect("at least one group");
        let group = groups.swap_remove(pick);
        let (left, right) = fiedler_cut(z, &group)?;
        groups.push(left);
        groups.push(right);
    }
    TeamAssignment::from_groups(groups)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_laplacian(n: usize) -> DMatrix<f64> {
        let mut w = DMatrix::zeros(n, n);
        for i in 0..n - 1 {
            w[(i, i + 1)] = 1.0;
            w[(i + 1, i)] = 1.0;
        }
        minor_laplacian(&w, &(0..n).collect::<Vec<_>>()).unwrap()
    }

    fn block_z() -> DMatrix<f64> {
        DMatrix::from_row_slice(
            4,
            4,
            &[0.5, 0.5, 0.0, 0.0, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.5, 0.5, 0.0, 0.0, 0.5, 0.5],
        )
    }

    #[test]
    fn minor_laplacian_examples() {
        let z = DMatrix::from_row_slice(3, 3, &[0.2, 0.3, 0.5, 0.3, 0.4, 0.3, 0.5, 0.3, 0.2]);
        let lap = minor_laplacian(&z, &[0, 1, 2]).unwrap();
        assert!((&lap - (DMatrix::identity(3, 3) - &z)).amax() < 1e-15);

        let w = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let lap = minor_laplacian(&w, &[0, 1]).unwrap();
        assert_eq!(lap, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));

        let sub = minor_laplacian(&z, &[2, 0]).unwrap();
        for row in sub.row_iter() {
            assert!(row.sum().abs() < 1e-15);
        }
        assert_eq!(sub[(0, 1)], -0.5);
        assert!(minor_laplacian(&z, &[]).is_err());
        assert!(minor_laplacian(&z, &[3]).is_err());
    }

    #[test]
    fn fiedler_of_p2() {
        let v = fiedler_vector(&path_laplacian(2)).unwrap();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        assert!((v[0] - h).abs() < 1e-12 && (v[1] + h).abs() < 1e-12);
    }

    #[test]
    fn fiedler_of_p3() {
        let (value, v) = fiedler_pair(&path_laplacian(3)).unwrap();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        assert!((value - 1.0).abs() < 1e-12);
        assert!((v[0] - h).abs() < 1e-10);
        assert!(v[1].abs() < 1e-10);
        assert!((v[2] + h).abs() < 1e-10);
    }

    #[test]
    fn fiedler_of_two_components() {
        let lap = minor_laplacian(&block_z(), &[0, 1, 2, 3]).unwrap();
        let (value, v) = fiedler_pair(&lap).unwrap();
        assert!(value.abs() < 1e-12);
        assert!(v[0] > 0.0 && (v[0] - v[1]).abs() < 1e-12);
        assert!(v[2] < 0.0 && (v[2] - v[3]).abs() < 1e-12);
        assert!(v.sum().abs() < 1e-8);
    }

    #[test]
    fn fiedler_rejects_invalid_input() {
        assert!(fiedler_vector(&DMatrix::zeros(1, 1)).is_err());
        let not_laplacian = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        assert!(fiedler_vector(&not_laplacian).is_err());
    }

    #[test]
    fn cut_block_diagonal() {
        assert_eq!(fiedler_cut(&block_z(), &[0, 1, 2, 3]).unwrap(), (vec![0, 1], vec![2, 3]));
        assert!(fiedler_cut(&block_z(), &[2]).is_err());
    }

    #[test]
    fn cut_falls_back_to_median() {
        // No edges: every vector orthogonal to 1 is a Fiedler vector, and
        // both halves must still be non-empty.
        let z = DMatrix::zeros(5, 5);
        let (a, b) = fiedler_cut(&z, &[0, 1, 2, 3, 4]).unwrap();
        assert!(!a.is_empty() && !b.is_empty());
        assert_eq!(a.len() + b.len(), 5);
    }

    #[test]
    fn five_robot_example() {
        // Robots 1,2 and 3,4,5 of the worked example, zero-based.
        let mut z = DMatrix::from_element(5, 5, 0.01);
        for &(i, j) in &[(0, 1), (2, 3), (3, 4), (2, 4)] {
            z[(i, j)] = 0.45;
            z[(j, i)] = 0.45;
        }
        let (a, b) = fiedler_cut(&z, &[0, 1, 2, 3, 4]).unwrap();
        let mut halves = [a, b];
        halves.sort();
        assert_eq!(halves, [vec![0, 1], vec![2, 3, 4]]);
        let t = partition(&z, 3).unwrap();
        assert_eq!(t.teams()[0], vec![0, 1]);
        assert_eq!(t.r(), 3);
        assert!(t.teams()[1..].iter().all(|g| g.iter().all(|&i| i >= 2)));
    }

    #[test]
    fn partition_extremes() {
        let z = block_z();
        let one = partition(&z, 1).unwrap();
        assert_eq!(one.teams(), &[vec![0, 1, 2, 3]]);
        let all = partition(&z, 4).unwrap();
        assert_eq!(all.team_of(), &[0, 1, 2, 3]);
        assert!(partition(&z, 0).is_err());
        assert!(partition(&z, 5).is_err());
        let two = partition(&z, 2).unwrap();
        assert_eq!(two.teams(), &[vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn assignment_constructors() {
        let t = TeamAssignment::from_team_of(vec![1, 0, 1], 2).unwrap();
        assert_eq!(t.teams(), &[vec![1], vec![0, 2]]);
        assert_eq!(t.canonical().team_of(), &[0, 1, 0]);
        assert!(TeamAssignment::from_team_of(vec![0, 0, 2], 3).is_err());
        assert!(TeamAssignment::from_team_of(vec![0, 3], 2).is_err());
        assert!(TeamAssignment::from_groups(vec![vec![0, 1], vec![1]]).is_err());
        assert!(TeamAssignment::from_groups(vec![vec![0], vec![]]).is_err());
    }
}
