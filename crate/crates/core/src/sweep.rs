//! Lattice points on the probability simplex for graph-weight sweeps.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Number of lattice divisions for `step`, if `step` divides 1 evenly.
pub fn divisions(step: f64) -> Result<usize> {
    if !(step.is_finite() && step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidConfig(format!("sweep step must lie in (0, 1], got {step}")));
    }
    let d = libm::round(1.0 / step);
    if (d * step - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!("sweep step {step} does not divide 1")));
    }
    Ok(d as usize)
}

/// All `(α₁, α₂, α₃)` with components in `{0, step, 2·step, …, 1}` summing
/// to 1, ordered by `α₁` then `α₂`.
pub fn simplex_grid(step: f64) -> Result<Vec<[f64; 3]>> {
    let d = divisions(step)?;
    let scale = d as f64;
    let mut points = Vec::with_capacity((d + 1) * (d + 2) / 2);
    for i in 0..=d {
        for j in 0..=(d - i) {
            let k = d - i - j;
            points.push([i as f64 / scale, j as f64 / scale, k as f64 / scale]);
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tenth_step_has_66_points() {
        let grid = simplex_grid(0.1).unwrap();
        assert_eq!(grid.len(), 66);
        assert!(grid.contains(&[0.2, 0.1, 0.7]));
        for p in &grid {
            assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            assert!(p.iter().all(|a| *a >= 0.0));
        }
    }

    #[test]
    fn rejects_uneven_steps() {
        assert!(simplex_grid(0.3).is_err());
        assert!(simplex_grid(0.0).is_err());
        assert!(simplex_grid(1.5).is_err());
        assert_eq!(simplex_grid(1.0).unwrap().len(), 3);
        assert_eq!(simplex_grid(0.25).unwrap().len(), 15);
    }
}
