//! Singular-value thresholding, the proximal operator of the nuclear norm.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const SVD_EPS: f64 = 1e-15;
const SVD_MAX_ITER: usize = 10_000;

fn decompose(g: &DMatrix<f64>) -> Result<nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>> {
    g.clone()
        .try_svd(true, true, SVD_EPS, SVD_MAX_ITER)
        .ok_or_else(|| Error::SvdFailed { iterate: g.clone() })
}

/// Sum of singular values.
pub fn nuclear_norm(m: &DMatrix<f64>) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    Ok(decompose(m)?.singular_values.sum())
}

/// `U diag((σ - tau)+) Vᵀ`, the minimiser of `tau‖L‖_* + ½‖L - G‖_F²`.
pub fn svt(g: &DMatrix<f64>, tau: f64) -> Result<DMatrix<f64>> {
    Ok(svt_with_norm(g, tau)?.0)
}

/// Like [`svt`], also returning the nuclear norm of the result.
pub fn svt_with_norm(g: &DMatrix<f64>, tau: f64) -> Result<(DMatrix<f64>, f64)> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::InvalidConfig(alloc::format!("threshold must be >= 0, got {tau}")));
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::SvdFailed { iterate: g.clone() });
    }
    if g.is_empty() {
        return Ok((g.clone(), 0.0));
    }
    let svd = decompose(g)?;
    if tau == 0.0 {
        return Ok((g.clone(), svd.singular_values.sum()));
    }
    let shrunk: DVector<f64> = svd.singular_values.map(|s| (s - tau).max(0.0));
    let norm = shrunk.sum();
    // Both factors are present: decompose() requested them.
    let u = svd.u.expect("left singular vectors");
    let v_t = svd.v_t.expect("right singular vectors");
    let mut scaled_u = u;
    for (mut col, s) in scaled_u.column_iter_mut().zip(shrunk.iter()) {
        col *= *s;
    }
    Ok((scaled_u * v_t, norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn diagonal_shrinks_exactly() {
        let g = DMatrix::from_diagonal(&DVector::from_vec(alloc::vec![3.0, 1.0, 0.2]));
        let out = svt(&g, 0.5).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(alloc::vec![2.5, 0.5, 0.0]));
        assert!((out - expected).amax() <= 1e-10);
    }

    #[test]
    fn zero_stays_zero() {
        let g = DMatrix::<f64>::zeros(4, 4);
        assert_eq!(svt(&g, 0.7).unwrap().amax(), 0.0);
    }

    #[test]
    fn zero_threshold_is_identity_map() {
        let g = DMatrix::from_fn(3, 3, |i, j| (i as f64) - 2.0 * (j as f64) + 0.25);
        assert_eq!(svt(&g, 0.0).unwrap(), g);
    }

    #[test]
    fn rejects_negative_threshold_and_nan() {
        let g = DMatrix::<f64>::identity(2, 2);
        assert!(svt(&g, -1.0).is_err());
        let mut bad = g.clone();
        bad[(0, 1)] = f64::NAN;
        assert!(matches!(svt(&bad, 0.1), Err(Error::SvdFailed { .. })));
    }

    #[test]
    fn nuclear_norm_of_identity() {
        assert!((nuclear_norm(&DMatrix::<f64>::identity(5, 5)).unwrap() - 5.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn singular_values_never_grow(
            entries in proptest::collection::vec(-2.0..2.0f64, 16),
            tau in 0.0..1.5f64,
        ) {
            let g = DMatrix::from_vec(4, 4, entries);
            let (out, norm) = svt_with_norm(&g, tau).unwrap();
            let before = g.singular_values();
            let after = out.singular_values();
            let mut b: alloc::vec::Vec<f64> = before.iter().copied().collect();
            let mut a: alloc::vec::Vec<f64> = after.iter().copied().collect();
            b.sort_by(|x, y| y.total_cmp(x));
            a.sort_by(|x, y| y.total_cmp(x));
            for (sa, sb) in a.iter().zip(b.iter()) {
                prop_assert!(*sa <= *sb + 1e-9);
                prop_assert!((*sa - (*sb - tau).max(0.0)).abs() <= 1e-9);
            }
            prop_assert!((norm - a.iter().sum::<f64>()).abs() <= 1e-9);
        }
    }
}
