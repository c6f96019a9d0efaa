//! Small dense linear-algebra and summary helpers shared across modules.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Ordinary least squares fit.
#[derive(Debug, Clone)]
pub struct OlsFit {
    pub coef: DVector<f64>,
    pub residuals: DVector<f64>,
    pub rss: f64,
    /// `(XᵀX)⁻¹`
    pub xtx_inv: DMatrix<f64>,
}

/// Solves `min ‖y − Xb‖²` through the Cholesky factor of `XᵀX`.
///
/// Rank deficiency is detected with a relative pivot test and reported as a
/// conditioning error rather than silently regularised.
pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<OlsFit> {
    if x.nrows() != y.len() {
        return Err(Error::Dimension(format!(
            "design has {} rows, response has {}",
            x.nrows(),
            y.len()
        )));
    }
    if x.nrows() < x.ncols() {
        return Err(Error::InsufficientData(format!(
            "{} observations for {} regressors",
            x.nrows(),
            x.ncols()
        )));
    }
    let xtx = x.tr_mul(x);
    let chol = checked_cholesky(&xtx).ok_or_else(|| Error::Conditioning {
        subset: (0..x.ncols()).collect(),
        message: "regressor cross-product matrix is singular".into(),
    })?;
    let coef = chol.solve(&x.tr_mul(y));
    let residuals = y - x * &coef;
    let rss = residuals.norm_squared();
    Ok(OlsFit {
        coef,
        residuals,
        rss,
        xtx_inv: chol.inverse(),
    })
}

/// Cholesky factorisation that also rejects numerically singular matrices
/// (smallest pivot below `1e-12` of the largest diagonal entry).
pub fn checked_cholesky(a: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    let scale = a.diagonal().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    let chol = Cholesky::new(a.clone())?;
    let l = chol.l_dirty();
    let min_pivot = (0..l.nrows()).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
    (min_pivot > 1e-12 * scale).then_some(chol)
}

/// `ln |A|` from a Cholesky factor.
pub fn chol_logdet(chol: &Cholesky<f64, Dyn>) -> f64 {
    let l = chol.l_dirty();
    2.0 * (0..l.nrows()).map(|i| l[(i, i)].ln()).sum::<f64>()
}

pub fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let mut s = a.clone();
    symmetrize(&mut s);
    s.symmetric_eigen().eigenvalues.min()
}

/// A factor `L` with `L Lᵀ = A` for a symmetric positive semidefinite `A`.
///
/// Tries Cholesky first and falls back to the eigen square root, clipping
/// negative eigenvalues to zero.
pub fn psd_factor(a: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(chol) = Cholesky::new(a.clone()) {
        return chol.l();
    }
    let mut s = a.clone();
    symmetrize(&mut s);
    let eig = s.symmetric_eigen();
    let sqrt_vals = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals)
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Sample variance with the `n − 1` divisor, two-pass.
pub fn sample_variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// Type-7 quantile (linear interpolation between order statistics) of
/// already sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n as f64 - 1.0) * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Sorts a copy with NaN-free total ordering.
pub fn sorted_copy(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ols_recovers_exact_line() {
        let x = DMatrix::from_fn(5, 2, |i, j| if j == 0 { 1.0 } else { i as f64 });
        let y = DVector::from_fn(5, |i, _| 2.0 + 3.0 * i as f64);
        let fit = ols(&x, &y).unwrap();
        assert_relative_eq!(fit.coef[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(fit.coef[1], 3.0, epsilon = 1e-12);
        assert!(fit.rss < 1e-20);
    }

    #[test]
    fn ols_rejects_collinear_columns() {
        let x = DMatrix::from_fn(6, 2, |i, _| i as f64 + 1.0);
        let y = DVector::from_element(6, 1.0);
        assert!(matches!(ols(&x, &y), Err(Error::Conditioning { .. })));
    }

    #[test]
    fn type7_quantiles() {
        let s = [1.0, 2.0, 3.0, 4.0];
        assert_relative_eq!(quantile_sorted(&s, 0.25), 1.75);
        assert_relative_eq!(quantile_sorted(&s, 0.5), 2.5);
        assert_relative_eq!(quantile_sorted(&s, 1.0), 4.0);
    }

    #[test]
    fn psd_factor_handles_singular_input() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let l = psd_factor(&a);
        assert!((&l * l.transpose() - &a).abs().max() < 1e-12);
    }
}
