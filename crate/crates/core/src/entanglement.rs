//! Two-mode reductions, logarithmic negativity and ladder correlators.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::{complex_moments, CovarianceState};

/// Two-mode covariance `[[A, C], [Cᵀ, B]]` in quadrature units (vacuum `I/2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeCovariance {
    pub a: Matrix2<f64>,
    pub b: Matrix2<f64>,
    pub c: Matrix2<f64>,
}

impl TwoModeCovariance {
    pub fn from_matrix(v: &Matrix4<f64>) -> Self {
        Self {
            a: v.fixed_view::<2, 2>(0, 0).into_owned(),
            b: v.fixed_view::<2, 2>(2, 2).into_owned(),
            c: v.fixed_view::<2, 2>(0, 2).into_owned(),
        }
    }

    pub fn matrix(&self) -> Matrix4<f64> {
        let mut v = Matrix4::zeros();
        v.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.a);
        v.fixed_view_mut::<2, 2>(2, 2).copy_from(&self.b);
        v.fixed_view_mut::<2, 2>(0, 2).copy_from(&self.c);
        v.fixed_view_mut::<2, 2>(2, 0).copy_from(&self.c.transpose());
        v
    }

    /// The same pair with the two modes exchanged.
    pub fn swapped(&self) -> Self {
        Self { a: self.b, b: self.a, c: self.c.transpose() }
    }

    /// Smallest symplectic eigenvalue of the partially transposed state.
    pub fn min_symplectic_eigenvalue(&self) -> Result<f64> {
        let sigma = self.a.determinant() + self.b.determinant() - 2.0 * self.c.determinant();
        let det_v = self.matrix().determinant();
        let mut disc = sigma * sigma - 4.0 * det_v;
        if disc < -1e-10 * sigma.powi(2).max(1.0) {
            return Err(Error::NumericalFailure(format!(
                "inadmissible two-mode covariance: σ² - 4 det V = {disc:.3e}"
            )));
        }
        disc = disc.max(0.0);
        let nu_sq = sigma / 2.0 - disc.sqrt() / 2.0;
        if nu_sq < -1e-12 {
            return Err(Error::NumericalFailure(format!(
                "inadmissible two-mode covariance: ν₋² = {nu_sq:.3e}"
            )));
        }
        Ok(nu_sq.max(0.0).sqrt())
    }
}

/// Rows and columns of `V` belonging to modes `i` and `j`, in that order.
pub fn extract_two_mode(state: &CovarianceState, i: &str, j: &str) -> Result<TwoModeCovariance> {
    let ii = state.registry.index(i)?;
    let jj = state.registry.index(j)?;
    if ii == jj {
        return Err(Error::InvalidParameter(format!("two-mode reduction needs distinct modes, got {i:?} twice")));
    }
    let idx = [2 * ii, 2 * ii + 1, 2 * jj, 2 * jj + 1];
    let v = Matrix4::from_fn(|r, c| state.covariance[(idx[r], idx[c])]);
    Ok(TwoModeCovariance::from_matrix(&v))
}

/// `max(0, -ln(2ν₋))`. Separable inputs (`ν₋ ≥ 1/2`) return exactly 0.
pub fn log_negativity(tm: &TwoModeCovariance) -> Result<f64> {
    let nu = tm.min_symplectic_eigenvalue()?;
    if 2.0 * nu >= 1.0 {
        Ok(0.0)
    } else {
        Ok(-(2.0 * nu).ln())
    }
}

/// Convenience: logarithmic negativity between two labelled modes.
pub fn mode_log_negativity(state: &CovarianceState, i: &str, j: &str) -> Result<f64> {
    log_negativity(&extract_two_mode(state, i, j)?)
}

/// `<ξ_i ξ_j>` for the annihilation operators of modes `i` and `j`.
pub fn mode_correlator(state: &CovarianceState, i: &str, j: &str) -> Result<Complex64> {
    let ii = state.registry.index(i)?;
    let jj = state.registry.index(j)?;
    Ok(complex_moments(state)[(2 * ii, 2 * jj)])
}
