//! Bivariate VAR estimation and delinearization.
//!
//! Each series pair gets its own VAR(p) fitted equationwise by least squares
//! with an intercept; p minimizes the system BIC
//! `ln det(Sigma^) + K ln(T)/T` on a common effective sample, where Sigma^
//! is the ML residual covariance and K counts all estimated parameters.
//! The residual pair carries whatever cross-predictability is left after
//! removing linear structure.

use crate::error::{Error, Result};
use crate::linalg::{least_squares, Matrix};
use crate::numeric::compensated_sum;

/// Fitted bivariate VAR.
#[derive(Debug, Clone)]
pub struct VarFit {
    /// Selected (or requested) lag order.
    pub p: usize,
    /// Per-equation coefficients: intercept then lag-major, variable-minor
    /// (x lag 1, y lag 1, x lag 2, ...).
    pub coef_x: Vec<f64>,
    pub coef_y: Vec<f64>,
    pub fitted_x: Vec<f64>,
    pub fitted_y: Vec<f64>,
    pub resid_x: Vec<f64>,
    pub resid_y: Vec<f64>,
    /// Observations used (input length minus p).
    pub nobs: usize,
}

fn design(x: &[f64], y: &[f64], p: usize, s0: usize) -> (Matrix, Vec<f64>, Vec<f64>) {
    let n = x.len();
    let t_obs = n - s0;
    let mut cols: Vec<Vec<f64>> = vec![vec![1.0; t_obs]];
    for lag in 1..=p {
        cols.push(x[s0 - lag..n - lag].to_vec());
        cols.push(y[s0 - lag..n - lag].to_vec());
    }
    (Matrix::from_columns(cols), x[s0..].to_vec(), y[s0..].to_vec())
}

/// BIC lag selection for the bivariate system over p in 0..=pmax.
pub fn select_var_lag(x: &[f64], y: &[f64], pmax: usize) -> Result<usize> {
    if x.len() != y.len() {
        return Err(Error::Config("VAR inputs must have equal length".into()));
    }
    let n = x.len();
    if pmax > 0 && n < 20 * pmax {
        return Err(Error::InsufficientSample(format!(
            "VAR lag selection needs n >= 20 * pmax = {}, got {n}",
            20 * pmax
        )));
    }
    if n < 30 {
        return Err(Error::InsufficientSample(format!("VAR needs n >= 30, got {n}")));
    }

    // Common effective sample: all candidates drop the first pmax rows.
    let t = (n - pmax) as f64;
    let mut best_p = 0usize;
    let mut best_bic = f64::INFINITY;
    for p in 0..=pmax {
        let (xmat, yx, yy) = design(x, y, p, pmax);
        let fit_x = least_squares(&xmat, &yx)?;
        let fit_y = least_squares(&xmat, &yy)?;
        // ML residual covariance of the system.
        let s_xx = fit_x.ssr / t;
        let s_yy = fit_y.ssr / t;
        let s_xy = compensated_sum(
            fit_x
                .residuals
                .iter()
                .zip(&fit_y.residuals)
                .map(|(a, b)| a * b),
        ) / t;
        let det = s_xx * s_yy - s_xy * s_xy;
        if det <= 0.0 || !det.is_finite() {
            return Err(Error::NumericalDegeneracy(format!(
                "residual covariance determinant {det} at p = {p}"
            )));
        }
        let k_params = (2 * (1 + 2 * p)) as f64;
        let bic = det.ln() + k_params * t.ln() / t;
        if bic < best_bic {
            best_bic = bic;
            best_p = p;
        }
    }
    Ok(best_p)
}

/// Fit VAR(p) on the longest usable sample and extract residuals.
pub fn var_filter(x: &[f64], y: &[f64], p: usize) -> Result<VarFit> {
    if x.len() != y.len() {
        return Err(Error::Config("VAR inputs must have equal length".into()));
    }
    let n = x.len();
    if n < (2 * p + 1) + p + 5 {
        return Err(Error::InsufficientSample(format!(
            "VAR({p}) needs more than {} observations, got {n}",
            3 * p + 6
        )));
    }
    let (xmat, yx, yy) = design(x, y, p, p);
    let fit_x = least_squares(&xmat, &yx)?;
    let fit_y = least_squares(&xmat, &yy)?;
    Ok(VarFit {
        p,
        coef_x: fit_x.coef.clone(),
        coef_y: fit_y.coef.clone(),
        nobs: n - p,
        fitted_x: fit_x.fitted,
        fitted_y: fit_y.fitted,
        resid_x: fit_x.residuals,
        resid_y: fit_y.residuals,
    })
}

/// Select the lag by BIC, then filter. Returns the fit with its chosen p.
pub fn delinearize(x: &[f64], y: &[f64], pmax: usize) -> Result<VarFit> {
    let p = select_var_lag(x, y, pmax)?;
    var_filter(x, y, p)
}
