//! Small dense least-squares solver (Householder QR).
//!
//! All regressions in this crate are skinny (at most a few dozen columns), so
//! a self-contained QR keeps the numerics deterministic and dependency-free.
//! Matrices are stored column-major because the factorization and the design
//! builders both work column-wise.

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// Column-major dense matrix.
#[derive(Debug, Clone)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_columns(columns: Vec<Vec<f64>>) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        assert!(columns.iter().all(|c| c.len() == rows), "ragged columns");
        let mut data = Vec::with_capacity(rows * cols);
        for c in columns {
            data.extend_from_slice(&c);
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.rows + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.rows + i] = v;
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }
}

/// Ordinary least squares fit of `y` on the columns of `x`.
#[derive(Debug, Clone)]
pub struct LsFit {
    pub coef: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Sum of squared residuals.
    pub ssr: f64,
    /// Diagonal of (X'X)^-1, for coefficient standard errors.
    pub xtx_inv_diag: Vec<f64>,
    pub nobs: usize,
    pub nparams: usize,
}

impl LsFit {
    /// Classical OLS standard error of coefficient `j` with s^2 = SSR/(n-k).
    pub fn std_error(&self, j: usize) -> f64 {
        let dof = (self.nobs - self.nparams) as f64;
        (self.ssr / dof * self.xtx_inv_diag[j]).sqrt()
    }

    pub fn t_stat(&self, j: usize) -> f64 {
        self.coef[j] / self.std_error(j)
    }

    /// Residual variance SSR/n (maximum-likelihood convention, used by BIC).
    pub fn sigma2_ml(&self) -> f64 {
        self.ssr / self.nobs as f64
    }
}

/// Solve min ||y - X b||_2 via Householder QR. Errors on rank deficiency.
pub fn least_squares(x: &Matrix, y: &[f64]) -> Result<LsFit> {
    let (n, k) = (x.rows(), x.cols());
    assert_eq!(y.len(), n, "response length mismatch");
    if n < k || k == 0 {
        return Err(Error::InsufficientSample(format!(
            "least squares needs nobs >= nparams >= 1, got {n} x {k}"
        )));
    }

    // Per-column scale for the rank tolerance, from the unfactored matrix.
    let col_norms: Vec<f64> = (0..k)
        .map(|j| x.col(j).iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();

    let mut a = x.clone();
    let mut qty = y.to_vec();

    // Householder vectors overwrite the strict lower triangle of `a`.
    for j in 0..k {
        let alpha = {
            let cj = &a.col(j)[j..];
            let norm = cj.iter().map(|v| v * v).sum::<f64>().sqrt();
            if cj[0] >= 0.0 {
                -norm
            } else {
                norm
            }
        };
        if alpha.abs() <= col_norms[j].max(1.0) * 1e-10 {
            return Err(Error::SingularDesign(format!(
                "column {j} is numerically dependent on earlier columns"
            )));
        }

        // v = x_j - alpha e1, normalized so v[0] = 1.
        let v0 = a.get(j, j) - alpha;
        let mut vnorm2 = v0 * v0;
        for i in j + 1..n {
            vnorm2 += a.get(i, j) * a.get(i, j);
        }
        let beta = 2.0 / vnorm2;
        let mut v = vec![0.0; n - j];
        v[0] = v0;
        for i in j + 1..n {
            v[i - j] = a.get(i, j);
        }

        // Apply H = I - beta v v' to trailing columns and to y.
        for jj in j..k {
            let dot: f64 = {
                let cj = &a.col(jj)[j..];
                v.iter().zip(cj).map(|(vi, ci)| vi * ci).sum()
            };
            let s = beta * dot;
            let cj = &mut a.col_mut(jj)[j..];
            for (ci, vi) in cj.iter_mut().zip(&v) {
                *ci -= s * vi;
            }
        }
        let dot: f64 = v.iter().zip(&qty[j..]).map(|(vi, yi)| vi * yi).sum();
        let s = beta * dot;
        for (yi, vi) in qty[j..].iter_mut().zip(&v) {
            *yi -= s * vi;
        }

        a.set(j, j, alpha);
        for i in j + 1..n {
            a.set(i, j, 0.0);
        }
    }

    // Back substitution: R b = (Q'y)[..k].
    let mut coef = vec![0.0; k];
    for j in (0..k).rev() {
        let mut s = qty[j];
        for jj in j + 1..k {
            s -= a.get(j, jj) * coef[jj];
        }
        coef[j] = s / a.get(j, j);
    }

    // R^-1 (upper triangular), then diag of (X'X)^-1 = row sums of squares of R^-1.
    let mut rinv = vec![0.0; k * k]; // column-major k x k
    for j in (0..k).rev() {
        rinv[j * k + j] = 1.0 / a.get(j, j);
        for i in (0..j).rev() {
            let mut s = 0.0;
            for m in i + 1..=j {
                s += a.get(i, m) * rinv[j * k + m];
            }
            rinv[j * k + i] = -s / a.get(i, i);
        }
    }
    let xtx_inv_diag: Vec<f64> = (0..k)
        .map(|i| (i..k).map(|j| rinv[j * k + i] * rinv[j * k + i]).sum())
        .collect();

    let fitted: Vec<f64> = (0..n)
        .map(|i| compensated_sum((0..k).map(|j| x.get(i, j) * coef[j])))
        .collect();
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(yi, fi)| yi - fi).collect();
    let ssr = compensated_sum(residuals.iter().map(|r| r * r));

    Ok(LsFit { coef, fitted, residuals, ssr, xtx_inv_diag, nobs: n, nparams: k })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_linear_system() {
        // y = 2 + 3 t, no noise.
        let t: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<f64> = t.iter().map(|ti| 2.0 + 3.0 * ti).collect();
        let x = Matrix::from_columns(vec![vec![1.0; 20], t]);
        let fit = least_squares(&x, &y).unwrap();
        assert!((fit.coef[0] - 2.0).abs() < 1e-12);
        assert!((fit.coef[1] - 3.0).abs() < 1e-12);
        assert!(fit.ssr < 1e-20);
    }

    #[test]
    fn simple_regression_standard_error_matches_closed_form() {
        let t: Vec<f64> = (0..50).map(|i| i as f64).collect();
        // Deterministic "noise" with known values; closed forms computed below.
        let e: Vec<f64> = (0..50).map(|i| ((i * 37 % 11) as f64 - 5.0) / 7.0).collect();
        let y: Vec<f64> = t.iter().zip(&e).map(|(ti, ei)| 1.0 + 0.5 * ti + ei).collect();
        let x = Matrix::from_columns(vec![vec![1.0; 50], t.clone()]);
        let fit = least_squares(&x, &y).unwrap();

        let tbar = t.iter().sum::<f64>() / 50.0;
        let ybar = y.iter().sum::<f64>() / 50.0;
        let sxx: f64 = t.iter().map(|ti| (ti - tbar).powi(2)).sum();
        let sxy: f64 = t.iter().zip(&y).map(|(ti, yi)| (ti - tbar) * (yi - ybar)).sum();
        let b = sxy / sxx;
        assert!((fit.coef[1] - b).abs() < 1e-10);

        let s2 = fit.ssr / 48.0;
        let se_b = (s2 / sxx).sqrt();
        assert!((fit.std_error(1) - se_b).abs() / se_b < 1e-10);
    }

    #[test]
    fn residuals_orthogonal_to_regressors() {
        let t: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        let q: Vec<f64> = (0..100).map(|i| ((i * i) as f64).cos()).collect();
        let y: Vec<f64> = (0..100).map(|i| (i as f64 * 0.7).cos()).collect();
        let x = Matrix::from_columns(vec![vec![1.0; 100], t.clone(), q.clone()]);
        let fit = least_squares(&x, &y).unwrap();
        for col in [&t, &q] {
            let dot: f64 = fit.residuals.iter().zip(col.iter()).map(|(r, c)| r * c).sum();
            let norm: f64 = col.iter().map(|c| c * c).sum::<f64>().sqrt();
            let rnorm: f64 = fit.residuals.iter().map(|r| r * r).sum::<f64>().sqrt();
            assert!(dot.abs() / (norm * rnorm) < 1e-12);
        }
    }

    #[test]
    fn detects_collinear_columns() {
        let a: Vec<f64> = (0..30).map(|i| i as f64).collect();
        let b: Vec<f64> = a.iter().map(|v| 2.0 * v).collect();
        let y = vec![1.0; 30];
        let x = Matrix::from_columns(vec![vec![1.0; 30], a, b]);
        assert!(matches!(least_squares(&x, &y), Err(Error::SingularDesign(_))));
    }
}
