//! Nonparametric Granger non-causality test for a residual pair.
//!
//! Tests the null "x does not Granger-cause y" through its conditional
//! independence reformulation. With delay vectors X_t (last `l_x` values of
//! x), Y_t (last `l_y` values of y) and Z_t = Y_{t+1}, the functional
//!
//! ```text
//! q = E[ f_{X,Y,Z}(X,Y,Z) f_Y(Y) - f_{X,Y}(X,Y) f_{Y,Z}(Y,Z) ]
//! ```
//!
//! vanishes under the null. It is estimated by
//!
//! ```text
//! T_n = (n-1) / (n (n-2)) * sum_i [ f^_XYZ(i) f^_Y(i) - f^_XY(i) f^_YZ(i) ]
//! ```
//!
//! where each local density is an indicator-kernel estimate
//! `f^_U(U_i) = (2e)^(-d_U) (n-1)^(-1) sum_{j != i} I(||U_i - U_j||_max < e)`
//! with strict inequality at the boundary and a common bandwidth `e`.
//!
//! Standard error. T_n is a third-order U-statistic (the diagonal j = k
//! terms cancel identically because the joint indicators factor across
//! blocks), so its asymptotic variance is `9 Var(r(W))` with `r` the
//! one-point projection of the symmetrized kernel. S_n^2 estimates this by
//! placing each observation in all three kernel slots:
//!
//! ```text
//! A_i = h [ Cxyz_i Cy_i - Cxy_i Cyz_i ] / ((n-1)(n-2))
//! B_i = h sum_{a != i} [ Iy(a,i) Cxyz_a - Iyz(a,i) Cxy_a ] / ((n-1)(n-2))
//! C_i = h sum_{a != i} [ Ixyz(a,i) Cy_a - Ixy(a,i) Cyz_a ] / ((n-1)(n-2))
//! r_i = (A_i + B_i + C_i) / 3,    S_n^2 = 9 ( mean(r_i^2) - T_n^2 )
//! ```
//!
//! where `C*_i` are neighbor counts, `h = (2e)^(-(d_X + 2 d_Y + d_Z))`, and
//! `mean(r_i) = T_n` exactly. Under the null, `sqrt(n) T_n / S_n` is
//! asymptotically standard normal and the test is one-tailed (large positive
//! values reject). The bandwidth shrinks as `e = C n^(-beta)` with
//! `beta in (1/4, 1/3)` so the indicator-kernel bias vanishes faster than
//! the sqrt(n) rate.
//!
//! Both O(n^2) passes are data-parallel over the outer index; every row
//! accumulates integers, and the final floating-point reductions run
//! sequentially in index order with compensated summation, so results are
//! bit-identical for any worker count. `mc::dp_oracle` recomputes everything
//! with literal O(n^3) sums for equivalence testing.

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, standardize};

/// Bandwidth selection: fixed value or sample-size rule.
#[derive(Debug, Clone, PartialEq)]
pub enum Bandwidth {
    /// Explicit neighborhood radius (in standard deviations of the
    /// standardized residuals).
    Fixed(f64),
    Rule(BandwidthRule),
}

/// Shrinking bandwidth e(n) = clamp(c * n^(-beta), floor, cap).
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthRule {
    pub c: f64,
    pub beta: f64,
    pub floor: Option<f64>,
    pub cap: Option<f64>,
}

impl Default for BandwidthRule {
    /// c anchored so that n = 1517 maps to e ~ 1.15 with beta = 2/7.
    fn default() -> Self {
        Self { c: 9.3, beta: 2.0 / 7.0, floor: None, cap: None }
    }
}

impl BandwidthRule {
    pub fn validate(&self) -> Result<()> {
        if self.c <= 0.0 {
            return Err(Error::Config("bandwidth constant must be positive".into()));
        }
        if !(self.beta > 0.25 && self.beta < 1.0 / 3.0) {
            return Err(Error::Config(format!(
                "bandwidth exponent beta must lie in (1/4, 1/3), got {}",
                self.beta
            )));
        }
        if let (Some(f), Some(c)) = (self.floor, self.cap) {
            if f > c {
                return Err(Error::Config("bandwidth floor exceeds cap".into()));
            }
        }
        Ok(())
    }
}

/// Sample-size dependent bandwidth.
pub fn bandwidth(n: usize, rule: &BandwidthRule) -> Result<f64> {
    rule.validate()?;
    if n < 50 {
        return Err(Error::InsufficientSample(format!(
            "bandwidth rule needs n >= 50, got {n}"
        )));
    }
    let mut eps = rule.c * (n as f64).powf(-rule.beta);
    if let Some(f) = rule.floor {
        eps = eps.max(f);
    }
    if let Some(c) = rule.cap {
        eps = eps.min(c);
    }
    Ok(eps)
}

/// Test configuration: embedding lags and bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct DpConfig {
    pub l_x: usize,
    pub l_y: usize,
    pub bandwidth: Bandwidth,
}

impl DpConfig {
    /// Common-lag configuration with a fixed bandwidth.
    pub fn with_lag(lag: usize, epsilon: f64) -> Self {
        Self { l_x: lag, l_y: lag, bandwidth: Bandwidth::Fixed(epsilon) }
    }

    /// Common-lag configuration with the default shrinking-bandwidth rule.
    pub fn with_lag_and_rule(lag: usize, rule: BandwidthRule) -> Self {
        Self { l_x: lag, l_y: lag, bandwidth: Bandwidth::Rule(rule) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.l_x == 0 || self.l_y == 0 {
            return Err(Error::Config("embedding lags must be >= 1".into()));
        }
        if self.l_x != self.l_y {
            return Err(Error::Config(
                "common embedding lag required (l_x == l_y)".into(),
            ));
        }
        match &self.bandwidth {
            Bandwidth::Fixed(e) if *e > 0.0 && e.is_finite() => Ok(()),
            Bandwidth::Fixed(e) => Err(Error::Config(format!("bandwidth {e} must be positive"))),
            Bandwidth::Rule(r) => r.validate(),
        }
    }

    pub fn resolve_epsilon(&self, n: usize) -> Result<f64> {
        match &self.bandwidth {
            Bandwidth::Fixed(e) => Ok(*e),
            Bandwidth::Rule(r) => bandwidth(n, r),
        }
    }
}

/// Test outcome for one direction at one lag.
#[derive(Debug, Clone, PartialEq)]
pub struct DpOutcome {
    /// Estimate of the dependence functional q.
    pub t_n: f64,
    /// Estimated asymptotic standard error of sqrt(n) T_n.
    pub s_n: f64,
    /// One-tailed z-score, sqrt(n_eff) T_n / S_n.
    pub z: f64,
    /// Upper-tail p-value.
    pub p: f64,
    /// Embedded points remaining after delay-vector construction.
    pub n_eff: usize,
    /// Bandwidth actually used.
    pub epsilon: f64,
}

/// One direction per entry of a lag battery.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    XtoY,
    YtoX,
}

/// Battery entry: direction, lag, outcome.
#[derive(Debug, Clone)]
pub struct BatteryEntry {
    pub direction: Direction,
    pub lag: usize,
    pub outcome: DpOutcome,
}

/// Local indicator-kernel density estimate at point `i` of a d-dimensional
/// embedded sample (maximum norm, strict inequality).
pub fn local_density(points: &[Vec<f64>], i: usize, epsilon: f64) -> f64 {
    let n = points.len();
    assert!(n >= 2, "need at least two points");
    assert!(epsilon > 0.0, "epsilon must be positive");
    let d = points[i].len();
    let mut count = 0usize;
    for (j, p) in points.iter().enumerate() {
        if j == i {
            continue;
        }
        let close = p
            .iter()
            .zip(&points[i])
            .all(|(a, b)| (a - b).abs() < epsilon);
        if close {
            count += 1;
        }
    }
    (2.0 * epsilon).powi(-(d as i32)) * count as f64 / (n - 1) as f64
}

struct Counts {
    cy: Vec<u64>,
    cxy: Vec<u64>,
    cyz: Vec<u64>,
    cxyz: Vec<u64>,
}

/// Test that `x` does not Granger-cause `y`. Inputs are standardized to unit
/// variance internally so the bandwidth is in sigma units.
pub fn dp_statistic(x: &[f64], y: &[f64], cfg: &DpConfig) -> Result<DpOutcome> {
    if x.len() != y.len() {
        return Err(Error::Config("residual pair must have equal length".into()));
    }
    cfg.validate()?;
    let eps = cfg.resolve_epsilon(x.len())?;
    let xs = standardize(x)?;
    let ys = standardize(y)?;

    let lag = cfg.l_x;
    let n_raw = xs.len();
    if n_raw < lag + 2 {
        return Err(Error::InsufficientSample("series shorter than embedding".into()));
    }
    let n = n_raw - lag;
    if n < 50 {
        return Err(Error::InsufficientSample(format!(
            "need n_eff >= 50 embedded points, got {n}"
        )));
    }

    let (t_n, s_n, n) = dp_core(&xs, &ys, lag, eps, n)?;
    finish(t_n, s_n, n, eps)
}

/// Variant without the n_eff >= 50 guard, for oracle-equivalence testing on
/// short inputs. Identical computation otherwise.
pub fn dp_statistic_unchecked_len(x: &[f64], y: &[f64], cfg: &DpConfig) -> Result<DpOutcome> {
    if x.len() != y.len() {
        return Err(Error::Config("residual pair must have equal length".into()));
    }
    cfg.validate()?;
    let eps = cfg.resolve_epsilon(x.len())?;
    let xs = standardize(x)?;
    let ys = standardize(y)?;
    let lag = cfg.l_x;
    let n_raw = xs.len();
    if n_raw < lag + 2 {
        return Err(Error::InsufficientSample("series shorter than embedding".into()));
    }
    let n = n_raw - lag;
    if n < 3 {
        return Err(Error::InsufficientSample("need at least 3 embedded points".into()));
    }
    let (t_n, s_n, n) = dp_core(&xs, &ys, lag, eps, n)?;
    finish(t_n, s_n, n, eps)
}

fn finish(t_n: f64, s_n: f64, n: usize, eps: f64) -> Result<DpOutcome> {
    let z = (n as f64).sqrt() * t_n / s_n;
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let p = 1.0 - normal.cdf(z);
    Ok(DpOutcome { t_n, s_n, z, p, n_eff: n, epsilon: eps })
}

/// Shared O(n^2) core on standardized inputs: returns (T_n, S_n, n_eff).
fn dp_core(xs: &[f64], ys: &[f64], lag: usize, eps: f64, n: usize) -> Result<(f64, f64, usize)> {
    let base = lag - 1; // embedded point i corresponds to time base + i
    let nf = n as f64;
    let h = (2.0 * eps).powf(-(3.0 * lag as f64 + 1.0)); // d_X + 2 d_Y + d_Z

    // Joint indicators factor over blocks under the maximum norm:
    //   I_xyz = I_x & I_y & I_z,  I_xy = I_x & I_y,  I_yz = I_y & I_z.
    let pair = |a: usize, b: usize| -> (bool, bool, bool) {
        let (ta, tb) = (base + a, base + b);
        let ix = (0..lag).all(|k| (xs[ta - k] - xs[tb - k]).abs() < eps);
        let iy = (0..lag).all(|k| (ys[ta - k] - ys[tb - k]).abs() < eps);
        let iz = (ys[ta + 1] - ys[tb + 1]).abs() < eps;
        (ix, iy, iz)
    };

    // Pass 1: neighbor counts per embedded point. Each row scans all j, so
    // rows are independent and integer-exact.
    let mut counts = Counts {
        cy: vec![0; n],
        cxy: vec![0; n],
        cyz: vec![0; n],
        cxyz: vec![0; n],
    };
    {
        let Counts { cy, cxy, cyz, cxyz } = &mut counts;
        (cy.par_iter_mut(), cxy.par_iter_mut(), cyz.par_iter_mut(), cxyz.par_iter_mut())
            .into_par_iter()
            .enumerate()
            .for_each(|(i, (cy_i, cxy_i, cyz_i, cxyz_i))| {
                for j in 0..n {
                    if j == i {
                        continue;
                    }
                    let (ix, iy, iz) = pair(i, j);
                    *cy_i += iy as u64;
                    *cxy_i += (ix && iy) as u64;
                    *cyz_i += (iy && iz) as u64;
                    *cxyz_i += (ix && iy && iz) as u64;
                }
            });
    }

    if counts.cy.iter().all(|&c| c == 0) {
        return Err(Error::DegenerateBandwidth(format!(
            "epsilon {eps} produces no neighboring pairs"
        )));
    }

    // Pass 2: cross terms of the projection, reading other points' counts.
    let (b_num, c_num): (Vec<i64>, Vec<i64>) = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut b = 0i64;
            let mut c = 0i64;
            for a in 0..n {
                if a == i {
                    continue;
                }
                let (ix, iy, iz) = pair(a, i);
                if iy {
                    // b: Iy * Cxyz_a - Iyz * Cxy_a
                    b += counts.cxyz[a] as i64;
                    if iz {
                        b -= counts.cxy[a] as i64;
                    }
                    // c: Ixyz * Cy_a - Ixy * Cyz_a
                    if ix {
                        if iz {
                            c += counts.cy[a] as i64;
                        }
                        c -= counts.cyz[a] as i64;
                    }
                }
                // Terms with iy false contribute nothing: every joint
                // indicator contains the Y block.
            }
            (b, c)
        })
        .unzip();

    let denom = (nf - 1.0) * (nf - 2.0);
    let a_term = |i: usize| -> f64 {
        h * (counts.cxyz[i] as f64 * counts.cy[i] as f64
            - counts.cxy[i] as f64 * counts.cyz[i] as f64)
            / denom
    };
    let t_n = compensated_sum((0..n).map(a_term)) / nf;

    let r_sq = (0..n).map(|i| {
        let r = (a_term(i) + h * b_num[i] as f64 / denom + h * c_num[i] as f64 / denom) / 3.0;
        r * r
    });
    let mean_sq = compensated_sum(r_sq) / nf;
    let s2 = 9.0 * (mean_sq - t_n * t_n);
    if s2 <= 0.0 || !s2.is_finite() {
        return Err(Error::NumericalDegeneracy(format!(
            "variance estimate {s2} is not positive"
        )));
    }
    Ok((t_n, s2.sqrt(), n))
}

/// Both directions at every lag 1..=max_lag, with one shared bandwidth.
pub fn dp_direction_battery(
    x: &[f64],
    y: &[f64],
    max_lag: usize,
    epsilon: f64,
) -> Result<Vec<BatteryEntry>> {
    if max_lag == 0 {
        return Err(Error::Config("battery needs at least one lag".into()));
    }
    let mut out = Vec::with_capacity(2 * max_lag);
    for lag in 1..=max_lag {
        let cfg = DpConfig::with_lag(lag, epsilon);
        out.push(BatteryEntry {
            direction: Direction::XtoY,
            lag,
            outcome: dp_statistic(x, y, &cfg)?,
        });
        out.push(BatteryEntry {
            direction: Direction::YtoX,
            lag,
            outcome: dp_statistic(y, x, &cfg)?,
        });
    }
    Ok(out)
}
