//! Shared numerical helpers: compensated summation, moments, standardization.
//!
//! Every reduction that feeds a reported statistic goes through
//! [`compensated_sum`] in a fixed index-ascending order, so results are
//! bit-identical regardless of how outer loops are scheduled across threads.

use crate::error::{Error, Result};

/// Neumaier compensated summation over `values` in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn mean(x: &[f64]) -> f64 {
    compensated_sum(x.iter().copied()) / x.len() as f64
}

/// Central moments (1/n convention) up to order four: (mean, m2, m3, m4).
pub fn central_moments(x: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let m = mean(x);
    let m2 = compensated_sum(x.iter().map(|v| (v - m).powi(2))) / n;
    let m3 = compensated_sum(x.iter().map(|v| (v - m).powi(3))) / n;
    let m4 = compensated_sum(x.iter().map(|v| (v - m).powi(4))) / n;
    (m, m2, m3, m4)
}

/// Population variance (1/n).
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    compensated_sum(x.iter().map(|v| (v - m).powi(2))) / x.len() as f64
}

/// Center to zero mean and scale to unit (population) standard deviation.
pub fn standardize(x: &[f64]) -> Result<Vec<f64>> {
    if x.len() < 2 {
        return Err(Error::InsufficientSample(
            "need at least 2 observations to standardize".into(),
        ));
    }
    let m = mean(x);
    let sd = (compensated_sum(x.iter().map(|v| (v - m).powi(2))) / x.len() as f64).sqrt();
    if sd <= 0.0 || !sd.is_finite() {
        return Err(Error::DegenerateSeries(
            "zero variance: series cannot be standardized".into(),
        ));
    }
    Ok(x.iter().map(|v| (v - m) / sd).collect())
}
