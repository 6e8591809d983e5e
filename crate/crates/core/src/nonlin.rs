//! Univariate nonlinearity screening: BDS test on pre-whitened residuals and
//! the Tsay F-test for quadratic serial dependence.
//!
//! BDS tests the iid null through the scaling relation C_m ~ C_1^m of
//! correlation integrals. For embedding dimension m and radius e,
//!
//! ```text
//! C_m(e) = #{ pairs of m-histories within max-norm distance e } / #pairs
//! W_m    = sqrt(N_m) (C_m - C_1^m) / sigma_m
//! ```
//!
//! with N_m = N - m + 1 history pairs, C_1 recomputed on the trailing N_m
//! points so both integrals see the same sample, and sigma_m^2 the standard
//! variance expansion in c = C_1 and the triple-indicator constant
//! k = E[I(x,y) I(y,z)]:
//!
//! ```text
//! sigma_m^2 = 4 [ k^m + 2 sum_{j=1..m-1} k^(m-j) c^(2j)
//!                 + (m-1)^2 c^(2m) - m^2 k c^(2m-2) ]
//! ```
//!
//! The pair scan walks the lag diagonals of the indicator matrix and tracks
//! run lengths, which yields every dimension's correlation count in one
//! O(N^2) pass; a naive per-pair product oracle lives in the tests.

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, FisherSnedecor, Normal};

use crate::error::{Error, Result};
use crate::linalg::{least_squares, Matrix};
use crate::numeric::variance;

/// BDS grid: embedding dimensions 2..=max_dim, radii multiplier * sd.
#[derive(Debug, Clone, PartialEq)]
pub struct BdsConfig {
    pub max_dim: usize,
    pub eps_multipliers: Vec<f64>,
    /// Asymptotic-validity guard on the sample size (overridable).
    pub min_n: usize,
}

impl Default for BdsConfig {
    fn default() -> Self {
        Self { max_dim: 4, eps_multipliers: vec![0.5, 1.0, 1.5, 2.0], min_n: 200 }
    }
}

impl BdsConfig {
    fn validate(&self) -> Result<()> {
        if self.max_dim < 2 {
            return Err(Error::Config("BDS needs max_dim >= 2".into()));
        }
        if self.eps_multipliers.is_empty() || self.eps_multipliers.iter().any(|m| *m <= 0.0) {
            return Err(Error::Config("BDS epsilon multipliers must be positive".into()));
        }
        Ok(())
    }
}

/// One BDS grid cell.
#[derive(Debug, Clone)]
pub struct BdsCell {
    pub dim: usize,
    pub eps_multiplier: f64,
    pub epsilon: f64,
    /// Asymptotically standard normal under the iid null.
    pub statistic: f64,
    /// Two-sided p-value.
    pub p_value: f64,
}

/// Full BDS grid outcome.
#[derive(Debug, Clone)]
pub struct BdsOutcome {
    pub cells: Vec<BdsCell>,
}

impl BdsOutcome {
    pub fn cell(&self, dim: usize, multiplier: f64) -> Option<&BdsCell> {
        self.cells
            .iter()
            .find(|c| c.dim == dim && (c.eps_multiplier - multiplier).abs() < 1e-12)
    }
}

/// Tsay F-test outcome at one lag.
#[derive(Debug, Clone)]
pub struct TsayOutcome {
    pub lag: usize,
    pub f_stat: f64,
    pub p_value: f64,
    pub df1: usize,
    pub df2: usize,
}

/// Residuals of the BIC-selected AR(k), k in 0..=max_lag. The intercept is
/// always included, so k = 0 demeans.
pub fn prewhiten(r: &[f64], max_lag: usize) -> Result<(Vec<f64>, usize)> {
    let n = r.len();
    if n < 50 {
        return Err(Error::InsufficientSample(format!(
            "prewhitening needs n >= 50, got {n}"
        )));
    }
    if variance(r) <= 0.0 {
        return Err(Error::DegenerateSeries("constant series cannot be pre-whitened".into()));
    }
    let max_lag = max_lag.min(n / 4);

    // BIC on the common sample that drops the first max_lag observations.
    let t_common = n - max_lag;
    let mut best_k = 0usize;
    let mut best_bic = f64::INFINITY;
    for k in 0..=max_lag {
        let (cols, y) = ar_columns(r, k, max_lag);
        let params = cols.len();
        if t_common <= params + 2 {
            break;
        }
        let fit = least_squares(&Matrix::from_columns(cols), &y)?;
        let bic = (fit.ssr / t_common as f64).ln()
            + params as f64 * (t_common as f64).ln() / t_common as f64;
        if bic < best_bic {
            best_bic = bic;
            best_k = k;
        }
    }

    let (cols, y) = ar_columns(r, best_k, best_k);
    let fit = least_squares(&Matrix::from_columns(cols), &y)?;
    Ok((fit.residuals, best_k))
}

fn ar_columns(r: &[f64], k: usize, s0: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = r.len();
    let t_obs = n - s0;
    let mut cols: Vec<Vec<f64>> = vec![vec![1.0; t_obs]];
    for lag in 1..=k {
        cols.push(r[s0 - lag..n - lag].to_vec());
    }
    (cols, r[s0..].to_vec())
}

/// Correlation integrals C_1..C_max_dim plus the variance ingredients,
/// shared by the statistic and the property tests.
pub(crate) struct CorrelationSums {
    /// C_m for m = 1..=max_dim (index 0 is C_1 over the full sample).
    pub c_m: Vec<f64>,
    /// C_1 over the trailing N - m + 1 points, for m = 2..=max_dim.
    pub c1_trailing: Vec<f64>,
    /// Triple-indicator constant estimate.
    pub k: f64,
}

pub(crate) fn correlation_sums(e: &[f64], eps: f64, max_dim: usize) -> CorrelationSums {
    let n = e.len();
    let mut pair_count = vec![0u64; max_dim + 1]; // index m: pairs of m-histories
    let mut trailing_ones = vec![0u64; max_dim + 1]; // index m: I pairs with t >= m-1
    let mut degree = vec![0u64; n];

    for d in 1..n {
        let mut run = 0usize;
        for t in 0..n - d {
            if (e[t] - e[t + d]).abs() < eps {
                run += 1;
                degree[t] += 1;
                degree[t + d] += 1;
                pair_count[1] += 1;
                for m in 2..=max_dim {
                    if run >= m {
                        pair_count[m] += 1;
                    }
                    if t >= m - 1 {
                        trailing_ones[m] += 1;
                    }
                }
            } else {
                run = 0;
            }
        }
    }

    let pairs = |count: usize| (count * (count - 1) / 2) as f64;
    let c_m: Vec<f64> = (1..=max_dim)
        .map(|m| pair_count[m] as f64 / pairs(n - m + 1))
        .collect();
    let c1_trailing: Vec<f64> = (2..=max_dim)
        .map(|m| trailing_ones[m] as f64 / pairs(n - m + 1))
        .collect();
    let triples: f64 = degree.iter().map(|&d| (d * d - d) as f64).sum();
    let k = triples / (n as f64 * (n as f64 - 1.0) * (n as f64 - 2.0));
    CorrelationSums { c_m, c1_trailing, k }
}

/// BDS iid test over the (dimension, radius) grid. `e` is typically a
/// pre-whitened residual series; radii are multiples of its standard
/// deviation, recomputed here.
pub fn bds_test(e: &[f64], cfg: &BdsConfig) -> Result<BdsOutcome> {
    cfg.validate()?;
    let n = e.len();
    if n < cfg.min_n.max(cfg.max_dim + 3) {
        return Err(Error::InsufficientSample(format!(
            "BDS needs n >= {}, got {n}",
            cfg.min_n.max(cfg.max_dim + 3)
        )));
    }
    let sd = variance(e).sqrt();
    if sd <= 0.0 {
        return Err(Error::DegenerateSeries("constant residual series".into()));
    }
    let normal = Normal::new(0.0, 1.0).expect("unit normal");

    // Grid cells are independent; parallelize over radii (each radius does
    // one O(n^2) diagonal scan covering every dimension).
    let per_eps: Vec<Result<Vec<BdsCell>>> = cfg
        .eps_multipliers
        .par_iter()
        .map(|&mult| {
            let eps = mult * sd;
            let sums = correlation_sums(e, eps, cfg.max_dim);
            let c = sums.c_m[0];
            if c == 0.0 {
                return Err(Error::DegenerateBandwidth(format!(
                    "no pairs within epsilon = {eps} (multiplier {mult})"
                )));
            }
            let k = sums.k;
            let mut cells = Vec::with_capacity(cfg.max_dim - 1);
            for m in 2..=cfg.max_dim {
                let n_m = (n - m + 1) as f64;
                let c_m = sums.c_m[m - 1];
                let c1_m = sums.c1_trailing[m - 2];
                let mf = m as f64;
                let mut var = k.powi(m as i32)
                    + (mf - 1.0).powi(2) * c.powi(2 * m as i32)
                    - mf * mf * k * c.powi(2 * m as i32 - 2);
                for j in 1..m {
                    var += 2.0 * k.powi((m - j) as i32) * c.powi(2 * j as i32);
                }
                var *= 4.0;
                if var <= 0.0 || !var.is_finite() {
                    return Err(Error::NumericalDegeneracy(format!(
                        "BDS variance {var} at m = {m}, eps = {eps}"
                    )));
                }
                let statistic = n_m.sqrt() * (c_m - c1_m.powi(m as i32)) / var.sqrt();
                let p_value = 2.0 * (1.0 - normal.cdf(statistic.abs()));
                cells.push(BdsCell { dim: m, eps_multiplier: mult, epsilon: eps, statistic, p_value });
            }
            Ok(cells)
        })
        .collect();

    let mut cells = Vec::new();
    for group in per_eps {
        cells.extend(group?);
    }
    Ok(BdsOutcome { cells })
}

/// Tsay test for quadratic serial dependence at AR order `lag`.
///
/// Stage one regresses the series on its first `lag` lags; stage two
/// orthogonalizes all lag cross-products against the same information set;
/// the F statistic measures the orthogonalized block's explanatory power for
/// the stage-one residuals, with (m, n_eff - lag - m - 1) degrees of freedom
/// where m = lag (lag + 1) / 2.
pub fn tsay_test(r: &[f64], lag: usize) -> Result<TsayOutcome> {
    if lag == 0 {
        return Err(Error::Config("Tsay test needs lag >= 1".into()));
    }
    let n = r.len();
    if n < 20 * lag {
        return Err(Error::InsufficientSample(format!(
            "Tsay test needs n >= 20 * lag = {}, got {n}",
            20 * lag
        )));
    }
    let n_eff = n - lag;
    let m = lag * (lag + 1) / 2;

    // Information set: intercept and lags 1..=lag.
    let mut info: Vec<Vec<f64>> = vec![vec![1.0; n_eff]];
    for i in 1..=lag {
        info.push(r[lag - i..n - i].to_vec());
    }
    let y = r[lag..].to_vec();
    let x1 = Matrix::from_columns(info.clone());
    let stage1 = least_squares(&x1, &y)?;

    // Cross products of lagged values, orthogonalized on the information set.
    let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(m);
    for i in 1..=lag {
        for j in i..=lag {
            let cross: Vec<f64> = (0..n_eff)
                .map(|t| r[lag + t - i] * r[lag + t - j])
                .collect();
            let fit = least_squares(&x1, &cross)?;
            ortho.push(fit.residuals);
        }
    }

    let z = Matrix::from_columns(ortho);
    let stage2 = least_squares(&z, &stage1.residuals).map_err(|e| match e {
        Error::SingularDesign(msg) => {
            Error::SingularDesign(format!("collinear cross-products: {msg}"))
        }
        other => other,
    })?;

    let df1 = m;
    let df2 = n_eff
        .checked_sub(lag + m + 1)
        .filter(|d| *d > 0)
        .ok_or_else(|| {
            Error::InsufficientSample(format!(
                "Tsay test has no residual degrees of freedom at lag {lag}"
            ))
        })?;
    let sse0 = stage1.ssr;
    let sse1 = stage2.ssr;
    let f_stat = ((sse0 - sse1) / df1 as f64) / (sse1 / df2 as f64);
    let fdist = FisherSnedecor::new(df1 as f64, df2 as f64)
        .map_err(|e| Error::NumericalDegeneracy(format!("F distribution: {e}")))?;
    let p_value = 1.0 - fdist.cdf(f_stat.max(0.0));
    Ok(TsayOutcome { lag, f_stat, p_value, df1, df2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::{simulate_rep, Innovations, ProcessKind, ProcessSpec};
    use crate::numeric::mean;

    /// Naive BDS pieces: explicit embeddings, per-pair products, cubic-time
    /// triple constant. Used only to cross-check the diagonal-scan version.
    fn naive_correlation_sums(e: &[f64], eps: f64, max_dim: usize) -> CorrelationSums {
        let n = e.len();
        let indicator = |a: usize, b: usize| (e[a] - e[b]).abs() < eps;
        let mut c_m = Vec::new();
        for m in 1..=max_dim {
            let n_m = n - m + 1;
            let mut count = 0u64;
            for i in 0..n_m {
                for j in i + 1..n_m {
                    if (0..m).all(|k| indicator(i + k, j + k)) {
                        count += 1;
                    }
                }
            }
            c_m.push(count as f64 / (n_m * (n_m - 1) / 2) as f64);
        }
        let mut c1_trailing = Vec::new();
        for m in 2..=max_dim {
            let n_m = n - m + 1;
            let start = m - 1;
            let mut count = 0u64;
            for i in start..n {
                for j in i + 1..n {
                    if indicator(i, j) {
                        count += 1;
                    }
                }
            }
            c1_trailing.push(count as f64 / (n_m * (n_m - 1) / 2) as f64);
        }
        let mut triples = 0u64;
        for t in 0..n {
            for s in 0..n {
                if s == t {
                    continue;
                }
                for u in 0..n {
                    if u == t || u == s {
                        continue;
                    }
                    if indicator(t, s) && indicator(t, u) {
                        triples += 1;
                    }
                }
            }
        }
        let k = triples as f64 / (n as f64 * (n as f64 - 1.0) * (n as f64 - 2.0));
        CorrelationSums { c_m, c1_trailing, k }
    }

    #[test]
    fn correlation_sums_match_naive_oracle() {
        for (rep, n) in [(0u64, 150usize), (1, 220), (2, 300)] {
            let spec = ProcessSpec::new(ProcessKind::IidNormal, n, 404).unwrap();
            let e = simulate_rep(&spec, rep).into_single();
            let eps = 0.8;
            let fast = correlation_sums(&e, eps, 4);
            let slow = naive_correlation_sums(&e, eps, 4);
            for m in 0..4 {
                let rel = (fast.c_m[m] - slow.c_m[m]).abs() / slow.c_m[m].max(1e-300);
                assert!(rel < 1e-10, "C_{} differs: {} vs {}", m + 1, fast.c_m[m], slow.c_m[m]);
            }
            for m in 0..3 {
                assert!((fast.c1_trailing[m] - slow.c1_trailing[m]).abs() < 1e-12);
            }
            assert!((fast.k - slow.k).abs() / slow.k < 1e-10, "{} vs {}", fast.k, slow.k);
        }
    }

    #[test]
    fn correlation_integral_properties() {
        let spec = ProcessSpec::new(ProcessKind::IidNormal, 250, 17).unwrap();
        let e = simulate_rep(&spec, 0).into_single();
        // Nondecreasing in epsilon, C_m <= C_{m-1}, and saturation at 1.
        let mut prev = vec![0.0; 4];
        for eps in [0.1, 0.25, 0.5, 1.0, 2.0, 4.0] {
            let s = correlation_sums(&e, eps, 4);
            for m in 0..4 {
                assert!(s.c_m[m] >= prev[m] - 1e-15, "C not monotone in eps");
                if m > 0 {
                    assert!(s.c_m[m] <= s.c_m[m - 1] + 1e-15, "C_m > C_(m-1)");
                }
            }
            prev = s.c_m.clone();
        }
        let s = correlation_sums(&e, 1e6, 4);
        for m in 0..4 {
            assert_eq!(s.c_m[m], 1.0);
        }
    }

    #[test]
    fn prewhiten_white_noise_mostly_selects_zero() {
        let spec = ProcessSpec::new(ProcessKind::IidNormal, 400, 23).unwrap();
        let mut zeros = 0;
        for rep in 0..200 {
            let r = simulate_rep(&spec, rep).into_single();
            let (_, k) = prewhiten(&r, 8).unwrap();
            if k == 0 {
                zeros += 1;
            }
        }
        assert!(zeros > 100, "k = 0 selected only {zeros}/200 times");
    }

    #[test]
    fn prewhiten_recovers_ar1_order() {
        let spec = ProcessSpec::new(
            ProcessKind::Ar { coeffs: vec![0.8], innovations: Innovations::Normal },
            2000,
            29,
        )
        .unwrap();
        let mut ones = 0;
        for rep in 0..200 {
            let r = simulate_rep(&spec, rep).into_single();
            let (res, k) = prewhiten(&r, 8).unwrap();
            if k == 1 {
                ones += 1;
            }
            // Residuals are mean zero and uncorrelated with their own lags.
            assert!(mean(&res).abs() < 1e-8);
            if k >= 1 {
                let c: f64 = res.windows(2).map(|w| w[0] * w[1]).sum::<f64>()
                    / res.iter().map(|v| v * v).sum::<f64>();
                assert!(c.abs() < 0.1, "lag-1 residual correlation {c}");
            }
        }
        assert!(ones >= 180, "k = 1 selected only {ones}/200 times");
    }

    #[test]
    fn prewhiten_rejects_constant() {
        let r = vec![2.0; 100];
        assert!(matches!(prewhiten(&r, 5), Err(Error::DegenerateSeries(_))));
    }

    #[test]
    fn bds_statistic_matches_naive_assembly() {
        // Full-statistic equivalence against an all-naive recomputation.
        let spec = ProcessSpec::new(ProcessKind::IidNormal, 300, 71).unwrap();
        let e = simulate_rep(&spec, 0).into_single();
        let cfg = BdsConfig { min_n: 100, ..Default::default() };
        let out = bds_test(&e, &cfg).unwrap();
        let sd = variance(&e).sqrt();
        for cell in &out.cells {
            let slow = naive_correlation_sums(&e, cell.epsilon, 4);
            let m = cell.dim;
            let n_m = (e.len() - m + 1) as f64;
            let c = slow.c_m[0];
            let k = slow.k;
            let mf = m as f64;
            let mut var = k.powi(m as i32) + (mf - 1.0).powi(2) * c.powi(2 * m as i32)
                - mf * mf * k * c.powi(2 * m as i32 - 2);
            for j in 1..m {
                var += 2.0 * k.powi((m - j) as i32) * c.powi(2 * j as i32);
            }
            var *= 4.0;
            let w = n_m.sqrt() * (slow.c_m[m - 1] - slow.c1_trailing[m - 2].powi(m as i32))
                / var.sqrt();
            let rel = (cell.statistic - w).abs() / w.abs().max(1e-300);
            assert!(rel < 1e-10, "m = {m}, eps = {}: {} vs {w}", cell.epsilon, cell.statistic);
        }
        assert!((out.cells[0].epsilon - 0.5 * sd).abs() < 1e-12);
    }

    #[test]
    fn bds_grid_is_complete_and_finite() {
        let spec = ProcessSpec::new(ProcessKind::IidNormal, 500, 3).unwrap();
        let e = simulate_rep(&spec, 0).into_single();
        let out = bds_test(&e, &BdsConfig::default()).unwrap();
        assert_eq!(out.cells.len(), 3 * 4); // m in 2..=4, four radii
        assert!(out.cells.iter().all(|c| c.statistic.is_finite()));
        assert!(out.cell(2, 1.0).is_some());
    }

    #[test]
    fn bds_rejects_logistic_map_strongly() {
        let spec = ProcessSpec::new(ProcessKind::LogisticMap { r: 4.0, x0: 0.3 }, 1000, 0).unwrap();
        let e = simulate_rep(&spec, 0).into_single();
        let cfg = BdsConfig { max_dim: 2, eps_multipliers: vec![1.0], min_n: 200 };
        let out = bds_test(&e, &cfg).unwrap();
        let stat = out.cells[0].statistic;
        assert!(stat > 10.0, "logistic-map BDS statistic {stat}");
    }

    #[test]
    fn bds_degenerate_epsilon_errors() {
        let spec = ProcessSpec::new(ProcessKind::IidNormal, 300, 1).unwrap();
        let e = simulate_rep(&spec, 0).into_single();
        let cfg = BdsConfig { max_dim: 2, eps_multipliers: vec![1e-12], min_n: 200 };
        assert!(matches!(bds_test(&e, &cfg), Err(Error::DegenerateBandwidth(_))));
    }

    #[test]
    fn tsay_f_is_affine_invariant() {
        let spec = ProcessSpec::new(
            ProcessKind::Ar { coeffs: vec![0.5], innovations: Innovations::Normal },
            800,
            12,
        )
        .unwrap();
        let r = simulate_rep(&spec, 0).into_single();
        for lag in [1usize, 3] {
            let base = tsay_test(&r, lag).unwrap();
            let scaled: Vec<f64> = r.iter().map(|v| -2.5 * v + 7.0).collect();
            let out = tsay_test(&scaled, lag).unwrap();
            assert!(
                (base.f_stat - out.f_stat).abs() < 1e-9 * base.f_stat.max(1.0),
                "lag {lag}: {} vs {}",
                base.f_stat,
                out.f_stat
            );
        }
    }

    #[test]
    fn tsay_detects_bilinear_dependence() {
        let spec = ProcessSpec::new(ProcessKind::Bilinear { coeff: 0.7 }, 1000, 88).unwrap();
        let r = simulate_rep(&spec, 0).into_single();
        let out = tsay_test(&r, 1).unwrap();
        assert!(out.p_value < 0.01, "F = {}, p = {}", out.f_stat, out.p_value);
        assert_eq!(out.df1, 1);
    }

    #[test]
    fn tsay_rejects_constant_and_short_input() {
        let r = vec![1.0; 200];
        assert!(tsay_test(&r, 2).is_err());
        let spec = ProcessSpec::new(ProcessKind::IidNormal, 30, 2).unwrap();
        let r = simulate_rep(&spec, 0).into_single();
        assert!(matches!(tsay_test(&r, 2), Err(Error::InsufficientSample(_))));
    }
}
