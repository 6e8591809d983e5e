//! Unit-root tests: augmented Dickey-Fuller and its residual-augmented
//! least-squares (RALS) variant, both with BIC lag selection.
//!
//! The test regression is
//!
//! ```text
//! dx[t] = a (+ b t) + rho x[t-1] + g_1 dx[t-1] + ... + g_k dx[t-k] + e[t]
//! ```
//!
//! with k chosen by BIC over 0..=max_lag on a common effective sample (all
//! candidates drop the first max_lag differences), then refit on the longest
//! usable sample. The t-ratio of rho is compared against response-surface
//! critical values.
//!
//! RALS reruns the selected regression augmented with the residual moment
//! terms `w1 = e^2 - m2` and `w2 = e^3 - m3 - 3 m2 e`, which carry
//! information when the errors are non-normal. Its t-ratio has the mixture
//! limit `rho * DF + sqrt(1 - rho^2) * N(0,1)` with `rho^2` the ratio of
//! augmented to unaugmented residual variances, so critical values are
//! interpolated in rho^2 from an embedded simulated table (see
//! `data/critical_values.txt` for provenance).

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{least_squares, LsFit, Matrix};

/// Deterministic terms in the test regression.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deterministic {
    TrendAndIntercept,
    Drift,
}

impl Deterministic {
    fn key(self) -> &'static str {
        match self {
            Deterministic::TrendAndIntercept => "trend",
            Deterministic::Drift => "drift",
        }
    }
}

/// Unit-root test request. Lag selection is always BIC.
#[derive(Debug, Clone, Copy)]
pub struct UnitRootSpec {
    pub deterministic: Deterministic,
    /// Upper bound of the BIC lag search; `None` uses the Schwert bound
    /// floor(12 (n/100)^(1/4)).
    pub max_lag: Option<usize>,
}

impl UnitRootSpec {
    pub fn new(deterministic: Deterministic) -> Self {
        Self { deterministic, max_lag: None }
    }
}

/// Significance levels used throughout the reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigLevel {
    OnePercent,
    FivePercent,
    TenPercent,
}

impl SigLevel {
    pub fn stars(self) -> &'static str {
        match self {
            SigLevel::OnePercent => "***",
            SigLevel::FivePercent => "**",
            SigLevel::TenPercent => "*",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Adf,
    Rals,
}

/// Unit-root test result.
#[derive(Debug, Clone)]
pub struct UnitRootOutcome {
    pub t_stat: f64,
    pub selected_lag: usize,
    /// Strongest level at which the unit-root null is rejected, if any.
    pub reject_at: Option<SigLevel>,
    pub variant: Variant,
    /// RALS only: ratio of augmented to unaugmented residual variances.
    pub rho2: Option<f64>,
}

/// Schwert's rule-of-thumb lag bound.
pub fn schwert_max_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

/// Augmented Dickey-Fuller test with BIC lag selection.
pub fn adf_test(x: &[f64], spec: &UnitRootSpec) -> Result<UnitRootOutcome> {
    let (fit, rho_idx, t_obs, k) = adf_fit(x, spec)?;
    let t_stat = fit.t_stat(rho_idx);
    let cv = critical_value_table().adf(spec.deterministic, t_obs);
    Ok(UnitRootOutcome {
        t_stat,
        selected_lag: k,
        reject_at: reject_level(t_stat, &cv),
        variant: Variant::Adf,
        rho2: None,
    })
}

/// RALS-ADF: rerun the BIC-selected regression augmented with second- and
/// third-moment residual terms.
pub fn rals_adf_test(x: &[f64], spec: &UnitRootSpec) -> Result<UnitRootOutcome> {
    let (fit, rho_idx, t_obs, k) = adf_fit(x, spec)?;
    let t = t_obs as f64;
    let m2 = fit.residuals.iter().map(|e| e * e).sum::<f64>() / t;
    let m3 = fit.residuals.iter().map(|e| e * e * e).sum::<f64>() / t;
    let w1: Vec<f64> = fit.residuals.iter().map(|e| e * e - m2).collect();
    let w2: Vec<f64> = fit
        .residuals
        .iter()
        .map(|e| e * e * e - m3 - 3.0 * m2 * e)
        .collect();

    let n = x.len();
    let s0 = k;
    let (mut cols, y) = adf_columns(x, k, s0, spec.deterministic);
    cols.push(w1);
    cols.push(w2);
    let aug = least_squares(&Matrix::from_columns(cols), &y)?;

    let mut rho2 = aug.ssr / fit.ssr;
    if rho2 > 1.0 && rho2 < 1.0 + 1e-9 {
        rho2 = 1.0; // augmentation is a superset fit; tolerate rounding
    }
    if !(rho2 > 0.0 && rho2 <= 1.0) {
        return Err(Error::NumericalDegeneracy(format!(
            "RALS rho2 = {rho2} outside (0, 1]"
        )));
    }
    debug_assert_eq!(aug.nobs, n - 1 - s0);

    let t_stat = aug.t_stat(rho_idx);
    let cv = critical_value_table().rals(spec.deterministic, rho2);
    Ok(UnitRootOutcome {
        t_stat,
        selected_lag: k,
        reject_at: reject_level(t_stat, &cv),
        variant: Variant::Rals,
        rho2: Some(rho2),
    })
}

fn reject_level(t: f64, cv: &CriticalValues) -> Option<SigLevel> {
    if t < cv.one {
        Some(SigLevel::OnePercent)
    } else if t < cv.five {
        Some(SigLevel::FivePercent)
    } else if t < cv.ten {
        Some(SigLevel::TenPercent)
    } else {
        None
    }
}

/// Design columns and response for the ADF regression with `k` lagged
/// differences, dropping the first `s0 >= k` differences.
fn adf_columns(x: &[f64], k: usize, s0: usize, det: Deterministic) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = x.len();
    let dx: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let t_obs = (n - 1) - s0;
    let mut cols: Vec<Vec<f64>> = vec![vec![1.0; t_obs]];
    if det == Deterministic::TrendAndIntercept {
        cols.push((0..t_obs).map(|i| (s0 + i + 1) as f64).collect());
    }
    cols.push(x[s0..n - 1].to_vec());
    for lag in 1..=k {
        cols.push(dx[s0 - lag..n - 1 - lag].to_vec());
    }
    let y = dx[s0..].to_vec();
    (cols, y)
}

/// Shared stage: BIC selection on the common sample, refit on the longest.
/// Returns (fit, index of the level coefficient, nobs, selected lag).
fn adf_fit(x: &[f64], spec: &UnitRootSpec) -> Result<(LsFit, usize, usize, usize)> {
    let n = x.len();
    let mut max_lag = spec.max_lag.unwrap_or_else(|| schwert_max_lag(n));
    if n < 25 + max_lag {
        if spec.max_lag.is_some() {
            return Err(Error::InsufficientSample(format!(
                "ADF needs n >= 25 + max_lag, got n = {n}, max_lag = {max_lag}"
            )));
        }
        // Shrink the automatic bound for short series.
        max_lag = n.saturating_sub(25);
        if n < 25 {
            return Err(Error::InsufficientSample(format!("ADF needs n >= 25, got {n}")));
        }
    }
    let det = spec.deterministic;
    let rho_idx = match det {
        Deterministic::TrendAndIntercept => 2,
        Deterministic::Drift => 1,
    };

    let mut best_k = 0usize;
    let mut best_bic = f64::INFINITY;
    let t_common = (n - 1) - max_lag;
    for k in 0..=max_lag {
        let (cols, y) = adf_columns(x, k, max_lag, det);
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

    let (cols, y) = adf_columns(x, best_k, best_k, det);
    let fit = least_squares(&Matrix::from_columns(cols), &y)?;
    let t_obs = fit.nobs;
    Ok((fit, rho_idx, t_obs, best_k))
}

/// Critical values at the three reporting levels.
#[derive(Debug, Clone, Copy)]
pub struct CriticalValues {
    pub one: f64,
    pub five: f64,
    pub ten: f64,
}

struct ResponseSurface {
    binf: f64,
    b1: f64,
    b2: f64,
    b3: f64,
}

impl ResponseSurface {
    fn at(&self, t: f64) -> f64 {
        self.binf + self.b1 / t + self.b2 / (t * t) + self.b3 / (t * t * t)
    }
}

struct CriticalValueTable {
    adf: Vec<(String, u8, ResponseSurface)>,
    rals: Vec<(String, f64, CriticalValues)>,
}

impl CriticalValueTable {
    fn adf(&self, det: Deterministic, t_obs: usize) -> CriticalValues {
        let key = det.key();
        let get = |level: u8| -> f64 {
            self.adf
                .iter()
                .find(|(k, l, _)| k == key && *l == level)
                .map(|(_, _, rs)| rs.at(t_obs as f64))
                .expect("table covers all adf spec/level pairs")
        };
        CriticalValues { one: get(1), five: get(5), ten: get(10) }
    }

    fn rals(&self, det: Deterministic, rho2: f64) -> CriticalValues {
        let key = det.key();
        let rows: Vec<&(String, f64, CriticalValues)> =
            self.rals.iter().filter(|(k, _, _)| k == key).collect();
        assert!(!rows.is_empty(), "table covers all rals specs");
        let r = rho2.clamp(rows[0].1, rows[rows.len() - 1].1);
        let hi = rows
            .iter()
            .position(|(_, g, _)| *g >= r)
            .unwrap_or(rows.len() - 1);
        if hi == 0 || rows[hi].1 == r {
            return rows[hi].2;
        }
        let (g0, c0) = (rows[hi - 1].1, rows[hi - 1].2);
        let (g1, c1) = (rows[hi].1, rows[hi].2);
        let w = (r - g0) / (g1 - g0);
        CriticalValues {
            one: c0.one + w * (c1.one - c0.one),
            five: c0.five + w * (c1.five - c0.five),
            ten: c0.ten + w * (c1.ten - c0.ten),
        }
    }
}

static TABLE: OnceLock<CriticalValueTable> = OnceLock::new();

fn critical_value_table() -> &'static CriticalValueTable {
    TABLE.get_or_init(|| {
        parse_table(include_str!("../data/critical_values.txt"))
            .expect("embedded critical value table is well formed")
    })
}

fn parse_table(content: &str) -> Result<CriticalValueTable> {
    let mut adf = Vec::new();
    let mut rals = Vec::new();
    for (lineno, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = |msg: &str| Error::Config(format!("critical value table line {}: {msg}", lineno + 1));
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| bad(&format!("bad number {s:?}")))
        };
        match fields.first() {
            Some(&"adf") => {
                if fields.len() != 7 {
                    return Err(bad("adf rows need 7 fields"));
                }
                let level: u8 = fields[2].parse().map_err(|_| bad("bad level"))?;
                adf.push((
                    fields[1].to_string(),
                    level,
                    ResponseSurface {
                        binf: parse(fields[3])?,
                        b1: parse(fields[4])?,
                        b2: parse(fields[5])?,
                        b3: parse(fields[6])?,
                    },
                ));
            }
            Some(&"rals") => {
                if fields.len() != 6 {
                    return Err(bad("rals rows need 6 fields"));
                }
                rals.push((
                    fields[1].to_string(),
                    parse(fields[2])?,
                    CriticalValues {
                        one: parse(fields[3])?,
                        five: parse(fields[4])?,
                        ten: parse(fields[5])?,
                    },
                ));
            }
            _ => return Err(bad("unknown row kind")),
        }
    }
    // Grids must be sorted for interpolation.
    rals.sort_by(|a, b| (a.0.as_str(), a.1).partial_cmp(&(b.0.as_str(), b.1)).unwrap());
    Ok(CriticalValueTable { adf, rals })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::{simulate_rep, ProcessKind, ProcessSpec};

    #[test]
    fn table_parses_and_orders_levels() {
        let t = critical_value_table();
        for det in [Deterministic::Drift, Deterministic::TrendAndIntercept] {
            let cv = t.adf(det, 1000);
            assert!(cv.one < cv.five && cv.five < cv.ten, "{cv:?}");
            assert!(cv.ten < 0.0);
            for rho2 in [0.05, 0.3, 0.77, 1.0] {
                let cv = t.rals(det, rho2);
                assert!(cv.one < cv.five && cv.five < cv.ten, "{cv:?}");
            }
        }
        // Asymptotic anchors.
        let cv = t.adf(Deterministic::Drift, 1_000_000);
        assert!((cv.five - (-2.8615)).abs() < 0.01);
        let cv = t.adf(Deterministic::TrendAndIntercept, 1_000_000);
        assert!((cv.five - (-3.4105)).abs() < 0.01);
    }

    #[test]
    fn rals_interpolation_is_monotone_in_rho2() {
        let t = critical_value_table();
        let mut prev = f64::INFINITY;
        for i in 0..=20 {
            let rho2 = 0.05 + 0.95 * i as f64 / 20.0;
            let cv = t.rals(Deterministic::Drift, rho2).five;
            assert!(cv <= prev + 1e-12, "cv not nonincreasing at rho2 = {rho2}");
            prev = cv;
        }
    }

    #[test]
    fn white_noise_rejects_strongly() {
        let spec = ProcessSpec::new(ProcessKind::IidNormal, 1000, 11).unwrap();
        let x = simulate_rep(&spec, 0).into_single();
        for det in [Deterministic::Drift, Deterministic::TrendAndIntercept] {
            let out = adf_test(&x, &UnitRootSpec::new(det)).unwrap();
            assert!(out.t_stat < -15.0, "t = {}", out.t_stat);
            assert_eq!(out.reject_at, Some(SigLevel::OnePercent));
            let out = rals_adf_test(&x, &UnitRootSpec::new(det)).unwrap();
            assert_eq!(out.reject_at, Some(SigLevel::OnePercent));
            let r2 = out.rho2.unwrap();
            assert!(r2 > 0.0 && r2 <= 1.0);
        }
    }

    #[test]
    fn random_walk_is_not_rejected_on_typical_draw() {
        let spec = ProcessSpec::new(ProcessKind::RandomWalk, 1000, 2024).unwrap();
        let x = simulate_rep(&spec, 0).into_single();
        let out = adf_test(&x, &UnitRootSpec::new(Deterministic::Drift)).unwrap();
        assert!(
            !matches!(out.reject_at, Some(SigLevel::OnePercent | SigLevel::FivePercent)),
            "t = {} rejected at 5%",
            out.t_stat
        );
    }

    #[test]
    fn i1_pattern_levels_keep_differences_reject() {
        let spec = ProcessSpec::new(ProcessKind::RandomWalk, 1200, 5150).unwrap();
        let x = simulate_rep(&spec, 0).into_single();
        let d: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let s = UnitRootSpec::new(Deterministic::TrendAndIntercept);
        assert!(adf_test(&x, &s).unwrap().reject_at.is_none());
        assert_eq!(adf_test(&d, &s).unwrap().reject_at, Some(SigLevel::OnePercent));
    }

    #[test]
    fn t_stat_is_affine_invariant() {
        let spec = ProcessSpec::new(ProcessKind::RandomWalk, 600, 9).unwrap();
        let x = simulate_rep(&spec, 0).into_single();
        for det in [Deterministic::Drift, Deterministic::TrendAndIntercept] {
            let s = UnitRootSpec::new(det);
            let base = adf_test(&x, &s).unwrap();
            let scaled: Vec<f64> = x.iter().map(|v| 13.5 * v - 4.2).collect();
            let out = adf_test(&scaled, &s).unwrap();
            assert!((base.t_stat - out.t_stat).abs() < 1e-9, "{} vs {}", base.t_stat, out.t_stat);
            assert_eq!(base.selected_lag, out.selected_lag);
        }
    }

    #[test]
    fn bic_selection_is_deterministic() {
        let spec = ProcessSpec::new(ProcessKind::RandomWalk, 500, 4).unwrap();
        let x = simulate_rep(&spec, 0).into_single();
        let s = UnitRootSpec::new(Deterministic::Drift);
        let a = adf_test(&x, &s).unwrap();
        let b = adf_test(&x, &s).unwrap();
        assert_eq!(a.selected_lag, b.selected_lag);
        assert_eq!(a.t_stat.to_bits(), b.t_stat.to_bits());
    }

    #[test]
    fn short_series_is_rejected() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        assert!(matches!(
            adf_test(&x, &UnitRootSpec::new(Deterministic::Drift)),
            Err(Error::InsufficientSample(_))
        ));
    }

    #[test]
    fn rals_close_to_adf_under_gaussian_unit_root() {
        // With normal errors the higher moments carry no extra information,
        // so the two t statistics agree closely on average.
        let spec = ProcessSpec::new(ProcessKind::RandomWalk, 400, 606).unwrap();
        let s = UnitRootSpec::new(Deterministic::Drift);
        let mut total = 0.0;
        let reps = 200;
        for rep in 0..reps {
            let x = simulate_rep(&spec, rep).into_single();
            let a = adf_test(&x, &s).unwrap();
            let r = rals_adf_test(&x, &s).unwrap();
            total += r.t_stat - a.t_stat;
        }
        let avg = total / reps as f64;
        assert!(avg.abs() < 0.5, "average RALS-ADF gap {avg}");
    }

    /// Regenerates the `rals` rows of data/critical_values.txt. Run with
    /// --ignored --nocapture and paste the output into the data file.
    #[test]
    #[ignore]
    fn regenerate_rals_critical_value_table() {
        use crate::mc::standard_normal;
        use crate::numeric::mean;
        use rand::SeedableRng;
        use rand_chacha::ChaCha8Rng;
        use rayon::prelude::*;

        let reps = 200_000usize;
        let t_len = 2000usize;
        let grid: Vec<f64> =
            [0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0].to_vec();

        for det in [Deterministic::Drift, Deterministic::TrendAndIntercept] {
            // Simulate the DF t distribution and an independent normal with
            // common random numbers across the grid.
            let draws: Vec<(f64, f64)> = (0..reps as u64)
                .into_par_iter()
                .map(|rep| {
                    let mut rng = ChaCha8Rng::seed_from_u64(20_160_105);
                    rng.set_stream(rep);
                    let mut level = 0.0;
                    let mut x = Vec::with_capacity(t_len);
                    for _ in 0..t_len {
                        level += standard_normal(&mut rng);
                        x.push(level);
                    }
                    let z: f64 = standard_normal(&mut rng);
                    let (cols, y) = adf_columns(&x, 0, 0, det);
                    let fit = least_squares(&Matrix::from_columns(cols), &y).unwrap();
                    let rho_idx = match det {
                        Deterministic::TrendAndIntercept => 2,
                        Deterministic::Drift => 1,
                    };
                    (fit.t_stat(rho_idx), z)
                })
                .collect();

            // Sanity anchor: the simulated DF 5% quantile must sit near the
            // response-surface value.
            let mut taus: Vec<f64> = draws.iter().map(|d| d.0).collect();
            taus.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let q5 = taus[(0.05 * reps as f64) as usize];
            let expect = critical_value_table().adf(det, t_len).five;
            assert!((q5 - expect).abs() < 0.05, "DF 5% quantile {q5} vs {expect}");
            eprintln!("# {} DF mean {:.4}, 5% {:.4}", det.key(), mean(&taus), q5);

            for rho2 in &grid {
                let rho = rho2.sqrt();
                let w = (1.0 - rho2).sqrt();
                let mut s: Vec<f64> = draws.iter().map(|(t, z)| rho * t + w * z).collect();
                s.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let q = |p: f64| s[(p * reps as f64) as usize];
                println!(
                    "rals {} {:.2} {:.5} {:.5} {:.5}",
                    det.key(),
                    rho2,
                    q(0.01),
                    q(0.05),
                    q(0.10)
                );
            }
        }
    }
}
