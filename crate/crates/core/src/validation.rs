//! Validation suite: every release criterion as a runnable check.
//!
//! Criteria A1-A9 are unconditional property/oracle/Monte-Carlo checks.
//! Criteria B10-B12 reproduce published-style results and need the user to
//! supply the 1986-01-02..2015-02-05 daily SP500/WTI/Gold dataset (files
//! SP500.csv, WTI.csv, GOLD.csv under a data directory); without it they
//! report SKIPPED-CONDITIONAL. Everything is seeded, so outcomes are
//! deterministic for a given configuration.

use std::path::PathBuf;
use std::time::Instant;

use crate::dp::{
    bandwidth, dp_direction_battery, dp_statistic, dp_statistic_unchecked_len, BandwidthRule,
    DpConfig,
};
use crate::error::{Error, Result};
use crate::mc::{dp_oracle, simulate_rep, size_power, Innovations, ProcessKind, ProcessSpec};
use crate::nonlin::{bds_test, tsay_test, BdsConfig};
use crate::pipeline::{run_full_analysis, AnalysisSettings};
use crate::report::{hash_label, Provenance};
use crate::series::{align, describe, load_price_csv, to_returns, PriceSeries};
use crate::stationarity::{adf_test, rals_adf_test, Deterministic, SigLevel, UnitRootSpec};
use crate::var::{delinearize, select_var_lag, var_filter};
use crate::windows::{
    run_family, star_aggregate, FamilyKind, PipelineConfig, StarClass,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    SkippedConditional,
}

/// One criterion's verdict.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: &'static str,
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        let status = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::SkippedConditional => "SKIPPED-CONDITIONAL",
        };
        format!("{:<4} {:<38} {status} ({})", self.id, self.name, self.detail)
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }
}

/// Suite configuration.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Reduced replication counts for a fast smoke run; thresholds unchanged.
    pub quick: bool,
    /// Directory holding SP500.csv / WTI.csv / GOLD.csv for the conditional
    /// criteria.
    pub data_dir: Option<PathBuf>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { seed: 20_150_205, quick: false, data_dir: None }
    }
}

impl SuiteConfig {
    fn reps(&self, full: usize) -> usize {
        if self.quick {
            (full / 4).max(100)
        } else {
            full
        }
    }
}

fn pass(id: &'static str, name: &'static str, ok: bool, detail: String) -> CriterionReport {
    CriterionReport {
        id,
        name,
        status: if ok { Status::Pass } else { Status::Fail },
        detail,
    }
}

/// A1: the optimized statistic matches the literal-sum oracle.
pub fn a1_oracle_equivalence(cfg: &SuiteConfig) -> CriterionReport {
    let start = Instant::now();
    let pairs = if cfg.quick { 30 } else { 100 };
    use rayon::prelude::*;
    struct PairResult {
        max_rel: f64,
        compared: usize,
        degenerate: usize,
        divergence: Option<String>,
    }
    let results: Vec<PairResult> = (0..pairs)
        .into_par_iter()
        .map(|i| {
            // Deterministic n schedule sweeping [30, 200] (stride 53 is
            // coprime to the range width, so all residues are visited).
            let n = 30 + (i * 53 + 17) % 171;
            let spec = ProcessSpec::new(ProcessKind::IidNormal, n, cfg.seed ^ 0xA1).unwrap();
            let x = simulate_rep(&spec, (2 * i) as u64).into_single();
            let y = simulate_rep(&spec, (2 * i + 1) as u64).into_single();
            let mut out = PairResult { max_rel: 0.0, compared: 0, degenerate: 0, divergence: None };
            for lag in [1usize, 2] {
                for eps in [0.5, 1.0, 1.5] {
                    let c = DpConfig::with_lag(lag, eps);
                    // Differences are judged relative to the statistic itself
                    // or, when the statistic's integer kernel counts cancel to
                    // exact zero, to a single kernel-count quantum.
                    let n_eff = (x.len() - lag) as f64;
                    let quantum = (2.0 * eps).powf(-(3.0 * lag as f64 + 1.0))
                        / (n_eff * (n_eff - 1.0) * (n_eff - 2.0));
                    match (dp_statistic_unchecked_len(&x, &y, &c), dp_oracle(&x, &y, &c)) {
                        (Ok(fast), Ok(slow)) => {
                            let rel_t =
                                (fast.t_n - slow.t_n).abs() / slow.t_n.abs().max(quantum);
                            let rel_s =
                                (fast.s_n - slow.s_n).abs() / slow.s_n.abs().max(quantum);
                            out.max_rel = out.max_rel.max(rel_t).max(rel_s);
                            out.compared += 1;
                        }
                        (Err(a), Err(b)) if a == b => out.degenerate += 1,
                        (f, s) => {
                            out.divergence = Some(format!(
                                "divergent outcomes at n={n} lag={lag} eps={eps}: {f:?} vs {s:?}"
                            ));
                        }
                    }
                }
            }
            out
        })
        .collect();
    let mut max_rel: f64 = 0.0;
    let mut compared = 0usize;
    let mut degenerate_matches = 0usize;
    for r in results {
        if let Some(msg) = r.divergence {
            return pass("A1", "dp optimized vs naive oracle", false, msg);
        }
        max_rel = max_rel.max(r.max_rel);
        compared += r.compared;
        degenerate_matches += r.degenerate;
    }
    let ok = max_rel <= 1e-10 && compared > 0;
    pass(
        "A1",
        "dp optimized vs naive oracle",
        ok,
        format!(
            "{compared} comparisons, {degenerate_matches} matched degeneracies, max rel err {max_rel:.2e}, {:.1}s",
            start.elapsed().as_secs_f64()
        ),
    )
}

/// A2: one-tailed size under independence at 5% stays in [2%, 9%].
pub fn a2_dp_size(cfg: &SuiteConfig) -> CriterionReport {
    let reps = cfg.reps(500);
    let n = 1000;
    let spec = ProcessSpec::new(ProcessKind::IidNormal, n, cfg.seed ^ 0xA2).unwrap();
    let test = DpConfig::with_lag(1, 1.5);
    let rep = size_power("dp-size", 0.05, reps, |r| {
        let x = simulate_rep(&spec, 2 * r).into_single();
        let y = simulate_rep(&spec, 2 * r + 1).into_single();
        Ok(dp_statistic(&x, &y, &test)?.p < 0.05)
    })
    .expect("suite config is valid");
    let ok = (0.02..=0.09).contains(&rep.rejection_rate);
    pass(
        "A2",
        "dp size under independence",
        ok,
        format!(
            "rate {:.3} (target [0.02, 0.09], {} reps, ci +/-{:.3})",
            rep.rejection_rate, rep.replications, rep.ci_half_width
        ),
    )
}

/// A3: quadratic causality is detected in the causal direction only.
pub fn a3_dp_power_direction(cfg: &SuiteConfig) -> CriterionReport {
    let reps = cfg.reps(200);
    let n = 2000;
    let spec = ProcessSpec::new(ProcessKind::NonlinearCausal { coeff: 0.5 }, n, cfg.seed ^ 0xA3)
        .unwrap();
    let eps = bandwidth(n, &BandwidthRule::default()).unwrap();
    let run_dir = |r: u64, forward: bool| -> Result<bool> {
        let (x, y) = simulate_rep(&spec, r).into_pair();
        let fit = delinearize(&x, &y, 5)?;
        let c = DpConfig::with_lag(1, eps);
        let out = if forward {
            dp_statistic(&fit.resid_x, &fit.resid_y, &c)?
        } else {
            dp_statistic(&fit.resid_y, &fit.resid_x, &c)?
        };
        Ok(out.p < 0.05)
    };
    let fwd = size_power("dp-power-xy", 0.05, reps, |r| run_dir(r, true)).expect("valid");
    let rev = size_power("dp-size-yx", 0.05, reps, |r| run_dir(r, false)).expect("valid");
    let ok = fwd.rejection_rate >= 0.50 && (0.02..=0.09).contains(&rev.rejection_rate);
    pass(
        "A3",
        "dp power and directionality",
        ok,
        format!(
            "causal direction {:.3} (>= 0.50), reverse {:.3} (in [0.02, 0.09]), {} reps",
            fwd.rejection_rate, rev.rejection_rate, reps
        ),
    )
}

/// A4: BDS size per grid cell in [3%, 8%]; logistic-map statistic > 10.
pub fn a4_bds(cfg: &SuiteConfig) -> CriterionReport {
    let reps = cfg.reps(500);
    let n = 2500;
    let spec = ProcessSpec::new(ProcessKind::IidNormal, n, cfg.seed ^ 0xA4).unwrap();
    let bds_cfg = BdsConfig::default();
    let cells = (bds_cfg.max_dim - 1) * bds_cfg.eps_multipliers.len();
    let mut rejections = vec![0usize; cells];
    // One pass per replication covers every cell; replications are parallel.
    use rayon::prelude::*;
    let flags: Vec<Vec<bool>> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let e = simulate_rep(&spec, r).into_single();
            let out = bds_test(&e, &bds_cfg).expect("iid normal sample is regular");
            out.cells.iter().map(|c| c.statistic.abs() > 1.959964).collect()
        })
        .collect();
    for f in &flags {
        for (i, rej) in f.iter().enumerate() {
            if *rej {
                rejections[i] += 1;
            }
        }
    }
    let rates: Vec<f64> = rejections.iter().map(|r| *r as f64 / reps as f64).collect();
    let size_ok = rates.iter().all(|r| (0.03..=0.08).contains(r));

    let chaos = ProcessSpec::new(ProcessKind::LogisticMap { r: 4.0, x0: 0.3 }, 1000, 0).unwrap();
    let series = simulate_rep(&chaos, 0).into_single();
    let chaos_cfg = BdsConfig { max_dim: 2, eps_multipliers: vec![1.0], min_n: 200 };
    let stat = bds_test(&series, &chaos_cfg).unwrap().cells[0].statistic;
    let chaos_ok = stat > 10.0;

    let lo = rates.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = rates.iter().copied().fold(0.0f64, f64::max);
    pass(
        "A4",
        "bds size and chaos power",
        size_ok && chaos_ok,
        format!(
            "cell rates in [{lo:.3}, {hi:.3}] (target [0.03, 0.08], {reps} reps); logistic statistic {stat:.1} (> 10)"
        ),
    )
}

/// A5: Tsay size on Gaussian AR(1) <= 8%; bilinear power >= 80% at 1%.
pub fn a5_tsay(cfg: &SuiteConfig) -> CriterionReport {
    let size_reps = cfg.reps(500);
    let ar = ProcessSpec::new(
        ProcessKind::Ar { coeffs: vec![0.5], innovations: Innovations::Normal },
        2000,
        cfg.seed ^ 0xA5,
    )
    .unwrap();
    let size = size_power("tsay-size", 0.05, size_reps, |r| {
        let x = simulate_rep(&ar, r).into_single();
        Ok(tsay_test(&x, 2)?.p_value < 0.05)
    })
    .expect("valid");

    let power_reps = cfg.reps(200);
    let bilinear =
        ProcessSpec::new(ProcessKind::Bilinear { coeff: 0.7 }, 1000, cfg.seed ^ 0x5A5).unwrap();
    let power = size_power("tsay-power", 0.01, power_reps, |r| {
        let x = simulate_rep(&bilinear, r).into_single();
        Ok(tsay_test(&x, 1)?.p_value < 0.01)
    })
    .expect("valid");

    let ok = size.rejection_rate <= 0.08 && power.rejection_rate >= 0.80;
    pass(
        "A5",
        "tsay size and bilinear power",
        ok,
        format!(
            "size {:.3} (<= 0.08, {} reps); power {:.3} (>= 0.80, {} reps)",
            size.rejection_rate, size.replications, power.rejection_rate, power.replications
        ),
    )
}

/// A6: unit-root battery: random-walk non-rejection, white-noise rejection,
/// and RALS power at least ADF power under heavy tails.
pub fn a6_unit_root(cfg: &SuiteConfig) -> CriterionReport {
    let reps = cfg.reps(200);
    let drift = UnitRootSpec::new(Deterministic::Drift);

    let rw = ProcessSpec::new(ProcessKind::RandomWalk, 1000, cfg.seed ^ 0xA6).unwrap();
    let rw_rej = size_power("adf-rw", 0.05, reps, |r| {
        let x = simulate_rep(&rw, r).into_single();
        let out = adf_test(&x, &drift)?;
        Ok(matches!(out.reject_at, Some(SigLevel::OnePercent | SigLevel::FivePercent)))
    })
    .expect("valid");

    let wn = ProcessSpec::new(ProcessKind::IidNormal, 1000, cfg.seed ^ 0x6A6).unwrap();
    let wn_rej = size_power("adf-wn", 0.01, reps, |r| {
        let x = simulate_rep(&wn, r).into_single();
        Ok(matches!(adf_test(&x, &drift)?.reject_at, Some(SigLevel::OnePercent)))
    })
    .expect("valid");

    // Near-unit-root AR(1) with t(3) innovations: power comparison at 5%.
    // phi = 0.985 keeps both tests away from saturation so the comparison
    // is informative (the residual-moment terms roughly halve the miss rate).
    let heavy = ProcessSpec::new(
        ProcessKind::Ar { coeffs: vec![0.985], innovations: Innovations::StudentT { df: 3.0 } },
        1000,
        cfg.seed ^ 0x66,
    )
    .unwrap();
    use rayon::prelude::*;
    let hits: Vec<(bool, bool)> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let x = simulate_rep(&heavy, r).into_single();
            let adf_rej = matches!(
                adf_test(&x, &drift).expect("regular").reject_at,
                Some(SigLevel::OnePercent | SigLevel::FivePercent)
            );
            let rals_rej = matches!(
                rals_adf_test(&x, &drift).expect("regular").reject_at,
                Some(SigLevel::OnePercent | SigLevel::FivePercent)
            );
            (adf_rej, rals_rej)
        })
        .collect();
    let adf_hits = hits.iter().filter(|h| h.0).count();
    let rals_hits = hits.iter().filter(|h| h.1).count();

    let ok = rw_rej.rejection_rate <= 0.10 && wn_rej.rejection_rate >= 0.99 && rals_hits >= adf_hits;
    pass(
        "A6",
        "adf/rals size and power",
        ok,
        format!(
            "random-walk rejection {:.3} (<= 0.10); white-noise rejection {:.3} (>= 0.99); heavy-tail power RALS {}/{} vs ADF {}/{}",
            rw_rej.rejection_rate, wn_rej.rejection_rate, rals_hits, reps, adf_hits, reps
        ),
    )
}

/// A7: VAR order recovery, residual orthogonality, reconstruction identity.
pub fn a7_var(cfg: &SuiteConfig) -> CriterionReport {
    let reps = cfg.reps(200);
    let spec = ProcessSpec::new(
        ProcessKind::Var {
            lag_matrices: vec![[[0.5, 0.1], [0.0, 0.3]], [[0.2, 0.0], [0.1, 0.25]]],
        },
        2000,
        cfg.seed ^ 0xA7,
    )
    .unwrap();
    let mut recovered = 0usize;
    for r in 0..reps as u64 {
        let (x, y) = simulate_rep(&spec, r).into_pair();
        if select_var_lag(&x, &y, 6).expect("regular") == 2 {
            recovered += 1;
        }
    }

    let (x, y) = simulate_rep(&spec, 0).into_pair();
    let fit = var_filter(&x, &y, 2).unwrap();
    let mut max_orth: f64 = 0.0;
    let n = x.len();
    for lag in 1..=2 {
        for resid in [&fit.resid_x, &fit.resid_y] {
            for src in [&x, &y] {
                let col = &src[2 - lag..n - lag];
                let dot: f64 = resid.iter().zip(col).map(|(a, b)| a * b).sum();
                let nr: f64 = resid.iter().map(|v| v * v).sum::<f64>().sqrt();
                let nc: f64 = col.iter().map(|v| v * v).sum::<f64>().sqrt();
                max_orth = max_orth.max(dot.abs() / (nr * nc));
            }
        }
    }
    let scale = x.iter().map(|v| v.abs()).fold(1.0f64, f64::max);
    let mut max_recon: f64 = 0.0;
    for (i, (f, r)) in fit.fitted_x.iter().zip(&fit.resid_x).enumerate() {
        max_recon = max_recon.max((f + r - x[2 + i]).abs() / scale);
    }

    let rate = recovered as f64 / reps as f64;
    let ok = rate >= 0.90 && max_orth <= 1e-8 && max_recon <= 1e-10;
    pass(
        "A7",
        "var order recovery and identities",
        ok,
        format!(
            "order recovery {rate:.3} (>= 0.90, {reps} reps); orthogonality {max_orth:.2e} (<= 1e-8); reconstruction {max_recon:.2e} (<= 1e-10)"
        ),
    )
}

/// A8: exact identities: Jarque-Bera closed form, star truth table,
/// bandwidth monotonicity.
pub fn a8_exact_identities(cfg: &SuiteConfig) -> CriterionReport {
    use crate::date::weekday_calendar;
    use crate::series::ReturnSeries;

    let spec = ProcessSpec::new(ProcessKind::IidNormal, 500, cfg.seed ^ 0xA8).unwrap();
    let values = simulate_rep(&spec, 0).into_single();
    let r = ReturnSeries {
        ticker: "JB".into(),
        dates: weekday_calendar("1986-01-02".parse().unwrap(), 500),
        values,
    };
    let s = describe(&r).unwrap();
    let jb = s.n as f64 * (s.skewness * s.skewness / 6.0 + (s.kurtosis - 3.0).powi(2) / 24.0);
    let jb_ok = s.jarque_bera == jb;

    let stars_ok = star_aggregate(&[0.001, 0.009]) == StarClass::One
        && star_aggregate(&[0.001, 0.049]) == StarClass::Five
        && star_aggregate(&[0.001, 0.099]) == StarClass::Ten
        && star_aggregate(&[0.001, 0.100]) == StarClass::Blank;

    let rule = BandwidthRule::default();
    let mut bw_ok = true;
    for n in [50usize, 100, 317, 1000, 2000, 5000] {
        bw_ok &= bandwidth(2 * n, &rule).unwrap() < bandwidth(n, &rule).unwrap();
    }
    let clamped = BandwidthRule { floor: Some(0.8), cap: Some(1.2), ..rule };
    bw_ok &= bandwidth(10_000, &clamped).unwrap() == 0.8;
    bw_ok &= bandwidth(60, &clamped).unwrap() == 1.2;

    pass(
        "A8",
        "exact identities",
        jb_ok && stars_ok && bw_ok,
        format!("jb identity {jb_ok}; star table {stars_ok}; bandwidth monotone+clamped {bw_ok}"),
    )
}

/// A9: end-to-end byte determinism across worker counts.
pub fn a9_determinism(cfg: &SuiteConfig) -> CriterionReport {
    let prices = synthetic_price_triple(6, cfg.seed ^ 0xA9);
    let settings = AnalysisSettings {
        window: PipelineConfig { lags: 2, var_max_lag: 4, ..Default::default() },
        tsay_lags: 3,
        ..Default::default()
    };
    let prov = Provenance {
        artifact_version: env!("CARGO_PKG_VERSION").into(),
        config_hash: hash_label(b"determinism-check"),
        input_hashes: vec![],
    };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .expect("pool")
            .install(|| run_full_analysis(&prices, &settings, &prov).expect("pipeline"))
    };
    let one = run(1);
    let eight = run(8);
    let mut mismatched = Vec::new();
    for (name, content) in &one.files {
        if eight.files.get(name) != Some(content) {
            mismatched.push(name.clone());
        }
    }
    let ok = mismatched.is_empty() && one.files.len() == eight.files.len();
    pass(
        "A9",
        "pipeline byte determinism (1 vs 8 workers)",
        ok,
        if ok {
            format!("{} files byte-identical", one.files.len())
        } else {
            format!("mismatched files: {mismatched:?}")
        },
    )
}

fn synthetic_price_triple(years: usize, seed: u64) -> Vec<PriceSeries> {
    use crate::date::weekday_calendar;
    let n = years * 261;
    let cal = weekday_calendar("1986-01-02".parse().unwrap(), n);
    let spec = ProcessSpec::new(ProcessKind::IidNormal, n, seed).unwrap();
    (0..3u64)
        .map(|i| {
            let r = simulate_rep(&spec, i).into_single();
            let mut level = 100.0f64;
            let mut values = Vec::with_capacity(n);
            for v in r {
                level *= (0.01 * v).exp();
                values.push(level);
            }
            PriceSeries::new(format!("TK{i}"), cal.clone(), values).unwrap()
        })
        .collect()
}

/// Reference summary statistics for the 1986-01-02..2015-02-05 daily
/// SP500/WTI/Gold dataset (returns in percent).
struct ReferenceStats {
    ticker: &'static str,
    mean: f64,
    sd: f64,
    skewness: f64,
    kurtosis: f64,
    jarque_bera: f64,
}

const REFERENCE_STATS: [ReferenceStats; 3] = [
    ReferenceStats { ticker: "SP500", mean: 0.03, sd: 1.17, skewness: -1.28, kurtosis: 30.90, jarque_bera: 240_345.68 },
    ReferenceStats { ticker: "WTI", mean: 0.01, sd: 2.52, skewness: -0.72, kurtosis: 18.24, jarque_bera: 71_751.11 },
    ReferenceStats { ticker: "Gold", mean: 0.02, sd: 1.00, skewness: -0.39, kurtosis: 10.52, jarque_bera: 17_491.18 },
];

fn load_reference_data(dir: &std::path::Path) -> Result<Vec<PriceSeries>> {
    let mut out = Vec::new();
    for (ticker, file) in [("SP500", "SP500.csv"), ("WTI", "WTI.csv"), ("Gold", "GOLD.csv")] {
        out.push(load_price_csv(ticker, &dir.join(file))?);
    }
    align(&out)
}

fn skipped(id: &'static str, name: &'static str) -> CriterionReport {
    CriterionReport {
        id,
        name,
        status: Status::SkippedConditional,
        detail: "reference dataset not supplied".into(),
    }
}

/// B10: descriptive statistics match the reference dataset summary.
pub fn b10_reference_descriptive(cfg: &SuiteConfig) -> CriterionReport {
    let Some(dir) = &cfg.data_dir else {
        return skipped("B10", "reference descriptive statistics");
    };
    let run = || -> Result<(bool, String)> {
        let aligned = load_reference_data(dir)?;
        let mut ok = true;
        let mut worst = String::new();
        for (p, r) in aligned.iter().zip(REFERENCE_STATS.iter()) {
            let ret = to_returns(p)?;
            let s = describe(&ret)?;
            let checks = [
                ("mean", s.mean, r.mean, 0.01),
                ("sd", s.sd, r.sd, 0.01),
                ("skewness", s.skewness, r.skewness, 0.01),
                ("kurtosis", s.kurtosis, r.kurtosis, 0.01),
            ];
            for (what, got, want, tol) in checks {
                if (got - want).abs() > tol + 5e-3 {
                    ok = false;
                    worst = format!("{} {what}: {got:.4} vs {want:.4}", r.ticker);
                }
            }
            if (s.jarque_bera - r.jarque_bera).abs() / r.jarque_bera > 0.005 {
                ok = false;
                worst = format!("{} jarque-bera: {:.1} vs {:.1}", r.ticker, s.jarque_bera, r.jarque_bera);
            }
        }
        Ok((ok, if ok { "all summary statistics within tolerance".into() } else { worst }))
    };
    match run() {
        Ok((ok, detail)) => pass("B10", "reference descriptive statistics", ok, detail),
        Err(e) => pass("B10", "reference descriptive statistics", false, e.to_string()),
    }
}

/// B11: full-sample causality pattern on the reference dataset.
pub fn b11_reference_full_sample(cfg: &SuiteConfig) -> CriterionReport {
    let Some(dir) = &cfg.data_dir else {
        return skipped("B11", "reference full-sample causality");
    };
    let run = || -> Result<(bool, String)> {
        let aligned = load_reference_data(dir)?;
        let returns: [crate::series::ReturnSeries; 3] = [
            to_returns(&aligned[0])?,
            to_returns(&aligned[1])?,
            to_returns(&aligned[2])?,
        ];
        let config = PipelineConfig::default();
        let (m, _) = run_family(FamilyKind::Full, &returns, &config)?;
        let d = m.rows[0]
            .outcome
            .as_ref()
            .map_err(|e| Error::Window(e.clone()))?;
        let all_lags_significant = (0..6).all(|dir| d.outcomes[dir].iter().all(|o| o.p < 0.10));
        let low_lags_strong =
            (0..6).all(|dir| d.outcomes[dir].iter().take(2).all(|o| o.p < 0.01));
        Ok((
            all_lags_significant && low_lags_strong,
            format!(
                "all directions significant at every lag: {all_lags_significant}; lags 1-2 all at 1%: {low_lags_strong}"
            ),
        ))
    };
    match run() {
        Ok((ok, detail)) => pass("B11", "reference full-sample causality", ok, detail),
        Err(e) => pass("B11", "reference full-sample causality", false, e.to_string()),
    }
}

/// B12: yearly windows 1986 (all blank) and 2008 (all starred).
pub fn b12_reference_yearly_patterns(cfg: &SuiteConfig) -> CriterionReport {
    let Some(dir) = &cfg.data_dir else {
        return skipped("B12", "reference yearly patterns");
    };
    let run = || -> Result<(bool, String)> {
        let aligned = load_reference_data(dir)?;
        let returns: [crate::series::ReturnSeries; 3] = [
            to_returns(&aligned[0])?,
            to_returns(&aligned[1])?,
            to_returns(&aligned[2])?,
        ];
        let config = PipelineConfig::default();
        let (m, _) = run_family(FamilyKind::Yearly, &returns, &config)?;
        let cells_of = |label: &str| -> Result<[StarClass; 6]> {
            m.rows
                .iter()
                .find(|r| r.window.label == label)
                .ok_or_else(|| Error::Window(format!("missing yearly window {label}")))?
                .outcome
                .as_ref()
                .map(|d| d.cells)
                .map_err(|e| Error::Window(e.clone()))
        };
        let y1986 = cells_of("1986")?;
        let y2008 = cells_of("2008")?;
        let blank_ok = y1986.iter().all(|c| *c == StarClass::Blank);
        let starred_ok = y2008.iter().all(|c| *c != StarClass::Blank);
        Ok((
            blank_ok && starred_ok,
            format!("1986 all blank: {blank_ok}; 2008 all starred: {starred_ok}"),
        ))
    };
    match run() {
        Ok((ok, detail)) => pass("B12", "reference yearly patterns", ok, detail),
        Err(e) => pass("B12", "reference yearly patterns", false, e.to_string()),
    }
}

/// A criterion entry point.
pub type CriterionFn = fn(&SuiteConfig) -> CriterionReport;

/// Criterion registry, in suite order.
pub fn criteria() -> Vec<(&'static str, CriterionFn)> {
    vec![
        ("A1", a1_oracle_equivalence as CriterionFn),
        ("A2", a2_dp_size),
        ("A3", a3_dp_power_direction),
        ("A4", a4_bds),
        ("A5", a5_tsay),
        ("A6", a6_unit_root),
        ("A7", a7_var),
        ("A8", a8_exact_identities),
        ("A9", a9_determinism),
        ("B10", b10_reference_descriptive),
        ("B11", b11_reference_full_sample),
        ("B12", b12_reference_yearly_patterns),
    ]
}

/// Run the complete suite in criterion order.
pub fn run_suite(cfg: &SuiteConfig) -> Vec<CriterionReport> {
    criteria().into_iter().map(|(_, f)| f(cfg)).collect()
}

/// Battery helper used by tests: both directions at several lags on a
/// simulated pair, mirroring the per-window battery call.
pub fn battery_on_simulated(
    kind: ProcessKind,
    n: usize,
    seed: u64,
    lags: usize,
    epsilon: f64,
) -> Result<Vec<crate::dp::BatteryEntry>> {
    let spec = ProcessSpec::new(kind, n, seed)?;
    let (x, y) = simulate_rep(&spec, 0).into_pair();
    dp_direction_battery(&x, &y, lags, epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suite_core_identities_pass() {
        let cfg = SuiteConfig::default();
        let a8 = a8_exact_identities(&cfg);
        assert_eq!(a8.status, Status::Pass, "{}", a8.line());
    }

    #[test]
    fn conditional_criteria_skip_without_data() {
        let cfg = SuiteConfig::default();
        for rep in [
            b10_reference_descriptive(&cfg),
            b11_reference_full_sample(&cfg),
            b12_reference_yearly_patterns(&cfg),
        ] {
            assert_eq!(rep.status, Status::SkippedConditional);
            assert!(rep.passed());
            assert!(rep.line().contains("SKIPPED-CONDITIONAL"));
        }
    }

    #[test]
    fn report_line_format() {
        let r = CriterionReport {
            id: "A1",
            name: "x",
            status: Status::Fail,
            detail: "d".into(),
        };
        assert!(r.line().contains("FAIL"));
        assert!(!r.passed());
    }
}
