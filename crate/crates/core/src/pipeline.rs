//! End-to-end analysis: aligned prices in, rendered table files out.
//!
//! The CLI is a thin wrapper around [`run_full_analysis`]; keeping the whole
//! path in the library lets the validation suite check byte-for-byte output
//! determinism across worker counts.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::nonlin::{bds_test, prewhiten, tsay_test, BdsConfig};
use crate::report::{
    render_bds_csv, render_bds_md, render_causality_csv, render_causality_md,
    render_descriptive_csv, render_descriptive_md, render_full_battery_md, render_tsay_csv,
    render_tsay_md, render_unitroot_csv, render_unitroot_md, Provenance, SampleCounts,
    UnitRootCell,
};
use crate::series::{
    align, describe, render_price_plot_data, render_return_plot_data, to_returns, PriceSeries,
    ReturnSeries,
};
use crate::stationarity::{adf_test, rals_adf_test, Deterministic, UnitRootSpec};
use crate::windows::{family_slug, run_family, FamilyKind, PipelineConfig};

/// Which analysis stages to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Analysis {
    Descriptive,
    UnitRoot,
    Nonlinearity,
    Causality,
}

/// Full-analysis settings (library-level mirror of the CLI config).
#[derive(Debug, Clone)]
pub struct AnalysisSettings {
    pub analyses: Vec<Analysis>,
    pub families: Vec<FamilyKind>,
    pub window: PipelineConfig,
    pub bds: BdsConfig,
    /// AR order bound for pre-whitening; `None` uses the Schwert bound.
    pub prewhiten_max_lag: Option<usize>,
    /// Quadratic-dependence test depth: lags 1..=tsay_lags.
    pub tsay_lags: usize,
    /// Unit-root BIC search bound; `None` uses the Schwert bound.
    pub unit_root_max_lag: Option<usize>,
    /// Deterministic specifications for the unit-root block (default both).
    pub unit_root_deterministics: Vec<Deterministic>,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            analyses: vec![
                Analysis::Descriptive,
                Analysis::UnitRoot,
                Analysis::Nonlinearity,
                Analysis::Causality,
            ],
            families: vec![
                FamilyKind::Full,
                FamilyKind::Expanding,
                FamilyKind::AnchoredEnd,
                FamilyKind::Yearly,
            ],
            window: PipelineConfig::default(),
            bds: BdsConfig::default(),
            prewhiten_max_lag: None,
            tsay_lags: 7,
            unit_root_max_lag: None,
            unit_root_deterministics: vec![
                Deterministic::TrendAndIntercept,
                Deterministic::Drift,
            ],
        }
    }
}

/// Rendered artifacts: filename -> content, in deterministic order.
#[derive(Debug, Clone, Default)]
pub struct AnalysisOutput {
    pub files: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

/// Run every selected stage over exactly three price series and render all
/// tables. Nothing is written to disk here.
pub fn run_full_analysis(
    prices: &[PriceSeries],
    settings: &AnalysisSettings,
    prov: &Provenance,
) -> Result<AnalysisOutput> {
    if prices.len() != 3 {
        return Err(Error::Config(format!(
            "the pipeline analyzes exactly three series, got {}",
            prices.len()
        )));
    }
    if settings.analyses.is_empty() {
        return Err(Error::Config("no analysis selected".into()));
    }

    let aligned = align(prices)?;
    let returns: Vec<ReturnSeries> = aligned.iter().map(to_returns).collect::<Result<_>>()?;
    let mut out = AnalysisOutput::default();

    // Plot data is always emitted alongside whichever tables run.
    for (p, r) in aligned.iter().zip(&returns) {
        out.files
            .insert(format!("{}_prices.csv", p.ticker()), render_price_plot_data(p));
        out.files
            .insert(format!("{}_returns.csv", p.ticker()), render_return_plot_data(r));
    }

    let tickers: Vec<String> = aligned.iter().map(|p| p.ticker().to_string()).collect();

    if settings.analyses.contains(&Analysis::Descriptive) {
        let stats: Vec<(String, _)> = returns
            .iter()
            .map(|r| Ok((r.ticker.clone(), describe(r)?)))
            .collect::<Result<_>>()?;
        let counts: Vec<SampleCounts> = aligned
            .iter()
            .zip(&returns)
            .map(|(p, r)| SampleCounts {
                ticker: p.ticker().to_string(),
                n_prices: p.len(),
                n_returns: r.len(),
            })
            .collect();
        out.files.insert(
            "table_descriptive.csv".into(),
            render_descriptive_csv(&stats, &counts, prov),
        );
        out.files.insert(
            "table_descriptive.md".into(),
            render_descriptive_md(&stats, &counts, prov),
        );
    }

    if settings.analyses.contains(&Analysis::UnitRoot) {
        if settings.unit_root_deterministics.is_empty() {
            return Err(Error::Config("unit-root stage needs at least one deterministic spec".into()));
        }
        let mut cells = Vec::new();
        for (p, r) in aligned.iter().zip(&returns) {
            for (levels, series) in [(true, p.values()), (false, r.values.as_slice())] {
                for det in settings.unit_root_deterministics.iter().copied() {
                    let spec = UnitRootSpec { deterministic: det, max_lag: settings.unit_root_max_lag };
                    cells.push(UnitRootCell {
                        ticker: p.ticker().to_string(),
                        levels,
                        deterministic: det,
                        outcome: adf_test(series, &spec)?,
                    });
                    cells.push(UnitRootCell {
                        ticker: p.ticker().to_string(),
                        levels,
                        deterministic: det,
                        outcome: rals_adf_test(series, &spec)?,
                    });
                }
            }
        }
        out.files
            .insert("table_unit_root.csv".into(), render_unitroot_csv(&cells, prov));
        out.files.insert(
            "table_unit_root.md".into(),
            render_unitroot_md(&cells, &tickers, &settings.unit_root_deterministics, prov),
        );
    }

    if settings.analyses.contains(&Analysis::Nonlinearity) {
        let mut bds_rows = Vec::new();
        let mut tsay_rows = Vec::new();
        for r in &returns {
            let max_lag = settings
                .prewhiten_max_lag
                .unwrap_or_else(|| crate::stationarity::schwert_max_lag(r.len()));
            let (resid, _) = prewhiten(&r.values, max_lag)?;
            bds_rows.push((r.ticker.clone(), bds_test(&resid, &settings.bds)?));
            let mut per_lag = Vec::new();
            for lag in 1..=settings.tsay_lags {
                per_lag.push(tsay_test(&r.values, lag)?);
            }
            tsay_rows.push((r.ticker.clone(), per_lag));
        }
        out.files.insert("table_bds.csv".into(), render_bds_csv(&bds_rows, prov));
        out.files.insert(
            "table_bds.md".into(),
            render_bds_md(&bds_rows, &settings.bds.eps_multipliers, settings.bds.max_dim, prov),
        );
        out.files.insert("table_tsay.csv".into(), render_tsay_csv(&tsay_rows, prov));
        out.files.insert("table_tsay.md".into(), render_tsay_md(&tsay_rows, prov));
    }

    if settings.analyses.contains(&Analysis::Causality) {
        let triple: [ReturnSeries; 3] =
            [returns[0].clone(), returns[1].clone(), returns[2].clone()];
        for family in &settings.families {
            let (matrix, skipped) = run_family(*family, &triple, &settings.window)?;
            for (label, reason) in skipped {
                out.warnings
                    .push(format!("{} window {label} skipped: {reason}", family_slug(*family)));
            }
            for row in &matrix.rows {
                if let Err(reason) = &row.outcome {
                    out.warnings.push(format!(
                        "{} window {} unavailable: {reason}",
                        family_slug(*family),
                        row.window.label
                    ));
                }
            }
            let slug = family_slug(*family);
            out.files.insert(
                format!("causality_{slug}.csv"),
                render_causality_csv(&matrix, prov),
            );
            let md = if *family == FamilyKind::Full {
                render_full_battery_md(&matrix, prov)
            } else {
                render_causality_md(&matrix, prov)
            };
            out.files.insert(format!("causality_{slug}.md"), md);
        }
    }

    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::date::weekday_calendar;
    use crate::mc::{simulate_rep, ProcessKind, ProcessSpec};
    use crate::report::hash_label;

    pub(crate) fn synthetic_prices(years: usize, seed: u64) -> Vec<PriceSeries> {
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

    fn prov() -> Provenance {
        Provenance {
            artifact_version: "test".into(),
            config_hash: hash_label(b"cfg"),
            input_hashes: vec![],
        }
    }

    #[test]
    fn emits_all_tables_and_plot_data() {
        let prices = synthetic_prices(7, 42);
        let settings = AnalysisSettings {
            window: PipelineConfig { lags: 2, var_max_lag: 4, ..Default::default() },
            tsay_lags: 3,
            ..Default::default()
        };
        let out = run_full_analysis(&prices, &settings, &prov()).unwrap();
        for name in [
            "table_descriptive.csv",
            "table_descriptive.md",
            "table_unit_root.csv",
            "table_unit_root.md",
            "table_bds.csv",
            "table_bds.md",
            "table_tsay.csv",
            "table_tsay.md",
            "causality_full.csv",
            "causality_full.md",
            "causality_expanding.csv",
            "causality_anchored.csv",
            "causality_yearly.csv",
            "TK0_prices.csv",
            "TK2_returns.csv",
        ] {
            assert!(out.files.contains_key(name), "missing {name}");
        }
        // Provenance header on every csv table.
        for (name, content) in &out.files {
            if name.starts_with("table_") || name.starts_with("causality_") {
                assert!(content.contains("config-hash") || content.contains("_provenance"), "{name}");
            }
        }
    }

    #[test]
    fn epsilon_override_reaches_the_battery() {
        let prices = synthetic_prices(6, 7);
        let mut settings = AnalysisSettings {
            analyses: vec![Analysis::Causality],
            families: vec![FamilyKind::Full],
            window: PipelineConfig { lags: 1, var_max_lag: 2, ..Default::default() },
            ..Default::default()
        };
        settings
            .window
            .epsilon_overrides
            .insert("full/full".into(), 1.33);
        let out = run_full_analysis(&prices, &settings, &prov()).unwrap();
        assert!(out.files["causality_full.csv"].contains(",1.33,"));
        assert!(out.files["causality_full.md"].contains("eps = 1.33"));
    }

    #[test]
    fn rejects_wrong_arity_and_empty_selection() {
        let prices = synthetic_prices(6, 9);
        let settings = AnalysisSettings::default();
        assert!(matches!(
            run_full_analysis(&prices[..2], &settings, &prov()),
            Err(Error::Config(_))
        ));
        let none = AnalysisSettings { analyses: vec![], ..Default::default() };
        assert!(matches!(
            run_full_analysis(&prices, &none, &prov()),
            Err(Error::Config(_))
        ));
    }
}
