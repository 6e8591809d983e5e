//! Table rendering: every analysis emits a machine-readable CSV and an
//! aligned markdown table, both carrying a provenance header (artifact
//! version, config hash, input hashes) and both byte-deterministic for a
//! given input.

use std::fmt::Write as _;

use crate::nonlin::{BdsOutcome, TsayOutcome};
use crate::series::DescriptiveStats;
use crate::stationarity::{Deterministic, UnitRootOutcome, Variant};
use crate::windows::{CausalityMatrix, FamilyKind, RowData, StarClass, DIRECTIONS};

/// FNV-1a 64-bit hash, used to fingerprint configs and input files.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn hash_label(bytes: &[u8]) -> String {
    format!("fnv1a64:{:016x}", fnv1a64(bytes))
}

/// Run fingerprint attached to every emitted table.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub artifact_version: String,
    pub config_hash: String,
    pub input_hashes: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(config_bytes: &[u8], inputs: &[(String, Vec<u8>)]) -> Self {
        Self {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: hash_label(config_bytes),
            input_hashes: inputs
                .iter()
                .map(|(t, bytes)| (t.clone(), hash_label(bytes)))
                .collect(),
        }
    }

    fn csv_header(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# artifact-version: {}", self.artifact_version);
        let _ = writeln!(out, "# config-hash: {}", self.config_hash);
        for (ticker, h) in &self.input_hashes {
            let _ = writeln!(out, "# input {ticker}: {h}");
        }
        out
    }

    fn md_line(&self) -> String {
        let mut parts = vec![
            format!("artifact {}", self.artifact_version),
            format!("config {}", self.config_hash),
        ];
        for (ticker, h) in &self.input_hashes {
            parts.push(format!("{ticker} {h}"));
        }
        format!("_provenance: {}_\n", parts.join(" | "))
    }
}

fn stars_from_p(p: f64) -> &'static str {
    StarClass::from_p(p).glyph()
}

fn md_table(header: &[String], rows: &[Vec<String>]) -> String {
    let ncol = header.len();
    let mut width = vec![0usize; ncol];
    for (i, h) in header.iter().enumerate() {
        width[i] = h.len();
    }
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            width[i] = width[i].max(cell.len());
        }
    }
    let fmt_row = |cells: &[String]| -> String {
        let padded: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{:w$}", c, w = width[i]))
            .collect();
        format!("| {} |\n", padded.join(" | "))
    };
    let mut out = fmt_row(header);
    let dashes: Vec<String> = width.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&fmt_row(&dashes));
    for row in rows {
        out.push_str(&fmt_row(row));
    }
    out
}

/// Per-ticker ingestion counts surfaced in the descriptive report.
#[derive(Debug, Clone)]
pub struct SampleCounts {
    pub ticker: String,
    pub n_prices: usize,
    pub n_returns: usize,
}

pub fn render_descriptive_csv(
    stats: &[(String, DescriptiveStats)],
    counts: &[SampleCounts],
    prov: &Provenance,
) -> String {
    let mut out = prov.csv_header();
    out.push_str("# statistics computed on returns; n_prices/n_returns record both counts\n");
    out.push_str("ticker,n_prices,n_returns,mean,min,max,sd,skewness,kurtosis,jarque_bera,jb_pvalue\n");
    for (ticker, s) in stats {
        let c = counts
            .iter()
            .find(|c| &c.ticker == ticker)
            .expect("counts cover every ticker");
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            ticker, c.n_prices, c.n_returns, s.mean, s.min, s.max, s.sd, s.skewness, s.kurtosis,
            s.jarque_bera, s.jb_pvalue
        );
    }
    out
}

pub fn render_descriptive_md(
    stats: &[(String, DescriptiveStats)],
    counts: &[SampleCounts],
    prov: &Provenance,
) -> String {
    let mut header = vec!["Statistic".to_string()];
    header.extend(stats.iter().map(|(t, _)| t.clone()));
    let mut rows: Vec<Vec<String>> = Vec::new();
    type Getter = fn(&DescriptiveStats) -> f64;
    let fields: [(&str, Getter); 7] = [
        ("Mean", |s| s.mean),
        ("Min", |s| s.min),
        ("Max", |s| s.max),
        ("Sd", |s| s.sd),
        ("Skewness", |s| s.skewness),
        ("Kurtosis", |s| s.kurtosis),
        ("Jarque-Bera", |s| s.jarque_bera),
    ];
    for (name, get) in fields {
        let mut row = vec![name.to_string()];
        row.extend(stats.iter().map(|(_, s)| format!("{:.2}", get(s))));
        rows.push(row);
    }
    let counts_line: Vec<String> = counts
        .iter()
        .map(|c| format!("{}: {} prices / {} returns", c.ticker, c.n_prices, c.n_returns))
        .collect();
    format!(
        "# Descriptive statistics of the return series\n{}\n{}\nSample: {}. Statistics are computed on returns.\n",
        prov.md_line(),
        md_table(&header, &rows),
        counts_line.join("; ")
    )
}

/// One unit-root table entry.
#[derive(Debug, Clone)]
pub struct UnitRootCell {
    pub ticker: String,
    /// true for price levels, false for returns (first differences).
    pub levels: bool,
    pub deterministic: Deterministic,
    pub outcome: UnitRootOutcome,
}

fn det_label(d: Deterministic) -> &'static str {
    match d {
        Deterministic::TrendAndIntercept => "trend and intercept",
        Deterministic::Drift => "drift",
    }
}

fn variant_label(v: Variant) -> &'static str {
    match v {
        Variant::Adf => "ADF",
        Variant::Rals => "RALS",
    }
}

pub fn render_unitroot_csv(cells: &[UnitRootCell], prov: &Provenance) -> String {
    let mut out = prov.csv_header();
    out.push_str("ticker,series,deterministic,variant,t_stat,selected_lag,rho2,significance\n");
    for c in cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            c.ticker,
            if c.levels { "levels" } else { "differences" },
            det_label(c.deterministic).replace(' ', "_"),
            variant_label(c.outcome.variant),
            c.outcome.t_stat,
            c.outcome.selected_lag,
            c.outcome.rho2.map(|r| r.to_string()).unwrap_or_default(),
            c.outcome.reject_at.map(|l| l.stars()).unwrap_or("")
        );
    }
    out
}

pub fn render_unitroot_md(
    cells: &[UnitRootCell],
    tickers: &[String],
    deterministics: &[Deterministic],
    prov: &Provenance,
) -> String {
    let mut header = vec!["".to_string()];
    header.extend(tickers.iter().cloned());
    let mut rows: Vec<Vec<String>> = Vec::new();
    for levels in [true, false] {
        rows.push(vec![
            if levels { "Series in levels" } else { "Series in first differences" }.to_string();
            1
        ]);
        rows.last_mut().unwrap().extend(vec![String::new(); tickers.len()]);
        for det in deterministics.iter().copied() {
            let mut section = vec![format!("With {}", det_label(det))];
            section.extend(vec![String::new(); tickers.len()]);
            rows.push(section);
            for variant in [Variant::Adf, Variant::Rals] {
                let mut row = vec![variant_label(variant).to_string()];
                for t in tickers {
                    let cell = cells
                        .iter()
                        .find(|c| {
                            &c.ticker == t
                                && c.levels == levels
                                && c.deterministic == det
                                && c.outcome.variant == variant
                        })
                        .expect("battery covers all combinations");
                    let stars = cell.outcome.reject_at.map(|l| l.stars()).unwrap_or("");
                    row.push(format!("{:.2}{}", cell.outcome.t_stat, stars));
                }
                rows.push(row);
            }
        }
    }
    format!(
        "# Unit-root tests\n{}\n{}\nNull hypothesis: the series has a unit root. */**/*** mark rejection at 10/5/1%. Lags chosen by BIC.\n",
        prov.md_line(),
        md_table(&header, &rows)
    )
}

pub fn render_bds_csv(outcomes: &[(String, BdsOutcome)], prov: &Provenance) -> String {
    let mut out = prov.csv_header();
    out.push_str("ticker,dim,eps_multiplier,epsilon,statistic,p_value,significance\n");
    for (ticker, o) in outcomes {
        for c in &o.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                ticker, c.dim, c.eps_multiplier, c.epsilon, c.statistic, c.p_value,
                stars_from_p(c.p_value)
            );
        }
    }
    out
}

pub fn render_bds_md(
    outcomes: &[(String, BdsOutcome)],
    multipliers: &[f64],
    max_dim: usize,
    prov: &Provenance,
) -> String {
    let mut header = vec!["Series".to_string(), "m / eps".to_string()];
    header.extend(multipliers.iter().map(|m| format!("{m} sd")));
    let mut rows = Vec::new();
    for (ticker, o) in outcomes {
        for dim in 2..=max_dim {
            let mut row = vec![
                if dim == 2 + (max_dim - 2) / 2 { ticker.clone() } else { String::new() },
                dim.to_string(),
            ];
            for mult in multipliers {
                let cell = o.cell(dim, *mult).expect("grid is complete");
                row.push(format!("{:.2}{}", cell.statistic, stars_from_p(cell.p_value)));
            }
            rows.push(row);
        }
    }
    format!(
        "# BDS nonlinearity test on pre-whitened residuals\n{}\n{}\nNull hypothesis: the residuals are iid. */**/*** mark p < 10/5/1%.\n",
        prov.md_line(),
        md_table(&header, &rows)
    )
}

pub fn render_tsay_csv(outcomes: &[(String, Vec<TsayOutcome>)], prov: &Provenance) -> String {
    let mut out = prov.csv_header();
    out.push_str("ticker,lag,f_stat,df1,df2,p_value,significance\n");
    for (ticker, rows) in outcomes {
        for r in rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                ticker, r.lag, r.f_stat, r.df1, r.df2, r.p_value, stars_from_p(r.p_value)
            );
        }
    }
    out
}

pub fn render_tsay_md(outcomes: &[(String, Vec<TsayOutcome>)], prov: &Provenance) -> String {
    let max_lag = outcomes
        .first()
        .map(|(_, rows)| rows.len())
        .unwrap_or(0);
    let mut header = vec!["Lag".to_string()];
    header.extend(outcomes.iter().map(|(t, _)| t.clone()));
    let mut rows = Vec::new();
    for lag in 1..=max_lag {
        let mut row = vec![lag.to_string()];
        for (_, tr) in outcomes {
            let r = tr.iter().find(|r| r.lag == lag).expect("lags are dense");
            row.push(format!("{:.2}{}", r.f_stat, stars_from_p(r.p_value)));
        }
        rows.push(row);
    }
    format!(
        "# Tsay nonlinearity test\n{}\n{}\nNull hypothesis: the series is linear. */**/*** mark p < 10/5/1%.\n",
        prov.md_line(),
        md_table(&header, &rows)
    )
}

fn direction_names(tickers: &[String; 3]) -> Vec<String> {
    DIRECTIONS
        .iter()
        .map(|d| format!("{}=>{}", tickers[d.cause], tickers[d.effect]))
        .collect()
}

fn family_title(f: FamilyKind) -> &'static str {
    match f {
        FamilyKind::Full => "full sample",
        FamilyKind::Expanding => "expanding windows (fixed start to ending year)",
        FamilyKind::AnchoredEnd => "anchored windows (starting year to fixed end)",
        FamilyKind::Yearly => "calendar-year windows",
    }
}

fn window_column(f: FamilyKind) -> &'static str {
    match f {
        FamilyKind::Full => "Window",
        FamilyKind::Expanding => "Ending year",
        FamilyKind::AnchoredEnd => "Starting year",
        FamilyKind::Yearly => "Year",
    }
}

fn var_lag_string(d: &RowData) -> String {
    format!("({},{},{})", d.var_lags[0], d.var_lags[1], d.var_lags[2])
}

/// Long-format CSV: one row per (window, direction, lag).
pub fn render_causality_csv(m: &CausalityMatrix, prov: &Provenance) -> String {
    let names = direction_names(&m.tickers);
    let mut out = prov.csv_header();
    let _ = writeln!(out, "# family: {}", family_title(m.family));
    out.push_str(
        "window,epsilon,sample_size,var_lags,direction,lag,t_n,s_n,z,p_value,lag_significance,aggregate_significance,status\n",
    );
    for row in &m.rows {
        match &row.outcome {
            Ok(d) => {
                for (dir_idx, name) in names.iter().enumerate() {
                    for (lag_idx, o) in d.outcomes[dir_idx].iter().enumerate() {
                        let _ = writeln!(
                            out,
                            "{},{},{},\"{}\",{},{},{},{},{},{},{},{},ok",
                            row.window.label,
                            d.epsilon,
                            d.sample_size,
                            var_lag_string(d),
                            name,
                            lag_idx + 1,
                            o.t_n,
                            o.s_n,
                            o.z,
                            o.p,
                            stars_from_p(o.p),
                            d.cells[dir_idx].glyph(),
                        );
                    }
                }
            }
            Err(reason) => {
                let _ = writeln!(
                    out,
                    "{},,,,,,,,,,,,unavailable: {}",
                    row.window.label,
                    reason.replace(',', ";")
                );
            }
        }
    }
    out
}

/// Star-matrix markdown for windowed families.
pub fn render_causality_md(m: &CausalityMatrix, prov: &Provenance) -> String {
    let names = direction_names(&m.tickers);
    let mut header = vec![window_column(m.family).to_string(), "eps".into(), "n".into()];
    header.extend(names.iter().cloned());
    header.push("VAR(p)".into());
    let mut rows = Vec::new();
    for row in &m.rows {
        match &row.outcome {
            Ok(d) => {
                let mut r = vec![
                    row.window.label.clone(),
                    format!("{:.2}", d.epsilon),
                    d.sample_size.to_string(),
                ];
                r.extend(d.cells.iter().map(|c| c.glyph().to_string()));
                r.push(var_lag_string(d));
                rows.push(r);
            }
            Err(reason) => {
                let mut r = vec![row.window.label.clone(), String::new(), String::new()];
                r.extend(vec![String::new(); 6]);
                r.push(format!("unavailable: {reason}"));
                rows.push(r);
            }
        }
    }
    format!(
        "# Nonlinear causality, {}\n{}\n{}\nCells report the weakest significance attained at every lag 1..L; blank means some lag missed 10%. */**/*** mark p < 10/5/1%. A=>B tests the null that A does not cause B. VAR(p) lists the filter order per pair.\n",
        family_title(m.family),
        prov.md_line(),
        md_table(&header, &rows)
    )
}

/// Per-lag markdown for the full-sample battery (one window, lag detail).
pub fn render_full_battery_md(m: &CausalityMatrix, prov: &Provenance) -> String {
    let names = direction_names(&m.tickers);
    let row = m.rows.first().expect("full family has one window");
    match &row.outcome {
        Ok(d) => {
            let lags = d.outcomes[0].len();
            let mut header = vec!["Lag".to_string()];
            header.extend(names.iter().cloned());
            let mut rows = Vec::new();
            for lag in 0..lags {
                let mut r = vec![(lag + 1).to_string()];
                for dir in 0..6 {
                    r.push(StarClass::from_p(d.outcomes[dir][lag].p).glyph().to_string());
                }
                rows.push(r);
            }
            format!(
                "# Nonlinear causality, full sample\n{}\n{}\nn = {}, eps = {:.2}, VAR orders {}. */**/*** mark p < 10/5/1%; A=>B tests the null that A does not cause B.\n",
                prov.md_line(),
                md_table(&header, &rows),
                d.sample_size,
                d.epsilon,
                var_lag_string(d)
            )
        }
        Err(reason) => format!(
            "# Nonlinear causality, full sample\n{}\nunavailable: {reason}\n",
            prov.md_line()
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prov() -> Provenance {
        Provenance {
            artifact_version: "0.0.0-test".into(),
            config_hash: hash_label(b"cfg"),
            input_hashes: vec![("AAA".into(), hash_label(b"a"))],
        }
    }

    #[test]
    fn fnv_hash_is_stable() {
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
        assert!(hash_label(b"x").starts_with("fnv1a64:"));
    }

    #[test]
    fn md_table_aligns_columns() {
        let t = md_table(
            &["A".into(), "Bee".into()],
            &[vec!["1".into(), "2".into()], vec!["100".into(), "x".into()]],
        );
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines.iter().all(|l| l.len() == lines[0].len()), "{t}");
    }

    #[test]
    fn provenance_appears_in_both_formats() {
        let p = prov();
        let csv = render_tsay_csv(&[], &p);
        assert!(csv.contains("# config-hash: fnv1a64:"));
        assert!(csv.contains("# input AAA:"));
        let stats = vec![];
        let md = render_descriptive_md(&stats, &[], &p);
        assert!(md.contains("_provenance:"));
        assert!(md.contains("artifact 0.0.0-test"));
    }

    #[test]
    fn star_glyphs_are_literal() {
        assert_eq!(stars_from_p(0.005), "***");
        assert_eq!(stars_from_p(0.02), "**");
        assert_eq!(stars_from_p(0.07), "*");
        assert_eq!(stars_from_p(0.5), "");
    }
}
