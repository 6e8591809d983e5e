//! Price/return series: ingestion, calendar alignment, returns transform,
//! and descriptive statistics.
//!
//! Returns are continuously compounded percentages,
//! `r[t] = 100 * ln(p[t+1] / p[t])`, and descriptive moments use the 1/n
//! (maximum-likelihood) convention with raw kurtosis (normal = 3), which is
//! what the classical Jarque-Bera form `JB = n (S^2/6 + (K-3)^2/24)` assumes.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::date::Date;
use crate::error::{Error, Result};
use crate::numeric::central_moments;

/// Daily price level series for one ticker.
#[derive(Debug, Clone)]
pub struct PriceSeries {
    ticker: String,
    dates: Vec<Date>,
    values: Vec<f64>,
}

/// Percent log-return series derived from a [`PriceSeries`].
#[derive(Debug, Clone)]
pub struct ReturnSeries {
    pub ticker: String,
    /// Date of each return (the later of the two prices that form it).
    pub dates: Vec<Date>,
    pub values: Vec<f64>,
}

/// Moment summary of a return series.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptiveStats {
    pub n: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub sd: f64,
    pub skewness: f64,
    /// Raw Pearson kurtosis (normal = 3).
    pub kurtosis: f64,
    pub jarque_bera: f64,
    pub jb_pvalue: f64,
}

impl PriceSeries {
    pub fn new(ticker: impl Into<String>, dates: Vec<Date>, values: Vec<f64>) -> Result<Self> {
        let ticker = ticker.into();
        if dates.len() != values.len() {
            return Err(Error::InvalidSeries(format!(
                "{ticker}: {} dates vs {} values",
                dates.len(),
                values.len()
            )));
        }
        if dates.is_empty() {
            return Err(Error::InvalidSeries(format!("{ticker}: empty series")));
        }
        if !dates.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidSeries(format!(
                "{ticker}: dates must be strictly increasing"
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v <= 0.0) {
            return Err(Error::InvalidSeries(format!(
                "{ticker}: nonpositive or non-finite price {v}"
            )));
        }
        Ok(Self { ticker, dates, values })
    }

    pub fn ticker(&self) -> &str {
        &self.ticker
    }

    pub fn dates(&self) -> &[Date] {
        &self.dates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Restrict to dates within `[start, end]` (inclusive).
    pub fn slice_by_date(&self, start: Date, end: Date) -> Result<Self> {
        let idx: Vec<usize> = self
            .dates
            .iter()
            .enumerate()
            .filter(|(_, d)| **d >= start && **d <= end)
            .map(|(i, _)| i)
            .collect();
        if idx.is_empty() {
            return Err(Error::Window(format!(
                "{}: no observations in {start}..{end}",
                self.ticker
            )));
        }
        Self::new(
            self.ticker.clone(),
            idx.iter().map(|&i| self.dates[i]).collect(),
            idx.iter().map(|&i| self.values[i]).collect(),
        )
    }
}

impl ReturnSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn slice_by_date(&self, start: Date, end: Date) -> Self {
        let mut dates = Vec::new();
        let mut values = Vec::new();
        for (d, v) in self.dates.iter().zip(&self.values) {
            if *d >= start && *d <= end {
                dates.push(*d);
                values.push(*v);
            }
        }
        Self { ticker: self.ticker.clone(), dates, values }
    }
}

/// Keep only the trading dates shared by every input series, order preserved.
pub fn align(series: &[PriceSeries]) -> Result<Vec<PriceSeries>> {
    if series.len() < 2 {
        return Err(Error::Alignment("need at least two series to align".into()));
    }
    let mut common: BTreeSet<Date> = series[0].dates.iter().copied().collect();
    for s in &series[1..] {
        let dates: BTreeSet<Date> = s.dates.iter().copied().collect();
        common = common.intersection(&dates).copied().collect();
    }
    if common.is_empty() {
        return Err(Error::Alignment("no common trading dates across inputs".into()));
    }
    series
        .iter()
        .map(|s| {
            let mut dates = Vec::with_capacity(common.len());
            let mut values = Vec::with_capacity(common.len());
            for (d, v) in s.dates.iter().zip(&s.values) {
                if common.contains(d) {
                    dates.push(*d);
                    values.push(*v);
                }
            }
            PriceSeries::new(s.ticker.clone(), dates, values)
        })
        .collect()
}

/// Continuously compounded percentage returns.
pub fn to_returns(p: &PriceSeries) -> Result<ReturnSeries> {
    if p.len() < 2 {
        return Err(Error::InsufficientSample(format!(
            "{}: need at least 2 prices for returns",
            p.ticker
        )));
    }
    // ln(p[t+1]/p[t]) rather than ln(p[t+1]) - ln(p[t]): the ratio form is
    // exactly invariant under power-of-two rescaling of the price level.
    let values: Vec<f64> = p
        .values
        .windows(2)
        .map(|w| 100.0 * (w[1] / w[0]).ln())
        .collect();
    Ok(ReturnSeries {
        ticker: p.ticker.clone(),
        dates: p.dates[1..].to_vec(),
        values,
    })
}

/// Moment summary with Jarque-Bera normality statistic.
pub fn describe(r: &ReturnSeries) -> Result<DescriptiveStats> {
    let n = r.len();
    if n < 8 {
        return Err(Error::InsufficientSample(format!(
            "{}: need at least 8 returns, got {n}",
            r.ticker
        )));
    }
    let (mean, m2, m3, m4) = central_moments(&r.values);
    if m2 <= 0.0 {
        return Err(Error::DegenerateSeries(format!(
            "{}: zero variance return series",
            r.ticker
        )));
    }
    let sd = m2.sqrt();
    let skewness = m3 / m2.powf(1.5);
    let kurtosis = m4 / (m2 * m2);
    let jarque_bera =
        n as f64 * (skewness * skewness / 6.0 + (kurtosis - 3.0).powi(2) / 24.0);
    let chi2 = ChiSquared::new(2.0).expect("valid dof");
    let jb_pvalue = 1.0 - chi2.cdf(jarque_bera);
    let min = r.values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = r.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(DescriptiveStats { n, mean, min, max, sd, skewness, kurtosis, jarque_bera, jb_pvalue })
}

/// Parse a `date,price` CSV (ISO-8601 dates, period decimal separator, UTF-8).
pub fn parse_price_csv(ticker: &str, content: &str) -> Result<PriceSeries> {
    let mut lines = content.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Ingestion(format!("{ticker}: empty file")))?;
    let normalized = header.trim().trim_start_matches('\u{feff}').to_ascii_lowercase();
    if normalized != "date,price" {
        return Err(Error::Ingestion(format!(
            "{ticker}: expected header 'date,price', got {header:?}"
        )));
    }
    let mut dates = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (d, v) = line.split_once(',').ok_or_else(|| {
            Error::Ingestion(format!("{ticker}: line {}: missing comma", lineno + 1))
        })?;
        let date: Date = d.trim().parse().map_err(|e| match e {
            Error::Ingestion(m) => Error::Ingestion(format!("{ticker}: line {}: {m}", lineno + 1)),
            other => other,
        })?;
        let price: f64 = v.trim().parse().map_err(|_| {
            Error::Ingestion(format!("{ticker}: line {}: unparseable price {v:?}", lineno + 1))
        })?;
        if !price.is_finite() || price <= 0.0 {
            return Err(Error::Ingestion(format!(
                "{ticker}: line {}: rejected price {price} (must be finite and positive)",
                lineno + 1
            )));
        }
        dates.push(date);
        values.push(price);
    }
    PriceSeries::new(ticker, dates, values).map_err(|e| Error::Ingestion(e.to_string()))
}

/// Load one ticker from a CSV file on disk.
pub fn load_price_csv(ticker: &str, path: &Path) -> Result<PriceSeries> {
    let content = std::fs::read_to_string(path)
        .map_err(|e| Error::Ingestion(format!("{ticker}: cannot read {}: {e}", path.display())))?;
    parse_price_csv(ticker, &content)
}

/// Render `date,value` plot-data CSV for a price series.
pub fn render_price_plot_data(p: &PriceSeries) -> String {
    let mut out = String::from("date,value\n");
    for (d, v) in p.dates.iter().zip(&p.values) {
        let _ = writeln!(out, "{d},{v}");
    }
    out
}

/// Render `date,value` plot-data CSV for a return series.
pub fn render_return_plot_data(r: &ReturnSeries) -> String {
    let mut out = String::from("date,value\n");
    for (d, v) in r.dates.iter().zip(&r.values) {
        let _ = writeln!(out, "{d},{v}");
    }
    out
}

/// Telescoped total log change, for consistency checks against summed returns.
pub fn total_log_change_pct(p: &PriceSeries) -> f64 {
    100.0 * (p.values[p.len() - 1].ln() - p.values[0].ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::date::weekday_calendar;
    use crate::numeric::compensated_sum;
    use crate::mc::standard_normal;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn series(ticker: &str, dates: Vec<Date>, values: Vec<f64>) -> PriceSeries {
        PriceSeries::new(ticker, dates, values).unwrap()
    }

    fn cal(n: usize) -> Vec<Date> {
        weekday_calendar("1986-01-02".parse().unwrap(), n)
    }

    #[test]
    fn align_identity_on_identical_calendars() {
        let dates = cal(5);
        let a = series("A", dates.clone(), vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        let b = series("B", dates.clone(), vec![5.0, 4.0, 3.0, 2.0, 1.0]);
        let out = align(&[a.clone(), b]).unwrap();
        assert_eq!(out[0].dates(), a.dates());
        assert_eq!(out[0].values(), a.values());
        assert_eq!(out[1].len(), 5);
    }

    #[test]
    fn align_drops_holiday_from_both() {
        let dates = cal(6);
        let mut short_dates = dates.clone();
        short_dates.remove(3); // holiday for A only
        let a = series("A", short_dates, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        let b = series("B", dates.clone(), vec![1.0; 6]);
        let out = align(&[a, b]).unwrap();
        assert_eq!(out[0].len(), 5);
        assert_eq!(out[1].len(), 5);
        assert!(!out[1].dates().contains(&dates[3]));
    }

    #[test]
    fn align_three_full_overlap_keeps_all_dates() {
        let dates = cal(300);
        let vals: Vec<f64> = (0..300).map(|i| 100.0 + i as f64).collect();
        let a = series("A", dates.clone(), vals.clone());
        let b = series("B", dates.clone(), vals.clone());
        let c = series("C", dates.clone(), vals);
        let out = align(&[a, b, c]).unwrap();
        assert!(out.iter().all(|s| s.len() == 300));
    }

    #[test]
    fn align_empty_intersection_errors() {
        let d1 = cal(4);
        let d2: Vec<Date> = cal(8)[4..].to_vec();
        let a = series("A", d1, vec![1.0; 4]);
        let b = series("B", d2, vec![1.0; 4]);
        assert!(matches!(align(&[a, b]), Err(Error::Alignment(_))));
    }

    #[test]
    fn returns_closed_forms() {
        let d = cal(2);
        let p = series("A", d.clone(), vec![100.0, 100.0]);
        assert_eq!(to_returns(&p).unwrap().values, vec![0.0]);

        let p = series("A", d, vec![100.0, 100.0 * (0.01f64).exp()]);
        let r = to_returns(&p).unwrap();
        assert!((r.values[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn returns_length_and_dates() {
        let d = cal(7351);
        let vals: Vec<f64> = (0..7351).map(|i| 100.0 + (i % 97) as f64).collect();
        let p = series("A", d, vals);
        let r = to_returns(&p).unwrap();
        assert_eq!(r.len(), 7350);
        assert_eq!(r.dates[0], p.dates()[1]);
    }

    #[test]
    fn returns_reject_single_price() {
        let p = series("A", cal(1), vec![100.0]);
        assert!(matches!(to_returns(&p), Err(Error::InsufficientSample(_))));
    }

    #[test]
    fn returns_bit_identical_under_power_of_two_scaling() {
        let d = cal(40);
        let vals: Vec<f64> = (0..40).map(|i| 90.0 + ((i * 13) % 31) as f64).collect();
        let p = series("A", d.clone(), vals.clone());
        for scale in [0.5, 2.0, 1024.0] {
            let q = series("A", d.clone(), vals.iter().map(|v| v * scale).collect());
            assert_eq!(to_returns(&p).unwrap().values, to_returns(&q).unwrap().values);
        }
        // Arbitrary positive scale: equal to floating-point noise.
        let q = series("A", d, vals.iter().map(|v| v * 3.7).collect());
        for (a, b) in to_returns(&p).unwrap().values.iter().zip(&to_returns(&q).unwrap().values) {
            assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn returns_sum_telescopes() {
        let d = cal(500);
        let vals: Vec<f64> = (0..500).map(|i| 100.0 * (1.0 + 0.3 * ((i as f64) * 0.7).sin())).collect();
        let p = series("A", d, vals);
        let r = to_returns(&p).unwrap();
        let total = compensated_sum(r.values.iter().copied());
        let direct = total_log_change_pct(&p);
        assert!((total - direct).abs() <= 1e-9 * direct.abs().max(1.0));
    }

    #[test]
    fn describe_two_point_distribution_closed_form() {
        // Alternating +/- a: skewness exactly 0, kurtosis exactly 1.
        let d = cal(16);
        let values: Vec<f64> = (0..16).map(|i| if i % 2 == 0 { 1.5 } else { -1.5 }).collect();
        let r = ReturnSeries { ticker: "A".into(), dates: d, values };
        let s = describe(&r).unwrap();
        assert_eq!(s.skewness, 0.0);
        assert!((s.kurtosis - 1.0).abs() < 1e-12);
        // JB identity against the module's own moments.
        let jb = s.n as f64 * (s.skewness * s.skewness / 6.0 + (s.kurtosis - 3.0).powi(2) / 24.0);
        assert_eq!(s.jarque_bera, jb);
    }

    #[test]
    fn describe_rejects_degenerate_and_short() {
        let d = cal(10);
        let r = ReturnSeries { ticker: "A".into(), dates: d.clone(), values: vec![0.5; 10] };
        assert!(matches!(describe(&r), Err(Error::DegenerateSeries(_))));
        let r = ReturnSeries { ticker: "A".into(), dates: d[..4].to_vec(), values: vec![0.5, 1.0, 0.5, 1.0] };
        assert!(matches!(describe(&r), Err(Error::InsufficientSample(_))));
    }

    #[test]
    fn describe_jb_magnitude_matches_closed_form_recomputation() {
        // S = -1.28, K = 30.90, n = 7350 -> about 2.4e5.
        let jb = 7350.0 * ((-1.28f64).powi(2) / 6.0 + (30.90 - 3.0f64).powi(2) / 24.0);
        assert!((jb / 1e5 - 2.404).abs() < 0.01, "jb = {jb}");
    }

    #[test]
    fn describe_standard_normal_monte_carlo() {
        // 20 seeded draws of n = 1e6: kurtosis inside 3 +/- 0.05 every time,
        // JB p-value > 0.01 in at least 19 of 20.
        let dates = cal(1_000_000);
        let mut ok_p = 0;
        for rep in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(0xDE5C + rep);
            let values: Vec<f64> =
                (0..1_000_000).map(|_| standard_normal(&mut rng)).collect();
            let r = ReturnSeries { ticker: "MC".into(), dates: dates.clone(), values };
            let s = describe(&r).unwrap();
            assert!((s.kurtosis - 3.0).abs() < 0.05, "kurtosis {}", s.kurtosis);
            if s.jb_pvalue > 0.01 {
                ok_p += 1;
            }
        }
        assert!(ok_p >= 19, "JB p-value > 0.01 in only {ok_p}/20 runs");
    }

    #[test]
    fn csv_parse_and_reject() {
        let good = "date,price\n1986-01-02,209.59\n1986-01-03,210.88\n";
        let p = parse_price_csv("SP500", good).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.values()[0], 209.59);

        for bad in [
            "date,price\n1986-01-02,-3.0\n1986-01-03,1.0\n",
            "date,price\n1986-01-02,NaN\n1986-01-03,1.0\n",
            "date,price\n1986-01-02,abc\n",
            "date,price\n02/01/1986,100.0\n",
            "price,date\n1986-01-02,100.0\n",
            "date,price\n1986-01-03,1.0\n1986-01-02,1.0\n",
        ] {
            assert!(parse_price_csv("T", bad).is_err(), "accepted: {bad:?}");
        }
    }

    #[test]
    fn plot_data_round_trip_shape() {
        let d = cal(3);
        let p = series("A", d, vec![1.0, 2.0, 4.0]);
        let csv = render_price_plot_data(&p);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("date,value\n"));
        let r = to_returns(&p).unwrap();
        assert_eq!(render_return_plot_data(&r).lines().count(), 3);
    }
}
