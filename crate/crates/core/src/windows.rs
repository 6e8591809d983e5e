//! Window harness: enumerate the four sample families, drive the per-window
//! pipeline (VAR filter then causality battery), and aggregate per-lag
//! p-values into significance stars.
//!
//! Families over a data range [first, last]:
//! - full: the entire range;
//! - expanding: from the first observation to the last observation of each
//!   ending year, requiring at least `min_years` complete calendar years;
//! - anchored-end: from the first observation of each starting year to the
//!   last data date, same minimum span;
//! - yearly: one window per calendar year.
//!
//! A window/direction cell earns the weakest significance class attained
//! simultaneously at every tested lag; any lag at or above 10% blanks the
//! cell.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::date::Date;
use crate::dp::{bandwidth, dp_direction_battery, Bandwidth, Direction, DpOutcome};
use crate::error::{Error, Result};
use crate::series::ReturnSeries;
use crate::var::delinearize;

/// Window family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowFamily {
    Full,
    /// Fixed start, ending at the last observation of this year.
    Expanding(i32),
    /// Starting at the first observation of this year, fixed end.
    AnchoredEnd(i32),
    /// One calendar year.
    Yearly(i32),
}

/// A resolved analysis window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSpec {
    pub family: WindowFamily,
    pub label: String,
    pub start: Date,
    pub end: Date,
    pub min_years: usize,
}

/// Star classes, ordered blank < * < ** < ***.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StarClass {
    Blank,
    Ten,
    Five,
    One,
}

impl StarClass {
    pub fn glyph(self) -> &'static str {
        match self {
            StarClass::Blank => "",
            StarClass::Ten => "*",
            StarClass::Five => "**",
            StarClass::One => "***",
        }
    }

    /// Class of a single p-value.
    pub fn from_p(p: f64) -> Self {
        if p < 0.01 {
            StarClass::One
        } else if p < 0.05 {
            StarClass::Five
        } else if p < 0.10 {
            StarClass::Ten
        } else {
            StarClass::Blank
        }
    }
}

/// Weakest per-lag class among all lags; blank unless every lag clears 10%.
pub fn star_aggregate(p_values: &[f64]) -> StarClass {
    assert!(!p_values.is_empty(), "star aggregation needs at least one lag");
    p_values
        .iter()
        .map(|p| StarClass::from_p(*p))
        .min()
        .expect("nonempty")
}

/// Enumeration result: usable windows plus skipped candidates with reasons.
#[derive(Debug, Clone)]
pub struct WindowPlan {
    pub windows: Vec<WindowSpec>,
    pub skipped: Vec<(String, String)>,
}

/// Complete calendar years fully inside [start, end].
fn complete_years_within(start: Date, end: Date) -> usize {
    let mut count = 0;
    for y in start.year()..=end.year() {
        let jan1 = Date::new(y, 1, 1).expect("valid");
        let dec31 = Date::new(y, 12, 31).expect("valid");
        if start <= jan1 && dec31 <= end {
            count += 1;
        }
    }
    count
}

/// Enumerate one family of windows against the data range.
pub fn enumerate_windows(
    first: Date,
    last: Date,
    family_kind: FamilyKind,
    min_years: usize,
) -> Result<WindowPlan> {
    if first >= last {
        return Err(Error::Window(format!("empty data range {first}..{last}")));
    }
    let first_year = first.year();
    let last_year = last.year();
    // The final calendar year counts as complete only if data reaches its
    // December; otherwise it is a stub covered by the full window alone.
    let last_complete_year = if last.month() == 12 { last_year } else { last_year - 1 };

    let mut windows = Vec::new();
    let mut skipped = Vec::new();
    match family_kind {
        FamilyKind::Full => windows.push(WindowSpec {
            family: WindowFamily::Full,
            label: "full".to_string(),
            start: first,
            end: last,
            min_years,
        }),
        FamilyKind::Expanding => {
            for y in first_year..=last_complete_year {
                let end = Date::new(y, 12, 31).expect("valid");
                let span = complete_years_within(first, end);
                if span >= min_years {
                    windows.push(WindowSpec {
                        family: WindowFamily::Expanding(y),
                        label: y.to_string(),
                        start: first,
                        end,
                        min_years,
                    });
                } else {
                    skipped.push((
                        y.to_string(),
                        format!("window spans {span} complete years, need {min_years}"),
                    ));
                }
            }
        }
        FamilyKind::AnchoredEnd => {
            for y in (first_year + 1)..=last_year {
                let start = Date::new(y, 1, 1).expect("valid");
                // The window begins at year y's first trading day, so year y
                // itself is not fully covered; require min_years complete
                // years strictly after it.
                let span = complete_years_within(Date::new(y + 1, 1, 1).expect("valid"), last);
                if span >= min_years {
                    windows.push(WindowSpec {
                        family: WindowFamily::AnchoredEnd(y),
                        label: y.to_string(),
                        start,
                        end: last,
                        min_years,
                    });
                } else {
                    skipped.push((
                        y.to_string(),
                        format!("window spans {span} complete years, need {min_years}"),
                    ));
                }
            }
        }
        FamilyKind::Yearly => {
            for y in first_year..=last_complete_year {
                windows.push(WindowSpec {
                    family: WindowFamily::Yearly(y),
                    label: y.to_string(),
                    start: Date::new(y, 1, 1).expect("valid"),
                    end: Date::new(y, 12, 31).expect("valid"),
                    min_years,
                });
            }
        }
    }
    Ok(WindowPlan { windows, skipped })
}

/// Family selector for enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Full,
    Expanding,
    AnchoredEnd,
    Yearly,
}

/// Pipeline configuration shared by every window.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Battery depth: lags 1..=lags.
    pub lags: usize,
    /// VAR lag search bound.
    pub var_max_lag: usize,
    /// Bandwidth source; the rule is resolved per window from its return count.
    pub bandwidth: Bandwidth,
    /// Explicit per-window bandwidths, keyed "family/label" (e.g.
    /// "expanding/1991"); they take precedence over `bandwidth`.
    pub epsilon_overrides: BTreeMap<String, f64>,
    pub min_years: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            lags: 5,
            var_max_lag: 10,
            bandwidth: Bandwidth::Rule(crate::dp::BandwidthRule::default()),
            epsilon_overrides: BTreeMap::new(),
            min_years: 5,
        }
    }
}

/// Stable family prefix for override keys and file names.
pub fn family_slug(f: FamilyKind) -> &'static str {
    match f {
        FamilyKind::Full => "full",
        FamilyKind::Expanding => "expanding",
        FamilyKind::AnchoredEnd => "anchored",
        FamilyKind::Yearly => "yearly",
    }
}

impl WindowSpec {
    pub fn override_key(&self) -> String {
        let fam = match self.family {
            WindowFamily::Full => FamilyKind::Full,
            WindowFamily::Expanding(_) => FamilyKind::Expanding,
            WindowFamily::AnchoredEnd(_) => FamilyKind::AnchoredEnd,
            WindowFamily::Yearly(_) => FamilyKind::Yearly,
        };
        format!("{}/{}", family_slug(fam), self.label)
    }
}

/// One tested direction: cause index and effect index into the ticker triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DirectionLabel {
    pub cause: usize,
    pub effect: usize,
}

/// Column order mirrors the report layout: for tickers (x, y, z) the six
/// directions are x>y, y>x, x>z, z>x, y>z, z>y.
pub const DIRECTIONS: [DirectionLabel; 6] = [
    DirectionLabel { cause: 0, effect: 1 },
    DirectionLabel { cause: 1, effect: 0 },
    DirectionLabel { cause: 0, effect: 2 },
    DirectionLabel { cause: 2, effect: 0 },
    DirectionLabel { cause: 1, effect: 2 },
    DirectionLabel { cause: 2, effect: 1 },
];

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Successful per-window result.
#[derive(Debug, Clone)]
pub struct RowData {
    pub epsilon: f64,
    pub sample_size: usize,
    /// Selected VAR order per pair (x,y), (x,z), (y,z).
    pub var_lags: [usize; 3],
    /// Star cell per direction, aggregated over all lags.
    pub cells: [StarClass; 6],
    /// Full test outcomes per direction, ordered by lag.
    pub outcomes: [Vec<DpOutcome>; 6],
}

impl RowData {
    pub fn p_values(&self, direction: usize) -> Vec<f64> {
        self.outcomes[direction].iter().map(|o| o.p).collect()
    }
}

/// One causality-matrix row: a window with either results or a skip reason.
#[derive(Debug, Clone)]
pub struct CausalityRow {
    pub window: WindowSpec,
    pub outcome: std::result::Result<RowData, String>,
}

/// Matrix of rows for one family.
#[derive(Debug, Clone)]
pub struct CausalityMatrix {
    pub family: FamilyKind,
    pub tickers: [String; 3],
    pub rows: Vec<CausalityRow>,
}

/// Run the pipeline for a single window over the aligned return triple.
pub fn run_pipeline(
    window: &WindowSpec,
    returns: &[ReturnSeries; 3],
    config: &PipelineConfig,
) -> CausalityRow {
    match run_window(window, returns, config) {
        Ok(data) => CausalityRow { window: window.clone(), outcome: Ok(data) },
        Err(e) => CausalityRow { window: window.clone(), outcome: Err(e.to_string()) },
    }
}

fn run_window(
    window: &WindowSpec,
    returns: &[ReturnSeries; 3],
    config: &PipelineConfig,
) -> Result<RowData> {
    let slices: Vec<Vec<f64>> = returns
        .iter()
        .map(|r| r.slice_by_date(window.start, window.end).values)
        .collect();
    let n = slices[0].len();
    if slices.iter().any(|s| s.len() != n) {
        return Err(Error::Window("window slices disagree in length".into()));
    }
    if n < 50 {
        return Err(Error::InsufficientSample(format!(
            "window {} has {n} observations, need >= 50",
            window.label
        )));
    }
    let epsilon = match config.epsilon_overrides.get(&window.override_key()) {
        Some(e) if *e > 0.0 => *e,
        Some(e) => {
            return Err(Error::Config(format!(
                "bandwidth override {e} for {} must be positive",
                window.override_key()
            )))
        }
        None => match &config.bandwidth {
            Bandwidth::Fixed(e) => *e,
            Bandwidth::Rule(rule) => bandwidth(n, rule)?,
        },
    };

    // Cap the VAR search so short windows keep the 20-obs-per-lag guard.
    let pmax = config.var_max_lag.min(n / 20);

    let mut var_lags = [0usize; 3];
    let mut outcomes: [Vec<DpOutcome>; 6] = Default::default();
    for (pair_idx, (a, b)) in PAIRS.iter().enumerate() {
        let fit = delinearize(&slices[*a], &slices[*b], pmax)?;
        var_lags[pair_idx] = fit.p;
        let battery = dp_direction_battery(&fit.resid_x, &fit.resid_y, config.lags, epsilon)?;
        for entry in battery {
            let (cause, effect) = match entry.direction {
                Direction::XtoY => (*a, *b),
                Direction::YtoX => (*b, *a),
            };
            let dir_idx = DIRECTIONS
                .iter()
                .position(|d| d.cause == cause && d.effect == effect)
                .expect("every ordered pair is a column");
            outcomes[dir_idx].push(entry.outcome);
        }
    }

    let mut cells = [StarClass::Blank; 6];
    for (i, dir) in outcomes.iter().enumerate() {
        debug_assert_eq!(dir.len(), config.lags);
        cells[i] = star_aggregate(&dir.iter().map(|o| o.p).collect::<Vec<_>>());
    }
    Ok(RowData { epsilon, sample_size: n, var_lags, cells, outcomes })
}

/// Run a whole family in parallel over windows; row order is the enumeration
/// order and results are independent of scheduling.
pub fn run_family(
    family: FamilyKind,
    returns: &[ReturnSeries; 3],
    config: &PipelineConfig,
) -> Result<(CausalityMatrix, Vec<(String, String)>)> {
    let first = *returns[0]
        .dates
        .first()
        .ok_or_else(|| Error::Window("empty return series".into()))?;
    let last = *returns[0].dates.last().expect("nonempty");
    let plan = enumerate_windows(first, last, family, config.min_years)?;
    let rows: Vec<CausalityRow> = plan
        .windows
        .par_iter()
        .map(|w| run_pipeline(w, returns, config))
        .collect();
    Ok((
        CausalityMatrix {
            family,
            tickers: [
                returns[0].ticker.clone(),
                returns[1].ticker.clone(),
                returns[2].ticker.clone(),
            ],
            rows,
        },
        plan.skipped,
    ))
}
