//! `nlgc`: nonlinear Granger causality pipeline over three daily price series.
//!
//! `run` ingests CSVs, executes the configured analyses, and writes every
//! table (CSV + markdown) plus plot-data files to the output directory.
//! `validate` executes the seeded verification suite and reports one line
//! per criterion.
//!
//! Exit codes: 0 success, 1 validation failure, 2 configuration error,
//! 3 ingestion error, 4 numerical error.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nlgc_core::error::Error as CoreError;
use nlgc_core::pipeline::run_full_analysis;
use nlgc_core::report::Provenance;
use nlgc_core::series::{parse_price_csv, PriceSeries};
use nlgc_core::validation::{criteria, Status, SuiteConfig};

use config::RunConfig;

const EXIT_VALIDATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INGESTION: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Parser)]
#[command(
    name = "nlgc",
    version,
    about = "Nonlinear Granger causality analysis over three daily price series",
    long_about = "Pipeline: align trading calendars, build percent log-returns, run \
descriptive statistics, ADF/RALS unit-root tests (BIC lags, embedded critical values), \
BDS and Tsay nonlinearity tests, then delinearize each pair with a BIC-selected VAR and \
test both causal directions at lags 1..L with an indicator-kernel conditional-independence \
statistic, over full/expanding/anchored/yearly windows. Star cells report the weakest \
significance level attained at every lag."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the analysis pipeline described by a JSON config file.
    Run(RunArgs),
    /// Run the verification suite (seeded oracles, size/power, determinism).
    Validate(ValidateArgs),
}

const RUN_DEFAULTS: &str = "Defaults:
  analyses           descriptive, unit_root, nonlinearity, causality
  windows            full, expanding, anchored, yearly (min 5 complete years
                     for expanding/anchored rows)
  lags               5 (causality battery tests lags 1..=5 per direction)
  var_max_lag        10 (per-pair VAR order search bound, BIC-selected)
  bandwidth          c * n^(-beta) with c = 9.3, beta = 2/7, resolved from
                     each window's return count; residuals are standardized,
                     so epsilon is in standard-deviation units
  nonlinearity       BDS dimensions 2..=4 at 0.5/1.0/1.5/2.0 sd radii on
                     BIC-prewhitened residuals; Tsay lags 1..=7
  unit_root          ADF and RALS, both deterministic specs, BIC lag search
                     up to the Schwert bound floor(12 (n/100)^(1/4))
  significance       *, **, *** mark p < 10%, 5%, 1%; window cells report
                     the weakest level attained at every tested lag

Input CSVs: header 'date,price', ISO-8601 dates, positive prices, UTF-8.
Calendars are aligned by exact date intersection.";

#[derive(Args)]
#[command(after_long_help = RUN_DEFAULTS, after_help = RUN_DEFAULTS)]
struct RunArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the configured output directory.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Override the battery depth (test lags 1..=LAGS; default 5).
    #[arg(long)]
    lags: Option<usize>,
    /// Override window families (comma-separated: full,expanding,anchored,yearly).
    #[arg(long, value_delimiter = ',')]
    windows: Option<Vec<String>>,
    /// Deterministic terms for the unit-root block: both, trend, or drift.
    #[arg(long)]
    unit_root_spec: Option<String>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Base seed for every simulation (default 20150205).
    #[arg(long)]
    seed: Option<u64>,
    /// Reduced replication counts for a fast smoke run (thresholds unchanged).
    #[arg(long)]
    quick: bool,
    /// Directory with SP500.csv / WTI.csv / GOLD.csv enabling the
    /// conditional reference-data criteria (B10-B12).
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Run only these criterion ids (comma-separated, e.g. A1,A8).
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<String>>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => run_command(args),
        Command::Validate(args) => validate_command(args),
    }
}

fn fail(code: u8, msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn exit_code_for(err: &CoreError) -> u8 {
    match err {
        CoreError::Config(_) => EXIT_CONFIG,
        CoreError::Ingestion(_) | CoreError::Alignment(_) | CoreError::InvalidSeries(_) => {
            EXIT_INGESTION
        }
        _ => EXIT_NUMERICAL,
    }
}

fn run_command(args: RunArgs) -> ExitCode {
    // Configuration stage.
    let config_bytes = match std::fs::read(&args.config) {
        Ok(b) => b,
        Err(e) => return fail(EXIT_CONFIG, &format!("cannot read {}: {e}", args.config.display())),
    };
    let mut run_config: RunConfig = match serde_json::from_slice(&config_bytes) {
        Ok(c) => c,
        Err(e) => return fail(EXIT_CONFIG, &format!("invalid config: {e}")),
    };
    if let Some(dir) = args.output_dir {
        run_config.output_dir = dir;
    }
    if let Some(lags) = args.lags {
        run_config.lags = lags;
    }
    if let Some(windows) = args.windows {
        run_config.windows = windows;
    }
    if let Some(spec) = args.unit_root_spec {
        run_config.unit_root_spec = spec;
    }
    let settings = match run_config.to_settings() {
        Ok(s) => s,
        Err(e) => return fail(EXIT_CONFIG, &e),
    };
    let date_range = match parse_date_range(&run_config) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_CONFIG, &e),
    };

    // Ingestion stage: read everything before computing anything.
    let mut prices: Vec<PriceSeries> = Vec::new();
    let mut raw_inputs: Vec<(String, Vec<u8>)> = Vec::new();
    for input in &run_config.inputs {
        let bytes = match std::fs::read(&input.path) {
            Ok(b) => b,
            Err(e) => {
                return fail(
                    EXIT_INGESTION,
                    &format!("{}: cannot read {}: {e}", input.ticker, input.path.display()),
                )
            }
        };
        let text = match String::from_utf8(bytes.clone()) {
            Ok(t) => t,
            Err(_) => {
                return fail(EXIT_INGESTION, &format!("{}: file is not UTF-8", input.ticker))
            }
        };
        let series = match parse_price_csv(&input.ticker, &text) {
            Ok(s) => s,
            Err(e) => return fail(EXIT_INGESTION, &e.to_string()),
        };
        let series = match date_range {
            Some((start, end)) => match series.slice_by_date(start, end) {
                Ok(s) => s,
                Err(e) => return fail(EXIT_INGESTION, &e.to_string()),
            },
            None => series,
        };
        prices.push(series);
        raw_inputs.push((input.ticker.clone(), bytes));
    }

    // Analysis stage: everything renders in memory, so a numerical failure
    // leaves no partial tables on disk.
    let provenance = Provenance::new(&config_bytes, &raw_inputs);
    let output = match run_full_analysis(&prices, &settings, &provenance) {
        Ok(o) => o,
        Err(e) => return fail(exit_code_for(&e), &e.to_string()),
    };

    for w in &output.warnings {
        eprintln!("warning: {w}");
    }
    if let Err(e) = std::fs::create_dir_all(&run_config.output_dir) {
        return fail(
            EXIT_CONFIG,
            &format!("cannot create {}: {e}", run_config.output_dir.display()),
        );
    }
    for (name, content) in &output.files {
        let path = run_config.output_dir.join(name);
        if let Err(e) = std::fs::write(&path, content) {
            return fail(EXIT_CONFIG, &format!("cannot write {}: {e}", path.display()));
        }
    }
    println!(
        "wrote {} files to {}",
        output.files.len(),
        run_config.output_dir.display()
    );
    ExitCode::SUCCESS
}

fn parse_date_range(
    cfg: &RunConfig,
) -> Result<Option<(nlgc_core::date::Date, nlgc_core::date::Date)>, String> {
    match (&cfg.start, &cfg.end) {
        (None, None) => Ok(None),
        (start, end) => {
            let start: nlgc_core::date::Date = start
                .as_deref()
                .unwrap_or("0001-01-01")
                .parse()
                .map_err(|e: CoreError| e.to_string())?;
            let end: nlgc_core::date::Date = end
                .as_deref()
                .unwrap_or("9999-12-31")
                .parse()
                .map_err(|e: CoreError| e.to_string())?;
            if start >= end {
                return Err(format!("empty date range {start}..{end}"));
            }
            Ok(Some((start, end)))
        }
    }
}

fn validate_command(args: ValidateArgs) -> ExitCode {
    let mut cfg = SuiteConfig {
        quick: args.quick,
        data_dir: args.data_dir,
        ..SuiteConfig::default()
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let to_run: Vec<_> = match &args.only {
        Some(ids) => {
            let wanted: Vec<String> = ids.iter().map(|s| s.to_ascii_uppercase()).collect();
            criteria()
                .into_iter()
                .filter(|(id, _)| wanted.iter().any(|w| w == id))
                .collect()
        }
        None => criteria(),
    };
    if to_run.is_empty() {
        return fail(EXIT_CONFIG, "no matching criteria (ids are A1..A9, B10..B12)");
    }
    let mut failed = 0;
    for (_, f) in to_run {
        let r = f(&cfg);
        println!("{}", r.line());
        if r.status == Status::Fail {
            failed += 1;
        }
    }
    if failed > 0 {
        eprintln!("{failed} criterion(s) failed");
        ExitCode::from(EXIT_VALIDATION)
    } else {
        ExitCode::SUCCESS
    }
}
