//! Nonlinear Granger causality pipeline for daily financial series.
//!
//! The crate covers the full workflow: CSV ingestion and calendar alignment,
//! log-return construction and descriptive statistics, ADF/RALS unit-root
//! tests, BDS and Tsay nonlinearity tests, bivariate VAR delinearization,
//! the Diks-Panchenko nonparametric causality test, and a window harness
//! that aggregates per-lag results into significance matrices. A seeded
//! Monte Carlo module provides the reference oracle and size/power checks
//! behind the validation suite.

pub mod date;
pub mod dp;
pub mod error;
pub mod linalg;
pub mod mc;
pub mod numeric;
pub mod pipeline;
pub mod report;
pub mod nonlin;
pub mod series;
pub mod stationarity;
pub mod validation;
pub mod var;
pub mod windows;

pub use error::{Error, Result};
