//! Structural break detection in country-year emission panels.
//!
//! The pipeline saturates a two-way fixed-effects regression of log
//! emissions with step indicators (one per country and period), selects the
//! significant ones by block-wise general-to-specific search, re-estimates
//! the retained breaks in a sparse model, and attributes them to policy
//! events falling inside each break's timing window.
//!
//! Modules, bottom up:
//! - [`panel`]: panel data, candidate indicators, saturated design.
//! - [`regress`]: rank-revealing least squares and inference.
//! - [`saturation`]: block search and multi-path elimination.
//! - [`effects`]: sparse re-estimation, timing intervals, counterfactuals.
//! - [`attribution`]: break dedup, policy matching, summary tables.
//! - [`robustness`]: gamma sensitivity, impulse saturation, synthetic control.
//! - [`simgen`]: synthetic panels with known breaks, calibration harness.
//! - [`io`] and [`pipeline`]: file formats and end-to-end orchestration.

pub mod attribution;
pub mod effects;
pub mod error;
pub mod io;
pub mod panel;
pub mod pipeline;
pub mod regress;
pub mod robustness;
pub mod saturation;
pub mod simgen;

pub use error::{Error, Result};
