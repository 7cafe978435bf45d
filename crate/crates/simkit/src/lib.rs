//! Monte Carlo experiment harness for IRS-aided OFDM: configuration,
//! the three studies, and CSV/SVG output.

pub mod config;
pub mod experiments;
pub mod output;
pub mod stats;

pub use config::{ConfigError, OverheadModel, SystemConfig};
pub use experiments::{Experiment, ExperimentOutput, ResultRow, RunError};
