//! Experiment runner: JSON specs in, result bundles (JSON, CSV, SVG and
//! optional checkpoints) out.

pub mod bundle;
pub mod error;
pub mod experiments;
pub mod format;
pub mod plot;
pub mod spec;
pub mod table;

pub use error::{CliError, CliResult};
