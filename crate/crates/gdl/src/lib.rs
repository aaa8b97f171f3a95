//! Command-line harness, result cache and CSV/JSON output for `gdl-core`.

pub mod cache;
pub mod cli;
pub mod format;
pub mod scan;

pub use cli::run;
