//! Command-line front end: grids, route comparisons, singular-term scans and
//! plot-ready CSV/JSON output.

pub mod config;
pub mod output;
pub mod run;

pub use config::{Cli, Command, ConfigError, Flags, Format, Range, Route, RunConfig};
pub use output::{exit_code, report, write_csv, write_json, Row, Status};
pub use run::run;
