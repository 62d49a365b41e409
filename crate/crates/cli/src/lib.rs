//! Library half of the `xquant` binary: configuration merging, CSV
//! ingestion and the `assess` / `simulate` drivers that write report files.

pub mod config;
pub mod error;
pub mod ingest;
pub mod run;

pub use config::{Command, FileConfig, Flags, RunConfig, Source, TargetLevel};
pub use error::{CliError, Result};
pub use ingest::{ingest_csv, IngestStats, Sample};
pub use run::run;
