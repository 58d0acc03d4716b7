//! IO, file formats, and pipeline orchestration around `hoopcast-core`:
//! CSV ingestion of the competition data files, feature-table caching,
//! checkpoint persistence, report emitters, and the CLI commands.

pub mod checkpoint_io;
pub mod config;
pub mod ingest;
pub mod pipeline;
pub mod reports;
pub mod submission;
pub mod tables_io;

pub use config::RunConfig;
