//! Pipeline orchestration: configuration, stage execution, manifests.

pub mod config;
pub mod error;
pub mod manifest;
pub mod stages;

pub use config::{resolve_workdir, RunConfig, Task};
pub use error::{CliError, Result};
pub use stages::{run_stage, ExplainRequest, Stage, StageOutcome};
