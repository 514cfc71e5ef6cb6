//! Scenario files, per-task pipelines, seeded batches and result tables.

mod aggregate;
mod navigation;
mod record;
mod run;
mod scenario;
mod tasks;

use thiserror::Error;

pub use aggregate::{aggregate, overall, round_to, AggregateTable, TaskSummary};
pub use navigation::{run_navigation, NavOutcome};
pub use record::{read_csv, write_csv, RunRecord};
pub use run::{run_batch, run_scenario, Job, RunConfig, TimeModel};
pub use scenario::{GroundTruth, Scenario, ScenarioParams};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{origin}: {message}")]
    Schema { origin: String, message: String },
    #[error("{0}")]
    Internal(String),
}

impl HarnessError {
    pub fn schema(origin: impl Into<String>, message: impl Into<String>) -> Self {
        HarnessError::Schema {
            origin: origin.into(),
            message: message.into(),
        }
    }

    /// Process exit code: 2 for schema errors, 3 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Schema { .. } => 2,
            HarnessError::Internal(_) => 3,
        }
    }
}
