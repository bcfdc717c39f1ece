//! Tour benchmark for the planners in [`amrrt_core`].
//!
//! A [`Scenario`] names a map, a start and goals to visit in order. Each
//! (variant, seed) run tours the goals on one persistent tree and yields a
//! [`LegRow`] per goal. Rows are aggregated into a [`Summary`] and written
//! as CSV plus JSON by [`emit_report`].

pub mod checks;
pub mod report;
pub mod rewiring;
pub mod scenario;
pub mod tour;

use thiserror::Error;

pub use checks::Check;
pub use report::{emit_report, summarize, LegRow, Summary, VariantSummary};
pub use scenario::{ObstacleEvent, ObstacleOp, Scenario, VariantSpec};
pub use tour::{optimal_length, run_scenario, run_tour, Prepared};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("bad scenario: {0}")]
    Scenario(String),
    #[error("scenario JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Env(#[from] amrrt_core::env::EnvError),
    #[error(transparent)]
    Metric(#[from] amrrt_core::metrics::MetricError),
    #[error(transparent)]
    Planner(#[from] amrrt_core::planner::PlannerError),
    #[error("no rows to report")]
    NoRows,
}
