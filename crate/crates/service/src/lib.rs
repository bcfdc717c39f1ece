//! Live planning sessions over WebSocket.
//!
//! Each `/session` connection opens one planner, stepped on its own thread.
//! Commands from the operator queue in a bounded inbox and take effect
//! between iterations. Snapshots come back at a fixed rate and after every
//! applied command. `GET /maps` lists the shipped fixtures and
//! `GET /maps/<id>` returns one map document.

pub mod protocol;
pub mod server;
pub mod session;

use amrrt_core::metrics::MetricError;
use amrrt_core::planner::{ConfigError, PlannerError};
use thiserror::Error;

pub use protocol::{Body, Kind, Message, ProtocolError, Snapshot};
pub use server::{router, serve, AppState, ServiceConfig};
pub use session::{Command, Inbox, Session, SessionOptions, SessionSpec};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown map `{0}`")]
    UnknownMap(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Planner(#[from] PlannerError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("command inbox is full")]
    InboxFull,
    #[error("session is closed")]
    Closed,
    #[error("no dynamic obstacle overlaps the area")]
    NothingToRemove,
}
