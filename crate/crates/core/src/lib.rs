//! Real-time multi-query sampling-based planning with an assisting metric.
//!
//! The crate is organised bottom-up:
//!
//! * [`env`]: world model, collision queries and samplers
//! * [`metrics`]: Euclidean, diffusion and geodesic distances
//! * [`spatial`]: nearest/radius queries in both metric spaces
//! * [`tree`]: the planning tree with cost maintenance
//! * [`planner`]: expansion, steering, rewiring and the outer loop
//!
//! Algorithm variants are registered by name in
//! [`planner::VariantRegistry`] and assisting metrics in
//! [`metrics::MetricRegistry`].

pub mod env;
pub mod fixtures;
pub mod metrics;
pub mod planner;
pub mod spatial;
pub mod tree;

pub use env::{Environment, Rect, State};
