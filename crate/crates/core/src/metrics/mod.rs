//! Distances. Every planner query that is not a Euclidean length goes
//! through an [`AssistingMetric`].

mod diffusion;
mod geodesic;
mod graph;
pub mod lanczos;
mod visibility;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use diffusion::{DiffusionMap, DiffusionMetric, DiffusionParams, DiffusionTime};
pub use geodesic::{GeodesicOracle, DEFAULT_CACHE_FIELDS};
pub use graph::{GridGraph, WeightedGraph};
pub use visibility::VisibilityGraph;

use crate::env::{Environment, State};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("invalid metric parameter: {0}")]
    InvalidParameter(String),
    #[error("grid graph has no free lattice points")]
    EmptyGraph,
    #[error("eigensolver did not converge within {iterations} basis vectors")]
    EigenNoConvergence { iterations: usize },
    #[error("diffusion sidecar: {0}")]
    Sidecar(String),
    #[error("unknown assisting metric `{0}`")]
    Unknown(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Euclidean,
    Diffusion,
    Geodesic,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Euclidean => "euclidean",
            MetricKind::Diffusion => "diffusion",
            MetricKind::Geodesic => "geodesic",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Image of a state in a Euclidean embedding. Images in different
/// components are infinitely far apart.
#[derive(Clone, Copy, Debug)]
pub struct Embedding<'a> {
    pub component: u32,
    pub coords: &'a [f64],
}

/// The assisting metric d_A.
pub trait AssistingMetric: Send + Sync + fmt::Debug {
    fn kind(&self) -> MetricKind;

    fn distance(&self, a: &State, b: &State) -> f64;

    /// Embedding under which `distance` is the Euclidean distance between
    /// images, when the metric has one. Spatial indices use it to build
    /// metric trees.
    fn embed(&self, _x: &State) -> Option<Embedding<'_>> {
        None
    }

    fn embedding_dim(&self) -> usize {
        0
    }

    /// Lattice node `x` is attached to, for metrics defined on a lattice.
    fn anchor(&self, _x: &State) -> Option<u32> {
        None
    }

    /// Distance from every lattice node to `x`, indexed by [`anchor`](Self::anchor).
    fn field_to(&self, _x: &State) -> Option<Arc<[f64]>> {
        None
    }
}

/// d_E.
#[inline]
pub fn euclidean(a: &State, b: &State) -> f64 {
    a.dist(b)
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Euclidean;

impl AssistingMetric for Euclidean {
    fn kind(&self) -> MetricKind {
        MetricKind::Euclidean
    }

    fn distance(&self, a: &State, b: &State) -> f64 {
        a.dist(b)
    }
}

/// Construction parameters shared by the registered metrics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricParams {
    /// Lattice spacing in meters; `None` means twice the map cell size.
    pub r_grid: Option<f64>,
    pub k: usize,
    pub diffusion_time: DiffusionTime,
    pub geodesic_cache: usize,
}

impl Default for MetricParams {
    fn default() -> Self {
        MetricParams { r_grid: None, k: 8, diffusion_time: DiffusionTime::default(), geodesic_cache: DEFAULT_CACHE_FIELDS }
    }
}

impl MetricParams {
    pub fn r_grid_for(&self, env: &Environment) -> f64 {
        self.r_grid.unwrap_or(2.0 * env.cell_size())
    }
}

pub type MetricBuilder =
    Box<dyn Fn(&Environment, &MetricParams) -> Result<Arc<dyn AssistingMetric>, MetricError> + Send + Sync>;

/// Assisting metrics by name.
pub struct MetricRegistry {
    builders: BTreeMap<String, MetricBuilder>,
}

impl MetricRegistry {
    pub fn empty() -> Self {
        MetricRegistry { builders: BTreeMap::new() }
    }

    /// `euclidean`, `diffusion` and `geodesic`.
    pub fn standard() -> Self {
        let mut r = Self::empty();
        r.register("euclidean", Box::new(|_, _| Ok(Arc::new(Euclidean))));
        r.register(
            "diffusion",
            Box::new(|env, p| Ok(Arc::new(DiffusionMetric::build(env, p.r_grid_for(env), p.k, p.diffusion_time)?))),
        );
        r.register(
            "geodesic",
            Box::new(|env, p| {
                let grid = Arc::new(GridGraph::build(env, p.r_grid_for(env))?);
                Ok(Arc::new(GeodesicOracle::new(grid, p.geodesic_cache)))
            }),
        );
        r
    }

    pub fn register(&mut self, name: &str, builder: MetricBuilder) {
        self.builders.insert(name.to_string(), builder);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.builders.keys().map(String::as_str)
    }

    pub fn build(
        &self,
        name: &str,
        env: &Environment,
        params: &MetricParams,
    ) -> Result<Arc<dyn AssistingMetric>, MetricError> {
        let b = self.builders.get(name).ok_or_else(|| MetricError::Unknown(name.to_string()))?;
        b(env, params)
    }
}

impl Default for MetricRegistry {
    fn default() -> Self {
        Self::standard()
    }
}

impl fmt::Debug for MetricRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.builders.keys()).finish()
    }
}
