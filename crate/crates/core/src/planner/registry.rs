use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::{Mode, Planner, PlannerConfig, PlannerError, Strategies};
use crate::env::{Environment, State};
use crate::metrics::{AssistingMetric, MetricKind};

pub type StrategyFactory = Arc<dyn Fn(&PlannerConfig) -> Strategies + Send + Sync>;

/// A named planner configuration: mode, assisting metric and strategies.
#[derive(Clone)]
pub struct Variant {
    pub name: String,
    /// Human-readable label for reports.
    pub label: String,
    pub mode: Mode,
    pub metric: MetricKind,
    factory: StrategyFactory,
}

impl fmt::Debug for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Variant")
            .field("name", &self.name)
            .field("mode", &self.mode)
            .field("metric", &self.metric)
            .finish()
    }
}

impl Variant {
    /// A variant using the stock strategies for `mode`.
    pub fn standard(name: &str, label: &str, mode: Mode, metric: MetricKind) -> Self {
        Variant {
            name: name.to_string(),
            label: label.to_string(),
            mode,
            metric,
            factory: Arc::new(Strategies::for_config),
        }
    }

    pub fn custom(name: &str, label: &str, mode: Mode, metric: MetricKind, factory: StrategyFactory) -> Self {
        Variant { name: name.to_string(), label: label.to_string(), mode, metric, factory }
    }

    /// `base` with this variant's mode and metric.
    pub fn configure(&self, base: &PlannerConfig) -> PlannerConfig {
        PlannerConfig { mode: self.mode, assisting_kind: self.metric, ..base.clone() }
    }

    pub fn build(
        &self,
        env: Environment,
        start: State,
        base: &PlannerConfig,
        metric: Arc<dyn AssistingMetric>,
    ) -> Result<Planner, PlannerError> {
        let cfg = self.configure(base);
        let strategies = (self.factory)(&cfg);
        Planner::with_strategies(env, start, cfg, metric, strategies)
    }
}

/// Planner variants by name.
#[derive(Clone, Debug)]
pub struct VariantRegistry {
    variants: BTreeMap<String, Variant>,
}

impl VariantRegistry {
    pub fn empty() -> Self {
        VariantRegistry { variants: BTreeMap::new() }
    }

    /// The five planners of the comparison: `am-rrt-e`, `am-rrt-d`,
    /// `am-rrt-g`, `rt-rrt` and `rt-rrt-d`.
    pub fn standard() -> Self {
        let mut r = Self::empty();
        r.register(Variant::standard("am-rrt-e", "AM-RRT*(E)", Mode::AmRrt, MetricKind::Euclidean));
        r.register(Variant::standard("am-rrt-d", "AM-RRT*(D)", Mode::AmRrt, MetricKind::Diffusion));
        r.register(Variant::standard("am-rrt-g", "AM-RRT*(G)", Mode::AmRrt, MetricKind::Geodesic));
        r.register(Variant::standard("rt-rrt", "RT-RRT* (baseline)", Mode::RtRrtBaseline, MetricKind::Euclidean));
        r.register(Variant::standard("rt-rrt-d", "RT-RRT*(D) (baseline)", Mode::RtRrtDBaseline, MetricKind::Diffusion));
        r
    }

    pub fn register(&mut self, v: Variant) {
        self.variants.insert(v.name.clone(), v);
    }

    pub fn get(&self, name: &str) -> Result<&Variant, PlannerError> {
        self.variants.get(name).ok_or_else(|| PlannerError::UnknownVariant(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.variants.keys().map(String::as_str)
    }
}

impl Default for VariantRegistry {
    fn default() -> Self {
        Self::standard()
    }
}
