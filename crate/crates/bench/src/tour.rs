//! The tour protocol: set each goal in turn, count the search effort until a
//! goal path exists, then step until the agent arrives.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use amrrt_core::metrics::{AssistingMetric, MetricKind, MetricParams, MetricRegistry, VisibilityGraph};
use amrrt_core::planner::{BudgetMode, VariantRegistry};
use amrrt_core::{Environment, Rect, State};

use crate::report::{LegRow, LegStatus};
use crate::scenario::{ObstacleOp, Scenario, VariantSpec};
use crate::BenchError;

/// The loaded map with its assisting metrics and reference oracle, built
/// once and shared by every run.
#[derive(Clone)]
pub struct Prepared {
    pub env: Environment,
    pub metrics: BTreeMap<MetricKind, Arc<dyn AssistingMetric>>,
    /// Metric construction time in seconds, kept apart from search time.
    pub preprocessing: BTreeMap<MetricKind, f64>,
    pub reference: Arc<VisibilityGraph>,
}

impl Prepared {
    /// Builds the metrics `kinds` need on the scenario map.
    pub fn new(sc: &Scenario, kinds: &[MetricKind], params: &MetricParams) -> Result<Self, BenchError> {
        let env = sc.validate()?;
        let registry = MetricRegistry::standard();
        let mut metrics = BTreeMap::new();
        let mut preprocessing = BTreeMap::new();
        for &k in kinds {
            if metrics.contains_key(&k) {
                continue;
            }
            let t = Instant::now();
            metrics.insert(k, registry.build(k.name(), &env, params)?);
            preprocessing.insert(k, t.elapsed().as_secs_f64());
        }
        let reference = Arc::new(VisibilityGraph::build(&env));
        Ok(Prepared { env, metrics, preprocessing, reference })
    }

    /// Uses an already built metric, e.g. one loaded from a sidecar.
    pub fn with_metric(mut self, metric: Arc<dyn AssistingMetric>, seconds: f64) -> Self {
        self.preprocessing.insert(metric.kind(), seconds);
        self.metrics.insert(metric.kind(), metric);
        self
    }
}

/// Reference shortest-path length between two free states; +∞ when they
/// are disconnected.
pub fn optimal_length(reference: &VisibilityGraph, a: &State, b: &State) -> f64 {
    reference.shortest_length(a, b)
}

/// Ratio of travelled to optimal length; a zero-length leg counts as 1.
fn ratio(path: f64, optimal: f64) -> f64 {
    if optimal <= 1e-12 {
        if path <= 1e-9 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        path / optimal
    }
}

/// One (variant, seed) tour. Legs share one tree; a leg that exceeds the
/// step cap becomes a failure row and the tour moves on from wherever the
/// agent stopped.
pub fn run_tour(
    sc: &Scenario,
    prepared: &Prepared,
    spec: &VariantSpec,
    seed: u64,
    mode: BudgetMode,
) -> Result<Vec<LegRow>, BenchError> {
    let registry = VariantRegistry::standard();
    let variant = registry.get(&spec.variant)?;
    let metric = prepared
        .metrics
        .get(&variant.metric)
        .cloned()
        .ok_or_else(|| BenchError::Scenario(format!("metric `{}` was not prepared", variant.metric)))?;
    let base = amrrt_core::planner::PlannerConfig { seed, budget_mode: mode, ..spec.config.clone() };
    let mut planner = variant.build(prepared.env.clone(), sc.start, &base, metric)?;
    let mut labels = HashMap::new();
    let mut rows = Vec::with_capacity(sc.goals.len());

    for (i, goal) in sc.goals.iter().enumerate() {
        let leg = i + 1;
        let from = planner.agent();
        let d0 = planner.travelled();
        let e0 = planner.search().counters().expansions;
        planner.set_goal(*goal)?;
        let mut found = planner.goal_path_exists();
        let mut search_seconds = 0.0;
        let mut search_ops = if found { 0 } else { u64::MAX };
        let mut steps = 0u64;
        while !planner.arrived() && steps < sc.leg_cap {
            for ev in sc.obstacles.iter().filter(|e| e.leg == leg && e.step == steps) {
                match &ev.op {
                    ObstacleOp::Add { label, min, max } => {
                        labels.insert(label.clone(), planner.add_obstacle(Rect::from_corners(*min, *max))?);
                    }
                    ObstacleOp::Remove { label } => {
                        let id = labels.remove(label).expect("validated script");
                        planner.remove_obstacle(id)?;
                    }
                }
            }
            let t = Instant::now();
            planner.step();
            steps += 1;
            if !found {
                search_seconds += t.elapsed().as_secs_f64();
                if let Some(at) = planner.search().found_at() {
                    found = true;
                    search_ops = at - e0;
                }
            }
        }
        let status = match (found, planner.arrived()) {
            (_, true) => LegStatus::Ok,
            (true, false) => LegStatus::NotArrived,
            (false, false) => LegStatus::NoPath,
        };
        if !found {
            // censored at the effort spent before giving up
            search_ops = planner.search().counters().expansions - e0;
        }
        let path_length = planner.travelled() - d0;
        let optimal = optimal_length(&prepared.reference, &from, goal);
        rows.push(LegRow {
            scenario: sc.name.clone(),
            variant: spec.variant.clone(),
            seed,
            leg,
            status,
            search_time: match mode {
                BudgetMode::Deterministic => search_ops as f64,
                BudgetMode::Wallclock => search_seconds,
            },
            path_length,
            optimal_length: optimal,
            ratio: ratio(path_length, optimal),
        });
    }
    Ok(rows)
}

/// Every (variant, seed) tour of the scenario. Runs are spread over the
/// available cores; rows come back ordered by variant, then seed.
pub fn run_scenario(
    sc: &Scenario,
    prepared: &Prepared,
    variants: &[VariantSpec],
    mode: BudgetMode,
) -> Result<Vec<LegRow>, BenchError> {
    let jobs: Vec<(usize, u64)> =
        (0..variants.len()).flat_map(|v| sc.seeds.iter().map(move |&s| (v, s))).collect();
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(jobs.len()).max(1);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<Vec<LegRow>, BenchError>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(v, seed)) = jobs.get(j) else { break };
                let out = run_tour(sc, prepared, &variants[v], seed, mode);
                results.lock().expect("no worker panics while holding the lock")[j] = Some(out);
            });
        }
    });
    let mut rows = Vec::new();
    for r in results.into_inner().expect("workers joined") {
        rows.extend(r.expect("every job ran")?);
    }
    Ok(rows)
}
