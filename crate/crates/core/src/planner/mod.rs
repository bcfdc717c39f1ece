//! The planner: sampling, expansion, root and goal rewiring, and the
//! outer loop that moves the root and the agent.
//!
//! [`Search`] owns the tree, the dual index and the rewiring queues.
//! [`Planner`] adds the agent and runs one outer iteration per [`Planner::step`].
//! The variant-specific parts (nearest rule, steering, goal rewiring) are
//! trait objects from [`strategy`], selected by [`Mode`] or registered in
//! [`VariantRegistry`].

mod config;
mod registry;
pub mod strategy;

use std::collections::VecDeque;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{BudgetMode, ConfigError, Meter, Mode, Phase, PlannerConfig, SteerStep};
pub use registry::{Variant, VariantRegistry};
pub use strategy::{GoalRewiring, NearestRule, SteerRule, Strategies};

use crate::env::{sample_rewire_ellipse, EnvError, Environment, ObstacleId, Rect, State};
use crate::metrics::AssistingMetric;
use crate::spatial::{DualIndex, SpatialError};
use crate::tree::{EpochSet, NodeId, PlanTree, TreeError, TreeSnapshot};

#[derive(Debug, Error, PartialEq)]
pub enum PlannerError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Spatial(#[from] SpatialError),
    #[error("state {0:?} is outside the world")]
    OutOfBounds(State),
    #[error("goal {0:?} lies inside an obstacle")]
    GoalInObstacle(State),
    #[error("configured assisting metric is {configured}, but a {provided} metric was supplied")]
    MetricMismatch { configured: String, provided: String },
    #[error("unknown variant `{0}`")]
    UnknownVariant(String),
}

/// Rejection attempts for a free sample inside the rewire ellipse.
const ELLIPSE_ATTEMPTS: usize = 64;

/// Operation counters; `expansions` is the deterministic search clock.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub expansions: u64,
    pub insertions: u64,
    pub root_visits: u64,
    pub goal_visits: u64,
    pub rewires: u64,
    pub steer_samples: u64,
}

/// Record of every edge creation and rewire, for audits.
#[derive(Clone, Debug, Default)]
pub struct AuditLog {
    /// `(parent, child, obs_free at creation)`.
    pub edges: Vec<(State, State, bool)>,
    /// `(node, cost before, cost after)`.
    pub rewires: Vec<(NodeId, f64, f64)>,
}

/// Tree, index, queues and randomness shared by every strategy.
#[derive(Clone)]
pub struct Search {
    env: Environment,
    cfg: PlannerConfig,
    tree: PlanTree,
    index: DualIndex,
    rng: ChaCha8Rng,
    pub(crate) q_root: VecDeque<NodeId>,
    pub(crate) root_seen: EpochSet,
    pub(crate) q_goal: VecDeque<NodeId>,
    pub(crate) s_goal: Vec<NodeId>,
    /// Members of S_goal since its last reset.
    pub(crate) stack_seen: EpochSet,
    /// Members of Q_goal since its last reset.
    pub(crate) queue_seen: EpochSet,
    goal: Option<State>,
    goal_node: Option<NodeId>,
    found_at: Option<u64>,
    counters: Counters,
    log: Option<AuditLog>,
}

impl std::fmt::Debug for Search {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Search")
            .field("nodes", &self.tree.len())
            .field("goal", &self.goal)
            .field("counters", &self.counters)
            .finish()
    }
}

impl Search {
    pub fn new(
        env: Environment,
        start: State,
        cfg: PlannerConfig,
        metric: Arc<dyn AssistingMetric>,
    ) -> Result<Self, PlannerError> {
        cfg.validate()?;
        if metric.kind() != cfg.assisting_kind {
            return Err(PlannerError::MetricMismatch {
                configured: cfg.assisting_kind.to_string(),
                provided: metric.kind().to_string(),
            });
        }
        let tree = PlanTree::new(&env, start)?;
        let mut index = DualIndex::new(env.width(), env.height(), cfg.s_max, metric);
        index.insert(start)?;
        Ok(Search {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            env,
            cfg,
            tree,
            index,
            q_root: VecDeque::new(),
            root_seen: EpochSet::new(),
            q_goal: VecDeque::new(),
            s_goal: Vec::new(),
            stack_seen: EpochSet::new(),
            queue_seen: EpochSet::new(),
            goal: None,
            goal_node: None,
            found_at: None,
            counters: Counters::default(),
            log: None,
        })
    }

    pub fn env(&self) -> &Environment {
        &self.env
    }

    pub fn config(&self) -> &PlannerConfig {
        &self.cfg
    }

    pub fn tree(&self) -> &PlanTree {
        &self.tree
    }

    pub fn index(&self) -> &DualIndex {
        &self.index
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn goal(&self) -> Option<State> {
        self.goal
    }

    pub fn counters(&self) -> Counters {
        self.counters
    }

    pub fn audit_log(&self) -> Option<&AuditLog> {
        self.log.as_ref()
    }

    /// Starts recording edge creations and rewires.
    pub fn record_audit(&mut self) {
        self.log.get_or_insert_with(AuditLog::default);
    }

    /// The goal node, when it is connected with finite cost.
    pub fn goal_node(&self) -> Option<NodeId> {
        self.goal_node.filter(|&g| self.tree.cost(g).is_finite())
    }

    pub fn goal_path_exists(&self) -> bool {
        self.goal_node().is_some()
    }

    /// Transverse diameter of the rewire ellipse, +∞ without a goal path.
    pub fn c_best(&self) -> f64 {
        self.goal_node().map_or(f64::INFINITY, |g| self.tree.cost(g))
    }

    /// Expansion count at which the current goal was first connected.
    pub fn found_at(&self) -> Option<u64> {
        self.found_at
    }

    /// Lengths of the goal-rewiring stack and queue.
    pub fn goal_frontier(&self) -> (usize, usize) {
        (self.s_goal.len(), self.q_goal.len())
    }

    pub fn in_rewire_ellipse(&self, x: &State) -> bool {
        match self.goal {
            Some(g) => {
                let root = self.tree.position(self.tree.root());
                root.dist(x) + x.dist(&g) <= self.c_best()
            }
            None => false,
        }
    }

    fn free_sample(&mut self) -> State {
        self.env
            .sample_free(&mut self.rng)
            .unwrap_or_else(|_| self.tree.position(self.tree.root()))
    }

    /// x_rand by the three-way goal / free space / rewire ellipse split.
    pub fn sample_state(&mut self) -> State {
        let p: f64 = self.rng.gen();
        let no_path = !self.goal_path_exists();
        match self.goal {
            Some(g) if p > self.cfg.alpha && no_path => g,
            None => self.free_sample(),
            _ if p < self.cfg.alpha / self.cfg.beta || no_path => self.free_sample(),
            Some(g) => {
                let root = self.tree.position(self.tree.root());
                let c_best = self.c_best();
                for _ in 0..ELLIPSE_ATTEMPTS {
                    match sample_rewire_ellipse(&root, &g, c_best, &mut self.rng) {
                        Ok(x) if self.env.in_free(&x) => return x,
                        Ok(_) => continue,
                        Err(_) => break,
                    }
                }
                self.free_sample()
            }
        }
    }

    pub fn nearest_euclidean(&self, x: &State) -> NodeId {
        self.index.nearest_euclidean(x).expect("tree is never empty")
    }

    pub fn nearest_assisting(&self, x: &State) -> NodeId {
        self.index.nearest_assisting(x).expect("tree is never empty")
    }

    /// Euclidean nearest when it sees `x`, assisting nearest otherwise.
    pub fn nearest_dual(&self, x: &State) -> NodeId {
        let e = self.nearest_euclidean(x);
        if self.env.obs_free(&self.tree.position(e), x) {
            e
        } else {
            self.nearest_assisting(x)
        }
    }

    fn log_edge(&mut self, parent: NodeId, child: &State) {
        if let Some(log) = &mut self.log {
            let p = self.tree.position(parent);
            log.edges.push((p, *child, self.env.obs_free(&p, child)));
        }
    }

    fn insert_node(&mut self, x: State, parent: NodeId) -> NodeId {
        self.log_edge(parent, &x);
        let id = self.tree.add_node(x, parent).expect("fresh state, known parent");
        let same = self.index.insert(x).expect("index mirrors tree");
        debug_assert_eq!(id, same);
        self.counters.insertions += 1;
        id
    }

    /// Wires `x_new` through the cheapest obstacle-free candidate among
    /// `x_nrst` and `near`. The caller guarantees `obs_free(x_nrst, x_new)`.
    pub fn insert_with_best_parent(&mut self, x_new: State, x_nrst: NodeId, near: &[NodeId]) -> NodeId {
        let mut best = x_nrst;
        let mut c_min = self.tree.cost(x_nrst) + self.tree.position(x_nrst).dist(&x_new);
        for &n in near {
            let p = self.tree.position(n);
            let c = self.tree.cost(n) + p.dist(&x_new);
            if c < c_min && self.env.obs_free(&p, &x_new) {
                best = n;
                c_min = c;
            }
        }
        let id = self.insert_node(x_new, best);
        self.after_insert(id);
        id
    }

    fn after_insert(&mut self, id: NodeId) {
        let Some(g) = self.goal else { return };
        if self.goal_path_exists() {
            return;
        }
        let x = self.tree.position(id);
        if x == g {
            self.goal_node = Some(id);
            self.note_found();
        } else if self.tree.cost(id).is_finite()
            && x.dist(&g) <= self.cfg.goal_reached_tol
            && self.env.obs_free(&x, &g)
        {
            self.connect_goal();
        }
    }

    fn note_found(&mut self) {
        if self.goal_path_exists() && self.found_at.is_none() {
            self.found_at = Some(self.counters.expansions);
        }
    }

    /// Connects the goal through the cheapest finite node within
    /// `goal_reached_tol` that sees it. Returns whether a goal path exists.
    pub fn connect_goal(&mut self) -> bool {
        let Some(g) = self.goal else { return false };
        if self.goal_node.is_none() {
            self.goal_node = self.tree.find(&g);
        }
        if self.goal_path_exists() {
            self.note_found();
            return true;
        }
        let mut best: Option<(f64, NodeId)> = None;
        for n in self.index.nearby(&g, self.cfg.goal_reached_tol) {
            if Some(n) == self.goal_node {
                continue;
            }
            let p = self.tree.position(n);
            let c = self.tree.cost(n) + p.dist(&g);
            if c.is_finite() && best.is_none_or(|b| c < b.0) && self.env.obs_free(&p, &g) {
                best = Some((c, n));
            }
        }
        let Some((_, parent)) = best else { return false };
        match self.goal_node {
            Some(gid) => {
                // only finite nodes qualify, so none lies below the blocked goal
                self.log_edge(parent, &g);
                self.tree.update_edge(parent, gid).expect("finite parent is not a descendant");
            }
            None => {
                let id = self.insert_node(g, parent);
                self.goal_node = Some(id);
            }
        }
        self.note_found();
        true
    }

    /// Rewires every obstacle-free neighbour of `x_r` through it when that
    /// is cheaper; the obstacle-free neighbours are appended to `free`.
    pub fn rewire_through(&mut self, x_r: NodeId, free: &mut Vec<NodeId>) {
        let pr = self.tree.position(x_r);
        for near in self.index.nearby(&pr, self.cfg.s_max) {
            if near == x_r {
                continue;
            }
            let pn = self.tree.position(near);
            if !self.env.obs_free(&pn, &pr) {
                continue;
            }
            let c_old = self.tree.cost(near);
            let c_new = self.tree.cost(x_r) + pr.dist(&pn);
            if c_new < c_old && self.tree.update_edge(x_r, near).is_ok() {
                self.counters.rewires += 1;
                if let Some(log) = &mut self.log {
                    log.edges.push((pr, pn, true));
                    log.rewires.push((near, c_old, self.tree.cost(near)));
                }
            }
            free.push(near);
        }
    }

    /// Re-roots the tree at `n` and restarts root rewiring from there. A
    /// [`Planner`] owning this search does not move its agent.
    pub fn set_root(&mut self, n: NodeId) -> Result<(), PlannerError> {
        self.tree.set_root(n)?;
        self.q_root.clear();
        Ok(())
    }

    /// Root rewiring: breadth-first from the root, restarting once the
    /// queue runs dry.
    pub fn rewire_root(&mut self, meter: &mut Meter) {
        if self.q_root.is_empty() {
            self.root_seen.reset();
            let root = self.tree.root();
            self.root_seen.insert(root);
            self.q_root.push_back(root);
        }
        let mut free = Vec::new();
        while !self.q_root.is_empty() && meter.tick() {
            let x_r = self.q_root.pop_front().expect("non-empty");
            self.counters.root_visits += 1;
            free.clear();
            self.rewire_through(x_r, &mut free);
            for &near in &free {
                if self.root_seen.insert(near) {
                    self.q_root.push_back(near);
                }
                if self.goal.is_some() && self.queue_seen.insert(near) {
                    self.q_goal.push_back(near);
                }
            }
        }
    }

    /// Re-checks tree edges near changed obstacles and along `path`.
    fn refresh_edges(&mut self, rects: &[Rect], path: &[NodeId]) {
        let check = |s: &mut Search, n: NodeId| {
            let Some(p) = s.tree.parent(n) else { return };
            let free = s.env.obs_free(&s.tree.position(p), &s.tree.position(n));
            if !free && !s.tree.is_blocked(n) {
                s.tree.invalidate(n).expect("non-root");
            } else if free && s.tree.is_blocked(n) {
                s.tree.revalidate(n).expect("known node");
            }
        };
        for rect in rects {
            for n in self.index.in_rect(&rect.inflate(self.cfg.s_max)) {
                check(self, n);
            }
        }
        for &n in path {
            if n.index() < self.tree.len() {
                check(self, n);
            }
        }
    }

    fn set_goal(&mut self, g: State) -> Result<(), PlannerError> {
        if !self.env.in_bounds(&g) {
            return Err(PlannerError::OutOfBounds(g));
        }
        if !self.env.in_free(&g) {
            return Err(PlannerError::GoalInObstacle(g));
        }
        self.goal = Some(g);
        self.goal_node = None;
        self.found_at = None;
        self.q_goal.clear();
        self.s_goal.clear();
        self.stack_seen.reset();
        self.queue_seen.reset();
        self.connect_goal();
        Ok(())
    }
}

/// Per-phase wall-clock seconds for one step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimes {
    pub expand: f64,
    pub root: f64,
    pub goal: f64,
    pub plan: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub iter: u64,
    pub tree_size: usize,
    pub goal_cost: Option<f64>,
    pub goal_path_exists: bool,
    pub expansions: u64,
    pub travelled: f64,
    pub arrived: bool,
    pub elapsed: PhaseTimes,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub size: usize,
    pub goal_cost: Option<f64>,
    pub goal_found: bool,
    pub iter: u64,
}

/// Point-in-time copy of everything an observer draws.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerSnapshot {
    pub agent: State,
    pub goal: Option<State>,
    pub path: Vec<State>,
    pub tree: TreeSnapshot,
    pub stats: Stats,
}

/// What one expansion attempt did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expansion {
    Inserted(NodeId),
    /// Steering made no progress or landed on an existing node.
    NoProgress,
    /// The neighbourhood was full.
    Rejected,
}

#[derive(Clone, Debug)]
pub struct Planner {
    search: Search,
    strategies: Strategies,
    agent: State,
    /// Points the agent still has to pass, ending at the root.
    route: VecDeque<State>,
    /// The last point the agent passed.
    behind: State,
    travelled: f64,
    iter: u64,
    path: Vec<NodeId>,
    seen_version: u64,
}

impl Planner {
    /// A planner with the strategies `cfg.mode` selects.
    pub fn new(
        env: Environment,
        start: State,
        cfg: PlannerConfig,
        metric: Arc<dyn AssistingMetric>,
    ) -> Result<Self, PlannerError> {
        let strategies = Strategies::for_config(&cfg);
        Self::with_strategies(env, start, cfg, metric, strategies)
    }

    pub fn with_strategies(
        env: Environment,
        start: State,
        cfg: PlannerConfig,
        metric: Arc<dyn AssistingMetric>,
        strategies: Strategies,
    ) -> Result<Self, PlannerError> {
        if !env.in_bounds(&start) {
            return Err(PlannerError::OutOfBounds(start));
        }
        let version = env.version();
        let search = Search::new(env, start, cfg, metric)?;
        let root = search.tree.root();
        Ok(Planner {
            search,
            strategies,
            agent: start,
            route: VecDeque::new(),
            behind: start,
            travelled: 0.0,
            iter: 0,
            path: vec![root],
            seen_version: version,
        })
    }

    pub fn search(&self) -> &Search {
        &self.search
    }

    pub fn search_mut(&mut self) -> &mut Search {
        &mut self.search
    }

    pub fn strategies(&self) -> &Strategies {
        &self.strategies
    }

    pub fn config(&self) -> &PlannerConfig {
        &self.search.cfg
    }

    pub fn tree(&self) -> &PlanTree {
        &self.search.tree
    }

    pub fn env(&self) -> &Environment {
        &self.search.env
    }

    pub fn agent(&self) -> State {
        self.agent
    }

    pub fn goal(&self) -> Option<State> {
        self.search.goal
    }

    pub fn travelled(&self) -> f64 {
        self.travelled
    }

    pub fn iterations(&self) -> u64 {
        self.iter
    }

    pub fn goal_path_exists(&self) -> bool {
        self.search.goal_path_exists()
    }

    /// Goal-path cost, when a goal path exists.
    pub fn goal_cost(&self) -> Option<f64> {
        self.search.goal_node().map(|g| self.search.tree.cost(g))
    }

    /// Whether the agent stands on the goal.
    pub fn arrived(&self) -> bool {
        match (self.search.goal_node(), self.search.goal) {
            (Some(g), Some(goal)) => g == self.search.tree.root() && self.route.is_empty() && self.agent == goal,
            _ => false,
        }
    }

    pub fn set_goal(&mut self, g: State) -> Result<(), PlannerError> {
        self.search.set_goal(g)
    }

    pub fn add_obstacle(&mut self, rect: Rect) -> Result<ObstacleId, PlannerError> {
        Ok(self.search.env.add_obstacle(rect)?)
    }

    pub fn remove_obstacle(&mut self, id: ObstacleId) -> Result<Rect, PlannerError> {
        Ok(self.search.env.remove_obstacle(id)?)
    }

    pub fn sample_state(&mut self) -> State {
        self.search.sample_state()
    }

    pub fn nearest(&self, x: &State) -> NodeId {
        self.strategies.nearest.nearest(&self.search, x)
    }

    pub fn steer(&mut self, from: &State, to: &State) -> State {
        self.strategies.steer.steer(&mut self.search, from, to)
    }

    /// One expansion attempt.
    pub fn expand(&mut self) -> Expansion {
        let s = &mut self.search;
        s.counters.expansions += 1;
        let x_rand = s.sample_state();
        let nrst = self.strategies.nearest.nearest(s, &x_rand);
        let x_nrst = s.tree.position(nrst);
        let x_new = self.strategies.steer.steer(s, &x_nrst, &x_rand);
        if x_new == x_nrst || s.tree.contains(&x_new) {
            return Expansion::NoProgress;
        }
        let near = s.index.nearby(&x_new, s.cfg.s_max);
        if near.len() <= s.cfg.k_max || x_nrst.dist(&x_rand) > s.cfg.s_max {
            Expansion::Inserted(s.insert_with_best_parent(x_new, nrst, &near))
        } else {
            Expansion::Rejected
        }
    }

    pub fn rewire_root(&mut self, meter: &mut Meter) {
        self.search.rewire_root(meter);
    }

    /// The variant's goal rewiring; a no-op without a goal path.
    pub fn rewire_goal(&mut self, meter: &mut Meter) {
        if self.search.goal_path_exists() {
            self.strategies.goal.rewire(&mut self.search, meter);
        }
    }

    /// Tree path to the goal, or towards the node nearest it. Updates
    /// whether a goal path exists.
    pub fn plan_path(&mut self) -> Vec<NodeId> {
        let s = &mut self.search;
        let target = match s.goal {
            None => s.tree.root(),
            Some(g) => {
                if s.connect_goal() {
                    s.goal_node.expect("connected")
                } else {
                    let n = self.strategies.nearest.nearest(s, &g);
                    if s.tree.cost(n).is_finite() {
                        n
                    } else {
                        s.tree.root()
                    }
                }
            }
        };
        self.path = s.tree.path(target).expect("known node");
        self.path.clone()
    }

    /// Node ids of the current path, root first.
    pub fn path_nodes(&self) -> &[NodeId] {
        &self.path
    }

    pub fn path_states(&self) -> Vec<State> {
        self.path.iter().filter(|n| n.index() < self.tree().len()).map(|&n| self.tree().position(n)).collect()
    }

    /// One outer iteration: world update, expansion and rewiring within
    /// the budget, path planning, root shift and agent motion.
    pub fn step(&mut self) -> StepReport {
        let mut elapsed = PhaseTimes::default();
        let expansions_before = self.search.counters.expansions;

        if self.search.env.version() != self.seen_version {
            let rects: Vec<Rect> = self.search.env.changes_since(self.seen_version).copied().collect();
            self.seen_version = self.search.env.version();
            let path = std::mem::take(&mut self.path);
            self.search.refresh_edges(&rects, &path);
            self.path = path;
        } else {
            let path = std::mem::take(&mut self.path);
            self.search.refresh_edges(&[], &path);
            self.path = path;
        }

        let mut exp = self.search.cfg.meter(Phase::Expand);
        while exp.tick() {
            let t0 = Instant::now();
            self.expand();
            let t1 = Instant::now();
            let mut root = self.search.cfg.meter(Phase::Root);
            self.rewire_root(&mut root);
            let t2 = Instant::now();
            if self.search.goal_path_exists() {
                let mut goal = self.search.cfg.meter(Phase::Goal);
                self.rewire_goal(&mut goal);
            }
            let t3 = Instant::now();
            elapsed.expand += (t1 - t0).as_secs_f64();
            elapsed.root += (t2 - t1).as_secs_f64();
            elapsed.goal += (t3 - t2).as_secs_f64();
        }

        let t0 = Instant::now();
        let path = self.plan_path();
        let root = self.search.tree.root();
        if path.len() >= 2 && self.agent.dist(&self.search.tree.position(root)) < self.search.cfg.s_max {
            let next = path[1];
            self.search.tree.set_root(next).expect("known node");
            let p = self.search.tree.position(next);
            if self.route.len() == 1 && p == self.behind {
                // turning back along the edge the agent is on
                self.route.clear();
            }
            self.route.push_back(p);
            self.path.remove(0);
        }
        self.move_agent();
        elapsed.plan = (Instant::now() - t0).as_secs_f64();
        self.iter += 1;

        StepReport {
            iter: self.iter,
            tree_size: self.search.tree.len(),
            goal_cost: self.goal_cost(),
            goal_path_exists: self.goal_path_exists(),
            expansions: self.search.counters.expansions - expansions_before,
            travelled: self.travelled,
            arrived: self.arrived(),
            elapsed,
        }
    }

    fn move_agent(&mut self) {
        let mut budget = self.search.cfg.agent_speed * self.search.cfg.dt;
        while budget > 0.0 {
            let Some(&next) = self.route.front() else { break };
            if !self.search.env.obs_free(&self.agent, &next) {
                self.recover();
                break;
            }
            let d = self.agent.dist(&next);
            if d <= budget {
                self.travelled += d;
                budget -= d;
                self.agent = next;
                self.behind = next;
                self.route.pop_front();
            } else {
                let p = self.agent.step_toward(&next, budget);
                self.travelled += self.agent.dist(&p);
                self.agent = p;
                budget = 0.0;
            }
        }
    }

    /// The route ahead is blocked: re-root at the closest visible node.
    fn recover(&mut self) {
        let s = &mut self.search;
        let mut best: Option<(f64, NodeId)> = None;
        for n in s.index.nearby(&self.agent, s.cfg.s_max) {
            let p = s.tree.position(n);
            let d = p.dist(&self.agent);
            if best.is_none_or(|b| d < b.0) && s.tree.cost(n).is_finite() && s.env.obs_free(&self.agent, &p) {
                best = Some((d, n));
            }
        }
        if let Some((_, n)) = best {
            s.tree.set_root(n).expect("known node");
            self.route.clear();
            self.route.push_back(s.tree.position(n));
            self.path = vec![n];
        }
    }

    pub fn snapshot(&self) -> PlannerSnapshot {
        PlannerSnapshot {
            agent: self.agent,
            goal: self.search.goal,
            path: self.path_states(),
            tree: self.search.tree.snapshot(),
            stats: Stats {
                size: self.search.tree.len(),
                goal_cost: self.goal_cost(),
                goal_found: self.goal_path_exists(),
                iter: self.iter,
            },
        }
    }
}
