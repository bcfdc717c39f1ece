//! Lattice shortest paths: lazily computed single-source Dijkstra fields
//! behind an LRU cache.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex};

use lru::LruCache;

use super::graph::GridGraph;
use super::{AssistingMetric, MetricError, MetricKind};
use crate::env::{Environment, State};

pub const DEFAULT_CACHE_FIELDS: usize = 64;

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    node: u32,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then node id
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Distances from `source` to every node, with predecessors.
fn dijkstra(grid: &GridGraph, source: u32, stop_at: Option<u32>) -> (Vec<f64>, Vec<u32>) {
    let n = grid.node_count();
    let g = grid.graph();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![u32::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[source as usize] = 0.0;
    heap.push(Entry { dist: 0.0, node: source });
    while let Some(Entry { dist: d, node }) = heap.pop() {
        if d > dist[node as usize] {
            continue;
        }
        if Some(node) == stop_at {
            break;
        }
        for (w, len) in g.neighbors(node) {
            let nd = d + len;
            if nd < dist[w as usize] {
                dist[w as usize] = nd;
                pred[w as usize] = node;
                heap.push(Entry { dist: nd, node: w });
            }
        }
    }
    (dist, pred)
}

/// Shortest-path lengths on the lattice between snapped states.
#[derive(Debug)]
pub struct GeodesicOracle {
    grid: Arc<GridGraph>,
    cache: Mutex<LruCache<u32, Arc<[f64]>>>,
}

impl GeodesicOracle {
    pub fn new(grid: Arc<GridGraph>, cache_fields: usize) -> Self {
        let cap = NonZeroUsize::new(cache_fields.max(1)).expect("non-zero");
        GeodesicOracle { grid, cache: Mutex::new(LruCache::new(cap)) }
    }

    pub fn build(env: &Environment, r_grid: f64) -> Result<Self, MetricError> {
        Ok(Self::new(Arc::new(GridGraph::build(env, r_grid)?), DEFAULT_CACHE_FIELDS))
    }

    pub fn grid(&self) -> &GridGraph {
        &self.grid
    }

    /// Distance field rooted at lattice node `source`.
    pub fn field(&self, source: u32) -> Arc<[f64]> {
        if let Some(f) = self.cache.lock().expect("cache lock").get(&source) {
            return f.clone();
        }
        // computed outside the lock; a concurrent duplicate is harmless
        let field: Arc<[f64]> = dijkstra(&self.grid, source, None).0.into();
        self.cache.lock().expect("cache lock").put(source, field.clone());
        field
    }

    pub fn node_distance(&self, a: u32, b: u32) -> f64 {
        if a == b {
            return 0.0;
        }
        self.field(b)[a as usize]
    }

    /// Lattice path between the nodes nearest `a` and `b`, as node
    /// positions, or `None` when disconnected.
    pub fn lattice_path(&self, a: &State, b: &State) -> Option<Vec<State>> {
        let (na, nb) = (self.grid.snap(a), self.grid.snap(b));
        let (dist, pred) = dijkstra(&self.grid, na, Some(nb));
        if !dist[nb as usize].is_finite() {
            return None;
        }
        let mut nodes = vec![nb];
        while let Some(&last) = nodes.last() {
            if last == na {
                break;
            }
            nodes.push(pred[last as usize]);
        }
        nodes.reverse();
        Some(nodes.into_iter().map(|n| self.grid.position(n)).collect())
    }

    /// Length of the route `a → lattice path → b`. With `taut`, the route
    /// is shortcut greedily between its vertices wherever the static map
    /// allows.
    pub fn path_length(&self, a: &State, b: &State, taut: bool) -> f64 {
        let env = self.grid.environment();
        if a == b {
            return 0.0;
        }
        if taut && env.static_segment_free(a, b) {
            return a.dist(b);
        }
        let Some(lattice) = self.lattice_path(a, b) else {
            return f64::INFINITY;
        };
        let mut route = Vec::with_capacity(lattice.len() + 2);
        route.push(*a);
        route.extend(lattice);
        route.push(*b);
        if taut {
            route = shortcut(env, &route);
        }
        route.windows(2).map(|w| w[0].dist(&w[1])).sum()
    }
}

/// Greedy string pulling: from each kept point jump to the farthest later
/// point still in line of sight.
fn shortcut(env: &Environment, route: &[State]) -> Vec<State> {
    let mut out = vec![route[0]];
    let mut i = 0;
    while i + 1 < route.len() {
        let mut j = route.len() - 1;
        while j > i + 1 && !env.static_segment_free(&route[i], &route[j]) {
            j -= 1;
        }
        out.push(route[j]);
        i = j;
    }
    out
}

impl AssistingMetric for GeodesicOracle {
    fn kind(&self) -> MetricKind {
        MetricKind::Geodesic
    }

    fn distance(&self, a: &State, b: &State) -> f64 {
        self.node_distance(self.grid.snap(a), self.grid.snap(b))
    }

    fn anchor(&self, x: &State) -> Option<u32> {
        Some(self.grid.snap(x))
    }

    fn field_to(&self, x: &State) -> Option<Arc<[f64]>> {
        Some(self.field(self.grid.snap(x)))
    }
}
