//! Nearest and radius queries over tree nodes, in both d_E and d_A.
//!
//! Node ids are insertion sequence numbers, shared with [`crate::tree`].
//! Every tie is broken toward the lowest id.

use std::collections::HashSet;
use std::sync::Arc;

use thiserror::Error;

use crate::env::{Rect, State, DIM};
use crate::metrics::{AssistingMetric, MetricKind};
use crate::tree::NodeId;

#[derive(Debug, Error, PartialEq)]
pub enum SpatialError {
    #[error("index is empty")]
    Empty,
    #[error("state {0:?} is already indexed")]
    Duplicate(State),
}

/// Uniform bucket grid over the world rectangle.
#[derive(Clone, Debug)]
struct BucketGrid {
    width: f64,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<NodeId>>,
}

impl BucketGrid {
    fn new(world_w: f64, world_h: f64, width: f64) -> Self {
        let cols = ((world_w / width).ceil() as usize).max(1);
        let rows = ((world_h / width).ceil() as usize).max(1);
        BucketGrid { width, cols, rows, buckets: vec![Vec::new(); cols * rows] }
    }

    fn bucket_of(&self, p: &State) -> (isize, isize) {
        let c = (p.x() / self.width).floor();
        let r = (p.y() / self.width).floor();
        let clamp = |v: f64, n: usize| if v.is_nan() { 0 } else { (v.max(0.0) as isize).min(n as isize - 1) };
        (clamp(c, self.cols), clamp(r, self.rows))
    }

    fn insert(&mut self, p: &State, id: NodeId) {
        let (c, r) = self.bucket_of(p);
        self.buckets[r as usize * self.cols + c as usize].push(id);
    }

    fn bucket(&self, c: isize, r: isize) -> &[NodeId] {
        if c < 0 || r < 0 || c >= self.cols as isize || r >= self.rows as isize {
            return &[];
        }
        &self.buckets[r as usize * self.cols + c as usize]
    }

    /// Clamped bucket range covering `[lo, hi]` on both axes.
    fn range(&self, lo: &State, hi: &State) -> ((isize, isize), (isize, isize)) {
        (self.bucket_of(lo), self.bucket_of(hi))
    }
}

/// Vantage-point tree over embedded coordinates.
#[derive(Clone, Debug, Default)]
struct VpTree {
    nodes: Vec<VpNode>,
    root: Option<usize>,
    len: usize,
}

#[derive(Clone, Debug)]
struct VpNode {
    item: NodeId,
    mu: f64,
    inside: Option<usize>,
    outside: Option<usize>,
}

/// Flat row-major coordinate table indexed by node id.
#[derive(Clone, Copy)]
struct Coords<'a> {
    data: &'a [f64],
    dim: usize,
}

impl<'a> Coords<'a> {
    #[inline]
    fn get(self, n: NodeId) -> &'a [f64] {
        &self.data[n.index() * self.dim..(n.index() + 1) * self.dim]
    }
}

fn coord_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl VpTree {
    fn build(mut items: Vec<NodeId>, coords: Coords<'_>) -> Self {
        items.sort();
        let len = items.len();
        let mut tree = VpTree { nodes: Vec::with_capacity(len), root: None, len };
        // Explicit stack: nodes sharing coordinates all land inside, so the
        // depth can reach the item count. Pops run in pre-order, inside first.
        let mut work: Vec<(Vec<NodeId>, Option<(usize, bool)>)> = vec![(items, None)];
        while let Some((items, link)) = work.pop() {
            if items.is_empty() {
                continue;
            }
            // vantage: the lowest id, kept at the front after sorting
            let vp = items[0];
            let at = tree.nodes.len();
            tree.nodes.push(VpNode { item: vp, mu: 0.0, inside: None, outside: None });
            match link {
                None => tree.root = Some(at),
                Some((parent, true)) => tree.nodes[parent].inside = Some(at),
                Some((parent, false)) => tree.nodes[parent].outside = Some(at),
            }
            let rest = &items[1..];
            if rest.is_empty() {
                continue;
            }
            let vc = coords.get(vp);
            let mut keyed: Vec<(f64, NodeId)> = rest.iter().map(|&i| (coord_dist(vc, coords.get(i)), i)).collect();
            keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mid = (keyed.len() - 1) / 2;
            let mu = keyed[mid].0;
            let split = keyed.partition_point(|(d, _)| *d <= mu);
            let mut inner: Vec<NodeId> = keyed[..split].iter().map(|&(_, i)| i).collect();
            let mut outer: Vec<NodeId> = keyed[split..].iter().map(|&(_, i)| i).collect();
            inner.sort();
            outer.sort();
            tree.nodes[at].mu = mu;
            work.push((outer, Some((at, false))));
            work.push((inner, Some((at, true))));
        }
        tree
    }

    fn nearest(&self, q: &[f64], coords: Coords<'_>, best: &mut Option<(f64, NodeId)>) {
        // (subtree, lower bound on any distance inside it)
        let mut stack: Vec<(usize, f64)> = Vec::new();
        if let Some(r) = self.root {
            stack.push((r, 0.0));
        }
        while let Some((n, bound)) = stack.pop() {
            let bd = best.map_or(f64::INFINITY, |b| b.0);
            if bound > bd + 1e-12 * (1.0 + bd) {
                continue;
            }
            let node = &self.nodes[n];
            let d = coord_dist(q, coords.get(node.item));
            if best.is_none_or(|b| (d, node.item) < b) {
                *best = Some((d, node.item));
            }
            let (near, far, far_bound) = if d <= node.mu {
                (node.inside, node.outside, node.mu - d)
            } else {
                (node.outside, node.inside, d - node.mu)
            };
            // LIFO: the far side is examined after the near side
            if let Some(f) = far {
                stack.push((f, far_bound));
            }
            if let Some(nr) = near {
                stack.push((nr, 0.0));
            }
        }
    }
}

/// Per-component VP trees plus insertion buffers.
#[derive(Clone, Debug, Default)]
struct ComponentIndex {
    tree: VpTree,
    buffer: Vec<NodeId>,
}

#[derive(Clone, Debug)]
enum Assisting {
    /// d_A is d_E: serve from the bucket grid.
    Alias,
    Embedded { dim: usize, coords: Vec<f64>, comps: Vec<u32>, parts: Vec<ComponentIndex> },
    /// Lattice metric without an embedding: brute force over cached anchors.
    Field { anchors: Vec<u32> },
    /// Anything else: brute force over `distance`.
    Scan,
}

/// A query target prepared once so that many d_A(node, target) lookups are
/// cheap.
#[derive(Clone, Debug)]
pub struct Probe<'a> {
    target: State,
    kind: ProbeKind<'a>,
}

#[derive(Clone, Debug)]
enum ProbeKind<'a> {
    Euclidean,
    Embedded { component: u32, coords: &'a [f64] },
    Field(Arc<[f64]>),
    Scan,
}

impl Probe<'_> {
    pub fn target(&self) -> State {
        self.target
    }
}

/// Nearest/radius index in d_E and d_A, kept in step with the tree.
#[derive(Clone)]
pub struct DualIndex {
    metric: Arc<dyn AssistingMetric>,
    positions: Vec<State>,
    keys: HashSet<[u64; DIM]>,
    grid: BucketGrid,
    assisting: Assisting,
}

impl std::fmt::Debug for DualIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DualIndex").field("len", &self.positions.len()).field("metric", &self.metric.kind()).finish()
    }
}

impl DualIndex {
    /// `bucket_width` should be the planner's `s_max`.
    pub fn new(world_width: f64, world_height: f64, bucket_width: f64, metric: Arc<dyn AssistingMetric>) -> Self {
        let assisting = match metric.kind() {
            MetricKind::Euclidean => Assisting::Alias,
            _ if metric.embedding_dim() > 0 => Assisting::Embedded {
                dim: metric.embedding_dim(),
                coords: Vec::new(),
                comps: Vec::new(),
                parts: Vec::new(),
            },
            _ if metric.field_to(&State::new(0.0, 0.0)).is_some() => Assisting::Field { anchors: Vec::new() },
            _ => Assisting::Scan,
        };
        DualIndex {
            metric,
            positions: Vec::new(),
            keys: HashSet::new(),
            grid: BucketGrid::new(world_width, world_height, bucket_width),
            assisting,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn metric(&self) -> &Arc<dyn AssistingMetric> {
        &self.metric
    }

    pub fn position(&self, id: NodeId) -> State {
        self.positions[id.index()]
    }

    /// Adds `x` under the next sequence number.
    pub fn insert(&mut self, x: State) -> Result<NodeId, SpatialError> {
        if !self.keys.insert(x.key()) {
            return Err(SpatialError::Duplicate(x));
        }
        let id = NodeId(self.positions.len() as u32);
        self.positions.push(x);
        self.grid.insert(&x, id);
        if let Assisting::Field { anchors } = &mut self.assisting {
            anchors.push(self.metric.anchor(&x).expect("lattice metric"));
        }
        if let Assisting::Embedded { dim, coords, comps, parts } = &mut self.assisting {
            let e = self.metric.embed(&x).expect("embedding metric");
            debug_assert_eq!(e.coords.len(), *dim);
            coords.extend_from_slice(e.coords);
            comps.push(e.component);
            let c = e.component as usize;
            if parts.len() <= c {
                parts.resize_with(c + 1, ComponentIndex::default);
            }
            let part = &mut parts[c];
            part.buffer.push(id);
            if part.buffer.len() > part.tree.len.max(64) {
                let mut items = std::mem::take(&mut part.buffer);
                collect_items(&part.tree, &mut items);
                part.tree = VpTree::build(items, Coords { data: coords, dim: *dim });
            }
        }
        Ok(id)
    }

    pub fn nearest_euclidean(&self, x: &State) -> Result<NodeId, SpatialError> {
        if self.is_empty() {
            return Err(SpatialError::Empty);
        }
        let (bc, br) = self.grid.bucket_of(x);
        let (cols, rows) = (self.grid.cols as isize, self.grid.rows as isize);
        let max_ring = (bc.max(cols - 1 - bc)).max(br.max(rows - 1 - br));
        let mut best: Option<(f64, NodeId)> = None;
        let scan = |c: isize, r: isize, best: &mut Option<(f64, NodeId)>| {
            for &id in self.grid.bucket(c, r) {
                let d = self.positions[id.index()].dist(x);
                if best.is_none_or(|b| (d, id) < b) {
                    *best = Some((d, id));
                }
            }
        };
        for ring in 0..=max_ring {
            let (c0, c1) = ((bc - ring).max(0), (bc + ring).min(cols - 1));
            for r in [br - ring, br + ring] {
                if (0..rows).contains(&r) {
                    for c in c0..=c1 {
                        scan(c, r, &mut best);
                    }
                }
                if ring == 0 {
                    break;
                }
            }
            for r in (br - ring + 1).max(0)..=(br + ring - 1).min(rows - 1) {
                for c in [bc - ring, bc + ring] {
                    if ring > 0 && (0..cols).contains(&c) {
                        scan(c, r, &mut best);
                    }
                }
            }
            // anything outside this ring is at least `ring · width` away
            if let Some((d, _)) = best {
                if d < ring as f64 * self.grid.width {
                    break;
                }
            }
        }
        Ok(best.expect("non-empty").1)
    }

    pub fn nearest_assisting(&self, x: &State) -> Result<NodeId, SpatialError> {
        if self.is_empty() {
            return Err(SpatialError::Empty);
        }
        let probe = self.probe(x);
        match (&self.assisting, &probe.kind) {
            (Assisting::Alias, _) => self.nearest_euclidean(x),
            (Assisting::Embedded { dim, coords, parts, .. }, ProbeKind::Embedded { component, coords: q }) => {
                let Some(part) = parts.get(*component as usize) else {
                    // nothing reachable: every distance is infinite
                    return Ok(NodeId(0));
                };
                let table = Coords { data: coords, dim: *dim };
                let mut best: Option<(f64, NodeId)> = None;
                part.tree.nearest(q, table, &mut best);
                for &id in &part.buffer {
                    let d = coord_dist(q, table.get(id));
                    if best.is_none_or(|b| (d, id) < b) {
                        best = Some((d, id));
                    }
                }
                Ok(best.map_or(NodeId(0), |b| b.1))
            }
            _ => {
                let mut best = (f64::INFINITY, NodeId(0));
                for i in 0..self.positions.len() {
                    let id = NodeId(i as u32);
                    let d = self.probe_distance(&probe, id);
                    if d < best.0 {
                        best = (d, id);
                    }
                }
                Ok(best.1)
            }
        }
    }

    /// Prepares `x` as the fixed end of repeated d_A lookups.
    pub fn probe(&self, x: &State) -> Probe<'_> {
        let kind = match &self.assisting {
            Assisting::Alias => ProbeKind::Euclidean,
            Assisting::Embedded { .. } => {
                let e = self.metric.embed(x).expect("embedding metric");
                ProbeKind::Embedded { component: e.component, coords: e.coords }
            }
            Assisting::Field { .. } => ProbeKind::Field(self.metric.field_to(x).expect("lattice metric")),
            Assisting::Scan => ProbeKind::Scan,
        };
        Probe { target: *x, kind }
    }

    /// d_A(node, probe target), equal to `metric().distance(position, target)`.
    pub fn probe_distance(&self, probe: &Probe<'_>, id: NodeId) -> f64 {
        match (&self.assisting, &probe.kind) {
            (Assisting::Embedded { dim, coords, comps, .. }, ProbeKind::Embedded { component, coords: q }) => {
                if comps[id.index()] != *component {
                    return f64::INFINITY;
                }
                coord_dist(q, Coords { data: coords, dim: *dim }.get(id))
            }
            (Assisting::Field { anchors }, ProbeKind::Field(field)) => field[anchors[id.index()] as usize],
            (Assisting::Alias, _) => self.positions[id.index()].dist(&probe.target),
            _ => self.metric.distance(&self.positions[id.index()], &probe.target),
        }
    }

    /// d_A(x, probe target) for an arbitrary state.
    pub fn probe_distance_to(&self, probe: &Probe<'_>, x: &State) -> f64 {
        match &probe.kind {
            ProbeKind::Euclidean => x.dist(&probe.target),
            ProbeKind::Embedded { component, coords: q } => {
                let e = self.metric.embed(x).expect("embedding metric");
                if e.component != *component {
                    return f64::INFINITY;
                }
                coord_dist(q, e.coords)
            }
            ProbeKind::Field(field) => field[self.metric.anchor(x).expect("lattice metric") as usize],
            ProbeKind::Scan => self.metric.distance(x, &probe.target),
        }
    }

    /// All nodes with `d_E(n, x) ≤ r`, in id order.
    pub fn nearby(&self, x: &State, r: f64) -> Vec<NodeId> {
        let mut out = Vec::new();
        if !(r >= 0.0) {
            return out;
        }
        let lo = State::new(x.x() - r, x.y() - r);
        let hi = State::new(x.x() + r, x.y() + r);
        let ((c0, r0), (c1, r1)) = self.grid.range(&lo, &hi);
        for row in r0..=r1 {
            for col in c0..=c1 {
                for &id in self.grid.bucket(col, row) {
                    if self.positions[id.index()].dist(x) <= r {
                        out.push(id);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// All nodes inside the closed rectangle, in id order.
    pub fn in_rect(&self, rect: &Rect) -> Vec<NodeId> {
        let mut out = Vec::new();
        let ((c0, r0), (c1, r1)) = self.grid.range(&rect.min, &rect.max);
        for row in r0..=r1 {
            for col in c0..=c1 {
                for &id in self.grid.bucket(col, row) {
                    if rect.contains(&self.positions[id.index()]) {
                        out.push(id);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}

fn collect_items(tree: &VpTree, out: &mut Vec<NodeId>) {
    out.extend(tree.nodes.iter().map(|n| n.item));
}
