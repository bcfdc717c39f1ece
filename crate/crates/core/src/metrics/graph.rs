use std::collections::VecDeque;

use crate::env::{Environment, State};

use super::MetricError;

/// Undirected weighted graph in CSR form. Weights are edge lengths.
#[derive(Clone, Debug, Default)]
pub struct WeightedGraph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    lengths: Vec<f64>,
}

impl WeightedGraph {
    /// Builds from an undirected edge list; each edge appears once.
    pub fn from_edges(n: usize, edges: &[(u32, u32, f64)]) -> Self {
        let mut deg = vec![0usize; n];
        for &(a, b, _) in edges {
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + deg[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; offsets[n]];
        let mut lengths = vec![0.0; offsets[n]];
        for &(a, b, w) in edges {
            for (s, t) in [(a, b), (b, a)] {
                let slot = fill[s as usize];
                targets[slot] = t;
                lengths[slot] = w;
                fill[s as usize] += 1;
            }
        }
        WeightedGraph { offsets, targets, lengths }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn degree(&self, v: u32) -> usize {
        self.offsets[v as usize + 1] - self.offsets[v as usize]
    }

    /// `(neighbour, edge length)` pairs.
    pub fn neighbors(&self, v: u32) -> impl Iterator<Item = (u32, f64)> + '_ {
        let r = self.offsets[v as usize]..self.offsets[v as usize + 1];
        self.targets[r.clone()].iter().copied().zip(self.lengths[r].iter().copied())
    }

    /// Connected-component label per node, labels dense from 0 in order of
    /// lowest node index.
    pub fn components(&self) -> (Vec<u32>, usize) {
        let n = self.node_count();
        let mut label = vec![u32::MAX; n];
        let mut count = 0u32;
        let mut queue = VecDeque::new();
        for s in 0..n {
            if label[s] != u32::MAX {
                continue;
            }
            label[s] = count;
            queue.push_back(s as u32);
            while let Some(v) = queue.pop_front() {
                for (w, _) in self.neighbors(v) {
                    if label[w as usize] == u32::MAX {
                        label[w as usize] = count;
                        queue.push_back(w);
                    }
                }
            }
            count += 1;
        }
        (label, count as usize)
    }
}

const NO_NODE: u32 = u32::MAX;

/// Free lattice points at spacing `spacing`, connected to their 8-neighbours
/// by obstacle-free segments. Lattice point `(i, j)` sits at the centre of
/// the `spacing`-sized block in column `i`, row `j` (row 0 at the top).
#[derive(Clone, Debug)]
pub struct GridGraph {
    spacing: f64,
    cols: usize,
    rows: usize,
    height: f64,
    node_at: Vec<u32>,
    lattice_of: Vec<u32>,
    positions: Vec<State>,
    graph: WeightedGraph,
    component: Vec<u32>,
    component_count: usize,
    statics: Environment,
}

impl GridGraph {
    pub fn build(env: &Environment, spacing: f64) -> Result<Self, MetricError> {
        if !(spacing >= env.cell_size() * (1.0 - 1e-12)) {
            return Err(MetricError::InvalidParameter(format!(
                "grid spacing {spacing} is finer than the map cell size {}",
                env.cell_size()
            )));
        }
        let statics = env.static_only();
        let cols = (env.width() / spacing).ceil() as usize;
        let rows = (env.height() / spacing).ceil() as usize;
        let height = env.height();
        let point = |i: usize, j: usize| State::new((i as f64 + 0.5) * spacing, height - (j as f64 + 0.5) * spacing);

        let mut node_at = vec![NO_NODE; cols * rows];
        let mut positions = Vec::new();
        let mut lattice_of = Vec::new();
        for j in 0..rows {
            for i in 0..cols {
                let p = point(i, j);
                if statics.in_free(&p) {
                    node_at[j * cols + i] = positions.len() as u32;
                    positions.push(p);
                    lattice_of.push((j * cols + i) as u32);
                }
            }
        }
        if positions.is_empty() {
            return Err(MetricError::EmptyGraph);
        }
        let mut edges = Vec::new();
        // forward half of the 8-neighbourhood; each undirected edge once
        const FORWARD: [(isize, isize); 4] = [(1, 0), (-1, 1), (0, 1), (1, 1)];
        for j in 0..rows {
            for i in 0..cols {
                let a = node_at[j * cols + i];
                if a == NO_NODE {
                    continue;
                }
                for (di, dj) in FORWARD {
                    let (ni, nj) = (i as isize + di, j as isize + dj);
                    if ni < 0 || nj < 0 || ni >= cols as isize || nj >= rows as isize {
                        continue;
                    }
                    let b = node_at[nj as usize * cols + ni as usize];
                    if b == NO_NODE {
                        continue;
                    }
                    let (pa, pb) = (positions[a as usize], positions[b as usize]);
                    if statics.obs_free(&pa, &pb) {
                        edges.push((a, b, pa.dist(&pb)));
                    }
                }
            }
        }
        let graph = WeightedGraph::from_edges(positions.len(), &edges);
        let (component, component_count) = graph.components();
        Ok(GridGraph {
            spacing,
            cols,
            rows,
            height,
            node_at,
            lattice_of,
            positions,
            graph,
            component,
            component_count,
            statics,
        })
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn lattice_dims(&self) -> (usize, usize) {
        (self.cols, self.rows)
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn position(&self, node: u32) -> State {
        self.positions[node as usize]
    }

    pub fn positions(&self) -> &[State] {
        &self.positions
    }

    /// Flat lattice index (`row * cols + col`) of each node.
    pub fn lattice_indices(&self) -> &[u32] {
        &self.lattice_of
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn component(&self, node: u32) -> u32 {
        self.component[node as usize]
    }

    pub fn components(&self) -> &[u32] {
        &self.component
    }

    pub fn component_count(&self) -> usize {
        self.component_count
    }

    /// The static map the lattice was built on.
    pub fn environment(&self) -> &Environment {
        &self.statics
    }

    fn block_of(&self, x: &State) -> (isize, isize) {
        let i = (x.x() / self.spacing).floor();
        let j = ((self.height - x.y()) / self.spacing).floor();
        let clamp = |v: f64, hi: usize| -> isize {
            if v.is_nan() {
                0
            } else {
                (v.max(0.0) as isize).min(hi as isize - 1)
            }
        };
        (clamp(i, self.cols), clamp(j, self.rows))
    }

    fn node_in_block(&self, i: isize, j: isize) -> Option<u32> {
        if i < 0 || j < 0 || i >= self.cols as isize || j >= self.rows as isize {
            return None;
        }
        match self.node_at[j as usize * self.cols + i as usize] {
            NO_NODE => None,
            n => Some(n),
        }
    }

    /// Nearest free lattice node, preferring nodes with line of sight to
    /// `x`.
    pub fn snap(&self, x: &State) -> u32 {
        let (bi, bj) = self.block_of(x);
        if let Some(n) = self.node_in_block(bi, bj) {
            if self.statics.static_segment_free(x, &self.positions[n as usize]) {
                return n;
            }
        }
        let mut best_los: Option<(f64, u32)> = None;
        let mut best_any: Option<(f64, u32)> = None;
        let max_ring = self.cols.max(self.rows) as isize;
        let mut ring = 0isize;
        loop {
            for j in (bj - ring)..=(bj + ring) {
                for i in (bi - ring)..=(bi + ring) {
                    if (i - bi).abs() != ring && (j - bj).abs() != ring {
                        continue;
                    }
                    let Some(n) = self.node_in_block(i, j) else { continue };
                    let d = x.dist(&self.positions[n as usize]);
                    if best_any.is_none_or(|(bd, bn)| (d, n) < (bd, bn)) {
                        best_any = Some((d, n));
                    }
                    if ring <= 2
                        && best_los.is_none_or(|(bd, bn)| (d, n) < (bd, bn))
                        && self.statics.static_segment_free(x, &self.positions[n as usize])
                    {
                        best_los = Some((d, n));
                    }
                }
            }
            if ring >= 2 {
                if let Some((_, n)) = best_los.or(best_any) {
                    return n;
                }
            }
            ring += 1;
            if ring > max_ring {
                // the graph is non-empty, so ring search always terminates above
                return best_any.map(|(_, n)| n).unwrap_or(0);
            }
        }
    }
}
