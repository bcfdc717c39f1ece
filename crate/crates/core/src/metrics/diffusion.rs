//! Diffusion-map embedding of a weighted graph and the diffusion distance
//! d_D built on top of it.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::graph::{GridGraph, WeightedGraph};
use super::lanczos::{top_eigenpairs, LanczosParams};
use super::{AssistingMetric, Embedding, MetricError, MetricKind};
use crate::env::{Environment, State};

/// Components up to this size are solved densely.
const DENSE_LIMIT: usize = 400;

const SIDECAR_MAGIC: &[u8; 8] = b"AMRRTDM\0";
const SIDECAR_VERSION: u32 = 1;

/// How the diffusion time is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffusionTime {
    /// A fixed number of random-walk steps.
    Steps(f64),
    /// `τ / (1 − λ₂)` with λ₂ the leading non-trivial eigenvalue of the
    /// largest component, so the slowest mode decays by `e^{-τ}` roughly
    /// independently of map size.
    GapScaled(f64),
}

impl Default for DiffusionTime {
    fn default() -> Self {
        DiffusionTime::GapScaled(0.1)
    }
}

impl DiffusionTime {
    fn tag(self) -> (u32, f64) {
        match self {
            DiffusionTime::Steps(t) => (0, t),
            DiffusionTime::GapScaled(t) => (1, t),
        }
    }

    fn from_tag(tag: u32, v: f64) -> Option<Self> {
        match tag {
            0 => Some(DiffusionTime::Steps(v)),
            1 => Some(DiffusionTime::GapScaled(v)),
            _ => None,
        }
    }

    fn value(self) -> f64 {
        self.tag().1
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiffusionParams {
    /// Embedding dimension.
    pub k: usize,
    pub time: DiffusionTime,
    /// Gaussian kernel width applied to edge lengths.
    pub sigma: f64,
    pub eigensolver: LanczosParams,
}

impl DiffusionParams {
    pub fn new(k: usize, time: DiffusionTime, sigma: f64) -> Self {
        DiffusionParams { k, time, sigma, eigensolver: LanczosParams::default() }
    }
}

/// Per-node diffusion coordinates. Nodes in different components are
/// embedded independently.
#[derive(Clone, Debug)]
pub struct DiffusionMap {
    k: usize,
    time: DiffusionTime,
    /// Resolved diffusion time.
    t_diff: f64,
    sigma: f64,
    coords: Vec<f64>,
    component: Vec<u32>,
    /// Retained spectrum per component, non-increasing.
    eigenvalues: Vec<Vec<f64>>,
    /// The dropped leading eigenvalue per component.
    trivial: Vec<f64>,
}

impl DiffusionMap {
    pub fn build(graph: &WeightedGraph, params: &DiffusionParams) -> Result<Self, MetricError> {
        let tv = params.time.value();
        if params.k == 0 || !(params.sigma > 0.0) || !tv.is_finite() || tv < 0.0 {
            return Err(MetricError::InvalidParameter(format!("bad diffusion parameters {params:?}")));
        }
        let n = graph.node_count();
        if n == 0 {
            return Err(MetricError::EmptyGraph);
        }
        let k = params.k;
        let (component, count) = graph.components();
        let mut members: Vec<Vec<u32>> = vec![Vec::new(); count];
        for (v, &c) in component.iter().enumerate() {
            members[c as usize].push(v as u32);
        }
        let mut local = vec![0usize; n];
        let mut coords = vec![0.0; n * k];
        let mut eigenvalues = Vec::with_capacity(count);
        let mut trivial = Vec::with_capacity(count);
        // unscaled random-walk eigenvectors per component
        let mut modes: Vec<Vec<Vec<f64>>> = Vec::with_capacity(count);
        let two_s2 = 2.0 * params.sigma * params.sigma;

        for nodes in &members {
            let m = nodes.len();
            if m == 1 {
                eigenvalues.push(Vec::new());
                trivial.push(1.0);
                modes.push(Vec::new());
                continue;
            }
            for (i, &v) in nodes.iter().enumerate() {
                local[v as usize] = i;
            }
            // local CSR with kernel weights
            let mut adj: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
            for &v in nodes {
                adj.push(graph.neighbors(v).map(|(w, len)| (local[w as usize], (-len * len / two_s2).exp())).collect());
            }
            let degree: Vec<f64> = adj.iter().map(|row| row.iter().map(|(_, w)| w).sum()).collect();
            let inv_sqrt: Vec<f64> = degree.iter().map(|d| 1.0 / d.sqrt()).collect();
            let volume: f64 = degree.iter().sum();
            let want = (k + 1).min(m);

            let (vals, vecs) = if m <= DENSE_LIMIT {
                let mut s = DMatrix::zeros(m, m);
                for (i, row) in adj.iter().enumerate() {
                    for &(j, w) in row {
                        s[(i, j)] = w * inv_sqrt[i] * inv_sqrt[j];
                    }
                }
                let eig = SymmetricEigen::new(s);
                let mut order: Vec<usize> = (0..m).collect();
                order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
                let vals: Vec<f64> = order[..want].iter().map(|&i| eig.eigenvalues[i]).collect();
                let vecs: Vec<Vec<f64>> = order[..want].iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect();
                (vals, vecs)
            } else {
                let op = |x: &[f64], y: &mut [f64]| {
                    for (i, row) in adj.iter().enumerate() {
                        let mut acc = 0.0;
                        for &(j, w) in row {
                            acc += w * inv_sqrt[j] * x[j];
                        }
                        y[i] = acc * inv_sqrt[i];
                    }
                };
                top_eigenpairs(m, want, op, params.eigensolver)?
            };

            trivial.push(vals[0]);
            let mut kept = Vec::with_capacity(want - 1);
            let mut psis = Vec::with_capacity(want - 1);
            for (lambda, u) in vals.iter().zip(&vecs).skip(1) {
                let mut psi: Vec<f64> = u.iter().zip(&degree).map(|(ui, di)| ui * (volume / di).sqrt()).collect();
                let pivot = psi
                    .iter()
                    .fold(0.0f64, |best, v| if v.abs() > best.abs() { *v } else { best });
                if pivot < 0.0 {
                    psi.iter_mut().for_each(|p| *p = -*p);
                }
                kept.push(*lambda);
                psis.push(psi);
            }
            eigenvalues.push(kept);
            modes.push(psis);
        }

        let t_diff = match params.time {
            DiffusionTime::Steps(t) => t,
            DiffusionTime::GapScaled(tau) => {
                let largest = (0..count).max_by_key(|&c| (members[c].len(), std::cmp::Reverse(c))).expect("non-empty");
                match eigenvalues[largest].first() {
                    Some(&l2) if l2 < 1.0 => tau / (1.0 - l2),
                    _ => tau,
                }
            }
        };
        for (c, nodes) in members.iter().enumerate() {
            for (j, (lambda, psi)) in eigenvalues[c].iter().zip(&modes[c]).enumerate() {
                let scale = lambda.signum() * lambda.abs().powf(t_diff);
                for (i, &v) in nodes.iter().enumerate() {
                    coords[v as usize * k + j] = scale * psi[i];
                }
            }
        }
        Ok(DiffusionMap { k, time: params.time, t_diff, sigma: params.sigma, coords, component, eigenvalues, trivial })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Resolved diffusion time.
    pub fn t_diff(&self) -> f64 {
        self.t_diff
    }

    pub fn time(&self) -> DiffusionTime {
        self.time
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn node_count(&self) -> usize {
        self.component.len()
    }

    pub fn coords(&self, node: u32) -> &[f64] {
        let i = node as usize * self.k;
        &self.coords[i..i + self.k]
    }

    pub fn component(&self, node: u32) -> u32 {
        self.component[node as usize]
    }

    /// Retained eigenvalues of each component.
    pub fn eigenvalues(&self) -> &[Vec<f64>] {
        &self.eigenvalues
    }

    /// Dropped leading eigenvalue of each component.
    pub fn trivial_eigenvalues(&self) -> &[f64] {
        &self.trivial
    }

    /// Diffusion distance between two graph nodes.
    pub fn node_distance(&self, a: u32, b: u32) -> f64 {
        if self.component[a as usize] != self.component[b as usize] {
            return f64::INFINITY;
        }
        if a == b {
            return 0.0;
        }
        self.coords(a).iter().zip(self.coords(b)).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    }

    /// Writes the binary sidecar for a map built on `grid`.
    pub fn write_sidecar<W: Write>(&self, grid: &GridGraph, mut out: W) -> Result<(), MetricError> {
        let (cols, rows) = grid.lattice_dims();
        let mut buf = Vec::with_capacity(64 + self.coords.len() * 8 + self.component.len() * 8);
        buf.extend_from_slice(SIDECAR_MAGIC);
        buf.extend_from_slice(&SIDECAR_VERSION.to_le_bytes());
        buf.extend_from_slice(&grid.spacing().to_le_bytes());
        buf.extend_from_slice(&(cols as u32).to_le_bytes());
        buf.extend_from_slice(&(rows as u32).to_le_bytes());
        buf.extend_from_slice(&(self.node_count() as u32).to_le_bytes());
        buf.extend_from_slice(&(self.k as u32).to_le_bytes());
        let (tag, tv) = self.time.tag();
        buf.extend_from_slice(&tag.to_le_bytes());
        buf.extend_from_slice(&tv.to_le_bytes());
        buf.extend_from_slice(&self.t_diff.to_le_bytes());
        buf.extend_from_slice(&self.sigma.to_le_bytes());
        for &l in grid.lattice_indices() {
            buf.extend_from_slice(&l.to_le_bytes());
        }
        for &c in &self.component {
            buf.extend_from_slice(&c.to_le_bytes());
        }
        buf.extend_from_slice(&(self.eigenvalues.len() as u32).to_le_bytes());
        for (vals, t) in self.eigenvalues.iter().zip(&self.trivial) {
            buf.extend_from_slice(&t.to_le_bytes());
            buf.extend_from_slice(&(vals.len() as u32).to_le_bytes());
            for v in vals {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        for c in &self.coords {
            buf.extend_from_slice(&c.to_le_bytes());
        }
        out.write_all(&buf)?;
        Ok(())
    }

    /// Reads a sidecar, checking that it was produced for `grid`.
    pub fn read_sidecar<R: Read>(grid: &GridGraph, mut input: R) -> Result<Self, MetricError> {
        let mut bytes = Vec::new();
        input.read_to_end(&mut bytes)?;
        let mut r = Cursor { bytes: &bytes, at: 0 };
        if r.take(8)? != SIDECAR_MAGIC {
            return Err(MetricError::Sidecar("bad magic".into()));
        }
        let version = r.u32()?;
        if version != SIDECAR_VERSION {
            return Err(MetricError::Sidecar(format!("unsupported version {version}")));
        }
        let spacing = r.f64()?;
        let (cols, rows) = (r.u32()? as usize, r.u32()? as usize);
        let n = r.u32()? as usize;
        if spacing != grid.spacing() || (cols, rows) != grid.lattice_dims() || n != grid.node_count() {
            return Err(MetricError::Sidecar("lattice does not match the map".into()));
        }
        let k = r.u32()? as usize;
        let (tag, tv) = (r.u32()?, r.f64()?);
        let time = DiffusionTime::from_tag(tag, tv).ok_or_else(|| MetricError::Sidecar(format!("bad time tag {tag}")))?;
        let t_diff = r.f64()?;
        let sigma = r.f64()?;
        for &expected in grid.lattice_indices() {
            if r.u32()? != expected {
                return Err(MetricError::Sidecar("node lattice does not match the map".into()));
            }
        }
        let component = (0..n).map(|_| r.u32()).collect::<Result<Vec<_>, _>>()?;
        let count = r.u32()? as usize;
        let mut eigenvalues = Vec::with_capacity(count);
        let mut trivial = Vec::with_capacity(count);
        for _ in 0..count {
            trivial.push(r.f64()?);
            let len = r.u32()? as usize;
            eigenvalues.push((0..len).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?);
        }
        let coords = (0..n * k).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
        if r.at != bytes.len() {
            return Err(MetricError::Sidecar("trailing bytes".into()));
        }
        if component.iter().any(|&c| c as usize >= count) || coords.iter().any(|c| !c.is_finite()) {
            return Err(MetricError::Sidecar("corrupt contents".into()));
        }
        Ok(DiffusionMap { k, time, t_diff, sigma, coords, component, eigenvalues, trivial })
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], MetricError> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| MetricError::Sidecar("truncated file".into()))?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, MetricError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64, MetricError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

/// d_D: states are snapped to the lattice, then compared in the embedding.
#[derive(Clone, Debug)]
pub struct DiffusionMetric {
    grid: Arc<GridGraph>,
    map: Arc<DiffusionMap>,
}

impl DiffusionMetric {
    pub fn new(grid: Arc<GridGraph>, map: Arc<DiffusionMap>) -> Result<Self, MetricError> {
        if grid.node_count() != map.node_count() {
            return Err(MetricError::InvalidParameter("diffusion map does not match the grid".into()));
        }
        Ok(DiffusionMetric { grid, map })
    }

    /// Builds the lattice at `r_grid` and embeds it with σ = `r_grid`.
    pub fn build(env: &Environment, r_grid: f64, k: usize, time: DiffusionTime) -> Result<Self, MetricError> {
        let grid = Arc::new(GridGraph::build(env, r_grid)?);
        let map = Arc::new(DiffusionMap::build(grid.graph(), &DiffusionParams::new(k, time, r_grid))?);
        Self::new(grid, map)
    }

    /// Loads the sidecar at `path` if it matches the map, otherwise builds
    /// and writes it. Returns whether the file was loaded.
    pub fn load_or_build(
        env: &Environment,
        r_grid: f64,
        k: usize,
        time: DiffusionTime,
        path: &Path,
    ) -> Result<(Self, bool), MetricError> {
        let grid = Arc::new(GridGraph::build(env, r_grid)?);
        if let Ok(file) = std::fs::File::open(path) {
            if let Ok(map) = DiffusionMap::read_sidecar(&grid, std::io::BufReader::new(file)) {
                if map.k() == k && map.time() == time && map.sigma() == r_grid {
                    return Ok((Self::new(grid, Arc::new(map))?, true));
                }
            }
        }
        let map = DiffusionMap::build(grid.graph(), &DiffusionParams::new(k, time, r_grid))?;
        map.write_sidecar(&grid, std::io::BufWriter::new(std::fs::File::create(path)?))?;
        Ok((Self::new(grid, Arc::new(map))?, false))
    }

    pub fn grid(&self) -> &GridGraph {
        &self.grid
    }

    pub fn map(&self) -> &DiffusionMap {
        &self.map
    }
}

impl AssistingMetric for DiffusionMetric {
    fn kind(&self) -> MetricKind {
        MetricKind::Diffusion
    }

    fn distance(&self, a: &State, b: &State) -> f64 {
        self.map.node_distance(self.grid.snap(a), self.grid.snap(b))
    }

    fn embed(&self, x: &State) -> Option<Embedding<'_>> {
        let n = self.grid.snap(x);
        Some(Embedding { component: self.map.component(n), coords: self.map.coords(n) })
    }

    fn embedding_dim(&self) -> usize {
        self.map.k()
    }
}
