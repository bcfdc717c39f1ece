//! World model: a bounded planar world with a static occupancy grid and a
//! set of dynamic rectangular obstacles.
//!
//! Coordinates are meters. The grid follows the map document layout: column
//! `c` covers `x ∈ [c·cs, (c+1)·cs)` and row `r` (row 0 at the top) covers
//! `y ∈ (H − (r+1)·cs, H − r·cs]`. Anything outside `[0, W) × (0, H]` is
//! treated as obstacle.

mod collision;
mod map;
mod sampling;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use sampling::{sample_rewire_ellipse, sample_sphere};

/// Dimension of the planning space.
pub const DIM: usize = 2;

/// Default number of rejection attempts made by [`Environment::sample_free`].
pub const DEFAULT_SAMPLE_ATTEMPTS: usize = 1_000_000;

/// A point in the world, in meters. Serializes as `[x, y]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct State(pub [f64; DIM]);

impl State {
    pub const fn new(x: f64, y: f64) -> Self {
        State([x, y])
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.0[0]
    }

    #[inline]
    pub fn y(&self) -> f64 {
        self.0[1]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Euclidean distance.
    #[inline]
    pub fn dist(&self, other: &State) -> f64 {
        let mut s = 0.0;
        for i in 0..DIM {
            let d = self.0[i] - other.0[i];
            s += d * d;
        }
        s.sqrt()
    }

    /// Point at fraction `t` of the way from `self` to `other`.
    #[inline]
    pub fn lerp(&self, other: &State, t: f64) -> State {
        let mut out = [0.0; DIM];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.0[i] + (other.0[i] - self.0[i]) * t;
        }
        State(out)
    }

    /// Point at distance `len` from `self` in the direction of `toward`.
    /// Returns `toward` itself if it is closer than `len`.
    pub fn step_toward(&self, toward: &State, len: f64) -> State {
        let d = self.dist(toward);
        if d <= len {
            *toward
        } else {
            self.lerp(toward, len / d)
        }
    }

    /// Bit pattern of the coordinates, usable as an exact-equality key.
    pub fn key(&self) -> [u64; DIM] {
        let mut k = [0u64; DIM];
        for (i, v) in k.iter_mut().enumerate() {
            // fold -0.0 into 0.0 so equal states share a key
            *v = (self.0[i] + 0.0).to_bits();
        }
        k
    }
}

impl From<[f64; DIM]> for State {
    fn from(c: [f64; DIM]) -> Self {
        State(c)
    }
}

/// Axis-aligned rectangle, closed on all sides.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: State,
    pub max: State,
}

impl Rect {
    /// Builds a rectangle from any two opposite corners.
    pub fn from_corners(a: State, b: State) -> Self {
        Rect {
            min: State::new(a.x().min(b.x()), a.y().min(b.y())),
            max: State::new(a.x().max(b.x()), a.y().max(b.y())),
        }
    }

    pub fn contains(&self, p: &State) -> bool {
        (0..DIM).all(|i| p.0[i] >= self.min.0[i] && p.0[i] <= self.max.0[i])
    }

    pub fn inflate(&self, by: f64) -> Rect {
        Rect {
            min: State::new(self.min.x() - by, self.min.y() - by),
            max: State::new(self.max.x() + by, self.max.y() + by),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.min.is_finite() && self.max.is_finite() && (0..DIM).all(|i| self.min.0[i] <= self.max.0[i])
    }

    /// Whether any point of segment `[a, b]` lies inside the rectangle
    /// (slab clipping).
    pub fn intersects_segment(&self, a: &State, b: &State) -> bool {
        let mut t0 = 0.0f64;
        let mut t1 = 1.0f64;
        for i in 0..DIM {
            let d = b.0[i] - a.0[i];
            if d == 0.0 {
                if a.0[i] < self.min.0[i] || a.0[i] > self.max.0[i] {
                    return false;
                }
            } else {
                let mut ta = (self.min.0[i] - a.0[i]) / d;
                let mut tb = (self.max.0[i] - a.0[i]) / d;
                if ta > tb {
                    std::mem::swap(&mut ta, &mut tb);
                }
                t0 = t0.max(ta);
                t1 = t1.min(tb);
                if t0 > t1 {
                    return false;
                }
            }
        }
        true
    }
}

/// Stable identifier of a dynamic obstacle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObstacleId(pub u64);

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("map parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("map has no free cells")]
    NoFreeCells,
    #[error("no free state found after {0} sampling attempts")]
    SamplingExhausted(usize),
    #[error("rewire ellipse is degenerate: c_best {c_best} < c_min {c_min}")]
    DegenerateEllipse { c_best: f64, c_min: f64 },
    #[error("unknown obstacle id {0:?}")]
    UnknownObstacle(ObstacleId),
    #[error("obstacle rectangle is invalid or outside the world")]
    InvalidRect,
}

/// Static occupancy plus dynamic overlays.
#[derive(Clone, Debug)]
pub struct Environment {
    width: f64,
    height: f64,
    cell_size: f64,
    cols: usize,
    rows: usize,
    /// Row-major, row 0 at the top. `true` = obstacle.
    blocked: Vec<bool>,
    /// Chebyshev distance, in cells, to the nearest blocked or outside cell.
    clearance: Vec<u32>,
    dynamic: BTreeMap<ObstacleId, Rect>,
    next_obstacle: u64,
    version: u64,
    /// `(version after the change, affected rectangle)`.
    changes: Vec<(u64, Rect)>,
}

/// Two-pass chessboard distance transform; cells outside the grid count
/// as blocked.
fn chessboard_clearance(cols: usize, rows: usize, blocked: &[bool]) -> Vec<u32> {
    let mut d: Vec<u32> = (0..cols * rows)
        .map(|i| {
            let (c, r) = (i % cols, i / cols);
            if blocked[i] {
                0
            } else {
                (c + 1).min(cols - c).min(r + 1).min(rows - r) as u32
            }
        })
        .collect();
    for r in 0..rows {
        for c in 0..cols {
            let mut v = d[r * cols + c];
            if c > 0 {
                v = v.min(d[r * cols + c - 1] + 1);
            }
            if r > 0 {
                for cc in c.saturating_sub(1)..=(c + 1).min(cols - 1) {
                    v = v.min(d[(r - 1) * cols + cc] + 1);
                }
            }
            d[r * cols + c] = v;
        }
    }
    for r in (0..rows).rev() {
        for c in (0..cols).rev() {
            let mut v = d[r * cols + c];
            if c + 1 < cols {
                v = v.min(d[r * cols + c + 1] + 1);
            }
            if r + 1 < rows {
                for cc in c.saturating_sub(1)..=(c + 1).min(cols - 1) {
                    v = v.min(d[(r + 1) * cols + cc] + 1);
                }
            }
            d[r * cols + c] = v;
        }
    }
    d
}

impl Environment {
    /// Builds an environment from an occupancy grid given row-major with
    /// row 0 at the top.
    pub fn from_grid(cols: usize, rows: usize, cell_size: f64, blocked: Vec<bool>) -> Result<Self, EnvError> {
        if cols == 0 || rows == 0 || !(cell_size > 0.0) || blocked.len() != cols * rows {
            return Err(EnvError::Parse { line: 0, msg: "inconsistent grid dimensions".into() });
        }
        if blocked.iter().all(|&b| b) {
            return Err(EnvError::NoFreeCells);
        }
        Ok(Environment {
            clearance: chessboard_clearance(cols, rows, &blocked),
            width: cols as f64 * cell_size,
            height: rows as f64 * cell_size,
            cell_size,
            cols,
            rows,
            blocked,
            dynamic: BTreeMap::new(),
            next_obstacle: 0,
            version: 0,
            changes: Vec::new(),
        })
    }

    /// An obstacle-free world.
    pub fn empty(cols: usize, rows: usize, cell_size: f64) -> Self {
        Self::from_grid(cols, rows, cell_size, vec![false; cols * rows]).expect("valid empty grid")
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn free_cell_count(&self) -> usize {
        self.blocked.iter().filter(|&&b| !b).count()
    }

    pub(crate) fn clearance(&self, col: usize, row: usize) -> u32 {
        self.clearance[row * self.cols + col]
    }

    pub fn is_cell_blocked(&self, col: usize, row: usize) -> bool {
        self.blocked[row * self.cols + col]
    }

    /// Centre of a grid cell.
    pub fn cell_center(&self, col: usize, row: usize) -> State {
        State::new(
            (col as f64 + 0.5) * self.cell_size,
            self.height - (row as f64 + 0.5) * self.cell_size,
        )
    }

    /// Continuous grid coordinates `(u, v)`: `floor(u)` is the column and
    /// `floor(v)` the row.
    #[inline]
    fn grid_coords(&self, p: &State) -> (f64, f64) {
        (p.x() / self.cell_size, (self.height - p.y()) / self.cell_size)
    }

    /// Grid cell containing `p`, or `None` when out of bounds.
    pub fn cell_of(&self, p: &State) -> Option<(usize, usize)> {
        if !p.is_finite() {
            return None;
        }
        let (u, v) = self.grid_coords(p);
        if u < 0.0 || v < 0.0 || u >= self.cols as f64 || v >= self.rows as f64 {
            return None;
        }
        Some((u as usize, v as usize))
    }

    pub fn in_bounds(&self, p: &State) -> bool {
        self.cell_of(p).is_some()
    }

    /// Free with respect to the static map only.
    pub fn in_static_free(&self, p: &State) -> bool {
        match self.cell_of(p) {
            Some((c, r)) => !self.is_cell_blocked(c, r),
            None => false,
        }
    }

    /// Membership in the free space (static and dynamic).
    pub fn in_free(&self, p: &State) -> bool {
        self.in_static_free(p) && !self.dynamic.values().any(|r| r.contains(p))
    }

    /// True iff every point of segment `[a, b]` is free.
    pub fn obs_free(&self, a: &State, b: &State) -> bool {
        self.static_segment_free(a, b) && !self.dynamic.values().any(|r| r.intersects_segment(a, b))
    }

    /// Segment test against the static map only.
    pub fn static_segment_free(&self, a: &State, b: &State) -> bool {
        collision::segment_free(self, a, b)
    }

    pub fn dynamic_obstacles(&self) -> impl Iterator<Item = (ObstacleId, &Rect)> {
        self.dynamic.iter().map(|(id, r)| (*id, r))
    }

    pub fn add_obstacle(&mut self, rect: Rect) -> Result<ObstacleId, EnvError> {
        let world = Rect { min: State::new(0.0, 0.0), max: State::new(self.width, self.height) };
        if !rect.is_valid() || !world.contains(&rect.min) || !world.contains(&rect.max) {
            return Err(EnvError::InvalidRect);
        }
        let id = ObstacleId(self.next_obstacle);
        self.next_obstacle += 1;
        self.dynamic.insert(id, rect);
        self.version += 1;
        self.changes.push((self.version, rect));
        Ok(id)
    }

    pub fn remove_obstacle(&mut self, id: ObstacleId) -> Result<Rect, EnvError> {
        let rect = self.dynamic.remove(&id).ok_or(EnvError::UnknownObstacle(id))?;
        self.version += 1;
        self.changes.push((self.version, rect));
        Ok(rect)
    }

    /// Rectangles added or removed after `version`.
    pub fn changes_since(&self, version: u64) -> impl Iterator<Item = &Rect> {
        let start = self.changes.partition_point(|(v, _)| *v <= version);
        self.changes[start..].iter().map(|(_, r)| r)
    }

    /// A copy without any dynamic obstacles.
    pub fn static_only(&self) -> Environment {
        let mut e = self.clone();
        e.dynamic.clear();
        e.changes.clear();
        e
    }

    /// Rejection-samples a uniformly distributed free state.
    pub fn sample_free<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Result<State, EnvError> {
        self.sample_free_capped(rng, DEFAULT_SAMPLE_ATTEMPTS)
    }

    pub fn sample_free_capped<R: rand::Rng + ?Sized>(&self, rng: &mut R, attempts: usize) -> Result<State, EnvError> {
        for _ in 0..attempts {
            let u: f64 = rng.gen();
            let v: f64 = rng.gen();
            let p = State::new(u * self.width, self.height - v * self.height);
            if self.in_free(&p) {
                return Ok(p);
            }
        }
        Err(EnvError::SamplingExhausted(attempts))
    }
}
