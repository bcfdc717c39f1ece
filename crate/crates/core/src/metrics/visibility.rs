//! Any-angle shortest paths on the static map. A shortest free path bends
//! only at convex obstacle corners, so a graph over those corners (nudged a
//! hair into free space) plus the query endpoints yields it exactly up to
//! the nudge.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::env::{Environment, State};

/// Corner offset as a fraction of the cell size.
const NUDGE: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct VisibilityGraph {
    env: Environment,
    corners: Vec<State>,
    adj: Vec<Vec<(u32, f64)>>,
}

#[derive(PartialEq)]
struct Entry(f64, u32);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl VisibilityGraph {
    pub fn build(env: &Environment) -> Self {
        let env = env.static_only();
        let (cols, rows) = (env.cols() as isize, env.rows() as isize);
        let cs = env.cell_size();
        let blocked = |c: isize, r: isize| c >= 0 && r >= 0 && c < cols && r < rows && env.is_cell_blocked(c as usize, r as usize);
        let inside = |c: isize, r: isize| c >= 0 && r >= 0 && c < cols && r < rows;
        let mut corners = Vec::new();
        // grid vertex (i, j) touches cells (i-1|i, j-1|j)
        for j in 1..rows {
            for i in 1..cols {
                let quad = [(i - 1, j - 1), (i, j - 1), (i - 1, j), (i, j)];
                let b: Vec<bool> = quad.iter().map(|&(c, r)| blocked(c, r)).collect();
                if b.iter().filter(|&&x| x).count() != 1 {
                    continue;
                }
                for (q, &(c, r)) in quad.iter().enumerate() {
                    // nudge into the cell diagonally opposite the blocked one
                    if !b[3 - q] || !inside(c, r) {
                        continue;
                    }
                    let dx = if c == i { 1.0 } else { -1.0 };
                    let dy = if r == j { -1.0 } else { 1.0 };
                    corners.push(State::new(i as f64 * cs + dx * NUDGE * cs, env.height() - j as f64 * cs + dy * NUDGE * cs));
                }
            }
        }
        let n = corners.len();
        let mut adj = vec![Vec::new(); n];
        for a in 0..n {
            for b in (a + 1)..n {
                if env.static_segment_free(&corners[a], &corners[b]) {
                    let d = corners[a].dist(&corners[b]);
                    adj[a].push((b as u32, d));
                    adj[b].push((a as u32, d));
                }
            }
        }
        VisibilityGraph { env, corners, adj }
    }

    pub fn corner_count(&self) -> usize {
        self.corners.len()
    }

    /// Shortest free path length from `a` to `b`; +∞ if none exists or an
    /// endpoint is not free.
    pub fn shortest_length(&self, a: &State, b: &State) -> f64 {
        if !self.env.in_static_free(a) || !self.env.in_static_free(b) {
            return f64::INFINITY;
        }
        if self.env.static_segment_free(a, b) {
            return a.dist(b);
        }
        let n = self.corners.len();
        let tail: Vec<f64> = self
            .corners
            .iter()
            .map(|c| if self.env.static_segment_free(c, b) { c.dist(b) } else { f64::INFINITY })
            .collect();
        let mut dist = vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        for (i, c) in self.corners.iter().enumerate() {
            if self.env.static_segment_free(a, c) {
                dist[i] = a.dist(c);
                heap.push(Entry(dist[i], i as u32));
            }
        }
        let mut best = f64::INFINITY;
        while let Some(Entry(d, v)) = heap.pop() {
            if d >= best {
                break;
            }
            if d > dist[v as usize] {
                continue;
            }
            best = best.min(d + tail[v as usize]);
            for &(w, len) in &self.adj[v as usize] {
                let nd = d + len;
                if nd < dist[w as usize] {
                    dist[w as usize] = nd;
                    heap.push(Entry(nd, w));
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn empty_map_is_straight_line() {
        let env = Environment::empty(10, 10, 1.0);
        let g = VisibilityGraph::build(&env);
        assert_eq!(g.corner_count(), 0);
        let (a, b) = (State::new(1.0, 1.0), State::new(8.0, 5.0));
        assert_eq!(g.shortest_length(&a, &b), a.dist(&b));
    }

    #[test]
    fn corridor10_wraps_gap_corners() {
        let env = fixtures::load("corridor10").unwrap();
        let g = VisibilityGraph::build(&env);
        let (a, b) = (State::new(2.0, 2.0), State::new(8.0, 2.0));
        let via = State::new(5.0, 4.0).dist(&a) + 1.0 + State::new(6.0, 4.0).dist(&b);
        let got = g.shortest_length(&a, &b);
        assert!((got - via).abs() < 1e-4, "{got} vs {via}");
    }

    #[test]
    fn disconnected_is_infinite() {
        let mut blocked = vec![false; 100];
        for r in 0..10 {
            blocked[r * 10 + 5] = true;
        }
        let env = Environment::from_grid(10, 10, 1.0, blocked).unwrap();
        let g = VisibilityGraph::build(&env);
        assert!(g.shortest_length(&State::new(1.0, 1.0), &State::new(8.0, 8.0)).is_infinite());
    }
}
