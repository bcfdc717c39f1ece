#![allow(dead_code)]

use std::sync::Arc;

use amrrt_core::metrics::{MetricParams, MetricRegistry};
use amrrt_core::planner::{Planner, PlannerConfig, VariantRegistry};
use amrrt_core::{fixtures, Rect, State};
use amrrt_service::protocol::TreeView;

/// Structural and cost audit of a snapshot tree, written against the wire
/// arrays only. `exact` demands that cost equal parent cost plus edge
/// length; a subsampled tree only has to dominate it.
pub fn audit_tree(t: &TreeView, exact: bool) -> Result<(), String> {
    let n = t.positions.len();
    if t.parents.len() != n || t.costs.len() != n {
        return Err(format!("array lengths {} {} {}", n, t.parents.len(), t.costs.len()));
    }
    let root = t.root as usize;
    if root >= n || t.parents[root].is_some() {
        return Err(format!("bad root {root}"));
    }
    if t.costs[root] != Some(0.0) {
        return Err(format!("root cost {:?}", t.costs[root]));
    }
    for i in 0..n {
        if i == root {
            continue;
        }
        let Some(p) = t.parents[i] else { return Err(format!("node {i} has no parent")) };
        let p = p as usize;
        if p >= n {
            return Err(format!("node {i} parent {p} out of range"));
        }
        let mut v = i;
        let mut hops = 0;
        while let Some(q) = t.parents[v] {
            v = q as usize;
            hops += 1;
            if hops > n {
                return Err(format!("cycle above node {i}"));
            }
        }
        let (a, b) = (t.positions[i], t.positions[p]);
        let d = ((a.0[0] - b.0[0]).powi(2) + (a.0[1] - b.0[1]).powi(2)).sqrt();
        match (t.costs[i], t.costs[p]) {
            (Some(c), Some(cp)) => {
                let ok = if exact { (c - cp - d).abs() <= 1e-6 * (1.0 + c) } else { c >= cp + d - 1e-6 * (1.0 + c) };
                if !ok {
                    return Err(format!("node {i}: cost {c} vs parent {cp} + {d}"));
                }
            }
            (Some(c), None) => return Err(format!("node {i} has cost {c} below an unreachable parent")),
            (None, _) => {}
        }
    }
    Ok(())
}

/// Dense point test of a polyline against a rectangle.
pub fn polyline_clear_of(path: &[State], r: &Rect) -> bool {
    path.windows(2).all(|w| {
        (0..=400).all(|k| {
            let t = k as f64 / 400.0;
            let p = State::new(w[0].0[0] + t * (w[1].0[0] - w[0].0[0]), w[0].0[1] + t * (w[1].0[1] - w[0].0[1]));
            !r.contains(&p)
        })
    })
}

/// A Euclidean AM-RRT* planner on the empty map.
pub fn empty_planner(start: State, seed: u64) -> Planner {
    let env = fixtures::load("empty").unwrap();
    let metric = MetricRegistry::standard().build("euclidean", &env, &MetricParams::default()).unwrap();
    let cfg = PlannerConfig { seed, ..PlannerConfig::default() };
    VariantRegistry::standard().get("am-rrt-e").unwrap().build(env, start, &cfg, Arc::clone(&metric)).unwrap()
}
