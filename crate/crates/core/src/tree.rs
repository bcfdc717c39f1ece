//! The planning tree: parent links, Euclidean cost-to-come, re-rooting,
//! rewiring and invalidation.
//!
//! Invalidation is stored per edge: `blocked[n]` marks the edge from `n` to
//! its parent as unusable. A node's cost is +∞ iff some edge on its path
//! from the root is blocked, so clearing the mark (after a rewire, or when
//! an obstacle goes away) restores the subtree exactly.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{Environment, State, DIM};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("unknown node {0:?}")]
    UnknownNode(NodeId),
    #[error("state {0:?} is already in the tree")]
    Duplicate(State),
    #[error("state {0:?} is not in free space")]
    NotFree(State),
    #[error("making {parent:?} the parent of {child:?} would form a cycle")]
    CycleWouldForm { parent: NodeId, child: NodeId },
    #[error("the root has no parent edge")]
    RootEdge,
}

const NONE: u32 = u32::MAX;

/// Flat export of the tree for observers and audits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeSnapshot {
    pub root: u32,
    pub positions: Vec<State>,
    /// Parent index per node; `None` for the root.
    pub parents: Vec<Option<u32>>,
    /// Cost per node; `None` encodes +∞.
    pub costs: Vec<Option<f64>>,
}

#[derive(Clone, Debug)]
pub struct PlanTree {
    pos: Vec<State>,
    parent: Vec<u32>,
    children: Vec<Vec<NodeId>>,
    cost: Vec<f64>,
    blocked: Vec<bool>,
    root: NodeId,
    keys: HashMap<[u64; DIM], NodeId>,
    queue: VecDeque<NodeId>,
}

impl PlanTree {
    /// A tree holding only `root`.
    pub fn new(env: &Environment, root: State) -> Result<Self, TreeError> {
        if !env.in_free(&root) {
            return Err(TreeError::NotFree(root));
        }
        let mut keys = HashMap::new();
        keys.insert(root.key(), NodeId(0));
        Ok(PlanTree {
            pos: vec![root],
            parent: vec![NONE],
            children: vec![Vec::new()],
            cost: vec![0.0],
            blocked: vec![false],
            root: NodeId(0),
            keys,
            queue: VecDeque::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.pos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty()
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    fn check(&self, n: NodeId) -> Result<(), TreeError> {
        if n.index() < self.pos.len() {
            Ok(())
        } else {
            Err(TreeError::UnknownNode(n))
        }
    }

    #[inline]
    pub fn position(&self, n: NodeId) -> State {
        self.pos[n.index()]
    }

    pub fn positions(&self) -> &[State] {
        &self.pos
    }

    #[inline]
    pub fn cost(&self, n: NodeId) -> f64 {
        self.cost[n.index()]
    }

    #[inline]
    pub fn parent(&self, n: NodeId) -> Option<NodeId> {
        match self.parent[n.index()] {
            NONE => None,
            p => Some(NodeId(p)),
        }
    }

    pub fn children(&self, n: NodeId) -> &[NodeId] {
        &self.children[n.index()]
    }

    /// Whether the edge from `n` to its parent is marked unusable.
    pub fn is_blocked(&self, n: NodeId) -> bool {
        self.blocked[n.index()]
    }

    pub fn find(&self, x: &State) -> Option<NodeId> {
        self.keys.get(&x.key()).copied()
    }

    pub fn contains(&self, x: &State) -> bool {
        self.keys.contains_key(&x.key())
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.pos.len() as u32).map(NodeId)
    }

    pub fn add_node(&mut self, x: State, parent: NodeId) -> Result<NodeId, TreeError> {
        self.check(parent)?;
        if self.keys.contains_key(&x.key()) {
            return Err(TreeError::Duplicate(x));
        }
        let id = NodeId(self.pos.len() as u32);
        self.keys.insert(x.key(), id);
        self.cost.push(self.cost[parent.index()] + self.pos[parent.index()].dist(&x));
        self.pos.push(x);
        self.parent.push(parent.0);
        self.children.push(Vec::new());
        self.blocked.push(false);
        self.children[parent.index()].push(id);
        Ok(id)
    }

    /// Nodes from the root to `n`, inclusive.
    pub fn path(&self, n: NodeId) -> Result<Vec<NodeId>, TreeError> {
        self.check(n)?;
        let mut out = vec![n];
        let mut cur = n;
        while let Some(p) = self.parent(cur) {
            out.push(p);
            cur = p;
        }
        out.reverse();
        Ok(out)
    }

    /// Whether `a` lies in the subtree of `b` (including `a == b`).
    pub fn is_descendant(&self, a: NodeId, b: NodeId) -> bool {
        let mut cur = Some(a);
        while let Some(c) = cur {
            if c == b {
                return true;
            }
            cur = self.parent(c);
        }
        false
    }

    /// Re-roots the tree at `x`, reversing the parent links along the old
    /// root-to-`x` path. Edge marks travel with their edges.
    pub fn set_root(&mut self, x: NodeId) -> Result<(), TreeError> {
        self.check(x)?;
        if x == self.root {
            return Ok(());
        }
        let path = self.path(x)?;
        for w in path.windows(2) {
            let (p, c) = (w[0], w[1]);
            self.children[p.index()].retain(|&k| k != c);
            self.children[c.index()].push(p);
            self.parent[p.index()] = c.0;
            self.blocked[p.index()] = self.blocked[c.index()];
        }
        self.parent[x.index()] = NONE;
        self.blocked[x.index()] = false;
        self.root = x;
        self.cost[x.index()] = 0.0;
        self.recompute_below(x);
        Ok(())
    }

    /// Makes `new_parent` the parent of `child` and clears the edge mark.
    pub fn update_edge(&mut self, new_parent: NodeId, child: NodeId) -> Result<(), TreeError> {
        self.check(new_parent)?;
        self.check(child)?;
        if child == self.root {
            return Err(TreeError::RootEdge);
        }
        if self.is_descendant(new_parent, child) {
            return Err(TreeError::CycleWouldForm { parent: new_parent, child });
        }
        let old = self.parent[child.index()];
        if old != new_parent.0 {
            self.children[old as usize].retain(|&k| k != child);
            self.children[new_parent.index()].push(child);
            self.parent[child.index()] = new_parent.0;
        }
        self.blocked[child.index()] = false;
        self.recompute(child);
        Ok(())
    }

    /// Marks the edge into `n` as blocked; `n` and its subtree become +∞.
    pub fn invalidate(&mut self, n: NodeId) -> Result<(), TreeError> {
        self.check(n)?;
        if n == self.root {
            return Err(TreeError::RootEdge);
        }
        if !self.blocked[n.index()] {
            self.blocked[n.index()] = true;
            self.recompute(n);
        }
        Ok(())
    }

    /// Clears the mark on the edge into `n` and restores its subtree.
    pub fn revalidate(&mut self, n: NodeId) -> Result<(), TreeError> {
        self.check(n)?;
        if self.blocked[n.index()] {
            self.blocked[n.index()] = false;
            self.recompute(n);
        }
        Ok(())
    }

    fn edge_cost(&self, n: NodeId) -> f64 {
        match self.parent(n) {
            None => 0.0,
            Some(_) if self.blocked[n.index()] => f64::INFINITY,
            Some(p) => self.cost[p.index()] + self.pos[p.index()].dist(&self.pos[n.index()]),
        }
    }

    /// Recomputes `n` from its parent, then its whole subtree.
    fn recompute(&mut self, n: NodeId) {
        self.cost[n.index()] = self.edge_cost(n);
        self.recompute_below(n);
    }

    fn recompute_below(&mut self, n: NodeId) {
        let mut queue = std::mem::take(&mut self.queue);
        queue.clear();
        queue.push_back(n);
        while let Some(v) = queue.pop_front() {
            for i in 0..self.children[v.index()].len() {
                let c = self.children[v.index()][i];
                self.cost[c.index()] = self.edge_cost(c);
                queue.push_back(c);
            }
        }
        self.queue = queue;
    }

    pub fn snapshot(&self) -> TreeSnapshot {
        TreeSnapshot {
            root: self.root.0,
            positions: self.pos.clone(),
            parents: self.parent.iter().map(|&p| (p != NONE).then_some(p)).collect(),
            costs: self.cost.iter().map(|&c| c.is_finite().then_some(c)).collect(),
        }
    }

    /// Full structural and cost audit; returns a description of the first
    /// violation found.
    pub fn audit(&self) -> Result<(), String> {
        let n = self.len();
        let roots: Vec<usize> = (0..n).filter(|&i| self.parent[i] == NONE).collect();
        if roots != [self.root.index()] {
            return Err(format!("roots {roots:?}, expected [{}]", self.root.0));
        }
        if self.cost[self.root.index()] != 0.0 {
            return Err("root cost is not 0".into());
        }
        for i in 0..n {
            for &c in &self.children[i] {
                if self.parent[c.index()] != i as u32 {
                    return Err(format!("child {c:?} of {i} has parent {}", self.parent[c.index()]));
                }
            }
            if self.parent[i] != NONE {
                let p = self.parent[i] as usize;
                if self.children[p].iter().filter(|&&k| k.index() == i).count() != 1 {
                    return Err(format!("node {i} missing from children of {p}"));
                }
            }
        }
        // walk every node to the root, recomputing its cost top-down
        for i in 0..n {
            let mut chain = vec![NodeId(i as u32)];
            let mut cur = NodeId(i as u32);
            while let Some(p) = self.parent(cur) {
                chain.push(p);
                if chain.len() > n {
                    return Err(format!("cycle through node {i}"));
                }
                cur = p;
            }
            let mut c = 0.0f64;
            for w in chain.windows(2).rev() {
                let (child, parent) = (w[0], w[1]);
                c = if self.blocked[child.index()] {
                    f64::INFINITY
                } else {
                    c + self.pos[parent.index()].dist(&self.pos[child.index()])
                };
            }
            let stored = self.cost[i];
            if !(stored == c || (stored.is_infinite() && c.is_infinite())) {
                return Err(format!("node {i}: stored cost {stored} vs walked {c}"));
            }
            if let Some(p) = self.parent(NodeId(i as u32)) {
                if self.cost[p.index()].is_infinite() && stored.is_finite() {
                    return Err(format!("node {i} finite below infinite parent"));
                }
            }
        }
        Ok(())
    }
}

/// Membership "since the last reset" in O(1): a node is a member iff its
/// stamp equals the current epoch.
#[derive(Clone, Debug, Default)]
pub struct EpochSet {
    stamp: Vec<u32>,
    epoch: u32,
}

impl EpochSet {
    pub fn new() -> Self {
        EpochSet { stamp: Vec::new(), epoch: 1 }
    }

    pub fn reset(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.stamp.get(n.index()).is_some_and(|&s| s == self.epoch)
    }

    /// Adds `n`; returns whether it was absent.
    pub fn insert(&mut self, n: NodeId) -> bool {
        if self.stamp.len() <= n.index() {
            self.stamp.resize(n.index() + 1, 0);
        }
        let fresh = self.stamp[n.index()] != self.epoch;
        self.stamp[n.index()] = self.epoch;
        fresh
    }
}
