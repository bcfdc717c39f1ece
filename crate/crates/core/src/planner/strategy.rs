//! The variant-specific parts of the planner.

use std::fmt::Debug;
use std::sync::Arc;

use rand::Rng;

use super::{Meter, Mode, Phase, PlannerConfig, Search};
use crate::env::{sample_sphere, State};
use crate::tree::NodeId;

/// Picks the tree node an expansion grows from.
pub trait NearestRule: Send + Sync + Debug {
    fn nearest(&self, s: &Search, x: &State) -> NodeId;
}

/// Proposes x_new from x_init towards x_end. Returning `from` means no
/// progress; any other result must satisfy `obs_free(from, result)` and
/// lie within `s_max` of `from`.
pub trait SteerRule: Send + Sync + Debug {
    fn steer(&self, s: &mut Search, from: &State, to: &State) -> State;
}

/// Improves the goal path within a visit budget. Called only while a goal
/// path exists.
pub trait GoalRewiring: Send + Sync + Debug {
    fn rewire(&self, s: &mut Search, meter: &mut Meter);
}

/// Euclidean nearest if it sees `x`, else the d_A nearest.
#[derive(Clone, Copy, Debug, Default)]
pub struct DualNearest;

impl NearestRule for DualNearest {
    fn nearest(&self, s: &Search, x: &State) -> NodeId {
        s.nearest_dual(x)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct EuclideanNearest;

impl NearestRule for EuclideanNearest {
    fn nearest(&self, s: &Search, x: &State) -> NodeId {
        s.nearest_euclidean(x)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct AssistingNearest;

impl NearestRule for AssistingNearest {
    fn nearest(&self, s: &Search, x: &State) -> NodeId {
        s.nearest_assisting(x)
    }
}

fn straight(from: &State, to: &State, step: f64) -> State {
    if from.dist(to) <= step {
        *to
    } else {
        from.step_toward(to, step)
    }
}

/// Straight step when the line is clear; otherwise the best of a batch of
/// sphere samples by d_A to the target.
#[derive(Clone, Copy, Debug)]
pub struct AssistedSteer {
    pub step: f64,
}

impl SteerRule for AssistedSteer {
    fn steer(&self, s: &mut Search, from: &State, to: &State) -> State {
        if s.env().obs_free(from, to) {
            return straight(from, to, self.step);
        }
        let r = s.config().s_max.min(from.dist(to));
        let mut meter = s.config().meter(Phase::Steer);
        let mut samples = Vec::new();
        while meter.tick() {
            samples.push(sample_sphere(from, r, s.rng()));
        }
        s.counters.steer_samples += samples.len() as u64;
        let index = s.index();
        let probe = index.probe(to);
        let mut best = *from;
        let mut c_min = index.probe_distance_to(&probe, from);
        for x in samples {
            let c = index.probe_distance_to(&probe, &x);
            if c < c_min && s.env().obs_free(from, &x) {
                best = x;
                c_min = c;
            }
        }
        best
    }
}

/// Fixed-length straight step; no progress when the step is blocked.
#[derive(Clone, Copy, Debug)]
pub struct StraightSteer {
    pub step: f64,
}

impl SteerRule for StraightSteer {
    fn steer(&self, s: &mut Search, from: &State, to: &State) -> State {
        let x = straight(from, to, self.step);
        if s.env().obs_free(from, &x) {
            x
        } else {
            *from
        }
    }
}

/// Offshoot rewiring from the root towards the goal: a stack for the
/// current offshoot, a queue for where the next ones start, both ordered
/// by d_A to the goal.
#[derive(Clone, Copy, Debug, Default)]
pub struct TargetedRewiring;

impl GoalRewiring for TargetedRewiring {
    fn rewire(&self, s: &mut Search, meter: &mut Meter) {
        let Some(goal) = s.goal() else { return };
        if s.s_goal.is_empty() && s.q_goal.is_empty() {
            s.stack_seen.reset();
            s.queue_seen.reset();
            let root = s.tree().root();
            s.stack_seen.insert(root);
            s.queue_seen.insert(root);
            s.s_goal.push(root);
        }
        let mut free = Vec::new();
        let mut next: Vec<(f64, NodeId)> = Vec::new();
        while !(s.s_goal.is_empty() && s.q_goal.is_empty()) && meter.tick() {
            let x_r = match s.s_goal.pop() {
                Some(x) => x,
                None => s.q_goal.pop_front().expect("non-empty"),
            };
            s.counters.goal_visits += 1;
            if s.in_rewire_ellipse(&s.tree().position(x_r)) {
                free.clear();
                s.rewire_through(x_r, &mut free);
                next.clear();
                {
                    let index = &s.index;
                    let probe = index.probe(&goal);
                    for &n in &free {
                        if s.stack_seen.insert(n) {
                            next.push((index.probe_distance(&probe, n), n));
                        }
                    }
                }
                next.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                // the stack's top ends up A-closest to the goal
                s.s_goal.extend(next.iter().rev().map(|&(_, n)| n));
                for &(_, n) in &next {
                    s.queue_seen.insert(n);
                    s.q_goal.push_back(n);
                }
            }
            if let Some(&top) = s.s_goal.last() {
                let index = s.index();
                let probe = index.probe(&goal);
                if index.probe_distance(&probe, top) > index.probe_distance(&probe, x_r) {
                    // the offshoot is heading away from the goal
                    s.s_goal.clear();
                }
            }
        }
    }
}

/// Rewires around uniformly drawn tree nodes.
#[derive(Clone, Copy, Debug, Default)]
pub struct RandomRewiring;

impl GoalRewiring for RandomRewiring {
    fn rewire(&self, s: &mut Search, meter: &mut Meter) {
        let mut free = Vec::new();
        while meter.tick() {
            let n = s.tree().len() as u32;
            let x_r = NodeId(s.rng().gen_range(0..n));
            s.counters.goal_visits += 1;
            free.clear();
            s.rewire_through(x_r, &mut free);
        }
    }
}

/// The three pluggable parts of a planner variant.
#[derive(Clone, Debug)]
pub struct Strategies {
    pub nearest: Arc<dyn NearestRule>,
    pub steer: Arc<dyn SteerRule>,
    pub goal: Arc<dyn GoalRewiring>,
}

impl Strategies {
    pub fn for_config(cfg: &PlannerConfig) -> Self {
        let step = cfg.step_len();
        match cfg.mode {
            Mode::AmRrt => Strategies {
                nearest: Arc::new(DualNearest),
                steer: Arc::new(AssistedSteer { step }),
                goal: Arc::new(TargetedRewiring),
            },
            Mode::RtRrtBaseline => Strategies {
                nearest: Arc::new(EuclideanNearest),
                steer: Arc::new(StraightSteer { step }),
                goal: Arc::new(RandomRewiring),
            },
            Mode::RtRrtDBaseline => Strategies {
                nearest: Arc::new(AssistingNearest),
                steer: Arc::new(StraightSteer { step }),
                goal: Arc::new(RandomRewiring),
            },
        }
    }
}
