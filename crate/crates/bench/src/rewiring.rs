//! Goal rewiring on an identical tree: targeted offshoots against random
//! node visits.
//!
//! A tree is grown from `grow_from` with root rewiring only, then re-rooted
//! far away the way an agent drags the root along. The goal path through
//! the old root is then poor, and both rewiring rules get a visit budget to
//! repair it.

use std::sync::Arc;

use amrrt_core::metrics::AssistingMetric;
use amrrt_core::planner::strategy::{RandomRewiring, TargetedRewiring};
use amrrt_core::planner::{GoalRewiring, Meter, Phase, Planner, PlannerConfig};
use amrrt_core::{Environment, State};
use serde::{Deserialize, Serialize};

use crate::BenchError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewiringSetup {
    pub grow_from: State,
    /// The root moves to the tree node nearest this point.
    pub root: State,
    /// The goal is the position of the tree node nearest this point.
    pub goal: State,
    /// Expansions (each followed by root rewiring) before the comparison.
    pub grow: u64,
    pub targeted_visits: u32,
    pub random_visits: u32,
}

impl RewiringSetup {
    /// The office-fixture layout: grown from the central corridor, re-rooted
    /// at the bottom-left and aimed at the lower right.
    pub fn office() -> Self {
        RewiringSetup {
            grow_from: State::new(100.0, 102.0),
            root: State::new(10.0, 26.0),
            goal: State::new(160.0, 60.0),
            grow: 8000,
            targeted_visits: 250,
            random_visits: 750,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewiringTrial {
    pub seed: u64,
    pub tree_size: usize,
    pub initial_cost: f64,
    pub targeted_cost: f64,
    pub random_cost: f64,
}

impl RewiringTrial {
    pub fn targeted_wins(&self) -> bool {
        self.targeted_cost <= self.random_cost
    }
}

/// Grows the shared tree and runs both rewiring rules on copies of it.
pub fn rewiring_trial(
    env: &Environment,
    metric: Arc<dyn AssistingMetric>,
    setup: &RewiringSetup,
    seed: u64,
) -> Result<RewiringTrial, BenchError> {
    let cfg = PlannerConfig { seed, assisting_kind: metric.kind(), ..PlannerConfig::default() };
    let mut planner = Planner::new(env.clone(), setup.grow_from, cfg, metric)?;
    for _ in 0..setup.grow {
        planner.expand();
        let mut meter = planner.config().meter(Phase::Root);
        planner.rewire_root(&mut meter);
    }
    let root = planner.search().nearest_euclidean(&setup.root);
    planner.search_mut().set_root(root)?;
    let goal_node = planner.search().nearest_euclidean(&setup.goal);
    planner.set_goal(planner.tree().position(goal_node))?;
    let initial_cost = planner
        .goal_cost()
        .ok_or_else(|| BenchError::Scenario("the grown tree does not reach the goal".into()))?;

    let mut targeted = planner.clone();
    TargetedRewiring.rewire(targeted.search_mut(), &mut Meter::count(setup.targeted_visits));
    let mut random = planner.clone();
    RandomRewiring.rewire(random.search_mut(), &mut Meter::count(setup.random_visits));

    Ok(RewiringTrial {
        seed,
        tree_size: planner.tree().len(),
        initial_cost,
        targeted_cost: targeted.goal_cost().expect("rewiring never disconnects the goal"),
        random_cost: random.goal_cost().expect("rewiring never disconnects the goal"),
    })
}
