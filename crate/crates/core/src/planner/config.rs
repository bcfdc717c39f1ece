//! Planner parameters and per-phase budgets.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::MetricKind;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("config parse error: {0}")]
    Parse(String),
}

/// Which algorithm family the shared machinery runs as.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Dual-metric nearest, assisted steering, targeted goal rewiring.
    AmRrt,
    /// Euclidean nearest, unit-step straight steering, random rewiring.
    RtRrtBaseline,
    /// As the baseline, but every nearest query uses d_A.
    RtRrtDBaseline,
}

/// How a phase budget is measured.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetMode {
    /// Operation counts (`n_*` fields); runs are reproducible.
    Deterministic,
    /// Seconds (`t_*` fields).
    Wallclock,
}

/// Straight-line step length of the obstacle-free steering branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SteerStep {
    /// Up to `s_max`.
    SMax,
    /// One metre.
    Unit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    /// Maximum edge length, metres.
    pub s_max: f64,
    /// Maximum number of nodes in a radius-`s_max` neighbourhood.
    pub k_max: usize,
    pub budget_mode: BudgetMode,
    pub t_exp: f64,
    pub t_root: f64,
    pub t_goal: f64,
    pub t_steer: f64,
    /// Expansion loop bodies per step.
    pub n_exp: u32,
    /// Node visits per root rewiring call.
    pub n_root: u32,
    /// Node visits per goal rewiring call.
    pub n_goal: u32,
    /// Candidate samples per blocked steer.
    pub n_steer: u32,
    pub alpha: f64,
    pub beta: f64,
    /// Metres per second.
    pub agent_speed: f64,
    /// Simulated seconds per step.
    pub dt: f64,
    /// A node this close to the goal, with line of sight, connects it.
    pub goal_reached_tol: f64,
    pub mode: Mode,
    pub assisting_kind: MetricKind,
    pub steer_step: SteerStep,
    pub seed: u64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            s_max: 5.0,
            k_max: 20,
            budget_mode: BudgetMode::Deterministic,
            t_exp: 0.15,
            t_root: 0.002,
            t_goal: 0.004,
            t_steer: 0.002,
            n_exp: 25,
            n_root: 10,
            n_goal: 20,
            n_steer: 10,
            alpha: 0.1,
            beta: 2.0,
            agent_speed: 5.0,
            dt: 0.15,
            goal_reached_tol: 5.0,
            mode: Mode::AmRrt,
            assisting_kind: MetricKind::Diffusion,
            steer_step: SteerStep::SMax,
            seed: 0,
        }
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, reason: reason.into() }
}

impl PlannerConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: PlannerConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.s_max > 0.0 && self.s_max.is_finite()) {
            return Err(invalid("s_max", "must be positive"));
        }
        if self.k_max < 1 {
            return Err(invalid("k_max", "must be at least 1"));
        }
        for (field, v) in [("t_exp", self.t_exp), ("t_root", self.t_root), ("t_goal", self.t_goal), ("t_steer", self.t_steer)]
        {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(field, "must be positive"));
            }
        }
        for (field, v) in [("n_exp", self.n_exp), ("n_root", self.n_root), ("n_goal", self.n_goal), ("n_steer", self.n_steer)]
        {
            if v == 0 {
                return Err(invalid(field, "must be positive"));
            }
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(invalid("alpha", "must lie in [0, 1]"));
        }
        if !(self.beta >= 1.0 && self.beta.is_finite()) {
            return Err(invalid("beta", "must be at least 1"));
        }
        if !(self.agent_speed >= 0.0 && self.agent_speed.is_finite()) {
            return Err(invalid("agent_speed", "must be non-negative"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(invalid("dt", "must be positive"));
        }
        if !(self.goal_reached_tol >= 0.0 && self.goal_reached_tol <= self.s_max) {
            return Err(invalid("goal_reached_tol", "must lie in [0, s_max]"));
        }
        Ok(())
    }

    /// Straight steering step for this configuration's mode.
    pub fn step_len(&self) -> f64 {
        match (self.mode, self.steer_step) {
            (Mode::AmRrt, SteerStep::SMax) => self.s_max,
            _ => self.s_max.min(1.0),
        }
    }

    pub fn meter(&self, phase: Phase) -> Meter {
        match self.budget_mode {
            BudgetMode::Deterministic => Meter::count(match phase {
                Phase::Expand => self.n_exp,
                Phase::Root => self.n_root,
                Phase::Goal => self.n_goal,
                Phase::Steer => self.n_steer,
            }),
            BudgetMode::Wallclock => Meter::seconds(match phase {
                Phase::Expand => self.t_exp,
                Phase::Root => self.t_root,
                Phase::Goal => self.t_goal,
                Phase::Steer => self.t_steer,
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Expand,
    Root,
    Goal,
    Steer,
}

#[derive(Clone, Copy, Debug)]
enum Limit {
    Count(u32),
    Until(Instant),
    Unlimited,
}

/// Budget for one phase: `tick` is called before each loop body.
#[derive(Clone, Copy, Debug)]
pub struct Meter {
    limit: Limit,
    used: u32,
}

impl Meter {
    pub fn count(n: u32) -> Self {
        Meter { limit: Limit::Count(n), used: 0 }
    }

    pub fn seconds(s: f64) -> Self {
        Meter { limit: Limit::Until(Instant::now() + Duration::from_secs_f64(s)), used: 0 }
    }

    pub fn unlimited() -> Self {
        Meter { limit: Limit::Unlimited, used: 0 }
    }

    /// Claims one unit; false once the budget is spent.
    pub fn tick(&mut self) -> bool {
        let ok = match self.limit {
            Limit::Count(n) => self.used < n,
            Limit::Until(t) => Instant::now() < t,
            Limit::Unlimited => true,
        };
        if ok {
            self.used += 1;
        }
        ok
    }

    pub fn used(&self) -> u32 {
        self.used
    }
}
