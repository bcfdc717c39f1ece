//! Scenario documents: a map, a start, goals to tour in order, seeds and
//! the variants to run.

use std::path::{Path, PathBuf};

use amrrt_core::planner::PlannerConfig;
use amrrt_core::{fixtures, Environment, Rect, State};
use serde::{Deserialize, Serialize};

use crate::checks::CheckKind;
use crate::BenchError;

/// One planner to run: a registry variant plus config overrides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantSpec {
    pub variant: String,
    /// Base configuration; `mode` and `assisting_kind` come from the variant.
    #[serde(default)]
    pub config: PlannerConfig,
}

impl VariantSpec {
    pub fn named(variant: &str) -> Self {
        VariantSpec { variant: variant.to_string(), config: PlannerConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "op")]
pub enum ObstacleOp {
    /// Adds `rect`; later ops refer to it by `label`.
    Add { label: String, min: State, max: State },
    Remove { label: String },
}

/// Fires before step `step` (0-based) of leg `leg` (1-based).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObstacleEvent {
    pub leg: usize,
    pub step: u64,
    #[serde(flatten)]
    pub op: ObstacleOp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// A shipped fixture name, or a map file path relative to the
    /// scenario document.
    pub map: String,
    pub start: State,
    pub goals: Vec<State>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub variants: Vec<VariantSpec>,
    #[serde(default)]
    pub obstacles: Vec<ObstacleEvent>,
    /// Steps after which an unfinished leg is recorded as a failure.
    #[serde(default = "default_leg_cap")]
    pub leg_cap: u64,
    /// Checks the CLI applies to this scenario's results.
    #[serde(default = "default_checks")]
    pub checks: Vec<CheckKind>,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_leg_cap() -> u64 {
    4000
}

fn default_checks() -> Vec<CheckKind> {
    vec![CheckKind::LowerBound]
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::Io(path.display().to_string(), e))?;
        let mut sc = Self::from_json(&text)?;
        sc.base_dir = path.parent().map(Path::to_path_buf);
        Ok(sc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// A shipped scenario by fixture name.
    pub fn shipped(name: &str) -> Result<Self, BenchError> {
        let text = SHIPPED
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| *t)
            .ok_or_else(|| BenchError::Scenario(format!("no shipped scenario `{name}`")))?;
        Self::from_json(text)
    }

    pub fn load_map(&self) -> Result<Environment, BenchError> {
        if let Some(env) = fixtures::load(&self.map) {
            return Ok(env);
        }
        let path = match &self.base_dir {
            Some(d) => d.join(&self.map),
            None => PathBuf::from(&self.map),
        };
        let text = std::fs::read_to_string(&path).map_err(|e| BenchError::Io(path.display().to_string(), e))?;
        Ok(Environment::parse(&text)?)
    }

    /// Loads the map and checks the scenario against it.
    pub fn validate(&self) -> Result<Environment, BenchError> {
        let env = self.load_map()?;
        if self.seeds.is_empty() {
            return Err(BenchError::Scenario("at least one seed is required".into()));
        }
        if self.goals.is_empty() {
            return Err(BenchError::Scenario("at least one goal is required".into()));
        }
        for (what, p) in std::iter::once(("start", &self.start)).chain(self.goals.iter().map(|g| ("goal", g))) {
            if !env.in_free(p) {
                return Err(BenchError::Scenario(format!("{what} {p:?} is not in free space")));
            }
        }
        for v in &self.variants {
            v.config.validate().map_err(|e| BenchError::Scenario(format!("variant `{}`: {e}", v.variant)))?;
        }
        let mut live = std::collections::HashSet::new();
        for ev in &self.obstacles {
            if ev.leg == 0 || ev.leg > self.goals.len() {
                return Err(BenchError::Scenario(format!("obstacle event on unknown leg {}", ev.leg)));
            }
            match &ev.op {
                ObstacleOp::Add { label, min, max } => {
                    if !Rect::from_corners(*min, *max).is_valid() || !live.insert(label.clone()) {
                        return Err(BenchError::Scenario(format!("bad obstacle `{label}`")));
                    }
                }
                ObstacleOp::Remove { label } => {
                    if !live.remove(label) {
                        return Err(BenchError::Scenario(format!("removing unknown obstacle `{label}`")));
                    }
                }
            }
        }
        Ok(env)
    }
}

const SHIPPED: &[(&str, &str)] = &[
    ("corridor", include_str!("../scenarios/corridor.json")),
    ("empty", include_str!("../scenarios/empty.json")),
    ("maze", include_str!("../scenarios/maze.json")),
    ("office", include_str!("../scenarios/office.json")),
];

/// Names of the shipped scenarios.
pub fn shipped_names() -> impl Iterator<Item = &'static str> {
    SHIPPED.iter().map(|(n, _)| *n)
}
