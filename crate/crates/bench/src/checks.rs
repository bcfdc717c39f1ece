//! Pass/fail checks over benchmark results. The CLI exits nonzero when any
//! of the checks a scenario requests fails.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::report::{LegRow, LegStatus, VariantSummary};

/// Slack below 1 allowed for travelled/optimal on a successful leg.
pub const SNAP_TOLERANCE: f64 = 0.02;
/// Largest AM-RRT*(D) search time as a fraction of the baseline's.
pub const SEARCH_FRACTION: f64 = 0.1;
/// Required ratio margin of AM-RRT*(D) under the baseline.
pub const RATIO_MARGIN: f64 = 0.03;
pub const NEAR_OPTIMAL: f64 = 1.15;
/// Allowed excess of the geodesic variant's ratio over the diffusion one.
pub const GEODESIC_SLACK: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Every successful leg has ratio ≥ 1 − [`SNAP_TOLERANCE`].
    LowerBound,
    /// am-rrt-d against rt-rrt, on median search time and median ratio.
    Direction,
    /// am-rrt-d mean ratio ≤ [`NEAR_OPTIMAL`].
    NearOptimal,
    /// am-rrt-g ratio ≤ am-rrt-d ratio + [`GEODESIC_SLACK`].
    GeodesicBound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

pub fn lower_bound(rows: &[LegRow]) -> Check {
    let ok: Vec<&LegRow> = rows.iter().filter(|r| r.status == LegStatus::Ok).collect();
    let worst = ok.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    Check::new(
        "ratio lower bound",
        worst >= 1.0 - SNAP_TOLERANCE,
        format!("min ratio {worst:.4} over {} successful legs (need ≥ {})", ok.len(), 1.0 - SNAP_TOLERANCE),
    )
}

/// Median search time and median ratio of `ours` against `base`.
pub fn direction(scenario: &str, ours: &VariantSummary, base: &VariantSummary) -> Vec<Check> {
    let (Some(os), Some(bs)) = (ours.search_time, base.search_time) else {
        return vec![Check::new(format!("{scenario}: search time"), false, "missing runs")];
    };
    let frac = if bs.median > 0.0 { os.median / bs.median } else { f64::INFINITY };
    let search = Check::new(
        format!("{scenario}: search time {} vs {}", ours.variant, base.variant),
        frac <= SEARCH_FRACTION,
        format!("median {} vs {} = {frac:.4}× (need ≤ {SEARCH_FRACTION}×)", os.median, bs.median),
    );
    let ratio = match (ours.ratio, base.ratio) {
        (Some(o), Some(b)) => Check::new(
            format!("{scenario}: path ratio {} vs {}", ours.variant, base.variant),
            o.median <= b.median - RATIO_MARGIN,
            format!("median {:.4} vs {:.4} (need ≤ baseline − {RATIO_MARGIN})", o.median, b.median),
        ),
        _ => Check::new(format!("{scenario}: path ratio"), false, "no successful legs"),
    };
    vec![search, ratio]
}

/// Mean of per-run ratios, weighted equally over the given summaries.
pub fn near_optimal(label: &str, summaries: &[&VariantSummary]) -> Check {
    let means: Vec<f64> = summaries.iter().filter_map(|s| s.ratio.map(|r| r.mean)).collect();
    if means.len() != summaries.len() || means.is_empty() {
        return Check::new(format!("{label}: near-optimality"), false, "missing successful runs");
    }
    let mean = means.iter().sum::<f64>() / means.len() as f64;
    Check::new(
        format!("{label}: near-optimality"),
        mean <= NEAR_OPTIMAL,
        format!("mean ratio {mean:.4} (need ≤ {NEAR_OPTIMAL})"),
    )
}

pub fn geodesic_bound(scenario: &str, geodesic: &VariantSummary, diffusion: &VariantSummary) -> Check {
    match (geodesic.ratio, diffusion.ratio) {
        (Some(g), Some(d)) => Check::new(
            format!("{scenario}: {} ratio vs {}", geodesic.variant, diffusion.variant),
            g.mean <= d.mean + GEODESIC_SLACK,
            format!("mean {:.4} vs {:.4} (need ≤ +{GEODESIC_SLACK})", g.mean, d.mean),
        ),
        _ => Check::new(format!("{scenario}: geodesic bound"), false, "missing successful runs"),
    }
}

/// The requested checks that the available variants allow.
pub fn evaluate(scenario: &str, kinds: &[CheckKind], rows: &[LegRow], summaries: &[VariantSummary]) -> Vec<Check> {
    let get = |n: &str| summaries.iter().find(|s| s.variant == n);
    let mut out = Vec::new();
    for kind in kinds {
        match kind {
            CheckKind::LowerBound => out.push(lower_bound(rows)),
            CheckKind::Direction => {
                if let (Some(d), Some(b)) = (get("am-rrt-d"), get("rt-rrt")) {
                    out.extend(direction(scenario, d, b));
                }
            }
            CheckKind::NearOptimal => {
                if let Some(d) = get("am-rrt-d") {
                    out.push(near_optimal(scenario, &[d]));
                }
            }
            CheckKind::GeodesicBound => {
                if let (Some(g), Some(d)) = (get("am-rrt-g"), get("am-rrt-d")) {
                    out.push(geodesic_bound(scenario, g, d));
                }
            }
        }
    }
    out
}
