//! Per-leg rows, aggregates and the CSV/JSON artifacts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::BenchError;

/// Bumped whenever a column or summary field changes meaning.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LegStatus {
    Ok,
    /// No goal path within the step cap.
    NoPath,
    /// A goal path was found but the agent did not reach the goal in time.
    NotArrived,
}

/// One goal leg of one (variant, seed) tour.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LegRow {
    pub scenario: String,
    pub variant: String,
    pub seed: u64,
    /// 1-based.
    pub leg: usize,
    pub status: LegStatus,
    /// Expansion attempts in deterministic mode, seconds in wall-clock mode.
    /// Legs without a path report the effort spent before the cap.
    pub search_time: f64,
    pub path_length: f64,
    pub optimal_length: f64,
    pub ratio: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
}

impl Stat {
    /// `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
        Some(Stat { n, mean: v.iter().sum::<f64>() / n as f64, median })
    }
}

/// Aggregates for one variant. Run-level values come first: a run's search
/// time is the sum over its legs, its ratio the mean over its successful
/// legs. Mean and median are then taken over runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub variant: String,
    pub runs: usize,
    pub legs: usize,
    pub failed_legs: usize,
    pub search_time: Option<Stat>,
    pub ratio: Option<Stat>,
    /// Mean ratio over every successful leg, pooled.
    pub leg_ratio_mean: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub scenario: String,
    pub mode: String,
    pub variants: Vec<VariantSummary>,
    /// Metric construction seconds, by metric name.
    pub preprocessing: BTreeMap<String, f64>,
}

impl Summary {
    pub fn variant(&self, name: &str) -> Option<&VariantSummary> {
        self.variants.iter().find(|v| v.variant == name)
    }
}

/// Groups rows by variant in order of first appearance.
pub fn summarize(rows: &[LegRow]) -> Vec<VariantSummary> {
    let mut order: Vec<&str> = Vec::new();
    for r in rows {
        if !order.contains(&r.variant.as_str()) {
            order.push(&r.variant);
        }
    }
    order
        .into_iter()
        .map(|name| {
            let mine: Vec<&LegRow> = rows.iter().filter(|r| r.variant == name).collect();
            let mut runs: BTreeMap<u64, Vec<&LegRow>> = BTreeMap::new();
            for r in &mine {
                runs.entry(r.seed).or_default().push(r);
            }
            let search: Vec<f64> = runs.values().map(|legs| legs.iter().map(|r| r.search_time).sum()).collect();
            let ratios: Vec<f64> = runs
                .values()
                .filter_map(|legs| {
                    let ok: Vec<f64> = legs.iter().filter(|r| r.status == LegStatus::Ok).map(|r| r.ratio).collect();
                    (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64)
                })
                .collect();
            let ok: Vec<f64> = mine.iter().filter(|r| r.status == LegStatus::Ok).map(|r| r.ratio).collect();
            VariantSummary {
                variant: name.to_string(),
                runs: runs.len(),
                legs: mine.len(),
                failed_legs: mine.len() - ok.len(),
                search_time: Stat::of(&search),
                ratio: Stat::of(&ratios),
                leg_ratio_mean: (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64),
            }
        })
        .collect()
}

/// CSV with a header and one line per row.
pub fn write_csv<W: std::io::Write>(rows: &[LegRow], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| BenchError::Io("csv".into(), e))?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<LegRow>, BenchError> {
    let mut rd = csv::Reader::from_reader(input);
    Ok(rd.deserialize().collect::<Result<Vec<LegRow>, _>>()?)
}

/// Writes `<dir>/<scenario>.csv` and `<dir>/<scenario>.summary.json`;
/// returns both paths.
pub fn emit_report(rows: &[LegRow], summary: &Summary, dir: &Path) -> Result<(PathBuf, PathBuf), BenchError> {
    if rows.is_empty() {
        return Err(BenchError::NoRows);
    }
    let io = |p: &Path, e| BenchError::Io(p.display().to_string(), e);
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let csv_path = dir.join(format!("{}.csv", summary.scenario));
    let file = std::fs::File::create(&csv_path).map_err(|e| io(&csv_path, e))?;
    write_csv(rows, std::io::BufWriter::new(file))?;
    let json_path = dir.join(format!("{}.summary.json", summary.scenario));
    let text = serde_json::to_string_pretty(summary)?;
    std::fs::write(&json_path, text + "\n").map_err(|e| io(&json_path, e))?;
    Ok((csv_path, json_path))
}
