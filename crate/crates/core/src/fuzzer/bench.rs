//! Time-to-bug sweep over SimpleState thresholds.

use std::fmt::Write as _;

use serde::Serialize;

use super::config::{CampaignConfig, Mode};
use super::target::Target;
use super::{run_campaign, StopReason};
use crate::targets::Builtin;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchPlan {
    pub thresholds: Vec<u64>,
    pub modes: Vec<Mode>,
    pub seeds: u64,
    /// Per-run limits and knobs; `mode` and `seed` are overwritten per cell.
    pub base: CampaignConfig,
}

impl Default for BenchPlan {
    fn default() -> Self {
        BenchPlan {
            thresholds: vec![2, 4, 6, 8, 10],
            modes: vec![Mode::Full, Mode::BaselineSeq, Mode::Rand50, Mode::DfOnly],
            seeds: 10,
            base: CampaignConfig { wall_clock_budget: Some(60.0), iteration_budget: 10_000_000, ..Default::default() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    pub seed: u64,
    pub found: bool,
    pub iterations: u64,
    /// Time to bug, or time spent when the budget ran out.
    pub seconds: f64,
    pub reexec_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub mode: Mode,
    pub threshold: u64,
    pub runs: Vec<RunOutcome>,
}

/// Median where `None` stands for a run that never found the bug and sorts
/// above everything else. Even counts average the middle pair.
pub fn median(values: &[Option<f64>]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v: Vec<f64> = values.iter().map(|x| x.unwrap_or(f64::INFINITY)).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let m = if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 };
    m.is_finite().then_some(m)
}

impl Cell {
    pub fn median_seconds(&self) -> Option<f64> {
        median(&self.runs.iter().map(|r| r.found.then_some(r.seconds)).collect::<Vec<_>>())
    }

    pub fn median_iterations(&self) -> Option<f64> {
        median(&self.runs.iter().map(|r| r.found.then_some(r.iterations as f64)).collect::<Vec<_>>())
    }

    pub fn mean_reexec_fraction(&self) -> f64 {
        if self.runs.is_empty() {
            return 0.0;
        }
        self.runs.iter().map(|r| r.reexec_fraction).sum::<f64>() / self.runs.len() as f64
    }
}

pub fn run_cell(target: &Target, base: &CampaignConfig, mode: Mode, threshold: u64, seeds: u64) -> Cell {
    let runs = (0..seeds)
        .map(|seed| {
            let config = CampaignConfig { mode, seed, keep_going: false, ..base.clone() };
            let s = run_campaign(target.clone(), config).expect("bench configuration is valid");
            let found = s.stop == StopReason::BugFound;
            RunOutcome {
                seed,
                found,
                iterations: s.bugs.first().map_or(s.stats.iterations, |b| b.iterations_to_bug),
                seconds: s.bugs.first().map_or_else(|| s.telemetry_seconds(), |b| b.wall_time_to_bug),
                reexec_fraction: s.stats.reexec_fraction(),
            }
        })
        .collect();
    Cell { mode, threshold, runs }
}

/// Runs every (threshold, mode) cell; `progress` sees each finished cell.
pub fn run_bench(plan: &BenchPlan, mut progress: impl FnMut(&Cell)) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &t in &plan.thresholds {
        let target = Target::builtin(Builtin::SimpleState(t));
        for &mode in &plan.modes {
            let cell = run_cell(&target, &plan.base, mode, t, plan.seeds);
            progress(&cell);
            cells.push(cell);
        }
    }
    cells
}

fn fmt_cell(c: &Cell) -> String {
    match (c.median_seconds(), c.median_iterations()) {
        (Some(s), Some(i)) => format!("{s:.3}s/{i:.0}it"),
        _ => "timeout".into(),
    }
}

/// Plain-text table: one row per threshold, one column per mode, plus the
/// baseline's mean re-execution fraction.
pub fn render_table(plan: &BenchPlan, cells: &[Cell]) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:>4}", "T");
    for m in &plan.modes {
        let _ = write!(out, "  {:>20}", m.name());
    }
    let _ = writeln!(out, "  {:>14}", "baseline_reexec");
    for &t in &plan.thresholds {
        let _ = write!(out, "{t:>4}");
        for &m in &plan.modes {
            let cell = cells.iter().find(|c| c.threshold == t && c.mode == m);
            let _ = write!(out, "  {:>20}", cell.map_or_else(|| "-".into(), fmt_cell));
        }
        let reexec = cells.iter().find(|c| c.threshold == t && c.mode == Mode::BaselineSeq);
        let _ = writeln!(out, "  {:>14}", reexec.map_or_else(|| "-".into(), |c| format!("{:.3}", c.mean_reexec_fraction())));
    }
    out
}
