//! Browser bindings. Every export takes plain values and returns a JSON
//! string, so the page needs no generated types. Campaigns use the virtual
//! clock: `Instant` does not exist on wasm32-unknown-unknown.

use serde::Serialize;
use serde_json::json;
use snapfuzz::fuzzer::bench::median;
use snapfuzz::fuzzer::{run_campaign, CampaignConfig, ClockKind, Mode, StopReason, Target};
use snapfuzz::targets::{Abi, Builtin};
use snapfuzz::vm::Transaction;
use wasm_bindgen::prelude::wasm_bindgen;

/// Hard cap so one click cannot freeze the tab for long.
pub const MAX_ITERATIONS: u64 = 2_000_000;

fn target(source: &str, threshold: u32) -> Result<Target, String> {
    let name = source.trim();
    if let Ok(b) = name.parse::<Builtin>() {
        let b = match b {
            Builtin::SimpleState(_) => Builtin::SimpleState(u64::from(threshold.max(1))),
            b => b,
        };
        return Ok(Target::builtin(b));
    }
    Target::from_source("program", source).map_err(|e| e.to_string())
}

fn config(mode: Mode, seed: u64, iterations: u64) -> CampaignConfig {
    CampaignConfig {
        iteration_budget: iterations.min(MAX_ITERATIONS),
        wall_clock_budget: None,
        clock: ClockKind::Virtual,
        ..CampaignConfig::with_mode(mode, seed)
    }
}

fn call(abi: &Abi, tx: &Transaction) -> String {
    let name = abi.by_selector(tx.selector).map_or_else(|| format!("0x{:08x}", tx.selector), |f| f.name.clone());
    let args: Vec<String> = tx.args.iter().map(|a| a.to_string()).collect();
    format!("attacker{}.{}({})", tx.caller, name, args.join(", "))
}

fn error(msg: impl std::fmt::Display) -> String {
    json!({ "error": msg.to_string() }).to_string()
}

/// Assembler text of a built-in target.
#[wasm_bindgen]
pub fn builtin_source(name: &str, threshold: u32) -> String {
    match target(name, threshold) {
        Ok(t) => t.listing(),
        Err(e) => format!("; {e}\n"),
    }
}

/// Assembles `source` (or resolves a built-in name) and reports the ABI and
/// canonical listing.
#[wasm_bindgen]
pub fn inspect(source: &str, threshold: u32) -> String {
    match target(source, threshold) {
        Ok(t) => {
            let functions: Vec<_> = t
                .abi
                .functions()
                .iter()
                .map(|f| json!({ "name": f.name, "selector": format!("0x{:08x}", f.selector), "args": f.arg_kinds.len() }))
                .collect();
            json!({ "instructions": t.program.len(), "functions": functions, "listing": t.listing() }).to_string()
        }
        Err(e) => error(e),
    }
}

#[derive(Serialize)]
struct Point {
    iterations: u64,
    instr_cov: usize,
    corpus_cs: usize,
    votes: u64,
}

/// One campaign. Returns the stop reason, counters, a coverage curve and the
/// call sequence of every bug found.
#[wasm_bindgen]
pub fn fuzz(source: &str, threshold: u32, mode: &str, seed: u32, iterations: u32) -> String {
    let t = match target(source, threshold) {
        Ok(t) => t,
        Err(e) => return error(e),
    };
    let mode: Mode = match mode.parse() {
        Ok(m) => m,
        Err(e) => return error(e),
    };
    let s = match run_campaign(t.clone(), config(mode, u64::from(seed), u64::from(iterations))) {
        Ok(s) => s,
        Err(e) => return error(e),
    };
    let curve: Vec<Point> = s
        .telemetry
        .rows()
        .iter()
        .map(|r| Point { iterations: r.iterations, instr_cov: r.instr_cov, corpus_cs: r.corpus_cs, votes: r.votes })
        .collect();
    let bugs: Vec<_> = s
        .bugs
        .iter()
        .map(|b| {
            let calls: Vec<String> = b.full_sequence().iter().map(|tx| call(&t.abi, tx)).collect();
            json!({ "pc": b.bug_pc, "iteration": b.iterations_to_bug, "calls": calls })
        })
        .collect();
    json!({
        "stop": match s.stop { StopReason::BugFound => "bug", StopReason::BudgetExhausted => "budget" },
        "iterations": s.stats.iterations,
        "steps": s.stats.steps,
        "instr_cov": s.instr_cov,
        "coverable": s.coverable,
        "live_states": s.telemetry.rows().last().map_or(0, |r| r.corpus_cs),
        "reexec_fraction": s.stats.reexec_fraction(),
        "curve": curve,
        "bugs": bugs,
    })
    .to_string()
}

/// Median iterations to the SimpleState bug for each mode over `seeds`
/// seeds. `null` means the median run did not find it within the budget.
#[wasm_bindgen]
pub fn race(threshold: u32, seeds: u32, iterations: u32) -> String {
    let t = Builtin::SimpleState(u64::from(threshold.max(1)));
    let rows: Vec<_> = [Mode::Full, Mode::BaselineSeq, Mode::Rand50, Mode::DfOnly]
        .into_iter()
        .map(|mode| {
            let runs: Vec<Option<f64>> = (0..u64::from(seeds.max(1)))
                .map(|seed| {
                    let s = run_campaign(Target::builtin(t), config(mode, seed, u64::from(iterations)))
                        .expect("built-in targets are valid");
                    (s.stop == StopReason::BugFound).then_some(s.stats.iterations as f64)
                })
                .collect();
            json!({
                "mode": mode.name(),
                "found": runs.iter().filter(|r| r.is_some()).count(),
                "median_iterations": median(&runs),
            })
        })
        .collect();
    json!({ "threshold": threshold.max(1), "seeds": seeds.max(1), "rows": rows }).to_string()
}
