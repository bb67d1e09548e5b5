//! Sequence-corpus fuzzer that replays every candidate from genesis.

use std::collections::HashSet;
use std::hash::{DefaultHasher, Hash, Hasher};

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::campaign::{last_pc, BugReport, RunSummary, Stats, StopReason};
use super::config::{CampaignConfig, ConfigError, Mode};
use super::mutate::{mutate_tx, template};
use super::rng::{stream, Stream};
use super::target::Target;
use super::telemetry::{Clock, Telemetry, TelemetryRecord};
use crate::vm::{execute, Status, StorageDigest, Transaction};
use crate::waypoints::CoverageMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SeqOp {
    Append,
    Modify,
    Delete,
    Duplicate,
}

const SEQ_OPS: [SeqOp; 4] = [SeqOp::Append, SeqOp::Modify, SeqOp::Delete, SeqOp::Duplicate];

/// Hashes of executed `(pre-state digest, call)` pairs.
///
/// Stops growing at `cap` entries; later first-time pairs then count as
/// exploration, so the tally can only err low.
#[derive(Debug, Clone)]
pub struct SeenPairs {
    set: HashSet<u64>,
    cap: usize,
}

/// Entry limit of the seen-pair set used by campaigns (about 0.5 GB).
pub const SEEN_PAIRS_CAP: usize = 1 << 25;

impl SeenPairs {
    pub fn new(cap: usize) -> Self {
        SeenPairs { set: HashSet::new(), cap }
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }

    /// True if the pair was executed before; records it otherwise.
    pub fn check(&mut self, state: &StorageDigest, tx: &Transaction) -> bool {
        let mut h = DefaultHasher::new();
        state.hash(&mut h);
        tx.hash(&mut h);
        let key = h.finish();
        if self.set.contains(&key) {
            return true;
        }
        if self.set.len() < self.cap {
            self.set.insert(key);
        }
        false
    }
}

/// Outcome of running one sequence from genesis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeqEval {
    pub steps: u64,
    /// Steps of calls whose `(state, call)` pair had been executed before.
    pub reexec_steps: u64,
    pub non_revert: u64,
    pub new_coverage: usize,
    /// Index and pc of the first call that hit `BUG`.
    pub bug: Option<(usize, usize)>,
}

/// Runs `seq` from `target`'s genesis and stops at the first `BUG`.
pub fn evaluate_sequence(
    target: &Target,
    seq: &[Transaction],
    seen: &mut SeenPairs,
    coverage: &mut CoverageMap,
    step_limit: u64,
) -> SeqEval {
    let mut cur = target.genesis.clone();
    let mut digest = cur.digest();
    let mut ev = SeqEval { steps: 0, reexec_steps: 0, non_revert: 0, new_coverage: 0, bug: None };
    for (i, tx) in seq.iter().enumerate() {
        let r = execute(&cur, tx, &target.program, step_limit);
        ev.steps += r.steps;
        if seen.check(&digest, tx) {
            ev.reexec_steps += r.steps;
        }
        ev.new_coverage += coverage.observe(&r.events);
        if r.status.commits() {
            ev.non_revert += 1;
        }
        if r.status == Status::Bug {
            ev.bug = Some((i, last_pc(&r.events)));
            break;
        }
        if r.new_storage != cur {
            cur = r.new_storage;
            digest = cur.digest();
        }
    }
    ev
}

pub struct BaselineCampaign {
    config: CampaignConfig,
    target: Target,
    corpus: Vec<Vec<Transaction>>,
    coverage: CoverageMap,
    seen: SeenPairs,
    sched: ChaCha8Rng,
    mutator: ChaCha8Rng,
    clock: Clock,
    stats: Stats,
    telemetry: Telemetry,
    bugs: Vec<BugReport>,
    bug_pcs: std::collections::BTreeSet<usize>,
}

impl BaselineCampaign {
    /// Seeds one single-call sequence per ABI function.
    pub fn new(target: Target, config: CampaignConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        if target.abi.is_empty() {
            return Err(ConfigError::EmptyAbi);
        }
        let corpus = target.abi.functions().iter().map(|f| vec![template(f)]).collect();
        Ok(BaselineCampaign {
            coverage: CoverageMap::new(&target.program, config.map_size),
            seen: SeenPairs::new(SEEN_PAIRS_CAP),
            sched: stream(config.seed, Stream::Scheduler),
            mutator: stream(config.seed, Stream::Mutator),
            clock: Clock::start(config.clock),
            telemetry: Telemetry::new(config.telemetry_interval_ms, config.telemetry_interval_iters),
            stats: Stats::default(),
            bugs: Vec::new(),
            bug_pcs: Default::default(),
            corpus,
            target,
            config: CampaignConfig { mode: Mode::BaselineSeq, ..config },
        })
    }

    pub fn corpus(&self) -> &[Vec<Transaction>] {
        &self.corpus
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    pub fn config(&self) -> &CampaignConfig {
        &self.config
    }

    /// Applies 1 to 4 stacked edits, each appending, modifying, deleting or
    /// duplicating one call.
    fn mutate_seq(&mut self, seq: &[Transaction]) -> Vec<Transaction> {
        let rng = &mut self.mutator;
        let abi = &self.target.abi;
        let pool = self.config.attacker_pool;
        let cap = self.config.baseline_max_len;
        let mut out = seq.to_vec();
        for _ in 0..rng.random_range(1..=4) {
            let mut op = *SEQ_OPS.choose(rng).expect("non-empty");
            if (out.len() >= cap && matches!(op, SeqOp::Append | SeqOp::Duplicate)) || (op == SeqOp::Delete && out.len() <= 1) {
                op = SeqOp::Modify;
            }
            let i = rng.random_range(0..out.len());
            match op {
                SeqOp::Append => {
                    let f = abi.functions().choose(rng).expect("ABI non-empty");
                    out.push(mutate_tx(&template(f), abi, rng, pool));
                }
                SeqOp::Modify => out[i] = mutate_tx(&out[i], abi, rng, pool),
                SeqOp::Delete => {
                    out.remove(i);
                }
                SeqOp::Duplicate => out.insert(i + 1, out[i].clone()),
            }
        }
        out
    }

    /// One evaluation: pick, edit, replay from genesis, keep on new coverage.
    pub fn iteration(&mut self) -> Option<BugReport> {
        self.stats.iterations += 1;
        let parent = self.corpus.choose(&mut self.sched).expect("corpus seeded").clone();
        let seq = self.mutate_seq(&parent);
        let ev = evaluate_sequence(&self.target, &seq, &mut self.seen, &mut self.coverage, self.config.step_limit);
        self.stats.steps += ev.steps;
        self.stats.reexec_steps += ev.reexec_steps;
        self.stats.non_revert += ev.non_revert;
        if ev.new_coverage > 0 {
            self.corpus.push(seq.clone());
        }
        let (i, pc) = ev.bug?;
        if !self.bug_pcs.insert(pc) {
            return None;
        }
        let report = BugReport {
            triggering_tx: seq[i].clone(),
            state_id: None,
            sequence: seq[..i].to_vec(),
            iterations_to_bug: self.stats.iterations,
            wall_time_to_bug: self.clock.now_secs(self.stats.steps),
            bug_pc: pc,
        };
        self.bugs.push(report.clone());
        Some(report)
    }

    fn record(&self, timestamp_ms: u64) -> TelemetryRecord {
        TelemetryRecord {
            timestamp_ms,
            iterations: self.stats.iterations,
            instr_cov: self.coverage.instr_count(),
            edge_cov: self.coverage.edge_count(),
            corpus_c: self.corpus.len(),
            corpus_cs: 0,
            votes: 0,
            prunes: 0,
            reexec_fraction: self.stats.reexec_fraction(),
            non_revert: self.stats.non_revert,
        }
    }

    fn budget_left(&self) -> bool {
        self.stats.iterations < self.config.iteration_budget
            && self.config.wall_clock_budget.is_none_or(|s| self.clock.now_secs(self.stats.steps) < s)
    }

    pub fn run(&mut self) -> RunSummary {
        let mut stop = StopReason::BudgetExhausted;
        while self.budget_left() {
            let bug = self.iteration();
            let now = self.clock.now_ms(self.stats.steps);
            if self.telemetry.due(now, self.stats.iterations) {
                let rec = self.record(now);
                self.telemetry.push(rec);
            }
            if bug.is_some() && !self.config.keep_going {
                stop = StopReason::BugFound;
                break;
            }
        }
        let rec = self.record(self.clock.now_ms(self.stats.steps));
        self.telemetry.finish(rec);
        RunSummary {
            stop,
            bugs: self.bugs.clone(),
            stats: self.stats.clone(),
            telemetry: self.telemetry.clone(),
            instr_cov: self.coverage.instr_count(),
            coverable: self.target.program.coverable_count(),
        }
    }
}
