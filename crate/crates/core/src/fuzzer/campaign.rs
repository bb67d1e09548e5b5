//! The snapshot fuzzing loop.
//!
//! Each iteration draws `(s, t)` from the pair corpus, then either mutates
//! `t` or swaps `s` for an infant snapshot, executes, and decides
//! separately whether the pair and the resulting state are worth keeping.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{CampaignConfig, ConfigError, Mode};
use super::mutate::{mutate_tx, template};
use super::rng::{stream, Stream};
use super::target::{replay, Target};
use super::telemetry::{Clock, Telemetry, TelemetryRecord};
use crate::corpus::{EpochState, InfantCorpus, Insert, PairCorpus, StateId, GENESIS};
use crate::vm::{execute, Event, Status, Transaction};
use crate::waypoints::Waypoints;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub iterations: u64,
    pub non_revert: u64,
    pub steps: u64,
    /// Steps spent rebuilding already-seen states. Always 0 for snapshot modes.
    pub reexec_steps: u64,
    pub votes: u64,
    pub prunes: u64,
    pub prune_calls: u64,
    pub cs_insertions: u64,
    /// Admitted states whose storage was already in the infant corpus.
    pub cs_duplicates: u64,
    pub next_infant_calls: u64,
    pub unsound_reports: u64,
    /// Largest live infant count observed after an iteration's prune step.
    pub max_live_states: usize,
}

impl Stats {
    pub fn reexec_fraction(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.reexec_steps as f64 / self.steps as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BugReport {
    pub triggering_tx: Transaction,
    /// Snapshot the triggering call ran on; `None` for the sequence baseline.
    pub state_id: Option<StateId>,
    /// Calls leading from genesis to that snapshot.
    pub sequence: Vec<Transaction>,
    pub iterations_to_bug: u64,
    pub wall_time_to_bug: f64,
    pub bug_pc: usize,
}

impl BugReport {
    /// `sequence` followed by the triggering call.
    pub fn full_sequence(&self) -> Vec<Transaction> {
        let mut v = self.sequence.clone();
        v.push(self.triggering_tx.clone());
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StopReason {
    BugFound,
    BudgetExhausted,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub stop: StopReason,
    pub bugs: Vec<BugReport>,
    pub stats: Stats,
    pub telemetry: Telemetry,
    pub instr_cov: usize,
    pub coverable: usize,
}

impl RunSummary {
    /// Timestamp of the last telemetry row, in seconds.
    pub fn telemetry_seconds(&self) -> f64 {
        self.telemetry.rows().last().map_or(0.0, |r| r.timestamp_ms as f64 / 1000.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationOutcome {
    pub status: Status,
    pub state: StateId,
    pub tx: Transaction,
    pub swapped: bool,
    pub exec_interesting: bool,
    pub minimized: BTreeSet<usize>,
    pub admitted: Option<StateId>,
    pub bug: Option<BugReport>,
}

pub(crate) fn last_pc(events: &[Event]) -> usize {
    events
        .iter()
        .rev()
        .find_map(|e| match e {
            Event::Exec { pc } => Some(*pc),
            _ => None,
        })
        .unwrap_or(0)
}

pub struct Campaign {
    config: CampaignConfig,
    target: Target,
    infant: InfantCorpus,
    pairs: PairCorpus,
    waypoints: Waypoints,
    epoch: EpochState,
    sched: ChaCha8Rng,
    mutator: ChaCha8Rng,
    coin: ChaCha8Rng,
    clock: Clock,
    stats: Stats,
    telemetry: Telemetry,
    bugs: Vec<BugReport>,
    bug_pcs: BTreeSet<usize>,
    prune_backoff_until: u64,
}

/// Iterations to wait after a prune that could not get under the limit.
const PRUNE_BACKOFF: u64 = 10_000;

impl Campaign {
    /// Seeds the pair corpus with one zero-argument call per function, all
    /// on genesis.
    pub fn new(target: Target, config: CampaignConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        if target.abi.is_empty() {
            return Err(ConfigError::EmptyAbi);
        }
        let mut infant = InfantCorpus::new(target.genesis.clone());
        let mut pairs = PairCorpus::new();
        for f in target.abi.functions() {
            pairs.add(GENESIS, template(f));
            infant.retain_ref(GENESIS).expect("genesis is live");
        }
        Ok(Campaign {
            waypoints: Waypoints::new(&target.program, config.map_size, config.buckets),
            epoch: EpochState::new(config.epoch_len),
            sched: stream(config.seed, Stream::Scheduler),
            mutator: stream(config.seed, Stream::Mutator),
            coin: stream(config.seed, Stream::Coin),
            clock: Clock::start(config.clock),
            telemetry: Telemetry::new(config.telemetry_interval_ms, config.telemetry_interval_iters),
            stats: Stats::default(),
            bugs: Vec::new(),
            bug_pcs: BTreeSet::new(),
            prune_backoff_until: 0,
            infant,
            pairs,
            target,
            config,
        })
    }

    pub fn config(&self) -> &CampaignConfig {
        &self.config
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    pub fn infant(&self) -> &InfantCorpus {
        &self.infant
    }

    pub fn pairs(&self) -> &PairCorpus {
        &self.pairs
    }

    pub fn waypoints(&self) -> &Waypoints {
        &self.waypoints
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    pub fn bugs(&self) -> &[BugReport] {
        &self.bugs
    }

    pub fn telemetry(&self) -> &Telemetry {
        &self.telemetry
    }

    pub fn fuzz_iteration(&mut self) -> IterationOutcome {
        let mode = self.config.mode;
        self.stats.iterations += 1;
        let pair = self.pairs.next(&mut self.sched).clone();
        let swapped = self.coin.random_bool(self.config.p_state_swap);
        let (state, tx) = if swapped {
            self.stats.next_infant_calls += 1;
            (self.infant.next_infant(&mut self.sched, &mut self.epoch), pair.tx)
        } else {
            let t = mutate_tx(&pair.tx, &self.target.abi, &mut self.mutator, self.config.attacker_pool);
            (pair.state_id, t)
        };

        let snapshot = self.infant.get(state).expect("scheduled state is live");
        let result = execute(&snapshot.storage, &tx, &self.target.program, self.config.step_limit);
        self.stats.steps += result.steps;

        let dataflow = matches!(mode, Mode::Full | Mode::DfOnly);
        let verdict = self.waypoints.evaluate(&result.events, dataflow);
        if verdict.exec_interesting {
            self.pairs.add(state, tx.clone());
            self.infant.retain_ref(state).expect("scheduled state is live");
        }
        if mode.votes() && !verdict.minimized.is_empty() && self.infant.vote(state) {
            self.stats.votes += 1;
        }

        let mut admitted = None;
        let mut bug = None;
        match result.status {
            Status::Stop => {
                self.stats.non_revert += 1;
                let keep = match mode {
                    Mode::Full => verdict.df_interesting || !verdict.minimized.is_empty(),
                    Mode::DfOnly => verdict.df_interesting,
                    Mode::Rand50 => self.coin.random_bool(0.5),
                    Mode::BaselineSeq => unreachable!("baseline runs in its own engine"),
                };
                if keep {
                    let ins = self.infant.add_infant(result.new_storage, state, tx.clone()).expect("parent is live");
                    match ins {
                        Insert::New(id) => {
                            self.stats.cs_insertions += 1;
                            admitted = Some(id);
                        }
                        Insert::Duplicate(_) => self.stats.cs_duplicates += 1,
                    }
                }
            }
            Status::Bug => {
                self.stats.non_revert += 1;
                bug = self.report_bug(state, tx.clone(), last_pc(&result.events));
            }
            Status::Revert | Status::StepLimit => {}
        }

        self.maybe_prune();
        self.stats.max_live_states = self.stats.max_live_states.max(self.infant.len());
        IterationOutcome {
            status: result.status,
            state,
            tx,
            swapped,
            exec_interesting: verdict.exec_interesting,
            minimized: verdict.minimized,
            admitted,
            bug,
        }
    }

    fn maybe_prune(&mut self) {
        let c = &self.config;
        if self.infant.len() <= c.max_states || self.stats.iterations < self.prune_backoff_until {
            return;
        }
        let removed = match c.mode {
            Mode::Full | Mode::Rand50 if c.prune => self.infant.prune(c.prune_batch, c.visit_floor),
            Mode::DfOnly if c.df_fifo_prune => self.infant.prune_fifo(c.prune_batch, c.visit_floor),
            _ => return,
        };
        self.stats.prune_calls += 1;
        self.stats.prunes += removed.len() as u64;
        if self.infant.len() > c.max_states {
            self.prune_backoff_until = self.stats.iterations + PRUNE_BACKOFF;
        }
    }

    fn report_bug(&mut self, state: StateId, tx: Transaction, bug_pc: usize) -> Option<BugReport> {
        if !self.bug_pcs.insert(bug_pc) {
            return None;
        }
        let sequence = self.infant.reconstruct_sequence(state).expect("live snapshot has a lineage");
        let report = BugReport {
            triggering_tx: tx,
            state_id: Some(state),
            sequence,
            iterations_to_bug: self.stats.iterations,
            wall_time_to_bug: self.clock.now_secs(self.stats.steps),
            bug_pc,
        };
        let (trace, _) = replay(&self.target, &report.full_sequence(), self.config.step_limit);
        if trace.last().map(|s| s.status) != Some(Status::Bug) {
            self.stats.unsound_reports += 1;
            self.bug_pcs.remove(&bug_pc);
            return None;
        }
        self.infant.pin(state).expect("live snapshot");
        self.bugs.push(report.clone());
        Some(report)
    }

    fn record(&self, timestamp_ms: u64) -> TelemetryRecord {
        TelemetryRecord {
            timestamp_ms,
            iterations: self.stats.iterations,
            instr_cov: self.waypoints.coverage.instr_count(),
            edge_cov: self.waypoints.coverage.edge_count(),
            corpus_c: self.pairs.len(),
            corpus_cs: self.infant.len(),
            votes: self.stats.votes,
            prunes: self.stats.prunes,
            reexec_fraction: self.stats.reexec_fraction(),
            non_revert: self.stats.non_revert,
        }
    }

    fn budget_left(&self) -> bool {
        if self.stats.iterations >= self.config.iteration_budget {
            return false;
        }
        match self.config.wall_clock_budget {
            Some(secs) => self.clock.now_secs(self.stats.steps) < secs,
            None => true,
        }
    }

    /// Iterates until the first bug (unless `keep_going`) or the budget ends.
    pub fn run(&mut self) -> RunSummary {
        let mut stop = StopReason::BudgetExhausted;
        while self.budget_left() {
            let prev_cov = self.waypoints.coverage.instr_count();
            let out = self.fuzz_iteration();
            debug_assert!(self.waypoints.coverage.instr_count() >= prev_cov);
            let now = self.clock.now_ms(self.stats.steps);
            if self.telemetry.due(now, self.stats.iterations) {
                let rec = self.record(now);
                self.telemetry.push(rec);
            }
            if out.bug.is_some() && !self.config.keep_going {
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
            instr_cov: self.waypoints.coverage.instr_count(),
            coverable: self.target.program.coverable_count(),
        }
    }
}
