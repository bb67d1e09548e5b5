use std::io::{self, Write};
use std::time::Instant;

use super::config::ClockKind;

/// Executed VM steps per virtual millisecond.
pub const VIRTUAL_STEPS_PER_MS: u64 = 20_000;

pub const CSV_HEADER: &str =
    "timestamp_ms,iterations,instr_cov,edge_cov,corpus_C,corpus_Cs,votes,prunes,reexec_fraction";

#[derive(Debug, Clone)]
pub struct Clock {
    kind: ClockKind,
    // Unset for virtual clocks, so they also run where `Instant` is unavailable.
    start: Option<Instant>,
}

impl Clock {
    pub fn start(kind: ClockKind) -> Self {
        Clock { kind, start: (kind == ClockKind::Wall).then(Instant::now) }
    }

    pub fn kind(&self) -> ClockKind {
        self.kind
    }

    fn wall(&self) -> std::time::Duration {
        self.start.expect("wall clock started").elapsed()
    }

    pub fn now_ms(&self, steps: u64) -> u64 {
        match self.kind {
            ClockKind::Wall => self.wall().as_millis() as u64,
            ClockKind::Virtual => steps / VIRTUAL_STEPS_PER_MS,
        }
    }

    pub fn now_secs(&self, steps: u64) -> f64 {
        match self.kind {
            ClockKind::Wall => self.wall().as_secs_f64(),
            ClockKind::Virtual => steps as f64 / (VIRTUAL_STEPS_PER_MS as f64 * 1000.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TelemetryRecord {
    pub timestamp_ms: u64,
    pub iterations: u64,
    pub instr_cov: usize,
    pub edge_cov: usize,
    pub corpus_c: usize,
    pub corpus_cs: usize,
    pub votes: u64,
    pub prunes: u64,
    pub reexec_fraction: f64,
    /// Not part of the CSV.
    pub non_revert: u64,
}

/// Rows every `interval_ms` or `interval_iters`, whichever comes first.
#[derive(Debug, Clone)]
pub struct Telemetry {
    rows: Vec<TelemetryRecord>,
    interval_ms: u64,
    interval_iters: u64,
    last_ms: u64,
    last_iters: u64,
}

impl Telemetry {
    pub fn new(interval_ms: u64, interval_iters: u64) -> Self {
        Telemetry { rows: Vec::new(), interval_ms, interval_iters: interval_iters.max(1), last_ms: 0, last_iters: 0 }
    }

    pub fn due(&self, now_ms: u64, iterations: u64) -> bool {
        let time_due = now_ms >= self.last_ms + self.interval_ms;
        let iter_due = iterations >= self.last_iters + self.interval_iters;
        // Rows never share a timestamp.
        (time_due || iter_due) && now_ms > self.last_ms_emitted()
    }

    fn last_ms_emitted(&self) -> u64 {
        self.rows.last().map_or(0, |r| r.timestamp_ms)
    }

    pub fn push(&mut self, rec: TelemetryRecord) {
        self.last_ms = rec.timestamp_ms;
        self.last_iters = rec.iterations;
        self.rows.push(rec);
    }

    /// Closing row; replaces the last one when the clock has not advanced.
    pub fn finish(&mut self, rec: TelemetryRecord) {
        if rec.iterations == 0 || self.rows.last().is_some_and(|r| r.iterations == rec.iterations) {
            return;
        }
        if let Some(last) = self.rows.last_mut() {
            if rec.timestamp_ms <= last.timestamp_ms {
                *last = TelemetryRecord { timestamp_ms: last.timestamp_ms, ..rec };
                return;
            }
        }
        self.push(rec);
    }

    pub fn rows(&self) -> &[TelemetryRecord] {
        &self.rows
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{:.6}",
                r.timestamp_ms,
                r.iterations,
                r.instr_cov,
                r.edge_cov,
                r.corpus_c,
                r.corpus_cs,
                r.votes,
                r.prunes,
                r.reexec_fraction
            )?;
        }
        Ok(())
    }
}
