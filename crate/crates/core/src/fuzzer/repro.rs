//! Self-contained bug reproductions.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::campaign::BugReport;
use super::config::CampaignConfig;
use super::target::{replay, Target};
pub use crate::targets::GenesisSlot;
use crate::targets::AsmError;
use crate::vm::{Status, Storage, StorageDigest, Transaction};

pub const REPRO_FORMAT: &str = "snapfuzz-repro";
pub const REPRO_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReproStep {
    /// ABI name of the called function, for readers.
    pub function: String,
    pub tx: Transaction,
    pub status: Status,
    /// Storage digest after the call.
    pub digest: StorageDigest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproFile {
    pub format: String,
    pub version: u32,
    /// Built-in name or source path the campaign was given.
    pub target: String,
    /// Assembler listing of the program and ABI.
    pub program: String,
    pub genesis: Vec<GenesisSlot>,
    pub steps: Vec<ReproStep>,
    pub expected_status: Status,
    pub config: CampaignConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum ReproError {
    #[error("not a repro file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported repro format `{format}` version {version}")]
    Version { format: String, version: u32 },
    #[error("embedded program: {0}")]
    Program(#[from] AsmError),
    #[error("repro has no steps")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Match,
    /// First step whose status or post-state digest differs from the record;
    /// `index == steps.len()` flags a missing final step.
    Mismatch { index: usize, detail: String },
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Match => f.write_str("match"),
            Verdict::Mismatch { index, detail } => write!(f, "mismatch at step {index}: {detail}"),
        }
    }
}

impl ReproFile {
    /// Records the report's full sequence by replaying it on `target`.
    pub fn from_report(target: &Target, report: &BugReport, config: &CampaignConfig) -> Self {
        let txs = report.full_sequence();
        let (trace, _) = replay(target, &txs, config.step_limit);
        let steps = txs
            .into_iter()
            .zip(trace)
            .map(|(tx, r)| ReproStep {
                function: target.abi.by_selector(tx.selector).map_or_else(|| "?".into(), |f| f.name.clone()),
                tx,
                status: r.status,
                digest: r.digest,
            })
            .collect();
        ReproFile {
            format: REPRO_FORMAT.into(),
            version: REPRO_VERSION,
            target: target.name.clone(),
            program: target.listing(),
            genesis: target.genesis.iter().map(|(k, v)| GenesisSlot { slot: *k, value: *v }).collect(),
            steps,
            expected_status: Status::Bug,
            config: config.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("repro serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ReproError> {
        let r: ReproFile = serde_json::from_str(text)?;
        if r.format != REPRO_FORMAT || r.version != REPRO_VERSION {
            return Err(ReproError::Version { format: r.format, version: r.version });
        }
        Ok(r)
    }

    pub fn transactions(&self) -> Vec<Transaction> {
        self.steps.iter().map(|s| s.tx.clone()).collect()
    }

    /// Program, ABI and genesis as recorded.
    pub fn target(&self) -> Result<Target, ReproError> {
        let mut t = Target::from_source(self.target.clone(), &self.program)?;
        t.genesis = self.genesis.iter().map(|g| (g.slot, g.value)).collect::<Storage>();
        Ok(t)
    }

    /// Re-executes the calls from genesis and compares every step.
    pub fn replay(&self) -> Result<Verdict, ReproError> {
        if self.steps.is_empty() {
            return Err(ReproError::Empty);
        }
        let target = self.target()?;
        let (trace, _) = replay(&target, &self.transactions(), self.config.step_limit);
        for (i, (want, got)) in self.steps.iter().zip(&trace).enumerate() {
            if want.digest != got.digest {
                let detail = format!("storage digest {} != recorded {}", got.digest, want.digest);
                return Ok(Verdict::Mismatch { index: i, detail });
            }
            if want.status != got.status {
                let detail = format!("status {} != recorded {}", got.status, want.status);
                return Ok(Verdict::Mismatch { index: i, detail });
            }
        }
        let last = self.steps.len() - 1;
        let got = trace[last].status;
        if got != self.expected_status {
            let detail = format!("final status {got} != expected {}", self.expected_status);
            return Ok(Verdict::Mismatch { index: last, detail });
        }
        Ok(Verdict::Match)
    }
}
