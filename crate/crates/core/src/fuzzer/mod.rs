//! Campaign drivers: the snapshot fuzzer, the sequence baseline, replay
//! artifacts and the time-to-bug benchmark.

pub mod baseline;
pub mod bench;
pub mod campaign;
pub mod config;
pub mod mutate;
pub mod repro;
pub mod rng;
pub mod target;
pub mod telemetry;

pub use baseline::{evaluate_sequence, BaselineCampaign, SeqEval};
pub use campaign::{BugReport, Campaign, IterationOutcome, RunSummary, Stats, StopReason};
pub use repro::{ReproError, ReproFile, Verdict};
pub use config::{CampaignConfig, ClockKind, ConfigError, Mode};
pub use target::{replay, replay_from, ReplayStep, Target};
pub use telemetry::{Telemetry, TelemetryRecord, CSV_HEADER};

/// Runs one campaign in whichever engine `config.mode` selects.
pub fn run_campaign(target: Target, config: CampaignConfig) -> Result<RunSummary, ConfigError> {
    Ok(match config.mode {
        Mode::BaselineSeq => BaselineCampaign::new(target, config)?.run(),
        _ => Campaign::new(target, config)?.run(),
    })
}
