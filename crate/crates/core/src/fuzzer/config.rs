use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::vm::DEFAULT_STEP_LIMIT;
use crate::waypoints::{BucketPlan, MAP_SIZE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Dataflow + comparison waypoints, voting and vote pruning.
    Full,
    /// Dataflow waypoint only; no votes.
    DfOnly,
    /// States admitted on a fair coin.
    Rand50,
    /// Sequence corpus replayed from genesis every evaluation.
    BaselineSeq,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Full, Mode::DfOnly, Mode::Rand50, Mode::BaselineSeq];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Full => "full",
            Mode::DfOnly => "df_only",
            Mode::Rand50 => "rand50",
            Mode::BaselineSeq => "baseline_seq",
        }
    }

    pub fn votes(self) -> bool {
        matches!(self, Mode::Full)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Mode::Full),
            "df_only" | "df" => Ok(Mode::DfOnly),
            "rand50" | "rand" => Ok(Mode::Rand50),
            "baseline_seq" | "baseline" => Ok(Mode::BaselineSeq),
            _ => Err(format!("unknown mode `{s}` (full|df_only|rand50|baseline_seq)")),
        }
    }
}

/// Source of telemetry timestamps and of the wall-clock budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ClockKind {
    #[default]
    Wall,
    /// Milliseconds derived from executed VM steps; makes every artifact a
    /// pure function of the configuration.
    Virtual,
}

impl FromStr for ClockKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wall" => Ok(ClockKind::Wall),
            "virtual" => Ok(ClockKind::Virtual),
            _ => Err(format!("unknown clock `{s}` (wall|virtual)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub mode: Mode,
    /// Probability of swapping the state instead of mutating the transaction.
    pub p_state_swap: f64,
    pub seed: u64,
    pub iteration_budget: u64,
    /// Seconds; `None` means unbounded.
    pub wall_clock_budget: Option<f64>,
    pub clock: ClockKind,
    pub map_size: usize,
    pub buckets: BucketPlan,
    /// `N`: live snapshot count that triggers pruning.
    pub max_states: usize,
    /// `M`: snapshots dropped per prune.
    pub prune_batch: usize,
    /// `O`: only snapshots with more visits than this are prunable.
    pub visit_floor: u64,
    pub prune: bool,
    /// FIFO eviction for `df_only` once over `max_states`.
    pub df_fifo_prune: bool,
    pub epoch_len: u64,
    pub step_limit: u64,
    pub attacker_pool: u8,
    pub keep_going: bool,
    pub baseline_max_len: usize,
    pub telemetry_interval_ms: u64,
    pub telemetry_interval_iters: u64,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            mode: Mode::Full,
            p_state_swap: 0.5,
            seed: 0,
            iteration_budget: u64::MAX,
            wall_clock_budget: None,
            clock: ClockKind::Wall,
            map_size: MAP_SIZE,
            buckets: BucketPlan::Bytelen,
            max_states: 4096,
            prune_batch: 1024,
            visit_floor: 20,
            prune: true,
            df_fifo_prune: false,
            epoch_len: 1000,
            step_limit: DEFAULT_STEP_LIMIT,
            attacker_pool: 3,
            keep_going: false,
            baseline_max_len: 32,
            telemetry_interval_ms: 100,
            telemetry_interval_iters: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("p_state_swap {0} outside [0, 1]")]
    Probability(f64),
    #[error("wall-clock budget must be positive")]
    WallBudget,
    #[error("{0} must be positive")]
    Zero(&'static str),
    #[error("target has an empty ABI")]
    EmptyAbi,
}

impl CampaignConfig {
    pub fn with_mode(mode: Mode, seed: u64) -> Self {
        CampaignConfig { mode, seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.p_state_swap) {
            return Err(ConfigError::Probability(self.p_state_swap));
        }
        if matches!(self.wall_clock_budget, Some(s) if s.is_nan() || s <= 0.0) {
            return Err(ConfigError::WallBudget);
        }
        let positive = [
            ("map_size", self.map_size as u64),
            ("max_states", self.max_states as u64),
            ("epoch_len", self.epoch_len),
            ("step_limit", self.step_limit),
            ("attacker_pool", self.attacker_pool as u64),
            ("baseline_max_len", self.baseline_max_len as u64),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(ConfigError::Zero(name));
            }
        }
        Ok(())
    }
}
