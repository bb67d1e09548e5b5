use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use snapfuzz::fuzzer::{CampaignConfig, ClockKind, Mode};
use snapfuzz::waypoints::BucketPlan;

/// Snapshot-based stateful fuzzer for a small storage-bearing stack VM.
///
/// Every flag can also be set through the environment variable shown in
/// its help text.
#[derive(Debug, Parser)]
#[command(name = "snapfuzz", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one campaign; writes telemetry, ReproFiles and a summary.
    Fuzz(FuzzArgs),
    /// Re-execute a ReproFile from genesis and compare every step.
    Replay(ReplayArgs),
    /// Time-to-bug sweep over SimpleState thresholds.
    Bench(BenchArgs),
    /// Assemble, disassemble or print built-in targets.
    #[command(subcommand)]
    Asm(AsmCommand),
    /// Run a campaign and write its state corpus as JSON lines.
    DumpCorpus(DumpCorpusArgs),
}

/// Counts accept integers (`1000000`, `1_000_000`) and exact scientific
/// notation (`1e6`).
pub fn parse_count(s: &str) -> Result<u64, String> {
    let t = s.replace('_', "");
    if let Ok(n) = t.parse::<u64>() {
        return Ok(n);
    }
    let f: f64 = t.parse().map_err(|_| format!("`{s}` is not a count"))?;
    if !f.is_finite() || f < 0.0 || f.fract() != 0.0 || f >= 1.8e19 {
        return Err(format!("`{s}` is not a whole non-negative count"));
    }
    Ok(f as u64)
}

fn parse_usize(s: &str) -> Result<usize, String> {
    parse_count(s).and_then(|n| usize::try_from(n).map_err(|_| format!("`{s}` is too large")))
}

#[derive(Debug, Clone, Args)]
pub struct CampaignArgs {
    /// Built-in name (simplestate, chain3, gates, nonce_vault, owner, maze,
    /// pingpong, memochain), an assembler file, or a program image (.json).
    #[arg(long, env = "SNAPFUZZ_TARGET", default_value = "simplestate")]
    pub target: String,

    /// Threshold T for the simplestate target.
    #[arg(long = "T", env = "SNAPFUZZ_T")]
    pub t: Option<u64>,

    #[arg(long, env = "SNAPFUZZ_MODE", default_value = "full")]
    pub mode: Mode,

    #[arg(long, env = "SNAPFUZZ_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Iteration budget (scientific notation allowed). Unlimited by default.
    #[arg(long, env = "SNAPFUZZ_BUDGET_ITERS", value_parser = parse_count)]
    pub budget_iters: Option<u64>,

    /// Wall-clock budget in seconds (virtual seconds with `--clock virtual`).
    #[arg(long, env = "SNAPFUZZ_BUDGET_SECS", default_value_t = 60.0)]
    pub budget_secs: f64,

    /// Telemetry time source: wall, or virtual (derived from VM steps, reproducible).
    #[arg(long, env = "SNAPFUZZ_CLOCK", default_value = "wall")]
    pub clock: ClockKind,

    /// Probability of swapping in an infant state instead of mutating the call.
    #[arg(long, env = "SNAPFUZZ_P_STATE_SWAP", default_value_t = 0.5)]
    pub p_state_swap: f64,

    /// N: live snapshot count that triggers pruning.
    #[arg(long, env = "SNAPFUZZ_MAX_STATES", value_parser = parse_usize, default_value = "4096")]
    pub max_states: usize,

    /// M: snapshots dropped per prune (default N / 4).
    #[arg(long, env = "SNAPFUZZ_PRUNE_BATCH", value_parser = parse_usize)]
    pub prune_batch: Option<usize>,

    /// O: only snapshots visited more often than this are prunable.
    #[arg(long, env = "SNAPFUZZ_VISIT_FLOOR", default_value_t = 20)]
    pub visit_floor: u64,

    /// Disable pruning.
    #[arg(long, env = "SNAPFUZZ_NO_PRUNE")]
    pub no_prune: bool,

    /// Oldest-first eviction for df_only once over N.
    #[arg(long, env = "SNAPFUZZ_DF_FIFO_PRUNE")]
    pub df_fifo_prune: bool,

    /// Scheduler selections per probing/exploitation epoch.
    #[arg(long, env = "SNAPFUZZ_EPOCH_LEN", default_value_t = 1000)]
    pub epoch_len: u64,

    #[arg(long, env = "SNAPFUZZ_STEP_LIMIT", value_parser = parse_count, default_value = "10000")]
    pub step_limit: u64,

    /// Attacker pool size K.
    #[arg(long, env = "SNAPFUZZ_ATTACKERS", default_value_t = 3)]
    pub attackers: u8,

    #[arg(long, env = "SNAPFUZZ_MAP_SIZE", value_parser = parse_usize, default_value = "65536")]
    pub map_size: usize,

    /// Store-map bucket plan: bytelen or coarse3.
    #[arg(long, env = "SNAPFUZZ_BUCKETS", default_value = "bytelen")]
    pub buckets: BucketPlan,

    /// Keep fuzzing after the first bug; each bug pc is reported once.
    #[arg(long, env = "SNAPFUZZ_KEEP_GOING")]
    pub keep_going: bool,

    /// Longest sequence the baseline keeps.
    #[arg(long, env = "SNAPFUZZ_BASELINE_MAX_LEN", default_value_t = 32)]
    pub baseline_max_len: usize,

    /// Print the effective configuration and store it next to the artifacts.
    #[arg(long, env = "SNAPFUZZ_PRINT_CONFIG")]
    pub print_config: bool,
}

impl CampaignArgs {
    pub fn config(&self) -> CampaignConfig {
        let d = CampaignConfig::default();
        CampaignConfig {
            mode: self.mode,
            p_state_swap: self.p_state_swap,
            seed: self.seed,
            iteration_budget: self.budget_iters.unwrap_or(d.iteration_budget),
            wall_clock_budget: Some(self.budget_secs),
            clock: self.clock,
            map_size: self.map_size,
            buckets: self.buckets,
            max_states: self.max_states,
            prune_batch: self.prune_batch.unwrap_or(self.max_states / 4),
            visit_floor: self.visit_floor,
            prune: !self.no_prune,
            df_fifo_prune: self.df_fifo_prune,
            epoch_len: self.epoch_len,
            step_limit: self.step_limit,
            attacker_pool: self.attackers,
            keep_going: self.keep_going,
            baseline_max_len: self.baseline_max_len,
            ..d
        }
    }
}

#[derive(Debug, Args)]
pub struct FuzzArgs {
    #[command(flatten)]
    pub campaign: CampaignArgs,

    /// Directory for telemetry.csv, bug-N.repro.json and summary.txt.
    #[arg(long, short, env = "SNAPFUZZ_OUT", default_value = "snapfuzz-out")]
    pub out: PathBuf,

    /// Also write the feedback maps as CSV (map,index,value).
    #[arg(long, env = "SNAPFUZZ_DUMP_MAPS")]
    pub dump_maps: Option<PathBuf>,

    /// Also write the final state corpus as JSON lines.
    #[arg(long, env = "SNAPFUZZ_DUMP_CORPUS")]
    pub dump_corpus: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DumpCorpusArgs {
    #[command(flatten)]
    pub campaign: CampaignArgs,

    /// Output file; `-` for stdout.
    #[arg(long, short, env = "SNAPFUZZ_OUTPUT", default_value = "-")]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub repro: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, env = "SNAPFUZZ_THRESHOLDS", value_delimiter = ',', default_value = "2,4,6,8,10")]
    pub thresholds: Vec<u64>,

    #[arg(long, env = "SNAPFUZZ_MODES", value_delimiter = ',', default_value = "full,baseline_seq,rand50,df_only")]
    pub modes: Vec<Mode>,

    /// Seeds per cell (0..R).
    #[arg(long, env = "SNAPFUZZ_SEEDS", default_value_t = 10)]
    pub seeds: u64,

    /// Per-run iteration budget.
    #[arg(long, env = "SNAPFUZZ_BUDGET_ITERS", value_parser = parse_count, default_value = "1e7")]
    pub budget_iters: u64,

    /// Per-run wall-clock budget in seconds.
    #[arg(long, env = "SNAPFUZZ_BUDGET_SECS", default_value_t = 60.0)]
    pub budget_secs: f64,

    /// Cells run concurrently. Wall times are only comparable at 1.
    #[arg(long, env = "SNAPFUZZ_JOBS", default_value_t = 1)]
    pub jobs: usize,

    /// Write every run outcome as JSON.
    #[arg(long, env = "SNAPFUZZ_BENCH_JSON")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum AsmCommand {
    /// Assembler source to a JSON program image.
    Assemble {
        source: PathBuf,
        #[arg(long, short, default_value = "-")]
        output: PathBuf,
    },
    /// Program image (or assembler source) back to assembler text.
    Disassemble {
        image: PathBuf,
        #[arg(long, short, default_value = "-")]
        output: PathBuf,
    },
    /// Print the source of a built-in target.
    Builtin {
        name: String,
        #[arg(long = "T")]
        t: Option<u64>,
    },
}
