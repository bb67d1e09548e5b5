use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{anyhow, Context};
use snapfuzz::fuzzer::bench::{render_table, run_cell, BenchPlan, Cell};
use snapfuzz::fuzzer::{
    BaselineCampaign, Campaign, CampaignConfig, Mode, ReproFile, RunSummary, StopReason, Target, Verdict,
};
use snapfuzz::targets::{assemble, Builtin, ProgramImage};

use crate::args::{AsmCommand, BenchArgs, CampaignArgs, DumpCorpusArgs, FuzzArgs, ReplayArgs};
use crate::{Failure, EXIT_BUG};

type Outcome = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(Failure::config)
}

/// Writes to `path`, or stdout for `-`.
fn write_to(path: &Path, content: &[u8]) -> Result<(), Failure> {
    let r = if path == Path::new("-") {
        io::stdout().write_all(content)
    } else {
        fs::write(path, content)
    };
    r.with_context(|| format!("writing {}", path.display())).map_err(Failure::io)
}

/// Built-in name, program image (`.json`) or assembler file.
pub fn load_target(spec: &str, t: Option<u64>) -> Result<Target, Failure> {
    if let Ok(b) = spec.parse::<Builtin>() {
        let b = match (b, t) {
            (Builtin::SimpleState(_), Some(0)) => return Err(Failure::config(anyhow!("--T must be at least 1"))),
            (Builtin::SimpleState(_), Some(t)) => Builtin::SimpleState(t),
            (_, Some(_)) => return Err(Failure::config(anyhow!("--T only applies to simplestate"))),
            (b, None) => b,
        };
        return Ok(Target::builtin(b));
    }
    if t.is_some() {
        return Err(Failure::config(anyhow!("--T only applies to simplestate")));
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(Failure::config(anyhow!(
            "unknown target `{spec}`: not a built-in ({}) and no such file",
            Builtin::NAMES.join(", ")
        )));
    }
    let text = read(path)?;
    let assembled = if path.extension().is_some_and(|e| e == "json") {
        ProgramImage::from_json(&text).and_then(|img| img.to_assembled()).map_err(Failure::config)?
    } else {
        assemble(&text).map_err(|e| Failure::config(anyhow!("{spec}: {e}")))?
    };
    Ok(Target::new(spec, assembled))
}

enum Engine {
    Snapshot(Box<Campaign>),
    Baseline(Box<BaselineCampaign>),
}

impl Engine {
    fn new(target: Target, config: CampaignConfig) -> Result<Self, Failure> {
        Ok(if config.mode == Mode::BaselineSeq {
            Engine::Baseline(Box::new(BaselineCampaign::new(target, config).map_err(Failure::config)?))
        } else {
            Engine::Snapshot(Box::new(Campaign::new(target, config).map_err(Failure::config)?))
        })
    }

    fn run(&mut self) -> RunSummary {
        match self {
            Engine::Snapshot(c) => c.run(),
            Engine::Baseline(b) => b.run(),
        }
    }

    fn snapshot(&self, what: &str) -> Result<&Campaign, Failure> {
        match self {
            Engine::Snapshot(c) => Ok(c),
            Engine::Baseline(_) => Err(Failure::config(anyhow!("{what} needs a snapshot mode; baseline_seq has no state corpus"))),
        }
    }
}

fn prepare(a: &CampaignArgs) -> Result<(Target, CampaignConfig), Failure> {
    let target = load_target(&a.target, a.t)?;
    let config = a.config();
    config.validate().map_err(Failure::config)?;
    if a.print_config {
        println!("{}", serde_json::to_string_pretty(&config).expect("config serializes"));
    }
    Ok((target, config))
}

fn summary_text(target: &Target, config: &CampaignConfig, s: &RunSummary, repros: &[PathBuf]) -> String {
    let mut out = String::new();
    let st = &s.stats;
    let last = s.telemetry.rows().last();
    let _ = writeln!(out, "target        {}", target.name);
    let _ = writeln!(out, "mode          {} (seed {})", config.mode, config.seed);
    let stop = match s.stop {
        StopReason::BugFound => "bug found",
        StopReason::BudgetExhausted => "budget exhausted",
    };
    let _ = writeln!(out, "stop          {stop} after {} iterations ({:.3} s)", st.iterations, s.telemetry_seconds());
    let _ = writeln!(out, "executions    {} non-reverting, {} VM steps", st.non_revert, st.steps);
    let _ = writeln!(
        out,
        "coverage      {}/{} instructions, {} edges",
        s.instr_cov,
        s.coverable,
        last.map_or(0, |r| r.edge_cov)
    );
    let _ = writeln!(
        out,
        "corpus        C = {}, C_s = {} live (max {}), {} pruned, {} votes",
        last.map_or(0, |r| r.corpus_c),
        last.map_or(0, |r| r.corpus_cs),
        st.max_live_states,
        st.prunes,
        st.votes
    );
    let _ = writeln!(out, "re-execution  {:.3} of steps", st.reexec_fraction());
    for (i, (b, path)) in s.bugs.iter().zip(repros).enumerate() {
        let _ = writeln!(
            out,
            "bug {}         pc {}, {} calls, iteration {} -> {}",
            i + 1,
            b.bug_pc,
            b.sequence.len() + 1,
            b.iterations_to_bug,
            path.display()
        );
    }
    out
}

pub fn fuzz(a: &FuzzArgs) -> Outcome {
    let (target, config) = prepare(&a.campaign)?;
    let mut engine = Engine::new(target.clone(), config.clone())?;
    if a.dump_maps.is_some() {
        engine.snapshot("--dump-maps")?;
    }
    if a.dump_corpus.is_some() {
        engine.snapshot("--dump-corpus")?;
    }
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display())).map_err(Failure::io)?;

    let s = engine.run();

    let mut csv = Vec::new();
    s.telemetry.write_csv(&mut csv).map_err(Failure::io)?;
    write_to(&a.out.join("telemetry.csv"), &csv)?;
    let mut repros = Vec::new();
    for (i, b) in s.bugs.iter().enumerate() {
        let path = a.out.join(format!("bug-{}.repro.json", i + 1));
        write_to(&path, ReproFile::from_report(&target, b, &config).to_json().as_bytes())?;
        repros.push(path);
    }
    if a.campaign.print_config {
        let text = serde_json::to_string_pretty(&config).expect("config serializes") + "\n";
        write_to(&a.out.join("config.json"), text.as_bytes())?;
    }
    if let Some(p) = &a.dump_maps {
        let mut buf = Vec::new();
        engine.snapshot("--dump-maps")?.waypoints().write_csv(&mut buf).map_err(Failure::io)?;
        write_to(p, &buf)?;
    }
    if let Some(p) = &a.dump_corpus {
        let mut buf = Vec::new();
        engine.snapshot("--dump-corpus")?.infant().write_dump(&mut buf).map_err(Failure::io)?;
        write_to(p, &buf)?;
    }
    let summary = summary_text(&target, &config, &s, &repros);
    write_to(&a.out.join("summary.txt"), summary.as_bytes())?;
    print!("{summary}");
    Ok(if s.bugs.is_empty() { 0 } else { EXIT_BUG })
}

pub fn dump_corpus(a: &DumpCorpusArgs) -> Outcome {
    let (target, config) = prepare(&a.campaign)?;
    let mut engine = Engine::new(target, config)?;
    engine.snapshot("dump-corpus")?;
    let s = engine.run();
    let mut buf = Vec::new();
    engine.snapshot("dump-corpus")?.infant().write_dump(&mut buf).map_err(Failure::io)?;
    write_to(&a.output, &buf)?;
    eprintln!("{} snapshots after {} iterations", engine.snapshot("dump-corpus")?.infant().len(), s.stats.iterations);
    Ok(0)
}

pub fn replay(a: &ReplayArgs) -> Outcome {
    let text = read(&a.repro)?;
    let repro = ReproFile::from_json(&text).map_err(Failure::config)?;
    match repro.replay().map_err(Failure::config)? {
        Verdict::Match => {
            println!("match: {} steps, final status {}", repro.steps.len(), repro.expected_status);
            Ok(0)
        }
        v @ Verdict::Mismatch { .. } => {
            println!("{v}");
            Ok(EXIT_BUG)
        }
    }
}

pub fn bench(a: &BenchArgs) -> Outcome {
    let plan = BenchPlan {
        thresholds: a.thresholds.clone(),
        modes: a.modes.clone(),
        seeds: a.seeds,
        base: CampaignConfig {
            iteration_budget: a.budget_iters,
            wall_clock_budget: Some(a.budget_secs),
            ..CampaignConfig::default()
        },
    };
    plan.base.validate().map_err(Failure::config)?;
    if plan.thresholds.contains(&0) {
        return Err(Failure::config(anyhow!("thresholds must be at least 1")));
    }
    let jobs: Vec<(u64, Mode)> = plan.thresholds.iter().flat_map(|&t| plan.modes.iter().map(move |&m| (t, m))).collect();
    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..a.jobs.clamp(1, jobs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(t, mode)) = jobs.get(i) else { break };
                let target = Target::builtin(Builtin::SimpleState(t));
                let cell = run_cell(&target, &plan.base, mode, t, plan.seeds);
                eprintln!("  T={t} {mode}: {}/{} found", cell.runs.iter().filter(|r| r.found).count(), cell.runs.len());
                done.lock().expect("no worker panicked").push((i, cell));
            });
        }
    });
    let mut cells = done.into_inner().expect("no worker panicked");
    cells.sort_by_key(|(i, _)| *i);
    let cells: Vec<Cell> = cells.into_iter().map(|(_, c)| c).collect();
    print!("{}", render_table(&plan, &cells));
    if let Some(p) = &a.json {
        let text = serde_json::to_string_pretty(&cells).expect("cells serialize") + "\n";
        write_to(p, text.as_bytes())?;
    }
    Ok(0)
}

pub fn asm(c: &AsmCommand) -> Outcome {
    match c {
        AsmCommand::Assemble { source, output } => {
            let a = assemble(&read(source)?).map_err(|e| Failure::config(anyhow!("{}: {e}", source.display())))?;
            write_to(output, ProgramImage::from(&a).to_json().as_bytes())?;
        }
        AsmCommand::Disassemble { image, output } => {
            let target = load_target(&image.to_string_lossy(), None)?;
            write_to(output, target.listing().as_bytes())?;
        }
        AsmCommand::Builtin { name, t } => {
            let b: Builtin = name.parse().map_err(|e: String| Failure::config(anyhow!(e)))?;
            let b = match (b, t) {
                (Builtin::SimpleState(_), Some(t)) if *t > 0 => Builtin::SimpleState(*t),
                (_, Some(_)) => return Err(Failure::config(anyhow!("--T only applies to simplestate (T >= 1)"))),
                (b, None) => b,
            };
            write_to(Path::new("-"), b.source().as_bytes())?;
        }
    }
    Ok(0)
}
