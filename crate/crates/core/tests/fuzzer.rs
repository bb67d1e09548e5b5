use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use snapfuzz::corpus::GENESIS;
use snapfuzz::fuzzer::mutate::{conforms, mutate_tx, template};
use snapfuzz::fuzzer::{replay, run_campaign, Campaign, CampaignConfig, ClockKind, ConfigError, Mode, StopReason, Target};
use snapfuzz::targets::{assemble, Builtin};
use snapfuzz::vm::{Status, DEFAULT_STEP_LIMIT};

fn cfg(mode: Mode, seed: u64, iters: u64) -> CampaignConfig {
    CampaignConfig { iteration_budget: iters, ..CampaignConfig::with_mode(mode, seed) }
}

#[test]
fn seeds_one_pair_per_function_on_genesis() {
    for b in Builtin::all(3) {
        let t = Target::builtin(b);
        let c = Campaign::new(t.clone(), CampaignConfig::default()).unwrap();
        assert_eq!(c.pairs().len(), t.abi.len(), "{b}");
        let sels: BTreeSet<u32> = c.pairs().entries().iter().map(|p| p.tx.selector).collect();
        assert_eq!(sels.len(), t.abi.len());
        assert!(c.pairs().entries().iter().all(|p| p.state_id == GENESIS));
        assert_eq!(c.infant().len(), 1);
    }
}

#[test]
fn empty_abi_is_rejected() {
    let t = Target::new("bare", assemble("    STOP\n").unwrap());
    assert!(matches!(Campaign::new(t, CampaignConfig::default()), Err(ConfigError::EmptyAbi)));
}

#[test]
fn mutations_conform() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut total = 0;
    for b in Builtin::all(4) {
        let t = Target::builtin(b);
        for f in t.abi.functions() {
            let mut tx = template(f);
            for _ in 0..12_500 {
                tx = mutate_tx(&tx, &t.abi, &mut rng, 3);
                assert!(conforms(&tx, &t.abi, 3), "{b}: {tx:?}");
                total += 1;
            }
        }
    }
    assert!(total >= 100_000);
}

#[test]
fn no_state_swaps_at_zero_probability() {
    let t = Target::builtin(Builtin::Chain3);
    let mut c = Campaign::new(t.clone(), CampaignConfig { p_state_swap: 0.0, ..cfg(Mode::Full, 1, 5000) }).unwrap();
    let s = c.run();
    assert_eq!(s.stats.next_infant_calls, 0);
    let mut c = Campaign::new(t, CampaignConfig { p_state_swap: 1.0, ..cfg(Mode::Full, 1, 5000) }).unwrap();
    let s = c.run();
    assert_eq!(s.stats.next_infant_calls, s.stats.iterations);
}

#[test]
fn rand50_coin_admits_half() {
    let t = Target::builtin(Builtin::NonceVault);
    let c = CampaignConfig { prune: false, ..cfg(Mode::Rand50, 3, 10_000) };
    let s = run_campaign(t, c).unwrap();
    let kept = (s.stats.cs_insertions + s.stats.cs_duplicates) as f64;
    let ratio = kept / s.stats.non_revert as f64;
    assert!((0.45..=0.55).contains(&ratio), "coin ratio {ratio}");
    assert_eq!(s.stats.votes, 0);
}

#[test]
fn only_full_mode_votes() {
    let t = Target::builtin(Builtin::SimpleState(10));
    for mode in [Mode::Full, Mode::DfOnly, Mode::Rand50] {
        let s = run_campaign(t.clone(), CampaignConfig { keep_going: true, ..cfg(mode, 2, 3000) }).unwrap();
        assert_eq!(s.stats.votes > 0, mode == Mode::Full, "{mode}");
        assert_eq!(s.stats.reexec_steps, 0, "{mode}");
    }
}

#[test]
fn df_only_stalls_on_simplestate() {
    let t = Target::builtin(Builtin::SimpleState(4));
    let s = run_campaign(t, cfg(Mode::DfOnly, 0, 20_000)).unwrap();
    assert_eq!(s.stop, StopReason::BudgetExhausted);
}

#[test]
fn keep_going_reports_each_bug_once() {
    let t = Target::builtin(Builtin::Maze);
    let s = run_campaign(t.clone(), CampaignConfig { keep_going: true, ..cfg(Mode::Full, 4, 60_000) }).unwrap();
    assert!(!s.bugs.is_empty());
    let pcs: BTreeSet<usize> = s.bugs.iter().map(|b| b.bug_pc).collect();
    assert_eq!(pcs.len(), s.bugs.len());
    for b in &s.bugs {
        let (trace, _) = replay(&t, &b.full_sequence(), DEFAULT_STEP_LIMIT);
        assert_eq!(trace.last().unwrap().status, Status::Bug);
    }
}

#[test]
fn every_live_snapshot_replays() {
    let t = Target::builtin(Builtin::NonceVault);
    let config =
        CampaignConfig { keep_going: true, max_states: 256, prune_batch: 64, visit_floor: 0, ..cfg(Mode::Rand50, 6, 30_000) };
    let mut c = Campaign::new(t.clone(), config).unwrap();
    let s = c.run();
    assert!(s.stats.prunes > 0, "pruning never ran");
    assert!(c.infant().len() > 1);
    for snap in c.infant().iter() {
        let seq = c.infant().reconstruct_sequence(snap.id).unwrap();
        let (_, end) = replay(&t, &seq, DEFAULT_STEP_LIMIT);
        assert_eq!(end.digest(), snap.digest, "snapshot {}", snap.id);
    }
}

#[test]
fn same_seed_same_telemetry() {
    let csv = |seed| {
        let t = Target::builtin(Builtin::Gates);
        let c = CampaignConfig { clock: ClockKind::Virtual, keep_going: true, ..cfg(Mode::Full, seed, 20_000) };
        let s = run_campaign(t, c).unwrap();
        let mut out = Vec::new();
        s.telemetry.write_csv(&mut out).unwrap();
        out
    };
    assert_eq!(csv(1), csv(1));
    assert_ne!(csv(1), csv(2));
}

#[test]
fn baseline_finds_shallow_bug() {
    let t = Target::builtin(Builtin::SimpleState(2));
    let s = run_campaign(t.clone(), cfg(Mode::BaselineSeq, 0, 200_000)).unwrap();
    assert_eq!(s.stop, StopReason::BugFound);
    assert!(s.bugs[0].state_id.is_none());
    let (trace, _) = replay(&t, &s.bugs[0].full_sequence(), DEFAULT_STEP_LIMIT);
    assert_eq!(trace.last().unwrap().status, Status::Bug);
    assert!(s.stats.reexec_steps > 0);
}
