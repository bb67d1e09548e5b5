//! SimpleState against a hand-written model of the counter contract.

use std::collections::{HashSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use snapfuzz::fuzzer::{replay, Campaign, CampaignConfig, Mode, StopReason, Target};
use snapfuzz::targets::Builtin;
use snapfuzz::vm::{execute, Status, Storage, Transaction, DEFAULT_STEP_LIMIT};
use snapfuzz::waypoints::{BucketPlan, Waypoints, MAP_SIZE};
use snapfuzz::word::Word;

const INCR: u32 = 1;
const DECR: u32 = 2;
const BUGGY: u32 = 3;

/// What the contract is supposed to do, written without the VM.
fn model(counter: &mut Word, t: Word, tx: &Transaction) -> Status {
    let x = tx.args.first().copied().unwrap_or(Word::ZERO);
    match tx.selector {
        INCR if x > *counter || *counter == Word::MAX => Status::Revert,
        INCR => {
            *counter += Word::from(1u8);
            Status::Stop
        }
        DECR if x < *counter || counter.is_zero() => Status::Revert,
        DECR => {
            *counter -= Word::from(1u8);
            Status::Stop
        }
        BUGGY if *counter == t => Status::Bug,
        BUGGY => Status::Stop,
        _ => Status::Revert,
    }
}

fn random_tx(rng: &mut ChaCha8Rng, t: u64) -> Transaction {
    let selector = [INCR, DECR, BUGGY, 9][rng.random_range(0..4)];
    let arity = if matches!(selector, INCR | DECR) { 1 } else { 0 };
    let args = (0..arity)
        .map(|_| match rng.random_range(0..4) {
            0 => Word::MAX,
            1 => Word::from_limbs(rng.random()),
            _ => Word::from(rng.random_range(0..t + 3)),
        })
        .collect();
    Transaction::new(selector, args)
}

fn check_against_model(t: u64, sequences: usize, seed: u64) {
    let target = Target::builtin(Builtin::SimpleState(t));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tw = Word::from(t);
    for n in 0..sequences {
        // Some runs start next to the overflow guard.
        let start = if n % 5 == 0 { Word::MAX - Word::from(2u8) } else { Word::ZERO };
        let mut storage: Storage = [(Word::ZERO, start)].into_iter().collect();
        let mut counter = start;
        for i in 0..rng.random_range(1..25) {
            let tx = random_tx(&mut rng, t);
            let want = model(&mut counter, tw, &tx);
            let r = execute(&storage, &tx, &target.program, DEFAULT_STEP_LIMIT);
            assert_eq!(r.status, want, "sequence {n} call {i}: {tx:?}");
            storage = r.new_storage;
            assert_eq!(storage.get(&Word::ZERO), counter, "sequence {n} call {i}");
        }
    }
}

#[test]
fn vm_matches_model_t2() {
    check_against_model(2, 100, 11);
}

#[test]
fn vm_matches_model_t10() {
    check_against_model(10, 1000, 12);
}

/// Fewest calls (the bug call included) that reach BUG, searching every
/// call with arguments in `0..=max_arg`. `step` maps a state to its
/// successor and status.
fn bfs<S: Clone + Eq + std::hash::Hash>(
    start: S,
    max_arg: u64,
    max_depth: usize,
    step: impl Fn(&S, &Transaction) -> (S, Status),
) -> Option<usize> {
    let mut calls = vec![Transaction::new(BUGGY, vec![])];
    for x in 0..=max_arg {
        calls.push(Transaction::new(INCR, vec![Word::from(x)]));
        calls.push(Transaction::new(DECR, vec![Word::from(x)]));
    }
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((s, depth)) = queue.pop_front() {
        if depth == max_depth {
            continue;
        }
        for tx in &calls {
            let (next, status) = step(&s, tx);
            if status == Status::Bug {
                return Some(depth + 1);
            }
            if status == Status::Stop && seen.insert(next.clone()) {
                queue.push_back((next, depth + 1));
            }
        }
    }
    None
}

#[test]
fn shortest_bug_sequence_is_t_plus_one() {
    for t in [1u64, 2, 5] {
        let target = Target::builtin(Builtin::SimpleState(t));
        let vm = bfs(target.genesis.clone(), t, 8, |s, tx| {
            let r = execute(s, tx, &target.program, DEFAULT_STEP_LIMIT);
            (r.new_storage, r.status)
        });
        let tw = Word::from(t);
        let oracle = bfs(Word::ZERO, t, 8, |c, tx| {
            let mut c = *c;
            let st = model(&mut c, tw, tx);
            (c, st)
        });
        assert_eq!(vm, oracle, "T = {t}");
        assert_eq!(vm, Some(t as usize + 1), "T = {t}");
    }
}

#[test]
fn t2_report_is_incr_incr_buggy() {
    let target = Target::builtin(Builtin::SimpleState(2));
    for seed in 0..10 {
        let mut c = Campaign::new(target.clone(), CampaignConfig::with_mode(Mode::Full, seed)).unwrap();
        let s = c.run();
        assert_eq!(s.stop, StopReason::BugFound, "seed {seed}");
        let seq = s.bugs[0].full_sequence();
        let sels: Vec<u32> = seq.iter().map(|t| t.selector).collect();
        assert_eq!(sels, [INCR, INCR, BUGGY], "seed {seed}");
        let (trace, _) = replay(&target, &seq, DEFAULT_STEP_LIMIT);
        assert_eq!(trace.last().unwrap().status, Status::Bug);
    }
}

#[test]
fn counter_two_to_three_is_interesting() {
    let target = Target::builtin(Builtin::SimpleState(10));
    let mut wp = Waypoints::new(&target.program, MAP_SIZE, BucketPlan::Bytelen);
    let mut s = target.genesis.clone();
    let buggy = Transaction::new(BUGGY, vec![]);
    for c in 0..2u8 {
        wp.evaluate(&execute(&s, &buggy, &target.program, DEFAULT_STEP_LIMIT).events, true);
        let r = execute(&s, &Transaction::new(INCR, vec![Word::from(c)]), &target.program, DEFAULT_STEP_LIMIT);
        assert_eq!(r.status, Status::Stop);
        wp.evaluate(&r.events, true);
        s = r.new_storage;
    }
    // Repeating an already-seen step is not interesting.
    let again = execute(&target.genesis, &Transaction::new(INCR, vec![Word::ZERO]), &target.program, DEFAULT_STEP_LIMIT);
    assert!(!wp.evaluate(&again.events, true).exec_interesting);

    let r = execute(&s, &Transaction::new(INCR, vec![Word::from(2u8)]), &target.program, DEFAULT_STEP_LIMIT);
    assert_eq!(r.new_storage.get(&Word::ZERO), Word::from(3u8));
    let v = wp.evaluate(&r.events, true);
    assert!(v.exec_interesting && !v.minimized.is_empty());

    let probe = execute(&r.new_storage, &buggy, &target.program, DEFAULT_STEP_LIMIT);
    let v = wp.evaluate(&probe.events, true);
    assert!(!v.minimized.is_empty(), "counter == T moved closer");
}
