//! Naive reference implementations shared by the oracle tests and the
//! acceptance suite. Everything here is written for clarity, with
//! arbitrary-precision arithmetic and plain sets.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use snapfuzz::corpus::{EpochState, InfantCorpus, GENESIS};
use snapfuzz::vm::{CmpOp, Event, Program, Storage, Transaction};
use snapfuzz::waypoints::{
    bucket_of, cmp_distance, fold_cmp, is_state_interesting_df, record_cmp, record_events, BucketPlan, CmpMap, LoadMap,
    StoreMap, Waypoints,
};
use snapfuzz::word::Word;

pub fn big(w: &Word) -> BigUint {
    BigUint::from_bytes_be(&w.to_be_bytes::<32>())
}

pub fn word_max_big() -> BigUint {
    (BigUint::from(1u8) << 256u32) - 1u8
}

/// Number of significant bytes.
pub fn bucket_naive(w: &Word) -> usize {
    big(w).bits().div_ceil(8) as usize
}

pub fn plan_bucket_naive(plan: BucketPlan, w: &Word) -> usize {
    match plan {
        BucketPlan::Bytelen => bucket_naive(w),
        BucketPlan::Coarse3 => {
            let b = big(w);
            if b < BigUint::from(256u32) {
                0
            } else if b < BigUint::from(65_536u32) {
                1
            } else {
                2
            }
        }
    }
}

pub fn distance_naive(op: CmpOp, lhs: &Word, rhs: &Word) -> BigUint {
    let (l, r) = (big(lhs), big(rhs));
    match op {
        CmpOp::Eq if l >= r => l - r,
        CmpOp::Eq => r - l,
        CmpOp::Lt if l < r => BigUint::ZERO,
        CmpOp::Lt => l - r,
        CmpOp::Gt if l > r => BigUint::ZERO,
        CmpOp::Gt => r - l,
    }
}

fn index(w: &Word, size: usize) -> usize {
    let r = big(w) % BigUint::from(size);
    r.iter_u64_digits().next().unwrap_or(0) as usize
}

#[derive(Debug, Default, PartialEq, Eq)]
pub struct NaiveVerdict {
    pub transitions: BTreeSet<(usize, usize)>,
    pub minimized: BTreeSet<usize>,
    pub df: bool,
    pub new_pcs: usize,
}

/// Load/store/comparison/instruction maps kept as explicit sets.
pub struct NaiveMaps {
    size: usize,
    plan: BucketPlan,
    dispatch: Vec<bool>,
    pub loaded: HashSet<usize>,
    pub stored: HashSet<(usize, usize)>,
    /// Absent entries stand for the maximum word.
    pub cmp: HashMap<usize, BigUint>,
    pub covered: HashSet<usize>,
}

impl NaiveMaps {
    pub fn new(size: usize, plan: BucketPlan, dispatch: Vec<bool>) -> Self {
        NaiveMaps {
            size,
            plan,
            dispatch,
            loaded: HashSet::new(),
            stored: HashSet::new(),
            cmp: HashMap::new(),
            covered: HashSet::new(),
        }
    }

    pub fn evaluate(&mut self, events: &[Event]) -> NaiveVerdict {
        let mut v = NaiveVerdict::default();
        let mut local: HashMap<usize, BigUint> = HashMap::new();
        for ev in events {
            match ev {
                Event::Load { slot } => {
                    self.loaded.insert(index(slot, self.size));
                }
                Event::Store { slot, value } => {
                    let cell = (index(slot, self.size), plan_bucket_naive(self.plan, value));
                    if self.stored.insert(cell) {
                        v.transitions.insert(cell);
                    }
                }
                Event::Cmp { pc, op, lhs, rhs } => {
                    let d = distance_naive(*op, lhs, rhs);
                    let e = local.entry(pc % self.size).or_insert_with(word_max_big);
                    if d < *e {
                        *e = d;
                    }
                }
                Event::Exec { pc } => {
                    if !self.dispatch[*pc] && self.covered.insert(*pc) {
                        v.new_pcs += 1;
                    }
                }
                Event::Edge { .. } => {}
            }
        }
        let max = word_max_big();
        for (i, d) in local {
            let g = self.cmp.get(&i).unwrap_or(&max);
            if d < *g {
                self.cmp.insert(i, d);
                v.minimized.insert(i);
            }
        }
        v.df = v.transitions.iter().any(|(i, _)| self.loaded.contains(i));
        v
    }
}

/// A word whose bit length is uniform in 0..=256, so every bucket shows up.
pub fn random_word<R: Rng>(rng: &mut R) -> Word {
    let bits = rng.random_range(0..=256usize);
    if bits == 0 {
        return Word::ZERO;
    }
    let w = Word::from_limbs(rng.random());
    let w = if bits == 256 { w } else { w & ((Word::from(1u8) << bits) - Word::from(1u8)) };
    w | (Word::from(1u8) << (bits - 1))
}

/// Slots drawn so that map-index collisions are common.
pub fn random_slot<R: Rng>(rng: &mut R, size: usize) -> Word {
    match rng.random_range(0..3) {
        0 => Word::from(rng.random_range(0..8u64)),
        1 => Word::from(rng.random_range(0..8u64) + size as u64 * rng.random_range(1..4u64)),
        _ => random_word(rng),
    }
}

fn random_operand<R: Rng>(rng: &mut R) -> Word {
    if rng.random_bool(0.5) {
        Word::from(rng.random_range(0..16u64))
    } else {
        random_word(rng)
    }
}

/// A synthetic execution trace over a program of `program_len` instructions.
pub fn random_trace<R: Rng>(rng: &mut R, size: usize, program_len: usize) -> Vec<Event> {
    let n = rng.random_range(0..24);
    (0..n)
        .map(|_| match rng.random_range(0..4) {
            0 => Event::Load { slot: random_slot(rng, size) },
            1 => Event::Store { slot: random_slot(rng, size), value: random_word(rng) },
            2 => {
                let op = [CmpOp::Lt, CmpOp::Gt, CmpOp::Eq][rng.random_range(0..3)];
                let (lhs, rhs) = (random_operand(rng), random_operand(rng));
                Event::Cmp { pc: rng.random_range(0..3 * size), op, lhs, rhs }
            }
            _ => Event::Exec { pc: rng.random_range(0..program_len) },
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct SnapInfo {
    pub id: u64,
    pub votes: u64,
    pub visits: u64,
    pub protected: bool,
}

/// Full sort of the eligible snapshots by `votes / visits` (exact, by cross
/// multiplication), older id first on ties, then the first `batch`.
pub fn prune_oracle(snaps: &[SnapInfo], batch: usize, floor: u64) -> BTreeSet<u64> {
    let mut eligible: Vec<SnapInfo> = snaps.iter().copied().filter(|s| s.visits > floor && !s.protected).collect();
    eligible.sort_by(|a, b| {
        let lhs = a.votes as u128 * b.visits as u128;
        let rhs = b.votes as u128 * a.visits as u128;
        match lhs.cmp(&rhs) {
            Ordering::Equal => a.id.cmp(&b.id),
            o => o,
        }
    });
    eligible.iter().take(batch).map(|s| s.id).collect()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `bucket_of` and both bucket plans against the big-integer byte count.
pub fn check_buckets(n: usize, seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    for _ in 0..n {
        let w = random_word(&mut r);
        if bucket_of(&w) != bucket_naive(&w) {
            return Err(format!("bucket_of({w:#x}) = {} != {}", bucket_of(&w), bucket_naive(&w)));
        }
        for plan in [BucketPlan::Bytelen, BucketPlan::Coarse3] {
            if plan.bucket(&w) != plan_bucket_naive(plan, &w) {
                return Err(format!("{} bucket of {w:#x} differs", plan.name()));
            }
        }
    }
    Ok(())
}

/// `record_events` + `is_state_interesting_df` against explicit sets. The
/// maps persist across traces and restart every 500 so fresh cells stay common.
pub fn check_dataflow(n: usize, seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let sizes = [64, 100, 128];
    let mut size = sizes[0];
    let plan = BucketPlan::Bytelen;
    let mut load = LoadMap::new(size);
    let mut store = StoreMap::new(size, plan);
    let mut naive = NaiveMaps::new(size, plan, vec![false; 1]);
    for k in 0..n {
        if k % 500 == 0 {
            size = sizes[(k / 500) % sizes.len()];
            load = LoadMap::new(size);
            store = StoreMap::new(size, plan);
            naive = NaiveMaps::new(size, plan, vec![false; 1]);
        }
        let events: Vec<Event> =
            random_trace(&mut r, size, 1).into_iter().filter(|e| !matches!(e, Event::Exec { .. })).collect();
        let got = record_events(&mut load, &mut store, &events);
        let got_df = is_state_interesting_df(&load, &got);
        let want = naive.evaluate(&events);
        let got_set: BTreeSet<_> = got.iter().copied().collect();
        if got_set != want.transitions || got.len() != got_set.len() {
            return Err(format!("trace {k}: transitions {got:?} != {:?}", want.transitions));
        }
        if got_df != want.df {
            return Err(format!("trace {k}: df verdict {got_df} != {}", want.df));
        }
        if load.count() != naive.loaded.len() || store.count() != naive.stored.len() {
            return Err(format!("trace {k}: map population differs"));
        }
    }
    Ok(())
}

/// `record_cmp` + `fold_cmp` against a per-slot running minimum.
pub fn check_cmp_fold(n: usize, seed: u64) -> Result<(), String> {
    let mut r = rng(seed);
    let size = 128;
    let mut global = CmpMap::new(size);
    let mut local = CmpMap::new(size);
    let mut naive = NaiveMaps::new(size, BucketPlan::Bytelen, vec![false; 1]);
    for k in 0..n {
        if k % 1000 == 0 {
            global = CmpMap::new(size);
            naive = NaiveMaps::new(size, BucketPlan::Bytelen, vec![false; 1]);
        }
        let events: Vec<Event> =
            random_trace(&mut r, size, 1).into_iter().filter(|e| matches!(e, Event::Cmp { .. })).collect();
        local.reset();
        for ev in &events {
            if let Event::Cmp { pc, op, lhs, rhs } = ev {
                if big(&cmp_distance(*op, lhs, rhs)) != distance_naive(*op, lhs, rhs) {
                    return Err(format!("trace {k}: distance of {op:?}({lhs:#x}, {rhs:#x})"));
                }
                record_cmp(&mut local, *pc, *op, lhs, rhs);
            }
        }
        let got = fold_cmp(&mut global, &local);
        let want = naive.evaluate(&events);
        if got != want.minimized {
            return Err(format!("trace {k}: minimized {got:?} != {:?}", want.minimized));
        }
        let max = word_max_big();
        for i in 0..size {
            if big(&global.get(i)) != *naive.cmp.get(&i).unwrap_or(&max) {
                return Err(format!("trace {k}: global entry {i} differs"));
            }
        }
    }
    Ok(())
}

/// The combined per-execution verdict against the naive maps.
pub fn check_evaluate(n: usize, seed: u64, program: &Program) -> Result<(), String> {
    let mut r = rng(seed);
    let size = 64;
    let dispatch = program.dispatch_mask().to_vec();
    let mut wp = Waypoints::new(program, size, BucketPlan::Coarse3);
    let mut naive = NaiveMaps::new(size, BucketPlan::Coarse3, dispatch.clone());
    for k in 0..n {
        if k % 500 == 0 {
            wp = Waypoints::new(program, size, BucketPlan::Coarse3);
            naive = NaiveMaps::new(size, BucketPlan::Coarse3, dispatch.clone());
        }
        let events = random_trace(&mut r, size, program.len());
        let got = wp.evaluate(&events, true);
        let want = naive.evaluate(&events);
        let got_t: BTreeSet<_> = got.transitions.iter().copied().collect();
        let want_exec = want.new_pcs > 0 || !want.minimized.is_empty();
        if got_t != want.transitions
            || got.minimized != want.minimized
            || got.df_interesting != want.df
            || got.exec_interesting != want_exec
            || wp.coverage.instr_count() != naive.covered.len()
        {
            return Err(format!("trace {k}: verdict {got:?} != {want:?}"));
        }
    }
    Ok(())
}

/// Builds random corpora (random lineage, pair references, pins, visits and
/// votes), prunes twice, and compares each removal set with the sort oracle.
/// Returns the number of snapshots removed.
pub fn check_pruner(corpora: usize, seed: u64) -> Result<usize, String> {
    let mut r = rng(seed);
    let mut removed_total = 0;
    for k in 0..corpora {
        let n: u64 = r.random_range(1..300);
        let mut c = InfantCorpus::new(Storage::new());
        let mut parent_of: HashMap<u64, u64> = HashMap::new();
        let mut held: HashSet<u64> = HashSet::new();
        for i in 1..=n {
            let parent = if r.random_bool(0.3) { r.random_range(0..i) } else { GENESIS };
            let storage: Storage = [(Word::from(1u8), Word::from(i))].into_iter().collect();
            let id = c.add_infant(storage, parent, Transaction::new(1, vec![])).map_err(|e| e.to_string())?.id();
            if id != i {
                return Err(format!("corpus {k}: id {id} issued for insertion {i}"));
            }
            parent_of.insert(i, parent);
            if r.random_bool(0.1) {
                c.retain_ref(i).unwrap();
                held.insert(i);
            }
            if r.random_bool(0.05) {
                c.pin(i).unwrap();
                held.insert(i);
            }
        }
        let mut epoch = EpochState::new(r.random_range(1..50));
        for _ in 0..r.random_range(0..40 * n) {
            c.next_infant(&mut r, &mut epoch);
        }
        for _ in 0..r.random_range(0..20 * n) {
            c.vote(r.random_range(0..=n));
        }
        let mut live: BTreeSet<u64> = (0..=n).collect();
        for round in 0..2 {
            let parents: HashSet<u64> = live.iter().filter_map(|id| parent_of.get(id).copied()).collect();
            let snaps: Vec<SnapInfo> = live
                .iter()
                .map(|&id| {
                    let s = c.get(id).expect("oracle-live id is live");
                    let protected = id == GENESIS || parents.contains(&id) || held.contains(&id);
                    SnapInfo { id, votes: s.votes, visits: s.visits, protected }
                })
                .collect();
            let batch = r.random_range(1..=n as usize);
            let floor = r.random_range(0..30);
            let want = prune_oracle(&snaps, batch, floor);
            let got: BTreeSet<u64> = c.prune(batch, floor).into_iter().collect();
            if got != want {
                return Err(format!("corpus {k} round {round}: removed {got:?}, oracle {want:?}"));
            }
            removed_total += got.len();
            live.retain(|id| !got.contains(id));
            if c.len() != live.len() || live.iter().any(|&id| !c.is_live(id)) {
                return Err(format!("corpus {k} round {round}: live set differs"));
            }
        }
    }
    Ok(removed_total)
}
