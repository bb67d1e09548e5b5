//! Feedback maps and the interestingness predicates built on them.
//!
//! * dataflow: a load map `L` and a bucketed store map `S`; a state is kept
//!   when a store hits a previously loaded slot with a never-seen bucket.
//! * comparison: per-site minimum operand distance; an execution that
//!   lowers any global entry earns a vote for its starting state.
//! * coverage: instruction and edge bitmaps, dispatch region excluded.

use std::collections::BTreeSet;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::vm::{CmpOp, Event, Program};
use crate::word::Word;

pub const MAP_SIZE: usize = 65_536;
/// Buckets of the byte-length plan: 0 for zero, then one per significant byte.
pub const NUM_BUCKETS: usize = 33;

/// Byte-length bucket of `value`.
pub fn bucket_of(value: &Word) -> usize {
    value.byte_len()
}

/// Partition of the value domain used by the store map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BucketPlan {
    #[default]
    Bytelen,
    /// `[0, 2^8)`, `[2^8, 2^16)`, `[2^16, 2^256)`.
    Coarse3,
}

impl BucketPlan {
    pub fn num_buckets(self) -> usize {
        match self {
            BucketPlan::Bytelen => NUM_BUCKETS,
            BucketPlan::Coarse3 => 3,
        }
    }

    pub fn bucket(self, value: &Word) -> usize {
        match self {
            BucketPlan::Bytelen => bucket_of(value),
            BucketPlan::Coarse3 => match value.byte_len() {
                0 | 1 => 0,
                2 => 1,
                _ => 2,
            },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BucketPlan::Bytelen => "bytelen",
            BucketPlan::Coarse3 => "coarse3",
        }
    }
}

impl std::str::FromStr for BucketPlan {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bytelen" => Ok(BucketPlan::Bytelen),
            "coarse3" => Ok(BucketPlan::Coarse3),
            _ => Err(format!("unknown bucket plan `{s}` (bytelen|coarse3)")),
        }
    }
}

/// `w % size` as an index.
pub fn map_index(w: &Word, size: usize) -> usize {
    if size.is_power_of_two() {
        (w.as_limbs()[0] as usize) & (size - 1)
    } else {
        (*w % Word::from(size)).to::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct BitSet {
    words: Vec<u64>,
    len: usize,
}

impl BitSet {
    fn new(len: usize) -> Self {
        BitSet { words: vec![0; len.div_ceil(64)], len }
    }

    fn get(&self, i: usize) -> bool {
        self.words[i / 64] & (1 << (i % 64)) != 0
    }

    /// Sets bit `i`; true if it was clear.
    fn insert(&mut self, i: usize) -> bool {
        let (w, m) = (i / 64, 1u64 << (i % 64));
        let fresh = self.words[w] & m == 0;
        self.words[w] |= m;
        fresh
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// `L`: slot-index → loaded at least once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadMap {
    bits: BitSet,
}

impl LoadMap {
    pub fn new(size: usize) -> Self {
        LoadMap { bits: BitSet::new(size) }
    }

    pub fn size(&self) -> usize {
        self.bits.len
    }

    pub fn get(&self, idx: usize) -> bool {
        self.bits.get(idx)
    }

    pub fn mark(&mut self, slot: &Word) {
        let i = map_index(slot, self.size());
        self.bits.insert(i);
    }

    pub fn count(&self) -> usize {
        self.bits.count()
    }
}

/// `S`: slot-index × bucket → stored at least once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoreMap {
    bits: BitSet,
    size: usize,
    plan: BucketPlan,
}

impl StoreMap {
    pub fn new(size: usize, plan: BucketPlan) -> Self {
        StoreMap { bits: BitSet::new(size * plan.num_buckets()), size, plan }
    }

    pub fn plan(&self) -> BucketPlan {
        self.plan
    }

    pub fn get(&self, idx: usize, bucket: usize) -> bool {
        self.bits.get(idx * self.plan.num_buckets() + bucket)
    }

    /// Marks the cell for `(slot, value)`; returns the cell if it was new.
    pub fn mark(&mut self, slot: &Word, value: &Word) -> Option<(usize, usize)> {
        let idx = map_index(slot, self.size);
        let b = self.plan.bucket(value);
        self.bits.insert(idx * self.plan.num_buckets() + b).then_some((idx, b))
    }

    pub fn count(&self) -> usize {
        self.bits.count()
    }
}

/// Runs the dataflow instrumentation over one execution's events and
/// returns the store cells that flipped false → true.
pub fn record_events(load: &mut LoadMap, store: &mut StoreMap, events: &[Event]) -> Vec<(usize, usize)> {
    let mut transitions = Vec::new();
    for ev in events {
        match ev {
            Event::Load { slot } => load.mark(slot),
            Event::Store { slot, value } => transitions.extend(store.mark(slot, value)),
            _ => {}
        }
    }
    transitions
}

/// Dataflow verdict: some fresh store cell sits on a loaded slot.
pub fn is_state_interesting_df(load: &LoadMap, transitions: &[(usize, usize)]) -> bool {
    transitions.iter().any(|&(idx, _)| load.get(idx))
}

/// Distance to making the comparison true; zero when it already holds.
pub fn cmp_distance(op: CmpOp, lhs: &Word, rhs: &Word) -> Word {
    match op {
        CmpOp::Eq => lhs.abs_diff(*rhs),
        CmpOp::Lt => lhs.saturating_sub(*rhs),
        CmpOp::Gt => rhs.saturating_sub(*lhs),
    }
}

/// Comparison distance map, every entry starting at `Word::MAX`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CmpMap {
    dist: Vec<Word>,
    touched: Vec<usize>,
}

impl CmpMap {
    pub fn new(size: usize) -> Self {
        CmpMap { dist: vec![Word::MAX; size], touched: Vec::new() }
    }

    pub fn size(&self) -> usize {
        self.dist.len()
    }

    pub fn get(&self, idx: usize) -> Word {
        self.dist[idx]
    }

    /// Entries below `Word::MAX`.
    pub fn finite(&self) -> impl Iterator<Item = (usize, &Word)> + '_ {
        self.dist.iter().enumerate().filter(|(_, d)| **d != Word::MAX)
    }

    /// Back to all-max, in time proportional to the touched entries.
    pub fn reset(&mut self) {
        for i in self.touched.drain(..) {
            self.dist[i] = Word::MAX;
        }
    }

    fn lower(&mut self, idx: usize, d: Word) {
        let cur = &mut self.dist[idx];
        if d < *cur {
            if *cur == Word::MAX {
                self.touched.push(idx);
            }
            *cur = d;
        }
    }
}

pub fn record_cmp(c_local: &mut CmpMap, pc: usize, op: CmpOp, lhs: &Word, rhs: &Word) {
    let idx = pc % c_local.size();
    c_local.lower(idx, cmp_distance(op, lhs, rhs));
}

/// Lowers `global` wherever `c_local` is smaller; returns those indices.
pub fn fold_cmp(global: &mut CmpMap, c_local: &CmpMap) -> BTreeSet<usize> {
    assert_eq!(global.size(), c_local.size(), "comparison maps differ in size");
    let mut minimized = BTreeSet::new();
    for &i in &c_local.touched {
        let d = c_local.dist[i];
        if d < global.dist[i] {
            global.lower(i, d);
            minimized.insert(i);
        }
    }
    minimized
}

fn edge_hash(src: usize, dst: usize) -> u64 {
    (src as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17) ^ (dst as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F)
}

/// Instruction and edge coverage; dispatch pcs never count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageMap {
    instr: Vec<bool>,
    edges: BitSet,
    dispatch: Vec<bool>,
    instr_count: usize,
    edge_count: usize,
}

impl CoverageMap {
    pub fn new(program: &Program, map_size: usize) -> Self {
        CoverageMap {
            instr: vec![false; program.len()],
            edges: BitSet::new(map_size),
            dispatch: program.dispatch_mask().to_vec(),
            instr_count: 0,
            edge_count: 0,
        }
    }

    /// Folds `events` in; returns how many new pcs plus edges were seen.
    pub fn observe(&mut self, events: &[Event]) -> usize {
        let mut fresh = 0;
        for ev in events {
            match *ev {
                Event::Exec { pc } => {
                    if !self.dispatch[pc] && !self.instr[pc] {
                        self.instr[pc] = true;
                        self.instr_count += 1;
                        fresh += 1;
                    }
                }
                Event::Edge { src, dst } if !self.dispatch[src] => {
                    let i = (edge_hash(src, dst) % self.edges.len as u64) as usize;
                    if self.edges.insert(i) {
                        self.edge_count += 1;
                        fresh += 1;
                    }
                }
                _ => {}
            }
        }
        fresh
    }

    pub fn instr_count(&self) -> usize {
        self.instr_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_covered(&self, pc: usize) -> bool {
        self.instr.get(pc).copied().unwrap_or(false)
    }
}

/// Execution verdict: new pc, new edge, or a lowered comparison slot.
pub fn is_exec_interesting(coverage: &mut CoverageMap, events: &[Event], minimized: &BTreeSet<usize>) -> bool {
    let fresh = coverage.observe(events);
    fresh > 0 || !minimized.is_empty()
}

/// Per-execution outcome of [`Waypoints::evaluate`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Verdict {
    pub transitions: Vec<(usize, usize)>,
    pub minimized: BTreeSet<usize>,
    pub exec_interesting: bool,
    pub df_interesting: bool,
}

/// All feedback maps owned by one campaign.
#[derive(Debug, Clone)]
pub struct Waypoints {
    pub load: LoadMap,
    pub store: StoreMap,
    pub cmp: CmpMap,
    pub coverage: CoverageMap,
    c_local: CmpMap,
}

impl Waypoints {
    pub fn new(program: &Program, map_size: usize, plan: BucketPlan) -> Self {
        Waypoints {
            load: LoadMap::new(map_size),
            store: StoreMap::new(map_size, plan),
            cmp: CmpMap::new(map_size),
            coverage: CoverageMap::new(program, map_size),
            c_local: CmpMap::new(map_size),
        }
    }

    /// Feeds one execution through every map. `dataflow` = false skips the
    /// load/store maps entirely.
    pub fn evaluate(&mut self, events: &[Event], dataflow: bool) -> Verdict {
        self.c_local.reset();
        for ev in events {
            if let Event::Cmp { pc, op, lhs, rhs } = ev {
                record_cmp(&mut self.c_local, *pc, *op, lhs, rhs);
            }
        }
        let minimized = fold_cmp(&mut self.cmp, &self.c_local);
        let (transitions, df_interesting) = if dataflow {
            let t = record_events(&mut self.load, &mut self.store, events);
            let df = is_state_interesting_df(&self.load, &t);
            (t, df)
        } else {
            (Vec::new(), false)
        };
        let exec_interesting = is_exec_interesting(&mut self.coverage, events, &minimized);
        Verdict { transitions, minimized, exec_interesting, df_interesting }
    }

    /// Writes `map,index,value` rows for every set or finite entry.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "map,index,value")?;
        for i in self.load.bits.ones() {
            writeln!(out, "load,{i},1")?;
        }
        let nb = self.store.plan.num_buckets();
        for cell in self.store.bits.ones() {
            writeln!(out, "store,{},{}", cell / nb, cell % nb)?;
        }
        for (i, d) in self.cmp.finite() {
            writeln!(out, "cmp,{i},{d:#x}")?;
        }
        for (pc, &hit) in self.coverage.instr.iter().enumerate() {
            if hit {
                writeln!(out, "instr,{pc},1")?;
            }
        }
        for i in self.coverage.edges.ones() {
            writeln!(out, "edge,{i},1")?;
        }
        Ok(())
    }
}
