//! The infant state corpus: deduplicated storage snapshots with lineage,
//! vote-weighted scheduling and votes/visits pruning.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::io::{self, Write};

use rand::Rng;
use serde::Serialize;

use super::fenwick::Fenwick;
use crate::vm::{Storage, StorageDigest, Transaction};

pub type StateId = u64;

/// Id of the post-deployment snapshot.
pub const GENESIS: StateId = 0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSnapshot {
    pub id: StateId,
    pub storage: Storage,
    pub digest: StorageDigest,
    pub parent: Option<StateId>,
    pub producing_tx: Option<Transaction>,
    pub votes: u64,
    pub visits: u64,
    children: u32,
    pair_refs: u32,
    pinned: bool,
}

impl StateSnapshot {
    /// Parent of a live snapshot, referenced by a pair, or pinned.
    pub fn is_protected(&self) -> bool {
        self.id == GENESIS || self.children > 0 || self.pair_refs > 0 || self.pinned
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Insert {
    New(StateId),
    /// Storage already present under this id; nothing stored.
    Duplicate(StateId),
}

impl Insert {
    pub fn id(self) -> StateId {
        match self {
            Insert::New(id) | Insert::Duplicate(id) => id,
        }
    }

    pub fn is_new(self) -> bool {
        matches!(self, Insert::New(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CorpusError {
    #[error("snapshot {0} is not live")]
    NotLive(StateId),
    #[error("snapshot {child} has dangling parent {parent}")]
    BrokenChain { child: StateId, parent: StateId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Uniform draws.
    Probing,
    /// Draws weighted by `votes + 1`.
    Exploitation,
}

/// Alternates probing and exploitation every `epoch_len` selections.
#[derive(Debug, Clone)]
pub struct EpochState {
    epoch_len: u64,
    selections: u64,
}

impl EpochState {
    pub fn new(epoch_len: u64) -> Self {
        EpochState { epoch_len: epoch_len.max(1), selections: 0 }
    }

    pub fn phase(&self) -> Phase {
        if (self.selections / self.epoch_len).is_multiple_of(2) {
            Phase::Probing
        } else {
            Phase::Exploitation
        }
    }

    fn tick(&mut self) {
        self.selections += 1;
    }
}

#[derive(Debug, Clone)]
pub struct InfantCorpus {
    slots: Vec<Option<StateSnapshot>>,
    by_digest: HashMap<StorageDigest, StateId>,
    live: Vec<StateId>,
    live_pos: Vec<u32>,
    weights: Fenwick,
}

const DEAD: u32 = u32::MAX;

impl InfantCorpus {
    /// A corpus holding only `genesis` (id [`GENESIS`]).
    pub fn new(genesis: Storage) -> Self {
        let mut c = InfantCorpus {
            slots: Vec::new(),
            by_digest: HashMap::new(),
            live: Vec::new(),
            live_pos: Vec::new(),
            weights: Fenwick::new(),
        };
        c.insert(genesis, None, None);
        c
    }

    fn insert(&mut self, storage: Storage, parent: Option<StateId>, producing_tx: Option<Transaction>) -> StateId {
        let id = self.slots.len() as StateId;
        let digest = storage.digest();
        self.by_digest.insert(digest, id);
        self.live_pos.push(self.live.len() as u32);
        self.live.push(id);
        self.weights.push(1);
        self.slots.push(Some(StateSnapshot {
            id,
            storage,
            digest,
            parent,
            producing_tx,
            votes: 0,
            visits: 0,
            children: 0,
            pair_refs: 0,
            pinned: false,
        }));
        id
    }

    /// Adds `storage` produced by `tx` on `parent` unless an equal storage
    /// is already live.
    pub fn add_infant(&mut self, storage: Storage, parent: StateId, tx: Transaction) -> Result<Insert, CorpusError> {
        let digest = storage.digest();
        if let Some(&id) = self.by_digest.get(&digest) {
            return Ok(Insert::Duplicate(id));
        }
        self.live_mut(parent)?.children += 1;
        Ok(Insert::New(self.insert(storage, Some(parent), Some(tx))))
    }

    pub fn get(&self, id: StateId) -> Option<&StateSnapshot> {
        self.slots.get(id as usize).and_then(Option::as_ref)
    }

    fn live_mut(&mut self, id: StateId) -> Result<&mut StateSnapshot, CorpusError> {
        self.slots.get_mut(id as usize).and_then(Option::as_mut).ok_or(CorpusError::NotLive(id))
    }

    pub fn is_live(&self, id: StateId) -> bool {
        self.get(id).is_some()
    }

    pub fn len(&self) -> usize {
        self.live.len()
    }

    pub fn is_empty(&self) -> bool {
        self.live.is_empty()
    }

    /// Ids ever issued, live or not.
    pub fn issued(&self) -> u64 {
        self.slots.len() as u64
    }

    pub fn live_ids(&self) -> &[StateId] {
        &self.live
    }

    pub fn iter(&self) -> impl Iterator<Item = &StateSnapshot> {
        self.slots.iter().flatten()
    }

    pub fn lookup_digest(&self, digest: &StorageDigest) -> Option<StateId> {
        self.by_digest.get(digest).copied()
    }

    /// Draws a snapshot for the current epoch phase and counts the visit.
    pub fn next_infant<R: Rng + ?Sized>(&mut self, rng: &mut R, epoch: &mut EpochState) -> StateId {
        assert!(!self.live.is_empty(), "infant corpus is empty");
        let id = match epoch.phase() {
            Phase::Probing => self.live[rng.random_range(0..self.live.len())],
            Phase::Exploitation => self.weights.find(rng.random_range(0..self.weights.total())) as StateId,
        };
        epoch.tick();
        if let Some(s) = self.slots[id as usize].as_mut() {
            s.visits += 1;
        }
        id
    }

    /// One vote for `id`; false if the snapshot is gone.
    pub fn vote(&mut self, id: StateId) -> bool {
        match self.slots.get_mut(id as usize).and_then(Option::as_mut) {
            Some(s) => {
                s.votes += 1;
                self.weights.add(id as usize, 1);
                true
            }
            None => false,
        }
    }

    /// Marks `id` as the starting state of a pair-corpus entry.
    pub fn retain_ref(&mut self, id: StateId) -> Result<(), CorpusError> {
        self.live_mut(id)?.pair_refs += 1;
        Ok(())
    }

    /// Exempts `id` from pruning for good.
    pub fn pin(&mut self, id: StateId) -> Result<(), CorpusError> {
        self.live_mut(id)?.pinned = true;
        Ok(())
    }

    fn remove(&mut self, id: StateId) {
        let Some(s) = self.slots[id as usize].take() else {
            return;
        };
        debug_assert!(!s.is_protected());
        if let Some(p) = s.parent {
            if let Some(ps) = self.slots[p as usize].as_mut() {
                ps.children -= 1;
            }
        }
        self.by_digest.remove(&s.digest);
        let pos = self.live_pos[id as usize] as usize;
        self.live.swap_remove(pos);
        if let Some(&moved) = self.live.get(pos) {
            self.live_pos[moved as usize] = pos as u32;
        }
        self.live_pos[id as usize] = DEAD;
        let w = self.weights.get(id as usize);
        self.weights.add(id as usize, -(w as i64));
    }

    fn eligible(&self, visit_floor: u64) -> Vec<&StateSnapshot> {
        self.live
            .iter()
            .map(|&id| self.slots[id as usize].as_ref().expect("live id has a snapshot"))
            .filter(|s| s.visits > visit_floor && !s.is_protected())
            .collect()
    }

    /// Drops up to `batch` unprotected snapshots with `visits > visit_floor`
    /// and the lowest `votes / visits`; ties go to the older id.
    pub fn prune(&mut self, batch: usize, visit_floor: u64) -> Vec<StateId> {
        let mut cands = self.eligible(visit_floor);
        cands.sort_by(|a, b| ratio_cmp(a, b).then(a.id.cmp(&b.id)));
        let doomed: Vec<StateId> = cands.iter().take(batch).map(|s| s.id).collect();
        for &id in &doomed {
            self.remove(id);
        }
        doomed
    }

    /// Vote-free eviction: oldest eligible snapshots first.
    pub fn prune_fifo(&mut self, batch: usize, visit_floor: u64) -> Vec<StateId> {
        let mut doomed: Vec<StateId> = self.eligible(visit_floor).iter().map(|s| s.id).collect();
        doomed.sort_unstable();
        doomed.truncate(batch);
        for &id in &doomed {
            self.remove(id);
        }
        doomed
    }

    /// Producing transactions from genesis to `id`, in execution order.
    pub fn reconstruct_sequence(&self, id: StateId) -> Result<Vec<Transaction>, CorpusError> {
        let mut seq = Vec::new();
        let mut cur = self.get(id).ok_or(CorpusError::NotLive(id))?;
        while let Some(parent) = cur.parent {
            seq.push(cur.producing_tx.clone().expect("non-genesis snapshot has a producing tx"));
            cur = self.get(parent).ok_or(CorpusError::BrokenChain { child: cur.id, parent })?;
        }
        seq.reverse();
        Ok(seq)
    }

    /// One JSON object per live snapshot, ascending id.
    pub fn write_dump<W: Write>(&self, mut out: W) -> io::Result<()> {
        #[derive(Serialize)]
        struct Record<'a> {
            id: StateId,
            digest: &'a StorageDigest,
            votes: u64,
            visits: u64,
            parent: Option<StateId>,
            tx: Option<&'a Transaction>,
        }
        for s in self.iter() {
            let rec = Record {
                id: s.id,
                digest: &s.digest,
                votes: s.votes,
                visits: s.visits,
                parent: s.parent,
                tx: s.producing_tx.as_ref(),
            };
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

fn ratio_cmp(a: &StateSnapshot, b: &StateSnapshot) -> Ordering {
    // a.votes / a.visits vs b.votes / b.visits, visits > 0 for candidates
    (a.votes as u128 * b.visits as u128).cmp(&(b.votes as u128 * a.visits as u128))
}
