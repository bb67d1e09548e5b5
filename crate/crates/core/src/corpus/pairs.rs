use rand::Rng;

use super::infant::StateId;
use crate::vm::Transaction;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairEntry {
    pub state_id: StateId,
    pub tx: Transaction,
}

/// The `(state, transaction)` corpus, sampled uniformly.
#[derive(Debug, Clone, Default)]
pub struct PairCorpus {
    entries: Vec<PairEntry>,
}

impl PairCorpus {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, state_id: StateId, tx: Transaction) -> usize {
        self.entries.push(PairEntry { state_id, tx });
        self.entries.len() - 1
    }

    pub fn next<R: Rng + ?Sized>(&self, rng: &mut R) -> &PairEntry {
        &self.entries[rng.random_range(0..self.entries.len())]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[PairEntry] {
        &self.entries
    }
}
