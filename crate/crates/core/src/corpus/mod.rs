//! The pair corpus `C` and the infant state corpus `C_s`.

mod fenwick;
pub mod infant;
pub mod pairs;

pub use infant::{CorpusError, EpochState, InfantCorpus, Insert, Phase, StateId, StateSnapshot, GENESIS};
pub use pairs::{PairCorpus, PairEntry};
