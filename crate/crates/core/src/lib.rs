//! Snapshot-based stateful fuzzing for a small storage-bearing stack VM.
//!
//! A campaign keeps two corpora: `(state, transaction)` pairs and an
//! *infant* corpus of storage snapshots produced by earlier executions.
//! Each iteration either mutates the transaction of a pair or swaps its
//! state for a snapshot, so deep states are reached without replaying the
//! transactions that built them.

pub mod corpus;
pub mod fuzzer;
pub mod targets;
pub mod vm;
pub mod waypoints;
pub mod word;

pub use word::Word;
