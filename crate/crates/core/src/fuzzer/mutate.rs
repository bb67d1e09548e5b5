//! Structure-aware transaction mutation.

use rand::seq::IndexedRandom;
use rand::Rng;

use crate::targets::{Abi, AbiFunction, ArgKind};
use crate::vm::{attacker_address, Transaction};
use crate::word::Word;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MutOp {
    SwapSelector,
    Interesting,
    Delta,
    RandomWord,
    FlipCaller,
    SetValue,
}

fn interesting(cur: Word) -> [Word; 9] {
    let one = Word::from(1u8);
    [
        Word::ZERO,
        one,
        Word::from(2u8),
        Word::from(255u8),
        Word::from(1u32 << 16),
        one << 255,
        Word::MAX,
        cur.wrapping_add(one),
        cur.wrapping_sub(one),
    ]
}

/// Zero-argument seed call of `f`.
pub fn template(f: &AbiFunction) -> Transaction {
    Transaction::new(f.selector, vec![Word::ZERO; f.arg_count()])
}

/// Applies 1 to 4 stacked mutations; the result always conforms to `abi`
/// and keeps `caller < pool`.
///
/// Panics if `tx.selector` is not in `abi`.
pub fn mutate_tx<R: Rng + ?Sized>(tx: &Transaction, abi: &Abi, rng: &mut R, pool: u8) -> Transaction {
    let mut out = tx.clone();
    let rounds = rng.random_range(1..=4);
    for _ in 0..rounds {
        let f = abi.by_selector(out.selector).expect("transaction selector not in ABI");
        let mut ops = vec![MutOp::SetValue];
        if abi.len() > 1 {
            ops.push(MutOp::SwapSelector);
        }
        if f.arg_count() > 0 {
            ops.extend([MutOp::Interesting, MutOp::Delta, MutOp::RandomWord]);
        }
        if pool > 1 {
            ops.push(MutOp::FlipCaller);
        }
        let op = *ops.choose(rng).expect("SetValue is always applicable");
        apply(op, &mut out, f, abi, rng, pool);
    }
    out
}

fn apply<R: Rng + ?Sized>(op: MutOp, tx: &mut Transaction, f: &AbiFunction, abi: &Abi, rng: &mut R, pool: u8) {
    match op {
        MutOp::SwapSelector => {
            let others: Vec<&AbiFunction> = abi.functions().iter().filter(|g| g.selector != f.selector).collect();
            let g = others.choose(rng).expect("ABI has another function");
            tx.selector = g.selector;
            tx.args.resize(g.arg_count(), Word::ZERO);
        }
        MutOp::Interesting | MutOp::Delta | MutOp::RandomWord => {
            let i = rng.random_range(0..tx.args.len());
            if f.arg_kinds[i] == ArgKind::Address {
                tx.args[i] = attacker_address(rng.random_range(0..pool));
                return;
            }
            let cur = tx.args[i];
            tx.args[i] = match op {
                MutOp::Interesting => *interesting(cur).choose(rng).expect("non-empty"),
                MutOp::Delta => {
                    let d = Word::from(rng.random_range(1..=16u8));
                    if rng.random_bool(0.5) {
                        cur.wrapping_add(d)
                    } else {
                        cur.wrapping_sub(d)
                    }
                }
                _ => Word::from_limbs(rng.random()),
            };
        }
        MutOp::FlipCaller => tx.caller = rng.random_range(0..pool),
        MutOp::SetValue => {
            tx.value = if rng.random_bool(0.5) { Word::ZERO } else { Word::from(rng.random_range(1..=255u8)) };
        }
    }
}

/// Selector known, arity right, caller inside the pool.
pub fn conforms(tx: &Transaction, abi: &Abi, pool: u8) -> bool {
    tx.caller < pool && abi.by_selector(tx.selector).is_some_and(|f| f.arg_count() == tx.args.len())
}
