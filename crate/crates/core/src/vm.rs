//! A deterministic stack machine with persistent key-value storage.
//!
//! `execute` maps a `(storage, transaction)` pair to a new storage image and
//! reports every load, store, comparison, executed pc and taken jump as an
//! [`Event`] so that feedback maps can be fed without re-running anything.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use crate::word::Word;

/// Default per-transaction step budget.
pub const DEFAULT_STEP_LIMIT: u64 = 10_000;
/// Maximum operand stack depth.
pub const STACK_LIMIT: usize = 1024;

const ATTACKER_BASE: u64 = 0xA77A_C4E5_0000;

/// Address word of attacker `index` in the fixed caller pool.
pub fn attacker_address(index: u8) -> Word {
    Word::from(ATTACKER_BASE + u64::from(index))
}

/// Inverse of [`attacker_address`] for pools of `pool_size` agents.
pub fn attacker_index(addr: &Word, pool_size: u8) -> Option<u8> {
    (0..pool_size).find(|&i| attacker_address(i) == *addr)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CmpOp {
    Lt,
    Gt,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Op {
    Push(Word),
    Pop,
    Dup(u8),
    Swap(u8),
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Gt,
    Eq,
    IsZero,
    And,
    Or,
    Not,
    Jump,
    JumpI,
    JumpDest,
    SLoad,
    SStore,
    CallDataLoad(u32),
    CallDataSize,
    Caller,
    CallValue,
    /// Pushes the transaction's 32-bit function selector.
    Selector,
    Stop,
    Revert,
    Bug,
}

impl Op {
    pub fn mnemonic(&self) -> &'static str {
        match self {
            Op::Push(_) => "PUSH",
            Op::Pop => "POP",
            Op::Dup(_) => "DUP",
            Op::Swap(_) => "SWAP",
            Op::Add => "ADD",
            Op::Sub => "SUB",
            Op::Mul => "MUL",
            Op::Div => "DIV",
            Op::Lt => "LT",
            Op::Gt => "GT",
            Op::Eq => "EQ",
            Op::IsZero => "ISZERO",
            Op::And => "AND",
            Op::Or => "OR",
            Op::Not => "NOT",
            Op::Jump => "JUMP",
            Op::JumpI => "JUMPI",
            Op::JumpDest => "JUMPDEST",
            Op::SLoad => "SLOAD",
            Op::SStore => "SSTORE",
            Op::CallDataLoad(_) => "CALLDATALOAD",
            Op::CallDataSize => "CALLDATASIZE",
            Op::Caller => "CALLER",
            Op::CallValue => "CALLVALUE",
            Op::Selector => "SELECTOR",
            Op::Stop => "STOP",
            Op::Revert => "REVERT",
            Op::Bug => "BUG",
        }
    }

    /// Parses an operand-free mnemonic.
    pub fn from_mnemonic(m: &str) -> Option<Op> {
        Some(match m {
            "POP" => Op::Pop,
            "ADD" => Op::Add,
            "SUB" => Op::Sub,
            "MUL" => Op::Mul,
            "DIV" => Op::Div,
            "LT" => Op::Lt,
            "GT" => Op::Gt,
            "EQ" => Op::Eq,
            "ISZERO" => Op::IsZero,
            "AND" => Op::And,
            "OR" => Op::Or,
            "NOT" => Op::Not,
            "JUMP" => Op::Jump,
            "JUMPI" => Op::JumpI,
            "JUMPDEST" => Op::JumpDest,
            "SLOAD" => Op::SLoad,
            "SSTORE" => Op::SStore,
            "CALLDATASIZE" => Op::CallDataSize,
            "CALLER" => Op::Caller,
            "CALLVALUE" => Op::CallValue,
            "SELECTOR" => Op::Selector,
            "STOP" => Op::Stop,
            "REVERT" => Op::Revert,
            "BUG" => Op::Bug,
            _ => return None,
        })
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Push(w) => write!(f, "PUSH {w:#x}"),
            Op::Dup(n) => write!(f, "DUP{n}"),
            Op::Swap(n) => write!(f, "SWAP{n}"),
            Op::CallDataLoad(i) => write!(f, "CALLDATALOAD {i}"),
            op => f.write_str(op.mnemonic()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProgramError {
    #[error("program has no instructions")]
    Empty,
    #[error("dispatch mask has {mask} entries for {code} instructions")]
    MaskLength { mask: usize, code: usize },
    #[error("DUP/SWAP depth {0} out of range 1..=16")]
    BadDepth(u8),
}

/// Immutable code of a target plus its dispatch-region annotation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    code: Vec<Op>,
    dispatch: Vec<bool>,
    jumpdest: Vec<bool>,
}

impl Program {
    pub fn new(code: Vec<Op>, dispatch: Vec<bool>) -> Result<Self, ProgramError> {
        if code.is_empty() {
            return Err(ProgramError::Empty);
        }
        if dispatch.len() != code.len() {
            return Err(ProgramError::MaskLength { mask: dispatch.len(), code: code.len() });
        }
        for op in &code {
            if let Op::Dup(n) | Op::Swap(n) = op {
                if !(1..=16).contains(n) {
                    return Err(ProgramError::BadDepth(*n));
                }
            }
        }
        let jumpdest = code.iter().map(|op| *op == Op::JumpDest).collect();
        Ok(Program { code, dispatch, jumpdest })
    }

    /// A program without a dispatch region.
    pub fn from_code(code: Vec<Op>) -> Result<Self, ProgramError> {
        let n = code.len();
        Self::new(code, vec![false; n])
    }

    pub fn code(&self) -> &[Op] {
        &self.code
    }

    pub fn len(&self) -> usize {
        self.code.len()
    }

    pub fn is_empty(&self) -> bool {
        self.code.is_empty()
    }

    pub fn is_dispatch(&self, pc: usize) -> bool {
        self.dispatch.get(pc).copied().unwrap_or(false)
    }

    pub fn dispatch_mask(&self) -> &[bool] {
        &self.dispatch
    }

    pub fn is_jumpdest(&self, pc: usize) -> bool {
        self.jumpdest.get(pc).copied().unwrap_or(false)
    }

    pub fn dispatch_count(&self) -> usize {
        self.dispatch.iter().filter(|&&d| d).count()
    }

    /// Instructions that count towards coverage totals.
    pub fn coverable_count(&self) -> usize {
        self.len() - self.dispatch_count()
    }
}

/// SHA-256 digest of a storage image.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StorageDigest(pub [u8; 32]);

impl fmt::Display for StorageDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for StorageDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StorageDigest({self})")
    }
}

impl Serialize for StorageDigest {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for StorageDigest {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s.len() != 64 {
            return Err(serde::de::Error::custom("digest must be 64 hex chars"));
        }
        let mut out = [0u8; 32];
        for (i, byte) in out.iter_mut().enumerate() {
            *byte = u8::from_str_radix(&s[2 * i..2 * i + 2], 16).map_err(serde::de::Error::custom)?;
        }
        Ok(StorageDigest(out))
    }
}

/// Persistent storage. Absent slots read as zero; zero writes remove the slot.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Storage {
    slots: BTreeMap<Word, Word>,
}

impl Storage {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, key: &Word) -> Word {
        self.slots.get(key).copied().unwrap_or(Word::ZERO)
    }

    pub fn set(&mut self, key: Word, value: Word) {
        if value.is_zero() {
            self.slots.remove(&key);
        } else {
            self.slots.insert(key, value);
        }
    }

    /// Non-zero slots in ascending key order.
    pub fn iter(&self) -> impl Iterator<Item = (&Word, &Word)> {
        self.slots.iter()
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn digest(&self) -> StorageDigest {
        storage_digest(self)
    }
}

impl FromIterator<(Word, Word)> for Storage {
    fn from_iter<I: IntoIterator<Item = (Word, Word)>>(iter: I) -> Self {
        let mut s = Storage::new();
        for (k, v) in iter {
            s.set(k, v);
        }
        s
    }
}

/// Order-independent digest over the non-zero slot set.
pub fn storage_digest(storage: &Storage) -> StorageDigest {
    let mut h = Sha256::new();
    h.update((storage.len() as u64).to_be_bytes());
    // BTreeMap iteration is key-ordered, so insertion order cannot leak in.
    for (k, v) in storage.iter() {
        h.update(k.to_be_bytes::<32>());
        h.update(v.to_be_bytes::<32>());
    }
    StorageDigest(h.finalize().into())
}

/// One call into the target program.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Transaction {
    /// Index into the attacker pool.
    pub caller: u8,
    pub selector: u32,
    #[serde(with = "crate::word::serde_hex_vec")]
    pub args: Vec<Word>,
    #[serde(with = "crate::word::serde_hex")]
    pub value: Word,
}

impl Transaction {
    pub fn new(selector: u32, args: Vec<Word>) -> Self {
        Transaction { caller: 0, selector, args, value: Word::ZERO }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Stop,
    Revert,
    Bug,
    StepLimit,
}

impl Status {
    /// Stop or Bug: storage effects are committed.
    pub fn commits(self) -> bool {
        matches!(self, Status::Stop | Status::Bug)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Stop => "stop",
            Status::Revert => "revert",
            Status::Bug => "bug",
            Status::StepLimit => "step-limit",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RevertReason {
    Explicit,
    BadJump,
    StackUnderflow,
    StackOverflow,
    DivisionByZero,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    Load { slot: Word },
    Store { slot: Word, value: Word },
    Cmp { pc: usize, op: CmpOp, lhs: Word, rhs: Word },
    Exec { pc: usize },
    Edge { src: usize, dst: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecResult {
    pub status: Status,
    pub reason: Option<RevertReason>,
    pub new_storage: Storage,
    pub steps: u64,
    pub events: Vec<Event>,
}

enum Halt {
    Stop,
    Bug,
    Revert(RevertReason),
    StepLimit,
}

struct Machine<'a> {
    program: &'a Program,
    tx: &'a Transaction,
    base: &'a Storage,
    written: Option<Storage>,
    stack: Vec<Word>,
    events: Vec<Event>,
}

impl Machine<'_> {
    fn pop(&mut self) -> Result<Word, Halt> {
        self.stack.pop().ok_or(Halt::Revert(RevertReason::StackUnderflow))
    }

    fn push(&mut self, w: Word) -> Result<(), Halt> {
        if self.stack.len() >= STACK_LIMIT {
            return Err(Halt::Revert(RevertReason::StackOverflow));
        }
        self.stack.push(w);
        Ok(())
    }

    fn storage(&self) -> &Storage {
        self.written.as_ref().unwrap_or(self.base)
    }

    fn binary(&mut self, f: impl FnOnce(Word, Word) -> Word) -> Result<(), Halt> {
        let a = self.pop()?;
        let b = self.pop()?;
        self.push(f(a, b))
    }

    fn compare(&mut self, pc: usize, op: CmpOp) -> Result<(), Halt> {
        let lhs = self.pop()?;
        let rhs = self.pop()?;
        self.events.push(Event::Cmp { pc, op, lhs, rhs });
        let holds = match op {
            CmpOp::Lt => lhs < rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Eq => lhs == rhs,
        };
        self.push(bool_word(holds))
    }

    fn jump_target(&self, dst: Word) -> Result<usize, Halt> {
        let pc = usize::try_from(dst).map_err(|_| Halt::Revert(RevertReason::BadJump))?;
        if self.program.is_jumpdest(pc) {
            Ok(pc)
        } else {
            Err(Halt::Revert(RevertReason::BadJump))
        }
    }

    fn run(&mut self, step_limit: u64, steps: &mut u64) -> Halt {
        let mut pc = 0usize;
        loop {
            let Some(op) = self.program.code.get(pc) else {
                return Halt::Stop;
            };
            if *steps >= step_limit {
                return Halt::StepLimit;
            }
            *steps += 1;
            self.events.push(Event::Exec { pc });
            match self.step(pc, op) {
                Ok(next) => pc = next,
                Err(h) => return h,
            }
        }
    }

    fn step(&mut self, pc: usize, op: &Op) -> Result<usize, Halt> {
        match op {
            Op::Push(w) => self.push(*w)?,
            Op::Pop => {
                self.pop()?;
            }
            Op::Dup(n) => {
                let n = *n as usize;
                if self.stack.len() < n {
                    return Err(Halt::Revert(RevertReason::StackUnderflow));
                }
                let w = self.stack[self.stack.len() - n];
                self.push(w)?;
            }
            Op::Swap(n) => {
                let n = *n as usize;
                let len = self.stack.len();
                if len < n + 1 {
                    return Err(Halt::Revert(RevertReason::StackUnderflow));
                }
                self.stack.swap(len - 1, len - 1 - n);
            }
            Op::Add => self.binary(|a, b| a.wrapping_add(b))?,
            Op::Sub => self.binary(|a, b| a.wrapping_sub(b))?,
            Op::Mul => self.binary(|a, b| a.wrapping_mul(b))?,
            Op::Div => {
                let a = self.pop()?;
                let b = self.pop()?;
                if b.is_zero() {
                    return Err(Halt::Revert(RevertReason::DivisionByZero));
                }
                self.push(a / b)?;
            }
            Op::Lt => self.compare(pc, CmpOp::Lt)?,
            Op::Gt => self.compare(pc, CmpOp::Gt)?,
            Op::Eq => self.compare(pc, CmpOp::Eq)?,
            Op::IsZero => {
                let a = self.pop()?;
                self.push(bool_word(a.is_zero()))?;
            }
            Op::And => self.binary(|a, b| a & b)?,
            Op::Or => self.binary(|a, b| a | b)?,
            Op::Not => {
                let a = self.pop()?;
                self.push(!a)?;
            }
            Op::Jump => {
                let dst = self.pop()?;
                let dst = self.jump_target(dst)?;
                self.events.push(Event::Edge { src: pc, dst });
                return Ok(dst);
            }
            Op::JumpI => {
                let dst = self.pop()?;
                let cond = self.pop()?;
                if !cond.is_zero() {
                    let dst = self.jump_target(dst)?;
                    self.events.push(Event::Edge { src: pc, dst });
                    return Ok(dst);
                }
            }
            Op::JumpDest => {}
            Op::SLoad => {
                let slot = self.pop()?;
                self.events.push(Event::Load { slot });
                let v = self.storage().get(&slot);
                self.push(v)?;
            }
            Op::SStore => {
                let slot = self.pop()?;
                let value = self.pop()?;
                self.events.push(Event::Store { slot, value });
                self.written.get_or_insert_with(|| self.base.clone()).set(slot, value);
            }
            Op::CallDataLoad(i) => {
                let w = self.tx.args.get(*i as usize).copied().unwrap_or(Word::ZERO);
                self.push(w)?;
            }
            Op::CallDataSize => self.push(Word::from(self.tx.args.len()))?,
            Op::Caller => self.push(attacker_address(self.tx.caller))?,
            Op::CallValue => self.push(self.tx.value)?,
            Op::Selector => self.push(Word::from(self.tx.selector))?,
            Op::Stop => return Err(Halt::Stop),
            Op::Revert => return Err(Halt::Revert(RevertReason::Explicit)),
            Op::Bug => return Err(Halt::Bug),
        }
        Ok(pc + 1)
    }
}

fn bool_word(b: bool) -> Word {
    if b {
        Word::from(1u8)
    } else {
        Word::ZERO
    }
}

/// Runs `tx` against `storage`. Never panics on malformed programs: faults
/// surface as [`Status::Revert`] with a reason code.
pub fn execute(storage: &Storage, tx: &Transaction, program: &Program, step_limit: u64) -> ExecResult {
    let mut m = Machine {
        program,
        tx,
        base: storage,
        written: None,
        stack: Vec::with_capacity(32),
        events: Vec::with_capacity(64),
    };
    let mut steps = 0u64;
    let halt = m.run(step_limit, &mut steps);
    let (status, reason) = match halt {
        Halt::Stop => (Status::Stop, None),
        Halt::Bug => (Status::Bug, None),
        Halt::Revert(r) => (Status::Revert, Some(r)),
        Halt::StepLimit => (Status::StepLimit, None),
    };
    let new_storage = if status.commits() {
        m.written.take().unwrap_or_else(|| storage.clone())
    } else {
        storage.clone()
    };
    ExecResult { status, reason, new_storage, steps, events: m.events }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(x: u64) -> Word {
        Word::from(x)
    }

    fn run(code: Vec<Op>, tx: &Transaction) -> ExecResult {
        execute(&Storage::new(), tx, &Program::from_code(code).unwrap(), DEFAULT_STEP_LIMIT)
    }

    #[test]
    fn single_stop() {
        let mut s = Storage::new();
        s.set(w(3), w(9));
        let p = Program::from_code(vec![Op::Stop]).unwrap();
        let r = execute(&s, &Transaction::new(7, vec![w(1)]), &p, 100);
        assert_eq!(r.status, Status::Stop);
        assert_eq!(r.new_storage, s);
        assert_eq!(r.steps, 1);
        assert_eq!(r.events, vec![Event::Exec { pc: 0 }]);
    }

    #[test]
    fn wraparound() {
        let tx = Transaction::new(0, vec![]);
        let r = run(
            vec![Op::Push(w(1)), Op::Push(Word::MAX), Op::Add, Op::Push(w(0)), Op::SStore, Op::Stop],
            &tx,
        );
        assert_eq!(r.new_storage.get(&w(0)), Word::ZERO);
        // SUB computes top - second: 0 - 1.
        let r = run(vec![Op::Push(w(1)), Op::Push(w(0)), Op::Sub, Op::Push(w(0)), Op::SStore], &tx);
        assert_eq!(r.status, Status::Stop);
        assert_eq!(r.new_storage.get(&w(0)), Word::MAX);
    }

    #[test]
    fn faults_revert_with_reason() {
        let tx = Transaction::new(0, vec![]);
        let cases = [
            (vec![Op::Add], RevertReason::StackUnderflow),
            (vec![Op::Push(w(0)), Op::Push(w(4)), Op::Div], RevertReason::DivisionByZero),
            (vec![Op::Push(w(1)), Op::Jump], RevertReason::BadJump),
            (vec![Op::Push(w(1)), Op::Push(w(99)), Op::JumpI], RevertReason::BadJump),
            (vec![Op::Revert], RevertReason::Explicit),
        ];
        for (code, reason) in cases {
            let r = run(code, &tx);
            assert_eq!(r.status, Status::Revert);
            assert_eq!(r.reason, Some(reason));
        }
        let r = run(vec![Op::JumpDest, Op::Push(w(1)), Op::Push(w(0)), Op::Jump], &tx);
        assert_eq!(r.status, Status::Revert, "looping push overflows the stack");
        assert_eq!(r.reason, Some(RevertReason::StackOverflow));
    }

    #[test]
    fn revert_discards_stores() {
        let tx = Transaction::new(0, vec![]);
        let r = run(vec![Op::Push(w(5)), Op::Push(w(1)), Op::SStore, Op::Revert], &tx);
        assert_eq!(r.status, Status::Revert);
        assert!(r.new_storage.is_empty());
        assert!(r.events.contains(&Event::Store { slot: w(1), value: w(5) }));
    }

    #[test]
    fn step_limit() {
        let tx = Transaction::new(0, vec![]);
        let p = Program::from_code(vec![Op::JumpDest, Op::Push(w(0)), Op::Jump]).unwrap();
        let r = execute(&Storage::new(), &tx, &p, 50);
        assert_eq!(r.status, Status::StepLimit);
        assert_eq!(r.steps, 50);
        let p = Program::from_code(vec![Op::Push(w(1)), Op::Stop]).unwrap();
        let r = execute(&Storage::new(), &tx, &p, 2);
        assert_eq!(r.status, Status::Stop);
        assert_eq!(r.steps, 2);
    }

    #[test]
    fn calldata_and_context() {
        let mut tx = Transaction::new(0xabcd, vec![w(7)]);
        tx.caller = 2;
        tx.value = w(33);
        let code = vec![
            Op::CallDataLoad(0),
            Op::Push(w(0)),
            Op::SStore,
            Op::CallDataLoad(3),
            Op::Push(w(1)),
            Op::SStore,
            Op::Caller,
            Op::Push(w(2)),
            Op::SStore,
            Op::CallValue,
            Op::Push(w(3)),
            Op::SStore,
            Op::Selector,
            Op::Push(w(4)),
            Op::SStore,
            Op::CallDataSize,
            Op::Push(w(5)),
            Op::SStore,
        ];
        let r = run(code, &tx);
        let s = &r.new_storage;
        assert_eq!(s.get(&w(0)), w(7));
        assert_eq!(s.get(&w(1)), Word::ZERO);
        assert_eq!(s.get(&w(2)), attacker_address(2));
        assert_eq!(s.get(&w(3)), w(33));
        assert_eq!(s.get(&w(4)), w(0xabcd));
        assert_eq!(s.get(&w(5)), w(1));
        assert_eq!(attacker_index(&attacker_address(2), 4), Some(2));
    }

    #[test]
    fn compare_events_and_edges() {
        let tx = Transaction::new(0, vec![]);
        // 3 < 1 ? (top is lhs)
        let code = vec![
            Op::Push(w(1)),
            Op::Push(w(3)),
            Op::Lt,
            Op::Push(w(6)),
            Op::JumpI,
            Op::Stop,
            Op::JumpDest,
            Op::Bug,
        ];
        let r = run(code.clone(), &tx);
        assert_eq!(r.status, Status::Stop);
        assert!(r.events.contains(&Event::Cmp { pc: 2, op: CmpOp::Lt, lhs: w(3), rhs: w(1) }));
        assert!(!r.events.iter().any(|e| matches!(e, Event::Edge { .. })));
        let mut code = code;
        code[2] = Op::Gt;
        let r = run(code, &tx);
        assert_eq!(r.status, Status::Bug);
        assert!(r.events.contains(&Event::Edge { src: 4, dst: 6 }));
    }

    #[test]
    fn dup_swap() {
        let tx = Transaction::new(0, vec![]);
        let code = vec![
            Op::Push(w(1)),
            Op::Push(w(2)),
            Op::Swap(1),
            Op::Dup(2),
            Op::Push(w(10)),
            Op::SStore,
            Op::Push(w(11)),
            Op::SStore,
            Op::Push(w(12)),
            Op::SStore,
        ];
        let s = run(code, &tx).new_storage;
        assert_eq!((s.get(&w(10)), s.get(&w(11)), s.get(&w(12))), (w(2), w(1), w(2)));
    }

    #[test]
    fn digest_normalizes() {
        let mut a = Storage::new();
        a.set(w(4), Word::ZERO);
        assert_eq!(a.digest(), Storage::new().digest());
        let b: Storage = [(w(1), w(1)), (w(2), w(2))].into_iter().collect();
        let c: Storage = [(w(2), w(2)), (w(1), w(1))].into_iter().collect();
        assert_eq!(b.digest(), c.digest());
        assert_ne!(b.digest(), a.digest());
    }
}
