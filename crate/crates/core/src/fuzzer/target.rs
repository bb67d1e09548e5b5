use crate::targets::{assemble, disassemble, Abi, AsmError, Assembled, Builtin};
use crate::vm::{execute, Program, Status, Storage, StorageDigest, Transaction};

/// An assembled program ready to fuzz.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Target {
    /// Reference recorded in artifacts: a built-in name or a file path.
    pub name: String,
    pub program: Program,
    pub abi: Abi,
    pub genesis: Storage,
}

impl Target {
    pub fn new(name: impl Into<String>, a: Assembled) -> Self {
        Target { name: name.into(), program: a.program, abi: a.abi, genesis: a.genesis }
    }

    pub fn builtin(b: Builtin) -> Self {
        let a = assemble(&b.source()).expect("built-in targets assemble");
        Target::new(b.to_string(), a)
    }

    pub fn from_source(name: impl Into<String>, src: &str) -> Result<Self, AsmError> {
        Ok(Target::new(name, assemble(src)?))
    }

    /// Assembler text reproducing program, ABI and genesis.
    pub fn listing(&self) -> String {
        disassemble(&Assembled { program: self.program.clone(), abi: self.abi.clone(), genesis: self.genesis.clone() })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayStep {
    pub status: Status,
    pub digest: StorageDigest,
    pub steps: u64,
}

/// Executes `txs` in order from `start`; reverted calls leave storage as is.
pub fn replay_from(program: &Program, start: &Storage, txs: &[Transaction], step_limit: u64) -> (Vec<ReplayStep>, Storage) {
    let mut cur = start.clone();
    let mut trace = Vec::with_capacity(txs.len());
    for tx in txs {
        let r = execute(&cur, tx, program, step_limit);
        cur = r.new_storage;
        trace.push(ReplayStep { status: r.status, digest: cur.digest(), steps: r.steps });
    }
    (trace, cur)
}

pub fn replay(target: &Target, txs: &[Transaction], step_limit: u64) -> (Vec<ReplayStep>, Storage) {
    replay_from(&target.program, &target.genesis, txs, step_limit)
}
