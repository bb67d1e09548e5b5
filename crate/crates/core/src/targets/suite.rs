//! Built-in benchmark contracts.
//!
//! Arithmetic on persistent counters goes through checked increments
//! (`GT counter, MAX-1 -> revert`) the way a compiler with overflow checks
//! would emit them.

use std::fmt;
use std::str::FromStr;

use crate::word::{hex, Word};

fn max_minus_one() -> String {
    hex(&(Word::MAX - Word::from(1u8)))
}

fn load(slot: u64) -> String {
    format!("    PUSH {slot}\n    SLOAD\n")
}

/// `slot += 1`, reverting on overflow.
fn checked_inc(slot: u64) -> String {
    format!(
        "    PUSH {m}\n{l}    GT\n    PUSH revert\n    JUMPI\n    PUSH 1\n{l}    ADD\n    PUSH {slot}\n    SSTORE\n",
        m = max_minus_one(),
        l = load(slot)
    )
}

/// `require(slot == k)`.
fn require_slot_eq(slot: u64, k: &str) -> String {
    format!("    PUSH {k}\n{}    EQ\n    ISZERO\n    PUSH revert\n    JUMPI\n", load(slot))
}

const REVERT_TAIL: &str = "revert:\n    JUMPDEST\n    REVERT\n";

/// The counter contract: `incr(x)` needs `x <= counter`, `decr(x)` needs
/// `x >= counter`, and `buggy()` hits BUG once `counter == t`.
pub fn gen_simplestate(t: Word) -> String {
    format!(
        "\
; SimpleState with T = {t}
; slot 0: counter
.abi incr 0x00000001 uint
.abi decr 0x00000002 uint
.abi buggy 0x00000003

incr:
    JUMPDEST
{lc}    CALLDATALOAD 0
    GT                  ; x > counter
    PUSH revert
    JUMPI
{inc}    STOP

decr:
    JUMPDEST
{lc}    CALLDATALOAD 0
    LT                  ; x < counter
    PUSH revert
    JUMPI
    PUSH 1
{lc}    LT                  ; counter < 1
    PUSH revert
    JUMPI
    PUSH 1
{lc}    SUB
    PUSH 0
    SSTORE
    STOP

buggy:
    JUMPDEST
    PUSH {th}
{lc}    EQ                  ; counter == T
    PUSH bug
    JUMPI
    STOP
bug:
    JUMPDEST
    BUG
{REVERT_TAIL}",
        th = hex(&t),
        lc = load(0),
        inc = checked_inc(0),
    )
}

/// Three gated counters: `b` only moves while `a == 3`, `c` only while
/// `b == 4`; `check()` hits BUG at `c == 5`. Shortest bug sequence: 13.
pub fn gen_chain3() -> String {
    format!(
        "\
; slot 0: a, slot 1: b, slot 2: c
.abi incA 0x0000a001 uint
.abi incB 0x0000a002
.abi incC 0x0000a003
.abi check 0x0000a004

incA:
    JUMPDEST
{la}    CALLDATALOAD 0
    GT                  ; x > a
    PUSH revert
    JUMPI
{inc_a}    STOP

incB:
    JUMPDEST
{a_is_3}{inc_b}    STOP

incC:
    JUMPDEST
{b_is_4}{inc_c}    STOP

check:
    JUMPDEST
    PUSH 5
{lc}    EQ
    PUSH bug
    JUMPI
    STOP
bug:
    JUMPDEST
    BUG
{REVERT_TAIL}",
        la = load(0),
        lc = load(2),
        inc_a = checked_inc(0),
        inc_b = checked_inc(1),
        inc_c = checked_inc(2),
        a_is_3 = require_slot_eq(0, "3"),
        b_is_4 = require_slot_eq(1, "4"),
    )
}

/// `gen_chain3` plus `memo(x)`, which files `x` in a slot no guard ever
/// reads. Every distinct memo is a distinct storage image.
pub fn gen_memochain() -> String {
    let base = gen_chain3();
    let (head, tail) = base.split_once("\nincA:").expect("chain3 layout");
    format!(
        "{}\n.abi memo 0x0000a005 uint\n\nmemo:\n    JUMPDEST\n    CALLDATALOAD 0\n    PUSH 7\n    SSTORE\n    STOP\n\nincA:{}",
        head.replace("; slot 0: a, slot 1: b, slot 2: c", "; slot 0: a, slot 1: b, slot 2: c, slot 7: memo"),
        tail
    )
}

/// Stage machine with magic arguments: `open1(0x10003)`, then
/// `open2(y)` with `0xffef < y < 0x10000`, then four `turn()` calls, then
/// `check()`.
pub fn gen_gates() -> String {
    format!(
        "\
; slot 0: stage, slot 1: turns
.abi open1 0x0000b001 uint
.abi open2 0x0000b002 uint
.abi turn 0x0000b003
.abi check 0x0000b004

open1:
    JUMPDEST
{s0}    PUSH 0x10003
    CALLDATALOAD 0
    EQ
    ISZERO
    PUSH revert
    JUMPI
{inc_stage}    STOP

open2:
    JUMPDEST
{s1}    PUSH 0xffef
    CALLDATALOAD 0
    GT                  ; y > 0xffef
    ISZERO
    PUSH revert
    JUMPI
    PUSH 0x10000
    CALLDATALOAD 0
    LT                  ; y < 0x10000
    ISZERO
    PUSH revert
    JUMPI
{inc_stage}    STOP

turn:
    JUMPDEST
{s2}{inc_turns}    PUSH 4
{lt}    EQ
    ISZERO
    PUSH done
    JUMPI
{inc_stage}done:
    JUMPDEST
    STOP

check:
    JUMPDEST
{s3}    BUG
{REVERT_TAIL}",
        s0 = require_slot_eq(0, "0"),
        s1 = require_slot_eq(0, "1"),
        s2 = require_slot_eq(0, "2"),
        s3 = require_slot_eq(0, "3"),
        lt = load(1),
        inc_stage = checked_inc(0),
        inc_turns = checked_inc(1),
    )
}

/// Multi-slot vault. Every successful call bumps a nonce and mixes the
/// call (selector, argument, caller, value) into an accumulator over
/// `MIX_ROUNDS` rounds, so nearly every non-reverting call yields a fresh
/// storage image.
pub fn gen_nonce_vault() -> String {
    format!(
        "\
; slot 0: nonce, slot 1: total, slot 2: acc, slot CALLER: per-caller balance
.abi deposit 0x0000c001 uint
.abi withdraw 0x0000c002 uint
.abi ping 0x0000c003
.abi audit 0x0000c004

deposit:
    JUMPDEST
    PUSH 0x10000000000000000
    CALLDATALOAD 0
    LT                  ; x < 2^64
    ISZERO
    PUSH revert
    JUMPI
    CALLDATALOAD 0
    CALLER
    SLOAD
    ADD
    CALLER
    SSTORE              ; bal[caller] += x
    CALLDATALOAD 0
{lt}    ADD
    PUSH 1
    SSTORE              ; total += x
    PUSH fold
    JUMP

withdraw:
    JUMPDEST
    CALLER
    SLOAD
    CALLDATALOAD 0
    GT                  ; x > bal[caller]
    PUSH revert
    JUMPI
    CALLDATALOAD 0
    CALLER
    SLOAD
    SUB
    CALLER
    SSTORE              ; bal[caller] -= x
    CALLDATALOAD 0
{lt}    SUB
    PUSH 1
    SSTORE              ; total -= x
    PUSH fold
    JUMP

ping:
    JUMPDEST
    PUSH fold
    JUMP

audit:
    JUMPDEST
    PUSH 0x1337
{lt}    EQ
    ISZERO
    PUSH revert
    JUMPI
    PUSH 8
{ln}    LT                  ; nonce < 8
    PUSH revert
    JUMPI
    BUG

fold:
    JUMPDEST
    SELECTOR
    CALLDATALOAD 0
    ADD
    CALLER
    ADD
    CALLVALUE
    ADD
    PUSH 3
{la}    MUL
    ADD                 ; h = acc * 3 + sel + x + caller + value
    PUSH {rounds}
mix:
    JUMPDEST            ; stack: h n
    SWAP1
    PUSH 0x100000001b3
    MUL
    DUP2
    ADD                 ; h = h * p + n
    SWAP1
    PUSH 1
    SWAP1
    SUB                 ; n -= 1
    DUP1
    PUSH mix
    JUMPI
    POP
    PUSH 2
    SSTORE              ; acc = h
{inc_nonce}    STOP
{REVERT_TAIL}",
        ln = load(0),
        lt = load(1),
        la = load(2),
        inc_nonce = checked_inc(0),
        rounds = MIX_ROUNDS,
    )
}

/// Mixing rounds per successful `nonce_vault` call.
pub const MIX_ROUNDS: u32 = 24;

/// Ownership handover: `claim()` once, `transfer(addr)` by the owner,
/// then `sweep()` by an owner other than the original claimer hits BUG.
pub fn gen_owner() -> String {
    format!(
        "\
; slot 0: owner, slot 1: first claimer
.abi claim 0x0000d001
.abi transfer 0x0000d002 address
.abi sweep 0x0000d003

claim:
    JUMPDEST
{lo}    ISZERO
    ISZERO
    PUSH revert
    JUMPI
    CALLER
    PUSH 0
    SSTORE
    CALLER
    PUSH 1
    SSTORE
    STOP

transfer:
    JUMPDEST
{owner_only}    CALLDATALOAD 0
    PUSH 0
    SSTORE
    STOP

sweep:
    JUMPDEST
{owner_only}    PUSH 1
    SLOAD
    CALLER
    EQ
    PUSH revert
    JUMPI
    BUG
{REVERT_TAIL}",
        lo = load(0),
        owner_only = format!("{}    CALLER\n    EQ\n    ISZERO\n    PUSH revert\n    JUMPI\n", load(0)),
    )
}

/// Argument maze: `enter(a, b, c)` needs `a == 255`, `b == 2^16`,
/// `c == a + 1`; afterwards `exit()` hits BUG.
pub fn gen_maze() -> String {
    format!(
        "\
; slot 0: flag
.abi enter 0x0000e001 uint,uint,uint
.abi exit 0x0000e002

enter:
    JUMPDEST
    PUSH 255
    CALLDATALOAD 0
    EQ
    ISZERO
    PUSH revert
    JUMPI
    PUSH 0x10000
    CALLDATALOAD 1
    EQ
    ISZERO
    PUSH revert
    JUMPI
    PUSH 1
    CALLDATALOAD 0
    ADD
    CALLDATALOAD 2
    EQ
    ISZERO
    PUSH revert
    JUMPI
    PUSH 1
    PUSH 0
    SSTORE
    STOP

exit:
    JUMPDEST
{f1}    BUG
{REVERT_TAIL}",
        f1 = require_slot_eq(0, "1"),
    )
}

/// Two counters that must move in lock-step: `ping()` needs `a == b`,
/// `pong()` needs `a == b + 1`; `score()` hits BUG at `b == 6`.
pub fn gen_pingpong() -> String {
    format!(
        "\
; slot 0: a, slot 1: b
.abi ping 0x0000f001
.abi pong 0x0000f002
.abi score 0x0000f003

ping:
    JUMPDEST
{lb}{la}    EQ
    ISZERO
    PUSH revert
    JUMPI
{inc_a}    STOP

pong:
    JUMPDEST
    PUSH 1
{lb}    ADD
{la}    EQ
    ISZERO
    PUSH revert
    JUMPI
{inc_b}    STOP

score:
    JUMPDEST
{b6}    BUG
{REVERT_TAIL}",
        la = load(0),
        lb = load(1),
        inc_a = checked_inc(0),
        inc_b = checked_inc(1),
        b6 = require_slot_eq(1, "6"),
    )
}

/// A named built-in target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    SimpleState(u64),
    Chain3,
    Gates,
    NonceVault,
    Owner,
    Maze,
    PingPong,
    MemoChain,
}

impl Builtin {
    pub const NAMES: [&'static str; 8] =
        ["simplestate", "chain3", "gates", "nonce_vault", "owner", "maze", "pingpong", "memochain"];

    pub fn source(self) -> String {
        match self {
            Builtin::SimpleState(t) => gen_simplestate(Word::from(t)),
            Builtin::Chain3 => gen_chain3(),
            Builtin::Gates => gen_gates(),
            Builtin::NonceVault => gen_nonce_vault(),
            Builtin::Owner => gen_owner(),
            Builtin::Maze => gen_maze(),
            Builtin::PingPong => gen_pingpong(),
            Builtin::MemoChain => gen_memochain(),
        }
    }

    /// Every built-in, SimpleState at `t`.
    pub fn all(t: u64) -> Vec<Builtin> {
        vec![
            Builtin::SimpleState(t),
            Builtin::Chain3,
            Builtin::Gates,
            Builtin::NonceVault,
            Builtin::Owner,
            Builtin::Maze,
            Builtin::PingPong,
            Builtin::MemoChain,
        ]
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Builtin::SimpleState(t) => write!(f, "simplestate:{t}"),
            Builtin::Chain3 => f.write_str("chain3"),
            Builtin::Gates => f.write_str("gates"),
            Builtin::NonceVault => f.write_str("nonce_vault"),
            Builtin::Owner => f.write_str("owner"),
            Builtin::Maze => f.write_str("maze"),
            Builtin::PingPong => f.write_str("pingpong"),
            Builtin::MemoChain => f.write_str("memochain"),
        }
    }
}

impl FromStr for Builtin {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let b = match name {
            "simplestate" => {
                let t = match param {
                    Some(p) => p.trim_start_matches("T=").parse::<u64>().map_err(|_| format!("bad T in `{s}`"))?,
                    None => 2,
                };
                if t == 0 {
                    return Err("simplestate needs T >= 1".into());
                }
                return Ok(Builtin::SimpleState(t));
            }
            "chain3" => Builtin::Chain3,
            "gates" => Builtin::Gates,
            "nonce_vault" => Builtin::NonceVault,
            "owner" => Builtin::Owner,
            "maze" => Builtin::Maze,
            "pingpong" => Builtin::PingPong,
            "memochain" => Builtin::MemoChain,
            _ => return Err(format!("unknown target `{s}` (one of {})", Builtin::NAMES.join(", "))),
        };
        if param.is_some() {
            return Err(format!("target `{name}` takes no parameter"));
        }
        Ok(b)
    }
}
