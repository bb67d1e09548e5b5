//! Text assembler and disassembler.
//!
//! Grammar (one statement per line, `;` starts a comment):
//!
//! ```text
//! line      := label* [directive | instr]
//! label     := IDENT ':'
//! directive := '.abi' IDENT SELECTOR [KIND (',' KIND)*]
//!            | '.storage' WORD WORD
//!            | '.dispatch' ('begin' | 'end')
//! instr     := 'PUSH' (WORD | IDENT) | 'DUP'N | 'SWAP'N | 'CALLDATALOAD' INDEX | MNEMONIC
//! ```
//!
//! Without a `.dispatch` block the assembler prepends a selector chain
//! (`SELECTOR PUSH sel EQ PUSH <fn> JUMPI` per function, then `REVERT`) that
//! jumps to the label named after each `.abi` function. Dispatch pcs are
//! excluded from coverage.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::targets::abi::{parse_function, strip_comment, Abi, AbiError, AbiFunction};
use crate::vm::{Op, Program, Storage};
use crate::word::{hex, parse_word, Word};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {kind}")]
pub struct AsmError {
    pub line: usize,
    pub kind: AsmErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AsmErrorKind {
    #[error("unknown mnemonic `{0}`")]
    UnknownMnemonic(String),
    #[error("undefined label `{0}`")]
    UndefinedLabel(String),
    #[error("label `{0}` defined twice")]
    DuplicateLabel(String),
    #[error("label `{0}` does not mark a JUMPDEST")]
    NotJumpDest(String),
    #[error("`{0}` {1}")]
    Arity(String, &'static str),
    #[error("bad operand `{0}`")]
    BadOperand(String),
    #[error("bad directive: {0}")]
    Directive(String),
    #[error(transparent)]
    Abi(#[from] AbiError),
    #[error("no instructions")]
    Empty,
}

fn err(line: usize, kind: AsmErrorKind) -> AsmError {
    AsmError { line, kind }
}

/// Output of [`assemble`]: code, function table and initial storage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assembled {
    pub program: Program,
    pub abi: Abi,
    pub genesis: Storage,
}

enum Item {
    Op(Op),
    PushLabel(String),
}

struct Stmt {
    item: Item,
    line: usize,
    dispatch: bool,
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_instr(toks: &[&str], line: usize) -> Result<Item, AsmError> {
    let m = toks[0].to_ascii_uppercase();
    let operand = toks.get(1).copied();
    if toks.len() > 2 {
        return Err(err(line, AsmErrorKind::Arity(m, "takes at most one operand")));
    }
    let no_operand = |item: Item| match operand {
        Some(_) => Err(err(line, AsmErrorKind::Arity(m.clone(), "takes no operand"))),
        None => Ok(item),
    };
    match m.as_str() {
        "PUSH" => {
            let o = operand.ok_or_else(|| err(line, AsmErrorKind::Arity(m.clone(), "needs an operand")))?;
            if let Ok(w) = parse_word(o) {
                Ok(Item::Op(Op::Push(w)))
            } else if is_ident(o) {
                Ok(Item::PushLabel(o.to_string()))
            } else {
                Err(err(line, AsmErrorKind::BadOperand(o.to_string())))
            }
        }
        "CALLDATALOAD" => {
            let o = operand.ok_or_else(|| err(line, AsmErrorKind::Arity(m.clone(), "needs an operand")))?;
            let i = o.parse::<u32>().map_err(|_| err(line, AsmErrorKind::BadOperand(o.to_string())))?;
            Ok(Item::Op(Op::CallDataLoad(i)))
        }
        _ => {
            for (prefix, mk) in [("DUP", Op::Dup as fn(u8) -> Op), ("SWAP", Op::Swap as fn(u8) -> Op)] {
                if let Some(n) = m.strip_prefix(prefix) {
                    let n: u8 = n.parse().map_err(|_| err(line, AsmErrorKind::UnknownMnemonic(m.clone())))?;
                    if !(1..=16).contains(&n) {
                        return Err(err(line, AsmErrorKind::UnknownMnemonic(m.clone())));
                    }
                    return no_operand(Item::Op(mk(n)));
                }
            }
            match Op::from_mnemonic(&m) {
                Some(op) => no_operand(Item::Op(op)),
                None => Err(err(line, AsmErrorKind::UnknownMnemonic(m.clone()))),
            }
        }
    }
}

/// Parses one label-free instruction such as `PUSH 0x2a` or `DUP3`.
pub fn parse_op(text: &str) -> Result<Op, AsmError> {
    let toks: Vec<&str> = text.split_whitespace().collect();
    if toks.is_empty() {
        return Err(err(1, AsmErrorKind::Empty));
    }
    match parse_instr(&toks, 1)? {
        Item::Op(op) => Ok(op),
        Item::PushLabel(l) => Err(err(1, AsmErrorKind::UndefinedLabel(l))),
    }
}

pub fn assemble(src: &str) -> Result<Assembled, AsmError> {
    let mut stmts: Vec<Stmt> = Vec::new();
    let mut labels: HashMap<String, (usize, usize)> = HashMap::new();
    let mut abi_fns: Vec<(AbiFunction, usize)> = Vec::new();
    let mut genesis = Storage::new();
    let mut in_dispatch = false;
    let mut explicit_dispatch = false;
    let mut last_line = 0;

    // Labels are recorded against statement indices first; the optional
    // dispatch prelude shifts them afterwards.
    for (i, raw) in src.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let mut rest = strip_comment(raw).trim();
        while let Some(colon) = rest.find(':') {
            let (name, tail) = rest.split_at(colon);
            let name = name.trim();
            if !is_ident(name) {
                break;
            }
            if labels.insert(name.to_string(), (stmts.len(), line)).is_some() {
                return Err(err(line, AsmErrorKind::DuplicateLabel(name.to_string())));
            }
            rest = tail[1..].trim();
        }
        if rest.is_empty() {
            continue;
        }
        let toks: Vec<&str> = rest.split_whitespace().collect();
        match toks[0] {
            ".abi" => {
                let f = parse_function(&toks[1..]).map_err(|m| err(line, AsmErrorKind::Directive(m)))?;
                abi_fns.push((f, line));
            }
            ".storage" => {
                let [_, k, v] = toks[..] else {
                    return Err(err(line, AsmErrorKind::Directive("expected `.storage slot value`".into())));
                };
                let k = parse_word(k).map_err(|_| err(line, AsmErrorKind::BadOperand(k.into())))?;
                let v = parse_word(v).map_err(|_| err(line, AsmErrorKind::BadOperand(v.into())))?;
                genesis.set(k, v);
            }
            ".dispatch" => {
                explicit_dispatch = true;
                match (toks.get(1).copied(), in_dispatch, toks.len()) {
                    (Some("begin"), false, 2) => in_dispatch = true,
                    (Some("end"), true, 2) => in_dispatch = false,
                    _ => return Err(err(line, AsmErrorKind::Directive("unbalanced `.dispatch begin/end`".into()))),
                }
            }
            d if d.starts_with('.') => {
                return Err(err(line, AsmErrorKind::Directive(format!("unknown directive `{d}`"))));
            }
            _ => stmts.push(Stmt { item: parse_instr(&toks, line)?, line, dispatch: in_dispatch }),
        }
    }
    if in_dispatch {
        return Err(err(last_line, AsmErrorKind::Directive("`.dispatch begin` without `end`".into())));
    }

    let abi_line = abi_fns.first().map(|(_, l)| *l).unwrap_or(1);
    let abi = Abi::new(abi_fns.iter().map(|(f, _)| f.clone()).collect()).map_err(|e| err(abi_line, e.into()))?;

    let mut prelude = Vec::new();
    if !explicit_dispatch && !abi.is_empty() {
        for (f, line) in &abi_fns {
            if !labels.contains_key(&f.name) {
                return Err(err(*line, AsmErrorKind::UndefinedLabel(f.name.clone())));
            }
            for item in [
                Item::Op(Op::Selector),
                Item::Op(Op::Push(Word::from(f.selector))),
                Item::Op(Op::Eq),
                Item::PushLabel(f.name.clone()),
                Item::Op(Op::JumpI),
            ] {
                prelude.push(Stmt { item, line: *line, dispatch: true });
            }
        }
        prelude.push(Stmt { item: Item::Op(Op::Revert), line: abi_line, dispatch: true });
    }
    let shift = prelude.len();
    prelude.extend(stmts);
    let stmts = prelude;
    if stmts.is_empty() {
        return Err(err(last_line.max(1), AsmErrorKind::Empty));
    }

    let is_jumpdest = |pc: usize| matches!(stmts.get(pc), Some(Stmt { item: Item::Op(Op::JumpDest), .. }));
    let mut code = Vec::with_capacity(stmts.len());
    let mut dispatch = Vec::with_capacity(stmts.len());
    for s in &stmts {
        let op = match &s.item {
            Item::Op(op) => op.clone(),
            Item::PushLabel(name) => {
                let &(idx, _) = labels
                    .get(name)
                    .ok_or_else(|| err(s.line, AsmErrorKind::UndefinedLabel(name.clone())))?;
                let pc = idx + shift;
                if !is_jumpdest(pc) {
                    return Err(err(s.line, AsmErrorKind::NotJumpDest(name.clone())));
                }
                Op::Push(Word::from(pc))
            }
        };
        code.push(op);
        dispatch.push(s.dispatch);
    }
    let program = Program::new(code, dispatch).map_err(|e| err(1, AsmErrorKind::Directive(e.to_string())))?;
    Ok(Assembled { program, abi, genesis })
}

/// Renders assembler input that reassembles to the same [`Assembled`].
pub fn disassemble(a: &Assembled) -> String {
    let mut out = String::new();
    for f in a.abi.functions() {
        let _ = writeln!(out, ".abi {f}");
    }
    for (k, v) in a.genesis.iter() {
        let _ = writeln!(out, ".storage {} {}", hex(k), hex(v));
    }
    let p = &a.program;
    if p.dispatch_count() == 0 && !a.abi.is_empty() {
        out.push_str(".dispatch begin\n.dispatch end\n");
    }
    let mut in_dispatch = false;
    for (pc, op) in p.code().iter().enumerate() {
        let d = p.is_dispatch(pc);
        if d != in_dispatch {
            out.push_str(if d { ".dispatch begin\n" } else { ".dispatch end\n" });
            in_dispatch = d;
        }
        if *op == Op::JumpDest {
            let _ = writeln!(out, "L{pc}:");
        }
        let _ = writeln!(out, "    {op}");
    }
    if in_dispatch {
        out.push_str(".dispatch end\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stop_one_liner() {
        let a = assemble("STOP").unwrap();
        assert_eq!(a.program.len(), 1);
        assert!(a.abi.is_empty());
        assert_eq!(a.program.dispatch_count(), 0);
    }

    #[test]
    fn labels_resolve_and_dispatch_is_generated() {
        let src = "
            .abi f 0x10 uint
            .abi g 0x20
            f: JUMPDEST
               PUSH done
               JUMP
            g: JUMPDEST
            done: JUMPDEST
               STOP
        ";
        let a = assemble(src).unwrap();
        // 2 functions x 5 + REVERT
        assert_eq!(a.program.dispatch_count(), 11);
        assert_eq!(a.program.code()[3], Op::Push(Word::from(11u8)));
        assert_eq!(a.program.code()[12], Op::Push(Word::from(15u8)));
        assert_eq!(a.program.coverable_count(), 6);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases: [(&str, usize, fn(&AsmErrorKind) -> bool); 7] = [
            ("STOP\nFROB", 2, |k| matches!(k, AsmErrorKind::UnknownMnemonic(_))),
            ("PUSH nowhere\nJUMP", 1, |k| matches!(k, AsmErrorKind::UndefinedLabel(_))),
            ("a: JUMPDEST\na: STOP", 2, |k| matches!(k, AsmErrorKind::DuplicateLabel(_))),
            ("PUSH\n", 1, |k| matches!(k, AsmErrorKind::Arity(..))),
            ("STOP 3", 1, |k| matches!(k, AsmErrorKind::Arity(..))),
            ("x: STOP\nPUSH x", 2, |k| matches!(k, AsmErrorKind::NotJumpDest(_))),
            (".abi f 0x1\nSTOP", 1, |k| matches!(k, AsmErrorKind::UndefinedLabel(_))),
        ];
        for (src, line, pred) in cases {
            let e = assemble(src).unwrap_err();
            assert_eq!(e.line, line, "{src:?}: {e}");
            assert!(pred(&e.kind), "{src:?}: {e}");
        }
        assert!(assemble("; nothing\n").is_err());
        assert!(assemble(".dispatch begin\nSTOP").is_err());
    }

    #[test]
    fn genesis_and_roundtrip() {
        let src = ".abi f 0x1 address\n.storage 0x0 7\nf: JUMPDEST\nDUP1\nSWAP16\nCALLDATALOAD 2\nSTOP";
        let a = assemble(src).unwrap();
        assert_eq!(a.genesis.get(&Word::ZERO), Word::from(7u8));
        let text = disassemble(&a);
        let b = assemble(&text).unwrap();
        assert_eq!(a, b);
        assert_eq!(disassemble(&b), text);
    }
}
