//! Function table of a target and calldata encoding.
//!
//! The standalone text form is one function per line:
//!
//! ```text
//! ; name  selector    argument kinds (comma separated, may be empty)
//! incr    0x00000001  uint
//! move    0x00000002  address,uint
//! buggy   0x00000003
//! ```

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::word::Word;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArgKind {
    Uint,
    Address,
}

impl FromStr for ArgKind {
    type Err = AbiError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uint" => Ok(ArgKind::Uint),
            "address" => Ok(ArgKind::Address),
            _ => Err(AbiError::UnknownKind(s.to_string())),
        }
    }
}

impl fmt::Display for ArgKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArgKind::Uint => "uint",
            ArgKind::Address => "address",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbiFunction {
    pub name: String,
    pub selector: u32,
    pub arg_kinds: Vec<ArgKind>,
}

impl AbiFunction {
    pub fn arg_count(&self) -> usize {
        self.arg_kinds.len()
    }
}

impl fmt::Display for AbiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:#010x}", self.name, self.selector)?;
        if !self.arg_kinds.is_empty() {
            let kinds: Vec<String> = self.arg_kinds.iter().map(ToString::to_string).collect();
            write!(f, " {}", kinds.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AbiError {
    #[error("duplicate selector {0:#010x}")]
    DuplicateSelector(u32),
    #[error("duplicate function name `{0}`")]
    DuplicateName(String),
    #[error("unknown argument kind `{0}`")]
    UnknownKind(String),
    #[error("bad selector `{0}`")]
    BadSelector(String),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("`{name}` takes {expected} arguments, got {got}")]
    Arity { name: String, expected: usize, got: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Abi {
    functions: Vec<AbiFunction>,
}

impl Abi {
    pub fn new(functions: Vec<AbiFunction>) -> Result<Self, AbiError> {
        let mut sels = HashSet::new();
        let mut names = HashSet::new();
        for f in &functions {
            if !sels.insert(f.selector) {
                return Err(AbiError::DuplicateSelector(f.selector));
            }
            if !names.insert(f.name.as_str()) {
                return Err(AbiError::DuplicateName(f.name.clone()));
            }
        }
        Ok(Abi { functions })
    }

    pub fn functions(&self) -> &[AbiFunction] {
        &self.functions
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn by_selector(&self, selector: u32) -> Option<&AbiFunction> {
        self.functions.iter().find(|f| f.selector == selector)
    }

    pub fn by_name(&self, name: &str) -> Option<&AbiFunction> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// Parses the standalone text form.
    pub fn parse(text: &str) -> Result<Self, AbiError> {
        let mut fns = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            fns.push(parse_function(&toks).map_err(|msg| AbiError::Syntax { line: i + 1, msg })?);
        }
        Abi::new(fns)
    }
}

impl fmt::Display for Abi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for func in &self.functions {
            writeln!(f, "{func}")?;
        }
        Ok(())
    }
}

pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find([';', '#']) {
        Some(i) => &line[..i],
        None => line,
    }
}

pub(crate) fn parse_selector(s: &str) -> Result<u32, AbiError> {
    let hex = s.strip_prefix("0x").ok_or_else(|| AbiError::BadSelector(s.to_string()))?;
    u32::from_str_radix(hex, 16).map_err(|_| AbiError::BadSelector(s.to_string()))
}

/// `name selector [kinds]` tokens, shared with the `.abi` directive.
pub(crate) fn parse_function(toks: &[&str]) -> Result<AbiFunction, String> {
    match toks {
        [name, sel] | [name, sel, _] => {
            let selector = parse_selector(sel).map_err(|e| e.to_string())?;
            let arg_kinds = match toks.get(2) {
                Some(k) => k
                    .split(',')
                    .map(|k| k.trim().parse::<ArgKind>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| e.to_string())?,
                None => Vec::new(),
            };
            Ok(AbiFunction { name: name.to_string(), selector, arg_kinds })
        }
        _ => Err("expected `name selector [kinds]`".to_string()),
    }
}

/// Argument words for a call; word `i` is what `CALLDATALOAD i` reads.
pub fn encode_calldata(func: &AbiFunction, args: &[Word]) -> Result<Vec<Word>, AbiError> {
    check_arity(func, args.len())?;
    Ok(args.to_vec())
}

pub fn decode_calldata(func: &AbiFunction, words: &[Word]) -> Result<Vec<Word>, AbiError> {
    check_arity(func, words.len())?;
    Ok(words.to_vec())
}

fn check_arity(func: &AbiFunction, got: usize) -> Result<(), AbiError> {
    if got != func.arg_count() {
        return Err(AbiError::Arity { name: func.name.clone(), expected: func.arg_count(), got });
    }
    Ok(())
}
