//! Benchmark toolchain: assembler, function tables and built-in contracts.

pub mod abi;
pub mod asm;
pub mod image;
pub mod suite;

pub use abi::{decode_calldata, encode_calldata, Abi, AbiError, AbiFunction, ArgKind};
pub use asm::{assemble, disassemble, parse_op, AsmError, AsmErrorKind, Assembled};
pub use image::{GenesisSlot, ImageError, ProgramImage};
pub use suite::{gen_simplestate, Builtin};
