//! JSON program image: the assembled form written by `asm assemble`.

use serde::{Deserialize, Serialize};

use super::abi::{Abi, AbiError, AbiFunction};
use super::asm::{parse_op, AsmError, Assembled};
use crate::vm::{Program, ProgramError, Storage};
use crate::word::Word;

pub const IMAGE_FORMAT: &str = "snapfuzz-program";
pub const IMAGE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenesisSlot {
    #[serde(with = "crate::word::serde_hex")]
    pub slot: Word,
    #[serde(with = "crate::word::serde_hex")]
    pub value: Word,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramImage {
    pub format: String,
    pub version: u32,
    pub abi: Vec<AbiFunction>,
    pub genesis: Vec<GenesisSlot>,
    /// One instruction per pc, in assembler syntax.
    pub code: Vec<String>,
    /// Pcs of the dispatch region.
    pub dispatch: Vec<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum ImageError {
    #[error("not a program image: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported image format `{format}` version {version}")]
    Version { format: String, version: u32 },
    #[error("pc {pc}: {source}")]
    Op { pc: usize, source: AsmError },
    #[error("dispatch pc {0} is out of range")]
    DispatchRange(usize),
    #[error(transparent)]
    Abi(#[from] AbiError),
    #[error(transparent)]
    Program(#[from] ProgramError),
}

impl From<&Assembled> for ProgramImage {
    fn from(a: &Assembled) -> Self {
        let p = &a.program;
        ProgramImage {
            format: IMAGE_FORMAT.into(),
            version: IMAGE_VERSION,
            abi: a.abi.functions().to_vec(),
            genesis: a.genesis.iter().map(|(k, v)| GenesisSlot { slot: *k, value: *v }).collect(),
            code: p.code().iter().map(ToString::to_string).collect(),
            dispatch: (0..p.len()).filter(|&pc| p.is_dispatch(pc)).collect(),
        }
    }
}

impl ProgramImage {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("image serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ImageError> {
        let img: ProgramImage = serde_json::from_str(text)?;
        if img.format != IMAGE_FORMAT || img.version != IMAGE_VERSION {
            return Err(ImageError::Version { format: img.format, version: img.version });
        }
        Ok(img)
    }

    pub fn to_assembled(&self) -> Result<Assembled, ImageError> {
        let code = self
            .code
            .iter()
            .enumerate()
            .map(|(pc, text)| parse_op(text).map_err(|source| ImageError::Op { pc, source }))
            .collect::<Result<Vec<_>, _>>()?;
        let mut mask = vec![false; code.len()];
        for &pc in &self.dispatch {
            *mask.get_mut(pc).ok_or(ImageError::DispatchRange(pc))? = true;
        }
        Ok(Assembled {
            program: Program::new(code, mask)?,
            abi: Abi::new(self.abi.clone())?,
            genesis: self.genesis.iter().map(|g| (g.slot, g.value)).collect::<Storage>(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::{assemble, Builtin};

    #[test]
    fn builtins_roundtrip() {
        for b in Builtin::all(3) {
            let a = assemble(&b.source()).unwrap();
            let img = ProgramImage::from(&a);
            let back = ProgramImage::from_json(&img.to_json()).unwrap();
            assert_eq!(back.to_assembled().unwrap(), a, "{b}");
        }
    }

    #[test]
    fn bad_instruction_names_pc() {
        let a = assemble(&Builtin::Chain3.source()).unwrap();
        let mut img = ProgramImage::from(&a);
        img.code[4] = "FROB".into();
        assert!(matches!(img.to_assembled(), Err(ImageError::Op { pc: 4, .. })));
    }
}
