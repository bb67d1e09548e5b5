//! The VM's universal value type and its text forms.

use std::fmt;

/// Unsigned 256-bit integer with wrap-around arithmetic.
pub type Word = ruint::aliases::U256;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid word literal `{0}`")]
pub struct ParseWordError(pub String);

/// Parses a decimal or `0x`-prefixed hexadecimal literal.
pub fn parse_word(text: &str) -> Result<Word, ParseWordError> {
    let t = text.trim();
    let parsed = if let Some(hex) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        if hex.is_empty() {
            return Err(ParseWordError(text.to_string()));
        }
        Word::from_str_radix(hex, 16)
    } else {
        if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit() || b == b'_') {
            return Err(ParseWordError(text.to_string()));
        }
        Word::from_str_radix(t, 10)
    };
    parsed.map_err(|_| ParseWordError(text.to_string()))
}

/// Lower-case `0x` hex without leading zeros.
pub struct Hex<'a>(pub &'a Word);

impl fmt::Display for Hex<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

pub fn hex(w: &Word) -> String {
    Hex(w).to_string()
}

/// Serde adapter storing a [`Word`] as a hex string.
pub mod serde_hex {
    use super::{hex, parse_word, Word};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(w: &Word, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex(w))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Word, D::Error> {
        let s = String::deserialize(d)?;
        parse_word(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Word>`.
pub mod serde_hex_vec {
    use super::{hex, parse_word, Word};
    use serde::ser::SerializeSeq;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(ws: &[Word], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(ws.len()))?;
        for w in ws {
            seq.serialize_element(&hex(w))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Word>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_word(s).map_err(serde::de::Error::custom))
            .collect()
    }
}
