use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Five-level affinity bin. Lower rank means more potent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OrdinalClass {
    A,
    B,
    C,
    D,
    E,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrdinalError {
    #[error("pIC50 value {0} is not finite")]
    NonFinite(f64),
    #[error("unknown token `{0}`")]
    UnknownToken(String),
    #[error("unknown ordinal class `{0}`")]
    UnknownClass(String),
    #[error("rank {0} is outside 0..=4")]
    BadRank(usize),
}

const TOKENS: [&str; 5] = ["achoo", "blurpblurp", "choochoo", "dibbledopp", "eekeek"];

impl OrdinalClass {
    pub const ALL: [OrdinalClass; 5] = [
        OrdinalClass::A,
        OrdinalClass::B,
        OrdinalClass::C,
        OrdinalClass::D,
        OrdinalClass::E,
    ];

    pub fn rank(self) -> usize {
        self as usize
    }

    pub fn from_rank(rank: usize) -> Result<OrdinalClass, OrdinalError> {
        Self::ALL.get(rank).copied().ok_or(OrdinalError::BadRank(rank))
    }

    pub fn letter(self) -> char {
        (b'A' + self as u8) as char
    }

    /// Onomatopoeia used as the generation target.
    pub fn token(self) -> &'static str {
        TOKENS[self.rank()]
    }
}

impl fmt::Display for OrdinalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for OrdinalClass {
    type Err = OrdinalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "A" => Ok(OrdinalClass::A),
            "B" => Ok(OrdinalClass::B),
            "C" => Ok(OrdinalClass::C),
            "D" => Ok(OrdinalClass::D),
            "E" => Ok(OrdinalClass::E),
            other => Err(OrdinalError::UnknownClass(other.to_string())),
        }
    }
}

/// A: pIC50 >= 8, B: [7, 8), C: [6, 7), D: [5, 6), E: < 5.
pub fn bin_pic50(pic50: f64) -> Result<OrdinalClass, OrdinalError> {
    if !pic50.is_finite() {
        return Err(OrdinalError::NonFinite(pic50));
    }
    Ok(if pic50 >= 8.0 {
        OrdinalClass::A
    } else if pic50 >= 7.0 {
        OrdinalClass::B
    } else if pic50 >= 6.0 {
        OrdinalClass::C
    } else if pic50 >= 5.0 {
        OrdinalClass::D
    } else {
        OrdinalClass::E
    })
}

pub fn encode_class(class: OrdinalClass) -> &'static str {
    class.token()
}

/// Whole-token decode after trimming and ASCII case folding. Substrings
/// such as "choo" are rejected.
pub fn decode_token(text: &str) -> Result<OrdinalClass, OrdinalError> {
    let folded = text.trim().to_ascii_lowercase();
    TOKENS
        .iter()
        .position(|t| *t == folded)
        .map(|i| OrdinalClass::ALL[i])
        .ok_or_else(|| OrdinalError::UnknownToken(text.to_string()))
}
