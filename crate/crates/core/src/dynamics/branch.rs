use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Which of the two preimages to take at one backward step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// The root built from the principal square root.
    Plus,
    Minus,
}

impl Branch {
    pub fn bit(self) -> char {
        match self {
            Branch::Plus => '0',
            Branch::Minus => '1',
        }
    }

    pub fn flip(self) -> Branch {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }
}

/// A finite sequence of branch choices; entry `k` selects `z₋ₖ₋₁` among
/// the preimages of `z₋ₖ`.
///
/// Serialized as a bit string, `0` for [`Branch::Plus`] and `1` for
/// [`Branch::Minus`]. Parsing also accepts `+`/`-`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BranchWord(Vec<Branch>);

impl BranchWord {
    pub fn new(bits: Vec<Branch>) -> Self {
        BranchWord(bits)
    }

    /// The word whose bits are the binary digits of `index`, most
    /// significant first, padded to `len`.
    pub fn from_index(index: usize, len: usize) -> Self {
        BranchWord(
            (0..len)
                .map(|k| {
                    if (index >> (len - 1 - k)) & 1 == 0 {
                        Branch::Plus
                    } else {
                        Branch::Minus
                    }
                })
                .collect(),
        )
    }

    /// All `2^len` words in index order.
    pub fn all(len: usize) -> impl Iterator<Item = BranchWord> {
        (0..1usize << len).map(move |i| BranchWord::from_index(i, len))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[Branch] {
        &self.0
    }

    pub fn push(&mut self, b: Branch) {
        self.0.push(b);
    }

    pub fn prefix(&self, n: usize) -> BranchWord {
        BranchWord(self.0[..n.min(self.0.len())].to_vec())
    }

    pub fn to_bit_string(&self) -> String {
        self.0.iter().map(|b| b.bit()).collect()
    }
}

impl fmt::Display for BranchWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_string())
    }
}

impl FromStr for BranchWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|ch| match ch {
                '0' | '+' => Ok(Branch::Plus),
                '1' | '-' => Ok(Branch::Minus),
                other => Err(Error::domain(format!("invalid branch symbol {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BranchWord)
    }
}

impl Serialize for BranchWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_bit_string())
    }
}

impl<'de> Deserialize<'de> for BranchWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl FromIterator<Branch> for BranchWord {
    fn from_iter<I: IntoIterator<Item = Branch>>(iter: I) -> Self {
        BranchWord(iter.into_iter().collect())
    }
}
