//! Rule words: the ant's program, a word over `{L, R}`.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Turn sense selected by a symbol.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Letter {
    L,
    R,
}

/// Symbols are one byte per cell, so the alphabet (= word length) caps at 256.
pub const MAX_RULE_LEN: usize = 256;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RuleError {
    #[error("rule word must not be empty")]
    Empty,
    #[error("rule word longer than {MAX_RULE_LEN} symbols")]
    TooLong,
    #[error("rule word may only contain 'L' and 'R', got {0:?}")]
    BadLetter(char),
}

/// A rule word `w`. Symbol `s` means "turn `w[s]`", and the alphabet is
/// `{0, …, |w|-1}` with the symbol under the ant incremented cyclically.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RuleWord {
    letters: Vec<Letter>,
}

impl RuleWord {
    pub fn new(letters: Vec<Letter>) -> Result<Self, RuleError> {
        if letters.is_empty() {
            return Err(RuleError::Empty);
        }
        if letters.len() > MAX_RULE_LEN {
            return Err(RuleError::TooLong);
        }
        Ok(RuleWord { letters })
    }

    /// The word `L^m R`.
    pub fn l_pow_r(m: usize) -> Result<Self, RuleError> {
        let mut letters = vec![Letter::L; m];
        letters.push(Letter::R);
        RuleWord::new(letters)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Alphabet size equals word length.
    pub fn alphabet_size(&self) -> usize {
        self.letters.len()
    }

    pub fn turn(&self, symbol: u8) -> Letter {
        self.letters[symbol as usize]
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// All-L or all-R words make the ant circle forever.
    pub fn is_trivial(&self) -> bool {
        self.letters.iter().all(|&l| l == Letter::L)
            || self.letters.iter().all(|&l| l == Letter::R)
    }
}

impl FromStr for RuleWord {
    type Err = RuleError;

    fn from_str(s: &str) -> Result<Self, RuleError> {
        let letters = s
            .chars()
            .map(|c| match c {
                'L' => Ok(Letter::L),
                'R' => Ok(Letter::R),
                other => Err(RuleError::BadLetter(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        RuleWord::new(letters)
    }
}

impl fmt::Display for RuleWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            f.write_str(match l {
                Letter::L => "L",
                Letter::R => "R",
            })?;
        }
        Ok(())
    }
}

impl fmt::Debug for RuleWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for RuleWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RuleWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display_round_trip() {
        let w: RuleWord = "LLRL".parse().unwrap();
        assert_eq!(w.to_string(), "LLRL");
        assert_eq!(w.alphabet_size(), 4);
        assert_eq!(w.turn(2), Letter::R);
    }

    #[test]
    fn triviality() {
        assert!("LL".parse::<RuleWord>().unwrap().is_trivial());
        assert!("R".parse::<RuleWord>().unwrap().is_trivial());
        assert!(!"LR".parse::<RuleWord>().unwrap().is_trivial());
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!("".parse::<RuleWord>(), Err(RuleError::Empty));
        assert_eq!("LXR".parse::<RuleWord>(), Err(RuleError::BadLetter('X')));
        assert!(RuleWord::l_pow_r(MAX_RULE_LEN).is_err());
        assert!(RuleWord::l_pow_r(MAX_RULE_LEN - 1).is_ok());
    }

    #[test]
    fn l_pow_r_shape() {
        let w = RuleWord::l_pow_r(4).unwrap();
        assert_eq!(w.to_string(), "LLLLR");
    }
}
