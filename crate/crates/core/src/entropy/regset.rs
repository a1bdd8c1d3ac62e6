use std::fmt;
use std::ops::BitOr;

use super::{EntropyError, PARTY_REGISTERS};

/// A subset of `{A, B, C, R}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegSet(u8);

impl RegSet {
    pub const EMPTY: RegSet = RegSet(0);
    pub const A: RegSet = RegSet(1);
    pub const B: RegSet = RegSet(2);
    pub const C: RegSet = RegSet(4);
    pub const R: RegSet = RegSet(8);
    pub const ALL: RegSet = RegSet(15);

    pub fn from_bits(bits: u8) -> RegSet {
        RegSet(bits & 15)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Parses a run of register letters such as `"RB"`. Letters may not repeat.
    pub fn parse(s: &str) -> Result<RegSet, EntropyError> {
        let mut set = RegSet::EMPTY;
        for ch in s.chars() {
            let one = match ch {
                'A' => RegSet::A,
                'B' => RegSet::B,
                'C' => RegSet::C,
                'R' => RegSet::R,
                _ => return Err(EntropyError::BadSubset(s.to_string())),
            };
            if set.contains(one) {
                return Err(EntropyError::BadSubset(s.to_string()));
            }
            set = set | one;
        }
        Ok(set)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, other: RegSet) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn is_disjoint(self, other: RegSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn complement(self) -> RegSet {
        RegSet(!self.0 & 15)
    }

    pub fn minus(self, other: RegSet) -> RegSet {
        RegSet(self.0 & !other.0)
    }

    /// Register names in canonical order.
    pub fn names(self) -> impl Iterator<Item = &'static str> {
        PARTY_REGISTERS
            .into_iter()
            .enumerate()
            .filter(move |(i, _)| self.0 & (1 << i) != 0)
            .map(|(_, n)| n)
    }

    /// All 16 subsets.
    pub fn all_subsets() -> impl Iterator<Item = RegSet> {
        (0u8..16).map(RegSet)
    }
}

impl BitOr for RegSet {
    type Output = RegSet;

    fn bitor(self, rhs: RegSet) -> RegSet {
        RegSet(self.0 | rhs.0)
    }
}

impl fmt::Display for RegSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in self.names() {
            f.write_str(n)?;
        }
        Ok(())
    }
}
