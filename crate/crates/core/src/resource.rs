use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The three protocol parties. Charlie holds `C`, Bob holds `B`; Alice
/// holds `A` (and, in two-party protocols, also `C`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Charlie,
    Bob,
}

impl Party {
    pub const ALL: [Party; 3] = [Party::Alice, Party::Charlie, Party::Bob];

    pub fn name(self) -> &'static str {
        match self {
            Party::Alice => "alice",
            Party::Charlie => "charlie",
            Party::Bob => "bob",
        }
    }
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Party {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Party::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown party `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resource {
    QubitChannel,
    Ebit,
    Cbit,
}

impl Resource {
    pub fn name(self) -> &'static str {
        match self {
            Resource::QubitChannel => "qubit_channel",
            Resource::Ebit => "ebit",
            Resource::Cbit => "cbit",
        }
    }

    /// Ebits are shared, so their party pair is unordered.
    pub fn is_symmetric(self) -> bool {
        matches!(self, Resource::Ebit)
    }
}

impl fmt::Display for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
