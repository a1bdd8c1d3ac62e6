use serde::{Deserialize, Serialize};

use super::FqswError;
use crate::qstate::{PureState, Unitary};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoder {
    /// Rotate `A` and send a `2^k`-dimensional factor of it.
    #[default]
    Split,
    /// Append a `2^k`-dimensional ancilla in |0>, rotate `A` with it and
    /// send the ancilla.
    Ancilla,
}

impl std::str::FromStr for Encoder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "split" => Ok(Encoder::Split),
            "ancilla" => Ok(Encoder::Ancilla),
            _ => Err(format!("unknown encoder `{s}`")),
        }
    }
}

/// Who holds what in a merge: `source` moves to the party holding `side`;
/// every other register of the state is reference.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeRoles {
    pub source: String,
    pub side: Vec<String>,
}

impl MergeRoles {
    pub fn new(source: &str, side: &[&str]) -> Self {
        MergeRoles {
            source: source.to_string(),
            side: side.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// `A` merged to the holder of `B`.
    pub fn alice_to_bob() -> Self {
        Self::new("A", &["B"])
    }

    pub fn sent_name(&self) -> String {
        format!("{}_sent", self.source)
    }

    pub fn kept_name(&self) -> String {
        format!("{}_kept", self.source)
    }
}

/// An encoded state: the source register replaced by a sent and a kept
/// part.
#[derive(Clone, Debug)]
pub struct Encoded {
    pub state: PureState,
    pub roles: MergeRoles,
    /// Registers that are neither kept, sent nor side.
    pub reference: Vec<String>,
}

impl Encoded {
    pub fn kept(&self) -> String {
        self.roles.kept_name()
    }

    pub fn sent(&self) -> String {
        self.roles.sent_name()
    }

    pub fn kept_dim(&self) -> usize {
        self.state.layout().dim_of(&self.kept()).expect("encoded layout")
    }

    pub fn sent_dim(&self) -> usize {
        self.state.layout().dim_of(&self.sent()).expect("encoded layout")
    }

    /// Kept register followed by the reference registers: the systems the
    /// receiver never touches.
    pub fn outside(&self) -> Vec<String> {
        let mut v = vec![self.kept()];
        v.extend(self.reference.iter().cloned());
        v
    }
}

/// Dimension of the unitary the encoder expects.
pub fn encoder_dim(source_dim: usize, sent_qubits: u32, encoder: Encoder) -> Option<usize> {
    let sent = 1usize.checked_shl(sent_qubits)?;
    match encoder {
        Encoder::Split => Some(source_dim),
        Encoder::Ancilla => source_dim.checked_mul(sent),
    }
}

/// Applies `u` to the source (and ancilla) only, then re-partitions into
/// `{source}_sent` (dimension `2^k`) and `{source}_kept`.
pub fn encode(
    psi: &PureState,
    roles: &MergeRoles,
    sent_qubits: u32,
    encoder: Encoder,
    u: &Unitary,
) -> Result<Encoded, FqswError> {
    let layout = psi.layout();
    let d = layout.dim_of(&roles.source)?;
    for s in &roles.side {
        layout.dim_of(s)?;
    }
    let sent_dim = 1usize
        .checked_shl(sent_qubits)
        .ok_or(FqswError::TooManySentQubits { sent_qubits, source_dim: d })?;
    let (sent, kept) = (roles.sent_name(), roles.kept_name());
    let state = match encoder {
        Encoder::Split => {
            if d % sent_dim != 0 {
                return Err(FqswError::TooManySentQubits { sent_qubits, source_dim: d });
            }
            check_dim(u, d)?;
            psi.apply(&[&roles.source], u)?
                .split_register(&roles.source, &[(&sent, sent_dim), (&kept, d / sent_dim)])?
        }
        Encoder::Ancilla => {
            check_dim(u, d * sent_dim)?;
            psi.with_ancilla(&sent, sent_dim)?
                .apply(&[&roles.source, &sent], u)?
                .rename(&roles.source, &kept)?
        }
    };
    let reference = state
        .layout()
        .names()
        .filter(|n| *n != sent && *n != kept && !roles.side.iter().any(|s| s == n))
        .map(str::to_string)
        .collect();
    Ok(Encoded { state, roles: roles.clone(), reference })
}

fn check_dim(u: &Unitary, expected: usize) -> Result<(), FqswError> {
    if u.dim() != expected {
        return Err(FqswError::State(crate::qstate::QStateError::DimensionMismatch {
            expected,
            found: u.dim(),
        }));
    }
    Ok(())
}
