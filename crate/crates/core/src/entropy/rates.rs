use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{EntropyContext, EntropyError, RegSet};
use crate::resource::{Party, Resource};

const A: RegSet = RegSet::A;
const B: RegSet = RegSet::B;
const C: RegSet = RegSet::C;
const R: RegSet = RegSet::R;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Merging,
    CoherentMerging,
    Redistribution,
    Splitting,
    Relay,
    PartialMergeRepackaged,
    ReverseShannonSideInfo,
}

impl Protocol {
    pub const ALL: [Protocol; 7] = [
        Protocol::Merging,
        Protocol::CoherentMerging,
        Protocol::Redistribution,
        Protocol::Splitting,
        Protocol::Relay,
        Protocol::PartialMergeRepackaged,
        Protocol::ReverseShannonSideInfo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Merging => "merging",
            Protocol::CoherentMerging => "coherent_merging",
            Protocol::Redistribution => "redistribution",
            Protocol::Splitting => "splitting",
            Protocol::Relay => "relay",
            Protocol::PartialMergeRepackaged => "partial_merge_repackaged",
            Protocol::ReverseShannonSideInfo => "reverse_shannon_side_info",
        }
    }

    pub fn rates(self, ctx: &EntropyContext) -> Result<RateReport, EntropyError> {
        match self {
            Protocol::Merging => Ok(merging_rates(ctx)),
            Protocol::CoherentMerging => Ok(coherent_merging_rates(ctx)),
            Protocol::Redistribution => Ok(redistribution_rates(ctx)),
            Protocol::Splitting => splitting_rates(ctx),
            Protocol::Relay => Ok(relay_rates(ctx)),
            Protocol::PartialMergeRepackaged => Ok(partial_merge_cbits(ctx)),
            Protocol::ReverseShannonSideInfo => Ok(reverse_shannon_rates(ctx)),
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Protocol::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown protocol `{s}`"))
    }
}

/// How a signed rate reads in words.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Sent,
    Consumed,
    Produced,
}

/// One resource line. Positive rates are consumed (or sent, for channels
/// and classical bits), negative rates are produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEntry {
    pub resource: Resource,
    pub from: Party,
    pub to: Party,
    pub rate: f64,
    pub direction: Direction,
    pub label: String,
}

impl RateEntry {
    pub fn new(resource: Resource, from: Party, to: Party, rate: f64, label: &str) -> Self {
        let (from, to) = if resource.is_symmetric() && to < from {
            (to, from)
        } else {
            (from, to)
        };
        let direction = match (resource, rate < 0.0) {
            (_, true) => Direction::Produced,
            (Resource::Ebit, false) => Direction::Consumed,
            _ => Direction::Sent,
        };
        RateEntry {
            resource,
            from,
            to,
            rate,
            direction,
            label: label.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub protocol: Protocol,
    pub entries: Vec<RateEntry>,
}

impl RateReport {
    pub fn entry(&self, label: &str) -> Option<&RateEntry> {
        self.entries.iter().find(|e| e.label == label)
    }

    pub fn rate(&self, label: &str) -> Option<f64> {
        self.entry(label).map(|e| e.rate)
    }

    /// `(Q^{A->C}, E^{AC}, Q^{C->B}, E^{CB})` with both ebit rates as
    /// magnitudes in the sense of the relay display: the first is produced,
    /// the second consumed.
    pub fn relay_quadruple(&self) -> Option<[f64; 4]> {
        if self.protocol != Protocol::Relay {
            return None;
        }
        Some([
            self.rate("q_ac")?,
            -self.rate("e_ac")?,
            self.rate("q_cb")?,
            self.rate("e_cb")?,
        ])
    }
}

fn mi(ctx: &EntropyContext, x: RegSet, y: RegSet) -> f64 {
    ctx.mutual_info(x, y).expect("disjoint by construction")
}

fn cmi(ctx: &EntropyContext, x: RegSet, y: RegSet, z: RegSet) -> f64 {
    ctx.cond_mutual_info(x, y, z).expect("disjoint by construction")
}

/// Classical merging of `A` to Bob, with `C` counted as reference.
/// Ebits `S(A|B)`, classical bits `I(A:RC)`.
pub fn merging_rates(ctx: &EntropyContext) -> RateReport {
    let ebits = ctx.conditional_entropy(A, B).expect("disjoint");
    let cbits = mi(ctx, A, R | C);
    RateReport {
        protocol: Protocol::Merging,
        entries: vec![
            RateEntry::new(Resource::Ebit, Party::Alice, Party::Bob, ebits, "ebits"),
            RateEntry::new(Resource::Cbit, Party::Alice, Party::Bob, cbits, "cbits"),
        ],
    }
}

/// Fully quantum merging of `A` to Bob, with `C` counted as reference.
/// Qubits `I(A:RC)/2`, ebits `-I(A:B)/2`.
pub fn coherent_merging_rates(ctx: &EntropyContext) -> RateReport {
    RateReport {
        protocol: Protocol::CoherentMerging,
        entries: vec![
            RateEntry::new(Resource::QubitChannel, Party::Alice, Party::Bob, mi(ctx, A, R | C) / 2.0, "qubits"),
            RateEntry::new(Resource::Ebit, Party::Alice, Party::Bob, -mi(ctx, A, B) / 2.0, "ebits"),
        ],
    }
}

/// Alice holds `A C`, Bob holds `B`. Qubits `I(A:R|B)/2`, ebits
/// `I(A:C)/2 - I(A:B)/2`.
pub fn redistribution_rates(ctx: &EntropyContext) -> RateReport {
    RateReport {
        protocol: Protocol::Redistribution,
        entries: vec![
            RateEntry::new(Resource::QubitChannel, Party::Alice, Party::Bob, cmi(ctx, A, R, B) / 2.0, "qubits"),
            RateEntry::new(Resource::Ebit, Party::Alice, Party::Bob, (mi(ctx, A, C) - mi(ctx, A, B)) / 2.0, "ebits"),
        ],
    }
}

/// Redistribution with `B` null.
pub fn splitting_rates(ctx: &EntropyContext) -> Result<RateReport, EntropyError> {
    if !ctx.is_null(B) {
        return Err(EntropyError::NotNull("B"));
    }
    Ok(RateReport {
        protocol: Protocol::Splitting,
        entries: vec![
            RateEntry::new(Resource::QubitChannel, Party::Alice, Party::Bob, mi(ctx, A, R) / 2.0, "qubits"),
            RateEntry::new(Resource::Ebit, Party::Alice, Party::Bob, mi(ctx, A, C) / 2.0, "ebits"),
        ],
    })
}

/// The relay with Charlie holding `C`: qubits `I(A:RB)/2` from Alice to
/// Charlie, `I(A:C)/2` ebits produced between them, qubits `I(A:R|B)/2`
/// from Charlie to Bob and `I(A:C)/2 - I(A:B)/2` ebits consumed between
/// those two.
pub fn relay_rates(ctx: &EntropyContext) -> RateReport {
    let iac = mi(ctx, A, C);
    RateReport {
        protocol: Protocol::Relay,
        entries: vec![
            RateEntry::new(Resource::QubitChannel, Party::Alice, Party::Charlie, mi(ctx, A, R | B) / 2.0, "q_ac"),
            RateEntry::new(Resource::Ebit, Party::Alice, Party::Charlie, -iac / 2.0, "e_ac"),
            RateEntry::new(Resource::QubitChannel, Party::Charlie, Party::Bob, cmi(ctx, A, R, B) / 2.0, "q_cb"),
            RateEntry::new(Resource::Ebit, Party::Charlie, Party::Bob, (iac - mi(ctx, A, B)) / 2.0, "e_cb"),
        ],
    }
}

/// Classical merging of what remains of `A` after repackaging, against the
/// naive merge that treats `C` as reference.
pub fn partial_merge_cbits(ctx: &EntropyContext) -> RateReport {
    let half_iac = mi(ctx, A, C) / 2.0;
    RateReport {
        protocol: Protocol::PartialMergeRepackaged,
        entries: vec![
            RateEntry::new(Resource::Cbit, Party::Alice, Party::Bob, cmi(ctx, A, R, B), "repackaged"),
            RateEntry::new(Resource::Cbit, Party::Alice, Party::Bob, mi(ctx, A, R | C), "naive"),
            RateEntry::new(
                Resource::Ebit,
                Party::Alice,
                Party::Bob,
                ctx.conditional_entropy(A, B).expect("disjoint"),
                "merge_ebits",
            ),
            RateEntry::new(Resource::Ebit, Party::Alice, Party::Charlie, -half_iac, "set_aside"),
            RateEntry::new(Resource::Ebit, Party::Charlie, Party::Bob, half_iac, "swapped_in"),
        ],
    }
}

/// Redistribution run backwards, read as the exchange `B <-> C` with the
/// channel pointing from Bob's side to Alice's: qubits `I(A:R|C)/2`, ebits
/// `I(A:B)/2 - I(A:C)/2`.
pub fn reverse_shannon_rates(ctx: &EntropyContext) -> RateReport {
    RateReport {
        protocol: Protocol::ReverseShannonSideInfo,
        entries: vec![
            RateEntry::new(Resource::QubitChannel, Party::Bob, Party::Alice, cmi(ctx, A, R, C) / 2.0, "qubits"),
            RateEntry::new(Resource::Ebit, Party::Alice, Party::Bob, (mi(ctx, A, B) - mi(ctx, A, C)) / 2.0, "ebits"),
        ],
    }
}
