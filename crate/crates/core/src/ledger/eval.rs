use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::expr::EntropyExpr;
use super::script::{ProtocolScript, Step};
use super::LedgerError;
use crate::entropy::{EntropyContext, RegSet};
use crate::resource::{Party, Resource};

/// Whether a tally is a resource that flows through the protocol or one
/// that is produced and then held back (the ebits Charlie sets aside).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineKind {
    Flow,
    Retained,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TallyKey {
    pub resource: Resource,
    pub from: Party,
    pub to: Party,
    pub kind: LineKind,
}

impl TallyKey {
    pub fn new(resource: Resource, from: Party, to: Party, kind: LineKind) -> Self {
        let (from, to) = if resource.is_symmetric() && to < from { (to, from) } else { (from, to) };
        TallyKey { resource, from, to, kind }
    }

    pub fn flow(resource: Resource, from: Party, to: Party) -> Self {
        Self::new(resource, from, to, LineKind::Flow)
    }
}

impl fmt::Display for TallyKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arrow = if self.resource.is_symmetric() { "<->" } else { "->" };
        write!(f, "{} {}{arrow}{}", self.resource, self.from, self.to)?;
        if self.kind == LineKind::Retained {
            f.write_str(" (retained)")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    /// The step as written in a script, or a protocol step description.
    pub step: String,
    pub deltas: Vec<(TallyKey, EntropyExpr)>,
}

/// Signed resource tallies (consumed positive, produced negative) kept as
/// entropy expressions, together with the entropies of the context they
/// were evaluated against.
#[derive(Clone, Debug, PartialEq)]
pub struct ResourceLedger {
    entropies: [f64; 16],
    tallies: BTreeMap<TallyKey, EntropyExpr>,
    trace: Vec<TraceRecord>,
}

impl ResourceLedger {
    pub fn empty(ctx: &EntropyContext) -> Self {
        ResourceLedger { entropies: ctx.entropies(), tallies: BTreeMap::new(), trace: Vec::new() }
    }

    /// A ledger of plain counts, not tied to any state: only constant
    /// expressions are meaningful in it.
    pub fn numeric() -> Self {
        ResourceLedger { entropies: [0.0; 16], tallies: BTreeMap::new(), trace: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.tallies.is_empty()
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn entropies(&self) -> &[f64; 16] {
        &self.entropies
    }

    pub fn expr(&self, key: &TallyKey) -> EntropyExpr {
        self.tallies.get(key).copied().unwrap_or_default()
    }

    pub fn value(&self, key: &TallyKey) -> f64 {
        self.expr(key).eval(&self.entropies)
    }

    /// Sum over both line kinds.
    pub fn total_expr(&self, resource: Resource, from: Party, to: Party) -> EntropyExpr {
        self.expr(&TallyKey::new(resource, from, to, LineKind::Flow))
            + self.expr(&TallyKey::new(resource, from, to, LineKind::Retained))
    }

    pub fn total(&self, resource: Resource, from: Party, to: Party) -> f64 {
        self.total_expr(resource, from, to).eval(&self.entropies)
    }

    /// `(key, symbolic tally, value)` in key order.
    pub fn tallies(&self) -> impl Iterator<Item = (TallyKey, EntropyExpr, f64)> + '_ {
        self.tallies.iter().map(|(k, e)| (*k, *e, e.eval(&self.entropies)))
    }

    /// Appends a step and its tally changes.
    pub fn record(&mut self, step: impl Into<String>, deltas: Vec<(TallyKey, EntropyExpr)>) {
        for (k, d) in &deltas {
            *self.tallies.entry(*k).or_default() += *d;
        }
        self.trace.push(TraceRecord { step: step.into(), deltas });
    }

    /// Tallies of `self` followed by `other`. Both must come from the same
    /// context.
    pub fn combine(&self, other: &ResourceLedger) -> Result<ResourceLedger, LedgerError> {
        if self.entropies != other.entropies {
            return Err(LedgerError::ContextMismatch);
        }
        let mut out = self.clone();
        for rec in &other.trace {
            out.record(rec.step.clone(), rec.deltas.clone());
        }
        Ok(out)
    }
}

/// Registers a party holds besides the state being moved.
fn side(p: Party) -> RegSet {
    match p {
        Party::Alice => RegSet::EMPTY,
        Party::Charlie => RegSet::C,
        Party::Bob => RegSet::B,
    }
}

/// Everything `A` is correlated with that `dst` does not hold.
fn reference(dst: Party) -> RegSet {
    (RegSet::B | RegSet::C | RegSet::R).minus(side(dst))
}

fn half_mi(x: RegSet, y: RegSet) -> EntropyExpr {
    EntropyExpr::mi(x, y, RegSet::EMPTY).half()
}

/// Pending symbolic records carried between steps.
#[derive(Default)]
struct Pending {
    /// Classical lines awaiting transmission: `(src, dst, rate)`.
    cbits: Vec<(Party, Party, EntropyExpr)>,
    /// Measurement records available for a coherent measurement.
    records: Vec<(Party, Party, EntropyExpr)>,
    /// Ebits produced by a coherent merge into a party: `(src, dst, amount)`.
    produced: Vec<(Party, Party, EntropyExpr)>,
    /// Amount of `A` already moved to a party by repackaging.
    credit: BTreeMap<Party, EntropyExpr>,
}

/// Evaluates a script against a context.
///
/// Every step moves the whole of `A` (what remains of it) from `src` to
/// `dst`; Charlie holds `C` and Bob holds `B`. Step effects:
///
/// * `coherent_merge s -> d`: qubits `1/2 I(A:ref)` less any repackaging
///   credit at `d`, ebits `-1/2 I(A:side(d))`.
/// * `merge s -> d`: ebits `S(A|side(d))`, a pending classical line
///   `I(A:ref)` less twice the credit, which is also the measurement record.
/// * `superdense s -> d`: turns the pending line `r` into `r/2` qubits and
///   `r/2` consumed ebits.
/// * `coherent_measurement p`: `r` ebits produced from the record `r`.
/// * `repackage p with q`: the ebits `g` last produced into `p` move to a
///   retained line, `g` ebits between `p` and `q` are consumed, and `q`
///   is credited with `g`.
pub fn evaluate(script: &ProtocolScript, ctx: &EntropyContext) -> Result<ResourceLedger, LedgerError> {
    let mut ledger = ResourceLedger::empty(ctx);
    let mut pending = Pending::default();
    let a = RegSet::A;
    for (index, step) in script.steps.iter().enumerate() {
        let deltas = match *step {
            Step::CoherentMerge { src, dst } => {
                let credit = pending.credit.remove(&dst).unwrap_or_default();
                let gain = half_mi(a, side(dst));
                pending.produced.push((src, dst, gain));
                vec![
                    (TallyKey::flow(Resource::QubitChannel, src, dst), half_mi(a, reference(dst)) - credit),
                    (TallyKey::flow(Resource::Ebit, src, dst), -gain),
                ]
            }
            Step::Merge { src, dst } => {
                let credit = pending.credit.remove(&dst).unwrap_or_default();
                let r = EntropyExpr::mi(a, reference(dst), RegSet::EMPTY) - credit.scale(2.0);
                pending.cbits.push((src, dst, r));
                pending.records.push((src, dst, r));
                vec![
                    (TallyKey::flow(Resource::Ebit, src, dst), EntropyExpr::cond_s(a, side(dst))),
                    (TallyKey::flow(Resource::Cbit, src, dst), r),
                ]
            }
            Step::Superdense { src, dst } => {
                let pos = pending
                    .cbits
                    .iter()
                    .rposition(|&(s, d, _)| s == src && d == dst)
                    .ok_or(LedgerError::NoPendingCbits { index, src, dst })?;
                let (_, _, r) = pending.cbits.remove(pos);
                vec![
                    (TallyKey::flow(Resource::Cbit, src, dst), -r),
                    (TallyKey::flow(Resource::QubitChannel, src, dst), r.half()),
                    (TallyKey::flow(Resource::Ebit, src, dst), r.half()),
                ]
            }
            Step::CoherentMeasurement { party } => {
                let pos = pending
                    .records
                    .iter()
                    .rposition(|&(s, _, _)| s == party)
                    .ok_or(LedgerError::NoMeasurementRecord { index, party })?;
                let (src, dst, r) = pending.records.remove(pos);
                vec![(TallyKey::flow(Resource::Ebit, src, dst), -r)]
            }
            Step::Repackage { party, with } => {
                let pos = pending
                    .produced
                    .iter()
                    .rposition(|&(_, d, _)| d == party)
                    .ok_or(LedgerError::NoProducedEbits { index, party })?;
                let (src, _, g) = pending.produced.remove(pos);
                *pending.credit.entry(with).or_default() += g;
                vec![
                    (TallyKey::flow(Resource::Ebit, src, party), g),
                    (TallyKey::new(Resource::Ebit, src, party, LineKind::Retained), -g),
                    (TallyKey::flow(Resource::Ebit, party, with), g),
                ]
            }
            Step::SendQubits { src, dst, ref amount } => {
                vec![(TallyKey::flow(Resource::QubitChannel, src, dst), amount.expr())]
            }
            Step::Relabel { .. } => Vec::new(),
        };
        ledger.record(step.to_string(), deltas);
    }
    Ok(ledger)
}
