//! Symbolic resource accounting.
//!
//! Protocol scripts are short step lists (`coherent_merge alice -> charlie`,
//! `repackage charlie with bob`, ...). Evaluating one against an
//! [`EntropyContext`](crate::entropy::EntropyContext) yields a
//! [`ResourceLedger`] whose tallies are exact linear combinations of subset
//! entropies, so composed protocols can be compared with the closed-form
//! rates term by term.

mod derive;
mod eval;
mod expr;
mod script;

use thiserror::Error;

use crate::resource::Party;

pub use derive::{
    derive_coherent_from_merging, derive_redistribution_from_mergings, relay_comparisons, Comparison, DerivationReport,
    COHERENT_FROM_MERGING, DERIVATION_TOL, RELAY,
};
pub use eval::{evaluate, LineKind, ResourceLedger, TallyKey, TraceRecord};
pub use expr::{EntropyExpr, Quantity, RateExpr, Term};
pub use script::{parse_script, ParseError, ParseErrorKind, ProtocolScript, Step};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LedgerError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("step {index}: `{party}` has no produced ebits to repackage")]
    NoProducedEbits { index: usize, party: Party },
    #[error("step {index}: no pending classical bits from {src} to {dst}")]
    NoPendingCbits { index: usize, src: Party, dst: Party },
    #[error("step {index}: `{party}` has no measurement record")]
    NoMeasurementRecord { index: usize, party: Party },
    #[error("register `{0}` must have dimension 1")]
    NotNull(&'static str),
    #[error("ledgers come from different states")]
    ContextMismatch,
}
