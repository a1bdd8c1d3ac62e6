//! State redistribution built from two coherent mergings.
//!
//! The crate has three layers:
//!
//! - [`qstate`]: dense states over named registers, partial traces,
//!   purification, fidelity and Haar sampling.
//! - [`entropy`] and [`ledger`]: exact rate calculators from marginal
//!   entropies, and a small protocol-script language whose evaluation
//!   reproduces those rates by composing merging steps.
//! - [`fqsw`] and [`relay`]: one-shot simulations of coherent merging and of
//!   the three-party relay (Alice, Charlie, Bob) with ebit repackaging.

pub mod entropy;
pub mod fqsw;
pub mod ledger;
pub mod qstate;
pub mod relay;
pub mod resource;
pub mod states;
