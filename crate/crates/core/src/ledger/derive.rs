use serde::Serialize;

use super::eval::{evaluate, ResourceLedger};
use super::script::{parse_script, ProtocolScript};
use super::LedgerError;
use crate::entropy::{coherent_merging_rates, merging_rates, redistribution_rates, relay_rates, EntropyContext, RegSet};
use crate::resource::{Party, Resource};

/// Merging with the classical message sent by superdense coding and the
/// measurement done coherently.
pub const COHERENT_FROM_MERGING: &str = "\
merge alice -> bob
superdense alice -> bob
coherent_measurement alice
";

/// Coherent merge to Charlie, ebit repackaging, coherent merge to Bob.
pub const RELAY: &str = "\
coherent_merge alice -> charlie
repackage charlie with bob
coherent_merge charlie -> bob
";

/// Residuals below this count as a match.
pub const DERIVATION_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub label: String,
    pub derived: f64,
    pub expected: f64,
}

impl Comparison {
    pub fn residual(&self) -> f64 {
        (self.derived - self.expected).abs()
    }
}

/// A script's ledger set against the closed-form rates it should reproduce.
#[derive(Clone, Debug)]
pub struct DerivationReport {
    pub script: ProtocolScript,
    /// Named ledgers; the last is the full script.
    pub ledgers: Vec<(String, ResourceLedger)>,
    pub comparisons: Vec<Comparison>,
}

impl DerivationReport {
    pub fn residual(&self) -> f64 {
        self.comparisons.iter().map(Comparison::residual).fold(0.0, f64::max)
    }

    pub fn matches(&self) -> bool {
        self.residual() <= DERIVATION_TOL
    }

    pub fn ledger(&self) -> &ResourceLedger {
        &self.ledgers.last().expect("at least one ledger").1
    }
}

fn cmp(label: &str, derived: f64, expected: f64) -> Comparison {
    Comparison { label: label.to_string(), derived, expected }
}

/// Coherent merging rebuilt from merging; `C` must be null (fold it into
/// the reference first with [`EntropyContext::with_c_in_reference`]).
pub fn derive_coherent_from_merging(ctx: &EntropyContext) -> Result<DerivationReport, LedgerError> {
    if !ctx.is_null(RegSet::C) {
        return Err(LedgerError::NotNull("C"));
    }
    let script = parse_script(COHERENT_FROM_MERGING)?;
    let merge_only = evaluate(&ProtocolScript::new(script.steps[..1].to_vec()), ctx)?;
    let full = evaluate(&script, ctx)?;
    let m = merging_rates(ctx);
    let c = coherent_merging_rates(ctx);
    let (al, bo) = (Party::Alice, Party::Bob);
    let comparisons = vec![
        cmp("merge ebits", merge_only.total(Resource::Ebit, al, bo), m.rate("ebits").unwrap()),
        cmp("merge cbits", merge_only.total(Resource::Cbit, al, bo), m.rate("cbits").unwrap()),
        cmp("qubits", full.total(Resource::QubitChannel, al, bo), c.rate("qubits").unwrap()),
        cmp("ebits", full.total(Resource::Ebit, al, bo), c.rate("ebits").unwrap()),
        cmp("cbits", full.total(Resource::Cbit, al, bo), 0.0),
    ];
    Ok(DerivationReport {
        script,
        ledgers: vec![("merging".into(), merge_only), ("coherent".into(), full)],
        comparisons,
    })
}

/// The relay rebuilt from two coherent merges and repackaging, checked
/// against the relay rates and the end-to-end redistribution qubit rate.
/// With `C` null it also checks the collapse to plain coherent merging.
pub fn derive_redistribution_from_mergings(ctx: &EntropyContext) -> Result<DerivationReport, LedgerError> {
    let script = parse_script(RELAY)?;
    let ledger = evaluate(&script, ctx)?;
    let comparisons = relay_comparisons(&ledger, ctx);
    Ok(DerivationReport { script, ledgers: vec![("relay".into(), ledger)], comparisons })
}

/// Any ledger's Alice–Charlie and Charlie–Bob totals against the relay
/// rates of `ctx` (plus coherent merging when `C` is null).
pub fn relay_comparisons(ledger: &ResourceLedger, ctx: &EntropyContext) -> Vec<Comparison> {
    let quad = relay_rates(ctx).relay_quadruple().expect("relay report");
    let (al, ch, bo) = (Party::Alice, Party::Charlie, Party::Bob);
    let q_cb = ledger.total(Resource::QubitChannel, ch, bo);
    let e_cb = ledger.total(Resource::Ebit, ch, bo);
    let mut comparisons = vec![
        cmp("q_ac", ledger.total(Resource::QubitChannel, al, ch), quad[0]),
        cmp("e_ac", -ledger.total(Resource::Ebit, al, ch), quad[1]),
        cmp("q_cb", q_cb, quad[2]),
        cmp("e_cb", e_cb, quad[3]),
        cmp("redistribution qubits", q_cb, redistribution_rates(ctx).rate("qubits").unwrap()),
    ];
    if ctx.is_null(RegSet::C) {
        let c = coherent_merging_rates(ctx);
        comparisons.push(cmp("coherent qubits", q_cb, c.rate("qubits").unwrap()));
        comparisons.push(cmp("coherent ebits", e_cb, c.rate("ebits").unwrap()));
    }
    comparisons
}
