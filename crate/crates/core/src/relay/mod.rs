//! The three-party relay.
//!
//! Alice merges `A` into Charlie (who holds `C`), Charlie swaps the ebits
//! this generates for ebits he already shares with Bob and undoes his
//! decoder, then merges what Alice sent him on to Bob (who holds `B`).
//! Everything runs on one global state vector; [`GlobalState`] records
//! who holds each register.

mod global;
mod structured;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use global::{repackage, GlobalState, Holder};
pub use structured::{Factor, QubitRole, StructuredState, PARTY_REGISTERS};

use crate::entropy::{coherent_merging_rates, relay_rates, EntropyContext, RegSet};
use crate::fqsw::{build_decoder, overlap, trial_rng, FqswError};
use crate::ledger::{Comparison, EntropyExpr, LineKind, ResourceLedger, TallyKey};
use crate::qstate::{haar_unitary, maximally_entangled, trace_distance, PureState, QStateError, SystemLayout};
use crate::resource::{Party, Resource};

/// Tolerance for comparing exact-mode counts with the rates.
pub const EXACT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelayError {
    #[error(transparent)]
    State(#[from] QStateError),
    #[error(transparent)]
    Fqsw(#[from] FqswError),
    #[error("structured state: {0}")]
    Structure(String),
    #[error("exact mode needs a structured state")]
    StructureRequired,
    #[error("repackaging swaps {needed} ebits but only {available} are pre-shared")]
    InsufficientPreshared { needed: u32, available: u32 },
    #[error("ownership: {0}")]
    Ownership(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelayMode {
    /// Structured states, with encoders that permute qubits of known role.
    #[default]
    ExactStructured,
    /// Any state, with Haar-random encoders.
    Approximate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelayConfig {
    pub copies: usize,
    pub qubits_ac: u32,
    pub qubits_cb: u32,
    pub preshared_cb_ebits: u32,
    pub mode: RelayMode,
    pub trials: usize,
    pub seed: u64,
}

impl Default for RelayConfig {
    fn default() -> Self {
        RelayConfig {
            copies: 1,
            qubits_ac: 0,
            qubits_cb: 0,
            preshared_cb_ebits: 0,
            mode: RelayMode::ExactStructured,
            trials: 1,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub enum RelayInput {
    Structured(StructuredState),
    State(PureState),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelayResult {
    pub trial: usize,
    pub copies: usize,
    pub mode: RelayMode,
    /// Fidelity of the output's `A_hat, B, C, R` marginal with the input
    /// state (`A` now at Bob).
    pub fidelity_final: f64,
    /// Trace distance between Charlie's `C` before the relay and after
    /// repackaging.
    pub catalyst_deviation: f64,
    /// Global overlaps with the ideal state after step 1b, after step 2 and
    /// after step 3.
    pub per_step_fidelities: [f64; 3],
    /// Overlap of the state after step 2 with the state in which Alice
    /// sent her kept part straight to Bob.
    pub step2_equivalence: f64,
    /// Pre-shared Charlie–Bob ebits swapped in.
    pub ebits_consumed: f64,
    /// The retained Alice–Charlie ebits plus the Charlie–Bob ebits left by
    /// the last step.
    pub ebits_produced: f64,
    pub ledger: ResourceLedger,
}

impl RelayResult {
    pub fn qubits_ac(&self) -> f64 {
        self.ledger.total(Resource::QubitChannel, Party::Alice, Party::Charlie)
    }

    pub fn qubits_cb(&self) -> f64 {
        self.ledger.total(Resource::QubitChannel, Party::Charlie, Party::Bob)
    }
}

const A_SENT: &str = "A_sent";
const A_KEPT: &str = "A_kept";
const A_JUNK: &str = "A_junk";
const A_EBIT: &str = "A_ebit";
const A_HAT: &str = "A_hat";
const A2_SENT: &str = "A2_sent";
const A2_KEPT: &str = "A2_kept";
const A2_JUNK: &str = "A2_junk";
const A2_EBIT: &str = "A2_ebit";
const CB_C: &str = "CB_c";
const CB_B: &str = "CB_b";
const CB_C_SPARE: &str = "CB_c_spare";
const CB_B_SPARE: &str = "CB_b_spare";

struct Prepared {
    psi: PureState,
    roles: Option<Vec<QubitRole>>,
}

/// The source register cut into a sent part, a kept part and (structured
/// only) basis bits left behind.
struct Split {
    state: PureState,
    sent_roles: Option<Vec<QubitRole>>,
    kept_qubits: u32,
    /// The left-behind bits, as a state on the junk register.
    junk: PureState,
}

fn log2_exact(d: usize) -> Option<u32> {
    d.is_power_of_two().then(|| d.trailing_zeros())
}

/// Cuts `source` into `names = (sent, kept, junk)` with `q` qubits sent.
///
/// Structured: qubits whose partner the receiver lacks go first, then
/// those paired with the receiver, then basis bits; the first `q` are
/// sent, remaining basis bits become junk. Otherwise a Haar unitary is
/// applied and the leading `2^q` factor sent.
fn split_source<R: Rng + ?Sized>(
    state: &PureState,
    source: &str,
    roles: Option<&[QubitRole]>,
    receiver: &[&str],
    q: u32,
    rng: &mut R,
    names: [&str; 3],
) -> Result<Split, RelayError> {
    let [sent, kept, junk] = names;
    let d = state.layout().dim_of(source)?;
    let too_many = || FqswError::TooManySentQubits { sent_qubits: q, source_dim: d };
    let Some(roles) = roles else {
        let sent_dim = 1usize.checked_shl(q).filter(|s| d % s == 0).ok_or_else(too_many)?;
        let kept_dim = d / sent_dim;
        let kept_qubits = log2_exact(kept_dim)
            .ok_or_else(|| RelayError::InvalidConfig(format!("kept dimension {kept_dim} is not a power of two")))?;
        let u = haar_unitary(d, rng);
        let state = state
            .apply(&[source], &u)?
            .split_register(source, &[(sent, sent_dim), (kept, kept_dim)])?
            .with_ancilla(junk, 1)?;
        return Ok(Split { state, sent_roles: None, kept_qubits, junk: PureState::zero(junk, 1)? });
    };
    if roles.len() as u32 != d.trailing_zeros() || !d.is_power_of_two() {
        return Err(RelayError::Structure(format!("{} roles for a register of dimension {d}", roles.len())));
    }
    if q as usize > roles.len() {
        return Err(too_many().into());
    }
    let rank = |r: &QubitRole| match r {
        QubitRole::Paired(p) if !receiver.contains(&p.as_str()) => 0,
        QubitRole::Paired(_) => 1,
        QubitRole::Basis(_) => 2,
    };
    let mut order: Vec<usize> = (0..roles.len()).collect();
    order.sort_by_key(|&i| rank(&roles[i]));
    let bit = |i: usize| format!("{source}~{i}");
    let (send, rest) = order.split_at(q as usize);
    let keep: Vec<usize> = rest.iter().copied().filter(|&i| rank(&roles[i]) < 2).collect();
    let left: Vec<usize> = rest.iter().copied().filter(|&i| rank(&roles[i]) == 2).collect();

    let bits: Vec<String> = (0..roles.len()).map(bit).collect();
    let parts: Vec<(&str, usize)> = bits.iter().map(|b| (b.as_str(), 2)).collect();
    let mut out = state.split_register(source, &parts)?;
    for (group, name) in [(send, sent), (&keep[..], kept), (&left[..], junk)] {
        let members: Vec<&str> = group.iter().map(|&i| bits[i].as_str()).collect();
        out = out.merge_registers(&members, name)?;
    }
    let value = left.iter().fold(0usize, |v, &i| match roles[i] {
        QubitRole::Basis(b) => (v << 1) | b as usize,
        QubitRole::Paired(_) => unreachable!("junk holds basis bits only"),
    });
    let junk_state = PureState::basis(SystemLayout::new([(junk, 1usize << left.len())])?, &[value])?;
    Ok(Split {
        state: out,
        sent_roles: Some(send.iter().map(|&i| roles[i].clone()).collect()),
        kept_qubits: keep.len() as u32,
        junk: junk_state,
    })
}

fn phi(qubits: u32, names: [&str; 2]) -> Result<PureState, RelayError> {
    Ok(maximally_entangled(1usize << qubits, names)?)
}

fn constant(x: f64) -> EntropyExpr {
    EntropyExpr::constant(x)
}

fn relay_trial(prep: &Prepared, cfg: &RelayConfig, trial: usize) -> Result<RelayResult, RelayError> {
    let mut rng = trial_rng(cfg.seed, trial);
    let psi = &prep.psi;
    let psi_hat = psi.rename("A", A_HAT)?;
    let mut ledger = ResourceLedger::numeric();
    let (alice, charlie, bob) = (Party::Alice, Party::Charlie, Party::Bob);

    // 1a: Alice encodes A and sends part of it to Charlie.
    let s1 = split_source(psi, "A", prep.roles.as_deref(), &["C"], cfg.qubits_ac, &mut rng, [A_SENT, A_KEPT, A_JUNK])?;
    let g = s1.kept_qubits;
    if g > cfg.preshared_cb_ebits {
        return Err(RelayError::InsufficientPreshared { needed: g, available: cfg.preshared_cb_ebits });
    }
    let spare = cfg.preshared_cb_ebits - g;
    let shared = phi(g, [CB_C, CB_B])?.tensor(&phi(spare, [CB_C_SPARE, CB_B_SPARE])?)?;
    let owners = [
        (A_SENT, Holder::Party(alice)),
        (A_KEPT, alice.into()),
        (A_JUNK, alice.into()),
        ("B", bob.into()),
        ("C", charlie.into()),
        ("R", Holder::Reference),
        (CB_C, charlie.into()),
        (CB_C_SPARE, charlie.into()),
        (CB_B, bob.into()),
        (CB_B_SPARE, bob.into()),
    ];
    let mut global = GlobalState::new(
        s1.state.tensor(&shared)?,
        owners.map(|(n, h)| (n.to_string(), h)),
    )?;
    let rho_c_before = psi.partial_trace(&["C"])?;
    let q = global.send(A_SENT, alice, charlie)?;
    ledger.record(
        format!("1a send {A_SENT} alice -> charlie"),
        vec![(TallyKey::flow(Resource::QubitChannel, alice, charlie), constant(q))],
    );

    // 1b: Charlie decodes A_hat and ends up sharing ebits with Alice's kept part.
    let target1 = psi_hat.tensor(&phi(g, [A_KEPT, A_EBIT])?)?.tensor(&s1.junk)?.tensor(&shared)?;
    let outside1: Vec<String> =
        global.state().layout().names().filter(|n| *n != A_SENT && *n != "C").map(str::to_string).collect();
    let outside1: Vec<&str> = outside1.iter().map(String::as_str).collect();
    let v_dec = build_decoder(global.state(), &target1, &outside1, "charlie")?;
    let v = v_dec.unitary()?;
    let (v_in, v_out) = (reg_names(v_dec.inputs()), reg_names(v_dec.outputs()));
    let pad = v_dec.inputs().last().expect("pad").clone();
    let next = v_dec.apply_unitary(global.state(), &v)?;
    global.transform(charlie, &as_strs(&v_in[..v_in.len() - 1]), &as_strs(&v_out), next)?;
    let f1 = overlap(&v_dec.padded_target(&target1)?, global.state())?;
    ledger.record(
        "1b decode at charlie",
        vec![(TallyKey::flow(Resource::Ebit, alice, charlie), constant(-(g as f64)))],
    );

    // 2: swap the generated ebits for pre-shared ones, then undo V.
    global = repackage(&global, A_EBIT, CB_C)?;
    let gf = g as f64;
    ledger.record(
        "2 repackage charlie with bob",
        vec![
            (TallyKey::flow(Resource::Ebit, alice, charlie), constant(gf)),
            (TallyKey::new(Resource::Ebit, alice, charlie, LineKind::Retained), constant(-gf)),
            (TallyKey::flow(Resource::Ebit, charlie, bob), constant(gf)),
        ],
    );
    let undone = v_dec.apply_adjoint(global.state(), &v)?;
    global.transform(charlie, &as_strs(&v_out), &as_strs(&v_in), undone)?;
    let catalyst_deviation = trace_distance(&rho_c_before, &global.state().partial_trace(&["C"])?)?;
    let direct = s1
        .state
        .rename(A_KEPT, CB_B)?
        .tensor(&phi(g, [A_KEPT, CB_C])?)?
        .tensor(&phi(spare, [CB_C_SPARE, CB_B_SPARE])?)?
        .tensor(&PureState::zero(&pad.name, pad.dim)?)?;
    let step2_equivalence = overlap(&direct, global.state())?;

    // 3: Charlie merges what Alice sent on to Bob.
    let s3 = split_source(
        global.state(),
        A_SENT,
        s1.sent_roles.as_deref(),
        &["B"],
        cfg.qubits_cb,
        &mut rng,
        [A2_SENT, A2_KEPT, A2_JUNK],
    )?;
    global.transform(charlie, &[A_SENT], &[A2_SENT, A2_KEPT, A2_JUNK], s3.state)?;
    let q = global.send(A2_SENT, charlie, bob)?;
    ledger.record(
        format!("3 send {A2_SENT} charlie -> bob"),
        vec![(TallyKey::flow(Resource::QubitChannel, charlie, bob), constant(q))],
    );
    let target3 = psi_hat
        .tensor(&phi(s3.kept_qubits, [A2_KEPT, A2_EBIT])?)?
        .tensor(&s3.junk)?
        .tensor(&s1.junk)?
        .tensor(&phi(g, [A_KEPT, CB_C])?)?
        .tensor(&phi(spare, [CB_C_SPARE, CB_B_SPARE])?)?
        .tensor(&PureState::zero(&pad.name, pad.dim)?)?;
    let outside3: Vec<String> = global
        .state()
        .layout()
        .names()
        .filter(|n| !["B", CB_B, A2_SENT].contains(n))
        .map(str::to_string)
        .collect();
    let outside3: Vec<&str> = outside3.iter().map(String::as_str).collect();
    let w_dec = build_decoder(global.state(), &target3, &outside3, "bob")?;
    let (w_in, w_out) = (reg_names(w_dec.inputs()), reg_names(w_dec.outputs()));
    let next = w_dec.apply(global.state())?;
    global.transform(bob, &as_strs(&w_in[..w_in.len() - 1]), &as_strs(&w_out), next)?;
    ledger.record(
        "3 decode at bob",
        vec![(TallyKey::flow(Resource::Ebit, charlie, bob), constant(-(s3.kept_qubits as f64)))],
    );
    let f3 = overlap(&w_dec.padded_target(&target3)?, global.state())?;
    let fidelity_final = global.state().marginal_fidelity_with(&psi_hat)?;

    Ok(RelayResult {
        trial,
        copies: cfg.copies,
        mode: cfg.mode,
        fidelity_final,
        catalyst_deviation,
        per_step_fidelities: [f1, step2_equivalence, f3],
        step2_equivalence,
        ebits_consumed: gf,
        ebits_produced: gf + s3.kept_qubits as f64,
        ledger,
    })
}

fn reg_names(regs: &[crate::qstate::Register]) -> Vec<String> {
    regs.iter().map(|r| r.name.clone()).collect()
}

fn as_strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn prepare(input: &RelayInput, cfg: &RelayConfig) -> Result<Prepared, RelayError> {
    if cfg.copies == 0 || cfg.trials == 0 {
        return Err(RelayError::InvalidConfig("copies and trials must be positive".into()));
    }
    match (input, cfg.mode) {
        (RelayInput::Structured(s), RelayMode::ExactStructured) => {
            let s = s.copies(cfg.copies);
            Ok(Prepared { psi: s.state()?, roles: Some(s.a_qubit_roles()?) })
        }
        (RelayInput::State(_), RelayMode::ExactStructured) => Err(RelayError::StructureRequired),
        (RelayInput::Structured(s), RelayMode::Approximate) => {
            Ok(Prepared { psi: s.copies(cfg.copies).state()?, roles: None })
        }
        (RelayInput::State(psi), RelayMode::Approximate) => {
            let psi = psi.permuted(&PARTY_REGISTERS)?;
            Ok(Prepared { psi: psi.copies(cfg.copies)?, roles: None })
        }
    }
}

/// Runs `cfg.trials` independent relays; results are in trial order and
/// depend only on `(input, cfg)`.
pub fn run_relay(input: &RelayInput, cfg: &RelayConfig) -> Result<Vec<RelayResult>, RelayError> {
    let prep = prepare(input, cfg)?;
    (0..cfg.trials).into_par_iter().map(|t| relay_trial(&prep, cfg, t)).collect()
}

/// Per-trial counts set against the rates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialComparison {
    pub trial: usize,
    pub comparisons: Vec<Comparison>,
}

impl TrialComparison {
    pub fn residual(&self) -> f64 {
        self.comparisons.iter().map(Comparison::residual).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub mode: RelayMode,
    /// `None` when the comparison is only reported.
    pub tolerance: Option<f64>,
    pub trials: Vec<TrialComparison>,
}

impl ComparisonReport {
    pub fn residual(&self) -> f64 {
        self.trials.iter().map(TrialComparison::residual).fold(0.0, f64::max)
    }

    /// `None` in approximate mode.
    pub fn passed(&self) -> Option<bool> {
        self.tolerance.map(|t| self.residual() <= t)
    }
}

/// Compares each run's per-copy counts with the relay rates of `ctx` (the
/// single-copy state). With `C` null the relay is a coherent merge into
/// Bob, and that comparison is added.
pub fn verify_against_rates(results: &[RelayResult], ctx: &EntropyContext) -> ComparisonReport {
    let rates = relay_rates(ctx);
    let coherent = ctx.is_null(RegSet::C).then(|| coherent_merging_rates(ctx));
    let mode = results.first().map(|r| r.mode).unwrap_or_default();
    let trials = results
        .iter()
        .map(|r| {
            let n = r.copies as f64;
            let l = &r.ledger;
            let ebits_cb = l.total(Resource::Ebit, Party::Charlie, Party::Bob) / n;
            let qubits_cb = r.qubits_cb() / n;
            let mut comparisons = vec![
                cmp("q_ac", r.qubits_ac() / n, rates.rate("q_ac")),
                cmp("e_ac", l.total(Resource::Ebit, Party::Alice, Party::Charlie) / n, rates.rate("e_ac")),
                cmp("q_cb", qubits_cb, rates.rate("q_cb")),
                cmp("e_cb", ebits_cb, rates.rate("e_cb")),
            ];
            if let Some(c) = &coherent {
                comparisons.push(cmp("coherent qubits", qubits_cb, c.rate("qubits")));
                comparisons.push(cmp("coherent ebits", ebits_cb, c.rate("ebits")));
            }
            TrialComparison { trial: r.trial, comparisons }
        })
        .collect();
    ComparisonReport {
        mode,
        tolerance: (mode == RelayMode::ExactStructured).then_some(EXACT_TOL),
        trials,
    }
}

fn cmp(label: &str, derived: f64, expected: Option<f64>) -> Comparison {
    Comparison { label: label.to_string(), derived, expected: expected.expect("rate label exists") }
}
