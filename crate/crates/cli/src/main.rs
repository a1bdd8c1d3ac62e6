//! `qrelay`: rate tables, ledger derivations and simulation sweeps.
//!
//! Exit codes: 0 success, 2 bad input, 3 a run too large for the
//! amplitude cap.

mod statefile;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use qrelay::entropy::{EntropyContext, Protocol, RegSet};
use qrelay::fqsw::{run_merge, Encoder, FqswError, MergeConfig, MergeTrialResult};
use qrelay::ledger::{evaluate, parse_script, relay_comparisons, Comparison, ResourceLedger, TallyKey};
use qrelay::relay::{run_relay, verify_against_rates, RelayConfig, RelayError, RelayInput, RelayMode, RelayResult};

use statefile::{ExplicitState, Loaded};

/// Default cap on the amplitudes of any state a run builds.
const DEFAULT_MAX_AMPLITUDES: usize = 1 << 22;
const BYTES_PER_AMPLITUDE: usize = 16;

#[derive(Parser)]
#[command(name = "qrelay", version, about = "State redistribution rates, ledgers and simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Entropic resource rates of a protocol on a state.
    Rates {
        state: PathBuf,
        #[arg(long, conflicts_with = "all")]
        protocol: Option<Protocol>,
        /// Every protocol.
        #[arg(long)]
        all: bool,
    },
    /// Evaluates a protocol script and compares it with the relay rates.
    Ledger { script: PathBuf, state: PathBuf },
    /// Monte Carlo merge sweeps and relay runs.
    Simulate(SimulateArgs),
    /// Loads a state file and writes it back out as explicit amplitudes.
    State { state: PathBuf },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Merge,
    Relay,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Csv,
}

#[derive(Args)]
struct SimulateArgs {
    state: PathBuf,
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long, default_value_t = 1)]
    copies: usize,
    /// Merge: qubits sent, as a list of values and inclusive ranges
    /// (`1,3,5..7`).
    #[arg(long, default_value = "0")]
    sent_qubits: String,
    /// Relay: qubits Alice sends to Charlie.
    #[arg(long, default_value_t = 0)]
    sent_qubits_ac: u32,
    /// Relay: qubits Charlie sends to Bob.
    #[arg(long, default_value_t = 0)]
    sent_qubits_cb: u32,
    /// Relay: ebits Charlie and Bob share beforehand.
    #[arg(long, default_value_t = 0)]
    preshared: u32,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "split")]
    encoder: Encoder,
    /// Relay with structured encoders (default).
    #[arg(long, conflicts_with = "approximate")]
    exact: bool,
    /// Relay with Haar encoders on any state.
    #[arg(long)]
    approximate: bool,
    /// Merge: skip the explicit decoder, report only the optimal fidelity.
    #[arg(long)]
    idealize: bool,
    #[arg(long, value_enum, default_value = "csv")]
    output: Output,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_MAX_AMPLITUDES)]
    max_amplitudes: usize,
}

enum Failure {
    Input(String),
    Infeasible { amplitudes: usize, cap: usize },
}

impl Failure {
    fn report(&self) -> (u8, String) {
        match self {
            Failure::Input(msg) => (2, format!("error: {msg}")),
            Failure::Infeasible { amplitudes, cap } => {
                let bytes = amplitudes.saturating_mul(BYTES_PER_AMPLITUDE);
                (
                    3,
                    format!(
                        "error: run needs {amplitudes} amplitudes (about {:.1} MiB), above the cap of {cap}",
                        bytes as f64 / (1u64 << 20) as f64
                    ),
                )
            }
        }
    }
}

fn input(e: impl ToString) -> Failure {
    Failure::Input(e.to_string())
}

impl From<FqswError> for Failure {
    fn from(e: FqswError) -> Self {
        match e {
            FqswError::DecoderTooLarge { size, cap } => Failure::Infeasible { amplitudes: size, cap },
            e => input(e),
        }
    }
}

impl From<RelayError> for Failure {
    fn from(e: RelayError) -> Self {
        match e {
            RelayError::Fqsw(e) => e.into(),
            e => input(e),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Loaded, Failure> {
    statefile::parse(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn context(loaded: &Loaded) -> Result<EntropyContext, Failure> {
    EntropyContext::new(loaded.state.clone()).map_err(input)
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn cmd_rates(state: &Path, protocol: Option<Protocol>, all: bool) -> Result<String, Failure> {
    let ctx = context(&load(state)?)?;
    if all {
        let reports = Protocol::ALL.iter().map(|p| p.rates(&ctx)).collect::<Result<Vec<_>, _>>().map_err(input)?;
        return Ok(to_json(&reports));
    }
    let p = protocol.ok_or_else(|| Failure::Input("give --protocol or --all".into()))?;
    Ok(to_json(&p.rates(&ctx).map_err(input)?))
}

fn tally_json(key: &TallyKey, expr: String, value: f64) -> Value {
    json!({
        "resource": key.resource,
        "from": key.from,
        "to": key.to,
        "kind": key.kind,
        "expr": expr,
        "value": value,
    })
}

fn ledger_json(ledger: &ResourceLedger) -> (Value, Value) {
    let tallies: Vec<Value> = ledger.tallies().map(|(k, e, v)| tally_json(&k, e.to_string(), v)).collect();
    let trace: Vec<Value> = ledger
        .trace()
        .iter()
        .map(|r| {
            let deltas: Vec<Value> = r
                .deltas
                .iter()
                .map(|(k, e)| tally_json(k, e.to_string(), e.eval(ledger.entropies())))
                .collect();
            json!({ "step": r.step, "deltas": deltas })
        })
        .collect();
    (Value::Array(tallies), Value::Array(trace))
}

fn comparisons_json(cs: &[Comparison]) -> Value {
    cs.iter()
        .map(|c| json!({ "label": c.label, "actual": c.derived, "expected": c.expected, "residual": c.residual() }))
        .collect()
}

fn cmd_ledger(script: &Path, state: &Path) -> Result<String, Failure> {
    let text = read(script)?;
    let script = parse_script(&text).map_err(|e| Failure::Input(format!("{}:{e}", script.display())))?;
    let ctx = context(&load(state)?)?;
    let ledger = evaluate(&script, &ctx).map_err(input)?;
    let comparisons = relay_comparisons(&ledger, &ctx);
    let residual = comparisons.iter().map(Comparison::residual).fold(0.0, f64::max);
    let (tallies, trace) = ledger_json(&ledger);
    Ok(to_json(&json!({
        "tallies": tallies,
        "trace": trace,
        "residual_vs_relay_rates": residual,
        "comparisons": comparisons_json(&comparisons),
    })))
}

fn parse_sent_list(list: &str) -> Result<Vec<u32>, Failure> {
    let bad = || Failure::Input(format!("bad --sent-qubits `{list}`"));
    let mut out = Vec::new();
    for item in list.split(',').map(str::trim) {
        match item.split_once("..") {
            Some((a, b)) => {
                let (a, b): (u32, u32) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(item.parse().map_err(|_| bad())?),
        }
    }
    Ok(out)
}

/// Amplitudes of `n` copies of a state of dimension `d`, if it fits in
/// `usize`.
fn copies_size(d: usize, n: usize) -> usize {
    (0..n).try_fold(1usize, |acc, _| acc.checked_mul(d)).unwrap_or(usize::MAX)
}

fn check_cap(amplitudes: usize, cap: usize) -> Result<(), Failure> {
    if amplitudes > cap {
        return Err(Failure::Infeasible { amplitudes, cap });
    }
    Ok(())
}

fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn merge_csv(rows: &[MergeTrialResult]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["copies", "sent_qubits", "trial", "decoupling_error", "uhlmann_fidelity", "decoder_fidelity"])
        .expect("in-memory");
    for r in rows {
        w.write_record([
            r.copies.to_string(),
            r.sent_qubits.to_string(),
            r.trial.to_string(),
            fmt_f64(r.decoupling_error),
            fmt_f64(r.uhlmann_fidelity),
            r.decoder_fidelity.map(fmt_f64).unwrap_or_default(),
        ])
        .expect("in-memory");
    }
    String::from_utf8(w.into_inner().expect("in-memory")).expect("ascii")
}

fn relay_csv(rows: &[RelayResult]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "trial",
        "fidelity_final",
        "catalyst_deviation",
        "qubits_ac",
        "qubits_cb",
        "ebits_consumed",
        "ebits_produced",
    ])
    .expect("in-memory");
    for r in rows {
        w.write_record([
            r.trial.to_string(),
            fmt_f64(r.fidelity_final),
            fmt_f64(r.catalyst_deviation),
            fmt_f64(r.qubits_ac()),
            fmt_f64(r.qubits_cb()),
            fmt_f64(r.ebits_consumed),
            fmt_f64(r.ebits_produced),
        ])
        .expect("in-memory");
    }
    String::from_utf8(w.into_inner().expect("in-memory")).expect("ascii")
}

fn simulate_merge(args: &SimulateArgs, loaded: &Loaded) -> Result<String, Failure> {
    let psi = loaded.state.permuted(&["A", "B", "C", "R"]).map_err(input)?;
    check_cap(copies_size(psi.layout().total_dim(), args.copies), args.max_amplitudes)?;
    let mut rows = Vec::new();
    for k in parse_sent_list(&args.sent_qubits)? {
        let cfg = MergeConfig {
            copies: args.copies,
            sent_qubits: k,
            encoder: args.encoder,
            trials: args.trials,
            seed: args.seed,
            idealize: args.idealize,
        };
        rows.extend(run_merge(&psi, &cfg)?);
    }
    Ok(match args.output {
        Output::Csv => merge_csv(&rows),
        Output::Json => to_json(&rows),
    })
}

fn simulate_relay(args: &SimulateArgs, loaded: &Loaded) -> Result<String, Failure> {
    let mode = if args.approximate { RelayMode::Approximate } else { RelayMode::ExactStructured };
    let input = match (&loaded.structured, mode) {
        (Some(s), _) => RelayInput::Structured(s.clone()),
        (None, _) => RelayInput::State(loaded.state.clone()),
    };
    let ctx = context(loaded)?;
    // The largest state the relay forms holds the input, a reconstructed
    // copy of A and both sets of Charlie–Bob ebits.
    let d_a = ctx.dim(RegSet::A);
    let per_copy = loaded.state.layout().total_dim().saturating_mul(d_a);
    let shared = 1usize.checked_shl(2 * args.preshared).unwrap_or(usize::MAX);
    check_cap(copies_size(per_copy, args.copies).saturating_mul(shared), args.max_amplitudes)?;
    let cfg = RelayConfig {
        copies: args.copies,
        qubits_ac: args.sent_qubits_ac,
        qubits_cb: args.sent_qubits_cb,
        preshared_cb_ebits: args.preshared,
        mode,
        trials: args.trials,
        seed: args.seed,
    };
    let results = run_relay(&input, &cfg)?;
    Ok(match args.output {
        Output::Csv => relay_csv(&results),
        Output::Json => {
            let report = verify_against_rates(&results, &ctx);
            let runs: Vec<Value> = results
                .iter()
                .map(|r| {
                    let (tallies, trace) = ledger_json(&r.ledger);
                    json!({
                        "trial": r.trial,
                        "fidelity_final": r.fidelity_final,
                        "catalyst_deviation": r.catalyst_deviation,
                        "per_step_fidelities": r.per_step_fidelities,
                        "step2_equivalence": r.step2_equivalence,
                        "qubits_ac": r.qubits_ac(),
                        "qubits_cb": r.qubits_cb(),
                        "ebits_consumed": r.ebits_consumed,
                        "ebits_produced": r.ebits_produced,
                        "ledger": { "tallies": tallies, "trace": trace },
                    })
                })
                .collect();
            let checks: Vec<Value> = report
                .trials
                .iter()
                .map(|t| json!({ "trial": t.trial, "comparisons": comparisons_json(&t.comparisons) }))
                .collect();
            to_json(&json!({
                "results": runs,
                "verification": {
                    "mode": report.mode,
                    "tolerance": report.tolerance,
                    "residual": report.residual(),
                    "passed": report.passed(),
                    "trials": checks,
                },
            }))
        }
    })
}

fn cmd_simulate(args: &SimulateArgs) -> Result<String, Failure> {
    if args.copies == 0 || args.trials == 0 {
        return Err(Failure::Input("--copies and --trials must be positive".into()));
    }
    let loaded = load(&args.state)?;
    let run = || match args.mode {
        Mode::Merge => simulate_merge(args, &loaded),
        Mode::Relay => simulate_relay(args, &loaded),
    };
    match args.threads {
        Some(0) => Err(Failure::Input("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(input)?.install(run),
        None => run(),
    }
}

fn cmd_state(state: &Path) -> Result<String, Failure> {
    Ok(to_json(&ExplicitState::from_state(&load(state)?.state)))
}

fn run(cli: &Cli) -> Result<String, Failure> {
    match &cli.command {
        Command::Rates { state, protocol, all } => cmd_rates(state, *protocol, *all),
        Command::Ledger { script, state } => cmd_ledger(script, state),
        Command::Simulate(args) => cmd_simulate(args),
        Command::State { state } => cmd_state(state),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            let (code, msg) = f.report();
            eprintln!("{msg}");
            ExitCode::from(code)
        }
    }
}
