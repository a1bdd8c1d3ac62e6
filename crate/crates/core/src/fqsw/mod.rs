//! One-shot coherent merging: Haar encoding, the decoupling test, the
//! optimal (Uhlmann) receiver fidelity and an explicit decoder.

mod decoder;
mod decouple;
mod encode;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qstate::{haar_unitary, PureState, QStateError};

pub use decoder::{build_decoder, merged_target, overlap, Decoder, MAX_DECODER_AMPLITUDES, MAX_UNITARY_DIM};
pub use decouple::{decoupling_error, uhlmann_fidelity};
pub use encode::{encode, encoder_dim, Encoded, Encoder, MergeRoles};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FqswError {
    #[error(transparent)]
    State(#[from] QStateError),
    #[error("cannot send {sent_qubits} qubits out of a {source_dim}-dimensional register")]
    TooManySentQubits { sent_qubits: u32, source_dim: usize },
    #[error("decoder needs {size} (cap {cap})")]
    DecoderTooLarge { size: usize, cap: usize },
    #[error("register `{0}` differs between actual and target")]
    OutsideMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// The random stream for one trial: ChaCha20 seeded with `seed`, stream
/// number `trial`. Independent of how trials are scheduled.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeConfig {
    pub copies: usize,
    pub sent_qubits: u32,
    pub encoder: Encoder,
    pub trials: usize,
    pub seed: u64,
    /// Skip the explicit decoder and report only the optimal fidelity.
    pub idealize: bool,
}

impl Default for MergeConfig {
    fn default() -> Self {
        MergeConfig {
            copies: 1,
            sent_qubits: 0,
            encoder: Encoder::Split,
            trials: 1,
            seed: 0,
            idealize: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeTrialResult {
    pub trial: usize,
    pub copies: usize,
    pub sent_qubits: u32,
    pub decoupling_error: f64,
    pub uhlmann_fidelity: f64,
    /// `None` when the run was idealized.
    pub decoder_fidelity: Option<f64>,
    /// `log2` of the kept dimension: the ebits left between the parties
    /// when the kept part is decoupled.
    pub ebits_out: f64,
}

impl MergeTrialResult {
    pub fn qubits_per_copy(&self) -> f64 {
        self.sent_qubits as f64 / self.copies as f64
    }

    pub fn ebits_per_copy(&self) -> f64 {
        self.ebits_out / self.copies as f64
    }
}

/// One trial on an already-copied state.
pub fn merge_trial(
    psi_n: &PureState,
    roles: &MergeRoles,
    cfg: &MergeConfig,
    trial: usize,
) -> Result<MergeTrialResult, FqswError> {
    let d = psi_n.layout().dim_of(&roles.source)?;
    let dim = encoder_dim(d, cfg.sent_qubits, cfg.encoder).ok_or(FqswError::TooManySentQubits {
        sent_qubits: cfg.sent_qubits,
        source_dim: d,
    })?;
    let mut rng = trial_rng(cfg.seed, trial);
    let u = haar_unitary(dim, &mut rng);
    let enc = encode(psi_n, roles, cfg.sent_qubits, cfg.encoder, &u)?;
    let decoder_fidelity = if cfg.idealize {
        None
    } else {
        let target = merged_target(psi_n, &enc)?;
        let outside = enc.outside();
        let outside: Vec<&str> = outside.iter().map(String::as_str).collect();
        let dec = build_decoder(&enc.state, &target, &outside, "merge")?;
        Some(overlap(&dec.padded_target(&target)?, &dec.apply(&enc.state)?)?)
    };
    Ok(MergeTrialResult {
        trial,
        copies: cfg.copies,
        sent_qubits: cfg.sent_qubits,
        decoupling_error: decoupling_error(&enc),
        uhlmann_fidelity: uhlmann_fidelity(&enc),
        decoder_fidelity,
        ebits_out: (enc.kept_dim() as f64).log2(),
    })
}

/// Runs `cfg.trials` independent trials of merging `A` to the holder of
/// `B` on `cfg.copies` copies of `psi`; every other register is reference.
/// Results are in trial order.
pub fn run_merge(psi: &PureState, cfg: &MergeConfig) -> Result<Vec<MergeTrialResult>, FqswError> {
    run_merge_with(psi, &MergeRoles::alice_to_bob(), cfg)
}

pub fn run_merge_with(
    psi: &PureState,
    roles: &MergeRoles,
    cfg: &MergeConfig,
) -> Result<Vec<MergeTrialResult>, FqswError> {
    if cfg.copies == 0 || cfg.trials == 0 {
        return Err(FqswError::InvalidConfig("copies and trials must be positive".into()));
    }
    let psi_n = psi.copies(cfg.copies)?;
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| merge_trial(&psi_n, roles, cfg, t))
        .collect()
}
