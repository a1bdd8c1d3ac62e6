//! Named state families.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::qstate::{PureState, QStateError, SystemLayout, C64};

/// `sum_i |i i ... i> / sqrt(d)` over the named registers, each of
/// dimension `local_dim`.
pub fn ghz(parties: &[&str], local_dim: usize) -> Result<PureState, QStateError> {
    let layout = SystemLayout::new(parties.iter().map(|&p| (p, local_dim)))?;
    let mut amps = vec![C64::new(0.0, 0.0); layout.total_dim()];
    let stride: usize = (0..parties.len()).map(|i| local_dim.pow(i as u32)).sum();
    for i in 0..local_dim {
        amps[i * stride] = C64::new(1.0, 0.0);
    }
    PureState::normalized(layout, amps)
}

/// GHZ over `A, B, R` with `C` null.
pub fn ghz_abr() -> PureState {
    ghz(&["A", "B", "R"], 2)
        .and_then(|s| s.with_ancilla("C", 1))
        .and_then(|s| s.permuted(&["A", "B", "C", "R"]))
        .expect("fixed layout")
}

/// A pure state with independent complex Gaussian amplitudes, normalized;
/// Haar-distributed on the unit sphere.
pub fn random_pure(registers: &[(&str, usize)], seed: u64) -> Result<PureState, QStateError> {
    let layout = SystemLayout::new(registers.iter().copied())?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let amps = (0..layout.total_dim())
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            C64::new(re, im)
        })
        .collect();
    PureState::normalized(layout, amps)
}

/// Random pure state on four qubit registers `A, B, C, R`.
pub fn random_abcr(seed: u64) -> PureState {
    random_pure(&[("A", 2), ("B", 2), ("C", 2), ("R", 2)], seed).expect("fixed layout")
}
