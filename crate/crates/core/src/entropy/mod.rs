//! Von Neumann entropies of a pure four-party state and the protocol rates
//! built from them.
//!
//! Everything is in bits. A context holds one pure state over the
//! registers `A`, `B`, `C`, `R` (any of which may have dimension 1) and
//! memoizes the entropy of each of the 16 register subsets.

mod rates;
mod regset;

use std::sync::OnceLock;

use thiserror::Error;

use crate::qstate::{linalg, DensityOperator, PureState, QStateError, EIGEN_CUTOFF};

pub use rates::{
    coherent_merging_rates, merging_rates, Direction, partial_merge_cbits, redistribution_rates, relay_rates,
    reverse_shannon_rates, splitting_rates, Protocol, RateEntry, RateReport,
};
pub use regset::RegSet;

/// Register names every context must carry, in canonical order.
pub const PARTY_REGISTERS: [&str; 4] = ["A", "B", "C", "R"];

/// Marginals larger than this are diagonalized through the smaller Gram
/// matrix of the bipartition instead of the marginal itself.
const DIRECT_MARGINAL_LIMIT: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntropyError {
    #[error("state is missing register `{0}`")]
    MissingRegister(String),
    #[error("unexpected register `{0}`; contexts hold only A, B, C, R")]
    UnexpectedRegister(String),
    #[error("subsets {0} and {1} overlap")]
    Overlap(RegSet, RegSet),
    #[error("register `{0}` must have dimension 1 for this protocol")]
    NotNull(&'static str),
    #[error("bad subset `{0}`")]
    BadSubset(String),
    #[error(transparent)]
    State(#[from] QStateError),
}

/// `-sum l log2 l` over eigenvalues above the cutoff.
pub fn entropy_of_spectrum(eigenvalues: &[f64]) -> f64 {
    let s: f64 = eigenvalues
        .iter()
        .filter(|&&l| l > EIGEN_CUTOFF)
        .map(|&l| -l * l.log2())
        .sum();
    s.max(0.0)
}

pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    entropy_of_spectrum(&rho.eigenvalues())
}

/// A pure state over `A, B, C, R` with memoized subset entropies.
///
/// The memo is filled lazily; concurrent readers may race to fill the
/// same slot but always store the same value.
#[derive(Clone, Debug)]
pub struct EntropyContext {
    state: PureState,
    memo: [OnceLock<f64>; 16],
}

impl EntropyContext {
    pub fn new(state: PureState) -> Result<Self, EntropyError> {
        for name in PARTY_REGISTERS {
            if !state.layout().contains(name) {
                return Err(EntropyError::MissingRegister(name.to_string()));
            }
        }
        if let Some(extra) = state.layout().names().find(|n| !PARTY_REGISTERS.contains(n)) {
            return Err(EntropyError::UnexpectedRegister(extra.to_string()));
        }
        let state = state.permuted(&PARTY_REGISTERS)?;
        Ok(EntropyContext {
            state,
            memo: Default::default(),
        })
    }

    pub fn state(&self) -> &PureState {
        &self.state
    }

    pub fn dim(&self, set: RegSet) -> usize {
        set.names()
            .map(|n| self.state.layout().dim_of(n).unwrap())
            .product()
    }

    pub fn is_null(&self, set: RegSet) -> bool {
        self.dim(set) == 1
    }

    /// `S(X)` in bits.
    pub fn entropy(&self, set: RegSet) -> f64 {
        *self.memo[set.index()].get_or_init(|| self.compute_entropy(set))
    }

    fn compute_entropy(&self, set: RegSet) -> f64 {
        if set.is_empty() {
            return 0.0;
        }
        let names: Vec<&str> = set.names().collect();
        let m = self.state.matrix(&names).expect("context registers exist");
        let gram = if m.nrows() > DIRECT_MARGINAL_LIMIT && m.ncols() < m.nrows() {
            linalg::gram(&m.adjoint())
        } else {
            linalg::gram(&m)
        };
        entropy_of_spectrum(&linalg::hermitian_eigenvalues(&gram))
    }

    /// Entropies of all 16 subsets, indexed by [`RegSet::index`].
    pub fn entropies(&self) -> [f64; 16] {
        let mut out = [0.0; 16];
        for set in RegSet::all_subsets() {
            out[set.index()] = self.entropy(set);
        }
        out
    }

    fn disjoint(&self, x: RegSet, y: RegSet) -> Result<(), EntropyError> {
        if !x.is_disjoint(y) {
            return Err(EntropyError::Overlap(x, y));
        }
        Ok(())
    }

    /// `S(X|Y) = S(XY) - S(Y)`.
    pub fn conditional_entropy(&self, x: RegSet, y: RegSet) -> Result<f64, EntropyError> {
        self.disjoint(x, y)?;
        Ok(self.entropy(x | y) - self.entropy(y))
    }

    /// `I(X:Y) = S(X) + S(Y) - S(XY)`.
    pub fn mutual_info(&self, x: RegSet, y: RegSet) -> Result<f64, EntropyError> {
        self.disjoint(x, y)?;
        Ok(self.entropy(x) + self.entropy(y) - self.entropy(x | y))
    }

    /// `I(X:Y|Z) = S(X|Z) + S(Y|Z) - S(XY|Z)`.
    pub fn cond_mutual_info(&self, x: RegSet, y: RegSet, z: RegSet) -> Result<f64, EntropyError> {
        self.disjoint(x, y)?;
        self.disjoint(x, z)?;
        self.disjoint(y, z)?;
        Ok(self.conditional_entropy(x, z)? + self.conditional_entropy(y, z)?
            - self.conditional_entropy(x | y, z)?)
    }

    /// The same state with `C` folded into the reference: `R` becomes `R C`
    /// and `C` is null. This is the two-party (A, B) view of the state.
    pub fn with_c_in_reference(&self) -> EntropyContext {
        let s = self
            .state
            .merge_registers(&["R", "C"], "R")
            .and_then(|s| s.with_ancilla("C", 1))
            .expect("context registers exist");
        EntropyContext::new(s).expect("layout stays A, B, C, R")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{maximally_entangled, SystemLayout, C64};

    pub(crate) fn ghz_abr() -> EntropyContext {
        let l = SystemLayout::new([("A", 2), ("B", 2), ("C", 1), ("R", 2)]).unwrap();
        let mut amps = vec![C64::new(0.0, 0.0); 8];
        amps[0] = C64::new(1.0, 0.0);
        amps[7] = C64::new(1.0, 0.0);
        EntropyContext::new(PureState::normalized(l, amps).unwrap()).unwrap()
    }

    #[test]
    fn spectrum_entropies() {
        let l = SystemLayout::new([("A", 2)]).unwrap();
        assert!((von_neumann_entropy(&DensityOperator::maximally_mixed(l.clone())) - 1.0).abs() < 1e-12);
        let pure = DensityOperator::diagonal(l.clone(), &[1.0, 0.0]).unwrap();
        assert_eq!(von_neumann_entropy(&pure), 0.0);
        // h(1/3), frozen from entropy_oracle.py
        let d = DensityOperator::diagonal(l, &[2.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((von_neumann_entropy(&d) - 0.918295834054490).abs() < 1e-12);
    }

    #[test]
    fn ghz_information_quantities() {
        let ctx = ghz_abr();
        let (a, b, r) = (RegSet::A, RegSet::B, RegSet::R);
        assert!(ctx.conditional_entropy(a, b).unwrap().abs() < 1e-12);
        assert!((ctx.mutual_info(a, r).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phi_ar_with_trivial_conditioning() {
        let s = maximally_entangled(2, ["A", "R"])
            .unwrap()
            .tensor(&PureState::zero("B", 2).unwrap())
            .unwrap()
            .tensor(&PureState::zero("C", 2).unwrap())
            .unwrap();
        let ctx = EntropyContext::new(s).unwrap();
        assert!((ctx.mutual_info(RegSet::A, RegSet::R).unwrap() - 2.0).abs() < 1e-12);
        assert!((ctx.cond_mutual_info(RegSet::A, RegSet::R, RegSet::B).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn overlapping_subsets_rejected() {
        let ctx = ghz_abr();
        let ab = RegSet::A | RegSet::B;
        assert_eq!(
            ctx.mutual_info(ab, RegSet::B),
            Err(EntropyError::Overlap(ab, RegSet::B))
        );
    }

    #[test]
    fn missing_register_named() {
        let s = maximally_entangled(2, ["A", "B"])
            .unwrap()
            .tensor(&PureState::zero("C", 1).unwrap())
            .unwrap();
        assert_eq!(
            EntropyContext::new(s).unwrap_err(),
            EntropyError::MissingRegister("R".into())
        );
    }

    #[test]
    fn folding_c_into_reference() {
        let s = maximally_entangled(2, ["A", "C"])
            .unwrap()
            .tensor(&PureState::zero("B", 1).unwrap())
            .unwrap()
            .tensor(&PureState::zero("R", 1).unwrap())
            .unwrap();
        let ctx = EntropyContext::new(s).unwrap().with_c_in_reference();
        assert!(ctx.is_null(RegSet::C));
        assert!((ctx.mutual_info(RegSet::A, RegSet::R).unwrap() - 2.0).abs() < 1e-12);
    }
}
