use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::RelayError;
use crate::qstate::PureState;
use crate::resource::Party;

/// Who holds a register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Holder {
    Party(Party),
    Reference,
}

impl fmt::Display for Holder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Holder::Party(p) => p.fmt(f),
            Holder::Reference => f.write_str("reference"),
        }
    }
}

impl From<Party> for Holder {
    fn from(p: Party) -> Self {
        Holder::Party(p)
    }
}

/// The global state vector together with who holds each register.
///
/// Every register of the state has exactly one holder. Registers marked
/// retained hold entanglement a party has set aside.
#[derive(Clone, Debug, PartialEq)]
pub struct GlobalState {
    state: PureState,
    owners: BTreeMap<String, Holder>,
    retained: BTreeSet<String>,
}

impl GlobalState {
    /// `owners` must name every register of `state` exactly once.
    pub fn new(state: PureState, owners: impl IntoIterator<Item = (String, Holder)>) -> Result<Self, RelayError> {
        let g = GlobalState { state, owners: owners.into_iter().collect(), retained: BTreeSet::new() };
        g.audit()?;
        Ok(g)
    }

    pub fn state(&self) -> &PureState {
        &self.state
    }

    pub fn owner(&self, register: &str) -> Option<Holder> {
        self.owners.get(register).copied()
    }

    /// Registers held by `holder`, in layout order.
    pub fn holdings(&self, holder: Holder) -> Vec<String> {
        self.state
            .layout()
            .names()
            .filter(|n| self.owners.get(*n) == Some(&holder))
            .map(str::to_string)
            .collect()
    }

    pub fn is_retained(&self, register: &str) -> bool {
        self.retained.contains(register)
    }

    /// Checks that the registry and the layout name the same registers.
    pub fn audit(&self) -> Result<(), RelayError> {
        let names: BTreeSet<&str> = self.state.layout().names().collect();
        let owned: BTreeSet<&str> = self.owners.keys().map(String::as_str).collect();
        if let Some(n) = names.symmetric_difference(&owned).next() {
            return Err(RelayError::Ownership(format!("register `{n}` has no single owner")));
        }
        Ok(())
    }

    fn require(&self, register: &str, holder: Holder) -> Result<(), RelayError> {
        match self.owner(register) {
            Some(h) if h == holder => Ok(()),
            Some(h) => Err(RelayError::Ownership(format!("`{register}` is held by {h}, not {holder}"))),
            None => Err(RelayError::Ownership(format!("no register `{register}`"))),
        }
    }

    /// Moves `register` from `from` to `to`; returns the qubits this costs
    /// (`log2` of its dimension).
    pub fn send(&mut self, register: &str, from: Party, to: Party) -> Result<f64, RelayError> {
        self.require(register, from.into())?;
        self.owners.insert(register.to_string(), to.into());
        Ok((self.state.layout().dim_of(register)? as f64).log2())
    }

    /// Replaces the state by `next`, obtained from the current one by an
    /// operation of `party` turning `inputs` into `outputs`.
    pub fn transform(
        &mut self,
        party: Party,
        inputs: &[&str],
        outputs: &[&str],
        next: PureState,
    ) -> Result<(), RelayError> {
        for r in inputs {
            self.require(r, party.into())?;
        }
        for r in inputs {
            self.owners.remove(*r);
            self.retained.remove(*r);
        }
        for r in outputs {
            if self.owners.insert(r.to_string(), party.into()).is_some() {
                return Err(RelayError::Ownership(format!("`{r}` already exists")));
            }
        }
        self.state = next;
        self.audit()
    }

    /// Adds the registers of `other` (in a product state with the rest),
    /// held by `holder`.
    pub fn attach(&mut self, other: &PureState, holder: Holder) -> Result<(), RelayError> {
        self.state = self.state.tensor(other)?;
        for n in other.layout().names() {
            self.owners.insert(n.to_string(), holder);
        }
        self.audit()
    }
}

/// Charlie swaps the contents of his generated-ebit register with his half
/// of the ebits he shares with Bob. Afterwards `charlie_bob_reg` holds the
/// Alice–Charlie entanglement and is marked retained; swapping again
/// undoes both.
pub fn repackage(global: &GlobalState, charlie_ebit_reg: &str, charlie_bob_reg: &str) -> Result<GlobalState, RelayError> {
    let charlie = Holder::Party(Party::Charlie);
    global.require(charlie_ebit_reg, charlie)?;
    global.require(charlie_bob_reg, charlie)?;
    let mut out = global.clone();
    out.state = global.state.swap_registers(charlie_ebit_reg, charlie_bob_reg)?;
    if !out.retained.remove(charlie_bob_reg) {
        out.retained.insert(charlie_bob_reg.to_string());
    }
    Ok(out)
}
