use serde::{Deserialize, Serialize};

use super::RelayError;
use crate::qstate::{maximally_entangled, PureState, SystemLayout};

/// Party registers a structured state is built over.
pub const PARTY_REGISTERS: [&str; 4] = ["A", "B", "C", "R"];

/// One tensor factor of a structured state. Each factor adds a
/// sub-register to the registers it names; a register is the row-major
/// product of its sub-registers in factor order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Factor {
    /// `sum_i |i>|i> / sqrt(dim)` between sub-registers of two distinct
    /// registers.
    PhiPlus { left: String, right: String, dim: usize },
    /// `|value>` on a sub-register of `register`.
    Basis { register: String, dim: usize, value: usize },
}

/// What one qubit of `A` is, in a structured state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QubitRole {
    /// Half of a φ⁺ pair whose other half is in the named register.
    Paired(String),
    /// A fixed basis bit.
    Basis(u8),
}

/// A pure state on `A, B, C, R` given as a product of φ⁺ pairs and basis
/// states, so that which part of `A` is correlated with what is known
/// exactly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructuredState {
    factors: Vec<Factor>,
}

fn check_register(name: &str) -> Result<(), RelayError> {
    if PARTY_REGISTERS.contains(&name) {
        Ok(())
    } else {
        Err(RelayError::Structure(format!("`{name}` is not one of A, B, C, R")))
    }
}

impl StructuredState {
    pub fn new(factors: Vec<Factor>) -> Result<Self, RelayError> {
        for f in &factors {
            match f {
                Factor::PhiPlus { left, right, dim } => {
                    check_register(left)?;
                    check_register(right)?;
                    if left == right {
                        return Err(RelayError::Structure(format!("φ⁺ pair within `{left}`")));
                    }
                    if *dim < 2 {
                        return Err(RelayError::Structure(format!("φ⁺ pair of dimension {dim}")));
                    }
                }
                Factor::Basis { register, dim, value } => {
                    check_register(register)?;
                    if *dim == 0 || value >= dim {
                        return Err(RelayError::Structure(format!(
                            "basis value {value} out of range for dimension {dim}"
                        )));
                    }
                }
            }
        }
        Ok(StructuredState { factors })
    }

    /// Product of φ⁺ pairs, each `(left, right, dim)`.
    pub fn phi_plus_pairs(pairs: &[(&str, &str, usize)]) -> Result<Self, RelayError> {
        Self::new(
            pairs
                .iter()
                .map(|&(l, r, dim)| Factor::PhiPlus { left: l.into(), right: r.into(), dim })
                .collect(),
        )
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// The factors repeated `n` times; the copy index is the slowest digit
    /// of every register, as with [`PureState::copies`].
    pub fn copies(&self, n: usize) -> StructuredState {
        StructuredState { factors: (0..n).flat_map(|_| self.factors.iter().cloned()).collect() }
    }

    /// The state over `A, B, C, R` (absent registers have dimension 1).
    pub fn state(&self) -> Result<PureState, RelayError> {
        let mut state = PureState::from_parts_unchecked(SystemLayout::empty(), vec![crate::qstate::C64::new(1.0, 0.0)]);
        let mut subs: Vec<Vec<String>> = vec![Vec::new(); 4];
        let slot = |name: &str| PARTY_REGISTERS.iter().position(|p| *p == name).expect("checked");
        for (i, f) in self.factors.iter().enumerate() {
            let part = match f {
                Factor::PhiPlus { left, right, dim } => {
                    let (l, r) = (format!("{left}#{i}"), format!("{right}#{i}"));
                    subs[slot(left)].push(l.clone());
                    subs[slot(right)].push(r.clone());
                    maximally_entangled(*dim, [&l, &r])?
                }
                Factor::Basis { register, dim, value } => {
                    let name = format!("{register}#{i}");
                    subs[slot(register)].push(name.clone());
                    PureState::basis(SystemLayout::new([(name.as_str(), *dim)])?, &[*value])?
                }
            };
            state = state.tensor(&part)?;
        }
        for (p, names) in PARTY_REGISTERS.iter().zip(&subs) {
            let names: Vec<&str> = names.iter().map(String::as_str).collect();
            state = state.merge_registers(&names, p)?;
        }
        Ok(state.permuted(&PARTY_REGISTERS)?)
    }

    /// Roles of the qubits of `A`, most significant first. Fails unless
    /// every factor touching `A` has a power-of-two dimension.
    pub fn a_qubit_roles(&self) -> Result<Vec<QubitRole>, RelayError> {
        let mut roles = Vec::new();
        for f in &self.factors {
            let (dim, partner, value) = match f {
                Factor::PhiPlus { left, right, dim } if left == "A" => (*dim, Some(right), 0),
                Factor::PhiPlus { left, right, dim } if right == "A" => (*dim, Some(left), 0),
                Factor::Basis { register, dim, value } if register == "A" => (*dim, None, *value),
                _ => continue,
            };
            if !dim.is_power_of_two() {
                return Err(RelayError::Structure(format!(
                    "a factor of A has dimension {dim}, not a power of two"
                )));
            }
            let k = dim.trailing_zeros();
            for j in (0..k).rev() {
                roles.push(match partner {
                    Some(p) => QubitRole::Paired(p.clone()),
                    None => QubitRole::Basis(((value >> j) & 1) as u8),
                });
            }
        }
        Ok(roles)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_state_matches_direct_construction() {
        let s = StructuredState::phi_plus_pairs(&[("A", "R", 2), ("A", "C", 2)]).unwrap();
        let psi = s.state().unwrap();
        assert_eq!(psi.layout().dims(), vec![4, 1, 2, 2]);
        let direct = maximally_entangled(2, ["A1", "R"])
            .unwrap()
            .tensor(&maximally_entangled(2, ["A2", "C"]).unwrap())
            .unwrap()
            .merge_registers(&["A1", "A2"], "A")
            .unwrap()
            .with_ancilla("B", 1)
            .unwrap();
        assert!((psi.inner(&direct).unwrap().re - 1.0).abs() < 1e-12);
        assert_eq!(
            s.a_qubit_roles().unwrap(),
            vec![QubitRole::Paired("R".into()), QubitRole::Paired("C".into())]
        );
    }

    #[test]
    fn roles_expand_wide_factors_and_bits() {
        let s = StructuredState::new(vec![
            Factor::PhiPlus { left: "R".into(), right: "A".into(), dim: 4 },
            Factor::Basis { register: "A".into(), dim: 4, value: 2 },
        ])
        .unwrap();
        assert_eq!(
            s.a_qubit_roles().unwrap(),
            vec![
                QubitRole::Paired("R".into()),
                QubitRole::Paired("R".into()),
                QubitRole::Basis(1),
                QubitRole::Basis(0)
            ]
        );
        assert_eq!(s.copies(2).a_qubit_roles().unwrap().len(), 8);
    }

    #[test]
    fn copies_agree_with_state_copies() {
        let s = StructuredState::phi_plus_pairs(&[("A", "R", 2), ("A", "C", 2)]).unwrap();
        let a = s.copies(2).state().unwrap();
        let b = s.state().unwrap().copies(2).unwrap();
        assert!((a.inner(&b).unwrap().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_factors() {
        assert!(StructuredState::phi_plus_pairs(&[("A", "A", 2)]).is_err());
        assert!(StructuredState::phi_plus_pairs(&[("A", "X", 2)]).is_err());
        assert!(StructuredState::new(vec![Factor::Basis { register: "B".into(), dim: 2, value: 2 }]).is_err());
        let odd = StructuredState::phi_plus_pairs(&[("A", "R", 3)]).unwrap();
        assert!(odd.a_qubit_roles().is_err());
        assert!(odd.state().is_ok());
    }
}
