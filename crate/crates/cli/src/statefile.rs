//! State files: explicit amplitudes or a named family.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use qrelay::qstate::{PureState, SystemLayout, C64};
use qrelay::relay::{Factor, StructuredState, PARTY_REGISTERS};
use qrelay::states::{ghz, random_pure};

/// Files further than this from unit norm are rejected.
pub const LOAD_NORM_TOL: f64 = 1e-6;
/// Files within this of unit norm are taken as they are.
pub const EXACT_NORM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegisterSpec {
    pub name: String,
    pub dim: usize,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub name: String,
    #[serde(default)]
    pub params: Value,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum StateFile {
    Explicit { registers: Vec<RegisterSpec>, amplitudes: Vec<[f64; 2]> },
    Family { family: FamilySpec },
}

/// The serialized form of an explicit state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExplicitState {
    pub registers: Vec<RegisterSpec>,
    pub amplitudes: Vec<[f64; 2]>,
}

impl ExplicitState {
    pub fn from_state(psi: &PureState) -> Self {
        ExplicitState {
            registers: psi
                .layout()
                .registers()
                .iter()
                .map(|r| RegisterSpec { name: r.name.clone(), dim: r.dim })
                .collect(),
            amplitudes: psi.amplitudes().iter().map(|a| [a.re, a.im]).collect(),
        }
    }
}

/// A loaded state; structured families keep their structure for exact
/// relay runs.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub state: PureState,
    pub structured: Option<StructuredState>,
}

pub fn parse(text: &str) -> Result<Loaded, String> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| format!("malformed state file: {e}"))?;
    match file {
        StateFile::Explicit { registers, amplitudes } => {
            let layout = SystemLayout::new(registers.iter().map(|r| (r.name.as_str(), r.dim)))
                .map_err(|e| e.to_string())?;
            if amplitudes.len() != layout.total_dim() {
                return Err(format!(
                    "{} amplitudes for registers of total dimension {}",
                    amplitudes.len(),
                    layout.total_dim()
                ));
            }
            let amps: Vec<C64> = amplitudes.iter().map(|&[re, im]| C64::new(re, im)).collect();
            Ok(Loaded { state: normalize(layout, amps)?, structured: None })
        }
        StateFile::Family { family } => family_state(&family),
    }
}

/// Accepts norms within [`LOAD_NORM_TOL`] of 1 and rescales unless already
/// within [`EXACT_NORM_TOL`], so a saved state loads back bit for bit.
fn normalize(layout: SystemLayout, amps: Vec<C64>) -> Result<PureState, String> {
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > LOAD_NORM_TOL {
        return Err(format!("state norm {norm} is not 1 (tolerance {LOAD_NORM_TOL})"));
    }
    if (norm - 1.0).abs() <= EXACT_NORM_TOL {
        return PureState::new(layout, amps).map_err(|e| e.to_string());
    }
    PureState::normalized(layout, amps).map_err(|e| e.to_string())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GhzParams {
    parties: Vec<String>,
    #[serde(default = "two")]
    local_dim: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BasisSpec {
    register: String,
    #[serde(default = "two")]
    dim: usize,
    value: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PairsParams {
    pairs: Vec<(String, String)>,
    #[serde(default = "two")]
    dim: usize,
    #[serde(default)]
    basis: Vec<BasisSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BasisParams {
    values: Vec<BasisSpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RandomParams {
    dims: Vec<RegisterSpec>,
    seed: u64,
}

fn two() -> usize {
    2
}

fn params<T: serde::de::DeserializeOwned>(family: &FamilySpec) -> Result<T, String> {
    serde_json::from_value(family.params.clone()).map_err(|e| format!("family `{}`: {e}", family.name))
}

fn basis_factors(specs: Vec<BasisSpec>) -> impl Iterator<Item = Factor> {
    specs.into_iter().map(|b| Factor::Basis { register: b.register, dim: b.dim, value: b.value })
}

fn structured(factors: Vec<Factor>) -> Result<Loaded, String> {
    let s = StructuredState::new(factors).map_err(|e| e.to_string())?;
    Ok(Loaded { state: s.state().map_err(|e| e.to_string())?, structured: Some(s) })
}

fn family_state(family: &FamilySpec) -> Result<Loaded, String> {
    match family.name.as_str() {
        "ghz" => {
            let p: GhzParams = params(family)?;
            if p.parties.is_empty() || p.local_dim < 2 {
                return Err("family `ghz`: needs at least one party and local_dim >= 2".into());
            }
            for name in &p.parties {
                if !PARTY_REGISTERS.contains(&name.as_str()) {
                    return Err(format!("family `ghz`: `{name}` is not one of A, B, C, R"));
                }
            }
            let names: Vec<&str> = p.parties.iter().map(String::as_str).collect();
            let mut psi = ghz(&names, p.local_dim).map_err(|e| e.to_string())?;
            for r in PARTY_REGISTERS {
                if !psi.layout().contains(r) {
                    psi = psi.with_ancilla(r, 1).map_err(|e| e.to_string())?;
                }
            }
            let psi = psi.permuted(&PARTY_REGISTERS).map_err(|e| e.to_string())?;
            Ok(Loaded { state: psi, structured: None })
        }
        "phi_plus_pairs" => {
            let p: PairsParams = params(family)?;
            let mut factors: Vec<Factor> = p
                .pairs
                .into_iter()
                .map(|(left, right)| Factor::PhiPlus { left, right, dim: p.dim })
                .collect();
            factors.extend(basis_factors(p.basis));
            structured(factors)
        }
        "basis_product" => {
            let p: BasisParams = params(family)?;
            structured(basis_factors(p.values).collect())
        }
        "random_pure" => {
            let p: RandomParams = params(family)?;
            let dims: Vec<(&str, usize)> = p.dims.iter().map(|r| (r.name.as_str(), r.dim)).collect();
            let psi = random_pure(&dims, p.seed).map_err(|e| e.to_string())?;
            Ok(Loaded { state: psi, structured: None })
        }
        other => Err(format!(
            "unknown family `{other}` (expected ghz, phi_plus_pairs, basis_product or random_pure)"
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn explicit_round_trip_is_bit_exact() {
        let text = r#"{"registers":[{"name":"A","dim":2},{"name":"R","dim":2}],
            "amplitudes":[[0.7071067811865476,0],[0,0],[0,0],[0.7071067811865475,0]]}"#;
        let a = parse(text).unwrap();
        let out = serde_json::to_string(&ExplicitState::from_state(&a.state)).unwrap();
        let b = parse(&out).unwrap();
        assert_eq!(a.state, b.state);
        assert_eq!(out, serde_json::to_string(&ExplicitState::from_state(&b.state)).unwrap());
    }

    #[test]
    fn slightly_off_norm_is_rescaled_far_off_rejected() {
        let text = |x: f64| format!(r#"{{"registers":[{{"name":"A","dim":2}}],"amplitudes":[[{x},0],[0,0]]}}"#);
        let s = parse(&text(1.0 + 1e-8)).unwrap().state;
        assert!((s.norm() - 1.0).abs() < 1e-15);
        assert!(parse(&text(1.01)).is_err());
    }

    #[test]
    fn families() {
        let g = parse(r#"{"family":{"name":"ghz","params":{"parties":["A","B","R"]}}}"#).unwrap();
        assert_eq!(g.state.layout().dims(), vec![2, 2, 1, 2]);
        let p = parse(r#"{"family":{"name":"phi_plus_pairs","params":{"pairs":[["A","R"],["A","C"]]}}}"#).unwrap();
        assert!(p.structured.is_some());
        assert_eq!(p.state.layout().dims(), vec![4, 1, 2, 2]);
        let b = parse(r#"{"family":{"name":"basis_product","params":{"values":[{"register":"A","value":1}]}}}"#)
            .unwrap();
        assert_eq!(b.state.amplitudes()[1].re, 1.0);
        let r = parse(r#"{"family":{"name":"random_pure","params":{"dims":[{"name":"A","dim":2}],"seed":3}}}"#)
            .unwrap();
        assert!((r.state.norm() - 1.0).abs() < 1e-12);
        assert!(parse(r#"{"family":{"name":"nope"}}"#).is_err());
        assert!(parse(r#"{"family":{"name":"ghz","params":{"parties":["X"]}}}"#).is_err());
    }
}
