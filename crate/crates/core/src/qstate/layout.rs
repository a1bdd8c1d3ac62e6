use std::fmt;

use serde::{Deserialize, Serialize};

use super::QStateError;

/// A named register with a local Hilbert-space dimension.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub dim: usize,
}

impl Register {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        Register { name: name.into(), dim }
    }
}

/// Ordered list of registers. Amplitude indices are row-major over this
/// order: the first register is the slowest-varying index.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Register>", into = "Vec<Register>")]
pub struct SystemLayout {
    registers: Vec<Register>,
}

impl SystemLayout {
    pub fn new<I, S>(registers: I) -> Result<Self, QStateError>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        Self::from_registers(
            registers
                .into_iter()
                .map(|(name, dim)| Register::new(name, dim))
                .collect(),
        )
    }

    pub fn from_registers(registers: Vec<Register>) -> Result<Self, QStateError> {
        for (i, r) in registers.iter().enumerate() {
            if r.dim == 0 {
                return Err(QStateError::ZeroDimension(r.name.clone()));
            }
            if registers[..i].iter().any(|o| o.name == r.name) {
                return Err(QStateError::DuplicateRegister(r.name.clone()));
            }
        }
        Ok(SystemLayout { registers })
    }

    /// The empty layout (total dimension 1).
    pub fn empty() -> Self {
        SystemLayout::default()
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn len(&self) -> usize {
        self.registers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registers.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.registers.iter().map(|r| r.dim).collect()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.registers.iter().map(|r| r.name.as_str())
    }

    pub fn total_dim(&self) -> usize {
        self.registers.iter().map(|r| r.dim).product()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.registers.iter().position(|r| r.name == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.position(name).is_some()
    }

    pub fn dim_of(&self, name: &str) -> Result<usize, QStateError> {
        self.position(name)
            .map(|p| self.registers[p].dim)
            .ok_or_else(|| QStateError::UnknownRegister(name.to_string()))
    }

    /// Positions of `names`, in the order given.
    pub fn positions(&self, names: &[&str]) -> Result<Vec<usize>, QStateError> {
        let mut out = Vec::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(QStateError::DuplicateRegister(n.to_string()));
            }
            out.push(
                self.position(n)
                    .ok_or_else(|| QStateError::UnknownRegister(n.to_string()))?,
            );
        }
        Ok(out)
    }

    /// Concatenation; fails on the first clashing name.
    pub fn concat(&self, other: &SystemLayout) -> Result<SystemLayout, QStateError> {
        if let Some(clash) = other.names().find(|n| self.contains(n)) {
            return Err(QStateError::DuplicateRegister(clash.to_string()));
        }
        let mut registers = self.registers.clone();
        registers.extend(other.registers.iter().cloned());
        Ok(SystemLayout { registers })
    }

    /// Registers named in `keep`, in this layout's order.
    pub fn subset(&self, keep: &[&str]) -> Result<SystemLayout, QStateError> {
        self.positions(keep)?;
        Ok(SystemLayout {
            registers: self
                .registers
                .iter()
                .filter(|r| keep.contains(&r.name.as_str()))
                .cloned()
                .collect(),
        })
    }

    /// Names of registers not in `names`, in layout order.
    pub fn complement(&self, names: &[&str]) -> Vec<&str> {
        self.names().filter(|n| !names.contains(n)).collect()
    }

    pub fn permuted(&self, order: &[usize]) -> SystemLayout {
        SystemLayout {
            registers: order.iter().map(|&i| self.registers[i].clone()).collect(),
        }
    }

    pub(crate) fn rename(&mut self, old: &str, new: &str) -> Result<(), QStateError> {
        let p = self
            .position(old)
            .ok_or_else(|| QStateError::UnknownRegister(old.to_string()))?;
        if old != new && self.contains(new) {
            return Err(QStateError::DuplicateRegister(new.to_string()));
        }
        self.registers[p].name = new.to_string();
        Ok(())
    }

    /// True when both layouts hold the same registers, in any order.
    pub fn same_registers(&self, other: &SystemLayout) -> bool {
        self.len() == other.len()
            && self
                .registers
                .iter()
                .all(|r| other.registers.iter().any(|o| o == r))
    }
}

impl TryFrom<Vec<Register>> for SystemLayout {
    type Error = QStateError;

    fn try_from(registers: Vec<Register>) -> Result<Self, Self::Error> {
        SystemLayout::from_registers(registers)
    }
}

impl From<SystemLayout> for Vec<Register> {
    fn from(layout: SystemLayout) -> Self {
        layout.registers
    }
}

impl fmt::Display for SystemLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, r) in self.registers.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}:{}", r.name, r.dim)?;
        }
        write!(f, "]")
    }
}

/// Reorders the axes of a row-major tensor: output axis `i` is input axis
/// `order[i]`.
pub(crate) fn permute_axes<T: Copy>(data: &[T], dims: &[usize], order: &[usize]) -> Vec<T> {
    let n = dims.len();
    debug_assert_eq!(order.len(), n);
    let total: usize = dims.iter().product();
    debug_assert_eq!(data.len(), total);
    if n == 0 || order.iter().enumerate().all(|(i, &o)| i == o) {
        return data.to_vec();
    }
    let mut in_strides = vec![1usize; n];
    for i in (0..n - 1).rev() {
        in_strides[i] = in_strides[i + 1] * dims[i + 1];
    }
    let out_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    let strides: Vec<usize> = order.iter().map(|&o| in_strides[o]).collect();

    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; n];
    let mut offset = 0usize;
    let last = n - 1;
    let (ld, ls) = (out_dims[last], strides[last]);
    loop {
        for j in 0..ld {
            out.push(data[offset + j * ls]);
        }
        let mut ax = last;
        loop {
            if ax == 0 {
                return out;
            }
            ax -= 1;
            idx[ax] += 1;
            offset += strides[ax];
            if idx[ax] < out_dims[ax] {
                break;
            }
            offset -= strides[ax] * out_dims[ax];
            idx[ax] = 0;
        }
    }
}

/// Inverse of a permutation given as `order[i] = source axis`.
pub(crate) fn inverse_order(order: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; order.len()];
    for (i, &o) in order.iter().enumerate() {
        inv[o] = i;
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_zero_dims() {
        assert_eq!(
            SystemLayout::new([("A", 2), ("A", 3)]),
            Err(QStateError::DuplicateRegister("A".into()))
        );
        assert_eq!(
            SystemLayout::new([("A", 0)]),
            Err(QStateError::ZeroDimension("A".into()))
        );
    }

    #[test]
    fn total_dim_is_product() {
        let l = SystemLayout::new([("A", 2), ("B", 3), ("C", 1)]).unwrap();
        assert_eq!(l.total_dim(), 6);
        assert_eq!(SystemLayout::empty().total_dim(), 1);
    }

    #[test]
    fn permute_matches_index_formula() {
        let dims = [2, 3, 4];
        let data: Vec<usize> = (0..24).collect();
        let out = permute_axes(&data, &dims, &[2, 0, 1]);
        // out index (k, i, j) over dims (4, 2, 3)
        for k in 0..4 {
            for i in 0..2 {
                for j in 0..3 {
                    assert_eq!(out[k * 6 + i * 3 + j], i * 12 + j * 4 + k);
                }
            }
        }
        let back = permute_axes(&out, &[4, 2, 3], &inverse_order(&[2, 0, 1]));
        assert_eq!(back, data);
    }

    #[test]
    fn serde_validates() {
        let bad: Result<SystemLayout, _> =
            serde_json::from_str(r#"[{"name":"A","dim":2},{"name":"A","dim":2}]"#);
        assert!(bad.is_err());
    }
}
