use nalgebra::DVector;

use super::density::DensityOperator;
use super::layout::{inverse_order, permute_axes, Register, SystemLayout};
use super::linalg::{apply_row_major, from_row_major, gram, matmul, to_row_major, CMatrix, C64};
use super::unitary::Unitary;
use super::{QStateError, NORM_TOL};

/// Normalized amplitude vector over a layout (row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    layout: SystemLayout,
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Wraps amplitudes that must already have unit norm (within 1e-9).
    pub fn new(layout: SystemLayout, amplitudes: Vec<C64>) -> Result<Self, QStateError> {
        check_len(&layout, amplitudes.len())?;
        let norm = l2(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(QStateError::NotNormalized(norm));
        }
        Ok(PureState { layout, amplitudes })
    }

    /// Divides by the norm; fails only on the zero vector.
    pub fn normalized(layout: SystemLayout, mut amplitudes: Vec<C64>) -> Result<Self, QStateError> {
        check_len(&layout, amplitudes.len())?;
        let norm = l2(&amplitudes);
        if norm == 0.0 || !norm.is_finite() {
            return Err(QStateError::ZeroVector);
        }
        let inv = 1.0 / norm;
        amplitudes.iter_mut().for_each(|a| *a *= inv);
        Ok(PureState { layout, amplitudes })
    }

    pub(crate) fn from_parts_unchecked(layout: SystemLayout, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(layout.total_dim(), amplitudes.len());
        PureState { layout, amplitudes }
    }

    /// Computational basis state with the given per-register values.
    pub fn basis(layout: SystemLayout, values: &[usize]) -> Result<Self, QStateError> {
        if values.len() != layout.len() {
            return Err(QStateError::DimensionMismatch {
                expected: layout.len(),
                found: values.len(),
            });
        }
        let mut index = 0;
        for (r, &v) in layout.registers().iter().zip(values) {
            if v >= r.dim {
                return Err(QStateError::DimensionMismatch { expected: r.dim, found: v + 1 });
            }
            index = index * r.dim + v;
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); layout.total_dim()];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(PureState { layout, amplitudes })
    }

    /// Single-register |0> of dimension `dim`.
    pub fn zero(name: &str, dim: usize) -> Result<Self, QStateError> {
        PureState::basis(SystemLayout::new([(name, dim)])?, &[0])
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        l2(&self.amplitudes)
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState, QStateError> {
        let layout = self.layout.concat(&other.layout)?;
        let mut amplitudes = Vec::with_capacity(layout.total_dim());
        for a in &self.amplitudes {
            amplitudes.extend(other.amplitudes.iter().map(|b| a * b));
        }
        Ok(PureState { layout, amplitudes })
    }

    /// Reorders registers; `order` must name every register exactly once.
    pub fn permuted(&self, order: &[&str]) -> Result<PureState, QStateError> {
        if order.len() != self.layout.len() {
            return Err(QStateError::DimensionMismatch {
                expected: self.layout.len(),
                found: order.len(),
            });
        }
        let pos = self.layout.positions(order)?;
        Ok(self.permuted_by(&pos))
    }

    fn permuted_by(&self, pos: &[usize]) -> PureState {
        PureState {
            layout: self.layout.permuted(pos),
            amplitudes: permute_axes(&self.amplitudes, &self.layout.dims(), pos),
        }
    }

    /// Same registers reordered to match `layout`.
    pub fn aligned_to(&self, layout: &SystemLayout) -> Result<PureState, QStateError> {
        if !self.layout.same_registers(layout) {
            return Err(QStateError::LayoutMismatch(
                self.layout.to_string(),
                layout.to_string(),
            ));
        }
        let names: Vec<&str> = layout.names().collect();
        self.permuted(&names)
    }

    /// The amplitudes as a matrix with rows indexed by `rows` (in the order
    /// given) and columns by the remaining registers in layout order.
    pub fn matrix(&self, rows: &[&str]) -> Result<CMatrix, QStateError> {
        let (m, _) = self.matrix_with_cols(rows)?;
        Ok(m)
    }

    pub(crate) fn matrix_with_cols(&self, rows: &[&str]) -> Result<(CMatrix, Vec<String>), QStateError> {
        let pos = self.layout.positions(rows)?;
        let rest: Vec<usize> = (0..self.layout.len()).filter(|i| !pos.contains(i)).collect();
        let mut order = pos.clone();
        order.extend(&rest);
        let data = permute_axes(&self.amplitudes, &self.layout.dims(), &order);
        let r: usize = pos.iter().map(|&p| self.layout.registers()[p].dim).product();
        let c = data.len() / r;
        let cols = rest
            .iter()
            .map(|&p| self.layout.registers()[p].name.clone())
            .collect();
        Ok((from_row_major(r, c, &data), cols))
    }

    /// Applies `u` to the registers `on` (combined row-major in the order
    /// given); the layout is unchanged.
    pub fn apply(&self, on: &[&str], u: &Unitary) -> Result<PureState, QStateError> {
        let pos = self.layout.positions(on)?;
        let mut order = pos.clone();
        order.extend((0..self.layout.len()).filter(|i| !pos.contains(i)));
        let moved = self.permuted_by(&order);
        let d: usize = pos.iter().map(|&p| self.layout.registers()[p].dim).product();
        if u.dim() != d {
            return Err(QStateError::DimensionMismatch { expected: d, found: u.dim() });
        }
        let out = PureState {
            layout: moved.layout,
            amplitudes: apply_row_major(u.matrix(), &moved.amplitudes),
        };
        Ok(out.permuted_by(&inverse_order(&order)))
    }

    /// Applies `u` to `inputs` and relabels the output space as `outputs`
    /// (whose dimensions must multiply to the same total). The output
    /// registers are placed first in the new layout.
    pub fn apply_relabel(
        &self,
        inputs: &[&str],
        u: &Unitary,
        outputs: &[Register],
    ) -> Result<PureState, QStateError> {
        let d_out: usize = outputs.iter().map(|r| r.dim).product();
        let (m, rest) = self.matrix_with_cols(inputs)?;
        if u.dim() != m.nrows() || d_out != m.nrows() {
            return Err(QStateError::DimensionMismatch {
                expected: m.nrows(),
                found: if u.dim() != m.nrows() { u.dim() } else { d_out },
            });
        }
        let mut registers = outputs.to_vec();
        for name in rest {
            let dim = self.layout.dim_of(&name)?;
            registers.push(Register { name, dim });
        }
        let layout = SystemLayout::from_registers(registers)?;
        Ok(PureState {
            layout,
            amplitudes: to_row_major(&matmul(u.matrix(), &m)),
        })
    }

    pub fn rename(&self, old: &str, new: &str) -> Result<PureState, QStateError> {
        let mut out = self.clone();
        out.layout.rename(old, new)?;
        Ok(out)
    }

    /// Exchanges the contents of two registers of equal dimension.
    pub fn swap_registers(&self, a: &str, b: &str) -> Result<PureState, QStateError> {
        let (da, db) = (self.layout.dim_of(a)?, self.layout.dim_of(b)?);
        if da != db {
            return Err(QStateError::DimensionMismatch { expected: da, found: db });
        }
        let mut out = self.clone();
        let tmp = "\u{0}swap";
        out.layout.rename(a, tmp)?;
        out.layout.rename(b, a)?;
        out.layout.rename(tmp, b)?;
        Ok(out)
    }

    /// Reinterprets one register as a row-major product of `parts`.
    pub fn split_register(&self, name: &str, parts: &[(&str, usize)]) -> Result<PureState, QStateError> {
        let p = self
            .layout
            .position(name)
            .ok_or_else(|| QStateError::UnknownRegister(name.to_string()))?;
        let dim = self.layout.registers()[p].dim;
        let prod: usize = parts.iter().map(|&(_, d)| d).product();
        if prod != dim {
            return Err(QStateError::DimensionMismatch { expected: dim, found: prod });
        }
        let mut registers = self.layout.registers().to_vec();
        registers.splice(p..=p, parts.iter().map(|&(n, d)| Register::new(n, d)));
        Ok(PureState {
            layout: SystemLayout::from_registers(registers)?,
            amplitudes: self.amplitudes.clone(),
        })
    }

    /// Fuses `names` (row-major in the order given) into one register placed
    /// where the earliest of them sat.
    pub fn merge_registers(&self, names: &[&str], merged: &str) -> Result<PureState, QStateError> {
        let pos = self.layout.positions(names)?;
        if pos.is_empty() {
            return self.with_ancilla(merged, 1);
        }
        let first = *pos.iter().min().unwrap();
        let mut order = Vec::with_capacity(self.layout.len());
        for i in 0..self.layout.len() {
            if i == first {
                order.extend(&pos);
            } else if !pos.contains(&i) {
                order.push(i);
            }
        }
        let moved = self.permuted_by(&order);
        let dim: usize = pos.iter().map(|&p| self.layout.registers()[p].dim).product();
        let mut registers: Vec<Register> = Vec::new();
        let mut inserted = false;
        for r in moved.layout.registers() {
            if names.contains(&r.name.as_str()) {
                if !inserted {
                    registers.push(Register::new(merged, dim));
                    inserted = true;
                }
            } else {
                registers.push(r.clone());
            }
        }
        Ok(PureState {
            layout: SystemLayout::from_registers(registers)?,
            amplitudes: moved.amplitudes,
        })
    }

    /// Appends a register prepared in |0>.
    pub fn with_ancilla(&self, name: &str, dim: usize) -> Result<PureState, QStateError> {
        self.tensor(&PureState::zero(name, dim)?)
    }

    /// `n` copies, with each register fused across copies (copy index is
    /// the slowest-varying digit within the fused register).
    pub fn copies(&self, n: usize) -> Result<PureState, QStateError> {
        if n == 0 {
            return Err(QStateError::DimensionMismatch { expected: 1, found: 0 });
        }
        if n == 1 {
            return Ok(self.clone());
        }
        let tag = |name: &str, i: usize| format!("{name}\u{0}{i}");
        let suffixed = |i: usize| -> Result<PureState, QStateError> {
            let mut s = self.clone();
            for name in self.layout.names() {
                s.layout.rename(name, &tag(name, i))?;
            }
            Ok(s)
        };
        let mut acc = suffixed(0)?;
        for i in 1..n {
            acc = acc.tensor(&suffixed(i)?)?;
        }
        for name in self.layout.names() {
            let parts: Vec<String> = (0..n).map(|i| tag(name, i)).collect();
            let parts: Vec<&str> = parts.iter().map(String::as_str).collect();
            acc = acc.merge_registers(&parts, name)?;
        }
        Ok(acc)
    }

    /// `<self|other>`; layouts must hold the same registers.
    pub fn inner(&self, other: &PureState) -> Result<C64, QStateError> {
        let other = if other.layout == self.layout {
            std::borrow::Cow::Borrowed(other)
        } else {
            std::borrow::Cow::Owned(other.aligned_to(&self.layout)?)
        };
        Ok(self
            .amplitudes
            .iter()
            .zip(other.amplitudes.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn density(&self) -> DensityOperator {
        let v = DVector::from_column_slice(&self.amplitudes);
        DensityOperator::from_parts_unchecked(self.layout.clone(), &v * v.adjoint())
    }

    /// Reduced state on `keep` (result in layout order).
    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityOperator, QStateError> {
        let sub = self.layout.subset(keep)?;
        let names: Vec<&str> = sub.names().collect();
        let m = self.matrix(&names)?;
        Ok(DensityOperator::from_parts_unchecked(sub, gram(&m)))
    }

    /// Number of nonzero Schmidt coefficients across `rows | rest`.
    pub fn schmidt_rank(&self, rows: &[&str]) -> Result<usize, QStateError> {
        let m = self.matrix(rows)?;
        Ok(m.singular_values().iter().filter(|&&s| s > 1e-9).count())
    }

    /// `sqrt(<target| rho |target>)` where rho is this state's marginal on
    /// the registers of `target`; the fidelity of that marginal with a pure
    /// target, computed without forming rho.
    pub fn marginal_fidelity_with(&self, target: &PureState) -> Result<f64, QStateError> {
        let names: Vec<&str> = target.layout.names().collect();
        for r in target.layout.registers() {
            let d = self.layout.dim_of(&r.name)?;
            if d != r.dim {
                return Err(QStateError::DimensionMismatch { expected: r.dim, found: d });
            }
        }
        let m = self.matrix(&names)?;
        let t = DVector::from_column_slice(&target.amplitudes);
        let proj = m.adjoint() * t;
        Ok(proj.norm().clamp(0.0, 1.0))
    }
}

fn check_len(layout: &SystemLayout, len: usize) -> Result<(), QStateError> {
    if layout.total_dim() != len {
        return Err(QStateError::DimensionMismatch {
            expected: layout.total_dim(),
            found: len,
        });
    }
    Ok(())
}

fn l2(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}
