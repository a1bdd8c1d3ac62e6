use super::layout::{permute_axes, SystemLayout};
use super::linalg::{hermitian_eigenvalues, CMatrix, C64};
use super::{QStateError, NORM_TOL};

/// Hermitian, unit-trace, positive semidefinite operator over a layout.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator {
    layout: SystemLayout,
    matrix: CMatrix,
}

impl DensityOperator {
    /// Validates Hermiticity, trace and positivity to 1e-9.
    pub fn new(layout: SystemLayout, matrix: CMatrix) -> Result<Self, QStateError> {
        let d = layout.total_dim();
        if matrix.shape() != (d, d) {
            return Err(QStateError::DimensionMismatch { expected: d, found: matrix.nrows() });
        }
        let herm = (&matrix - matrix.adjoint()).norm();
        if herm > NORM_TOL {
            return Err(QStateError::NotHermitian(herm));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > NORM_TOL || tr.im.abs() > NORM_TOL {
            return Err(QStateError::BadTrace(tr.re));
        }
        let min = hermitian_eigenvalues(&matrix).last().copied().unwrap_or(0.0);
        if min < -NORM_TOL {
            return Err(QStateError::NotPositive(min));
        }
        Ok(DensityOperator { layout, matrix })
    }

    pub(crate) fn from_parts_unchecked(layout: SystemLayout, matrix: CMatrix) -> Self {
        DensityOperator { layout, matrix }
    }

    /// Diagonal operator from probabilities over a layout's basis.
    pub fn diagonal(layout: SystemLayout, probs: &[f64]) -> Result<Self, QStateError> {
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            probs.len(),
            probs.iter().map(|&p| C64::new(p, 0.0)),
        ));
        DensityOperator::new(layout, m)
    }

    pub fn maximally_mixed(layout: SystemLayout) -> Self {
        let d = layout.total_dim();
        let m = CMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0);
        DensityOperator { layout, matrix: m }
    }

    pub fn layout(&self) -> &SystemLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator, QStateError> {
        Ok(DensityOperator {
            layout: self.layout.concat(&other.layout)?,
            matrix: self.matrix.kronecker(&other.matrix),
        })
    }

    /// Basis-index permutation induced by reordering registers.
    fn index_map(&self, order: &[usize]) -> Vec<usize> {
        let idx: Vec<usize> = (0..self.dim()).collect();
        permute_axes(&idx, &self.layout.dims(), order)
    }

    /// Traces out everything not in `keep`; kept registers stay in layout order.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<DensityOperator, QStateError> {
        let sub = self.layout.subset(keep)?;
        let kept: Vec<usize> = sub
            .names()
            .map(|n| self.layout.position(n).unwrap())
            .collect();
        let mut order = kept.clone();
        order.extend((0..self.layout.len()).filter(|i| !kept.contains(i)));
        let map = self.index_map(&order);
        let dk = sub.total_dim();
        let dt = self.dim() / dk;
        let m = CMatrix::from_fn(dk, dk, |i, j| {
            (0..dt)
                .map(|t| self.matrix[(map[i * dt + t], map[j * dt + t])])
                .sum()
        });
        Ok(DensityOperator { layout: sub, matrix: m })
    }

    /// Same operator with registers reordered to `layout`.
    pub fn aligned_to(&self, layout: &SystemLayout) -> Result<DensityOperator, QStateError> {
        if !self.layout.same_registers(layout) {
            return Err(QStateError::LayoutMismatch(
                self.layout.to_string(),
                layout.to_string(),
            ));
        }
        let names: Vec<&str> = layout.names().collect();
        let order = self.layout.positions(&names)?;
        let map = self.index_map(&order);
        let d = self.dim();
        let m = CMatrix::from_fn(d, d, |i, j| self.matrix[(map[i], map[j])]);
        Ok(DensityOperator { layout: layout.clone(), matrix: m })
    }
}
