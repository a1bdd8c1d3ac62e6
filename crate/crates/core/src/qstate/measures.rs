use super::density::DensityOperator;
use super::layout::SystemLayout;
use super::linalg::{fix_column_phases, hermitian_eigenvalues, hermitian_eigh, nuclear_norm, psd_sqrt, C64};
use super::pure::PureState;
use super::{QStateError, EIGEN_CUTOFF, NORM_TOL};

fn check_same_layout(a: &DensityOperator, b: &DensityOperator) -> Result<(), QStateError> {
    if a.layout() != b.layout() {
        return Err(QStateError::LayoutMismatch(
            a.layout().to_string(),
            b.layout().to_string(),
        ));
    }
    Ok(())
}

/// Uhlmann fidelity in the square-root convention, `||sqrt(rho) sqrt(sigma)||_1`.
pub fn fidelity(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64, QStateError> {
    check_same_layout(rho, sigma)?;
    let f = nuclear_norm(&(psd_sqrt(rho.matrix()) * psd_sqrt(sigma.matrix())));
    Ok(f.clamp(0.0, 1.0))
}

/// `1/2 ||rho - sigma||_1`.
pub fn trace_distance(rho: &DensityOperator, sigma: &DensityOperator) -> Result<f64, QStateError> {
    check_same_layout(rho, sigma)?;
    let diff = rho.matrix() - sigma.matrix();
    let t: f64 = hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum::<f64>() / 2.0;
    Ok(t.clamp(0.0, 1.0))
}

/// `sum_i |ii> / sqrt(d)` over two registers of dimension `d`.
pub fn maximally_entangled(d: usize, names: [&str; 2]) -> Result<PureState, QStateError> {
    let layout = SystemLayout::new([(names[0], d), (names[1], d)])?;
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut amps = vec![C64::new(0.0, 0.0); d * d];
    for i in 0..d {
        amps[i * d + i] = amp;
    }
    Ok(PureState::from_parts_unchecked(layout, amps))
}

/// Canonical purification `sum_i sqrt(l_i) |e_i>|i>` with eigenvalues in
/// descending order, eigenvalues at or below 1e-12 dropped, and each
/// eigenvector's first nonzero component made real positive. The ancilla
/// register is appended after the operator's own registers.
pub fn purify(rho: &DensityOperator, ancilla: &str) -> Result<PureState, QStateError> {
    let (vals, mut vecs) = hermitian_eigh(rho.matrix());
    if let Some(&min) = vals.last() {
        if min < -NORM_TOL {
            return Err(QStateError::NotPositive(min));
        }
    }
    fix_column_phases(&mut vecs, 1e-12);
    let rank = vals.iter().filter(|&&l| l > EIGEN_CUTOFF).count().max(1);
    let layout = rho
        .layout()
        .concat(&SystemLayout::new([(ancilla, rank)])?)?;
    let d = rho.dim();
    let mut amps = vec![C64::new(0.0, 0.0); d * rank];
    for (j, &l) in vals.iter().take(rank).enumerate() {
        let s = l.max(0.0).sqrt();
        for i in 0..d {
            amps[i * rank + j] = vecs[(i, j)] * s;
        }
    }
    PureState::normalized(layout, amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn ket(name: &str, amps: &[f64]) -> PureState {
        let l = SystemLayout::new([(name, amps.len())]).unwrap();
        PureState::normalized(l, amps.iter().map(|&a| C64::new(a, 0.0)).collect()).unwrap()
    }

    #[test]
    fn fidelity_named_values() {
        let zero = ket("A", &[1.0, 0.0]).density();
        let one = ket("A", &[0.0, 1.0]).density();
        let plus = ket("A", &[1.0, 1.0]).density();
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-9);
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-9);
        assert!((fidelity(&zero, &plus).unwrap() - FRAC_1_SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn trace_distance_named_values() {
        let zero = ket("A", &[1.0, 0.0]).density();
        let one = ket("A", &[0.0, 1.0]).density();
        let plus = ket("A", &[1.0, 1.0]).density();
        assert!(trace_distance(&zero, &zero).unwrap().abs() < 1e-12);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-12);
        assert!((trace_distance(&zero, &plus).unwrap() - FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn layout_mismatch_is_an_error() {
        let a = ket("A", &[1.0, 0.0]).density();
        let b = ket("B", &[1.0, 0.0]).density();
        assert!(matches!(fidelity(&a, &b), Err(QStateError::LayoutMismatch(..))));
        assert!(matches!(trace_distance(&a, &b), Err(QStateError::LayoutMismatch(..))));
    }

    #[test]
    fn maximally_entangled_values() {
        let phi = maximally_entangled(2, ["A", "B"]).unwrap();
        let h = FRAC_1_SQRT_2;
        let expected = [h, 0.0, 0.0, h];
        for (a, e) in phi.amplitudes().iter().zip(expected) {
            assert!((a.re - e).abs() < 1e-15 && a.im == 0.0);
        }
        let trivial = maximally_entangled(1, ["A", "B"]).unwrap();
        assert_eq!(trivial.amplitudes(), &[C64::new(1.0, 0.0)]);
        let m = maximally_entangled(3, ["A", "B"]).unwrap().partial_trace(&["B"]).unwrap();
        let mixed = DensityOperator::maximally_mixed(SystemLayout::new([("B", 3)]).unwrap());
        assert!((m.matrix() - mixed.matrix()).norm() < 1e-12);
    }

    #[test]
    fn purify_maximally_mixed_qubit() {
        let rho = DensityOperator::maximally_mixed(SystemLayout::new([("A", 2)]).unwrap());
        let psi = purify(&rho, "P").unwrap();
        assert_eq!(psi.layout().dim_of("P").unwrap(), 2);
        // degenerate spectrum: assert the contract only
        assert_eq!(psi.schmidt_rank(&["A"]).unwrap(), 2);
        let back = psi.partial_trace(&["A"]).unwrap();
        assert!((back.matrix() - rho.matrix()).norm() < 1e-9);
    }

    #[test]
    fn purify_pure_input_uses_trivial_ancilla() {
        let rho = ket("A", &[1.0, 0.0]).density();
        let psi = purify(&rho, "P").unwrap();
        assert_eq!(psi.layout().dim_of("P").unwrap(), 1);
        assert!((psi.amplitudes()[0].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn purify_spectral_form() {
        let rho = DensityOperator::diagonal(SystemLayout::new([("A", 2)]).unwrap(), &[2.0 / 3.0, 1.0 / 3.0]).unwrap();
        let psi = purify(&rho, "P").unwrap();
        let a = psi.amplitudes();
        assert!((a[0].re - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((a[3].re - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!(a[1].norm() < 1e-12 && a[2].norm() < 1e-12);
    }

    #[test]
    fn purify_rejects_negative_operator() {
        let m = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::new(1.5, 0.0), C64::new(-0.5, 0.0)]));
        let bad = DensityOperator::from_parts_unchecked(SystemLayout::new([("A", 2)]).unwrap(), m);
        assert!(matches!(purify(&bad, "P"), Err(QStateError::NotPositive(_))));
    }
}
