use std::f64::consts::FRAC_1_SQRT_2;

use rand::Rng;
use rand_distr::StandardNormal;

use super::linalg::{unitarity_residual, CMatrix, C64};
use super::{QStateError, NORM_TOL};

/// Square matrix with `U^dagger U = I` to 1e-9 (Frobenius).
#[derive(Clone, Debug, PartialEq)]
pub struct Unitary {
    matrix: CMatrix,
}

impl Unitary {
    pub fn new(matrix: CMatrix) -> Result<Self, QStateError> {
        if !matrix.is_square() {
            return Err(QStateError::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let res = unitarity_residual(&matrix);
        if !(res <= NORM_TOL) {
            return Err(QStateError::NotUnitary(res));
        }
        Ok(Unitary { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Unitary { matrix: CMatrix::identity(dim, dim) }
    }

    /// Basis permutation `|i> -> |perm[i]>`.
    pub fn permutation(perm: &[usize]) -> Result<Self, QStateError> {
        let d = perm.len();
        let mut m = CMatrix::zeros(d, d);
        for (i, &p) in perm.iter().enumerate() {
            if p >= d {
                return Err(QStateError::DimensionMismatch { expected: d, found: p + 1 });
            }
            m[(p, i)] = C64::new(1.0, 0.0);
        }
        Unitary::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> Unitary {
        Unitary { matrix: self.matrix.adjoint() }
    }

    pub fn residual(&self) -> f64 {
        unitarity_residual(&self.matrix)
    }

    pub fn kron(&self, other: &Unitary) -> Unitary {
        Unitary { matrix: self.matrix.kronecker(&other.matrix) }
    }
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the
/// phases of `R`'s diagonal folded back into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Unitary {
    assert!(dim >= 1, "unitary dimension must be positive");
    let mut g = CMatrix::zeros(dim, dim);
    // fill row-major so the stream order does not depend on storage order
    for i in 0..dim {
        for j in 0..dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            g[(i, j)] = C64::new(re, im) * FRAC_1_SQRT_2;
        }
    }
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    Unitary { matrix: q }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn haar_draws_are_unitary_and_deterministic() {
        for dim in [1, 2, 3, 8] {
            let a = haar_unitary(dim, &mut ChaCha20Rng::seed_from_u64(11));
            let b = haar_unitary(dim, &mut ChaCha20Rng::seed_from_u64(11));
            assert!(a.residual() <= 1e-9);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn haar_entry_second_moment() {
        // E|U_00|^2 = 1/d; 10^4 draws at d = 4, 3 standard errors.
        let mut rng = ChaCha20Rng::seed_from_u64(2024);
        let n = 10_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| haar_unitary(4, &mut rng).matrix()[(0, 0)].norm_sqr())
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - 0.25).abs() <= 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn rejects_non_unitary() {
        let m = CMatrix::identity(2, 2) * C64::new(2.0, 0.0);
        assert!(matches!(Unitary::new(m), Err(QStateError::NotUnitary(_))));
    }
}
