use super::encode::Encoded;
use crate::qstate::linalg::{
    block_components, block_hermitian_eigh, gram, hermitian_eigenvalues, matmul, nuclear_norm, select, CMatrix,
};
use crate::qstate::{C64, EIGEN_CUTOFF};

/// Eigenvalues of the reference marginal closer than this are one cluster.
const CLUSTER_TOL: f64 = 1e-12;

/// The purification matrix: rows `(kept, reference...)`, columns the
/// receiver's side (sent and side registers).
fn outside_matrix(enc: &Encoded) -> (CMatrix, usize, usize) {
    let outside = enc.outside();
    let names: Vec<&str> = outside.iter().map(String::as_str).collect();
    let y = enc.state.matrix(&names).expect("encoded registers exist");
    let dk = enc.kept_dim();
    let dr = y.nrows() / dk;
    (y, dk, dr)
}

/// `rho_R = sum_i Y_i Y_i^dagger` over the `dk` row blocks of `Y`.
fn reference_marginal(y: &CMatrix, dk: usize, dr: usize) -> CMatrix {
    let mut rho = CMatrix::zeros(dr, dr);
    for i in 0..dk {
        let b = y.rows(i * dr, dr);
        rho += gram(&b);
    }
    rho
}

/// `Y` with each reference block rotated into the eigenbasis of `rho_R`,
/// and the eigenvalues (descending). Structural zeros of `Y` survive when
/// `rho_R` is itself block diagonal, which keeps the components below small.
struct Rotated {
    y: CMatrix,
    mu: Vec<f64>,
    dk: usize,
    dr: usize,
}

fn rotated(enc: &Encoded) -> Rotated {
    let (y, dk, dr) = outside_matrix(enc);
    let (mu, w) = block_hermitian_eigh(&reference_marginal(&y, dk, dr));
    let wd = w.adjoint();
    let mut out = CMatrix::zeros(y.nrows(), y.ncols());
    for i in 0..dk {
        let block = matmul(&wd, &y.rows(i * dr, dr));
        out.rows_mut(i * dr, dr).copy_from(&block);
    }
    Rotated { y: out, mu, dk, dr }
}

/// `F(rho_{kept,R}, pi_kept (x) rho_R)`, computed as
/// `|| (I (x) sqrt(rho_R)) Y ||_1 / sqrt(d_kept)` without forming either
/// operator.
pub fn uhlmann_fidelity(enc: &Encoded) -> f64 {
    let Rotated { y, mu, dk, dr } = rotated(enc);
    let s: Vec<f64> = mu.iter().map(|&l| if l > EIGEN_CUTOFF { l.sqrt() } else { 0.0 }).collect();
    let m = CMatrix::from_fn(y.nrows(), y.ncols(), |r, c| y[(r, c)] * s[r % dr]);
    let norm: f64 = block_components(&m)
        .iter()
        .filter(|(r, c)| !r.is_empty() && !c.is_empty())
        .map(|(r, c)| nuclear_norm(&select(&m, r, c)))
        .sum();
    (norm / (dk as f64).sqrt()).clamp(0.0, 1.0)
}

/// `T(rho_{kept,R}, pi_kept (x) rho_R)`.
///
/// In the eigenbasis of `rho_R` the second operator is diagonal, so the
/// difference splits over the components of `Y`. Within one, rows are
/// grouped by their diagonal value; a group with more rows than `Y` has
/// columns only meets `Y Y^dagger` in a `p`-dimensional subspace, so it is
/// replaced by the triangular factor of its QR and the rest of the group
/// contributes its value times the dropped dimension.
pub fn decoupling_error(enc: &Encoded) -> f64 {
    let Rotated { y, mu, dk, dr } = rotated(enc);
    let value = |row: usize| mu[row % dr];
    let mut norm = 0.0;
    for (rows, cols) in block_components(&y) {
        if cols.is_empty() {
            norm += rows.iter().map(|&r| value(r).max(0.0) / dk as f64).sum::<f64>();
        } else if !rows.is_empty() {
            let mut rows = rows;
            rows.sort_by(|&a, &b| value(b).total_cmp(&value(a)));
            let vals: Vec<f64> = rows.iter().map(|&r| value(r)).collect();
            norm += gram_minus_diagonal(&select(&y, &rows, &cols), &vals, dk);
        }
    }
    (norm / 2.0).clamp(0.0, 1.0)
}

/// `|| Z Z^dagger - diag(mu) / dk ||_1` with `mu` sorted descending.
fn gram_minus_diagonal(z: &CMatrix, mu: &[f64], dk: usize) -> f64 {
    let p = z.ncols();
    let mut clusters: Vec<(f64, usize, usize)> = Vec::new();
    let mut j = 0;
    while j < mu.len() {
        let mut end = j + 1;
        while end < mu.len() && (mu[j] - mu[end]).abs() <= CLUSTER_TOL {
            end += 1;
        }
        let value = mu[j..end].iter().sum::<f64>() / (end - j) as f64 / dk as f64;
        clusters.push((value.max(0.0), j, end));
        j = end;
    }

    let mut blocks: Vec<CMatrix> = Vec::new();
    let mut diag: Vec<f64> = Vec::new();
    let mut dropped = 0.0;
    for &(value, start, end) in &clusters {
        let yc = z.rows(start, end - start).into_owned();
        let block = if end - start > p { yc.qr().r() } else { yc };
        dropped += value * (end - start - block.nrows()) as f64;
        diag.extend(std::iter::repeat(value).take(block.nrows()));
        blocks.push(block);
    }
    let total: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut zr = CMatrix::zeros(total, p);
    let mut at = 0;
    for b in &blocks {
        zr.rows_mut(at, b.nrows()).copy_from(b);
        at += b.nrows();
    }
    let mut h = gram(&zr);
    for (i, v) in diag.iter().enumerate() {
        h[(i, i)] -= C64::new(*v, 0.0);
    }
    hermitian_eigenvalues(&h).iter().map(|l| l.abs()).sum::<f64>() + dropped
}
