//! Dense complex helpers on top of nalgebra.

use matrixmultiply::{zgemm, CGemmOption};
use nalgebra::{DMatrix, Dyn, Matrix, RawStorage};
use num_complex::Complex64;

use super::EIGEN_CUTOFF;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Row-major flat data to a `rows x cols` matrix.
pub fn from_row_major(rows: usize, cols: usize, data: &[C64]) -> CMatrix {
    CMatrix::from_row_slice(rows, cols, data)
}

pub fn to_row_major(m: &CMatrix) -> Vec<C64> {
    m.transpose().as_slice().to_vec()
}

/// `c = a b` on raw strided storage.
///
/// # Safety
/// Each pointer with its strides must address an in-bounds array of the
/// stated shape, and `c` must not alias `a` or `b`.
#[allow(clippy::too_many_arguments)]
unsafe fn gemm(
    (m, k, n): (usize, usize, usize),
    a: *const C64,
    (rsa, csa): (isize, isize),
    b: *const C64,
    (rsb, csb): (isize, isize),
    c: *mut C64,
    (rsc, csc): (isize, isize),
) {
    if m == 0 || n == 0 {
        return;
    }
    // Complex<f64> is repr(C) with the layout of [f64; 2].
    zgemm(
        CGemmOption::Standard,
        CGemmOption::Standard,
        m,
        k,
        n,
        [1.0, 0.0],
        a.cast(),
        rsa,
        csa,
        b.cast(),
        rsb,
        csb,
        [0.0, 0.0],
        c.cast(),
        rsc,
        csc,
    );
}

fn strides<S: RawStorage<C64, Dyn, Dyn>>(m: &Matrix<C64, Dyn, Dyn, S>) -> (isize, isize) {
    let (r, c) = m.strides();
    (r as isize, c as isize)
}

/// `a * b` for matrices or views, through a packed kernel; nalgebra's
/// generic product is several times slower for complex entries.
pub fn matmul<S1, S2>(a: &Matrix<C64, Dyn, Dyn, S1>, b: &Matrix<C64, Dyn, Dyn, S2>) -> CMatrix
where
    S1: RawStorage<C64, Dyn, Dyn>,
    S2: RawStorage<C64, Dyn, Dyn>,
{
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions differ");
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut c = CMatrix::zeros(m, n);
    // SAFETY: shapes and strides come from the matrices themselves and `c`
    // is freshly allocated, column-major.
    unsafe { gemm((m, k, n), a.as_ptr(), strides(a), b.as_ptr(), strides(b), c.as_mut_ptr(), (1, m as isize)) };
    c
}

/// `m m^dagger`.
pub fn gram<S: RawStorage<C64, Dyn, Dyn>>(m: &Matrix<C64, Dyn, Dyn, S>) -> CMatrix {
    matmul(m, &m.adjoint())
}

/// `u x` where `x` is `u.ncols()` rows of row-major data; the result is
/// row-major too.
pub fn apply_row_major(u: &CMatrix, data: &[C64]) -> Vec<C64> {
    let k = u.ncols();
    assert_eq!(data.len() % k.max(1), 0, "data is not a whole number of rows");
    let n = if k == 0 { 0 } else { data.len() / k };
    let m = u.nrows();
    let mut out = vec![C64::new(0.0, 0.0); m * n];
    // SAFETY: `data` is k x n and `out` is m x n, both row-major.
    unsafe {
        gemm(
            (m, k, n),
            u.as_ptr(),
            strides(u),
            data.as_ptr(),
            (n as isize, 1),
            out.as_mut_ptr(),
            (n as isize, 1),
        )
    };
    out
}

fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

fn spectrum_ok(vals: &nalgebra::DVector<f64>, h: &CMatrix) -> bool {
    let sum: f64 = vals.iter().sum();
    vals.iter().all(|l| l.is_finite()) && (sum - h.trace().re).abs() <= 1e-9 * (1.0 + h.norm())
}

// nalgebra's QR iteration can return an infinite eigenvalue on large sparse
// input (e.g. a rank-2 projector with scattered support). Shifting the
// spectrum away from zero sidesteps it.
fn shifted(h: &CMatrix) -> (CMatrix, f64) {
    let s = h.norm().max(1.0);
    (h + CMatrix::identity(h.nrows(), h.ncols()) * C64::new(s, 0.0), s)
}

fn checked_eigen(m: &CMatrix) -> nalgebra::SymmetricEigen<C64, nalgebra::Dyn> {
    let h = hermitize(m);
    let eig = h.clone().symmetric_eigen();
    if spectrum_ok(&eig.eigenvalues, &h) && (eig.recompose() - &h).norm() <= 1e-9 * (1.0 + h.norm()) {
        return eig;
    }
    let (hs, s) = shifted(&h);
    let mut eig = hs.symmetric_eigen();
    eig.eigenvalues.iter_mut().for_each(|l| *l -= s);
    eig
}

/// Eigenpairs of a Hermitian matrix, eigenvalues sorted descending.
pub fn hermitian_eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let eig = checked_eigen(m);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
    (values, vectors)
}

/// Eigenvalues of a Hermitian matrix, sorted descending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let h = hermitize(m);
    let mut vals = h.clone().symmetric_eigenvalues();
    if !spectrum_ok(&vals, &h) {
        let (hs, s) = shifted(&h);
        vals = hs.symmetric_eigenvalues().map(|l| l - s);
    }
    let mut v: Vec<f64> = vals.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Principal square root of a PSD matrix; eigenvalues below the cutoff are
/// treated as zero.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigh(m);
    let n = m.nrows();
    let mut scaled = vecs.clone();
    for (j, &l) in vals.iter().enumerate() {
        let s = if l > EIGEN_CUTOFF { l.sqrt() } else { 0.0 };
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    &scaled * vecs.adjoint()
}

/// Sum of singular values. Tall or wide inputs are first reduced to a
/// square triangular factor by QR, which preserves the singular values.
pub fn nuclear_norm(m: &CMatrix) -> f64 {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return 0.0;
    }
    let reduced = if r > 2 * c {
        m.clone().qr().r()
    } else if c > 2 * r {
        m.adjoint().qr().r()
    } else {
        m.clone()
    };
    reduced.singular_values().iter().sum()
}

/// Frobenius norm of `U^dagger U - I`.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    let n = u.ncols();
    (u.adjoint() * u - CMatrix::identity(n, n)).norm()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Multiplies column `j` so that its first entry with modulus above
/// `tol` is real and positive.
pub fn fix_column_phases(m: &mut CMatrix, tol: f64) {
    for j in 0..m.ncols() {
        if let Some(i) = (0..m.nrows()).find(|&i| m[(i, j)].norm() > tol) {
            let z = m[(i, j)];
            let phase = z.conj() / z.norm();
            for r in 0..m.nrows() {
                m[(r, j)] *= phase;
            }
        }
    }
}

/// Extends the orthonormal columns of `q` (n x k) to an n x n unitary whose
/// first k columns are `q`.
pub fn complete_unitary(q: &CMatrix) -> CMatrix {
    let (n, k) = q.shape();
    if k >= n {
        return q.clone();
    }
    // Householder QR of [q | I]: the first k columns of the unitary factor
    // span q, the rest is an orthonormal basis of the complement.
    let mut aug = CMatrix::zeros(n, k + n);
    aug.columns_mut(0, k).copy_from(q);
    aug.columns_mut(k, n).fill_with_identity();
    let mut out = aug.qr().q();
    out.columns_mut(0, k).copy_from(q);
    out
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Rows and columns of `m` grouped by the connected components of its
/// nonzero pattern, so that `m` is block diagonal up to permutations.
/// A row or column with no nonzero entry is a component on its own.
pub fn block_components(m: &CMatrix) -> Vec<(Vec<usize>, Vec<usize>)> {
    let (r, c) = m.shape();
    let mut parent: Vec<usize> = (0..r + c).collect();
    for j in 0..c {
        for (i, z) in m.column(j).iter().enumerate() {
            if z.re != 0.0 || z.im != 0.0 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, r + j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut slot = vec![usize::MAX; r + c];
    let mut out: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for node in 0..r + c {
        let root = find(&mut parent, node);
        if slot[root] == usize::MAX {
            slot[root] = out.len();
            out.push((Vec::new(), Vec::new()));
        }
        let entry = &mut out[slot[root]];
        if node < r {
            entry.0.push(node);
        } else {
            entry.1.push(node - r);
        }
    }
    out
}

/// Submatrix on the given rows and columns.
pub fn select(m: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// [`hermitian_eigh`] computed block by block over the nonzero pattern.
/// A diagonal input gives a permutation matrix of eigenvectors.
pub fn block_hermitian_eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    for j in 0..n {
        for (i, z) in m.column(j).iter().enumerate() {
            if i != j && (z.re != 0.0 || z.im != 0.0) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    if groups.len() == 1 {
        return hermitian_eigh(m);
    }
    // (value, rows of the block, eigenvector within the block)
    let mut pairs: Vec<(f64, usize, CMatrix)> = Vec::with_capacity(n);
    for (g, idx) in groups.iter().enumerate() {
        if idx.len() == 1 {
            pairs.push((m[(idx[0], idx[0])].re, g, CMatrix::from_element(1, 1, C64::new(1.0, 0.0))));
            continue;
        }
        let (vals, vecs) = hermitian_eigh(&select(m, idx, idx));
        for (k, v) in vals.into_iter().enumerate() {
            pairs.push((v, g, vecs.columns(k, 1).into_owned()));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut vectors = CMatrix::zeros(n, n);
    for (col, (_, g, v)) in pairs.iter().enumerate() {
        for (k, &row) in groups[*g].iter().enumerate() {
            vectors[(row, col)] = v[(k, 0)];
        }
    }
    (pairs.iter().map(|p| p.0).collect(), vectors)
}
