//! Dense complex linear algebra with explicit tensor-factor bookkeeping.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `(M + M^dag) / 2`.
pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Largest entrywise modulus of `M - M^dag`.
pub fn hermiticity_error(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl Eigh {
    pub fn new(m: &CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::dims(format!(
                "eigendecomposition needs a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let h = hermitize(m);
        if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical("non-finite matrix entries".into()));
        }
        let eig = h.symmetric_eigen();
        let n = eig.eigenvalues.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = CMat::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok(Eigh { values, vectors })
    }

    /// `V f(Lambda) V^dag`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let s = f(lam);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        &scaled * self.vectors.adjoint()
    }

    pub fn min(&self) -> f64 {
        *self.values.last().unwrap_or(&0.0)
    }
}

/// Trace norm of a Hermitian matrix (sum of |eigenvalues|).
pub fn trace_norm_hermitian(m: &CMat) -> Result<f64> {
    Ok(Eigh::new(m)?.values.iter().map(|v| v.abs()).sum())
}

/// Sign function of a Hermitian matrix; zero eigenvalues map to zero.
pub fn hermitian_sign(m: &CMat) -> Result<CMat> {
    let e = Eigh::new(m)?;
    Ok(e.map(|v| {
        if v > 0.0 {
            1.0
        } else if v < 0.0 {
            -1.0
        } else {
            0.0
        }
    }))
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    let mut out = CVec::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

/// Checks `M^dag M = I` to `tol`, returning the residual.
pub fn isometry_residual(m: &CMat) -> f64 {
    let g = m.adjoint() * m;
    max_abs(&(g - identity(m.ncols())))
}

pub fn is_unitary(m: &CMat, tol: f64) -> bool {
    m.nrows() == m.ncols() && isometry_residual(m) <= tol
}

/// Thin QR with the diagonal of R made real-positive, so the Q factor is a
/// continuous function of its argument. Used both for Haar sampling and as
/// the Stiefel retraction.
pub fn qr_positive(m: &CMat) -> CMat {
    let qr = m.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..q.ncols().min(r.nrows()) {
        let d = r[(j, j)];
        let n = d.norm();
        if n > 0.0 {
            let phase = d / n;
            for i in 0..q.nrows() {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Row-major strides for factor dimensions (first factor most significant).
pub fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

pub fn product(dims: &[usize]) -> usize {
    dims.iter().product()
}

/// Maps each flat index of the permuted space to the flat index of the
/// original space. New factor `k` is old factor `perm[k]`.
fn permutation_map(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let n = product(dims);
    let old_strides = strides(dims);
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let new_strides = strides(&new_dims);
    (0..n)
        .map(|idx| {
            perm.iter()
                .enumerate()
                .map(|(k, &p)| ((idx / new_strides[k]) % new_dims[k]) * old_strides[p])
                .sum()
        })
        .collect()
}

fn check_perm(dims: &[usize], perm: &[usize]) -> Result<()> {
    let mut seen = vec![false; dims.len()];
    if perm.len() != dims.len() {
        return Err(Error::dims("permutation length differs from factor count"));
    }
    for &p in perm {
        if p >= dims.len() {
            return Err(Error::FactorOutOfRange {
                index: p,
                count: dims.len(),
            });
        }
        if seen[p] {
            return Err(Error::InvalidArgument("repeated factor in permutation".into()));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Reorders the tensor factors of an operator.
pub fn permute_operator(m: &CMat, dims: &[usize], perm: &[usize]) -> Result<CMat> {
    check_perm(dims, perm)?;
    let map = permutation_map(dims, perm);
    let n = map.len();
    Ok(CMat::from_fn(n, n, |i, j| m[(map[i], map[j])]))
}

/// Reorders the tensor factors of a vector.
pub fn permute_vector(v: &CVec, dims: &[usize], perm: &[usize]) -> Result<CVec> {
    check_perm(dims, perm)?;
    let map = permutation_map(dims, perm);
    Ok(CVec::from_fn(map.len(), |i, _| v[map[i]]))
}

/// Normalizes a factor index set: sorted, deduplicated, range-checked.
pub fn normalize_factors(factors: &[usize], count: usize) -> Result<Vec<usize>> {
    let mut f = factors.to_vec();
    f.sort_unstable();
    f.dedup();
    if let Some(&bad) = f.iter().find(|&&k| k >= count) {
        return Err(Error::FactorOutOfRange { index: bad, count });
    }
    Ok(f)
}

/// Permutation placing `front` factors first (in the given order) and the
/// remaining factors after them in ascending order.
pub fn front_permutation(front: &[usize], count: usize) -> Vec<usize> {
    let mut perm = front.to_vec();
    perm.extend((0..count).filter(|k| !front.contains(k)));
    perm
}

/// Partial trace keeping `keep` (normalized) factors in their original order.
pub fn partial_trace_op(m: &CMat, dims: &[usize], keep: &[usize]) -> Result<(CMat, Vec<usize>)> {
    let keep = normalize_factors(keep, dims.len())?;
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let st = strides(dims);
    let nk = product(&kept_dims);
    let nt = product(&traced_dims);
    let kst = strides(&kept_dims);
    let tst = strides(&traced_dims);
    // flat index of (kept multi-index, traced multi-index)
    let offset_kept: Vec<usize> = (0..nk)
        .map(|i| {
            keep.iter()
                .enumerate()
                .map(|(pos, &f)| ((i / kst[pos]) % kept_dims[pos]) * st[f])
                .sum()
        })
        .collect();
    let offset_traced: Vec<usize> = (0..nt)
        .map(|t| {
            traced
                .iter()
                .enumerate()
                .map(|(pos, &f)| ((t / tst[pos]) % traced_dims[pos]) * st[f])
                .sum()
        })
        .collect();
    let mut out = CMat::zeros(nk, nk);
    for i in 0..nk {
        for j in 0..nk {
            let mut acc = ZERO;
            for &t in &offset_traced {
                acc += m[(offset_kept[i] + t, offset_kept[j] + t)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok((out, kept_dims))
}

/// `Tr_R X` for `X: (p (x) R) -> (q (x) R)` stored as a `(p*r) x (q*r)`
/// matrix, the traced factor last.
pub fn trace_out_last(x: &CMat, p: usize, q: usize, r: usize) -> CMat {
    CMat::from_fn(p, q, |i, j| {
        let mut acc = ZERO;
        for k in 0..r {
            acc += x[(i * r + k, j * r + k)];
        }
        acc
    })
}

/// Transposes the listed factors of an operator.
pub fn partial_transpose_op(m: &CMat, dims: &[usize], factors: &[usize]) -> Result<CMat> {
    let factors = normalize_factors(factors, dims.len())?;
    let st = strides(dims);
    let n = m.nrows();
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            // swap the digits of the transposed factors between row and column
            let mut ii = i;
            let mut jj = j;
            for &f in &factors {
                let di = (i / st[f]) % dims[f];
                let dj = (j / st[f]) % dims[f];
                ii = ii - di * st[f] + dj * st[f];
                jj = jj - dj * st[f] + di * st[f];
            }
            out[(ii, jj)] = m[(i, j)];
        }
    }
    Ok(out)
}

/// Hilbert-Schmidt inner product `Tr(A^dag B)`.
pub fn hs_inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Real inner product `Re Tr(A^dag B)` used as the Riemannian metric.
pub fn real_inner(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Eigenvalues of a general square complex matrix via Schur decomposition.
pub fn eigenvalues_general(m: &CMat) -> Result<Vec<C64>> {
    let schur = nalgebra::linalg::Schur::new(m.clone());
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}
