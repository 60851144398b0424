//! Finite-dimensional quantum states, entropies and distances.
//!
//! Operators always carry their tensor-factor dimensions, so multi-register
//! expressions are index bookkeeping rather than ad-hoc reshapes. All
//! logarithms are base 2; entropies are in bits.

pub mod io;
pub mod linalg;
pub mod states;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tol;
pub use linalg::{c, C64, CMat, CVec, Eigh};
use linalg::{hermiticity_error, hermitize, product};

/// Hermitian, positive semidefinite, unit-trace operator with explicit
/// tensor-factor structure.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    mat: CMat,
}

impl DensityMatrix {
    /// Validates every invariant (shape, Hermiticity, PSD, trace).
    pub fn new(dims: Vec<usize>, mat: CMat) -> Result<Self> {
        check_dims(&dims, &mat)?;
        let herm = hermiticity_error(&mat);
        if herm > tol::HERMITIAN {
            return Err(Error::Invariant(format!("matrix not Hermitian (max |M - M^dag| = {herm:.3e})")));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > tol::TRACE || tr.im.abs() > tol::TRACE {
            return Err(Error::Invariant(format!("trace {tr} differs from 1")));
        }
        let mat = hermitize(&mat);
        let min = Eigh::new(&mat)?.min();
        if min < -tol::PSD {
            return Err(Error::Invariant(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(DensityMatrix { dims, mat })
    }

    /// Wraps a matrix produced by a trusted computation (tensoring, channel
    /// application). Hermitizes but skips the spectral check.
    pub(crate) fn from_trusted(dims: Vec<usize>, mat: CMat) -> Self {
        debug_assert_eq!(product(&dims), mat.nrows());
        DensityMatrix { dims, mat: hermitize(&mat) }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let m = &psi.amps * psi.amps.adjoint();
        DensityMatrix::from_trusted(psi.dims.clone(), m)
    }

    pub fn maximally_mixed(dims: &[usize]) -> Self {
        let n = product(dims);
        DensityMatrix::from_trusted(dims.to_vec(), linalg::identity(n).scale(1.0 / n as f64))
    }

    /// `|index><index|` in the computational basis.
    pub fn basis(dims: &[usize], index: usize) -> Result<Self> {
        Ok(DensityMatrix::from_pure(&PureState::basis(dims, index)?))
    }

    /// Classical mixture of diagonal entries.
    pub fn diagonal(dims: &[usize], probs: &[f64]) -> Result<Self> {
        let n = product(dims);
        if probs.len() != n {
            return Err(Error::dims(format!("{} probabilities for side {n}", probs.len())));
        }
        let m = CMat::from_fn(n, n, |i, j| if i == j { c(probs[i], 0.0) } else { c(0.0, 0.0) });
        DensityMatrix::new(dims.to_vec(), m)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn side(&self) -> usize {
        self.mat.nrows()
    }

    pub fn factor_count(&self) -> usize {
        self.dims.len()
    }

    pub fn purity(&self) -> f64 {
        linalg::hs_inner(&self.mat, &self.mat).re
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(Eigh::new(&self.mat)?.values)
    }

    /// Same operator, factors merged or split differently.
    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self> {
        if product(&dims) != self.side() {
            return Err(Error::dims(format!("dims {dims:?} do not multiply to side {}", self.side())));
        }
        Ok(DensityMatrix { dims, mat: self.mat.clone() })
    }

    /// Reorders factors: new factor `k` is old factor `perm[k]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let m = linalg::permute_operator(&self.mat, &self.dims, perm)?;
        let dims = perm.iter().map(|&p| self.dims[p]).collect();
        Ok(DensityMatrix { dims, mat: m })
    }

    /// `U rho U^dag` for a unitary on the whole space.
    pub fn conjugate(&self, u: &CMat) -> Result<Self> {
        if u.nrows() != self.side() || u.ncols() != self.side() {
            return Err(Error::dims("unitary side differs from state side"));
        }
        Ok(DensityMatrix::from_trusted(self.dims.clone(), u * &self.mat * u.adjoint()))
    }

    /// Re-runs the full validation, e.g. after deserialization.
    pub fn validate(&self) -> Result<()> {
        DensityMatrix::new(self.dims.clone(), self.mat.clone()).map(|_| ())
    }
}

fn check_dims(dims: &[usize], mat: &CMat) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::dims(format!("factor dimensions must be positive, got {dims:?}")));
    }
    if mat.nrows() != mat.ncols() {
        return Err(Error::dims(format!("matrix is {}x{}, not square", mat.nrows(), mat.ncols())));
    }
    if product(dims) != mat.nrows() {
        return Err(Error::dims(format!("dims {dims:?} do not multiply to side {}", mat.nrows())));
    }
    Ok(())
}

/// Unit vector with tensor-factor structure.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amps: CVec,
}

impl PureState {
    pub fn new(dims: Vec<usize>, amps: CVec) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) || product(&dims) != amps.len() {
            return Err(Error::dims(format!("dims {dims:?} do not match {} amplitudes", amps.len())));
        }
        let n2 = amps.norm_squared();
        if (n2 - 1.0).abs() > tol::NORM {
            return Err(Error::Invariant(format!("squared norm {n2} differs from 1")));
        }
        Ok(PureState { dims, amps })
    }

    /// Normalizes before validating; fails only on the zero vector.
    pub fn normalized(dims: Vec<usize>, amps: CVec) -> Result<Self> {
        let n = amps.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::Invariant("cannot normalize a zero vector".into()));
        }
        PureState::new(dims, amps.unscale(n))
    }

    pub fn basis(dims: &[usize], index: usize) -> Result<Self> {
        let n = product(dims);
        if index >= n {
            return Err(Error::InvalidArgument(format!("basis index {index} >= {n}")));
        }
        let mut v = CVec::zeros(n);
        v[index] = c(1.0, 0.0);
        PureState::new(dims.to_vec(), v)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amps
    }

    pub fn side(&self) -> usize {
        self.amps.len()
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amps.dotc(&other.amps)
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        PureState { dims, amps: linalg::kron_vec(&self.amps, &other.amps) }
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    pub fn with_phase(&self, theta: f64) -> PureState {
        PureState { dims: self.dims.clone(), amps: self.amps.map(|z| z * C64::from_polar(1.0, theta)) }
    }
}

/// `a (x) b`, factor lists concatenated.
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> DensityMatrix {
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    DensityMatrix::from_trusted(dims, linalg::kron(&a.mat, &b.mat))
}

/// `rho^{(x) k}`.
pub fn tensor_power(rho: &DensityMatrix, k: usize) -> Result<DensityMatrix> {
    if k == 0 {
        return Err(Error::InvalidArgument("tensor power needs k >= 1".into()));
    }
    let mut out = rho.clone();
    for _ in 1..k {
        out = tensor(&out, rho);
    }
    Ok(out)
}

/// Reduced state on the `keep` factors (kept in original order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(Error::InvalidArgument("partial trace must keep at least one factor".into()));
    }
    let (m, dims) = linalg::partial_trace_op(&rho.mat, &rho.dims, keep)?;
    Ok(DensityMatrix::from_trusted(dims, m))
}

/// `-sum lambda log2 lambda` over eigenvalues above the cutoff.
pub fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&l| l > tol::EIG_CUTOFF)
        .map(|&l| -l * l.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(entropy_of_spectrum(&Eigh::new(&rho.mat)?.values))
}

/// `D(rho || sigma) = Tr rho (log2 rho - log2 sigma)`, `+inf` when the
/// support of rho is not contained in the support of sigma.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dims != sigma.dims {
        return Err(Error::dims(format!("relative entropy of dims {:?} vs {:?}", rho.dims, sigma.dims)));
    }
    let er = Eigh::new(&rho.mat)?;
    let es = Eigh::new(&sigma.mat)?;
    // overlaps[i][j] = |<r_i|s_j>|^2
    let cross = er.vectors.adjoint() * &es.vectors;
    let mut kernel_weight = 0.0;
    let mut cross_term = 0.0;
    for (i, &li) in er.values.iter().enumerate() {
        if li <= tol::EIG_CUTOFF {
            continue;
        }
        for (j, &mj) in es.values.iter().enumerate() {
            let w = li * cross[(i, j)].norm_sqr();
            if mj <= tol::EIG_CUTOFF {
                kernel_weight += w;
            } else {
                cross_term += w * mj.log2();
            }
        }
    }
    if kernel_weight > tol::SUPPORT_OVERLAP {
        return Ok(f64::INFINITY);
    }
    let self_term: f64 = er.values.iter().filter(|&&l| l > tol::EIG_CUTOFF).map(|&l| l * l.log2()).sum();
    Ok((self_term - cross_term).max(0.0))
}

/// Trace norm `||a - b||_1` (sum of singular values), in `[0, 2]`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dims != b.dims {
        return Err(Error::dims(format!("trace distance of dims {:?} vs {:?}", a.dims, b.dims)));
    }
    linalg::trace_norm_hermitian(&(&a.mat - &b.mat))
}

/// Partial transpose on the listed factors. The result is Hermitian but
/// generally not positive.
pub fn partial_transpose(rho: &DensityMatrix, factors: &[usize]) -> Result<CMat> {
    if factors.is_empty() {
        return Err(Error::InvalidArgument("partial transpose needs at least one factor".into()));
    }
    linalg::partial_transpose_op(&rho.mat, &rho.dims, factors)
}

/// Outcome of a positive-partial-transpose test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PptReport {
    pub min_eigenvalue: f64,
    pub is_ppt: bool,
}

/// PPT test across the cut `factors | rest`.
pub fn is_ppt(rho: &DensityMatrix, factors: &[usize]) -> Result<PptReport> {
    let pt = partial_transpose(rho, factors)?;
    let min_eigenvalue = Eigh::new(&pt)?.min();
    Ok(PptReport { min_eigenvalue, is_ppt: min_eigenvalue >= -tol::PPT })
}

/// Schmidt decomposition of a pure state across `left | rest`.
#[derive(Debug, Clone)]
pub struct Schmidt {
    /// Descending, nonnegative.
    pub coefficients: Vec<f64>,
    /// Columns are the left Schmidt vectors.
    pub left: CMat,
    /// Columns are the right Schmidt vectors.
    pub right: CMat,
    pub left_dims: Vec<usize>,
    pub right_dims: Vec<usize>,
}

impl Schmidt {
    /// `sum_i s_i |e_i> (x) |f_i>` in the `left (x) right` factor order.
    pub fn reconstruct(&self) -> CVec {
        let dl = self.left.nrows();
        let dr = self.right.nrows();
        let mut v = CVec::zeros(dl * dr);
        for (k, &s) in self.coefficients.iter().enumerate() {
            for a in 0..dl {
                for b in 0..dr {
                    v[a * dr + b] += self.left[(a, k)] * self.right[(b, k)] * s;
                }
            }
        }
        v
    }
}

pub fn schmidt(psi: &PureState, left: &[usize]) -> Result<Schmidt> {
    let left = linalg::normalize_factors(left, psi.dims.len())?;
    if left.is_empty() || left.len() == psi.dims.len() {
        return Err(Error::InvalidArgument("Schmidt cut must split the factors into two nonempty sides".into()));
    }
    let perm = linalg::front_permutation(&left, psi.dims.len());
    let v = linalg::permute_vector(&psi.amps, &psi.dims, &perm)?;
    let left_dims: Vec<usize> = left.iter().map(|&k| psi.dims[k]).collect();
    let right_dims: Vec<usize> = perm[left.len()..].iter().map(|&k| psi.dims[k]).collect();
    let dl = product(&left_dims);
    let dr = product(&right_dims);
    let m = CMat::from_fn(dl, dr, |a, b| v[a * dr + b]);
    let svd = m.svd(true, true);
    let u = svd.u.ok_or_else(|| Error::Numerical("SVD left vectors".into()))?;
    let vt = svd.v_t.ok_or_else(|| Error::Numerical("SVD right vectors".into()))?;
    let r = svd.singular_values.len();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let coefficients = order.iter().map(|&k| svd.singular_values[k]).collect();
    let left_vecs = CMat::from_fn(dl, r, |a, k| u[(a, order[k])]);
    let right_vecs = CMat::from_fn(dr, r, |b, k| vt[(order[k], b)]);
    Ok(Schmidt { coefficients, left: left_vecs, right: right_vecs, left_dims, right_dims })
}

#[cfg(test)]
mod tests {
    use super::states;
    use super::*;

    fn close(a: f64, b: f64, eps: f64) -> bool {
        (a - b).abs() <= eps
    }

    #[test]
    fn tensor_examples() {
        let z = DensityMatrix::basis(&[2], 0).unwrap();
        let zz = tensor(&z, &z);
        assert_eq!(zz.dims(), &[2, 2]);
        assert!(linalg::max_abs(&(zz.matrix() - DensityMatrix::basis(&[2, 2], 0).unwrap().matrix())) < 1e-15);

        let mixed = tensor(&DensityMatrix::maximally_mixed(&[2]), &DensityMatrix::maximally_mixed(&[2]));
        assert!(linalg::max_abs(&(mixed.matrix() - DensityMatrix::maximally_mixed(&[2, 2]).matrix())) < 1e-15);

        let s = states::singlet().density();
        let ss = tensor(&s, &s);
        assert_eq!(ss.dims(), &[2, 2, 2, 2]);
        assert!(close(ss.purity(), 1.0, 1e-12));
        let ev = ss.eigenvalues().unwrap();
        assert!(close(ev[0], 1.0, 1e-12) && ev[1].abs() < 1e-12);
    }

    #[test]
    fn partial_trace_examples() {
        let s = states::singlet().density();
        let b = partial_trace(&s, &[1]).unwrap();
        assert!(linalg::max_abs(&(b.matrix() - DensityMatrix::maximally_mixed(&[2]).matrix())) < 1e-15);

        let zz = DensityMatrix::basis(&[2, 2], 0).unwrap();
        let a = partial_trace(&zz, &[0]).unwrap();
        assert!(linalg::max_abs(&(a.matrix() - DensityMatrix::basis(&[2], 0).unwrap().matrix())) < 1e-15);

        assert!(matches!(partial_trace(&zz, &[2]), Err(Error::FactorOutOfRange { .. })));
        assert!(partial_trace(&zz, &[]).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert!(close(von_neumann_entropy(&DensityMatrix::maximally_mixed(&[2])).unwrap(), 1.0, 1e-12));
        assert!(von_neumann_entropy(&states::singlet().density()).unwrap().abs() < 1e-12);
        let d = DensityMatrix::diagonal(&[2], &[0.9, 0.1]).unwrap();
        let oracle = -0.9f64 * 0.9f64.log2() - 0.1f64 * 0.1f64.log2();
        assert!(close(von_neumann_entropy(&d).unwrap(), oracle, 1e-12));
        assert!(close(oracle, 0.4690, 1e-4));
    }

    #[test]
    fn relative_entropy_examples() {
        let s = states::singlet().density();
        assert!(relative_entropy(&s, &s).unwrap().abs() < 1e-10);
        let mm = DensityMatrix::maximally_mixed(&[2, 2]);
        assert!(close(relative_entropy(&s, &mm).unwrap(), 2.0, 1e-12));
        let z0 = DensityMatrix::basis(&[2], 0).unwrap();
        let z1 = DensityMatrix::basis(&[2], 1).unwrap();
        assert!(relative_entropy(&z0, &z1).unwrap().is_infinite());
        assert!(relative_entropy(&z0, &s).is_err());
    }

    #[test]
    fn trace_distance_examples() {
        let z0 = DensityMatrix::basis(&[2], 0).unwrap();
        let z1 = DensityMatrix::basis(&[2], 1).unwrap();
        assert!(trace_distance(&z0, &z0).unwrap().abs() < 1e-15);
        assert!(close(trace_distance(&z0, &z1).unwrap(), 2.0, 1e-12));
        assert!(close(trace_distance(&DensityMatrix::maximally_mixed(&[2]), &z0).unwrap(), 1.0, 1e-12));
    }

    #[test]
    fn ppt_examples() {
        let r = is_ppt(&states::singlet().density(), &[0]).unwrap();
        assert!(close(r.min_eigenvalue, -0.5, 1e-12) && !r.is_ppt);
        let r = is_ppt(&DensityMatrix::maximally_mixed(&[2, 2]), &[0]).unwrap();
        assert!(close(r.min_eigenvalue, 0.25, 1e-12) && r.is_ppt);
        assert!(is_ppt(&DensityMatrix::basis(&[2, 2], 0).unwrap(), &[0]).unwrap().is_ppt);
        assert!(is_ppt(&DensityMatrix::basis(&[2, 2], 0).unwrap(), &[3]).is_err());
    }

    #[test]
    fn schmidt_examples() {
        let s = schmidt(&states::singlet(), &[0]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(s.coefficients[0], h, 1e-12) && close(s.coefficients[1], h, 1e-12));
        assert!((s.reconstruct() - states::singlet().amplitudes()).norm() < 1e-12);

        let p = schmidt(&PureState::basis(&[2, 2], 0).unwrap(), &[0]).unwrap();
        assert!(close(p.coefficients[0], 1.0, 1e-12) && p.coefficients[1].abs() < 1e-12);

        let th = std::f64::consts::PI / 6.0;
        let psi = states::schmidt_pair(th);
        let s = schmidt(&psi, &[0]).unwrap();
        assert!(close(s.coefficients[0], th.cos(), 1e-12) && close(s.coefficients[1], th.sin(), 1e-12));
        assert!((s.reconstruct() - psi.amplitudes()).norm() < 1e-12);
    }

    #[test]
    fn rejects_invalid_density_matrices() {
        let bad_trace = CMat::identity(2, 2);
        assert!(matches!(DensityMatrix::new(vec![2], bad_trace), Err(Error::Invariant(_))));
        let neg = CMat::from_row_slice(2, 2, &[c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]);
        assert!(matches!(DensityMatrix::new(vec![2], neg), Err(Error::Invariant(_))));
        let nonherm = CMat::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        assert!(matches!(DensityMatrix::new(vec![2], nonherm), Err(Error::Invariant(_))));
        assert!(matches!(DensityMatrix::new(vec![3], CMat::identity(2, 2)), Err(Error::DimensionMismatch(_))));
    }
}
