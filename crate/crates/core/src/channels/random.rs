//! Seeded sampling of unitaries, states and channels.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{undilate, QuantumChannel, StinespringIsometry};
use crate::error::{Error, Result};
use crate::qmath::linalg::{c, product, qr_positive, CMat, CVec};
use crate::qmath::{DensityMatrix, PureState};
use crate::rng::stream;

/// Complex Ginibre matrix with standard normal real and imaginary parts.
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    qr_positive(&gaussian_matrix(d, d, rng))
}

/// Haar-distributed isometry (first `cols` columns of a Haar unitary).
pub fn haar_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    assert!(cols <= rows, "isometry needs cols <= rows");
    qr_positive(&gaussian_matrix(rows, cols, rng))
}

/// Uniformly distributed unit vector.
pub fn haar_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CVec {
    let g = CVec::from_fn(n, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let norm = g.norm();
    g.unscale(norm)
}

pub fn random_unitary(d: usize, seed: u64) -> CMat {
    haar_unitary(d, &mut stream(seed, 0))
}

pub fn random_pure<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> PureState {
    PureState::new(dims.to_vec(), haar_vector(product(dims), rng)).expect("Haar vector is normalized")
}

/// Normalized Wishart state `G G^dag / Tr` with `G` of shape `side x rank`.
pub fn random_state(dims: &[usize], rank: usize, seed: u64) -> Result<DensityMatrix> {
    let n = product(dims);
    if dims.is_empty() || n == 0 || rank == 0 {
        return Err(Error::InvalidArgument("random state needs positive dimensions and rank".into()));
    }
    let mut rng = stream(seed, 0);
    let g = gaussian_matrix(n, rank, &mut rng);
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    DensityMatrix::new(dims.to_vec(), w.unscale(tr))
}

/// Channel obtained from a Haar isometry into `C^d_out (x) C^d_env`.
pub fn random_channel(d_in: usize, d_out: usize, d_env: usize, seed: u64) -> Result<QuantumChannel> {
    if d_in == 0 || d_out == 0 || d_env == 0 {
        return Err(Error::InvalidArgument("random channel needs positive dimensions".into()));
    }
    if d_out * d_env < d_in {
        return Err(Error::dims(format!("no isometry from {d_in} into {d_out}x{d_env}")));
    }
    let mut rng = stream(seed, 0);
    let v = haar_isometry(d_out * d_env, d_in, &mut rng);
    Ok(undilate(&StinespringIsometry::new(d_in, d_out, d_env, v)?))
}

/// Mixture of `terms` random product pure states with random weights.
/// Separable by construction.
pub fn random_separable(dims: &[usize], terms: usize, seed: u64) -> Result<DensityMatrix> {
    if dims.len() < 2 || terms == 0 {
        return Err(Error::InvalidArgument("separable sampler needs >= 2 factors and >= 1 term".into()));
    }
    let mut rng = stream(seed, 0);
    let n = product(dims);
    let weights: Vec<f64> = (0..terms).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let mut m = CMat::zeros(n, n);
    for w in weights {
        let mut v = CVec::from_element(1, c(1.0, 0.0));
        for &d in dims {
            v = crate::qmath::linalg::kron_vec(&v, &haar_vector(d, &mut rng));
        }
        m += (&v * v.adjoint()).scale(w / total);
    }
    DensityMatrix::new(dims.to_vec(), m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::linalg::{identity, isometry_residual, kron, max_abs};
    use crate::qmath::{partial_trace, tensor, trace_distance};

    #[test]
    fn unitary_is_unitary_and_deterministic() {
        let u = random_unitary(2, 7);
        assert!(isometry_residual(&u) < 1e-12);
        assert_eq!(u, random_unitary(2, 7));
        assert_ne!(u, random_unitary(2, 8));
    }

    #[test]
    fn rank_one_state_is_pure() {
        let rho = random_state(&[2, 2], 1, 5).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn haar_twirl_monte_carlo() {
        let d = 2;
        let rho = random_state(&[d, 2], 4, 1).unwrap();
        let mut rng = stream(99, 0);
        let samples = 10_000;
        let mut avg = CMat::zeros(4, 4);
        for _ in 0..samples {
            let u = kron(&haar_unitary(d, &mut rng), &identity(2));
            avg += &u * rho.matrix() * u.adjoint();
        }
        avg.unscale_mut(samples as f64);
        let avg = DensityMatrix::new(vec![2, 2], avg).unwrap();
        let twirled = tensor(&DensityMatrix::maximally_mixed(&[d]), &partial_trace(&rho, &[1]).unwrap());
        assert!(trace_distance(&avg, &twirled).unwrap() < 0.02);
    }

    #[test]
    fn random_channel_is_complete() {
        let t = random_channel(3, 2, 3, 2).unwrap();
        let mut s = CMat::zeros(3, 3);
        for k in t.kraus() {
            s += k.adjoint() * k;
        }
        assert!(max_abs(&(s - identity(3))) < 1e-12);
        assert!(random_channel(4, 1, 2, 0).is_err());
    }
}
