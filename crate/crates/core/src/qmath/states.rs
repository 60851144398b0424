//! Named states used throughout the library and its fixtures.

use std::f64::consts::FRAC_1_SQRT_2;

use super::linalg::{c, identity, CMat, CVec};
use super::{DensityMatrix, PureState};
use crate::error::{Error, Result};

/// `(|01> - |10>) / sqrt 2`.
pub fn singlet() -> PureState {
    let h = FRAC_1_SQRT_2;
    let v = CVec::from_vec(vec![c(0.0, 0.0), c(h, 0.0), c(-h, 0.0), c(0.0, 0.0)]);
    PureState::new(vec![2, 2], v).expect("singlet is normalized")
}

/// `sum_j |jj> / sqrt d`.
pub fn maximally_entangled(d: usize) -> Result<PureState> {
    if d == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let mut v = CVec::zeros(d * d);
    let a = 1.0 / (d as f64).sqrt();
    for j in 0..d {
        v[j * d + j] = c(a, 0.0);
    }
    PureState::new(vec![d, d], v)
}

/// `cos t |00> + sin t |11>`.
pub fn schmidt_pair(theta: f64) -> PureState {
    let mut v = CVec::zeros(4);
    v[0] = c(theta.cos(), 0.0);
    v[3] = c(theta.sin(), 0.0);
    PureState::normalized(vec![2, 2], v).expect("nonzero vector")
}

/// `p |Psi-><Psi-| + (1 - p) (I - |Psi-><Psi-|) / 3`. PPT exactly when `p <= 1/2`.
pub fn werner(p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("Werner weight {p} outside [0, 1]")));
    }
    let s = singlet().density().into_matrix();
    let rest = identity(4) - &s;
    DensityMatrix::new(vec![2, 2], s.scale(p) + rest.scale((1.0 - p) / 3.0))
}

/// Single-qubit computational and Hadamard basis states.
pub fn qubit(label: char) -> Result<PureState> {
    let h = FRAC_1_SQRT_2;
    let amps = match label {
        '0' => [c(1.0, 0.0), c(0.0, 0.0)],
        '1' => [c(0.0, 0.0), c(1.0, 0.0)],
        '+' => [c(h, 0.0), c(h, 0.0)],
        '-' => [c(h, 0.0), c(-h, 0.0)],
        other => return Err(Error::InvalidArgument(format!("unknown qubit label {other:?}"))),
    };
    PureState::new(vec![2], CVec::from_row_slice(&amps))
}

/// Pauli matrices `I, X, Y, Z`.
pub fn pauli(k: usize) -> CMat {
    let o = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    match k {
        0 => CMat::from_row_slice(2, 2, &[one, o, o, one]),
        1 => CMat::from_row_slice(2, 2, &[o, one, one, o]),
        2 => CMat::from_row_slice(2, 2, &[o, -i, i, o]),
        3 => CMat::from_row_slice(2, 2, &[one, o, o, -one]),
        _ => panic!("Pauli index {k} out of range"),
    }
}

/// CNOT with the first qubit as control.
pub fn cnot() -> CMat {
    let mut m = CMat::zeros(4, 4);
    m[(0, 0)] = c(1.0, 0.0);
    m[(1, 1)] = c(1.0, 0.0);
    m[(2, 3)] = c(1.0, 0.0);
    m[(3, 2)] = c(1.0, 0.0);
    m
}
