//! Quantum channels in Kraus, Choi and Stinespring form.

pub mod random;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::io::{read_json, MatrixJson};
use crate::qmath::linalg::{self, c, identity, kron, max_abs, CMat, Eigh, C64, ZERO};
use crate::qmath::{DensityMatrix, PureState};
use crate::tol;

pub use random::{haar_isometry, haar_unitary, random_channel, random_pure, random_separable, random_state, random_unitary};

/// Completely positive trace-preserving map `B(C^d_in) -> B(C^d_out)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel {
    d_in: usize,
    d_out: usize,
    kraus: Vec<CMat>,
    in_dims: Vec<usize>,
    out_dims: Vec<usize>,
}

impl QuantumChannel {
    /// Validates shapes and the completeness relation `sum K^dag K = I`.
    pub fn new(d_in: usize, d_out: usize, kraus: Vec<CMat>) -> Result<Self> {
        if d_in == 0 || d_out == 0 {
            return Err(Error::dims("channel dimensions must be positive"));
        }
        if kraus.is_empty() {
            return Err(Error::Invariant("channel needs at least one Kraus operator".into()));
        }
        if let Some(k) = kraus.iter().find(|k| k.nrows() != d_out || k.ncols() != d_in) {
            return Err(Error::dims(format!(
                "Kraus operator is {}x{}, expected {d_out}x{d_in}",
                k.nrows(),
                k.ncols()
            )));
        }
        let residual = completeness_residual(d_in, &kraus);
        if residual > tol::KRAUS {
            return Err(Error::Invariant(format!("Kraus completeness violated by {residual:.3e}")));
        }
        let ch = QuantumChannel::raw(d_in, d_out, kraus);
        if ch.kraus.len() > d_in * d_out {
            return ch.canonical();
        }
        Ok(ch)
    }

    pub(crate) fn from_trusted(d_in: usize, d_out: usize, kraus: Vec<CMat>) -> Self {
        QuantumChannel::raw(d_in, d_out, kraus)
    }

    fn raw(d_in: usize, d_out: usize, kraus: Vec<CMat>) -> Self {
        QuantumChannel { d_in, d_out, kraus, in_dims: vec![d_in], out_dims: vec![d_out] }
    }

    /// Declares a tensor factorization of the input and output spaces.
    pub fn with_factor_dims(mut self, in_dims: Vec<usize>, out_dims: Vec<usize>) -> Result<Self> {
        if in_dims.iter().product::<usize>() != self.d_in || out_dims.iter().product::<usize>() != self.d_out || in_dims.contains(&0) || out_dims.contains(&0) {
            return Err(Error::dims(format!("factor dims {in_dims:?} -> {out_dims:?} do not match {} -> {}", self.d_in, self.d_out)));
        }
        self.in_dims = in_dims;
        self.out_dims = out_dims;
        Ok(self)
    }

    pub fn in_dims(&self) -> &[usize] {
        &self.in_dims
    }

    pub fn out_dims(&self) -> &[usize] {
        &self.out_dims
    }

    pub fn identity(d: usize) -> Self {
        QuantumChannel::raw(d, d, vec![identity(d)])
    }

    /// `rho -> U rho U^dag`.
    pub fn unitary(u: &CMat) -> Result<Self> {
        if !linalg::is_unitary(u, tol::UNITARY) {
            return Err(Error::Invariant("matrix is not unitary".into()));
        }
        Ok(QuantumChannel::raw(u.ncols(), u.nrows(), vec![u.clone()]))
    }

    /// `rho -> Tr(rho) sigma`.
    pub fn constant(d_in: usize, sigma: &DensityMatrix) -> Result<Self> {
        let d_out = sigma.side();
        let e = Eigh::new(sigma.matrix())?;
        let mut kraus = Vec::new();
        for (k, &lam) in e.values.iter().enumerate() {
            if lam <= tol::EIG_CUTOFF {
                continue;
            }
            let v = e.vectors.column(k) * c(lam.sqrt(), 0.0);
            for i in 0..d_in {
                let mut m = CMat::zeros(d_out, d_in);
                m.set_column(i, &v);
                kraus.push(m);
            }
        }
        QuantumChannel::new(d_in, d_out, kraus)
    }

    /// Replacement by a fixed pure state, `rho -> Tr(rho) |phi><phi|`.
    pub fn replace_with_pure(d_in: usize, phi: &PureState) -> Self {
        let kraus = (0..d_in)
            .map(|i| {
                let mut m = CMat::zeros(phi.side(), d_in);
                m.set_column(i, phi.amplitudes());
                m
            })
            .collect();
        QuantumChannel::raw(d_in, phi.side(), kraus)
    }

    /// Fully depolarizing map to `I/d`.
    pub fn fully_depolarizing(d: usize) -> Self {
        let kraus = weyl_basis(d).into_iter().map(|w| w.unscale(d as f64)).collect();
        QuantumChannel::raw(d, d, kraus)
    }

    /// `rho -> (1 - p) rho + p I/d`, realized with Weyl Kraus operators.
    pub fn depolarizing(d: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("depolarizing weight {p} outside [0, 1]")));
        }
        let n = (d * d) as f64;
        let kraus = weyl_basis(d)
            .into_iter()
            .enumerate()
            .map(|(k, w)| {
                let weight = if k == 0 { 1.0 - p + p / n } else { p / n };
                w.scale(weight.sqrt())
            })
            .filter(|w| max_abs(w) > 0.0)
            .collect();
        QuantumChannel::new(d, d, kraus)
    }

    /// Mixture of Weyl conjugations with probabilities indexed `a*d + b`.
    pub fn weyl_mixture(d: usize, probs: &[f64]) -> Result<Self> {
        if probs.len() != d * d {
            return Err(Error::dims(format!("{} weights for {} Weyl operators", probs.len(), d * d)));
        }
        if probs.iter().any(|&p| p < -tol::PROBABILITY) {
            return Err(Error::InvalidArgument("negative channel weight".into()));
        }
        let kraus = weyl_basis(d)
            .into_iter()
            .zip(probs)
            .filter(|(_, &p)| p > 0.0)
            .map(|(w, &p)| w.scale(p.sqrt()))
            .collect();
        QuantumChannel::new(d, d, kraus)
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    /// `sum K rho K^dag` on a bare matrix.
    pub fn apply_matrix(&self, rho: &CMat) -> CMat {
        let mut out = CMat::zeros(self.d_out, self.d_out);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        out
    }

    /// Heisenberg picture `sum K^dag X K`.
    pub fn apply_adjoint(&self, x: &CMat) -> CMat {
        let mut out = CMat::zeros(self.d_in, self.d_in);
        for k in &self.kraus {
            out += k.adjoint() * x * k;
        }
        out
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &QuantumChannel) -> Result<QuantumChannel> {
        if first.d_out != self.d_in {
            return Err(Error::dims(format!("cannot compose {}->{} after {}->{}", self.d_in, self.d_out, first.d_in, first.d_out)));
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * first.kraus.len());
        for a in &self.kraus {
            for b in &first.kraus {
                kraus.push(a * b);
            }
        }
        let mut ch = QuantumChannel::raw(first.d_in, self.d_out, kraus);
        ch.in_dims = first.in_dims.clone();
        ch.out_dims = self.out_dims.clone();
        if ch.kraus.len() > ch.d_in * ch.d_out {
            ch.canonical()
        } else {
            Ok(ch)
        }
    }

    /// `self (x) other` on the tensor product of the inputs.
    pub fn tensor(&self, other: &QuantumChannel) -> QuantumChannel {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(kron(a, b));
            }
        }
        let mut ch = QuantumChannel::raw(self.d_in * other.d_in, self.d_out * other.d_out, kraus);
        ch.in_dims = [self.in_dims.as_slice(), other.in_dims.as_slice()].concat();
        ch.out_dims = [self.out_dims.as_slice(), other.out_dims.as_slice()].concat();
        ch
    }

    /// Minimal Kraus family from the Choi spectrum.
    pub fn canonical(&self) -> Result<QuantumChannel> {
        let j = self.choi();
        let e = Eigh::new(&j.matrix)?;
        let mut kraus = Vec::new();
        for (k, &lam) in e.values.iter().enumerate() {
            if lam <= tol::EIG_CUTOFF {
                continue;
            }
            let s = lam.sqrt();
            kraus.push(CMat::from_fn(self.d_out, self.d_in, |o, i| e.vectors[(o * self.d_in + i, k)] * s));
        }
        if kraus.is_empty() {
            return Err(Error::Numerical("Choi matrix has no positive eigenvalue".into()));
        }
        Ok(QuantumChannel { kraus, ..self.clone() })
    }

    /// Unnormalized Choi operator `sum_ij T(|i><j|) (x) |i><j|`.
    pub fn choi(&self) -> ChoiMatrix {
        let n = self.d_out * self.d_in;
        let mut m = CMat::zeros(n, n);
        for k in &self.kraus {
            let v = flatten(k);
            m += &v * v.adjoint();
        }
        ChoiMatrix { d_in: self.d_in, d_out: self.d_out, matrix: m }
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.side() != self.d_in {
            return Err(Error::dims(format!("state side {} but channel input {}", rho.side(), self.d_in)));
        }
        let dims = if self.d_in == self.d_out { rho.dims().to_vec() } else { vec![self.d_out] };
        Ok(DensityMatrix::from_trusted(dims, self.apply_matrix(rho.matrix())))
    }

    /// `(T (x) id) rho` with `T` acting on one factor. The acted factor keeps
    /// its position and takes dimension `d_out`.
    pub fn apply_local(&self, rho: &DensityMatrix, factor: usize) -> Result<DensityMatrix> {
        let dims = rho.dims();
        if factor >= dims.len() {
            return Err(Error::FactorOutOfRange { index: factor, count: dims.len() });
        }
        if dims[factor] != self.d_in {
            return Err(Error::dims(format!("factor {factor} has dimension {} but channel input {}", dims[factor], self.d_in)));
        }
        let left: usize = dims[..factor].iter().product();
        let right: usize = dims[factor + 1..].iter().product();
        let out = apply_on_middle(&self.kraus, rho.matrix(), left, self.d_in, self.d_out, right);
        let mut new_dims = dims.to_vec();
        new_dims[factor] = self.d_out;
        Ok(DensityMatrix::from_trusted(new_dims, out))
    }
}

/// Row-major flattening `vec(K)[o*d_in + i] = K[o, i]`.
fn flatten(k: &CMat) -> linalg::CVec {
    let (r, cols) = k.shape();
    linalg::CVec::from_fn(r * cols, |idx, _| k[(idx / cols, idx % cols)])
}

fn completeness_residual(d_in: usize, kraus: &[CMat]) -> f64 {
    let mut s = CMat::zeros(d_in, d_in);
    for k in kraus {
        s += k.adjoint() * k;
    }
    max_abs(&(s - identity(d_in)))
}

/// `sum_k (I_l (x) K_k (x) I_r) X (I_l (x) K_k (x) I_r)^dag` without forming
/// the Kronecker products.
pub(crate) fn apply_on_middle(kraus: &[CMat], x: &CMat, l: usize, d_in: usize, d_out: usize, r: usize) -> CMat {
    let n_out = l * d_out * r;
    let mut out = CMat::zeros(n_out, n_out);
    // Y = (I (x) K (x) I) X, then Y (I (x) K (x) I)^dag
    for k in kraus {
        let mut y = CMat::from_element(n_out, l * d_in * r, ZERO);
        for a in 0..l {
            for o in 0..d_out {
                for i in 0..d_in {
                    let kv = k[(o, i)];
                    if kv == ZERO {
                        continue;
                    }
                    for b in 0..r {
                        let row_out = (a * d_out + o) * r + b;
                        let row_in = (a * d_in + i) * r + b;
                        for col in 0..l * d_in * r {
                            y[(row_out, col)] += kv * x[(row_in, col)];
                        }
                    }
                }
            }
        }
        for a in 0..l {
            for o in 0..d_out {
                for i in 0..d_in {
                    let kv: C64 = k[(o, i)].conj();
                    if kv == ZERO {
                        continue;
                    }
                    for b in 0..r {
                        let col_out = (a * d_out + o) * r + b;
                        let col_in = (a * d_in + i) * r + b;
                        for row in 0..n_out {
                            out[(row, col_out)] += y[(row, col_in)] * kv;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Unnormalized Choi operator on `C^d_out (x) C^d_in`; its partial trace
/// over the output factor is the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    pub d_in: usize,
    pub d_out: usize,
    pub matrix: CMat,
}

impl ChoiMatrix {
    /// Rank after the eigenvalue cutoff.
    pub fn rank(&self) -> Result<usize> {
        Ok(Eigh::new(&self.matrix)?.values.iter().filter(|&&v| v > tol::EIG_CUTOFF).count())
    }

    /// Normalized to a density matrix (divide by `d_in`).
    pub fn to_state(&self) -> DensityMatrix {
        DensityMatrix::from_trusted(vec![self.d_out, self.d_in], self.matrix.unscale(self.d_in as f64))
    }
}

/// Maximum entrywise Choi difference.
pub fn choi_distance(a: &QuantumChannel, b: &QuantumChannel) -> Result<f64> {
    if a.d_in != b.d_in || a.d_out != b.d_out {
        return Err(Error::dims(format!(
            "channels {}->{} and {}->{} are not comparable",
            a.d_in, a.d_out, b.d_in, b.d_out
        )));
    }
    Ok(max_abs(&(a.choi().matrix - b.choi().matrix)))
}

pub fn channels_equal(a: &QuantumChannel, b: &QuantumChannel) -> Result<bool> {
    Ok(choi_distance(a, b)? <= tol::CHOI_EQUAL)
}

/// Isometry `V: C^d_in -> C^d_out (x) C^d_env`, rows indexed `o*d_env + e`.
#[derive(Debug, Clone, PartialEq)]
pub struct StinespringIsometry {
    d_in: usize,
    d_out: usize,
    d_env: usize,
    v: CMat,
}

impl StinespringIsometry {
    pub fn new(d_in: usize, d_out: usize, d_env: usize, v: CMat) -> Result<Self> {
        Self::with_tolerance(d_in, d_out, d_env, v, tol::ISOMETRY)
    }

    pub(crate) fn with_tolerance(d_in: usize, d_out: usize, d_env: usize, v: CMat, tolerance: f64) -> Result<Self> {
        if d_in == 0 || d_out == 0 || d_env == 0 {
            return Err(Error::dims("isometry dimensions must be positive"));
        }
        if v.nrows() != d_out * d_env || v.ncols() != d_in {
            return Err(Error::dims(format!(
                "isometry is {}x{}, expected {}x{d_in}",
                v.nrows(),
                v.ncols(),
                d_out * d_env
            )));
        }
        let residual = linalg::isometry_residual(&v);
        if residual > tolerance {
            return Err(Error::Invariant(format!("V^dag V differs from identity by {residual:.3e}")));
        }
        Ok(StinespringIsometry { d_in, d_out, d_env, v })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn d_env(&self) -> usize {
        self.d_env
    }

    pub fn matrix(&self) -> &CMat {
        &self.v
    }

    /// Kraus operator `K_e[o, a] = V[o*d_env + e, a]`.
    pub fn kraus_op(&self, e: usize) -> CMat {
        CMat::from_fn(self.d_out, self.d_in, |o, a| self.v[(o * self.d_env + e, a)])
    }

    /// `V1 (x) V2` with rows reordered to `(out1, out2) (x) (env1, env2)`.
    pub fn tensor(&self, other: &StinespringIsometry) -> StinespringIsometry {
        let (d_out, d_env) = (self.d_out * other.d_out, self.d_env * other.d_env);
        let mut v = CMat::zeros(d_out * d_env, self.d_in * other.d_in);
        for o1 in 0..self.d_out {
            for e1 in 0..self.d_env {
                for a1 in 0..self.d_in {
                    let x = self.v[(o1 * self.d_env + e1, a1)];
                    if x == ZERO {
                        continue;
                    }
                    for o2 in 0..other.d_out {
                        for e2 in 0..other.d_env {
                            for a2 in 0..other.d_in {
                                let row = (o1 * other.d_out + o2) * d_env + e1 * other.d_env + e2;
                                v[(row, a1 * other.d_in + a2)] = x * other.v[(o2 * other.d_env + e2, a2)];
                            }
                        }
                    }
                }
            }
        }
        StinespringIsometry { d_in: self.d_in * other.d_in, d_out, d_env, v }
    }

    /// Enlarges the environment with zero rows.
    pub fn padded(&self, d_env: usize) -> Result<StinespringIsometry> {
        if d_env < self.d_env {
            return Err(Error::InvalidArgument(format!("cannot shrink environment {} to {d_env}", self.d_env)));
        }
        let v = CMat::from_fn(self.d_out * d_env, self.d_in, |row, a| {
            let (o, e) = (row / d_env, row % d_env);
            if e < self.d_env {
                self.v[(o * self.d_env + e, a)]
            } else {
                ZERO
            }
        });
        Ok(StinespringIsometry { d_in: self.d_in, d_out: self.d_out, d_env, v })
    }
}

/// Stacks the canonical Kraus operators into an isometry.
pub fn dilate(t: &QuantumChannel) -> Result<StinespringIsometry> {
    let can = t.canonical()?;
    let d_env = can.kraus.len();
    let v = CMat::from_fn(can.d_out * d_env, can.d_in, |row, a| can.kraus[row % d_env][(row / d_env, a)]);
    StinespringIsometry::with_tolerance(can.d_in, can.d_out, d_env, v, tol::OPT_ISOMETRY)
}

/// Channel `rho -> Tr_env V rho V^dag`.
pub fn undilate(v: &StinespringIsometry) -> QuantumChannel {
    let kraus = (0..v.d_env).map(|e| v.kraus_op(e)).collect();
    QuantumChannel::from_trusted(v.d_in, v.d_out, kraus)
}

/// Shift-and-clock unitary `X^a Z^b`.
pub fn weyl(d: usize, a: usize, b: usize) -> CMat {
    let omega = 2.0 * std::f64::consts::PI / d as f64;
    // (X^a Z^b)|j> = w^{b j} |j + a>
    let mut m = CMat::zeros(d, d);
    for j in 0..d {
        m[((j + a) % d, j)] = C64::from_polar(1.0, omega * ((b * j) % d) as f64);
    }
    m
}

/// All `d^2` Weyl unitaries, index `a*d + b`.
pub fn weyl_basis(d: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            out.push(weyl(d, a, b));
        }
    }
    out
}

/// Serialized channel: `{"d_in", "d_out", "kraus": [matrix, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFile {
    pub d_in: usize,
    pub d_out: usize,
    pub kraus: Vec<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_dims: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dims: Option<Vec<usize>>,
}

impl ChannelFile {
    pub fn from_channel(t: &QuantumChannel) -> Self {
        let factored = |dims: &[usize]| if dims.len() > 1 { Some(dims.to_vec()) } else { None };
        ChannelFile {
            d_in: t.d_in,
            d_out: t.d_out,
            kraus: t.kraus.iter().map(MatrixJson::from_matrix).collect(),
            in_dims: factored(&t.in_dims),
            out_dims: factored(&t.out_dims),
        }
    }

    pub fn to_channel(&self) -> Result<QuantumChannel> {
        let mut kraus = Vec::with_capacity(self.kraus.len());
        for m in &self.kraus {
            let k = m.to_matrix()?;
            if k.nrows() != self.d_out || k.ncols() != self.d_in {
                return Err(Error::Parse(format!(
                    "Kraus operator is {}x{}, file declares {}x{}",
                    k.nrows(),
                    k.ncols(),
                    self.d_out,
                    self.d_in
                )));
            }
            kraus.push(k);
        }
        if kraus.is_empty() {
            return Err(Error::Parse("channel file lists no Kraus operators".into()));
        }
        let ch = QuantumChannel::new(self.d_in, self.d_out, kraus)?;
        let in_dims = self.in_dims.clone().unwrap_or_else(|| vec![self.d_in]);
        let out_dims = self.out_dims.clone().unwrap_or_else(|| vec![self.d_out]);
        ch.with_factor_dims(in_dims, out_dims).map_err(|e| Error::Parse(e.to_string()))
    }
}

pub fn read_channel(path: &Path) -> Result<QuantumChannel> {
    read_json::<ChannelFile>(path)?.to_channel()
}
