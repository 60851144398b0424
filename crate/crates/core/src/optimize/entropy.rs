//! Output entropy of a local channel and its gradient in Stinespring form.
//!
//! Write the input as `rho = sum_k w_k w_k^dag` over the sender space `A`
//! and the untouched rest `R`, with `W_k` the `A x R` reshape of `w_k`. For an
//! isometry `V` the output is `sigma = Z Z^dag`, where
//! `Z[(o, r), (e, k)] = (V W_k)[(o, e), r]`. Then `dH = Tr[L dsigma]` with
//! `L = -(log2 sigma + log2(e) I)`, giving `dH/dZ = 2 L Z`. Components of `L`
//! on the kernel of `sigma` never contribute to first order, so small
//! eigenvalues are simply cut off.

use std::f64::consts::LOG2_E;

use super::stiefel::{stiefel_minimize, Objective};
use super::{OptConfig, OptReport};
use crate::channels::{apply_on_middle, QuantumChannel, StinespringIsometry};
use crate::error::{Error, Result};
use crate::qmath::linalg::{self, c, CMat, Eigh, ZERO};
use crate::qmath::{entropy_of_spectrum, DensityMatrix};
use crate::tol;

/// Precomputed data for `V -> H((phi o T_V (x) id) rho)`.
#[derive(Debug, Clone)]
pub struct EntropyProblem {
    pub(crate) d_in: usize,
    pub(crate) d_out: usize,
    pub(crate) d_env: usize,
    pub(crate) r: usize,
    ws: Vec<CMat>,
    post: Option<QuantumChannel>,
    post_adjoint: Vec<CMat>,
    rest_dims: Vec<usize>,
}

impl EntropyProblem {
    /// `sender` lists the factors the channel acts on (merged in ascending
    /// order). `post` is an optional fixed channel applied after the
    /// encoding.
    pub fn new(rho: &DensityMatrix, sender: &[usize], d_out: usize, d_env: usize, post: Option<&QuantumChannel>) -> Result<Self> {
        let count = rho.factor_count();
        let sender = linalg::normalize_factors(sender, count)?;
        if sender.is_empty() {
            return Err(Error::InvalidArgument("no sender factors".into()));
        }
        if d_out == 0 || d_env == 0 {
            return Err(Error::InvalidArgument("output and environment dimensions must be positive".into()));
        }
        let perm = linalg::front_permutation(&sender, count);
        let moved = rho.permute(&perm)?;
        let d_in: usize = sender.iter().map(|&k| rho.dims()[k]).product();
        if d_out * d_env < d_in {
            return Err(Error::dims(format!("no isometry from {d_in} into {d_out}x{d_env}")));
        }
        let rest_dims: Vec<usize> = perm[sender.len()..].iter().map(|&k| rho.dims()[k]).collect();
        let r: usize = rest_dims.iter().product();
        if let Some(phi) = post {
            if phi.d_in() != d_out {
                return Err(Error::dims(format!("post-channel input {} differs from encoding output {d_out}", phi.d_in())));
            }
        }
        let e = Eigh::new(moved.matrix())?;
        let ws = e
            .values
            .iter()
            .enumerate()
            .filter(|(_, &lam)| lam > tol::EIG_CUTOFF)
            .map(|(k, &lam)| {
                let s = lam.sqrt();
                CMat::from_fn(d_in, r, |a, b| e.vectors[(a * r + b, k)] * s)
            })
            .collect();
        Ok(EntropyProblem {
            d_in,
            d_out,
            d_env,
            r,
            ws,
            post: post.cloned(),
            post_adjoint: post.map(|p| p.kraus().iter().map(|k| k.adjoint()).collect()).unwrap_or_default(),
            rest_dims,
        })
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_env(&self) -> usize {
        self.d_env
    }

    /// Dimension of the final output register (after the post-channel).
    pub fn d_final(&self) -> usize {
        self.post.as_ref().map_or(self.d_out, |p| p.d_out())
    }

    pub(crate) fn z(&self, v: &CMat) -> CMat {
        let k_count = self.ws.len();
        let mut z = CMat::zeros(self.d_out * self.r, self.d_env * k_count);
        for (k, w) in self.ws.iter().enumerate() {
            let y = v * w;
            for o in 0..self.d_out {
                for e in 0..self.d_env {
                    for b in 0..self.r {
                        z[(o * self.r + b, e * k_count + k)] = y[(o * self.d_env + e, b)];
                    }
                }
            }
        }
        z
    }

    fn signal_from_z(&self, z: &CMat) -> CMat {
        let sigma = z * z.adjoint();
        match &self.post {
            Some(phi) => apply_on_middle(phi.kraus(), &sigma, 1, phi.d_in(), phi.d_out(), self.r),
            None => sigma,
        }
    }

    /// Output operator on `final (x) rest`.
    pub fn signal(&self, v: &CMat) -> CMat {
        self.signal_from_z(&self.z(v))
    }

    /// Output as a density matrix with dims `[d_final, rest...]`.
    pub fn signal_state(&self, v: &CMat) -> DensityMatrix {
        let mut dims = vec![self.d_final()];
        dims.extend_from_slice(&self.rest_dims);
        DensityMatrix::from_trusted(dims, self.signal(v))
    }

    fn small_side(&self) -> bool {
        self.post.is_none() && self.d_env * self.ws.len() < self.d_out * self.r
    }

    pub fn value(&self, v: &CMat) -> f64 {
        let z = self.z(v);
        let m = if self.small_side() { z.adjoint() * &z } else { self.signal_from_z(&z) };
        entropy_of_spectrum(linalg::hermitize(&m).symmetric_eigenvalues().as_slice())
    }

    pub fn value_grad(&self, v: &CMat) -> (f64, CMat) {
        let z = self.z(v);
        if self.small_side() {
            let e = eigh(&(z.adjoint() * &z));
            let lm = entropy_derivative(&e);
            (entropy_of_spectrum(&e.values), self.pullback_z(&(&z * lm).scale(2.0)))
        } else {
            let e = eigh(&self.signal_from_z(&z));
            let l = entropy_derivative(&e);
            (entropy_of_spectrum(&e.values), self.pullback(&l, &z))
        }
    }

    /// Euclidean gradient in `V` of `Re Tr[W sigma(V)]` for Hermitian `W` on
    /// the final output, with `z` the current `Z(V)`.
    pub(crate) fn pullback(&self, w: &CMat, z: &CMat) -> CMat {
        let w = match &self.post {
            Some(phi) => apply_on_middle(&self.post_adjoint, w, 1, phi.d_out(), phi.d_in(), self.r),
            None => w.clone(),
        };
        self.pullback_z(&(w * z).scale(2.0))
    }

    /// Chain rule from `dZ` to `dV`: `G_V = sum_k Q_k W_k^dag`.
    fn pullback_z(&self, gz: &CMat) -> CMat {
        let k_count = self.ws.len();
        let mut g = CMat::zeros(self.d_out * self.d_env, self.d_in);
        let mut q = CMat::zeros(self.d_out * self.d_env, self.r);
        for (k, w) in self.ws.iter().enumerate() {
            for o in 0..self.d_out {
                for e in 0..self.d_env {
                    for b in 0..self.r {
                        q[(o * self.d_env + e, b)] = gz[(o * self.r + b, e * k_count + k)];
                    }
                }
            }
            g += &q * w.adjoint();
        }
        g
    }

    /// Structured starting isometries: low-factor embedding, high-factor
    /// embedding and pure-state replacement, whenever `d_env` allows them.
    pub fn probes(&self) -> Vec<(String, CMat)> {
        let (d_in, d_out, d_env) = (self.d_in, self.d_out, self.d_env);
        let rows = d_out * d_env;
        let mut out = Vec::new();
        if d_env * d_out >= d_in && d_in.div_ceil(d_out) <= d_env {
            let mut v = CMat::zeros(rows, d_in);
            for a in 0..d_in {
                v[((a % d_out) * d_env + a / d_out, a)] = c(1.0, 0.0);
            }
            out.push(("probe:embedding".to_string(), v));
        }
        if d_out >= 2 * d_in {
            let stride = d_out / d_in;
            let mut v = CMat::zeros(rows, d_in);
            for a in 0..d_in {
                v[(a * stride * d_env, a)] = c(1.0, 0.0);
            }
            out.push(("probe:embedding-high".to_string(), v));
        }
        if d_env >= d_in {
            let mut v = CMat::zeros(rows, d_in);
            for a in 0..d_in {
                v[(a, a)] = c(1.0, 0.0);
            }
            out.push(("probe:replacement".to_string(), v));
        }
        out
    }
}

fn eigh(m: &CMat) -> Eigh {
    Eigh::new(m).expect("finite Hermitian matrix")
}

/// `-(log2 lambda + log2 e)` on the support, `-log2 e` below the cutoff.
pub(crate) fn entropy_derivative(e: &Eigh) -> CMat {
    e.map(|lam| if lam > tol::EIG_CUTOFF { -(lam.log2() + LOG2_E) } else { -LOG2_E })
}

impl Objective for EntropyProblem {
    fn value(&self, x: &[CMat]) -> f64 {
        EntropyProblem::value(self, &x[0])
    }

    fn value_grad(&self, x: &[CMat]) -> (f64, Vec<CMat>) {
        let (v, g) = EntropyProblem::value_grad(self, &x[0]);
        (v, vec![g])
    }
}

fn check_factor(rho: &DensityMatrix, v: &StinespringIsometry, factor: usize) -> Result<()> {
    if factor >= rho.factor_count() {
        return Err(Error::FactorOutOfRange { index: factor, count: rho.factor_count() });
    }
    if rho.dims()[factor] != v.d_in() {
        return Err(Error::dims(format!("factor {factor} has dimension {} but isometry input {}", rho.dims()[factor], v.d_in())));
    }
    Ok(())
}

/// `H((T_V (x) id) rho)` with `T_V` acting on one factor.
pub fn local_output_entropy(v: &StinespringIsometry, rho: &DensityMatrix, factor: usize) -> Result<f64> {
    check_factor(rho, v, factor)?;
    let p = EntropyProblem::new(rho, &[factor], v.d_out(), v.d_env(), None)?;
    Ok(p.value(v.matrix()))
}

/// Euclidean gradient of [`local_output_entropy`] in the entries of `V`.
pub fn entropy_gradient(v: &StinespringIsometry, rho: &DensityMatrix, factor: usize) -> Result<CMat> {
    check_factor(rho, v, factor)?;
    let p = EntropyProblem::new(rho, &[factor], v.d_out(), v.d_env(), None)?;
    Ok(p.value_grad(v.matrix()).1)
}

/// `min_T H((T (x) id) rho)` over channels `T` from one factor into
/// `C^d_out`, searched over isometries with environment `cfg.d_env`.
pub fn min_local_output_entropy(rho: &DensityMatrix, factor: usize, d_out: usize, cfg: &OptConfig) -> Result<OptReport> {
    if factor >= rho.factor_count() {
        return Err(Error::FactorOutOfRange { index: factor, count: rho.factor_count() });
    }
    min_output_entropy_with(rho, &[factor], d_out, None, &[], cfg)
}

/// General form: several sender factors, an optional fixed post-channel and
/// caller-supplied probe isometries (padded to the working environment).
pub fn min_output_entropy_with(
    rho: &DensityMatrix,
    sender: &[usize],
    d_out: usize,
    post: Option<&QuantumChannel>,
    probes: &[(String, StinespringIsometry)],
    cfg: &OptConfig,
) -> Result<OptReport> {
    cfg.validate()?;
    let d_in: usize = linalg::normalize_factors(sender, rho.factor_count())?.iter().map(|&k| rho.dims()[k]).product();
    let d_env = cfg.d_env.unwrap_or(d_in * d_out);
    let problem = EntropyProblem::new(rho, sender, d_out, d_env, post)?;
    let mut starts = if cfg.seed_probes { problem.probes() } else { Vec::new() };
    for (label, v) in probes {
        if v.d_in() != d_in || v.d_out() != d_out {
            return Err(Error::dims(format!("probe {label} maps {}->{}, expected {d_in}->{d_out}", v.d_in(), v.d_out())));
        }
        if v.d_env() <= d_env {
            starts.push((format!("probe:{label}"), v.padded(d_env)?.matrix().clone()));
        }
    }
    let rep = stiefel_minimize(|v: &CMat| problem.value_grad(v), d_out * d_env, d_in, cfg, &starts)?;
    let isometry = StinespringIsometry::with_tolerance(d_in, d_out, d_env, rep.point, tol::OPT_ISOMETRY)?;
    Ok(OptReport {
        value: rep.value,
        isometry,
        restarts: rep.restarts,
        best_index: rep.best_index,
        converged: rep.converged,
        iterations: rep.iterations,
        dispersion: rep.dispersion,
    })
}

/// `(W (x) I_env) V` for a unitary `W` on the output.
pub(crate) fn rotate_output(w: &CMat, v: &CMat, d_out: usize, d_env: usize) -> CMat {
    let cols = v.ncols();
    let mut out = CMat::from_element(v.nrows(), cols, ZERO);
    for o in 0..d_out {
        for p in 0..d_out {
            let wv = w[(o, p)];
            if wv == ZERO {
                continue;
            }
            for e in 0..d_env {
                for a in 0..cols {
                    out[(o * d_env + e, a)] += wv * v[(p * d_env + e, a)];
                }
            }
        }
    }
    out
}
