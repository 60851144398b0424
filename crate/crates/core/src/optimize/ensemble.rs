//! Ascent of the Holevo quantity of encoded signal states over ensembles
//! of encodings.

use serde::Serialize;

use super::entropy::{entropy_derivative, rotate_output, EntropyProblem};
use super::stiefel::{descend, Objective};
use super::{min_output_entropy_with, OptConfig, RestartRecord};
use crate::channels::{haar_isometry, weyl_basis, QuantumChannel, StinespringIsometry};
use crate::error::{Error, Result};
use crate::qmath::linalg::{self, kron, CMat, Eigh};
use crate::qmath::{entropy_of_spectrum, DensityMatrix};
use crate::rng::stream;
use crate::tol;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleReport {
    /// Holevo quantity of the best ensemble found, in bits.
    pub value: f64,
    pub probabilities: Vec<f64>,
    pub isometries: Vec<StinespringIsometry>,
    /// Value after every alternation round of the winning start.
    pub history: Vec<f64>,
    pub seeds: Vec<RestartRecord>,
    pub best_index: usize,
    pub converged: bool,
}

/// Tensor products of per-factor Weyl bases, first factor most significant.
pub fn weyl_product_basis(dims: &[usize]) -> Vec<CMat> {
    let mut out = vec![linalg::identity(1)];
    for &d in dims {
        let basis = weyl_basis(d);
        out = out.iter().flat_map(|a| basis.iter().map(move |b| kron(a, b))).collect();
    }
    out
}

struct Signals {
    sigmas: Vec<CMat>,
    eigs: Vec<Eigh>,
    avg: Eigh,
    value: f64,
}

struct HolevoObjective<'a> {
    problem: &'a EntropyProblem,
    probs: Vec<f64>,
}

impl HolevoObjective<'_> {
    fn signals(&self, x: &[CMat]) -> Signals {
        let sigmas: Vec<CMat> = x.iter().map(|v| self.problem.signal(v)).collect();
        evaluate(&sigmas, &self.probs)
    }
}

fn evaluate(sigmas: &[CMat], probs: &[f64]) -> Signals {
    let n = sigmas[0].nrows();
    let mut avg = CMat::zeros(n, n);
    for (s, &p) in sigmas.iter().zip(probs) {
        avg += s * crate::qmath::c(p, 0.0);
    }
    let avg = Eigh::new(&avg).expect("finite average state");
    let eigs: Vec<Eigh> = sigmas.iter().map(|s| Eigh::new(s).expect("finite signal state")).collect();
    let mean_entropy: f64 = eigs.iter().zip(probs).map(|(e, &p)| p * entropy_of_spectrum(&e.values)).sum();
    let value = entropy_of_spectrum(&avg.values) - mean_entropy;
    Signals { sigmas: sigmas.to_vec(), eigs, avg, value }
}

impl Objective for HolevoObjective<'_> {
    fn value(&self, x: &[CMat]) -> f64 {
        -self.signals(x).value
    }

    fn value_grad(&self, x: &[CMat]) -> (f64, Vec<CMat>) {
        let s = self.signals(x);
        let l_avg = entropy_derivative(&s.avg);
        let grads = x
            .iter()
            .zip(&s.eigs)
            .zip(&self.probs)
            .map(|((v, e), &p)| {
                if p == 0.0 {
                    return CMat::zeros(v.nrows(), v.ncols());
                }
                let w = (entropy_derivative(e) - &l_avg).scale(p);
                self.problem.pullback(&w, &self.problem.z(v))
            })
            .collect();
        (-s.value, grads)
    }
}

/// Blahut-style reweighting `p_i <- p_i 2^{D(sigma_i || avg)}`, kept only
/// while the Holevo quantity does not decrease.
fn reweight(sigmas: &[CMat], probs: &mut Vec<f64>, mut current: f64) -> f64 {
    for _ in 0..50 {
        let s = evaluate(sigmas, probs);
        let log_avg = s.avg.map(|lam| if lam > tol::EIG_CUTOFF { lam.log2() } else { 0.0 });
        let mut next: Vec<f64> = s
            .sigmas
            .iter()
            .zip(&s.eigs)
            .zip(probs.iter())
            .map(|((sig, e), &p)| {
                if p == 0.0 {
                    return 0.0;
                }
                let cross = linalg::hs_inner(sig, &log_avg).re;
                let d = (-entropy_of_spectrum(&e.values) - cross).max(0.0);
                p * d.exp2()
            })
            .collect();
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|p| *p /= total);
        let value = evaluate(sigmas, &next).value;
        if value.is_nan() || value <= current {
            break;
        }
        let gain = value - current;
        *probs = next;
        current = value;
        if gain < 1e-13 {
            break;
        }
    }
    current
}

const MAX_ROUNDS: usize = 40;
const ROUND_ITERS: usize = 60;

struct Run {
    value: f64,
    initial: f64,
    probs: Vec<f64>,
    point: Vec<CMat>,
    history: Vec<f64>,
    iterations: usize,
    converged: bool,
    underflow: bool,
}

fn alternate(problem: &EntropyProblem, mut probs: Vec<f64>, mut point: Vec<CMat>, cfg: &OptConfig) -> Run {
    let round_cfg = OptConfig { max_iters: cfg.max_iters.min(ROUND_ITERS), ..cfg.clone() };
    let initial = HolevoObjective { problem, probs: probs.clone() }.signals(&point).value;
    let mut value = initial;
    let mut history = vec![initial];
    let mut iterations = 0;
    let mut converged = false;
    let mut underflow = false;
    let mut budget = cfg.max_iters.max(ROUND_ITERS) * 4;
    for _ in 0..MAX_ROUNDS {
        let obj = HolevoObjective { problem, probs: probs.clone() };
        let d = descend(&obj, point, &round_cfg);
        iterations += d.iterations;
        underflow |= d.underflow;
        point = d.point;
        let sigmas: Vec<CMat> = point.iter().map(|v| problem.signal(v)).collect();
        let after = reweight(&sigmas, &mut probs, -d.value);
        let gain = after - value;
        value = after;
        history.push(value);
        if d.converged && gain <= 1e-10 {
            converged = true;
            break;
        }
        budget = budget.saturating_sub(d.iterations.max(1));
        if budget == 0 {
            break;
        }
    }
    Run { value, initial, probs, point, history, iterations, converged, underflow }
}

/// Lower bound on `sup_mu I(mu; phi o rho)` over ensembles of `m`
/// encodings acting on the `sender` factors of `rho`.
pub fn optimize_ensemble(phi: &QuantumChannel, rho: &DensityMatrix, sender: &[usize], m: usize, cfg: &OptConfig) -> Result<EnsembleReport> {
    optimize_ensemble_seeded(phi, rho, sender, m, cfg, &[])
}

/// [`optimize_ensemble`] with extra caller-supplied starting ensembles.
pub fn optimize_ensemble_seeded(
    phi: &QuantumChannel,
    rho: &DensityMatrix,
    sender: &[usize],
    m: usize,
    cfg: &OptConfig,
    seeds: &[(String, Vec<(f64, StinespringIsometry)>)],
) -> Result<EnsembleReport> {
    cfg.validate()?;
    if m == 0 {
        return Err(Error::InvalidArgument("ensemble size must be at least 1".into()));
    }
    let sender = linalg::normalize_factors(sender, rho.factor_count())?;
    let d_in: usize = sender.iter().map(|&k| rho.dims()[k]).product();
    let d_out = phi.d_in();
    let d_env = cfg.d_env.unwrap_or(d_in * d_out);
    let problem = EntropyProblem::new(rho, &sender, d_out, d_env, Some(phi))?;
    let rows = d_out * d_env;

    let mut starts: Vec<(String, Vec<f64>, Vec<CMat>)> = Vec::new();
    let uniform = vec![1.0 / m as f64; m];
    if cfg.seed_probes {
        let twirl = weyl_product_basis(phi.in_dims());
        let rotate = |base: &CMat| -> Vec<CMat> {
            (0..m).map(|i| rotate_output(&twirl[i % twirl.len()], base, d_out, d_env)).collect()
        };
        let inner_cfg = OptConfig { restarts: cfg.restarts.min(4), ..cfg.clone() };
        let best = min_output_entropy_with(rho, &sender, d_out, Some(phi), &[], &inner_cfg)?;
        starts.push(("twirl:min-entropy".into(), uniform.clone(), rotate(best.isometry.matrix())));
        for (label, v) in problem.probes() {
            starts.push((format!("twirl:{}", label.trim_start_matches("probe:")), uniform.clone(), rotate(&v)));
        }
    }
    for (label, items) in seeds {
        if items.len() != m {
            return Err(Error::dims(format!("seed ensemble {label} has {} items, expected {m}", items.len())));
        }
        let mut probs = Vec::with_capacity(m);
        let mut point = Vec::with_capacity(m);
        for (p, v) in items {
            if v.d_in() != d_in || v.d_out() != d_out || v.d_env() > d_env {
                return Err(Error::dims(format!("seed ensemble {label} has an incompatible isometry")));
            }
            probs.push(*p);
            point.push(v.padded(d_env)?.matrix().clone());
        }
        let total: f64 = probs.iter().sum();
        if probs.iter().any(|&p| p < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("seed ensemble {label} weights are not a distribution")));
        }
        starts.push((format!("seed:{label}"), probs, point));
    }
    for j in 0..cfg.ensemble_restarts {
        let mut rng = stream(cfg.seed, 1_000 + j as u64);
        let point = (0..m).map(|_| haar_isometry(rows, d_in, &mut rng)).collect();
        starts.push((format!("random:{j}"), uniform.clone(), point));
    }
    if starts.is_empty() {
        return Err(Error::InvalidArgument("no starting ensembles".into()));
    }

    let mut records = Vec::new();
    let mut best: Option<(usize, Run)> = None;
    for (k, (label, probs, point)) in starts.into_iter().enumerate() {
        let run = alternate(&problem, probs, point, cfg);
        records.push(RestartRecord {
            label,
            initial: run.initial,
            value: run.value,
            iterations: run.iterations,
            converged: run.converged,
            underflow: run.underflow,
        });
        if best.as_ref().is_none_or(|(_, b)| run.value > b.value) {
            best = Some((k, run));
        }
    }
    let (best_index, run) = best.expect("at least one start");
    let isometries = run
        .point
        .into_iter()
        .map(|v| StinespringIsometry::with_tolerance(d_in, d_out, d_env, v, tol::OPT_ISOMETRY))
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleReport {
        value: run.value,
        probabilities: run.probs,
        isometries,
        history: run.history,
        converged: records[best_index].converged,
        seeds: records,
        best_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::random_separable;
    use crate::qmath::states;

    #[test]
    fn weyl_product_of_single_factor_is_weyl_basis() {
        let a = weyl_product_basis(&[3]);
        let b = weyl_basis(3);
        assert_eq!(a.len(), 9);
        for (x, y) in a.iter().zip(&b) {
            assert!(linalg::max_abs(&(x - y)) < 1e-15);
        }
        assert_eq!(weyl_product_basis(&[2, 2]).len(), 16);
    }

    #[test]
    fn singlet_through_identity_reaches_two_bits() {
        let rep = optimize_ensemble(&QuantumChannel::identity(2), &states::singlet().density(), &[0], 4, &OptConfig::default()).unwrap();
        assert!(rep.value >= 2.0 - 1e-3, "value {}", rep.value);
        assert!(rep.value <= 2.0 + 1e-9);
        for w in rep.history.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
    }

    #[test]
    fn constant_channel_carries_nothing() {
        let half = DensityMatrix::maximally_mixed(&[2]);
        let phi = QuantumChannel::constant(2, &half).unwrap();
        let cfg = OptConfig { restarts: 2, ..OptConfig::default() };
        let rep = optimize_ensemble(&phi, &states::singlet().density(), &[0], 3, &cfg).unwrap();
        assert!(rep.value.abs() < 1e-9);
    }

    #[test]
    fn separable_state_through_identity_is_one_bit() {
        let rho = random_separable(&[2, 2], 5, 3).unwrap();
        let cfg = OptConfig { restarts: 4, ..OptConfig::default() };
        let rep = optimize_ensemble(&QuantumChannel::identity(2), &rho, &[0], 4, &cfg).unwrap();
        assert!((rep.value - 1.0).abs() < 1e-3, "value {}", rep.value);
    }
}
