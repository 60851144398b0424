//! Holevo information and dense-coding capacities of shared states.
//!
//! Every capacity value produced here is a lower bound: the inner channel
//! minimization is heuristic. Upper bounds come only from the analytic
//! ceiling `log2 d + H(rho_B)` and from [`ree_bound`].

pub mod scan;

use serde::{Deserialize, Serialize};

use crate::channels::{dilate, undilate, weyl_basis, QuantumChannel, StinespringIsometry};
use crate::error::{Error, Result};
use crate::optimize::{min_output_entropy_with, optimize_ensemble_seeded, EnsembleReport, OptConfig, OptReport};
use crate::qmath::linalg;
use crate::qmath::{is_ppt, partial_trace, relative_entropy, tensor, tensor_power, von_neumann_entropy, DensityMatrix};
use crate::tol;

/// Largest matrix side any capacity computation will touch.
pub const MAX_SIDE: usize = 256;

/// A state together with the factors held by the encoding party. The
/// remaining factors belong to the receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct SharedState {
    rho: DensityMatrix,
    sender: Vec<usize>,
}

impl SharedState {
    pub fn new(rho: DensityMatrix, sender: Vec<usize>) -> Result<Self> {
        let sender = linalg::normalize_factors(&sender, rho.factor_count())?;
        if sender.is_empty() || sender.len() == rho.factor_count() {
            return Err(Error::InvalidArgument("sender must hold some but not all factors".into()));
        }
        Ok(SharedState { rho, sender })
    }

    /// First factor to the sender, everything else to the receiver.
    pub fn bipartite(rho: DensityMatrix) -> Result<Self> {
        SharedState::new(rho, vec![0])
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn sender(&self) -> &[usize] {
        &self.sender
    }

    pub fn receiver(&self) -> Vec<usize> {
        (0..self.rho.factor_count()).filter(|k| !self.sender.contains(k)).collect()
    }

    pub fn sender_dim(&self) -> usize {
        self.sender.iter().map(|&k| self.rho.dims()[k]).product()
    }

    pub fn receiver_dim(&self) -> usize {
        self.rho.side() / self.sender_dim()
    }

    pub fn receiver_state(&self) -> Result<DensityMatrix> {
        partial_trace(&self.rho, &self.receiver())
    }

    /// `self (x) other`; sender factors of both stay with the sender.
    pub fn tensor(&self, other: &SharedState) -> SharedState {
        let shift = self.rho.factor_count();
        let mut sender = self.sender.clone();
        sender.extend(other.sender.iter().map(|&k| k + shift));
        SharedState { rho: tensor(&self.rho, &other.rho), sender }
    }

    pub fn power(&self, k: usize) -> Result<SharedState> {
        let rho = tensor_power(&self.rho, k)?;
        let nf = self.rho.factor_count();
        let sender = (0..k).flat_map(|j| self.sender.iter().map(move |&s| j * nf + s)).collect();
        Ok(SharedState { rho, sender })
    }

    /// `(T (x) id) rho` with the sender factors merged into one register
    /// placed first.
    pub fn encode(&self, t: &QuantumChannel) -> Result<DensityMatrix> {
        if t.d_in() != self.sender_dim() {
            return Err(Error::dims(format!("encoding input {} but sender holds dimension {}", t.d_in(), self.sender_dim())));
        }
        let perm = linalg::front_permutation(&self.sender, self.rho.factor_count());
        let moved = self.rho.permute(&perm)?;
        let rest: Vec<usize> = perm[self.sender.len()..].iter().map(|&k| self.rho.dims()[k]).collect();
        let mut dims = vec![self.sender_dim()];
        dims.extend(rest);
        t.apply_local(&moved.with_dims(dims)?, 0)
    }
}

/// Finite probability distribution over payloads.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble<P> {
    items: Vec<(f64, P)>,
}

impl<P> Ensemble<P> {
    pub fn items(&self) -> &[(f64, P)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    fn check_probabilities(items: &[(f64, P)]) -> Result<()> {
        if items.is_empty() {
            return Err(Error::InvalidArgument("ensemble is empty".into()));
        }
        if items.iter().any(|(p, _)| p.is_nan() || *p < 0.0) {
            return Err(Error::Invariant("ensemble probabilities must be nonnegative".into()));
        }
        let total: f64 = items.iter().map(|(p, _)| p).sum();
        if (total - 1.0).abs() > tol::PROBABILITY {
            return Err(Error::Invariant(format!("ensemble probabilities sum to {total}")));
        }
        Ok(())
    }

    pub fn uniform(payloads: Vec<P>) -> Result<Self>
    where
        Self: TryFrom<Vec<(f64, P)>, Error = Error>,
    {
        let p = 1.0 / payloads.len().max(1) as f64;
        Self::try_from(payloads.into_iter().map(|x| (p, x)).collect::<Vec<_>>())
    }
}

impl TryFrom<Vec<(f64, DensityMatrix)>> for Ensemble<DensityMatrix> {
    type Error = Error;

    fn try_from(items: Vec<(f64, DensityMatrix)>) -> Result<Self> {
        Self::check_probabilities(&items)?;
        let dims = items[0].1.dims();
        if items.iter().any(|(_, s)| s.dims() != dims) {
            return Err(Error::dims("ensemble states have different dims"));
        }
        Ok(Ensemble { items })
    }
}

impl TryFrom<Vec<(f64, QuantumChannel)>> for Ensemble<QuantumChannel> {
    type Error = Error;

    fn try_from(items: Vec<(f64, QuantumChannel)>) -> Result<Self> {
        Self::check_probabilities(&items)?;
        let (di, d_o) = (items[0].1.d_in(), items[0].1.d_out());
        if items.iter().any(|(_, t)| t.d_in() != di || t.d_out() != d_o) {
            return Err(Error::dims("ensemble encodings have different dimensions"));
        }
        Ok(Ensemble { items })
    }
}

pub type StateEnsemble = Ensemble<DensityMatrix>;
pub type EncodingEnsemble = Ensemble<QuantumChannel>;

/// `H(sum p_i sigma_i) - sum p_i H(sigma_i)`.
pub fn holevo_information(e: &StateEnsemble) -> Result<f64> {
    let first = &e.items[0].1;
    let mut avg = linalg::CMat::zeros(first.side(), first.side());
    let mut mean = 0.0;
    for (p, s) in &e.items {
        avg += s.matrix().scale(*p);
        mean += p * von_neumann_entropy(s)?;
    }
    let avg = DensityMatrix::from_trusted(first.dims().to_vec(), avg);
    Ok((von_neumann_entropy(&avg)? - mean).max(0.0))
}

/// Holevo information of the signals `(phi o T_i (x) id) rho`.
pub fn dc_mutual_information(mu: &EncodingEnsemble, state: &SharedState, phi: &QuantumChannel) -> Result<f64> {
    let mut signals = Vec::with_capacity(mu.len());
    for (p, t) in mu.items() {
        signals.push((*p, state.encode(&phi.compose(t)?)?));
    }
    holevo_information(&StateEnsemble::try_from(signals)?)
}

/// `H(rho_B) - H(rho)`.
pub fn coherent_information(state: &SharedState) -> Result<f64> {
    Ok(von_neumann_entropy(&state.receiver_state()?)? - von_neumann_entropy(state.state())?)
}

/// Which capacity a result refers to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Quantity {
    Dc,
    DcBlock { n: usize },
    DcMulticopy { k: usize },
    DcNoisy { m: usize },
}

/// The three terms of `log2 d + H(rho_B) - min_T H((T (x) id) rho)`, per copy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decomposition {
    pub log_d: f64,
    pub entropy_b: f64,
    pub min_entropy: f64,
}

impl Decomposition {
    pub fn value(&self) -> f64 {
        self.log_d + self.entropy_b - self.min_entropy
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityMeta {
    pub d: usize,
    pub dims: Vec<usize>,
    pub sender: Vec<usize>,
    pub seed: u64,
    pub config: OptConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapacityResult {
    pub quantity: Quantity,
    pub value: f64,
    /// Always true: values are achievable rates, not certified optima.
    pub lower_bound: bool,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<Decomposition>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleReport>,
    pub meta: CapacityMeta,
}

impl CapacityResult {
    /// Minimizing encoding of the entropy problem, if one was computed.
    pub fn encoder(&self) -> Option<QuantumChannel> {
        self.optimizer.as_ref().map(|r| undilate(&r.isometry))
    }

    /// Ceiling `log2 d + H(rho_B)` recovered from the decomposition.
    pub fn ceiling(&self) -> Option<f64> {
        self.decomposition.map(|d| d.log_d + d.entropy_b)
    }
}

fn guard(what: &str, side: usize) -> Result<()> {
    if side > MAX_SIDE {
        return Err(Error::Guard(format!("{what} has side {side} > {MAX_SIDE}")));
    }
    Ok(())
}

fn check_d(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidArgument("channel dimension d must be positive".into()));
    }
    Ok(())
}

fn meta(d: usize, state: &SharedState, cfg: &OptConfig) -> CapacityMeta {
    CapacityMeta { d, dims: state.rho.dims().to_vec(), sender: state.sender.clone(), seed: cfg.seed, config: cfg.clone() }
}

/// Dense-coding capacity with a noiseless `d`-level channel.
pub fn dc_capacity(d: usize, state: &SharedState, cfg: &OptConfig) -> Result<CapacityResult> {
    dc_capacity_with_probes(d, state, cfg, &[])
}

/// [`dc_capacity`] with extra probe encodings seeded into the search.
pub fn dc_capacity_with_probes(d: usize, state: &SharedState, cfg: &OptConfig, probes: &[(String, StinespringIsometry)]) -> Result<CapacityResult> {
    check_d(d)?;
    guard("state", state.rho.side())?;
    guard("encoded state", d * state.receiver_dim())?;
    let rep = min_output_entropy_with(&state.rho, &state.sender, d, None, probes, cfg)?;
    let entropy_b = von_neumann_entropy(&state.receiver_state()?)?;
    let decomposition = Decomposition { log_d: (d as f64).log2(), entropy_b, min_entropy: rep.value };
    Ok(CapacityResult {
        quantity: Quantity::Dc,
        value: decomposition.value(),
        lower_bound: true,
        converged: rep.converged,
        decomposition: Some(decomposition),
        optimizer: Some(rep),
        ensemble: None,
        meta: meta(d, state, cfg),
    })
}

/// Finite-`n` block-coding estimate `(1/n) DC(d^n, rho^{(x) n})`, seeded
/// with the `n`-fold product of the single-copy minimizer.
pub fn dc_capacity_block(n: usize, d: usize, state: &SharedState, cfg: &OptConfig) -> Result<CapacityResult> {
    check_d(d)?;
    if n == 0 {
        return Err(Error::InvalidArgument("block length must be at least 1".into()));
    }
    let side = checked_pow(state.rho.side(), n)?;
    guard("block state", side)?;
    guard("encoded block", checked_pow(d * state.receiver_dim(), n)?)?;
    if n == 1 {
        return dc_capacity(d, state, cfg);
    }
    let single = dc_capacity(d, state, cfg)?;
    let v = &single.optimizer.as_ref().expect("dc_capacity reports its optimizer").isometry;
    let mut product = v.clone();
    for _ in 1..n {
        product = product.tensor(v);
    }
    let big = state.power(n)?;
    let dn = checked_pow(d, n)?;
    let mut joint = dc_capacity_with_probes(dn, &big, cfg, &[("product".into(), product)])?;
    let dec = joint.decomposition.expect("dc decomposition");
    let per_copy = Decomposition {
        log_d: (d as f64).log2(),
        entropy_b: single.decomposition.expect("dc decomposition").entropy_b,
        min_entropy: dec.min_entropy / n as f64,
    };
    joint.quantity = Quantity::DcBlock { n };
    joint.value = per_copy.value();
    joint.decomposition = Some(per_copy);
    joint.meta = meta(d, state, cfg);
    Ok(joint)
}

/// `DC(d, rho^{(x) k})`: `k` copies consumed per channel use.
pub fn dc_capacity_multicopy(k: usize, d: usize, state: &SharedState, cfg: &OptConfig) -> Result<CapacityResult> {
    check_d(d)?;
    if k == 0 {
        return Err(Error::InvalidArgument("copy count must be at least 1".into()));
    }
    guard("multicopy state", checked_pow(state.rho.side(), k)?)?;
    guard("encoded multicopy state", d * checked_pow(state.receiver_dim(), k)?)?;
    let mut r = dc_capacity(d, &state.power(k)?, cfg)?;
    r.quantity = Quantity::DcMulticopy { k };
    Ok(r)
}

fn checked_pow(base: usize, exp: usize) -> Result<usize> {
    base.checked_pow(exp as u32)
        .ok_or_else(|| Error::Guard(format!("{base}^{exp} overflows")))
}

/// `{(1/d^2, W_ab o T*)}` over the Weyl basis of the channel space.
pub fn capacity_achieving_ensemble(d: usize, t_star: &QuantumChannel) -> Result<EncodingEnsemble> {
    if t_star.d_out() != d {
        return Err(Error::dims(format!("encoder outputs {} but channel dimension is {d}", t_star.d_out())));
    }
    let items = weyl_basis(d)
        .into_iter()
        .map(|w| Ok((1.0 / (d * d) as f64, QuantumChannel::unitary(&w)?.compose(t_star)?)))
        .collect::<Result<Vec<_>>>()?;
    EncodingEnsemble::try_from(items)
}

/// Upper bound `log2 d + D(rho || sigma)`; certified when `sigma` has a
/// positive partial transpose across the sender/receiver cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReeBound {
    pub bound: f64,
    pub relative_entropy: f64,
    pub certified: bool,
    pub ppt_min_eigenvalue: f64,
}

pub fn ree_bound(state: &SharedState, d: usize, sigma: &DensityMatrix) -> Result<ReeBound> {
    check_d(d)?;
    let dre = relative_entropy(&state.rho, sigma)?;
    let ppt = is_ppt(sigma, &state.sender)?;
    Ok(ReeBound { bound: (d as f64).log2() + dre, relative_entropy: dre, certified: ppt.is_ppt, ppt_min_eigenvalue: ppt.min_eigenvalue })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdditivityReport {
    pub gap: f64,
    pub joint: CapacityResult,
    pub parts: [CapacityResult; 2],
}

/// `DC(d1 d2, rho (x) sigma) - DC(d1, rho) - DC(d2, sigma)`. The joint
/// search starts from the product of the parts' minimizers, so the gap
/// cannot fall below minus the optimizer noise.
pub fn additivity_gap(rho: &SharedState, d1: usize, sigma: &SharedState, d2: usize, cfg: &OptConfig) -> Result<AdditivityReport> {
    let joint_state = rho.tensor(sigma);
    guard("joint state", joint_state.rho.side())?;
    guard("encoded joint state", d1 * d2 * joint_state.receiver_dim())?;
    let p1 = dc_capacity(d1, rho, cfg)?;
    let p2 = dc_capacity(d2, sigma, cfg)?;
    let iso = |r: &CapacityResult| r.optimizer.as_ref().expect("dc optimizer").isometry.clone();
    let product = iso(&p1).tensor(&iso(&p2));
    let joint = dc_capacity_with_probes(d1 * d2, &joint_state, cfg, &[("product".into(), product)])?;
    Ok(AdditivityReport { gap: joint.value - p1.value - p2.value, joint, parts: [p1, p2] })
}

/// Lower bound on the capacity through a noisy channel `phi` using
/// ensembles of `m` encodings.
pub fn noisy_dc_capacity(phi: &QuantumChannel, state: &SharedState, m: usize, cfg: &OptConfig) -> Result<CapacityResult> {
    noisy_dc_capacity_seeded(phi, state, m, cfg, &[])
}

/// [`noisy_dc_capacity`] with caller-supplied starting ensembles.
pub fn noisy_dc_capacity_seeded(
    phi: &QuantumChannel,
    state: &SharedState,
    m: usize,
    cfg: &OptConfig,
    seeds: &[(String, EncodingEnsemble)],
) -> Result<CapacityResult> {
    guard("state", state.rho.side())?;
    guard("encoded state", phi.d_out() * state.receiver_dim())?;
    let seeds = seeds
        .iter()
        .map(|(label, e)| {
            let items = e.items().iter().map(|(p, t)| Ok((*p, dilate(t)?))).collect::<Result<Vec<_>>>()?;
            Ok((label.clone(), items))
        })
        .collect::<Result<Vec<_>>>()?;
    let rep = optimize_ensemble_seeded(phi, &state.rho, &state.sender, m, cfg, &seeds)?;
    Ok(CapacityResult {
        quantity: Quantity::DcNoisy { m },
        value: rep.value,
        lower_bound: true,
        converged: rep.converged,
        decomposition: None,
        optimizer: None,
        meta: meta(phi.d_in(), state, cfg),
        ensemble: Some(rep),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::random_separable;
    use crate::qmath::states;

    fn bell() -> SharedState {
        SharedState::bipartite(states::singlet().density()).unwrap()
    }

    fn quick() -> OptConfig {
        OptConfig { restarts: 3, ..OptConfig::default() }
    }

    #[test]
    fn holevo_examples() {
        let z = DensityMatrix::basis(&[2], 0).unwrap();
        assert!(holevo_information(&StateEnsemble::uniform(vec![z.clone()]).unwrap()).unwrap().abs() < 1e-12);

        let s = bell();
        let bells = weyl_basis(2)
            .into_iter()
            .map(|w| QuantumChannel::unitary(&w).unwrap().apply_local(s.state(), 0).unwrap())
            .collect();
        assert!((holevo_information(&StateEnsemble::uniform(bells).unwrap()).unwrap() - 2.0).abs() < 1e-12);

        let plus = states::qubit('+').unwrap().density();
        let h = holevo_information(&StateEnsemble::uniform(vec![z, plus]).unwrap()).unwrap();
        let l: f64 = (2.0 + 2f64.sqrt()) / 4.0;
        let oracle = -l * l.log2() - (1.0 - l) * (1.0 - l).log2();
        assert!((h - oracle).abs() < 1e-12 && (h - 0.6009).abs() < 1e-4);
    }

    #[test]
    fn mutual_information_examples() {
        let s = bell();
        let id = QuantumChannel::identity(2);
        let weyl = EncodingEnsemble::uniform(weyl_basis(2).iter().map(|w| QuantumChannel::unitary(w).unwrap()).collect()).unwrap();
        assert!((dc_mutual_information(&weyl, &s, &id).unwrap() - 2.0).abs() < 1e-12);
        let half = DensityMatrix::maximally_mixed(&[2]);
        let constant = QuantumChannel::constant(2, &half).unwrap();
        assert!(dc_mutual_information(&weyl, &s, &constant).unwrap().abs() < 1e-12);
        let point = EncodingEnsemble::uniform(vec![id.clone()]).unwrap();
        assert!(dc_mutual_information(&point, &s, &id).unwrap().abs() < 1e-12);
    }

    #[test]
    fn bell_capacity_is_two() {
        let r = dc_capacity(2, &bell(), &quick()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-3);
        let dec = r.decomposition.unwrap();
        assert_eq!(r.value, dec.log_d + dec.entropy_b - dec.min_entropy);
    }

    #[test]
    fn pure_state_formula() {
        let th = (0.9f64).sqrt().acos();
        let s = SharedState::bipartite(states::schmidt_pair(th).density()).unwrap();
        let r = dc_capacity(2, &s, &quick()).unwrap();
        let oracle = 1.0 - 0.9 * 0.9f64.log2() - 0.1 * 0.1f64.log2();
        assert!((r.value - oracle).abs() < 1e-3, "value {} oracle {oracle}", r.value);
    }

    #[test]
    fn separable_flatline() {
        let s = SharedState::bipartite(random_separable(&[2, 2], 6, 8).unwrap()).unwrap();
        let r = dc_capacity(2, &s, &quick()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-3, "value {}", r.value);
        assert!(coherent_information(&s).unwrap() <= 1e-9);
    }

    #[test]
    fn coherent_information_examples() {
        assert!((coherent_information(&bell()).unwrap() - 1.0).abs() < 1e-12);
        let mm = SharedState::bipartite(DensityMatrix::maximally_mixed(&[2, 2])).unwrap();
        assert!((coherent_information(&mm).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn achieving_ensemble_reproduces_value() {
        let s = SharedState::bipartite(crate::channels::random_state(&[2, 2], 2, 5).unwrap()).unwrap();
        let r = dc_capacity(2, &s, &quick()).unwrap();
        let ens = capacity_achieving_ensemble(2, &r.encoder().unwrap()).unwrap();
        let i = dc_mutual_information(&ens, &s, &QuantumChannel::identity(2)).unwrap();
        assert!((i - r.value).abs() < 1e-6, "I {i} value {}", r.value);
    }

    #[test]
    fn ree_examples() {
        let s = bell();
        let w = ree_bound(&s, 2, &states::werner(0.5).unwrap()).unwrap();
        assert!((w.bound - 2.0).abs() < 1e-10 && w.certified);
        let m = ree_bound(&s, 2, &DensityMatrix::maximally_mixed(&[2, 2])).unwrap();
        assert!((m.bound - 3.0).abs() < 1e-10 && m.certified);
        let ppt = states::werner(0.3).unwrap();
        let p = ree_bound(&SharedState::bipartite(ppt.clone()).unwrap(), 2, &ppt).unwrap();
        assert!((p.bound - 1.0).abs() < 1e-10 && p.certified);
        let z = DensityMatrix::basis(&[2, 2], 3).unwrap();
        assert!(ree_bound(&SharedState::bipartite(DensityMatrix::basis(&[2, 2], 0).unwrap()).unwrap(), 2, &z).unwrap().bound.is_infinite());
    }

    #[test]
    fn multicopy_and_block_of_bell() {
        let s = bell();
        let mc = dc_capacity_multicopy(2, 2, &s, &quick()).unwrap();
        assert!((mc.value - 2.0).abs() < 1e-3, "multicopy {}", mc.value);
        let mc4 = dc_capacity_multicopy(2, 4, &s, &quick()).unwrap();
        assert!((mc4.value - 4.0).abs() < 1e-3, "multicopy d=4 {}", mc4.value);
        let b = dc_capacity_block(2, 2, &s, &quick()).unwrap();
        assert!((b.value - 2.0).abs() < 5e-3, "block {}", b.value);
        let z = SharedState::bipartite(DensityMatrix::basis(&[2, 2], 0).unwrap()).unwrap();
        assert!((dc_capacity_block(2, 2, &z, &quick()).unwrap().value - 1.0).abs() < 1e-3);
    }

    #[test]
    fn guards_trip() {
        let s = SharedState::bipartite(DensityMatrix::maximally_mixed(&[4, 4])).unwrap();
        assert!(matches!(dc_capacity_block(3, 4, &s, &quick()), Err(Error::Guard(_))));
        assert!(matches!(dc_capacity_multicopy(3, 2, &s, &quick()), Err(Error::Guard(_))));
    }

    #[test]
    fn superadditivity_example_one() {
        let rho = SharedState::bipartite(DensityMatrix::basis(&[2, 2], 0).unwrap()).unwrap();
        let sigma = bell().power(2).unwrap();
        let rep = additivity_gap(&rho, 2, &sigma, 2, &quick()).unwrap();
        assert!((rep.parts[0].value - 1.0).abs() < 1e-3);
        assert!((rep.parts[1].value - 2.0).abs() < 1e-3);
        assert!((rep.joint.value - 4.0).abs() < 5e-3, "joint {}", rep.joint.value);
        assert!((rep.gap - 1.0).abs() < 5e-3);
    }

    #[test]
    fn noisy_identity_matches_noiseless() {
        let s = SharedState::bipartite(crate::channels::random_state(&[2, 2], 2, 17).unwrap()).unwrap();
        let noiseless = dc_capacity(2, &s, &quick()).unwrap().value;
        let noisy = noisy_dc_capacity(&QuantumChannel::identity(2), &s, 4, &quick()).unwrap().value;
        assert!(noisy >= noiseless - 5e-3, "noisy {noisy} noiseless {noiseless}");
        assert!(noisy <= 1.0 + von_neumann_entropy(&s.receiver_state().unwrap()).unwrap() + 1e-9);
    }

    #[test]
    fn superadditivity_example_two() {
        let s = bell();
        let half = DensityMatrix::maximally_mixed(&[2]);
        let constant = QuantumChannel::constant(2, &half).unwrap();
        let id4 = QuantumChannel::identity(4);
        let cfg = quick();
        let p1 = noisy_dc_capacity(&id4, &s, 16, &cfg).unwrap();
        assert!((p1.value - 3.0).abs() < 5e-3, "id4 part {}", p1.value);
        let p2 = noisy_dc_capacity(&constant, &s, 4, &cfg).unwrap();
        assert!(p2.value.abs() < 1e-9);
        let joint = noisy_dc_capacity(&id4.tensor(&constant), &s.tensor(&s), 64, &cfg).unwrap();
        assert!(joint.value >= 4.0 - 5e-3, "joint {}", joint.value);
    }
}
