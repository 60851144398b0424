//! Finite nets of unitaries, wrapped as controlled gates.
//!
//! Qubit nets are body-centred grids in ZYZ Euler coordinates. In the
//! coordinates `(theta, phi sin theta, psi + phi cos theta)` the rotation
//! angle metric is locally Euclidean, so a BCC lattice with cube side `a`
//! covers to rotation angle about `a sqrt5 / 4`. The spacing is then
//! calibrated against a measured covering error.

use serde::Serialize;

use super::{control_gate, haar_unitaries, sup_distance_estimate, unitary_distance, ProgrammableGate, MAX_PROGRAM_DIM, SWEEP_SAMPLES};
use crate::channels::QuantumChannel;
use crate::error::{Error, Result};
use crate::qmath::linalg::{identity, CMat};
use crate::qmath::{c, C64};
use crate::rng::derive;

const COVERING_SAMPLES: usize = 4000;
const POOL_SAMPLES: usize = 500;
const CERTIFICATE_TARGETS: usize = 100;
/// Calibrate to this fraction of epsilon so fresh targets keep a margin.
const MARGIN: f64 = 0.95;

#[derive(Debug, Clone, Serialize)]
pub struct UnitaryNet {
    pub d: usize,
    pub size: usize,
    /// Largest distance to the net over the calibration targets.
    pub covering_radius: f64,
    pub method: String,
    pub samples: usize,
    #[serde(skip)]
    pub units: Vec<CMat>,
    #[serde(skip)]
    quats: Vec<[f64; 4]>,
}

impl UnitaryNet {
    fn new(d: usize, units: Vec<CMat>) -> UnitaryNet {
        let quats = if d == 2 { units.iter().map(quaternion).collect() } else { Vec::new() };
        UnitaryNet { d, size: units.len(), covering_radius: f64::NAN, method: String::new(), samples: 0, units, quats }
    }

    /// Closest element and its exact channel distance.
    pub fn nearest(&self, u: &CMat) -> Result<(usize, f64)> {
        if u.nrows() != self.d || u.ncols() != self.d {
            return Err(Error::dims(format!("target is {}x{}, net acts on C^{}", u.nrows(), u.ncols(), self.d)));
        }
        if self.d == 2 {
            let q = quaternion(u);
            let (k, dot) = self
                .quats
                .iter()
                .map(|g| (q[0] * g[0] + q[1] * g[1] + q[2] * g[2] + q[3] * g[3]).abs())
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (k, v)| if v > best.1 { (k, v) } else { best });
            return Ok((k, 2.0 * (1.0 - dot.min(1.0) * dot.min(1.0)).sqrt()));
        }
        // Rank by |Tr U^dag V|, then settle among the leaders exactly.
        let mut scored: Vec<(usize, f64)> = self.units.iter().map(|v| u.dotc(v).norm()).enumerate().collect();
        let lead = scored.len().min(4);
        scored.select_nth_unstable_by(lead - 1, |a, b| b.1.total_cmp(&a.1));
        let mut best = (0, f64::INFINITY);
        for &(k, _) in &scored[..lead] {
            let dist = unitary_distance(u, &self.units[k])?;
            if dist < best.1 {
                best = (k, dist);
            }
        }
        Ok(best)
    }

    fn measure(&self, targets: &[CMat]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for t in targets {
            worst = worst.max(self.nearest(t)?.1);
        }
        Ok(worst)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NetCertificate {
    pub epsilon: f64,
    pub targets: usize,
    /// Worst exact distance from a target to its nearest program.
    pub max_error: f64,
    /// Worst sampled sup-distance estimate for the same pairs.
    pub max_estimated: f64,
    pub estimate_method: String,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct NetGate {
    pub gate: ProgrammableGate,
    pub net: UnitaryNet,
    pub certificate: NetCertificate,
}

/// Net on `U(d)` with covering error at most `epsilon` on the calibration
/// targets, as a controlled gate with one basis program per element.
pub fn net_gate(epsilon: f64, d: usize, seed: u64) -> Result<NetGate> {
    if !(epsilon > 0.0 && epsilon <= 2.0) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} outside (0, 2]")));
    }
    if d < 2 {
        return Err(Error::InvalidArgument("nets need d >= 2".into()));
    }
    let goal = MARGIN * epsilon;
    let net = if d == 2 { qubit_net(goal, seed)? } else { pool_net(goal, d, seed)? };
    let certificate = certify(&net, epsilon, seed)?;
    let gate = control_gate(net.units.clone())?;
    Ok(NetGate { gate, net, certificate })
}

fn qubit_net(goal: f64, seed: u64) -> Result<UnitaryNet> {
    let targets = haar_unitaries(2, COVERING_SAMPLES, seed, 1);
    let angle = |dist: f64| 2.0 * (dist / 2.0).min(1.0).asin();
    let mut a = 4.0 * angle(goal) / 5f64.sqrt();
    for _ in 0..24 {
        if euler_bcc_size(a) > MAX_PROGRAM_DIM {
            return Err(Error::Guard(format!("qubit net at covering {goal:.3} needs more than {MAX_PROGRAM_DIM} programs")));
        }
        let mut net = UnitaryNet::new(2, euler_bcc(a));
        let worst = net.measure(&targets)?;
        if worst <= goal {
            net.covering_radius = worst;
            net.method = format!("euler-bcc spacing {a:.5}, max over {COVERING_SAMPLES} Haar targets");
            net.samples = COVERING_SAMPLES;
            return Ok(net);
        }
        a *= (0.97 * angle(goal) / angle(worst)).min(0.97);
    }
    Err(Error::Numerical("qubit net calibration did not settle".into()))
}

/// Layer angles and per-layer `phi` counts of the grid with side `a`,
/// plus the common `psi` count.
fn bcc_layout(a: f64) -> (Vec<(f64, usize)>, usize) {
    use std::f64::consts::PI;
    let layers = ((2.0 * PI / a).ceil().min(1e7) as usize).max(1);
    let n_psi = ((2.0 * PI / a).round().min(1e7) as usize).max(1);
    let rows = (0..=layers)
        .map(|t| {
            let theta = PI * t as f64 / layers as f64;
            (theta, ((2.0 * PI * theta.sin() / a).round() as usize).max(1))
        })
        .collect();
    (rows, n_psi)
}

fn euler_bcc_size(a: f64) -> usize {
    let (rows, n_psi) = bcc_layout(a);
    rows.iter().map(|r| r.1).sum::<usize>().saturating_mul(n_psi)
}

/// BCC lattice in Euler coordinates with cube side `a`.
fn euler_bcc(a: f64) -> Vec<CMat> {
    use std::f64::consts::PI;
    let (rows, n_psi) = bcc_layout(a);
    let mut out = Vec::new();
    for (t, &(theta, n_phi)) in rows.iter().enumerate() {
        let shift = if t % 2 == 1 { 0.5 } else { 0.0 };
        for i in 0..n_phi {
            let phi = 2.0 * PI * (i as f64 + shift) / n_phi as f64;
            for k in 0..n_psi {
                let w = 2.0 * PI * (k as f64 + shift) / n_psi as f64;
                // Fiber gauge without a d(theta) cross term: psi + phi near
                // the north pole, psi - phi near the south pole.
                let psi = if theta <= PI / 2.0 { w - phi } else { w + phi };
                out.push(euler(phi, theta, psi));
            }
        }
    }
    out
}

/// `Rz(phi) Ry(theta) Rz(psi)` in SU(2).
fn euler(phi: f64, theta: f64, psi: f64) -> CMat {
    let rz = |x: f64| CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![C64::from_polar(1.0, -x / 2.0), C64::from_polar(1.0, x / 2.0)]));
    let (s, co) = (theta / 2.0).sin_cos();
    let ry = CMat::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)]);
    rz(phi) * ry * rz(psi)
}

/// Unit quaternion `(w, x, y, z)` of `U / sqrt(det U) = w I - i (x X + y Y + z Z)`,
/// defined up to sign.
fn quaternion(u: &CMat) -> [f64; 4] {
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let v = u / det.sqrt();
    let w = ((v[(0, 0)] + v[(1, 1)]) / 2.0).re;
    let z = ((v[(1, 1)] - v[(0, 0)]) / 2.0).im;
    let x = -((v[(0, 1)] + v[(1, 0)]) / 2.0).im;
    let y = ((v[(1, 0)] - v[(0, 1)]) / 2.0).re;
    let n = (w * w + x * x + y * y + z * z).sqrt();
    [w / n, x / n, y / n, z / n]
}

fn pool_net(goal: f64, d: usize, seed: u64) -> Result<UnitaryNet> {
    let targets = haar_unitaries(d, POOL_SAMPLES, seed, 1);
    let mut units = vec![identity(d)];
    let mut draws = 0u64;
    loop {
        let mut net = UnitaryNet::new(d, units.clone());
        let worst = net.measure(&targets)?;
        if worst <= goal {
            net.covering_radius = worst;
            net.method = format!("haar pool, max over {POOL_SAMPLES} Haar targets");
            net.samples = POOL_SAMPLES;
            return Ok(net);
        }
        let batch = units.len().max(64);
        if units.len() + batch > MAX_PROGRAM_DIM {
            return Err(Error::Guard(format!("net on U({d}) at covering {goal:.3} needs more than {MAX_PROGRAM_DIM} programs")));
        }
        units.extend(haar_unitaries(d, batch, derive(seed, 7), 100 + draws));
        draws += 1;
    }
}

fn certify(net: &UnitaryNet, epsilon: f64, seed: u64) -> Result<NetCertificate> {
    let targets = haar_unitaries(net.d, CERTIFICATE_TARGETS, seed, 2);
    let mut max_error: f64 = 0.0;
    let mut max_estimated: f64 = 0.0;
    for (i, t) in targets.iter().enumerate() {
        let (k, dist) = net.nearest(t)?;
        max_error = max_error.max(dist);
        let a = QuantumChannel::unitary(t)?;
        let b = QuantumChannel::unitary(&net.units[k])?;
        let (est, _) = sup_distance_estimate(&a, &b, SWEEP_SAMPLES, derive(seed, 1000 + i as u64))?;
        max_estimated = max_estimated.max(est);
    }
    Ok(NetCertificate {
        epsilon,
        targets: CERTIFICATE_TARGETS,
        max_error,
        max_estimated,
        estimate_method: format!("haar-{SWEEP_SAMPLES}+ascent"),
        passed: max_error <= epsilon && max_estimated <= epsilon,
    })
}
