//! Running an encoding channel through a programmable gate: the channel is
//! dilated to a unitary on `A (x) H'`, the ancilla starts in `|0>`, and the
//! program register selects (an approximation of) that unitary.

use serde::Serialize;

use super::{control_gate, sup_distance_estimate, Program, ProgrammableGate, MAX_PROGRAM_DIM, SWEEP_SAMPLES};
use crate::channels::QuantumChannel;
use crate::error::{Error, Result};
use crate::qmath::linalg::{trace_norm_hermitian, CMat, CVec};
use crate::qmath::states::pauli;
use crate::qmath::{c, PureState};
use crate::tol;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmulationReport {
    pub program: Program,
    /// Trace norm of the Choi difference, divided by `d_in`.
    pub choi_distance: f64,
    /// Worst trace distance over the input sweep.
    pub measured_error: f64,
    pub method: String,
    pub epsilon: f64,
    pub within_epsilon: bool,
    pub candidates: usize,
}

/// `sigma -> Tr_H'' [U (sigma (x) |0><0|) U^dag]` for a unitary on
/// `A (x) H'` whose output splits as `B (x) H''` with `d_out = B`.
pub fn dilation_channel(u: &CMat, d_in: usize, ancilla: usize, d_out: usize) -> Result<QuantumChannel> {
    let side = d_in * ancilla;
    if u.nrows() != side || u.ncols() != side || !side.is_multiple_of(d_out) {
        return Err(Error::dims(format!("a {}x{} unitary cannot dilate {d_in} -> {d_out} with ancilla {ancilla}", u.nrows(), u.ncols())));
    }
    let rest = side / d_out;
    let kraus = (0..rest)
        .map(|e| CMat::from_fn(d_out, d_in, |o, a| u[(o * rest + e, a * ancilla)]))
        .collect();
    QuantumChannel::new(d_in, d_out, kraus)
}

/// Picks the basis program whose dilated channel is closest to `t` in Choi
/// trace norm, then sweeps Haar inputs (plus local ascent) for the error.
/// The gate's data register must be `A (x) H'` with `A = t.d_in()`.
pub fn emulate_encoding(t: &QuantumChannel, g: &ProgrammableGate, ancilla: usize, epsilon: f64, seed: u64) -> Result<EmulationReport> {
    let d_in = t.d_in();
    if ancilla == 0 || g.d_data() != d_in * ancilla || !g.d_data().is_multiple_of(t.d_out()) {
        return Err(Error::dims(format!(
            "gate data register {} does not host a {}->{} channel with ancilla {ancilla}",
            g.d_data(),
            d_in,
            t.d_out()
        )));
    }
    if g.d_prog() > MAX_PROGRAM_DIM {
        return Err(Error::Guard(format!("program register {} too large to scan", g.d_prog())));
    }
    let target_choi = t.choi().matrix;
    let mut best: Option<(f64, usize, QuantumChannel)> = None;
    for k in 0..g.d_prog() {
        let psi = PureState::basis(&[g.d_prog()], k)?;
        let ch = program_channel(g, &psi, d_in, ancilla, t.d_out())?;
        let dist = trace_norm_hermitian(&(&target_choi - ch.choi().matrix))? / d_in as f64;
        if best.as_ref().is_none_or(|b| dist < b.0) {
            best = Some((dist, k, ch));
        }
    }
    let (dist, k, ch) = best.expect("gate has at least one program");
    let (measured, _) = sup_distance_estimate(t, &ch, SWEEP_SAMPLES, seed)?;
    Ok(EmulationReport {
        program: Program::basis(vec![g.d_prog()], k),
        choi_distance: dist,
        measured_error: measured,
        method: format!("haar-{SWEEP_SAMPLES}+ascent"),
        epsilon,
        within_epsilon: measured <= epsilon,
        candidates: g.d_prog(),
    })
}

/// Data-register channel of a program with the ancilla fixed to `|0>` and
/// the `H''` factor traced out.
fn program_channel(g: &ProgrammableGate, psi: &PureState, d_in: usize, ancilla: usize, d_out: usize) -> Result<QuantumChannel> {
    let rest = g.d_data() / d_out;
    let mut kraus = Vec::new();
    for k in g.kraus(psi.amplitudes())? {
        for e in 0..rest {
            let m = CMat::from_fn(d_out, d_in, |o, a| k[(o * rest + e, a * ancilla)]);
            if m.iter().any(|z| z.norm_sqr() > 0.0) {
                kraus.push(m);
            }
        }
    }
    QuantumChannel::new(d_in, d_out, kraus)
}

/// Controlled gate on `C^2 (x) C^4` whose programs implement the unitary
/// dilations of the qubit Pauli channels on a lattice of spacing `1/L`
/// over the probability simplex.
#[derive(Debug, Clone)]
pub struct PauliEmulator {
    pub gate: ProgrammableGate,
    pub lattice: usize,
    /// `max_p min_lattice ||p - q||_1 <= 2 / L`, which bounds the sup
    /// trace distance between the Pauli channels of `p` and `q`.
    pub certified_epsilon: f64,
    pub points: Vec<[f64; 4]>,
}

/// Largest-remainder rounding of a probability vector onto the lattice
/// moves it by at most `2/L` in l1. `L = floor(2 / epsilon) + 1` keeps the
/// bound strictly below epsilon so rounding noise cannot reach it.
pub fn pauli_channel_emulator(epsilon: f64) -> Result<PauliEmulator> {
    if !(epsilon > 0.0 && epsilon <= 2.0) {
        return Err(Error::InvalidArgument(format!("epsilon {epsilon} outside (0, 2]")));
    }
    let lattice = (2.0 / epsilon).floor() as usize + 1;
    let count = (lattice + 1) * (lattice + 2) * (lattice + 3) / 6;
    if count > MAX_PROGRAM_DIM {
        return Err(Error::Guard(format!("Pauli lattice with L = {lattice} has {count} points")));
    }
    let mut points = Vec::with_capacity(count);
    for a in 0..=lattice {
        for b in 0..=lattice - a {
            for cc in 0..=lattice - a - b {
                let dd = lattice - a - b - cc;
                let l = lattice as f64;
                points.push([a as f64 / l, b as f64 / l, cc as f64 / l, dd as f64 / l]);
            }
        }
    }
    let units = points.iter().map(pauli_dilation).collect::<Result<Vec<_>>>()?;
    Ok(PauliEmulator { gate: control_gate(units)?, lattice, certified_epsilon: 2.0 / lattice as f64, points })
}

/// Unitary on `C^2 (x) C^4` mapping `|z>|0>` to `sum_a sqrt(p_a) sigma_a |z> |a>`.
fn pauli_dilation(p: &[f64; 4]) -> Result<CMat> {
    let mut cols: Vec<Option<CVec>> = vec![None; 8];
    for z in 0..2 {
        let mut v = CVec::zeros(8);
        for (a, &pa) in p.iter().enumerate() {
            let s = pauli(a);
            for o in 0..2 {
                v[o * 4 + a] += s[(o, z)] * pa.sqrt();
            }
        }
        cols[z * 4] = Some(v);
    }
    let mut basis: Vec<CVec> = cols.iter().flatten().cloned().collect();
    let mut std = (0..8).map(|k| {
        let mut e = CVec::zeros(8);
        e[k] = c(1.0, 0.0);
        e
    });
    for slot in cols.iter_mut().filter(|s| s.is_none()) {
        loop {
            let mut v = std.next().ok_or_else(|| Error::Numerical("basis completion ran out of vectors".into()))?;
            for b in &basis {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
            if v.norm() > 1e-6 {
                let v = v.normalize();
                basis.push(v.clone());
                *slot = Some(v);
                break;
            }
        }
    }
    let mut u = CMat::zeros(8, 8);
    for (k, col) in cols.into_iter().enumerate() {
        u.set_column(k, &col.expect("completed"));
    }
    if !crate::qmath::linalg::is_unitary(&u, tol::UNITARY) {
        return Err(Error::Numerical("Pauli dilation is not unitary".into()));
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{channels_equal, random_unitary};
    use crate::qmath::linalg::identity;

    #[test]
    fn unitary_in_the_gate_is_emulated_exactly() {
        let u = random_unitary(2, 5);
        let g = control_gate(vec![identity(2), random_unitary(2, 6), u.clone()]).unwrap();
        let rep = emulate_encoding(&QuantumChannel::unitary(&u).unwrap(), &g, 1, 0.1, 0).unwrap();
        assert_eq!(rep.program.entries[0].0, 2);
        assert!(rep.measured_error < 1e-7, "{}", rep.measured_error);
    }

    #[test]
    fn pauli_dilations_realize_their_channels() {
        let p = [0.4, 0.3, 0.2, 0.1];
        let u = pauli_dilation(&p).unwrap();
        let ch = dilation_channel(&u, 2, 4, 2).unwrap();
        let want = QuantumChannel::new(2, 2, (0..4).map(|a| pauli(a) * c(p[a].sqrt(), 0.0)).collect()).unwrap();
        assert!(channels_equal(&ch, &want).unwrap());
    }

    #[test]
    fn depolarizing_channel_through_the_emulator() {
        let em = pauli_channel_emulator(0.1).unwrap();
        assert!(em.certified_epsilon < 0.1);
        for p in [0.13, 0.5, 0.77] {
            let t = QuantumChannel::depolarizing(2, p).unwrap();
            let rep = emulate_encoding(&t, &em.gate, 4, 0.1, 1).unwrap();
            assert!(rep.measured_error <= 0.1, "p = {p}: {rep:?}");
        }
    }

    #[test]
    fn incompatible_registers_are_rejected() {
        let g = control_gate(vec![identity(4)]).unwrap();
        let t = QuantumChannel::identity(3);
        assert!(matches!(emulate_encoding(&t, &g, 1, 0.1, 0), Err(Error::DimensionMismatch(_))));
    }
}
