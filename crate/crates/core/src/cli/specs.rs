//! Short command-line names for gates, target unitaries and programs.
//! Anything that is not a recognized name is read as a JSON file.

use std::path::Path;

use serde_json::{json, Value};

use super::manifest::InputRef;
use crate::error::{Error, Result};
use crate::pqg::{control_gate, net_gate, pauli_channel_emulator, read_gate, ProgrammableGate};
use crate::qmath::io::{read_json, MatrixJson};
use crate::qmath::linalg::{identity, kron, CMat, CVec};
use crate::qmath::states::{cnot, pauli};
use crate::qmath::{c, PureState};

pub(crate) struct GateSpec {
    pub gate: ProgrammableGate,
    /// Accuracy the gate was built for; zero for exact constructions.
    pub epsilon: f64,
    pub label: String,
    pub detail: Option<Value>,
}

/// `ix`, `pauli`, `swap`, `net:EPS[:D]`, `pauli-emulator:EPS`, or a gate file.
pub(crate) fn gate(spec: &str, seed: u64, inputs: &mut Vec<InputRef>) -> Result<GateSpec> {
    let exact = |gate| Ok(GateSpec { gate, epsilon: 0.0, label: spec.to_string(), detail: None });
    match spec {
        "ix" => return exact(control_gate(vec![identity(2), pauli(1)])?),
        "pauli" => return exact(control_gate((0..4).map(pauli).collect())?),
        "swap" => return exact(ProgrammableGate::dense(2, 2, swap())?),
        _ => {}
    }
    if let Some(rest) = spec.strip_prefix("net:") {
        let mut parts = rest.split(':');
        let eps = number(parts.next().unwrap_or(""), spec)?;
        let d = match parts.next() {
            Some(s) => s.parse().map_err(|_| Error::Parse(format!("bad dimension in gate spec {spec:?}")))?,
            None => 2,
        };
        if parts.next().is_some() {
            return Err(Error::Parse(format!("gate spec {spec:?} has too many fields")));
        }
        let ng = net_gate(eps, d, seed)?;
        let detail = json!({ "net": ng.net, "certificate": ng.certificate });
        return Ok(GateSpec { gate: ng.gate, epsilon: eps, label: spec.to_string(), detail: Some(detail) });
    }
    if let Some(rest) = spec.strip_prefix("pauli-emulator:") {
        let eps = number(rest, spec)?;
        let em = pauli_channel_emulator(eps)?;
        let detail = json!({ "lattice": em.lattice, "certified_epsilon": em.certified_epsilon, "points": em.points.len() });
        return Ok(GateSpec { gate: em.gate, epsilon: eps, label: spec.to_string(), detail: Some(detail) });
    }
    let path = Path::new(spec);
    inputs.push(InputRef::hash(path)?);
    Ok(GateSpec { gate: read_gate(path)?, epsilon: 0.0, label: spec.to_string(), detail: None })
}

fn number(s: &str, spec: &str) -> Result<f64> {
    s.parse().map_err(|_| Error::Parse(format!("bad number in gate spec {spec:?}")))
}

fn swap() -> CMat {
    let mut m = CMat::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            m[(b * 2 + a, a * 2 + b)] = c(1.0, 0.0);
        }
    }
    m
}

pub(crate) struct TargetSpec {
    pub unitary: CMat,
    /// Known to be a tensor product of single-qubit gates.
    pub product: bool,
}

/// `cnot`, `cz`, `swap`, a product of single-qubit letters such as `X⊗Z`
/// (separators `⊗` or `*`, letters from `IXYZHST`), or a matrix file.
pub(crate) fn target(spec: &str, inputs: &mut Vec<InputRef>) -> Result<TargetSpec> {
    match spec.to_ascii_lowercase().as_str() {
        "cnot" => return Ok(TargetSpec { unitary: cnot(), product: false }),
        "cz" => {
            let mut m = identity(4);
            m[(3, 3)] = c(-1.0, 0.0);
            return Ok(TargetSpec { unitary: m, product: false });
        }
        "swap" => return Ok(TargetSpec { unitary: swap(), product: false }),
        _ => {}
    }
    let letters: Vec<char> = spec.chars().filter(|&ch| ch != '⊗' && ch != '*').collect();
    if !letters.is_empty() && letters.iter().all(|ch| "IXYZHST".contains(*ch)) {
        let mut u = identity(1);
        for ch in letters {
            u = kron(&u, &single_qubit(ch));
        }
        return Ok(TargetSpec { unitary: u, product: true });
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(Error::Parse(format!("unknown target {spec:?}")));
    }
    inputs.push(InputRef::hash(path)?);
    let m: MatrixJson = read_json(path)?;
    Ok(TargetSpec { unitary: m.to_square()?, product: false })
}

fn single_qubit(ch: char) -> CMat {
    let s = 0.5f64.sqrt();
    match ch {
        'X' => pauli(1),
        'Y' => pauli(2),
        'Z' => pauli(3),
        'H' => CMat::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]),
        'S' => CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]),
        'T' => CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, s)]),
        _ => pauli(0),
    }
}

/// A basis index, an inline `[[re, im], ...]` array, or a file holding one.
/// Arrays are normalized.
pub(crate) fn program(spec: &str, d_prog: usize, inputs: &mut Vec<InputRef>) -> Result<PureState> {
    if let Ok(k) = spec.parse::<usize>() {
        return PureState::basis(&[d_prog], k);
    }
    let amps: Vec<[f64; 2]> = if spec.trim_start().starts_with('[') {
        serde_json::from_str(spec).map_err(|e| Error::Parse(format!("program {spec:?}: {e}")))?
    } else {
        let path = Path::new(spec);
        inputs.push(InputRef::hash(path)?);
        read_json(path)?
    };
    if amps.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Parse("program has non-finite amplitudes".into()));
    }
    if amps.len() != d_prog {
        return Err(Error::dims(format!("program has {} amplitudes, gate expects {d_prog}", amps.len())));
    }
    PureState::normalized(vec![d_prog], CVec::from_iterator(d_prog, amps.iter().map(|a| c(a[0], a[1]))))
}
