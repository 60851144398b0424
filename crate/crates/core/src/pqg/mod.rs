//! Programmable quantum gates.
//!
//! A gate is a fixed unitary `G` on `data (x) program`. Feeding a program
//! state `psi` and tracing the program register out leaves a channel on
//! the data; `psi` is a *program* when that channel is a unitary
//! conjugation.

mod emulate;
mod net;
mod orthogonality;
mod witness;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channels::random::haar_vector;
use crate::channels::{haar_unitary, QuantumChannel};
use crate::error::{Error, Result};
use crate::qmath::io::{read_json, MatrixJson};
use crate::qmath::linalg::{eigenvalues_general, hermitian_sign, is_unitary, kron, permute_operator, trace_norm_hermitian, CMat, CVec, ZERO};
use crate::qmath::{c, PureState, C64};
use crate::rng::stream;
use crate::tol;

pub use emulate::{dilation_channel, emulate_encoding, pauli_channel_emulator, EmulationReport, PauliEmulator};
pub use net::{net_gate, NetCertificate, NetGate, UnitaryNet};
pub use orthogonality::{program_orthogonality_check, program_unitary, OrthogonalityVerdict};
pub use witness::{scalability_witness, WitnessCandidate, WitnessReport, ENTANGLING_THRESHOLD};

/// Largest program register accepted anywhere.
pub const MAX_PROGRAM_DIM: usize = 65536;
/// Largest side of a gate stored as a full matrix.
pub const MAX_DENSE_SIDE: usize = 1024;
/// Haar inputs per sup-distance sweep.
pub const SWEEP_SAMPLES: usize = 200;
/// Random stream used by [`approximation_error`].
pub const SWEEP_SEED: u64 = 0x5157_2ee9;

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    /// Full unitary on `data (x) program`, row index `d * d_P + p`.
    Dense(CMat),
    /// `sum_i U_i (x) |i><i|`, kept factored.
    Controlled(Vec<CMat>),
}

/// Immutable gate; construct with [`ProgrammableGate::dense`] or
/// [`control_gate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProgrammableGate {
    d_data: usize,
    d_prog: usize,
    kind: GateKind,
}

impl ProgrammableGate {
    pub fn dense(d_data: usize, d_prog: usize, u: CMat) -> Result<Self> {
        if d_data == 0 || d_prog == 0 {
            return Err(Error::dims("gate registers must be nonempty"));
        }
        let side = d_data * d_prog;
        if side > MAX_DENSE_SIDE {
            return Err(Error::Guard(format!("dense gate side {side} exceeds {MAX_DENSE_SIDE}")));
        }
        if u.nrows() != side || u.ncols() != side {
            return Err(Error::dims(format!("gate matrix is {}x{}, expected {side}x{side}", u.nrows(), u.ncols())));
        }
        if !is_unitary(&u, tol::UNITARY) {
            return Err(Error::Invariant("gate matrix is not unitary".into()));
        }
        Ok(ProgrammableGate { d_data, d_prog, kind: GateKind::Dense(u) })
    }

    pub fn d_data(&self) -> usize {
        self.d_data
    }

    pub fn d_prog(&self) -> usize {
        self.d_prog
    }

    pub fn kind(&self) -> &GateKind {
        &self.kind
    }

    /// Controlled units, if the gate is stored that way.
    pub fn units(&self) -> Option<&[CMat]> {
        match &self.kind {
            GateKind::Controlled(u) => Some(u),
            GateKind::Dense(_) => None,
        }
    }

    /// The full unitary `G`.
    pub fn unitary(&self) -> Result<CMat> {
        match &self.kind {
            GateKind::Dense(u) => Ok(u.clone()),
            GateKind::Controlled(units) => {
                let side = self.d_data * self.d_prog;
                if side > MAX_DENSE_SIDE {
                    return Err(Error::Guard(format!("gate side {side} exceeds {MAX_DENSE_SIDE}")));
                }
                let p = self.d_prog;
                let mut g = CMat::zeros(side, side);
                for (k, u) in units.iter().enumerate() {
                    for i in 0..self.d_data {
                        for j in 0..self.d_data {
                            g[(i * p + k, j * p + k)] = u[(i, j)];
                        }
                    }
                }
                Ok(g)
            }
        }
    }

    /// Kraus operators `(I (x) <k|) G (I (x) |psi>)` of the induced map.
    pub fn kraus(&self, psi: &CVec) -> Result<Vec<CMat>> {
        if psi.len() != self.d_prog {
            return Err(Error::dims(format!("program has {} amplitudes, gate expects {}", psi.len(), self.d_prog)));
        }
        let (d, p) = (self.d_data, self.d_prog);
        Ok(match &self.kind {
            GateKind::Controlled(units) => units
                .iter()
                .zip(psi.iter())
                .filter(|(_, a)| a.norm_sqr() > 0.0)
                .map(|(u, a)| u * *a)
                .collect(),
            GateKind::Dense(g) => (0..p)
                .map(|k| CMat::from_fn(d, d, |i, j| (0..p).fold(ZERO, |acc, l| acc + g[(i * p + k, j * p + l)] * psi[l])))
                .filter(|k| k.iter().any(|z| z.norm_sqr() > 0.0))
                .collect(),
        })
    }

    /// `G1 (x) G2` with registers regrouped as `(D1 D2) (x) (P1 P2)`.
    pub fn tensor(&self, other: &ProgrammableGate) -> Result<ProgrammableGate> {
        let d_prog = self.d_prog * other.d_prog;
        if d_prog > MAX_PROGRAM_DIM {
            return Err(Error::Guard(format!("joint program register {d_prog} exceeds {MAX_PROGRAM_DIM}")));
        }
        let d_data = self.d_data * other.d_data;
        if let (GateKind::Controlled(a), GateKind::Controlled(b)) = (&self.kind, &other.kind) {
            let units = a.iter().flat_map(|u| b.iter().map(move |v| kron(u, v))).collect();
            return Ok(ProgrammableGate { d_data, d_prog, kind: GateKind::Controlled(units) });
        }
        let side = d_data * d_prog;
        if side > MAX_DENSE_SIDE {
            return Err(Error::Guard(format!("dense gate side {side} exceeds {MAX_DENSE_SIDE}")));
        }
        let g = kron(&self.unitary()?, &other.unitary()?);
        let dims = [self.d_data, self.d_prog, other.d_data, other.d_prog];
        let g = permute_operator(&g, &dims, &[0, 2, 1, 3])?;
        Ok(ProgrammableGate { d_data, d_prog, kind: GateKind::Dense(g) })
    }
}

/// `G = sum_i U_i (x) |i><i|`; basis program `|i>` implements `U_i` exactly.
pub fn control_gate(units: Vec<CMat>) -> Result<ProgrammableGate> {
    let Some(first) = units.first() else {
        return Err(Error::InvalidArgument("control_gate needs at least one unitary".into()));
    };
    let d = first.nrows();
    if d == 0 {
        return Err(Error::dims("empty unitary"));
    }
    if units.len() > MAX_PROGRAM_DIM {
        return Err(Error::Guard(format!("{} units exceed the program register limit {MAX_PROGRAM_DIM}", units.len())));
    }
    for (i, u) in units.iter().enumerate() {
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::dims(format!("unit {i} is {}x{}, expected {d}x{d}", u.nrows(), u.ncols())));
        }
        if !is_unitary(u, tol::UNITARY) {
            return Err(Error::Invariant(format!("unit {i} is not unitary")));
        }
    }
    Ok(ProgrammableGate { d_data: d, d_prog: units.len(), kind: GateKind::Controlled(units) })
}

/// `sigma -> Tr_P G (sigma (x) |psi><psi|) G^dag`.
pub fn induced_map(g: &ProgrammableGate, psi: &PureState) -> Result<QuantumChannel> {
    QuantumChannel::new(g.d_data, g.d_data, g.kraus(psi.amplitudes())?)
}

/// Exact `sup_zeta || U zeta U^dag - V zeta V^dag ||_1 = 2 sin(arc/2)`, where
/// `arc` is the smallest arc holding the eigenphases of `U^dag V` (2 once
/// the arc reaches pi). Blind to global phases.
pub fn unitary_distance(u: &CMat, v: &CMat) -> Result<f64> {
    if u.shape() != v.shape() || u.nrows() != u.ncols() {
        return Err(Error::dims("unitaries of different shapes"));
    }
    let w = u.adjoint() * v;
    if w.nrows() == 2 {
        let t = (w[(0, 0)] + w[(1, 1)]).norm();
        return Ok(2.0 * (1.0 - (t * t / 4.0).min(1.0)).sqrt());
    }
    let mut phases: Vec<f64> = eigenvalues_general(&w)?.iter().map(|z| z.arg()).collect();
    phases.sort_by(f64::total_cmp);
    let n = phases.len();
    let mut gap = phases[0] + 2.0 * std::f64::consts::PI - phases[n - 1];
    for k in 1..n {
        gap = gap.max(phases[k] - phases[k - 1]);
    }
    let arc = 2.0 * std::f64::consts::PI - gap;
    Ok(if arc >= std::f64::consts::PI { 2.0 } else { 2.0 * (arc / 2.0).sin() })
}

/// Estimate of a sup over pure inputs, tagged with how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxError {
    pub value: f64,
    pub method: String,
    pub samples: usize,
}

/// `sup_zeta || U zeta U^dag - Gamma_psi(zeta) ||_1`. Exact when the induced
/// map is itself a unitary conjugation, otherwise a Haar sweep followed by
/// local ascent from the worst sample.
pub fn approximation_error(g: &ProgrammableGate, psi: &PureState, target: &CMat) -> Result<ApproxError> {
    if target.nrows() != g.d_data || target.ncols() != g.d_data {
        return Err(Error::dims(format!("target is {}x{}, data register is {}", target.nrows(), target.ncols(), g.d_data)));
    }
    let kraus = g.kraus(psi.amplitudes())?;
    target_error(&kraus, target, SWEEP_SAMPLES, SWEEP_SEED)
}

pub(crate) fn target_error(kraus: &[CMat], target: &CMat, samples: usize, seed: u64) -> Result<ApproxError> {
    if let Some(u) = single_unitary(kraus) {
        return Ok(ApproxError { value: unitary_distance(target, &u)?, method: "exact-unitary".into(), samples: 0 });
    }
    let d = target.nrows();
    let a = QuantumChannel::from_trusted(d, d, vec![target.clone()]);
    let b = QuantumChannel::from_trusted(d, d, kraus.to_vec());
    let (value, _) = sup_distance_estimate(&a, &b, samples, seed)?;
    Ok(ApproxError { value, method: format!("haar-{samples}+ascent"), samples })
}

/// The unitary behind a Kraus family whose operators are all proportional
/// to one unitary.
fn single_unitary(kraus: &[CMat]) -> Option<CMat> {
    let first = kraus.iter().max_by(|a, b| a.norm().total_cmp(&b.norm()))?;
    let n = first.norm();
    let d = first.nrows() as f64;
    let u = first.unscale(n / d.sqrt());
    if !is_unitary(&u, 1e-9) {
        return None;
    }
    for k in kraus {
        let overlap = u.dotc(k).norm();
        if (k.norm_squared() - overlap * overlap / d).abs() > 1e-12 * d {
            return None;
        }
    }
    Some(u)
}

/// `max_zeta || a(zeta) - b(zeta) ||_1` over `samples` Haar pure inputs,
/// then projected gradient ascent on the sphere from the worst one. Never
/// exceeds 2. Returns the value and the maximizing input.
pub fn sup_distance_estimate(a: &QuantumChannel, b: &QuantumChannel, samples: usize, seed: u64) -> Result<(f64, CVec)> {
    if a.d_in() != b.d_in() || a.d_out() != b.d_out() {
        return Err(Error::dims("channels are not comparable"));
    }
    let d = a.d_in();
    let gap = |z: &CVec| -> CMat {
        let p = z * z.adjoint();
        a.apply_matrix(&p) - b.apply_matrix(&p)
    };
    let mut rng = stream(seed, 0);
    let mut best = (f64::NEG_INFINITY, CVec::zeros(d));
    for _ in 0..samples.max(1) {
        let z = haar_vector(d, &mut rng);
        let f = trace_norm_hermitian(&gap(&z))?;
        if f > best.0 {
            best = (f, z);
        }
    }
    let (mut f, mut z) = best;
    let mut t = 0.5;
    for _ in 0..100 {
        let s = hermitian_sign(&gap(&z))?;
        let grad = (a.apply_adjoint(&s) - b.apply_adjoint(&s)) * &z * c(2.0, 0.0);
        let along = z.dotc(&grad);
        let tangent = &grad - &z * along;
        let norm = tangent.norm();
        if norm < 1e-12 {
            break;
        }
        let mut improved = false;
        while t * norm > 1e-10 {
            let trial = (&z + &tangent * c(t, 0.0)).normalize();
            let ft = trace_norm_hermitian(&gap(&trial))?;
            if ft > f {
                f = ft;
                z = trial;
                improved = true;
                t *= 2.0;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok((f.min(2.0), z))
}

pub(crate) fn haar_unitaries(d: usize, count: usize, seed: u64, stream_id: u64) -> Vec<CMat> {
    let mut rng = stream(seed, stream_id);
    (0..count).map(|_| haar_unitary(d, &mut rng)).collect()
}

/// Sparse program vector on a (possibly factored) program register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Program {
    pub dims: Vec<usize>,
    /// `(index, [re, im])`, nonzero amplitudes only.
    pub entries: Vec<(usize, [f64; 2])>,
}

impl Program {
    pub fn basis(dims: Vec<usize>, index: usize) -> Program {
        Program { dims, entries: vec![(index, [1.0, 0.0])] }
    }

    pub fn from_amplitudes(dims: Vec<usize>, indices: &[usize], amps: &CVec) -> Program {
        let entries = indices
            .iter()
            .zip(amps.iter())
            .filter(|(_, a)| a.norm() > 1e-14)
            .map(|(&i, a)| (i, [a.re, a.im]))
            .collect();
        Program { dims, entries }
    }

    pub fn from_state(psi: &PureState) -> Program {
        let idx: Vec<usize> = (0..psi.side()).collect();
        Program::from_amplitudes(psi.dims().to_vec(), &idx, psi.amplitudes())
    }

    pub fn side(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn to_state(&self) -> Result<PureState> {
        let n = self.side();
        if n > MAX_PROGRAM_DIM {
            return Err(Error::Guard(format!("program register {n} is too large to expand")));
        }
        let mut v = CVec::zeros(n);
        for &(i, [re, im]) in &self.entries {
            if i >= n {
                return Err(Error::InvalidArgument(format!("program index {i} >= {n}")));
            }
            v[i] += C64::new(re, im);
        }
        PureState::normalized(self.dims.clone(), v)
    }
}

/// Serialized gate: `{"d_D", "d_P", "unitary": matrix}` or, for
/// controlled gates, `{"d_D", "d_P", "controlled": [matrix, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateFile {
    #[serde(rename = "d_D")]
    pub d_data: usize,
    #[serde(rename = "d_P")]
    pub d_prog: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary: Option<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controlled: Option<Vec<MatrixJson>>,
}

impl GateFile {
    pub fn from_gate(g: &ProgrammableGate) -> GateFile {
        let (unitary, controlled) = match &g.kind {
            GateKind::Dense(u) => (Some(MatrixJson::from_matrix(u)), None),
            GateKind::Controlled(us) => (None, Some(us.iter().map(MatrixJson::from_matrix).collect())),
        };
        GateFile { d_data: g.d_data, d_prog: g.d_prog, unitary, controlled }
    }

    pub fn to_gate(&self) -> Result<ProgrammableGate> {
        match (&self.unitary, &self.controlled) {
            (Some(u), None) => ProgrammableGate::dense(self.d_data, self.d_prog, u.to_square()?),
            (None, Some(us)) => {
                if us.len() != self.d_prog {
                    return Err(Error::Parse(format!("{} controlled units but d_P = {}", us.len(), self.d_prog)));
                }
                let units = us.iter().map(|m| m.to_square()).collect::<Result<Vec<_>>>()?;
                if units.iter().any(|u| u.nrows() != self.d_data) {
                    return Err(Error::Parse(format!("controlled units must be {0}x{0}", self.d_data)));
                }
                control_gate(units)
            }
            _ => Err(Error::Parse("gate file needs exactly one of \"unitary\" or \"controlled\"".into())),
        }
    }
}

pub fn read_gate(path: &Path) -> Result<ProgrammableGate> {
    read_json::<GateFile>(path)?.to_gate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::channels_equal;
    use crate::qmath::linalg::identity;
    use crate::qmath::states::pauli;
    use crate::qmath::{trace_distance, DensityMatrix};

    fn ix() -> ProgrammableGate {
        control_gate(vec![identity(2), pauli(1)]).unwrap()
    }

    #[test]
    fn control_gate_is_block_diagonal() {
        let g = ix().unitary().unwrap();
        assert_eq!(g.nrows(), 4);
        assert!(is_unitary(&g, 1e-12));
        // Data index major: row (d, p) = 2d + p.
        assert_eq!(g[(1, 3)], c(1.0, 0.0));
        assert_eq!(g[(0, 0)], c(1.0, 0.0));
        assert_eq!(g[(0, 2)], ZERO);
    }

    #[test]
    fn basis_program_implements_its_unit() {
        let g = ix();
        let psi = PureState::basis(&[2], 1).unwrap();
        let t = induced_map(&g, &psi).unwrap();
        assert!(channels_equal(&t, &QuantumChannel::unitary(&pauli(1)).unwrap()).unwrap());
        let dense = ProgrammableGate::dense(2, 2, g.unitary().unwrap()).unwrap();
        assert!(channels_equal(&induced_map(&dense, &psi).unwrap(), &t).unwrap());
    }

    #[test]
    fn single_unit_gate_acts_as_that_unit() {
        let u = pauli(3);
        let g = control_gate(vec![u.clone()]).unwrap();
        assert_eq!(g.unitary().unwrap(), u);
    }

    #[test]
    fn superposition_program_is_half_flip() {
        let g = ix();
        let s = 1.0 / 2f64.sqrt();
        let psi = PureState::new(vec![2], CVec::from_vec(vec![c(s, 0.0), c(s, 0.0)])).unwrap();
        let t = induced_map(&g, &psi).unwrap();
        let zero = DensityMatrix::basis(&[2], 0).unwrap();
        let out = t.apply(&zero).unwrap();
        assert!((out.purity() - 0.5).abs() < 1e-12);
        let err = approximation_error(&g, &psi, &pauli(1)).unwrap();
        assert!(err.value > 0.5, "{err:?}");
        assert!(err.method.starts_with("haar-200"));
        let dense = ProgrammableGate::dense(2, 2, g.unitary().unwrap()).unwrap();
        let out2 = induced_map(&dense, &psi).unwrap().apply(&zero).unwrap();
        assert!(trace_distance(&out, &out2).unwrap() < 1e-12);
    }

    #[test]
    fn approximation_error_examples() {
        let g = ix();
        let one = PureState::basis(&[2], 1).unwrap();
        let zero = PureState::basis(&[2], 0).unwrap();
        assert!(approximation_error(&g, &one, &pauli(1)).unwrap().value < 1e-8);
        let e = approximation_error(&g, &zero, &pauli(1)).unwrap();
        assert!((e.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_estimate_agrees_with_exact_formula() {
        for seed in 0..5 {
            let u = crate::channels::random_unitary(3, seed);
            let v = crate::channels::random_unitary(3, seed + 100);
            let exact = unitary_distance(&u, &v).unwrap();
            let a = QuantumChannel::unitary(&u).unwrap();
            let b = QuantumChannel::unitary(&v).unwrap();
            let (est, _) = sup_distance_estimate(&a, &b, 200, seed).unwrap();
            assert!(est <= exact + 1e-9 && est > exact - 1e-3, "{est} vs {exact}");
        }
    }

    #[test]
    fn unitary_distance_ignores_phase() {
        let u = crate::channels::random_unitary(2, 3);
        let v = &u * C64::from_polar(1.0, 0.7);
        assert!(unitary_distance(&u, &v).unwrap() < 1e-7);
        assert!((unitary_distance(&identity(2), &pauli(1)).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_of_gates_regroups_registers() {
        let a = ix();
        let b = control_gate(vec![identity(2), pauli(3)]).unwrap();
        let ab = a.tensor(&b).unwrap();
        let dense = ProgrammableGate::dense(2, 2, a.unitary().unwrap()).unwrap().tensor(&b).unwrap();
        let psi = PureState::basis(&[2, 2], 3).unwrap();
        let want = QuantumChannel::unitary(&kron(&pauli(1), &pauli(3))).unwrap();
        assert!(channels_equal(&induced_map(&ab, &psi).unwrap(), &want).unwrap());
        assert!(channels_equal(&induced_map(&dense, &psi).unwrap(), &want).unwrap());
    }

    #[test]
    fn gate_file_round_trip() {
        let g = ix();
        let back = GateFile::from_gate(&g).to_gate().unwrap();
        assert_eq!(back, g);
        let bad = GateFile { d_data: 2, d_prog: 2, unitary: None, controlled: None };
        assert!(matches!(bad.to_gate(), Err(Error::Parse(_))));
    }
}
