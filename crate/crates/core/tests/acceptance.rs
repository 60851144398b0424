//! Acceptance gate. Each `criterion_*` test prints one PASS/FAIL line
//! (visible with `--nocapture`) and fails if its criterion is not met.
//! Expected values come from closed forms computed here, independently of
//! the library's own formulas.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use densecap::capacity::scan::{scan_additivity, ScanKind};
use densecap::capacity::{additivity_gap, coherent_information, dc_capacity, noisy_dc_capacity, ree_bound, AdditivityReport, SharedState};
use densecap::channels::{dilate, haar_isometry, haar_unitary, random_channel, random_separable, random_state, read_channel, undilate, weyl_basis, QuantumChannel, StinespringIsometry};
use densecap::optimize::{entropy_gradient, local_output_entropy, OptConfig};
use densecap::pqg::{
    control_gate, emulate_encoding, net_gate, pauli_channel_emulator, program_orthogonality_check, program_unitary, scalability_witness, ProgrammableGate, ENTANGLING_THRESHOLD,
};
use densecap::qmath::io::read_state;
use densecap::qmath::states::{maximally_entangled, pauli, schmidt_pair, singlet};
use densecap::qmath::{c, CMat, CVec, DensityMatrix, PureState};
use densecap::rng::stream;
use densecap::Error;
use rand::Rng;

/// Writes to the raw stderr handle so the line shows even when libtest
/// captures output of passing tests.
fn report(n: usize, what: &str, pass: bool, detail: String) {
    let line = format!("criterion {n:>2} [{}] {what}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {n} failed: {detail}");
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn shared(name: &str) -> SharedState {
    let (rho, sender) = read_state(&fixture(name)).unwrap();
    SharedState::new(rho, sender.unwrap_or_else(|| vec![0])).unwrap()
}

// ---- independent oracles ----------------------------------------------

fn eigenvalues(m: &CMat) -> Vec<f64> {
    let h = (m + m.adjoint()).scale(0.5);
    h.symmetric_eigen().eigenvalues.iter().copied().collect()
}

fn trace_norm(m: &CMat) -> f64 {
    eigenvalues(m).iter().map(|x| x.abs()).sum()
}

fn binary_entropy(p: f64) -> f64 {
    [p, 1.0 - p].iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

/// `Tr_A` of an operator on `C^da (x) C^db`, by explicit index sums.
fn trace_first(m: &CMat, da: usize, db: usize) -> CMat {
    CMat::from_fn(db, db, |i, j| (0..da).map(|a| m[(a * db + i, a * db + j)]).sum())
}

fn projector(v: &CVec) -> CMat {
    v * v.adjoint()
}

fn id(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Isotropic state `F |Phi><Phi| + (1 - F)(I - |Phi><Phi|)/(d^2 - 1)`.
fn isotropic(d: usize, f: f64) -> DensityMatrix {
    let phi = projector(maximally_entangled(d).unwrap().amplitudes());
    let n = (d * d) as f64;
    DensityMatrix::new(vec![d, d], phi.scale(f) + (id(d * d) - &phi).scale((1.0 - f) / (n - 1.0))).unwrap()
}

fn werner_boundary() -> DensityMatrix {
    read_state(&fixture("werner-p.json")).unwrap().0
}

// ---- shared computations, reused by the relative-entropy criterion -------

fn bell_state() -> SharedState {
    SharedState::bipartite(singlet().density()).unwrap()
}

fn bell_run() -> &'static (f64, Duration) {
    static CELL: OnceLock<(f64, Duration)> = OnceLock::new();
    CELL.get_or_init(|| {
        let t = Instant::now();
        let v = dc_capacity(2, &bell_state(), &OptConfig::default()).unwrap().value;
        (v, t.elapsed())
    })
}

fn phi3_state() -> SharedState {
    SharedState::bipartite(maximally_entangled(3).unwrap().density()).unwrap()
}

fn phi3_run() -> &'static (f64, Duration) {
    static CELL: OnceLock<(f64, Duration)> = OnceLock::new();
    CELL.get_or_init(|| {
        let t = Instant::now();
        let v = dc_capacity(3, &phi3_state(), &OptConfig::default()).unwrap().value;
        (v, t.elapsed())
    })
}

fn schmidt_angles() -> Vec<f64> {
    (1..=10).map(|k| k as f64 * FRAC_PI_2 / 11.0).collect()
}

fn schmidt_runs() -> &'static Vec<f64> {
    static CELL: OnceLock<Vec<f64>> = OnceLock::new();
    CELL.get_or_init(|| {
        schmidt_angles()
            .into_iter()
            .map(|t| dc_capacity(2, &SharedState::bipartite(schmidt_pair(t).density()).unwrap(), &OptConfig::default()).unwrap().value)
            .collect()
    })
}

fn separable_states() -> Vec<SharedState> {
    (0..20).map(|s| SharedState::bipartite(random_separable(&[2, 2], 1 + s % 6, 500 + s as u64).unwrap()).unwrap()).collect()
}

fn separable_runs() -> &'static Vec<(f64, f64)> {
    static CELL: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    CELL.get_or_init(|| {
        separable_states()
            .iter()
            .map(|s| (dc_capacity(2, s, &OptConfig::default()).unwrap().value, coherent_information(s).unwrap()))
            .collect()
    })
}

fn example_one() -> &'static AdditivityReport {
    static CELL: OnceLock<AdditivityReport> = OnceLock::new();
    CELL.get_or_init(|| additivity_gap(&shared("zero-zero.json"), 2, &shared("bell-pair.json"), 2, &OptConfig::default()).unwrap())
}

/// Ensemble searches are the slowest part of the gate; three restarts per
/// descent is enough for these symmetric configurations.
fn ensemble_config() -> OptConfig {
    OptConfig { restarts: 3, ..OptConfig::default() }
}

fn example_two() -> &'static [f64; 3] {
    static CELL: OnceLock<[f64; 3]> = OnceLock::new();
    CELL.get_or_init(|| {
        let bell = shared("bell.json");
        let cfg = ensemble_config();
        let id4 = read_channel(&fixture("identity-4.json")).unwrap();
        let constant = read_channel(&fixture("constant.json")).unwrap();
        let joint_channel = read_channel(&fixture("identity-4-constant.json")).unwrap();
        let p1 = noisy_dc_capacity(&id4, &bell, 16, &cfg).unwrap().value;
        let p2 = noisy_dc_capacity(&constant, &bell, 4, &cfg).unwrap().value;
        let joint = noisy_dc_capacity(&joint_channel, &shared("bell-pair.json"), 64, &cfg).unwrap().value;
        [p1, p2, joint]
    })
}

// ---- criteria --------------------------------------------------------

#[test]
fn criterion_01_bell_state_carries_two_bits() {
    let (v, t) = *bell_run();
    let pass = (v - 2.0).abs() <= 1e-3 && t <= Duration::from_secs(60);
    report(1, "Bell state, d = 2", pass, format!("value {v:.6}, expected 2, {:.2}s of 60s", t.as_secs_f64()));
}

#[test]
fn criterion_02_maximally_entangled_qutrits() {
    let (v, t) = *phi3_run();
    let want = 2.0 * 3f64.log2();
    let pass = (v - want).abs() <= 1e-3 && t <= Duration::from_secs(300);
    report(2, "maximally entangled qutrits, d = 3", pass, format!("value {v:.6}, expected {want:.6}, {:.2}s of 300s", t.as_secs_f64()));
}

#[test]
fn criterion_03_pure_states_follow_entanglement_entropy() {
    let values = schmidt_runs();
    let worst = schmidt_angles()
        .iter()
        .zip(values)
        .map(|(t, v)| (v - (1.0 + binary_entropy(t.cos().powi(2)))).abs())
        .fold(0.0, f64::max);
    report(3, "pure states over 10 Schmidt angles", worst <= 1e-3, format!("max |DC - (1 + H2(cos^2 t))| = {worst:.2e}"));
}

#[test]
fn criterion_04_separable_states_stay_at_log_d() {
    let runs = separable_runs();
    let worst = runs.iter().map(|(v, _)| (v - 1.0).abs()).fold(0.0, f64::max);
    let max_coherent = runs.iter().map(|(_, ic)| *ic).fold(f64::NEG_INFINITY, f64::max);
    let pass = runs.len() == 20 && worst <= 1e-3 && max_coherent <= 1e-9;
    report(4, "20 random separable states", pass, format!("max |DC - 1| = {worst:.2e}, max coherent information {max_coherent:.2e}"));
}

#[test]
fn criterion_05_weyl_twirl_is_exact() {
    let mut worst: f64 = 0.0;
    for (k, d) in [2usize, 3, 4].into_iter().enumerate() {
        let db = 3;
        let rho = random_state(&[d, db], d * db, 70 + k as u64).unwrap();
        let t = random_channel(d, d, d, 80 + k as u64).unwrap();
        let encoded = t.apply_local(&rho, 0).unwrap();
        let m = encoded.matrix();
        let mut avg = CMat::zeros(d * db, d * db);
        for w in weyl_basis(d) {
            let u = w.kronecker(&id(db));
            avg += &u * m * u.adjoint();
        }
        avg.unscale_mut((d * d) as f64);
        let want = id(d).unscale(d as f64).kronecker(&trace_first(m, d, db));
        worst = worst.max((avg - want).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    report(5, "Weyl twirl for d in {2, 3, 4}", worst <= 1e-12, format!("max entry error {worst:.2e}"));
}

#[test]
fn criterion_06_superadditivity_with_a_product_state() {
    let r = example_one();
    let (p1, p2, j, g) = (r.parts[0].value, r.parts[1].value, r.joint.value, r.gap);
    let pass = (p1 - 1.0).abs() <= 5e-3 && (p2 - 2.0).abs() <= 5e-3 && (j - 4.0).abs() <= 5e-3 && (g - 1.0).abs() <= 5e-3;
    report(6, "|00> with Psi- (x) Psi-", pass, format!("parts {p1:.6} and {p2:.6}, joint {j:.6}, gap {g:+.6}"));
}

#[test]
fn criterion_07_superadditivity_through_noisy_channels() {
    let [p1, p2, j] = *example_two();
    let pass = (p1 - 3.0).abs() <= 5e-3 && (p2 - 0.0).abs() <= 5e-3 && j >= 4.0 - 5e-3;
    report(7, "id4 and constant channel with Psi-", pass, format!("parts {p1:.6} and {p2:.6}, joint {j:.6} (>= 3.995)"));
}

#[test]
fn criterion_08_relative_entropy_bounds_every_capacity() {
    let werner = werner_boundary();
    let mut checks: Vec<(String, f64, f64, bool)> = Vec::new();
    let mut check = |label: String, value: f64, state: &SharedState, d: usize, sigma: &DensityMatrix| {
        let b = ree_bound(state, d, sigma).unwrap();
        checks.push((label, value, b.bound, b.certified));
    };

    check("bell".into(), bell_run().0, &bell_state(), 2, &werner);
    check("phi3".into(), phi3_run().0, &phi3_state(), 3, &isotropic(3, 1.0 / 3.0));
    for (t, v) in schmidt_angles().into_iter().zip(schmidt_runs()) {
        let (a, b) = (t.cos().powi(2), t.sin().powi(2));
        let sigma = DensityMatrix::diagonal(&[2, 2], &[a, 0.0, 0.0, b]).unwrap();
        check(format!("schmidt {t:.3}"), *v, &SharedState::bipartite(schmidt_pair(t).density()).unwrap(), 2, &sigma);
    }
    for (k, (s, (v, _))) in separable_states().iter().zip(separable_runs()).enumerate() {
        check(format!("separable {k}"), *v, s, 2, s.state());
    }
    let zero = shared("zero-zero.json");
    let pair = shared("bell-pair.json");
    // Factors [A1, B1, A2, B2], the Bell-pair fixture's layout.
    let ww = densecap::qmath::tensor(&werner, &werner);
    let r = example_one();
    check("example 1 part 1".into(), r.parts[0].value, &zero, 2, zero.state());
    check("example 1 part 2".into(), r.parts[1].value, &pair, 2, &ww);
    check("example 1 joint".into(), r.joint.value, &zero.tensor(&pair), 4, &densecap::qmath::tensor(zero.state(), &ww));
    let [p1, p2, j] = *example_two();
    let bell = shared("bell.json");
    check("example 2 id4".into(), p1, &bell, 4, &werner);
    check("example 2 constant".into(), p2, &bell, 2, &werner);
    check("example 2 joint".into(), j, &pair, 8, &ww);

    let violations: Vec<_> = checks.iter().filter(|(_, v, b, cert)| !cert || *v > b + 5e-3).collect();
    let bell_bound = ree_bound(&bell_state(), 2, &werner).unwrap();
    let pass = violations.is_empty() && bell_bound.certified && (bell_bound.bound - 2.0).abs() <= 1e-3;
    report(
        8,
        "value <= log2 d + D(rho || sigma) with PPT sigma",
        pass,
        format!("{} capacities checked, {} violations {:?}, Werner-boundary Bell bound {:.6}", checks.len(), violations.len(), violations, bell_bound.bound),
    );
}

#[test]
fn criterion_09_program_orthogonality_dichotomy() {
    let mut rng = stream(909, 0);
    let (mut instances, mut non_orthogonal, mut rejected, mut violations) = (0usize, 0usize, 0usize, Vec::new());
    let mut gate_index = 0u64;
    while non_orthogonal < 1000 || instances < 1500 {
        gate_index += 1;
        let fam = BlockFamily::random(&mut rng);
        for _ in 0..12 {
            let kind = rng.random_range(0..10);
            let (c1, c2) = if kind < 7 {
                let c = rng.random_range(0..fam.classes);
                (c, c)
            } else {
                let c1 = rng.random_range(0..fam.classes);
                (c1, (c1 + rng.random_range(1..fam.classes)) % fam.classes)
            };
            let psi1 = fam.program(c1, &mut rng);
            let psi2 = fam.program(c2, &mut rng);
            instances += 1;
            let v = match program_orthogonality_check(&fam.gate, &psi1, &psi2, 1e-9) {
                Ok(v) => v,
                Err(e) => {
                    violations.push(format!("gate {gate_index}: valid programs rejected: {e}"));
                    continue;
                }
            };
            if v.overlap > 1e-9 {
                non_orthogonal += 1;
            }
            if !v.consistent || v.proportional != (c1 == c2) {
                violations.push(format!("gate {gate_index}: classes {c1},{c2} verdict {v:?}"));
            }
            let (w, _) = program_unitary(&fam.gate, &psi1).unwrap();
            let overlap = fam.units[c1].dotc(&w).norm() / fam.d as f64;
            if (1.0 - overlap).abs() > 1e-6 {
                violations.push(format!("gate {gate_index}: induced unitary off by {:.2e}", 1.0 - overlap));
            }
        }
        // A superposition across two classes induces a mixed-unitary channel.
        let mixed = fam.mixture(&mut rng);
        match program_orthogonality_check(&fam.gate, &mixed, &fam.program(0, &mut rng), 1e-9) {
            Err(Error::NotAProgram { .. }) => rejected += 1,
            other => violations.push(format!("gate {gate_index}: mixture accepted: {other:?}")),
        }
    }
    let pass = violations.is_empty() && non_orthogonal >= 1000;
    report(
        9,
        "orthogonality-or-proportionality",
        pass,
        format!(
            "{instances} program pairs on {gate_index} gates, {non_orthogonal} non-orthogonal, {rejected} non-programs rejected, {} violations {:?}",
            violations.len(),
            violations.iter().take(3).collect::<Vec<_>>()
        ),
    );
}

/// Dense gate `sum_i U_i (x) Q P_i Q^dag` with orthogonal block projectors
/// `P_i` rotated by a Haar `Q`. Blocks are grouped into classes whose units
/// agree up to a phase, so programs in one class induce the same unitary.
struct BlockFamily {
    gate: ProgrammableGate,
    d: usize,
    q: CMat,
    classes: usize,
    units: Vec<CMat>,
    /// Program basis indices belonging to each class.
    support: Vec<Vec<usize>>,
}

impl BlockFamily {
    fn random(rng: &mut impl Rng) -> BlockFamily {
        let d = rng.random_range(2..=3);
        let blocks = rng.random_range(2..=4);
        let sizes: Vec<usize> = (0..blocks).map(|_| rng.random_range(1..=2)).collect();
        let dp: usize = sizes.iter().sum();
        let mut class_of = vec![0, 1];
        for _ in 2..blocks {
            let n = *class_of.iter().max().unwrap() + 1;
            class_of.push(rng.random_range(0..=n));
        }
        let classes = *class_of.iter().max().unwrap() + 1;
        let units: Vec<CMat> = (0..classes).map(|_| haar_unitary(d, rng)).collect();
        let q = haar_unitary(dp, rng);
        let mut g = CMat::zeros(d * dp, d * dp);
        let mut support = vec![Vec::new(); classes];
        let mut start = 0;
        for (b, &size) in sizes.iter().enumerate() {
            let mut p = CMat::zeros(dp, dp);
            for k in start..start + size {
                p[(k, k)] = c(1.0, 0.0);
                support[class_of[b]].push(k);
            }
            start += size;
            let phase = c(0.0, rng.random_range(0.0..2.0 * PI)).exp();
            g += (&units[class_of[b]] * phase).kronecker(&(&q * p * q.adjoint()));
        }
        BlockFamily { gate: ProgrammableGate::dense(d, dp, g).unwrap(), d, q, classes, units, support }
    }

    fn program(&self, class: usize, rng: &mut impl Rng) -> PureState {
        let mut v = CVec::zeros(self.q.nrows());
        for &k in &self.support[class] {
            v[k] = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        PureState::normalized(vec![v.len()], &self.q * v).unwrap()
    }

    fn mixture(&self, rng: &mut impl Rng) -> PureState {
        let a = self.program(0, rng);
        let b = self.program(1, rng);
        PureState::normalized(vec![a.side()], a.amplitudes() + b.amplitudes()).unwrap()
    }
}

#[test]
fn criterion_10_parallel_gates_cannot_make_cnot() {
    let cnot = densecap::qmath::states::cnot();
    let ix = control_gate(vec![id(2), pauli(1)]).unwrap();
    let paulis = control_gate((0..4).map(pauli).collect()).unwrap();
    let cfg = OptConfig { restarts: 4, ..OptConfig::default() };

    // Grid oracle: control{I,X} (x) control{I,X} on 10^4 program points.
    // Each point induces a mixture of X^a (x) X^b with weights |psi_ab|^2;
    // its distance from CNOT on a few inputs bounds the sup error below.
    let grid_min = grid_oracle(10_000);
    let ix_rep = scalability_witness(&ix, &ix, &cnot, &cfg).unwrap();
    let pauli_rep = scalability_witness(&paulis, &paulis, &cnot, &cfg).unwrap();

    let mut product_failures = Vec::new();
    let mut cnot_with_nets = f64::INFINITY;
    let mut product_errors = Vec::new();
    let mut rng = stream(1010, 0);
    let targets: Vec<CMat> = (0..2)
        .map(|_| haar_unitary(2, &mut rng).kronecker(&haar_unitary(2, &mut rng)))
        .chain(std::iter::once(pauli(1).kronecker(&hadamard())))
        .collect();
    for eps in [0.5, 0.3, 0.2, 0.1] {
        let ng = net_gate(eps, 2, 10).unwrap();
        for (k, u) in targets.iter().enumerate() {
            let r = scalability_witness(&ng.gate, &ng.gate, u, &cfg).unwrap();
            product_errors.push(r.best_error);
            if r.best_error > 2.0 * eps + 0.05 {
                product_failures.push(format!("eps {eps} target {k}: {:.4}", r.best_error));
            }
        }
        let r = scalability_witness(&ng.gate, &ng.gate, &cnot, &cfg).unwrap();
        cnot_with_nets = cnot_with_nets.min(r.certified_lower_bound);
    }
    let pass = grid_min >= ENTANGLING_THRESHOLD
        && ix_rep.certified_lower_bound >= ENTANGLING_THRESHOLD
        && pauli_rep.best_error > ENTANGLING_THRESHOLD
        && pauli_rep.certified_lower_bound > ENTANGLING_THRESHOLD
        && cnot_with_nets > ENTANGLING_THRESHOLD
        && product_failures.is_empty();
    report(
        10,
        "scalability witness",
        pass,
        format!(
            "grid min {grid_min:.4} over 10^4 programs; Pauli gates vs CNOT best {:.4}, certified >= {:.4}; nets vs CNOT certified >= {cnot_with_nets:.4}; \
             product targets max error {:.4}, failures {product_failures:?} (threshold {ENTANGLING_THRESHOLD})",
            pauli_rep.best_error,
            pauli_rep.certified_lower_bound,
            product_errors.iter().cloned().fold(0.0, f64::max),
        ),
    );
}

fn hadamard() -> CMat {
    let s = 0.5f64.sqrt();
    CMat::from_row_slice(2, 2, &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)])
}

fn grid_oracle(points: usize) -> f64 {
    let cnot = densecap::qmath::states::cnot();
    let x = pauli(1);
    let units: Vec<CMat> = (0..4).map(|ab| {
        let ua = if ab / 2 == 1 { x.clone() } else { id(2) };
        let ub = if ab % 2 == 1 { x.clone() } else { id(2) };
        ua.kronecker(&ub)
    }).collect();
    let s = 0.5f64.sqrt();
    let plus = CVec::from_vec(vec![c(s, 0.0), c(s, 0.0)]);
    let zero = CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]);
    let mut rng = stream(1011, 0);
    let mut inputs = vec![plus.kronecker(&zero), plus.kronecker(&CVec::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]))];
    for _ in 0..4 {
        let a = densecap::channels::random::haar_vector(2, &mut rng);
        let b = densecap::channels::random::haar_vector(2, &mut rng);
        inputs.push(a.kronecker(&b));
    }
    let mut best = f64::INFINITY;
    for _ in 0..points {
        let psi = densecap::channels::random::haar_vector(4, &mut rng);
        let weights: Vec<f64> = psi.iter().map(|z| z.norm_sqr()).collect();
        let err = inputs
            .iter()
            .map(|v| {
                let want = projector(&(&cnot * v));
                let got = units.iter().zip(&weights).fold(CMat::zeros(4, 4), |acc, (u, &w)| acc + projector(&(u * v)).scale(w));
                trace_norm(&(want - got))
            })
            .fold(0.0, f64::max);
        best = best.min(err);
    }
    best
}

#[test]
fn criterion_11_depolarizing_channel_through_a_certified_gate() {
    let em = pauli_channel_emulator(0.1).unwrap();
    let mut worst: f64 = 0.0;
    let mut methods = Vec::new();
    for (k, p) in [0.05, 0.25, 0.5, 0.75, 1.0].into_iter().enumerate() {
        let t = QuantumChannel::depolarizing(2, p).unwrap();
        let r = emulate_encoding(&t, &em.gate, 4, 0.1, 1100 + k as u64).unwrap();
        worst = worst.max(r.measured_error);
        methods.push(r.method);
    }
    let pass = em.certified_epsilon <= 0.1 && worst <= 0.1 && methods.iter().all(|m| m.starts_with("haar-200"));
    report(
        11,
        "depolarizing emulation at epsilon 0.1",
        pass,
        format!("gate certified to {:.4} over {} programs, worst measured error {worst:.4} ({})", em.certified_epsilon, em.points.len(), methods[0]),
    );
}

#[test]
fn criterion_12_numerical_hygiene() {
    // Gradient against central differences along Cayley curves, which stay
    // on the isometry manifold.
    let mut rng = stream(1212, 0);
    let mut worst_grad: f64 = 0.0;
    for k in 0..20u64 {
        let (d_in, d_out, d_env, db) = [(2, 2, 2, 2), (2, 3, 2, 2), (3, 2, 3, 2), (2, 2, 4, 3)][k as usize % 4];
        let rho = random_state(&[d_in, db], d_in * db, 1300 + k).unwrap();
        let v = haar_isometry(d_out * d_env, d_in, &mut rng);
        let iso = StinespringIsometry::new(d_in, d_out, d_env, v.clone()).unwrap();
        let g = entropy_gradient(&iso, &rho, 0).unwrap();
        let n = d_out * d_env;
        let h0 = densecap::channels::haar_unitary(n, &mut rng);
        let a = (&h0 - h0.adjoint()).scale(0.5);
        let curve = |t: f64| {
            let half = a.scale(t / 2.0);
            let cayley = (id(n) - &half).try_inverse().unwrap() * (id(n) + &half);
            local_output_entropy(&StinespringIsometry::new(d_in, d_out, d_env, cayley * &v).unwrap(), &rho, 0).unwrap()
        };
        let h = 1e-5;
        let fd = (curve(h) - curve(-h)) / (2.0 * h);
        let an: f64 = g.iter().zip((&a * &v).iter()).map(|(x, y)| (x.conj() * y).re).sum();
        worst_grad = worst_grad.max((fd - an).abs() / an.abs().max(1.0));
    }

    let mut worst_choi: f64 = 0.0;
    for k in 0..100u64 {
        let (d_in, d_out) = (2 + k as usize % 3, 1 + k as usize % 4);
        let d_env = (1 + k as usize % 5).max(d_in.div_ceil(d_out));
        let t = random_channel(d_in, d_out, d_env, 1400 + k).unwrap();
        let back = undilate(&dilate(&t).unwrap());
        worst_choi = worst_choi.max(trace_norm(&(t.choi().matrix - back.choi().matrix)));
    }

    let mut gaps = vec![example_one().gap];
    for (kind, count) in [(ScanKind::Separable, 3), (ScanKind::Random, 3), (ScanKind::Pure, 3)] {
        gaps.extend(scan_additivity(count, 2, 2, 1500, kind, &OptConfig::default()).unwrap().iter().map(|r| r.gap));
    }
    let min_gap = gaps.iter().cloned().fold(f64::INFINITY, f64::min);

    let pass = worst_grad <= 1e-4 && worst_choi <= 1e-10 && min_gap >= -5e-3;
    report(
        12,
        "numerical hygiene",
        pass,
        format!(
            "gradient rel. error {worst_grad:.2e} on 20 instances; Stinespring round trip Choi error {worst_choi:.2e} on 100 channels; min scan gap {min_gap:+.2e} over {} pairs",
            gaps.len()
        ),
    );
}
