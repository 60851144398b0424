//! Command-line front end. Machine output (JSON, or CSV for scans) goes to
//! stdout; a short human-readable summary goes to stderr.
//!
//! Exit codes: 0 ok, 2 parse or usage, 3 invariant, 4 size guard,
//! 5 non-convergence under `--strict`, 6 precondition (not a program).

mod manifest;
mod specs;

pub use manifest::{InputRef, RunManifest};

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::capacity::scan::{scan_additivity, scan_pair, to_csv, ScanKind};
use crate::capacity::{
    coherent_information, dc_capacity, dc_capacity_block, dc_capacity_multicopy, noisy_dc_capacity, ree_bound, CapacityResult, SharedState, MAX_SIDE,
};
use crate::channels::{read_channel, QuantumChannel};
use crate::error::{Error, Result};
use crate::optimize::OptConfig;
use crate::pqg::{emulate_encoding, net_gate, program_orthogonality_check, scalability_witness, GateFile, ENTANGLING_THRESHOLD};
use crate::qmath::io::{read_json, read_state};
use crate::qmath::{partial_trace, von_neumann_entropy};

/// Environment variable supplying the default seed.
pub const SEED_ENV: &str = "DENSECAP_SEED";

/// Slack added to `eps1 + eps2` when judging product targets.
pub const PRODUCT_SLACK: f64 = 0.05;

#[derive(Parser, Debug)]
#[command(name = "densecap", version, about = "Dense-coding capacities of shared quantum states and programmable gate numerics")]
pub struct Cli {
    /// Skip the summary table on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    /// Also write the run manifest to this file.
    #[arg(long, global = true, value_name = "FILE")]
    manifest_out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Entropies, marginals and coherent information of a state file.
    Entropy {
        state: PathBuf,
    },
    /// Dense-coding capacity (noiseless, block, multi-copy or noisy).
    Dc(DcArgs),
    /// Additivity gaps over random or given pairs of states, as CSV.
    ScanAdditivity(ScanArgs),
    /// Programmable quantum gate tools.
    #[command(subcommand)]
    Pqg(PqgCommand),
    /// Re-run a recorded command and compare with a previous output.
    Replay {
        /// Manifest file, or any JSON output that embeds one.
        manifest: PathBuf,
        /// Output to compare against; defaults to the manifest file itself
        /// when that is a full output.
        #[arg(long, value_name = "FILE")]
        expect: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
struct OptArgs {
    /// Random restarts per descent.
    #[arg(long)]
    restarts: Option<usize>,
    /// Iteration cap per descent.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Seed. Falls back to DENSECAP_SEED, then the config file, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// JSON file with optimizer settings; flags take precedence.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DcArgs {
    state: PathBuf,
    /// Dimension of the noiseless channel. Implied by --channel.
    #[arg(long)]
    d: Option<usize>,
    #[command(flatten)]
    opt: OptArgs,
    /// Evaluate DC(d^k, rho^k) / k.
    #[arg(long, conflicts_with = "block")]
    copies: Option<usize>,
    /// Block-coding estimate over n uses.
    #[arg(long)]
    block: Option<usize>,
    /// Noisy channel file; switches to the ensemble optimizer.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["copies", "block"])]
    channel: Option<PathBuf>,
    /// Encodings per ensemble with --channel (default: input dimension squared).
    #[arg(long, requires = "channel")]
    ensemble_size: Option<usize>,
    /// Exit with code 5 if the optimizer did not converge.
    #[arg(long)]
    strict: bool,
    /// State file for the relative-entropy upper bound log2 d + D(rho || sigma).
    #[arg(long, value_name = "FILE", conflicts_with = "channel")]
    ree_sigma: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScanArgs {
    /// Number of random pairs.
    #[arg(long, default_value_t = 0)]
    count: usize,
    #[arg(long, default_value_t = 2)]
    d1: usize,
    #[arg(long, default_value_t = 2)]
    d2: usize,
    /// separable, random or pure.
    #[arg(long, default_value = "separable")]
    kind: String,
    /// Scan one given pair of state files instead of random ones.
    #[arg(long, num_args = 2, value_names = ["RHO", "SIGMA"], conflicts_with = "count")]
    pair: Option<Vec<PathBuf>>,
    /// Write the CSV here; the manifest goes next to it as FILE.manifest.json.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[command(flatten)]
    opt: OptArgs,
}

#[derive(Subcommand, Debug)]
enum PqgCommand {
    /// Build an epsilon-net gate on C^d and certify it.
    BuildNet {
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the gate file here.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Check two programs against the orthogonality dichotomy.
    CheckOrthogonality {
        /// ix, pauli, swap, net:EPS[:D], pauli-emulator:EPS or a gate file.
        #[arg(long)]
        gate: String,
        /// Basis index, inline [[re,im],...] array or file.
        #[arg(long)]
        psi1: String,
        #[arg(long)]
        psi2: String,
        #[arg(long, default_value_t = 1e-9)]
        overlap_tol: f64,
    },
    /// Lower-bound how well two gates in parallel can implement a target.
    Witness {
        /// cnot, cz, swap, a letter product such as X⊗Z, or a matrix file.
        #[arg(long)]
        target: String,
        #[arg(long, num_args = 2, value_names = ["G1", "G2"], default_values = ["pauli", "pauli"])]
        gates: Vec<String>,
        #[command(flatten)]
        opt: OptArgs,
    },
    /// Run an encoding channel through a gate with a dilation ancilla.
    Emulate {
        #[arg(long, default_value = "pauli-emulator:0.1")]
        gate: String,
        /// Channel file to emulate.
        #[arg(long, value_name = "FILE", conflicts_with = "depolarizing")]
        channel: Option<PathBuf>,
        /// Emulate the qubit depolarizing channel with this parameter.
        #[arg(long)]
        depolarizing: Option<f64>,
        /// Ancilla dimension of the dilation.
        #[arg(long, default_value_t = 4)]
        ancilla: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// What a command produced, before anything is written.
#[derive(Debug)]
pub struct Output {
    pub body: Body,
    pub table: String,
    pub exit: i32,
    pub manifest: RunManifest,
    /// Where the body goes instead of stdout.
    dest: Option<PathBuf>,
    /// Side files such as a generated gate.
    files: Vec<(PathBuf, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    /// Carries the manifest under `"manifest"`.
    Json(Value),
    Csv(String),
}

impl Body {
    pub fn render(&self) -> String {
        match self {
            Body::Json(v) => {
                let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
                s.push('\n');
                s
            }
            Body::Csv(s) => s.clone(),
        }
    }
}

struct Ctx {
    env_seed: Option<u64>,
    inputs: Vec<InputRef>,
}

impl Ctx {
    fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(InputRef::hash(path)?);
        Ok(())
    }

    fn seed(&self, flag: Option<u64>) -> u64 {
        flag.or(self.env_seed).unwrap_or(0)
    }
}

impl OptArgs {
    fn resolve(&self, ctx: &mut Ctx) -> Result<OptConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                ctx.input(path)?;
                read_json(path)?
            }
            None => OptConfig::default(),
        };
        if let Some(r) = self.restarts {
            cfg.restarts = r;
        }
        if let Some(m) = self.max_iters {
            cfg.max_iters = m;
        }
        if let Some(s) = self.seed.or(ctx.env_seed) {
            cfg.seed = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `args` (without the program name), runs the command and writes
/// its output. Returns the process exit code.
pub fn run(args: &[String], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let env_seed = match std::env::var(SEED_ENV) {
        Ok(s) => match s.trim().parse() {
            Ok(v) => Some(v),
            Err(_) => {
                let _ = writeln!(stderr, "error: {SEED_ENV}={s:?} is not an unsigned integer");
                return 2;
            }
        },
        Err(_) => None,
    };
    let cli = match parse(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                0
            } else {
                let _ = write!(stderr, "{e}");
                2
            };
        }
    };
    let result = execute(&cli, args, env_seed).and_then(|out| emit(&cli, out, stdout, stderr));
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn parse(args: &[String]) -> std::result::Result<Cli, clap::Error> {
    Cli::try_parse_from(std::iter::once("densecap".to_string()).chain(args.iter().cloned()))
}

fn emit(cli: &Cli, out: Output, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    for (path, text) in &out.files {
        std::fs::write(path, text)?;
    }
    let text = out.body.render();
    match &out.dest {
        Some(path) => std::fs::write(path, &text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    let manifest_text = serde_json::to_string_pretty(&out.manifest)? + "\n";
    if let Some(path) = &cli.manifest_out {
        std::fs::write(path, &manifest_text)?;
    }
    if let (Body::Csv(_), None) = (&out.body, &cli.manifest_out) {
        match &out.dest {
            Some(path) => std::fs::write(sidecar(path), &manifest_text)?,
            None => writeln!(stderr, "manifest: {}", serde_json::to_string(&out.manifest)?)?,
        }
    }
    if !cli.quiet {
        stderr.write_all(out.table.as_bytes())?;
    }
    Ok(out.exit)
}

/// `scan.csv` -> `scan.csv.manifest.json`.
pub fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn execute(cli: &Cli, args: &[String], env_seed: Option<u64>) -> Result<Output> {
    let mut ctx = Ctx { env_seed, inputs: Vec::new() };
    let (name, result) = match &cli.command {
        Command::Entropy { state } => ("entropy", entropy(state, &mut ctx)),
        Command::Dc(a) => ("dc", dc(a, &mut ctx)),
        Command::ScanAdditivity(a) => ("scan-additivity", scan(a, &mut ctx)),
        Command::Pqg(PqgCommand::BuildNet { epsilon, d, seed, out }) => ("pqg build-net", build_net(*epsilon, *d, *seed, out, &mut ctx)),
        Command::Pqg(PqgCommand::CheckOrthogonality { gate, psi1, psi2, overlap_tol }) => {
            ("pqg check-orthogonality", check_orthogonality(gate, psi1, psi2, *overlap_tol, &mut ctx))
        }
        Command::Pqg(PqgCommand::Witness { target, gates, opt }) => ("pqg witness", witness(target, gates, opt, &mut ctx)),
        Command::Pqg(PqgCommand::Emulate { gate, channel, depolarizing, ancilla, epsilon, seed }) => {
            ("pqg emulate", emulate(gate, channel.as_deref(), *depolarizing, *ancilla, *epsilon, *seed, &mut ctx))
        }
        Command::Replay { manifest, expect } => ("replay", replay(manifest, expect.as_deref(), &mut ctx)),
    };
    let done = result?;
    let manifest = RunManifest::new(name, args, env_seed, ctx.inputs, done.config);
    let body = match done.body {
        Body::Json(mut v) => {
            v.as_object_mut().expect("command results are JSON objects").insert("manifest".into(), serde_json::to_value(&manifest)?);
            Body::Json(v)
        }
        csv => csv,
    };
    Ok(Output { body, table: done.table, exit: done.exit, manifest, dest: done.dest, files: done.files })
}

/// A command's result before the manifest is attached.
struct Done {
    body: Body,
    config: Value,
    table: String,
    exit: i32,
    dest: Option<PathBuf>,
    files: Vec<(PathBuf, String)>,
}

impl Done {
    fn json<T: Serialize>(result: &T, config: Value, table: String) -> Result<Done> {
        Ok(Done { body: Body::Json(serde_json::to_value(result)?), config, table, exit: 0, dest: None, files: Vec::new() })
    }
}

fn table(rows: &[(&str, String)]) -> String {
    let w = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter().map(|(k, v)| format!("{k:<w$}  {v}\n")).collect()
}

fn load_state(path: &Path, ctx: &mut Ctx) -> Result<SharedState> {
    ctx.input(path)?;
    let (rho, sender) = read_state(path)?;
    SharedState::new(rho, sender.unwrap_or_else(|| vec![0]))
}

fn entropy(path: &Path, ctx: &mut Ctx) -> Result<Done> {
    let s = load_state(path, ctx)?;
    let h = von_neumann_entropy(s.state())?;
    let h_a = von_neumann_entropy(&partial_trace(s.state(), s.sender())?)?;
    let h_b = von_neumann_entropy(&s.receiver_state()?)?;
    let coherent = coherent_information(&s)?;
    let result = json!({
        "H": h,
        "H_A": h_a,
        "H_B": h_b,
        "coherent": coherent,
        "purity": s.state().purity(),
        "dims": s.state().dims(),
        "sender": s.sender(),
    });
    let t = table(&[
        ("H(AB)", format!("{h:.6}")),
        ("H(A)", format!("{h_a:.6}")),
        ("H(B)", format!("{h_b:.6}")),
        ("coherent", format!("{coherent:.6}")),
    ]);
    Done::json(&result, json!({ "state": path }), t)
}

fn dc(a: &DcArgs, ctx: &mut Ctx) -> Result<Done> {
    let state = load_state(&a.state, ctx)?;
    let cfg = a.opt.resolve(ctx)?;
    let result: CapacityResult = if let Some(path) = &a.channel {
        ctx.input(path)?;
        let phi = read_channel(path)?;
        if let Some(d) = a.d {
            if d != phi.d_in() {
                return Err(Error::InvalidArgument(format!("--d {d} disagrees with the channel input dimension {}", phi.d_in())));
            }
        }
        let m = a.ensemble_size.unwrap_or(phi.d_in() * phi.d_in());
        if m == 0 {
            return Err(Error::InvalidArgument("ensemble size must be positive".into()));
        }
        noisy_dc_capacity(&phi, &state, m, &cfg)?
    } else {
        let d = a.d.ok_or_else(|| Error::InvalidArgument("--d is required without --channel".into()))?;
        match (a.copies, a.block) {
            (Some(k), _) => dc_capacity_multicopy(k, d, &state, &cfg)?,
            (_, Some(n)) => dc_capacity_block(n, d, &state, &cfg)?,
            _ => dc_capacity(d, &state, &cfg)?,
        }
    };
    let mut v = serde_json::to_value(&result)?;
    let mut rows = vec![
        ("quantity", format!("{:?}", result.quantity)),
        ("value", format!("{:.6} (lower bound)", result.value)),
        ("converged", result.converged.to_string()),
    ];
    if let Some(dec) = result.decomposition {
        rows.push(("log2 d", format!("{:.6}", dec.log_d)));
        rows.push(("H(B)", format!("{:.6}", dec.entropy_b)));
        rows.push(("min H", format!("{:.6}", dec.min_entropy)));
    }
    if let Some(ceiling) = result.ceiling() {
        v["ceiling"] = json!(ceiling);
    }
    if let Some(path) = &a.ree_sigma {
        ctx.input(path)?;
        let (sigma, _) = read_state(path)?;
        let d = a.d.expect("checked above");
        let bound = ree_bound(&state, d, &sigma)?;
        rows.push(("ree bound", format!("{:.6} (certified: {})", bound.bound, bound.certified)));
        v["ree_bound"] = serde_json::to_value(bound)?;
    }
    rows.push(("seed", cfg.seed.to_string()));
    let config = json!({
        "d": a.d,
        "copies": a.copies,
        "block": a.block,
        "ensemble_size": a.ensemble_size,
        "strict": a.strict,
        "optimizer": cfg,
    });
    let mut done = Done { body: Body::Json(v), config, table: table(&rows), exit: 0, dest: None, files: Vec::new() };
    if a.strict && !result.converged {
        done.table.push_str(&format!("error: {}\n", Error::NotConverged("best descent stopped before the gradient tolerance".into())));
        done.exit = Error::NotConverged(String::new()).exit_code();
    }
    Ok(done)
}

fn scan(a: &ScanArgs, ctx: &mut Ctx) -> Result<Done> {
    let kind: ScanKind = a.kind.parse()?;
    let cfg = a.opt.resolve(ctx)?;
    let rows = match &a.pair {
        Some(paths) => {
            let rho = load_state(&paths[0], ctx)?;
            let sigma = load_state(&paths[1], ctx)?;
            vec![scan_pair(0, cfg.seed, &rho, a.d1, &sigma, a.d2, &cfg)?]
        }
        None => {
            // Random states are two-qubit; check the joint size even when
            // there is nothing to scan.
            let side = a.d1.saturating_mul(a.d2).saturating_mul(4);
            if side > MAX_SIDE {
                return Err(Error::Guard(format!("encoded joint state has side {side} > {MAX_SIDE}")));
            }
            scan_additivity(a.count, a.d1, a.d2, cfg.seed, kind, &cfg)?
        }
    };
    let worst = rows.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min);
    let t = table(&[
        ("instances", rows.len().to_string()),
        ("min gap", if rows.is_empty() { "-".into() } else { format!("{worst:.6}") }),
        ("seed", cfg.seed.to_string()),
    ]);
    let config = json!({
        "count": a.count,
        "d1": a.d1,
        "d2": a.d2,
        "kind": kind,
        "pair": a.pair,
        "optimizer": cfg,
    });
    Ok(Done { body: Body::Csv(to_csv(&rows)), config, table: t, exit: 0, dest: a.out.clone(), files: Vec::new() })
}

fn build_net(epsilon: f64, d: usize, seed: Option<u64>, out: &Option<PathBuf>, ctx: &mut Ctx) -> Result<Done> {
    let seed = ctx.seed(seed);
    let ng = net_gate(epsilon, d, seed)?;
    let result = json!({
        "d_P": ng.gate.d_prog(),
        "net": ng.net,
        "certificate": ng.certificate,
        "gate_file": out,
    });
    let t = table(&[
        ("programs", ng.gate.d_prog().to_string()),
        ("covering radius", format!("{:.6}", ng.net.covering_radius)),
        ("certified max", format!("{:.6}", ng.certificate.max_error)),
        ("passed", ng.certificate.passed.to_string()),
    ]);
    let mut done = Done::json(&result, json!({ "epsilon": epsilon, "d": d, "seed": seed }), t)?;
    if let Some(path) = out {
        done.files.push((path.clone(), serde_json::to_string(&GateFile::from_gate(&ng.gate))? + "\n"));
    }
    if !ng.certificate.passed {
        done.exit = 3;
    }
    Ok(done)
}

fn check_orthogonality(gate: &str, psi1: &str, psi2: &str, overlap_tol: f64, ctx: &mut Ctx) -> Result<Done> {
    let seed = ctx.seed(None);
    let g = specs::gate(gate, seed, &mut ctx.inputs)?;
    let p1 = specs::program(psi1, g.gate.d_prog(), &mut ctx.inputs)?;
    let p2 = specs::program(psi2, g.gate.d_prog(), &mut ctx.inputs)?;
    let verdict = program_orthogonality_check(&g.gate, &p1, &p2, overlap_tol)?;
    let t = table(&[
        ("consistent", verdict.consistent.to_string()),
        ("proportional", verdict.proportional.to_string()),
        ("overlap", format!("{:.3e}", verdict.overlap)),
    ]);
    let config = json!({ "gate": gate, "psi1": psi1, "psi2": psi2, "overlap_tol": overlap_tol, "seed": seed });
    let mut done = Done::json(&verdict, config, t)?;
    if !verdict.consistent {
        done.exit = 3;
    }
    Ok(done)
}

fn witness(target: &str, gates: &[String], opt: &OptArgs, ctx: &mut Ctx) -> Result<Done> {
    let cfg = opt.resolve(ctx)?;
    let t = specs::target(target, &mut ctx.inputs)?;
    let g1 = specs::gate(&gates[0], cfg.seed, &mut ctx.inputs)?;
    let g2 = specs::gate(&gates[1], cfg.seed, &mut ctx.inputs)?;
    let report = scalability_witness(&g1.gate, &g2.gate, &t.unitary, &cfg)?;
    let baseline = t.product.then_some(g1.epsilon + g2.epsilon + PRODUCT_SLACK);
    let mut v = serde_json::to_value(&report)?;
    v["target"] = json!(target);
    v["gates"] = json!([g1.label, g2.label]);
    v["gate_details"] = json!([g1.detail, g2.detail]);
    v["product_target"] = json!(t.product);
    v["baseline"] = json!(baseline);
    v["within_baseline"] = json!(baseline.map(|b| report.best_error <= b));
    v["exceeds_threshold"] = json!(report.best_error > ENTANGLING_THRESHOLD);
    let mut rows = vec![
        ("best error", format!("{:.6} ({})", report.best_error, report.best_error_method)),
        ("certified lower bound", format!("{:.6}", report.certified_lower_bound)),
        ("search", format!("{} (dim {})", report.search, report.search_dim)),
    ];
    if let Some(b) = baseline {
        rows.push(("baseline", format!("{b:.6}")));
    }
    let config = json!({ "target": target, "gates": gates, "optimizer": cfg });
    Ok(Done { body: Body::Json(v), config, table: table(&rows), exit: 0, dest: None, files: Vec::new() })
}

#[allow(clippy::too_many_arguments)]
fn emulate(gate: &str, channel: Option<&Path>, depolarizing: Option<f64>, ancilla: usize, epsilon: f64, seed: Option<u64>, ctx: &mut Ctx) -> Result<Done> {
    let seed = ctx.seed(seed);
    let t = match (channel, depolarizing) {
        (Some(path), None) => {
            ctx.input(path)?;
            read_channel(path)?
        }
        (None, Some(p)) => QuantumChannel::depolarizing(2, p)?,
        _ => return Err(Error::InvalidArgument("give exactly one of --channel or --depolarizing".into())),
    };
    let g = specs::gate(gate, seed, &mut ctx.inputs)?;
    let report = emulate_encoding(&t, &g.gate, ancilla, epsilon, seed)?;
    let mut v = serde_json::to_value(&report)?;
    v["gate"] = json!(g.label);
    v["gate_detail"] = json!(g.detail);
    let rows = [
        ("measured error", format!("{:.6} ({})", report.measured_error, report.method)),
        ("choi distance", format!("{:.6}", report.choi_distance)),
        ("within epsilon", report.within_epsilon.to_string()),
    ];
    let config = json!({ "gate": gate, "depolarizing": depolarizing, "ancilla": ancilla, "epsilon": epsilon, "seed": seed });
    Ok(Done { body: Body::Json(v), config, table: table(&rows), exit: 0, dest: None, files: Vec::new() })
}

fn replay(path: &Path, expect: Option<&Path>, ctx: &mut Ctx) -> Result<Done> {
    ctx.input(path)?;
    let recorded: Value = read_json(path)?;
    let m = RunManifest::from_json(&recorded)?;
    if m.command == "replay" {
        return Err(Error::InvalidArgument("cannot replay a replay".into()));
    }
    let cli = parse(&m.args).map_err(|e| Error::Parse(format!("recorded arguments no longer parse: {e}")))?;
    let out = execute(&cli, &m.args, m.env_seed)?;
    let expected = match expect {
        Some(p) => {
            ctx.input(p)?;
            Some(std::fs::read_to_string(p)?)
        }
        None if recorded.get("manifest").is_some() => Some(std::fs::read_to_string(path)?),
        None => None,
    };
    let matches = match &expected {
        None => None,
        Some(text) => Some(match &out.body {
            Body::Csv(csv) => csv == text,
            Body::Json(_) => {
                let fresh: Value = serde_json::from_str(&out.body.render())?;
                let old: Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("expected output: {e}")))?;
                manifest::without_timestamp(fresh) == manifest::without_timestamp(old)
            }
        }),
    };
    let changed = m.changed_inputs();
    let output = match &out.body {
        Body::Json(v) => v.clone(),
        Body::Csv(s) => json!(s),
    };
    let result = json!({
        "command": m.command,
        "matches": matches,
        "changed_inputs": changed,
        "exit": out.exit,
        "output": output,
    });
    let t = table(&[
        ("command", m.command.clone()),
        ("matches", matches.map_or("not compared".into(), |b| b.to_string())),
        ("changed inputs", changed.len().to_string()),
    ]);
    let mut done = Done::json(&result, json!({ "replayed": path }), t)?;
    if matches == Some(false) {
        done.exit = 3;
    }
    Ok(done)
}
