//! Command-line front end for the hermit synthesis library.
//!
//! Subcommands cover single-qubit two-reflection synthesis, controlled
//! two-qubit synthesis, circuit-vs-matrix verification, gate counting,
//! gate-set rewriting, and built-in reference circuits. Output is
//! human-readable text by default; `--json` switches to JSON with
//! 17-significant-digit floats for exact round-trips.
//!
//! Exit codes: 0 success, 1 verification negative, 2 input error,
//! 3 internal synthesis failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

use hermit::batch::par_map;
use hermit::bloch::rotation_matrix;
use hermit::cu4::{build_cu4, BasisChoice, Layout};
use hermit::hermitian::{builtin, hermitize, GateSet, BUILTIN_NAMES};
use hermit::io::{self, CircuitFile};
use hermit::ir::{assert_equiv, count_gates, SynthesisReport};
use hermit::single_qubit::two_pi_factorize;
use hermit::tol;
use hermit::{Axis, Circuit, Connectivity, Error, GateCounts, GateKind, GateOp, UnitaryMatrix};

#[derive(Parser)]
#[command(
    name = "hermit",
    version,
    about = "Compile unitaries into pi-rotation circuits and verify them",
    propagate_version = true
)]
struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Factor a 2x2 unitary into two pi-rotations.
    Synth1q(Synth1qArgs),
    /// Compile a controlled 4x4 unitary on three qubits.
    SynthCu4(SynthCu4Args),
    /// Check a circuit against a target matrix up to global phase.
    Verify(VerifyArgs),
    /// Print a built-in reference circuit.
    Builtin(BuiltinArgs),
    /// Tally the gates of a circuit file.
    Count(CountArgs),
    /// Rewrite a circuit into a named gate set.
    Hermitize(HermitizeArgs),
}

#[derive(Args)]
#[command(group = ArgGroup::new("input").required(true).args(["matrix", "axis", "batch"]))]
struct Synth1qArgs {
    /// Matrix file: JSON {"dim": 2, "entries": [[re, im], ...]}.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Rotation axis as spherical angles theta phi (radians).
    #[arg(long, num_args = 2, value_names = ["THETA", "PHI"], allow_negative_numbers = true, requires = "angle")]
    axis: Option<Vec<f64>>,
    /// Rotation angle lambda (radians), used with --axis.
    #[arg(long, allow_negative_numbers = true, requires = "axis")]
    angle: Option<f64>,
    /// Write the circuit JSON to this file.
    #[arg(long, conflicts_with = "batch")]
    out: Option<PathBuf>,
    /// Synthesize every .json matrix file in this directory.
    #[arg(long)]
    batch: Option<PathBuf>,
    /// Output directory for batch results (default: the batch directory).
    #[arg(long, requires = "batch")]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
#[command(group = ArgGroup::new("input").required(true).args(["matrix", "batch"]))]
struct SynthCu4Args {
    /// Matrix file: JSON {"dim": 4, "entries": [[re, im], ...]}.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Wire layout for the three qubits.
    #[arg(long, value_enum, default_value_t = LayoutArg::A2a)]
    layout: LayoutArg,
    /// Single-qubit decomposition basis.
    #[arg(long, value_enum, default_value_t = BasisArg::Zy)]
    basis: BasisArg,
    /// Write the circuit JSON to this file.
    #[arg(long, conflicts_with = "batch")]
    out: Option<PathBuf>,
    /// Synthesize every .json matrix file in this directory.
    #[arg(long)]
    batch: Option<PathBuf>,
    /// Output directory for batch results (default: the batch directory).
    #[arg(long, requires = "batch")]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Circuit file to check.
    #[arg(long)]
    circuit: PathBuf,
    /// Target matrix file.
    #[arg(long)]
    matrix: PathBuf,
    /// Equivalence tolerance (default 1e-9; HERMIT_TOL overrides it).
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<f64>,
}

#[derive(Args)]
struct BuiltinArgs {
    /// One of: toffoli_hermitian_cliffordT, toffoli_minimal_hermitian,
    /// x_via_ancilla_cnot_pit, x_via_ancilla_cnot_h.
    name: String,
    /// Write the circuit JSON to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CountArgs {
    /// Circuit file to tally.
    #[arg(long)]
    circuit: PathBuf,
}

#[derive(Args)]
struct HermitizeArgs {
    /// Circuit file to rewrite.
    #[arg(long)]
    circuit: PathBuf,
    /// Target gate set, e.g. Hermitian-HPi or CliffordT.
    #[arg(long)]
    set: String,
    /// Write the rewritten circuit JSON to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// All-to-all or one of the three linear-nearest-neighbour placements of
/// the control on the chain.
#[derive(Clone, Copy, ValueEnum)]
enum LayoutArg {
    A2a,
    LnnFirst,
    LnnMid,
    LnnLast,
}

impl From<LayoutArg> for Layout {
    fn from(a: LayoutArg) -> Layout {
        match a {
            LayoutArg::A2a => Layout::AllToAll,
            LayoutArg::LnnFirst => Layout::LnnControlFirst,
            LayoutArg::LnnMid => Layout::LnnControlMiddle,
            LayoutArg::LnnLast => Layout::LnnControlLast,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BasisArg {
    Cpi,
    Zy,
    Rv,
    Pi,
}

impl From<BasisArg> for BasisChoice {
    fn from(a: BasisArg) -> BasisChoice {
        match a {
            BasisArg::Cpi => BasisChoice::ControlledPi,
            BasisArg::Zy => BasisChoice::Zy,
            BasisArg::Rv => BasisChoice::Rv,
            BasisArg::Pi => BasisChoice::Pi,
        }
    }
}

/// A command failure carrying its exit code: 2 for input problems,
/// 3 for internal synthesis failures.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match &e {
            Error::SynthesisFailure(_) => 3,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

/// Restores the default SIGPIPE disposition so that piping output into a
/// consumer that exits early (e.g. `hermit builtin ... | head`) kills the
/// process quietly instead of panicking on a failed write.
fn reset_sigpipe() {
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Synth1q(args) => {
            if let Some(dir) = &args.batch {
                return run_batch(dir, args.out_dir.as_deref(), cli.json, synth1q_core);
            }
            let u = match (&args.matrix, &args.axis) {
                (Some(path), _) => io::read_matrix(path)?,
                (None, Some(sph)) => {
                    let axis = Axis::from_spherical(sph[0], sph[1]);
                    rotation_matrix(args.angle.expect("clap enforces --angle"), &axis)
                }
                _ => unreachable!("clap enforces the input group"),
            };
            let (circuit, report) = synth1q_core(&u)?;
            emit_synthesis(cli.json, &circuit, &report, args.out.as_deref())?;
            Ok(0)
        }
        Command::SynthCu4(args) => {
            let layout = Layout::from(args.layout);
            let basis = BasisChoice::from(args.basis);
            let synth = move |u: &UnitaryMatrix| build_cu4(u, layout, basis);
            if let Some(dir) = &args.batch {
                return run_batch(dir, args.out_dir.as_deref(), cli.json, synth);
            }
            let path = args.matrix.as_ref().expect("clap enforces the input group");
            let (circuit, report) = synth(&io::read_matrix(path)?)?;
            emit_synthesis(cli.json, &circuit, &report, args.out.as_deref())?;
            Ok(0)
        }
        Command::Verify(args) => {
            let circuit = io::read_circuit(&args.circuit)?;
            let target = io::read_matrix(&args.matrix)?;
            let tol = effective_tol(args.tol)?;
            let eq = assert_equiv(&circuit, &target, tol)?;
            if cli.json {
                let value = serde_json::json!({
                    "equivalent": eq.equivalent,
                    "phase": eq.phase,
                    "error": eq.error,
                    "tol": tol,
                });
                println!("{}", io::to_json_string(&value)?);
            } else {
                println!("equivalent: {}", eq.equivalent);
                println!("phase: {:.10} (target = e^(i phase) * circuit)", eq.phase);
                println!("error: {:.3e} (tol {tol:.3e})", eq.error);
            }
            Ok(if eq.equivalent { 0 } else { 1 })
        }
        Command::Builtin(args) => {
            let circuit = builtin(&args.name).map_err(|e| {
                let mut f = Failure::from(e);
                write!(f.message, "; known: {}", BUILTIN_NAMES.join(", ")).ok();
                f
            })?;
            if let Some(path) = &args.out {
                io::write_circuit(path, &circuit)?;
            }
            if cli.json {
                let value = serde_json::json!({
                    "circuit": circuit_value(&circuit)?,
                    "counts": counts_value(&count_gates(&circuit))?,
                });
                println!("{}", io::to_json_string(&value)?);
            } else {
                print_circuit_text(&circuit);
                println!("counts: {}", counts_text(&count_gates(&circuit)));
            }
            Ok(0)
        }
        Command::Count(args) => {
            let circuit = io::read_circuit(&args.circuit)?;
            let counts = count_gates(&circuit);
            if cli.json {
                println!("{}", io::to_json_string(&counts_value(&counts)?)?);
            } else {
                println!("{}", counts_text(&counts));
            }
            Ok(0)
        }
        Command::Hermitize(args) => {
            let circuit = io::read_circuit(&args.circuit)?;
            let set = GateSet::parse(&args.set).map_err(|e| {
                let mut f = Failure::from(e);
                let names: Vec<&str> = GateSet::ALL.iter().map(|s| s.name()).collect();
                write!(f.message, "; known: {}", names.join(", ")).ok();
                f
            })?;
            let (rewritten, report) = hermitize(&circuit, set)?;
            emit_synthesis(cli.json, &rewritten, &report, args.out.as_deref())?;
            Ok(0)
        }
    }
}

/// Builds the two-reflection circuit for a single-qubit unitary and
/// self-verifies it.
fn synth1q_core(u: &UnitaryMatrix) -> hermit::Result<(Circuit, SynthesisReport)> {
    if u.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: u.dim() });
    }
    let f = two_pi_factorize(u, None)?;
    let mut circuit = Circuit::new(1, Connectivity::All);
    circuit.push(GateOp::pi(f.v1, 0));
    circuit.push(GateOp::pi(f.v2, 0));
    let eq = assert_equiv(&circuit, u, tol::RECONSTRUCT_1Q_TOL)?;
    if !eq.equivalent {
        return Err(Error::SynthesisFailure(format!(
            "two-reflection factorization missed the target by {:.3e}",
            eq.error
        )));
    }
    let report = SynthesisReport {
        counts: count_gates(&circuit),
        error: eq.error,
        global_phase: eq.phase,
        branches: vec![],
    };
    Ok((circuit, report))
}

/// Default tolerance resolution: --tol flag, then HERMIT_TOL, then the
/// built-in default.
fn effective_tol(flag: Option<f64>) -> Result<f64, Failure> {
    if let Some(t) = flag {
        return Ok(t);
    }
    match std::env::var("HERMIT_TOL") {
        Ok(text) => text
            .trim()
            .parse::<f64>()
            .map_err(|_| input_error(format!("HERMIT_TOL is not a number: {text:?}"))),
        Err(_) => Ok(tol::DEFAULT_EQUIV_TOL),
    }
}

/// Runs a synthesis function over every matrix file in a directory,
/// in parallel, writing one circuit file per input.
fn run_batch<F>(
    dir: &Path,
    out_dir: Option<&Path>,
    json: bool,
    synth: F,
) -> Result<u8, Failure>
where
    F: Fn(&UnitaryMatrix) -> hermit::Result<(Circuit, SynthesisReport)> + Send + Sync,
{
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| input_error(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|ext| ext == "json")
                && !p.to_string_lossy().ends_with(".circuit.json")
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(input_error(format!("no .json matrix files in {}", dir.display())));
    }
    let target_dir = out_dir.unwrap_or(dir);
    std::fs::create_dir_all(target_dir)
        .map_err(|e| input_error(format!("cannot create {}: {e}", target_dir.display())))?;

    let results = par_map(files, |path| {
        let result = (|| {
            let u = io::read_matrix(&path)?;
            let (circuit, report) = synth(&u)?;
            let stem = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            let out_path = target_dir.join(format!("{stem}.circuit.json"));
            io::write_circuit(&out_path, &circuit)?;
            Ok::<_, Error>((out_path, report))
        })();
        (path, result)
    });

    let mut worst: u8 = 0;
    let mut entries = vec![];
    for (path, result) in &results {
        let name = path.display();
        match result {
            Ok((out_path, report)) => {
                if json {
                    entries.push(serde_json::json!({
                        "file": path.to_string_lossy(),
                        "ok": true,
                        "circuit_file": out_path.to_string_lossy(),
                        "report": report_value(report)?,
                    }));
                } else {
                    println!(
                        "ok   {name}: {} error={:.3e} -> {}",
                        counts_text(&report.counts),
                        report.error,
                        out_path.display()
                    );
                }
            }
            Err(e) => {
                let code = match e {
                    Error::SynthesisFailure(_) => 3,
                    _ => 2,
                };
                worst = worst.max(code);
                if json {
                    entries.push(serde_json::json!({
                        "file": path.to_string_lossy(),
                        "ok": false,
                        "error": e.to_string(),
                    }));
                } else {
                    println!("FAIL {name}: {e}");
                }
            }
        }
    }
    if json {
        println!("{}", io::to_json_string(&serde_json::json!({ "results": entries }))?);
    }
    Ok(worst)
}

fn circuit_value(c: &Circuit) -> Result<serde_json::Value, Failure> {
    serde_json::to_value(CircuitFile::from_circuit(c)).map_err(|e| Failure::from(Error::from(e)))
}

fn report_value(r: &SynthesisReport) -> Result<serde_json::Value, Failure> {
    serde_json::to_value(r).map_err(|e| Failure::from(Error::from(e)))
}

fn counts_value(k: &GateCounts) -> Result<serde_json::Value, Failure> {
    serde_json::to_value(k).map_err(|e| Failure::from(Error::from(e)))
}

/// Prints the circuit and report; writes the circuit file when asked.
fn emit_synthesis(
    json: bool,
    circuit: &Circuit,
    report: &SynthesisReport,
    out: Option<&Path>,
) -> Result<(), Failure> {
    if let Some(path) = out {
        io::write_circuit(path, circuit)?;
    }
    if json {
        let value = serde_json::json!({
            "circuit": circuit_value(circuit)?,
            "report": report_value(report)?,
        });
        println!("{}", io::to_json_string(&value)?);
    } else {
        print_circuit_text(circuit);
        println!("counts: {}", counts_text(&report.counts));
        if report.error.is_nan() {
            println!("error: unverified (circuit too wide for dense simulation)");
        } else {
            println!("error: {:.3e}", report.error);
        }
        println!(
            "global phase: {:.10} (target = e^(i phase) * circuit)",
            report.global_phase
        );
    }
    Ok(())
}

fn print_circuit_text(c: &Circuit) {
    let conn = match c.connectivity {
        Connectivity::All => "all",
        Connectivity::Lnn => "lnn",
    };
    println!("circuit: {} ops on {} wires ({conn} connectivity)", c.ops.len(), c.width);
    for op in &c.ops {
        println!("  {}", op_text(op));
    }
}

/// Renders one gate in rotation notation: Pi(theta, phi), P(lambda),
/// R(lambda; theta, phi), CNOT, and friends.
fn op_text(op: &GateOp) -> String {
    let sph = |axis: &Axis| {
        let theta = axis.z.clamp(-1.0, 1.0).acos();
        let phi = axis.y.atan2(axis.x);
        format!("{theta:.7}, {phi:.7}")
    };
    let q = &op.qubits;
    match &op.kind {
        GateKind::Cnot => format!("CNOT @{}->{}", q[0], q[1]),
        GateKind::Cz => format!("CZ @{},{}", q[0], q[1]),
        GateKind::CiY => format!("C(iY) @{}->{}", q[0], q[1]),
        GateKind::Swap => format!("SWAP @{},{}", q[0], q[1]),
        GateKind::H => format!("H @{}", q[0]),
        GateKind::X => format!("X @{}", q[0]),
        GateKind::Phase(l) => format!("P({l:.7}) @{}", q[0]),
        GateKind::Rot { lambda, axis } => format!("R({lambda:.7}; {}) @{}", sph(axis), q[0]),
        GateKind::Pi { axis } => format!("Pi({}) @{}", sph(axis), q[0]),
        GateKind::U2(u) => {
            let e = |r: usize, c: usize| {
                let z = u.at(r, c);
                format!("{:+.4}{:+.4}i", z.re, z.im)
            };
            format!("U2[[{}, {}], [{}, {}]] @{}", e(0, 0), e(0, 1), e(1, 0), e(1, 1), q[0])
        }
        GateKind::McRot { lambda, axis, psi } => {
            let (controls, target) = q.split_at(q.len() - 1);
            let list: Vec<String> = controls.iter().map(|c| c.to_string()).collect();
            format!(
                "C-[e^(i {psi:.7}) R({lambda:.7}; {})] @{}->{}",
                sph(axis),
                list.join(","),
                target[0]
            )
        }
        GateKind::McX => {
            let (controls, target) = q.split_at(q.len() - 1);
            let list: Vec<String> = controls.iter().map(|c| c.to_string()).collect();
            format!("MCX @{}->{}", list.join(","), target[0])
        }
    }
}

fn counts_text(k: &GateCounts) -> String {
    let pairs = [
        ("cnot", k.cnot),
        ("cz", k.cz),
        ("ciy", k.ciy),
        ("swap", k.swap),
        ("h", k.h),
        ("x", k.x),
        ("phase", k.phase),
        ("rz", k.rot_z),
        ("ry", k.rot_y),
        ("rot", k.rot_other),
        ("pi", k.pi),
        ("u2", k.u2),
        ("mcrot", k.mcrot),
        ("mcx", k.mcx),
    ];
    let mut parts: Vec<String> = pairs
        .iter()
        .filter(|(_, n)| *n > 0)
        .map(|(label, n)| format!("{label}={n}"))
        .collect();
    parts.push(format!("total={}", k.total()));
    parts.join(" ")
}
