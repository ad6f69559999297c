//! Circuit representation and dense simulation.
//!
//! A [`Circuit`] is a list of gates over `width` qubits together with a
//! declared connectivity. Gates are stored leftmost-first in application
//! order, so the unitary of a concatenation is U(second) * U(first).
//!
//! Qubit 0 is the most significant bit of the basis index: on two qubits,
//! basis state 2 is |10> with qubit 0 in state 1. Under this convention
//! CNOT with control 0 and target 1 is
//!
//! ```text
//! [ 1 0 0 0 ]
//! [ 0 1 0 0 ]
//! [ 0 0 0 1 ]
//! [ 0 0 1 0 ]
//! ```
//!
//! The simulator is dense and multiplies each gate into an accumulator by
//! in-place row updates, costing O(4^width) per gate. It exists to verify
//! synthesized circuits, not to scale, and refuses widths above
//! [`crate::matrix::MAX_QUBITS`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bloch::{self, Axis};
use crate::error::{Error, Result};
use crate::matrix::{self, UnitaryMatrix, MAX_QUBITS};
use crate::tol;

/// A gate in a circuit. Multi-qubit order conventions live in
/// [`GateOp::qubits`].
#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    /// Controlled NOT; qubits are [control, target].
    Cnot,
    /// Controlled Z; symmetric in its two qubits.
    Cz,
    /// Controlled iY = [[0, 1], [-1, 0]] on the target; qubits are
    /// [control, target].
    CiY,
    /// Swap of two qubits.
    Swap,
    /// Hadamard.
    H,
    /// Pauli X.
    X,
    /// Phase gate P(lambda) = diag(1, exp(i lambda)).
    Phase(f64),
    /// Rotation R_lambda(axis).
    Rot { lambda: f64, axis: Axis },
    /// Pi-rotation Pi(axis).
    Pi { axis: Axis },
    /// Arbitrary single-qubit unitary.
    U2(UnitaryMatrix),
    /// Multi-controlled phased rotation exp(i psi) R_lambda(axis) on the
    /// target; qubits are [controls.., target].
    McRot { lambda: f64, axis: Axis, psi: f64 },
    /// Multi-controlled X; qubits are [controls.., target].
    McX,
}

impl GateKind {
    /// Lowercase name used in serialized circuits and reports.
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::Cnot => "cnot",
            GateKind::Cz => "cz",
            GateKind::CiY => "ciy",
            GateKind::Swap => "swap",
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Phase(_) => "phase",
            GateKind::Rot { .. } => "rot",
            GateKind::Pi { .. } => "pi",
            GateKind::U2(_) => "u2",
            GateKind::McRot { .. } => "mcrot",
            GateKind::McX => "mcx",
        }
    }

    /// Number of qubits the gate acts on, if fixed by the kind.
    /// Multi-controlled kinds accept any count of at least two.
    pub fn fixed_arity(&self) -> Option<usize> {
        match self {
            GateKind::Cnot | GateKind::Cz | GateKind::CiY | GateKind::Swap => Some(2),
            GateKind::H | GateKind::X | GateKind::Phase(_) | GateKind::Rot { .. }
            | GateKind::Pi { .. } | GateKind::U2(_) => Some(1),
            GateKind::McRot { .. } | GateKind::McX => None,
        }
    }
}

/// A placed gate.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub kind: GateKind,
    /// Acted-on qubits. For controlled kinds the controls come first and
    /// the target is last.
    pub qubits: Vec<usize>,
}

impl GateOp {
    pub fn new(kind: GateKind, qubits: Vec<usize>) -> GateOp {
        GateOp { kind, qubits }
    }

    pub fn cnot(control: usize, target: usize) -> GateOp {
        GateOp::new(GateKind::Cnot, vec![control, target])
    }

    pub fn cz(a: usize, b: usize) -> GateOp {
        GateOp::new(GateKind::Cz, vec![a, b])
    }

    pub fn ciy(control: usize, target: usize) -> GateOp {
        GateOp::new(GateKind::CiY, vec![control, target])
    }

    pub fn swap(a: usize, b: usize) -> GateOp {
        GateOp::new(GateKind::Swap, vec![a, b])
    }

    pub fn h(q: usize) -> GateOp {
        GateOp::new(GateKind::H, vec![q])
    }

    pub fn x(q: usize) -> GateOp {
        GateOp::new(GateKind::X, vec![q])
    }

    pub fn phase(lambda: f64, q: usize) -> GateOp {
        GateOp::new(GateKind::Phase(lambda), vec![q])
    }

    pub fn rot(lambda: f64, axis: Axis, q: usize) -> GateOp {
        GateOp::new(GateKind::Rot { lambda, axis }, vec![q])
    }

    pub fn pi(axis: Axis, q: usize) -> GateOp {
        GateOp::new(GateKind::Pi { axis }, vec![q])
    }

    pub fn u2(u: UnitaryMatrix, q: usize) -> GateOp {
        GateOp::new(GateKind::U2(u), vec![q])
    }

    pub fn mcrot(controls: &[usize], target: usize, lambda: f64, axis: Axis, psi: f64) -> GateOp {
        let mut qubits = controls.to_vec();
        qubits.push(target);
        GateOp::new(GateKind::McRot { lambda, axis, psi }, qubits)
    }

    pub fn mcx(controls: &[usize], target: usize) -> GateOp {
        let mut qubits = controls.to_vec();
        qubits.push(target);
        GateOp::new(GateKind::McX, qubits)
    }
}

/// Hardware connectivity a circuit claims to respect.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connectivity {
    /// Any pair of qubits may interact.
    All,
    /// Linear nearest neighbour: multi-qubit gates only between qubits at
    /// distance one.
    Lnn,
}

/// A gate list over a fixed number of qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub width: usize,
    pub connectivity: Connectivity,
    pub ops: Vec<GateOp>,
}

impl Circuit {
    pub fn new(width: usize, connectivity: Connectivity) -> Circuit {
        Circuit { width, connectivity, ops: Vec::new() }
    }

    pub fn push(&mut self, op: GateOp) {
        self.ops.push(op);
    }

    /// Appends all ops of `other`, which must have the same width.
    pub fn extend(&mut self, ops: impl IntoIterator<Item = GateOp>) {
        self.ops.extend(ops);
    }
}

/// A connectivity violation found by [`validate_connectivity`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConnectivityViolation {
    /// Index into the circuit's op list.
    pub op_index: usize,
    /// The offending qubit pair.
    pub qubits: (usize, usize),
}

/// Checks every multi-qubit gate against the circuit's declared
/// connectivity and returns all violations. For linear nearest neighbour,
/// every pair of qubits touched by a gate must sit at distance one, so
/// gates on three or more qubits always violate it.
pub fn validate_connectivity(circuit: &Circuit) -> Vec<ConnectivityViolation> {
    let mut violations = Vec::new();
    if circuit.connectivity == Connectivity::All {
        return violations;
    }
    for (op_index, op) in circuit.ops.iter().enumerate() {
        for i in 0..op.qubits.len() {
            for j in (i + 1)..op.qubits.len() {
                let (a, b) = (op.qubits[i], op.qubits[j]);
                if a.abs_diff(b) != 1 {
                    violations.push(ConnectivityViolation { op_index, qubits: (a, b) });
                }
            }
        }
    }
    violations
}

/// Gate counts by kind, with rotations subclassified by axis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct GateCounts {
    pub cnot: usize,
    pub cz: usize,
    pub ciy: usize,
    pub swap: usize,
    pub h: usize,
    pub x: usize,
    pub phase: usize,
    /// Rotations about +-z.
    pub rot_z: usize,
    /// Rotations about +-y.
    pub rot_y: usize,
    /// Rotations about any other axis.
    pub rot_other: usize,
    pub pi: usize,
    pub u2: usize,
    pub mcrot: usize,
    pub mcx: usize,
}

impl GateCounts {
    /// Total number of gates.
    pub fn total(&self) -> usize {
        self.cnot + self.cz + self.ciy + self.swap + self.h + self.x + self.phase
            + self.rot_z + self.rot_y + self.rot_other + self.pi + self.u2
            + self.mcrot + self.mcx
    }

    /// Total number of single-qubit gates.
    pub fn singles(&self) -> usize {
        self.h + self.x + self.phase + self.rot_z + self.rot_y + self.rot_other
            + self.pi + self.u2
    }

    /// Total rotations regardless of axis.
    pub fn rot(&self) -> usize {
        self.rot_z + self.rot_y + self.rot_other
    }
}

/// Tallies the gates of a circuit.
pub fn count_gates(circuit: &Circuit) -> GateCounts {
    let mut counts = GateCounts::default();
    for op in &circuit.ops {
        match &op.kind {
            GateKind::Cnot => counts.cnot += 1,
            GateKind::Cz => counts.cz += 1,
            GateKind::CiY => counts.ciy += 1,
            GateKind::Swap => counts.swap += 1,
            GateKind::H => counts.h += 1,
            GateKind::X => counts.x += 1,
            GateKind::Phase(_) => counts.phase += 1,
            GateKind::Rot { axis, .. } => {
                if axis.x.abs() <= tol::AXIS_ZERO_TOL && axis.y.abs() <= tol::AXIS_ZERO_TOL {
                    counts.rot_z += 1;
                } else if axis.x.abs() <= tol::AXIS_ZERO_TOL && axis.z.abs() <= tol::AXIS_ZERO_TOL {
                    counts.rot_y += 1;
                } else {
                    counts.rot_other += 1;
                }
            }
            GateKind::Pi { .. } => counts.pi += 1,
            GateKind::U2(_) => counts.u2 += 1,
            GateKind::McRot { .. } => counts.mcrot += 1,
            GateKind::McX => counts.mcx += 1,
        }
    }
    counts
}

/// Result of comparing a circuit against a target matrix.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EquivReport {
    /// True when the error is within the requested tolerance.
    pub equivalent: bool,
    /// Global phase phi such that target = exp(i phi) circuit, as
    /// measured numerically.
    pub phase: f64,
    /// Max-norm error after phase alignment.
    pub error: f64,
}

/// Computes the circuit unitary and compares it to `target` up to global
/// phase.
pub fn assert_equiv(circuit: &Circuit, target: &UnitaryMatrix, tol: f64) -> Result<EquivReport> {
    let u = circuit_unitary(circuit)?;
    if u.dim() != target.dim() {
        return Err(Error::DimensionMismatch { expected: target.dim(), got: u.dim() });
    }
    let (phase, error) = bloch::phase_align(target, &u);
    Ok(EquivReport { equivalent: error <= tol, phase, error })
}

/// Outcome of one global-phase branch tried during two-qubit synthesis.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BranchOutcome {
    /// Branch index k, selecting the phase (arg det + 2 pi k) / 4.
    pub k: usize,
    /// The phase that was divided out.
    pub phi: f64,
    /// Reconstruction error of this branch.
    pub error: f64,
    /// Whether the branch met tolerance and was used.
    pub accepted: bool,
}

/// Summary of a synthesis run: what was emitted and how well it verified.
#[derive(Debug, Clone, Serialize)]
pub struct SynthesisReport {
    pub counts: GateCounts,
    /// Max-norm error of the emitted circuit against its target after
    /// phase alignment.
    pub error: f64,
    /// Phase phi such that the synthesis target equals exp(i phi) times
    /// the emitted circuit.
    pub global_phase: f64,
    /// Phase branches tried, for decompositions that search over them.
    pub branches: Vec<BranchOutcome>,
}

/// Dense unitary of the whole circuit. Gates are applied leftmost-first.
pub fn circuit_unitary(circuit: &Circuit) -> Result<UnitaryMatrix> {
    if circuit.width > MAX_QUBITS {
        return Err(Error::WidthOverflow { width: circuit.width, max: MAX_QUBITS });
    }
    let dim = 1usize << circuit.width;
    let mut acc = matrix::UnitaryMatrix::identity(dim).raw().clone();

    for (idx, op) in circuit.ops.iter().enumerate() {
        validate_op(circuit.width, idx, op)?;
        apply_left(&mut acc, circuit.width, op);
    }
    Ok(UnitaryMatrix::from_matrix_unchecked(acc))
}

fn validate_op(width: usize, idx: usize, op: &GateOp) -> Result<()> {
    if let Some(arity) = op.kind.fixed_arity() {
        if op.qubits.len() != arity {
            return Err(Error::PreconditionViolated(format!(
                "op {idx} ({}) expects {arity} qubit(s), got {}",
                op.kind.name(),
                op.qubits.len()
            )));
        }
    } else if op.qubits.len() < 2 {
        return Err(Error::PreconditionViolated(format!(
            "op {idx} ({}) needs at least one control and a target",
            op.kind.name()
        )));
    }
    for &q in &op.qubits {
        if q >= width {
            return Err(Error::PreconditionViolated(format!(
                "op {idx} ({}) touches qubit {q} outside width {width}",
                op.kind.name()
            )));
        }
    }
    for i in 0..op.qubits.len() {
        for j in (i + 1)..op.qubits.len() {
            if op.qubits[i] == op.qubits[j] {
                return Err(Error::PreconditionViolated(format!(
                    "op {idx} ({}) repeats qubit {}",
                    op.kind.name(),
                    op.qubits[i]
                )));
            }
        }
    }
    Ok(())
}

/// Bit mask of a qubit index under the qubit-0-is-MSB convention.
fn qubit_mask(width: usize, q: usize) -> usize {
    1usize << (width - 1 - q)
}

/// Multiplies the embedded gate into the accumulator from the left.
fn apply_left(acc: &mut nalgebra::DMatrix<Complex64>, width: usize, op: &GateOp) {
    match &op.kind {
        GateKind::Cnot => {
            let c = qubit_mask(width, op.qubits[0]);
            let t = qubit_mask(width, op.qubits[1]);
            permute_rows(acc, |i| if i & c != 0 { i ^ t } else { i });
        }
        GateKind::Cz => {
            let a = qubit_mask(width, op.qubits[0]);
            let b = qubit_mask(width, op.qubits[1]);
            for i in 0..acc.nrows() {
                if i & a != 0 && i & b != 0 {
                    for j in 0..acc.ncols() {
                        acc[(i, j)] = -acc[(i, j)];
                    }
                }
            }
        }
        GateKind::CiY => {
            // iY = [[0, 1], [-1, 0]] acting on the target rows.
            let c = qubit_mask(width, op.qubits[0]);
            let t = qubit_mask(width, op.qubits[1]);
            mix_controlled_rows(
                acc,
                c,
                t,
                bloch::ZERO,
                bloch::ONE,
                -bloch::ONE,
                bloch::ZERO,
            );
        }
        GateKind::Swap => {
            let a = qubit_mask(width, op.qubits[0]);
            let b = qubit_mask(width, op.qubits[1]);
            permute_rows(acc, |i| {
                let bit_a = i & a != 0;
                let bit_b = i & b != 0;
                if bit_a != bit_b { i ^ a ^ b } else { i }
            });
        }
        GateKind::H => {
            let g = bloch::hadamard_matrix();
            apply_1q(acc, width, op.qubits[0], &g);
        }
        GateKind::X => {
            let t = qubit_mask(width, op.qubits[0]);
            permute_rows(acc, |i| i ^ t);
        }
        GateKind::Phase(lambda) => {
            let t = qubit_mask(width, op.qubits[0]);
            let f = Complex64::from_polar(1.0, *lambda);
            for i in 0..acc.nrows() {
                if i & t != 0 {
                    for j in 0..acc.ncols() {
                        acc[(i, j)] *= f;
                    }
                }
            }
        }
        GateKind::Rot { lambda, axis } => {
            let g = bloch::rotation_matrix(*lambda, axis);
            apply_1q(acc, width, op.qubits[0], &g);
        }
        GateKind::Pi { axis } => {
            let g = bloch::pi_matrix(axis);
            apply_1q(acc, width, op.qubits[0], &g);
        }
        GateKind::U2(u) => {
            apply_1q(acc, width, op.qubits[0], u);
        }
        GateKind::McRot { lambda, axis, psi } => {
            let (controls, target) = op.qubits.split_at(op.qubits.len() - 1);
            let mask = controls.iter().fold(0usize, |m, &q| m | qubit_mask(width, q));
            let t = qubit_mask(width, target[0]);
            let g = bloch::rotation_matrix(*lambda, axis)
                .scale(Complex64::from_polar(1.0, *psi));
            mix_controlled_rows(acc, mask, t, g.at(0, 0), g.at(0, 1), g.at(1, 0), g.at(1, 1));
        }
        GateKind::McX => {
            let (controls, target) = op.qubits.split_at(op.qubits.len() - 1);
            let mask = controls.iter().fold(0usize, |m, &q| m | qubit_mask(width, q));
            let t = qubit_mask(width, target[0]);
            permute_rows(acc, |i| if i & mask == mask { i ^ t } else { i });
        }
    }
}

/// Applies a row permutation i -> perm(i), where perm is an involution.
fn permute_rows(acc: &mut nalgebra::DMatrix<Complex64>, perm: impl Fn(usize) -> usize) {
    for i in 0..acc.nrows() {
        let p = perm(i);
        if p > i {
            acc.swap_rows(i, p);
        }
    }
}

/// Mixes row pairs (i, i ^ t) by the 2x2 matrix [[g00, g01], [g10, g11]]
/// on rows where all bits of `control_mask` are set (pass 0 to act on all
/// rows).
fn mix_controlled_rows(
    acc: &mut nalgebra::DMatrix<Complex64>,
    control_mask: usize,
    t: usize,
    g00: Complex64,
    g01: Complex64,
    g10: Complex64,
    g11: Complex64,
) {
    for i in 0..acc.nrows() {
        if i & t != 0 || i & control_mask != control_mask {
            continue;
        }
        let j = i ^ t;
        for col in 0..acc.ncols() {
            let a = acc[(i, col)];
            let b = acc[(j, col)];
            acc[(i, col)] = g00 * a + g01 * b;
            acc[(j, col)] = g10 * a + g11 * b;
        }
    }
}

/// Applies a single-qubit gate to rows of the accumulator.
fn apply_1q(acc: &mut nalgebra::DMatrix<Complex64>, width: usize, q: usize, g: &UnitaryMatrix) {
    let t = qubit_mask(width, q);
    mix_controlled_rows(acc, 0, t, g.at(0, 0), g.at(0, 1), g.at(1, 0), g.at(1, 1));
}
