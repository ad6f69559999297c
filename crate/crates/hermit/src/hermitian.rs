//! Gate-set membership and rewriting between standard and Hermitian
//! universal sets.
//!
//! The Hermitian sets replace non-Hermitian generators by pi-rotations:
//! S = Pi_S X and T = Pi_T X up to global phase, where Pi_S = Pi(pi/2,
//! pi/4) and Pi_T = Pi(pi/2, pi/8), and generally P(lambda) =
//! Pi(pi/2, lambda/2) X up to phase. [`hermitize`] rewrites a circuit
//! gate by gate into a target set, cancels the X gates that appear on
//! both sides of CNOT targets, and accounts for every dropped phase.
//!
//! The minimal set {CNOT, H, Pi_T} has no X; a residual X is realized
//! on an idle wire with one of the ancilla built-ins (which equal X
//! tensor I exactly, leaving any ancilla state untouched), and reported
//! as an error when no idle wire exists. Wires are never added
//! silently.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::bloch::{self, hadamard_axis, phase_align, s_axis, t_axis, wrap_angle, Axis};
use crate::error::{Error, Result};
use crate::ir::{circuit_unitary, count_gates, Circuit, GateKind, GateOp, SynthesisReport};
use crate::single_qubit::{euler_decompose, two_pi_factorize, EulerConvention};
use crate::tol;

/// Axis-identity tolerance for set membership: separates exact
/// constructions (error around 1e-16) from genuinely different axes.
const AXIS_MATCH_TOL: f64 = 1e-9;

/// Angle-grid tolerance for recognizing multiples of pi/4 or pi/2.
const GRID_TOL: f64 = 1e-9;

/// Widest circuit the rewriter verifies densely; beyond this the
/// report's error field is NaN and only the per-gate constructions
/// (exact by design) guarantee correctness.
const VERIFY_WIDTH_LIMIT: usize = 8;

/// A named universal gate set with a total membership predicate over
/// the IR.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateSet {
    /// CNOT plus arbitrary single-qubit gates.
    UniversalU,
    /// CNOT, H, and z rotations (diagonal phases count as z rotations).
    UniversalHRz,
    /// CNOT, H, X, and phases on the pi/4 grid.
    CliffordT,
    /// CNOT, H, X, and phases on the pi/2 grid.
    Clifford,
    /// CNOT and pi-rotations about any axis.
    HermitianPi,
    /// CNOT, H, and pi-rotations about any axis.
    HermitianHPi,
    /// CNOT, H, and Pi_T only; X needs an ancilla.
    HermitianHPiT,
    /// CNOT, H, X, and Pi_T.
    HermitianHPiTX,
    /// CNOT, H, X, and Pi_S.
    HermitianHPiSX,
}

impl GateSet {
    pub const ALL: [GateSet; 9] = [
        GateSet::UniversalU,
        GateSet::UniversalHRz,
        GateSet::CliffordT,
        GateSet::Clifford,
        GateSet::HermitianPi,
        GateSet::HermitianHPi,
        GateSet::HermitianHPiT,
        GateSet::HermitianHPiTX,
        GateSet::HermitianHPiSX,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            GateSet::UniversalU => "Universal-U",
            GateSet::UniversalHRz => "Universal-HRz",
            GateSet::CliffordT => "CliffordT",
            GateSet::Clifford => "Clifford",
            GateSet::HermitianPi => "Hermitian-Pi",
            GateSet::HermitianHPi => "Hermitian-HPi",
            GateSet::HermitianHPiT => "Hermitian-HPiT",
            GateSet::HermitianHPiTX => "Hermitian-HPiT-X",
            GateSet::HermitianHPiSX => "Hermitian-HPiS-X",
        }
    }

    pub fn parse(name: &str) -> Result<GateSet> {
        GateSet::ALL
            .iter()
            .copied()
            .find(|s| s.name().eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::UnknownGateSet(name.to_string()))
    }

    fn has_h(&self) -> bool {
        !matches!(self, GateSet::HermitianPi)
    }

    fn has_x(&self) -> bool {
        matches!(
            self,
            GateSet::UniversalU
                | GateSet::CliffordT
                | GateSet::Clifford
                | GateSet::HermitianHPiTX
                | GateSet::HermitianHPiSX
        )
    }

    /// Grid step of the supported phase angles, if the set is discrete.
    fn phase_step(&self) -> Option<f64> {
        match self {
            GateSet::CliffordT | GateSet::HermitianHPiT | GateSet::HermitianHPiTX => {
                Some(FRAC_PI_4)
            }
            GateSet::Clifford | GateSet::HermitianHPiSX => Some(FRAC_PI_2),
            _ => None,
        }
    }

    /// The only pi-rotation axis allowed, if the set restricts it.
    fn pi_axis(&self) -> Option<Axis> {
        match self {
            GateSet::HermitianHPiT | GateSet::HermitianHPiTX => Some(t_axis()),
            GateSet::HermitianHPiSX => Some(s_axis()),
            _ => None,
        }
    }

    /// Whether `op` belongs to this set as written. Total over the IR:
    /// unhandled kinds are simply non-members.
    pub fn member(&self, op: &GateOp) -> bool {
        match &op.kind {
            GateKind::Cnot => true,
            GateKind::H => self.has_h(),
            GateKind::X => self.has_x(),
            GateKind::Phase(l) => match self {
                GateSet::UniversalU | GateSet::UniversalHRz => true,
                GateSet::CliffordT => on_grid(*l, FRAC_PI_4),
                GateSet::Clifford => on_grid(*l, FRAC_PI_2),
                _ => false,
            },
            GateKind::Rot { axis, .. } => match self {
                GateSet::UniversalU => true,
                GateSet::UniversalHRz => axis.x.abs() <= AXIS_MATCH_TOL && axis.y.abs() <= AXIS_MATCH_TOL,
                _ => false,
            },
            GateKind::Pi { axis } => match self {
                GateSet::UniversalU | GateSet::HermitianPi | GateSet::HermitianHPi => true,
                _ => self.pi_axis().is_some_and(|only| axis.approx_eq(&only, AXIS_MATCH_TOL)),
            },
            GateKind::U2(_) => matches!(self, GateSet::UniversalU),
            _ => false,
        }
    }
}

fn on_grid(lambda: f64, step: f64) -> bool {
    let w = wrap_angle(lambda);
    (w / step - (w / step).round()).abs() * step <= GRID_TOL
}

/// Expands the convenience two-qubit kinds into CNOT plus single-qubit
/// gates (exact, no phase).
fn expand_two_qubit(op: &GateOp) -> Option<Vec<GateOp>> {
    match &op.kind {
        GateKind::Cz => {
            let (a, b) = (op.qubits[0], op.qubits[1]);
            Some(vec![GateOp::h(b), GateOp::cnot(a, b), GateOp::h(b)])
        }
        GateKind::CiY => {
            let (c, t) = (op.qubits[0], op.qubits[1]);
            Some(vec![
                GateOp::phase(FRAC_PI_2, c),
                GateOp::pi(s_axis(), t),
                GateOp::cnot(c, t),
                GateOp::pi(s_axis(), t),
            ])
        }
        GateKind::Swap => {
            let (a, b) = (op.qubits[0], op.qubits[1]);
            Some(vec![GateOp::cnot(a, b), GateOp::cnot(b, a), GateOp::cnot(a, b)])
        }
        _ => None,
    }
}

/// Rewrites one gate into the target set. Returns the replacement ops
/// and the phase phi such that gate = e^{i phi} (product of ops).
///
/// For `HermitianHPiT` the X gates in the output are intermediate: the
/// caller cancels them through CNOT targets and resolves what remains.
fn rewrite_op(op: &GateOp, set: GateSet) -> Result<(Vec<GateOp>, f64)> {
    if set.member(op) {
        return Ok((vec![op.clone()], 0.0));
    }
    let unsupported = || Error::UnsupportedForTarget {
        gate: op.kind.name().to_string(),
        set: set.name().to_string(),
    };
    if let Some(seq) = expand_two_qubit(op) {
        let mut out = vec![];
        let mut phase = 0.0;
        for piece in &seq {
            let (ops, ph) = rewrite_op(piece, set)?;
            out.extend(ops);
            phase += ph;
        }
        return Ok((out, phase));
    }
    let q = op.qubits[0];
    match &op.kind {
        GateKind::H => Ok((vec![GateOp::pi(hadamard_axis(), q)], 0.0)),
        GateKind::X => match set {
            // Not a member, but the cancellation pass may still remove
            // it; anything left is resolved with an ancilla.
            GateSet::HermitianHPiT => Ok((vec![GateOp::x(q)], 0.0)),
            GateSet::HermitianPi | GateSet::HermitianHPi => Ok((vec![GateOp::pi(Axis::X, q)], 0.0)),
            GateSet::UniversalHRz => Ok((
                vec![GateOp::h(q), GateOp::phase(PI, q), GateOp::h(q)],
                0.0,
            )),
            _ => Err(unsupported()),
        },
        GateKind::Phase(l) => rewrite_phase(*l, q, set).ok_or_else(unsupported),
        GateKind::Rot { lambda, axis } => {
            match set {
                GateSet::HermitianPi | GateSet::HermitianHPi => {
                    if wrap_angle(*lambda).abs() <= tol::ANGLE_ELIDE_TOL {
                        return Ok((vec![], 0.0));
                    }
                    let f = two_pi_factorize(&bloch::rotation_matrix(*lambda, axis), None)?;
                    Ok((vec![GateOp::pi(f.v1, q), GateOp::pi(f.v2, q)], f.phase))
                }
                GateSet::UniversalHRz => Ok(hrz_ops(&bloch::rotation_matrix(*lambda, axis), q)?),
                // Discrete sets express only z rotations on their grid:
                // Rz(l) = e^{-i l/2} P(l).
                _ => {
                    if axis.x.abs() <= AXIS_MATCH_TOL && axis.y.abs() <= AXIS_MATCH_TOL {
                        let l = *lambda * axis.z.signum();
                        let (ops, ph) = rewrite_phase(l, q, set).ok_or_else(unsupported)?;
                        Ok((ops, ph - l / 2.0))
                    } else {
                        Err(unsupported())
                    }
                }
            }
        }
        GateKind::Pi { axis } => {
            let close = |v: &Axis| axis.approx_eq(v, AXIS_MATCH_TOL);
            match set {
                GateSet::UniversalHRz => Ok(hrz_ops(&bloch::pi_matrix(axis), q)?),
                GateSet::CliffordT | GateSet::Clifford => {
                    if close(&Axis::X) {
                        Ok((vec![GateOp::x(q)], 0.0))
                    } else if close(&Axis::Z) {
                        // Pi(z) = Z = P(pi).
                        Ok((vec![GateOp::phase(PI, q)], 0.0))
                    } else if close(&Axis::Y) {
                        // Y = e^{i pi/2} X Z.
                        Ok((vec![GateOp::phase(PI, q), GateOp::x(q)], FRAC_PI_2))
                    } else if close(&hadamard_axis()) {
                        Ok((vec![GateOp::h(q)], 0.0))
                    } else if close(&s_axis()) {
                        // Pi_S = e^{-i pi/4} S X.
                        Ok((vec![GateOp::x(q), GateOp::phase(FRAC_PI_2, q)], -FRAC_PI_4))
                    } else if close(&t_axis()) && set == GateSet::CliffordT {
                        // Pi_T = e^{-i pi/8} T X.
                        Ok((vec![GateOp::x(q), GateOp::phase(FRAC_PI_4, q)], -PI / 8.0))
                    } else {
                        Err(unsupported())
                    }
                }
                GateSet::HermitianHPiT | GateSet::HermitianHPiTX | GateSet::HermitianHPiSX => {
                    if close(&Axis::X) {
                        // Defer to the X rules (cancellation for HPiT).
                        rewrite_op(&GateOp::x(q), set)
                    } else {
                        Err(unsupported())
                    }
                }
                _ => Err(unsupported()),
            }
        }
        GateKind::U2(u) => match set {
            GateSet::HermitianPi | GateSet::HermitianHPi => {
                let f = two_pi_factorize(u, None)?;
                Ok((vec![GateOp::pi(f.v1, q), GateOp::pi(f.v2, q)], f.phase))
            }
            GateSet::UniversalHRz => Ok(hrz_ops(u, q)?),
            _ => Err(unsupported()),
        },
        _ => Err(unsupported()),
    }
}

/// P(lambda) in the target set, if expressible. Returns ops and phase
/// with P(lambda) = e^{i phi} (product).
fn rewrite_phase(lambda: f64, q: usize, set: GateSet) -> Option<(Vec<GateOp>, f64)> {
    let l = wrap_angle(lambda);
    if l.abs() <= tol::ANGLE_ELIDE_TOL {
        return Some((vec![], 0.0));
    }
    match set {
        GateSet::HermitianPi | GateSet::HermitianHPi => {
            // P(l) = e^{i l/2} Pi(pi/2, l/2) Pi(x).
            let refl = Axis::from_spherical(FRAC_PI_2, l / 2.0);
            Some((vec![GateOp::pi(Axis::X, q), GateOp::pi(refl, q)], l / 2.0))
        }
        GateSet::HermitianHPiT | GateSet::HermitianHPiTX | GateSet::HermitianHPiSX => {
            let step = set.phase_step().unwrap();
            let pi_ax = set.pi_axis().unwrap();
            let k = (l / step).round();
            if (l - k * step).abs() > GRID_TOL {
                return None;
            }
            let k = k as i64;
            // P(k step) = T^k or S^k: each power is e^{i step/2} Pi X,
            // inverses reverse the pair.
            let mut ops = vec![];
            for _ in 0..k.unsigned_abs() {
                if k > 0 {
                    ops.push(GateOp::x(q));
                    ops.push(GateOp::pi(pi_ax, q));
                } else {
                    ops.push(GateOp::pi(pi_ax, q));
                    ops.push(GateOp::x(q));
                }
            }
            Some((ops, k as f64 * step / 2.0))
        }
        _ => None,
    }
}

/// Rewrites a single-qubit matrix into [Rz, H, Rz, H, Rz] (elided where
/// zero) using the ZXZ Euler split Rx(b) = H Rz(b) H.
fn hrz_ops(u: &crate::matrix::UnitaryMatrix, q: usize) -> Result<(Vec<GateOp>, f64)> {
    let e = euler_decompose(u, EulerConvention::Zyz)?;
    let (a, b, c) = (e.angles[0], e.angles[1], e.angles[2]);
    // u = e^{i phase} Rz(a) Ry(b) Rz(c) = e^{i phase} Rz(a + pi/2) Rx(b) Rz(c - pi/2).
    let rz = |ops: &mut Vec<GateOp>, l: f64| {
        let w = wrap_angle(l);
        if w.abs() > tol::ANGLE_ELIDE_TOL {
            ops.push(GateOp::rot(w, Axis::Z, q));
        }
    };
    let mut ops = vec![];
    if b.abs() <= tol::ANGLE_ELIDE_TOL {
        rz(&mut ops, a + c);
        return Ok((ops, e.phase));
    }
    rz(&mut ops, c - FRAC_PI_2);
    ops.push(GateOp::h(q));
    rz(&mut ops, b);
    ops.push(GateOp::h(q));
    rz(&mut ops, a + FRAC_PI_2);
    Ok((ops, e.phase))
}

/// Cancels X gates pairwise along each wire, commuting them through
/// CNOT targets (X on the target commutes with CNOT exactly); any other
/// gate on the wire blocks the push and the X is emitted just before
/// it.
fn cancel_x_through_cnot_targets(ops: Vec<GateOp>, width: usize) -> Vec<GateOp> {
    let mut pending = vec![false; width];
    let mut out = Vec::with_capacity(ops.len());
    for op in ops {
        if matches!(op.kind, GateKind::X) {
            let q = op.qubits[0];
            pending[q] = !pending[q];
            continue;
        }
        for &w in &op.qubits {
            let rides_through = matches!(op.kind, GateKind::Cnot) && op.qubits[1] == w;
            if pending[w] && !rides_through {
                out.push(GateOp::x(w));
                pending[w] = false;
            }
        }
        out.push(op);
    }
    for (w, p) in pending.iter().enumerate() {
        if *p {
            out.push(GateOp::x(w));
        }
    }
    out
}

/// Replaces residual X gates by the CNOT + Pi_T ancilla circuit on an
/// idle wire of the input, or reports that an ancilla is needed. Wires
/// are never added.
fn resolve_residual_x(ops: Vec<GateOp>, width: usize, set: GateSet) -> Result<Vec<GateOp>> {
    if !ops.iter().any(|op| matches!(op.kind, GateKind::X)) {
        return Ok(ops);
    }
    let mut used = vec![false; width];
    for op in &ops {
        for &q in &op.qubits {
            used[q] = true;
        }
    }
    let ancilla = used.iter().position(|u| !u);
    let mut out = Vec::with_capacity(ops.len());
    for op in ops {
        if matches!(op.kind, GateKind::X) {
            let q = op.qubits[0];
            match ancilla {
                Some(a) => out.extend([
                    GateOp::cnot(a, q),
                    GateOp::pi(t_axis(), a),
                    GateOp::cnot(a, q),
                    GateOp::pi(t_axis(), a),
                ]),
                None => {
                    return Err(Error::AncillaRequired {
                        qubit: q,
                        set: set.name().to_string(),
                        builtin_a: "x_via_ancilla_cnot_pit",
                        builtin_b: "x_via_ancilla_cnot_h",
                    })
                }
            }
        } else {
            out.push(op);
        }
    }
    Ok(out)
}

/// Rewrites every gate of `circuit` into `target`, preserving the
/// matrix up to the recorded global phase.
///
/// The report's `global_phase` is phi with original = e^{i phi}
/// rewritten (exact bookkeeping of the dropped per-gate phases); its
/// `error` is the measured deviation after phase alignment when the
/// circuit is narrow enough to simulate densely, NaN otherwise.
pub fn hermitize(circuit: &Circuit, target: GateSet) -> Result<(Circuit, SynthesisReport)> {
    let mut ops = Vec::with_capacity(circuit.ops.len());
    let mut phase = 0.0;
    for op in &circuit.ops {
        let (rewritten, ph) = rewrite_op(op, target)?;
        ops.extend(rewritten);
        phase += ph;
    }
    if matches!(
        target,
        GateSet::HermitianHPiT | GateSet::HermitianHPiTX | GateSet::HermitianHPiSX
    ) {
        ops = cancel_x_through_cnot_targets(ops, circuit.width);
    }
    if target == GateSet::HermitianHPiT {
        ops = resolve_residual_x(ops, circuit.width, target)?;
    }
    for op in &ops {
        if !target.member(op) {
            return Err(Error::SynthesisFailure(format!(
                "rewrite left a non-member {} gate in {}",
                op.kind.name(),
                target.name()
            )));
        }
    }
    let mut out = Circuit::new(circuit.width, circuit.connectivity);
    out.extend(ops);

    let error = if circuit.width <= VERIFY_WIDTH_LIMIT {
        let a = circuit_unitary(&out)?;
        let b = circuit_unitary(circuit)?;
        let (_, err) = phase_align(&a, &b);
        if err > 1e-10 {
            return Err(Error::SynthesisFailure(format!(
                "gate-set rewrite drifted from the source by {err:.3e}"
            )));
        }
        err
    } else {
        f64::NAN
    };
    let report = SynthesisReport {
        counts: count_gates(&out),
        error,
        global_phase: wrap_angle(phase),
        branches: vec![],
    };
    Ok((out, report))
}

pub const BUILTIN_NAMES: [&str; 4] = [
    "toffoli_hermitian_cliffordT",
    "toffoli_minimal_hermitian",
    "x_via_ancilla_cnot_pit",
    "x_via_ancilla_cnot_h",
];

/// Returns a named reference circuit.
pub fn builtin(name: &str) -> Result<Circuit> {
    match name {
        "toffoli_hermitian_cliffordT" => Ok(toffoli_hermitian_clifford_t()),
        "toffoli_minimal_hermitian" => Ok(toffoli_minimal_hermitian()),
        "x_via_ancilla_cnot_pit" => Ok(x_via_ancilla_cnot_pit()),
        "x_via_ancilla_cnot_h" => Ok(x_via_ancilla_cnot_h()),
        other => Err(Error::UnknownBuiltin(other.to_string())),
    }
}

/// Toffoli on wires (t, c1, c2) = (0, 1, 2) over {CNOT, H, X, Pi_T}:
/// the image of a 6-CNOT 7-T Toffoli with all but one X cancelled.
/// Counts: 6 CNOT, 7 Pi_T, 2 H, 1 X. Equals the Toffoli up to the
/// global phase e^{-i pi/8}.
pub fn toffoli_hermitian_clifford_t() -> Circuit {
    let pt = |q| GateOp::pi(t_axis(), q);
    let mut c = Circuit::new(3, crate::ir::Connectivity::All);
    c.extend([
        GateOp::h(0),
        GateOp::cnot(1, 2),
        GateOp::cnot(0, 1),
        pt(1),
        pt(2),
        GateOp::cnot(0, 1),
        GateOp::cnot(0, 2),
        GateOp::x(0),
        pt(1),
        pt(2),
        GateOp::cnot(1, 2),
        pt(0),
        pt(2),
        GateOp::cnot(0, 2),
        GateOp::h(0),
        pt(2),
    ]);
    c
}

/// Toffoli on wires (c1, c2, t) = (0, 1, 2) over the minimal set
/// {CNOT, H, Pi_T}: 7 CNOT, 7 Pi_T, 2 H, no X. Equals the Toffoli up
/// to global phase.
pub fn toffoli_minimal_hermitian() -> Circuit {
    let pt = |q| GateOp::pi(t_axis(), q);
    let mut c = Circuit::new(3, crate::ir::Connectivity::All);
    c.extend([
        GateOp::h(2),
        GateOp::cnot(1, 2),
        GateOp::cnot(0, 1),
        pt(1),
        pt(2),
        GateOp::cnot(0, 1),
        GateOp::cnot(2, 0),
        pt(0),
        pt(1),
        GateOp::cnot(1, 0),
        GateOp::cnot(1, 2),
        pt(0),
        pt(2),
        GateOp::cnot(2, 0),
        pt(0),
        GateOp::h(2),
    ]);
    c
}

/// X on wire 0 using wire 1 as an ancilla, with CNOT and Pi_T only:
/// CNOT(a->q) Pi_T(a) CNOT(a->q) Pi_T(a) = X tensor I exactly (Pi_T
/// lies in the xy plane, so conjugating it by the CNOT moves an X onto
/// the target).
pub fn x_via_ancilla_cnot_pit() -> Circuit {
    let mut c = Circuit::new(2, crate::ir::Connectivity::All);
    c.extend([
        GateOp::cnot(1, 0),
        GateOp::pi(t_axis(), 1),
        GateOp::cnot(1, 0),
        GateOp::pi(t_axis(), 1),
    ]);
    c
}

/// X on wire 0 using wire 1 as an ancilla, with CNOT and H only: the
/// square of [CNOT(a->q), H(q), CNOT(q->a), H(q)] is X tensor I
/// exactly.
pub fn x_via_ancilla_cnot_h() -> Circuit {
    let mut c = Circuit::new(2, crate::ir::Connectivity::All);
    for _ in 0..2 {
        c.extend([
            GateOp::cnot(1, 0),
            GateOp::h(0),
            GateOp::cnot(0, 1),
            GateOp::h(0),
        ]);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::{equiv_up_to_phase, pi_matrix, x_matrix};
    use crate::controlled::multi_controlled_embed;
    use crate::ir::Connectivity;
    use crate::matrix::{max_norm_diff, UnitaryMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn op_matrix_1q(op: &GateOp) -> UnitaryMatrix {
        match &op.kind {
            GateKind::H => bloch::hadamard_matrix(),
            GateKind::X => x_matrix(),
            GateKind::Phase(l) => bloch::phase_matrix(*l),
            GateKind::Rot { lambda, axis } => bloch::rotation_matrix(*lambda, axis),
            GateKind::Pi { axis } => pi_matrix(axis),
            GateKind::U2(u) => u.clone(),
            other => panic!("not single-qubit: {}", other.name()),
        }
    }

    /// A random Clifford+T circuit on `width` wires.
    fn random_clifford_t(width: usize, len: usize, rng: &mut ChaCha8Rng) -> Circuit {
        let mut c = Circuit::new(width, Connectivity::All);
        for _ in 0..len {
            let q = rng.gen_range(0..width);
            match rng.gen_range(0..5) {
                0 => c.push(GateOp::h(q)),
                1 => c.push(GateOp::x(q)),
                2 => {
                    let k = rng.gen_range(-3..=4);
                    c.push(GateOp::phase(k as f64 * FRAC_PI_4, q));
                }
                _ => {
                    let mut t = rng.gen_range(0..width);
                    while t == q {
                        t = rng.gen_range(0..width);
                    }
                    c.push(GateOp::cnot(q, t));
                }
            }
        }
        c
    }

    #[test]
    fn pi_s_x_is_s_and_pi_t_x_is_t_up_to_phase() {
        let s = bloch::phase_matrix(FRAC_PI_2);
        let t = bloch::phase_matrix(FRAC_PI_4);
        let pi_s_x = pi_matrix(&s_axis()).mul(&x_matrix());
        let pi_t_x = pi_matrix(&t_axis()).mul(&x_matrix());
        assert!(equiv_up_to_phase(&pi_s_x, &s, 1e-12));
        assert!(equiv_up_to_phase(&pi_t_x, &t, 1e-12));
        let (alpha, _) = phase_align(&s, &pi_s_x);
        assert!((alpha - FRAC_PI_4).abs() <= 1e-12);
        let (alpha, _) = phase_align(&t, &pi_t_x);
        assert!((alpha - PI / 8.0).abs() <= 1e-12);
    }

    #[test]
    fn membership_is_total_and_matches_definitions() {
        let ops = [
            GateOp::cnot(0, 1),
            GateOp::h(0),
            GateOp::x(0),
            GateOp::phase(FRAC_PI_4, 0),
            GateOp::phase(0.3, 0),
            GateOp::rot(0.5, Axis::Z, 0),
            GateOp::rot(0.5, Axis::Y, 0),
            GateOp::pi(t_axis(), 0),
            GateOp::pi(hadamard_axis(), 0),
            GateOp::u2(bloch::hadamard_matrix(), 0),
            GateOp::cz(0, 1),
            GateOp::swap(0, 1),
            GateOp::mcx(&[0, 1], 2),
        ];
        for set in GateSet::ALL {
            for op in &ops {
                // Total: never panics.
                let _ = set.member(op);
            }
        }
        assert!(GateSet::CliffordT.member(&GateOp::phase(FRAC_PI_4, 0)));
        assert!(!GateSet::Clifford.member(&GateOp::phase(FRAC_PI_4, 0)));
        assert!(GateSet::Clifford.member(&GateOp::phase(-FRAC_PI_2, 0)));
        assert!(!GateSet::CliffordT.member(&GateOp::phase(0.3, 0)));
        assert!(GateSet::HermitianHPiT.member(&GateOp::pi(t_axis(), 0)));
        assert!(!GateSet::HermitianHPiT.member(&GateOp::pi(s_axis(), 0)));
        assert!(!GateSet::HermitianHPiT.member(&GateOp::x(0)));
        assert!(GateSet::HermitianHPiTX.member(&GateOp::x(0)));
        assert!(GateSet::UniversalHRz.member(&GateOp::rot(0.5, Axis::Z, 0)));
        assert!(!GateSet::UniversalHRz.member(&GateOp::rot(0.5, Axis::Y, 0)));
        assert!(GateSet::UniversalU.member(&GateOp::u2(bloch::hadamard_matrix(), 0)));
    }

    #[test]
    fn gate_set_parse_round_trips_and_rejects_unknown() {
        for set in GateSet::ALL {
            assert_eq!(GateSet::parse(set.name()).unwrap(), set);
        }
        assert!(matches!(GateSet::parse("nonsense"), Err(Error::UnknownGateSet(_))));
    }

    fn toffoli_oracle(controls: [usize; 2], target: usize) -> UnitaryMatrix {
        multi_controlled_embed(&x_matrix(), &controls, &[target], 3).unwrap()
    }

    #[test]
    fn toffoli_hermitian_clifford_t_matches_toffoli_up_to_phase() {
        let c = toffoli_hermitian_clifford_t();
        let counts = count_gates(&c);
        assert_eq!((counts.cnot, counts.pi, counts.h, counts.x), (6, 7, 2, 1));
        let built = circuit_unitary(&c).unwrap();
        let target = toffoli_oracle([1, 2], 0);
        let (alpha, err) = phase_align(&built, &target);
        assert!(err <= 1e-12, "error {err:.3e}");
        // Not exact: the dropped T phases leave e^{-i pi/8}.
        assert!((alpha + PI / 8.0).abs() <= 1e-12, "alpha {alpha}");
    }

    #[test]
    fn toffoli_minimal_hermitian_matches_toffoli_up_to_phase() {
        let c = toffoli_minimal_hermitian();
        let counts = count_gates(&c);
        assert_eq!((counts.cnot, counts.pi, counts.h, counts.x), (7, 7, 2, 0));
        let built = circuit_unitary(&c).unwrap();
        let target = toffoli_oracle([0, 1], 2);
        let (_, err) = phase_align(&built, &target);
        assert!(err <= 1e-12, "error {err:.3e}");
    }

    #[test]
    fn ancilla_circuits_equal_x_tensor_identity_exactly() {
        for name in ["x_via_ancilla_cnot_pit", "x_via_ancilla_cnot_h"] {
            let c = builtin(name).unwrap();
            let built = circuit_unitary(&c).unwrap();
            let target = x_matrix().kron(&bloch::identity2());
            assert!(max_norm_diff(&built, &target) <= 1e-12, "{name}");
        }
    }

    #[test]
    fn unknown_builtin_name_is_an_error() {
        assert!(matches!(builtin("nope"), Err(Error::UnknownBuiltin(_))));
        for name in BUILTIN_NAMES {
            assert!(builtin(name).is_ok());
        }
    }

    #[test]
    fn t_gate_becomes_pi_t_after_x() {
        let mut c = Circuit::new(1, Connectivity::All);
        c.push(GateOp::phase(FRAC_PI_4, 0));
        let (out, report) = hermitize(&c, GateSet::HermitianHPiTX).unwrap();
        assert_eq!(out.ops.len(), 2);
        assert!(matches!(out.ops[0].kind, GateKind::X));
        assert!(matches!(&out.ops[1].kind, GateKind::Pi { axis } if axis.approx_eq(&t_axis(), 1e-12)));
        // T = e^{i pi/8} Pi_T X, so the source carries +pi/8 relative to
        // the rewritten circuit.
        assert!((report.global_phase - PI / 8.0).abs() <= 1e-12);
        assert!(report.error <= 1e-12);
    }

    /// The 6-CNOT, 7-T Toffoli whose hermitization is the reference
    /// circuit: H on the target conjugates a CCZ phase polynomial.
    fn standard_seven_t_toffoli() -> Circuit {
        let t = |q| GateOp::phase(FRAC_PI_4, q);
        let tdg = |q| GateOp::phase(-FRAC_PI_4, q);
        let mut c = Circuit::new(3, Connectivity::All);
        c.extend([
            GateOp::h(0),
            GateOp::cnot(1, 2),
            GateOp::cnot(0, 1),
            tdg(1),
            tdg(2),
            GateOp::cnot(0, 1),
            GateOp::cnot(0, 2),
            t(0),
            t(1),
            t(2),
            GateOp::cnot(1, 2),
            tdg(2),
            GateOp::cnot(0, 2),
            GateOp::h(0),
            t(2),
        ]);
        c
    }

    #[test]
    fn seven_t_toffoli_hermitizes_to_the_reference_counts() {
        let src = standard_seven_t_toffoli();
        // The source itself is a Toffoli, exactly.
        let target = toffoli_oracle([1, 2], 0);
        assert!(max_norm_diff(&circuit_unitary(&src).unwrap(), &target) <= 1e-12);

        let (out, report) = hermitize(&src, GateSet::HermitianHPiTX).unwrap();
        let counts = count_gates(&out);
        assert_eq!((counts.cnot, counts.pi, counts.h, counts.x), (6, 7, 2, 1));
        assert!(report.error <= 1e-10);
        let reference = circuit_unitary(&toffoli_hermitian_clifford_t()).unwrap();
        assert!(equiv_up_to_phase(&circuit_unitary(&out).unwrap(), &reference, 1e-10));
    }

    #[test]
    fn minimal_set_uses_idle_wire_for_residual_x() {
        let src = standard_seven_t_toffoli();
        // Three busy wires: no ancilla available.
        let err = hermitize(&src, GateSet::HermitianHPiT).unwrap_err();
        match err {
            Error::AncillaRequired { qubit, set, builtin_a, builtin_b } => {
                assert_eq!(qubit, 0);
                assert_eq!(set, "Hermitian-HPiT");
                assert_eq!(builtin_a, "x_via_ancilla_cnot_pit");
                assert_eq!(builtin_b, "x_via_ancilla_cnot_h");
            }
            other => panic!("expected AncillaRequired, got {other}"),
        }

        // A fourth, idle wire lets the rewrite finish.
        let mut wide = Circuit::new(4, Connectivity::All);
        wide.extend(src.ops.clone());
        let (out, report) = hermitize(&wide, GateSet::HermitianHPiT).unwrap();
        assert!(out.ops.iter().all(|op| GateSet::HermitianHPiT.member(op)));
        assert!(report.error <= 1e-10);
    }

    #[test]
    fn x_gates_cancel_through_cnot_targets() {
        // T-dagger, CNOT onto the same wire, T: the inner X pair meets
        // across the CNOT target and vanishes.
        let mut c = Circuit::new(2, Connectivity::All);
        c.push(GateOp::phase(-FRAC_PI_4, 0));
        c.push(GateOp::cnot(1, 0));
        c.push(GateOp::phase(FRAC_PI_4, 0));
        let (out, report) = hermitize(&c, GateSet::HermitianHPiTX).unwrap();
        let counts = count_gates(&out);
        assert_eq!(counts.x, 0);
        assert_eq!(counts.pi, 2);
        assert_eq!(counts.cnot, 1);
        assert!(report.error <= 1e-12);
    }

    #[test]
    fn random_clifford_t_circuits_hermitize_to_hpi() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for i in 0..25 {
            let src = random_clifford_t(3, 20, &mut rng);
            let (out, report) = hermitize(&src, GateSet::HermitianHPi).unwrap();
            assert!(report.error <= 1e-9, "sample {i}: {:.3e}", report.error);
            for op in &out.ops {
                assert!(GateSet::HermitianHPi.member(op));
                if op.qubits.len() == 1 {
                    let m = op_matrix_1q(op);
                    assert!(max_norm_diff(&m, &m.adjoint()) <= 1e-12, "sample {i}");
                }
            }
        }
    }

    #[test]
    fn s_only_set_rejects_t_and_accepts_clifford_phases() {
        let mut c = Circuit::new(1, Connectivity::All);
        c.push(GateOp::phase(FRAC_PI_4, 0));
        assert!(matches!(
            hermitize(&c, GateSet::HermitianHPiSX),
            Err(Error::UnsupportedForTarget { .. })
        ));
        let mut c = Circuit::new(1, Connectivity::All);
        c.push(GateOp::phase(-FRAC_PI_2, 0));
        c.push(GateOp::h(0));
        let (out, report) = hermitize(&c, GateSet::HermitianHPiSX).unwrap();
        assert!(out.ops.iter().all(|op| GateSet::HermitianHPiSX.member(op)));
        assert!(report.error <= 1e-12);
    }

    #[test]
    fn rotation_becomes_two_reflections_in_pi_set() {
        let mut c = Circuit::new(1, Connectivity::All);
        c.push(GateOp::rot(0.7, Axis::normalize(1.0, 2.0, -1.0).unwrap(), 0));
        let (out, report) = hermitize(&c, GateSet::HermitianPi).unwrap();
        assert_eq!(out.ops.len(), 2);
        assert!(out.ops.iter().all(|op| matches!(op.kind, GateKind::Pi { .. })));
        assert!(report.error <= 1e-12);
    }

    #[test]
    fn hermitian_circuit_rewrites_back_to_h_rz() {
        let mut c = Circuit::new(2, Connectivity::All);
        c.push(GateOp::pi(t_axis(), 0));
        c.push(GateOp::cnot(0, 1));
        c.push(GateOp::pi(hadamard_axis(), 1));
        let (out, report) = hermitize(&c, GateSet::UniversalHRz).unwrap();
        assert!(out.ops.iter().all(|op| GateSet::UniversalHRz.member(op)));
        assert!(report.error <= 1e-10);
    }

    #[test]
    fn convenience_two_qubit_kinds_expand_before_rewriting() {
        let mut c = Circuit::new(2, Connectivity::All);
        c.push(GateOp::cz(0, 1));
        c.push(GateOp::swap(0, 1));
        c.push(GateOp::ciy(0, 1));
        let (out, report) = hermitize(&c, GateSet::HermitianHPi).unwrap();
        assert!(out.ops.iter().all(|op| GateSet::HermitianHPi.member(op)));
        assert!(report.error <= 1e-10);
    }

    #[test]
    fn recorded_phase_matches_measured_alignment() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let src = random_clifford_t(2, 12, &mut rng);
        let (out, report) = hermitize(&src, GateSet::HermitianHPi).unwrap();
        let a = circuit_unitary(&out).unwrap();
        let b = circuit_unitary(&src).unwrap();
        // Recorded orientation: source = e^{i phi} rewritten.
        let (phi, _) = phase_align(&b, &a);
        let diff = wrap_angle(phi - report.global_phase);
        assert!(diff.abs() <= 1e-9, "phi {phi} vs recorded {}", report.global_phase);
    }
}
