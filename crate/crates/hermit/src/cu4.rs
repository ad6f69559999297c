//! Controlled two-qubit unitaries: 10-CNOT all-to-all and 13-CNOT
//! linear-chain circuits, emitted in four single-qubit bases.
//!
//! Any C-V with V in U(4) splits as V = e^{i phi} U with U in SU(4)
//! realized by the pi-rotation circuit of [`crate::kak::su4_pi_circuit`].
//! Controlling that circuit costs nothing extra for its entangling core:
//! with the control off, the three entanglers compose to the identity
//! (i X Z Y = I on the target of the chain), so only the seven
//! pi-rotations and the phase P(phi) need controls, and each controlled
//! pi-rotation costs exactly one CNOT. That yields 10 CNOTs all-to-all.
//!
//! On a linear chain the two fan-out CNOT pairs from a shared control
//! become 3-CNOT groups, and for a centered control the circuit is
//! conjugated by control/target swaps absorbed into neighboring CNOTs at
//! 2 CNOTs each; every placement lands on 13 CNOTs.
//!
//! Single-qubit content is emitted per basis: literal controlled-pi
//! conjugations (`ControlledPi`), merged Rz/Ry rotations (`Zy`, at most
//! 10 Ry + 15 Rz), merged single rotations (`Rv`, at most 15), or
//! pi-rotations only (`Pi`, at most 20 singles: 19 reflections and one
//! X), where X gates ride through CNOT targets to turn planar rotations
//! into single reflections.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::bloch::{
    self, hadamard_axis, phase_align, phase_matrix, pi_matrix, rotation_matrix, s_axis,
    x_matrix, Axis,
};
use crate::controlled::multi_controlled_embed;
use crate::error::{Error, Result};
use crate::ir::{
    circuit_unitary, count_gates, BranchOutcome, Circuit, Connectivity, GateKind, GateOp,
    SynthesisReport,
};
use crate::kak::{phase_select, Su4PiParams};
use crate::matrix::UnitaryMatrix;
use crate::single_qubit::{
    euler_decompose, midpoint_axes, to_axis_angle, two_pi_factorize, EulerConvention,
};
use crate::tol;

/// Placement of control and targets on the three wires.
///
/// `AllToAll` allows any pair to interact; the three `Lnn*` kinds pin
/// the circuit to a linear chain 0-1-2 with the control on the named
/// position, and every emitted two-qubit gate acts on adjacent wires.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    AllToAll,
    LnnControlFirst,
    LnnControlLast,
    LnnControlMiddle,
}

impl Layout {
    /// Physical wires of (control, t1, t2).
    pub fn placement(&self) -> (usize, usize, usize) {
        match self {
            Layout::AllToAll | Layout::LnnControlFirst => (0, 1, 2),
            Layout::LnnControlLast => (2, 1, 0),
            Layout::LnnControlMiddle => (1, 0, 2),
        }
    }

    pub fn connectivity(&self) -> Connectivity {
        match self {
            Layout::AllToAll => Connectivity::All,
            _ => Connectivity::Lnn,
        }
    }

    pub fn is_lnn(&self) -> bool {
        !matches!(self, Layout::AllToAll)
    }
}

/// Single-qubit basis of the emitted circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisChoice {
    /// Pi-rotation conjugations around each CNOT, with the locals left
    /// as opaque 2x2 gates; the direct image of the skeleton.
    ControlledPi,
    /// Rz/Ry rotations, adjacent rotations merged.
    Zy,
    /// Single axis-angle rotations, one per merged run.
    Rv,
    /// Pi-rotations only, plus a single X on the control wire.
    Pi,
}

/// Named single-qubit run slots of the structure. Names follow wire and
/// position: T1B is the second run on t1, between the first fan and the
/// controlled-iY entangler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SlotId {
    T1A,
    T2A,
    Ca,
    T1B,
    T2B,
    T1C,
    T2C,
    T1D,
    T2D,
    T1E,
    T1F,
    T2E,
    T1G,
    T2F,
    T1H,
    T2G,
}

/// Atomic ops of a slot in the pi-conjugation (midpoint) style.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Atom {
    /// Pi about the midpoint of +x and axis v_j (1-based index).
    PiM(usize),
    /// Pi about the S axis (midpoint of +x and +y), from the C-iY
    /// entangler.
    PiVs,
    /// Pi about the Hadamard axis, from the CZ entangler.
    PiH,
    /// The local U1 or U2.
    UGate(usize),
    /// Its adjoint.
    UAdj(usize),
    /// P(phi), the controlled global phase.
    PhasePhi,
    /// P(pi/2) on t1, completing C-iY from C-Y.
    PhaseHalfPi,
}

fn slot_atoms(id: SlotId) -> &'static [Atom] {
    use Atom::*;
    use SlotId::*;
    match id {
        T1A => &[PiM(1)],
        T2A => &[PiM(2)],
        Ca => &[PhasePhi],
        T1B => &[PiM(1), UGate(1), PhaseHalfPi],
        T2B => &[PiM(2), UGate(2), PiVs],
        T1C => &[PiM(3)],
        T2C => &[PiVs, PiM(4)],
        T1D => &[PiM(3), PiH],
        T2D => &[PiM(4)],
        T1E => &[PiH, PiM(5)],
        T1F => &[PiM(5)],
        T2E => &[],
        T1G => &[UAdj(1), PiM(6)],
        T2F => &[UAdj(2), PiM(7)],
        T1H => &[PiM(6)],
        T2G => &[PiM(7)],
    }
}

/// One item of a layout's emission template with physical wires
/// resolved.
#[derive(Debug, Clone, Copy)]
enum TItem {
    Slot(SlotId, usize),
    Cnot { control: usize, target: usize },
}

/// All derived angles of a parameter set, shared by the basis emitters.
struct Derived {
    phi: f64,
    u1: UnitaryMatrix,
    u2: UnitaryMatrix,
    /// v[j-1] is axis j of the pi-rotation circuit.
    v: [Axis; 7],
    /// m[j-1] is the midpoint of +x and v[j].
    m: [Axis; 7],
    /// Azimuths of the xy-plane axes v1, v2, v4.
    phi1: f64,
    phi2: f64,
    phi4: f64,
    /// y-rotation angles carrying +x onto the xz-plane axes v3, v5.
    beta3: f64,
    beta5: f64,
    /// Rz/Ry conjugation angles for the generic axes v6, v7, from the
    /// ZYX Euler split of their midpoint reflections.
    phi6: f64,
    psi6: f64,
    phi7: f64,
    psi7: f64,
    branches: Vec<BranchOutcome>,
}

impl Derived {
    fn new(phi: f64, p: &Su4PiParams, branches: Vec<BranchOutcome>) -> Result<Derived> {
        let v = [p.v1, p.v2, p.v3, p.v4, p.v5, p.v6, p.v7];
        let mut m = [Axis::X; 7];
        for (j, vj) in v.iter().enumerate() {
            m[j] = midpoint_axes(&Axis::X, vj);
        }
        let zyx = |ax: &Axis| -> Result<(f64, f64)> {
            let e = euler_decompose(&pi_matrix(ax), EulerConvention::Zyx)?;
            Ok((e.angles[0], e.angles[1]))
        };
        let (phi6, psi6) = zyx(&m[5])?;
        let (phi7, psi7) = zyx(&m[6])?;
        Ok(Derived {
            phi,
            u1: p.u1.clone(),
            u2: p.u2.clone(),
            v,
            m,
            phi1: p.v1.y.atan2(p.v1.x),
            phi2: p.v2.y.atan2(p.v2.x),
            phi4: p.v4.y.atan2(p.v4.x),
            beta3: (-p.v3.z).atan2(p.v3.x),
            beta5: (-p.v5.z).atan2(p.v5.x),
            phi6,
            psi6,
            phi7,
            psi7,
            branches,
        })
    }

    fn from_unitary(vmat: &UnitaryMatrix) -> Result<Derived> {
        let sel = phase_select(vmat)?;
        Derived::new(sel.phi, &sel.params, sel.branches)
    }

    /// Literal ops of a slot in the midpoint style, on the given wire.
    fn atom_ops(&self, id: SlotId, wire: usize) -> Vec<GateOp> {
        slot_atoms(id)
            .iter()
            .map(|atom| match atom {
                Atom::PiM(j) => GateOp::pi(self.m[j - 1], wire),
                Atom::PiVs => GateOp::pi(s_axis(), wire),
                Atom::PiH => GateOp::pi(hadamard_axis(), wire),
                Atom::UGate(1) => GateOp::u2(self.u1.clone(), wire),
                Atom::UGate(_) => GateOp::u2(self.u2.clone(), wire),
                Atom::UAdj(1) => GateOp::u2(self.u1.adjoint(), wire),
                Atom::UAdj(_) => GateOp::u2(self.u2.adjoint(), wire),
                Atom::PhasePhi => GateOp::phase(self.phi, wire),
                Atom::PhaseHalfPi => GateOp::phase(FRAC_PI_2, wire),
            })
            .collect()
    }

    /// Ops of a slot in the rotation style (conjugation by Rz/Ry instead
    /// of midpoint reflections), on the given wire.
    fn rot_ops(&self, id: SlotId, wire: usize) -> Vec<GateOp> {
        use SlotId::*;
        let rz = |a: f64| GateOp::rot(a, Axis::Z, wire);
        let ry = |a: f64| GateOp::rot(a, Axis::Y, wire);
        match id {
            T1A => vec![rz(-self.phi1)],
            T2A => vec![rz(-self.phi2)],
            Ca => vec![GateOp::phase(self.phi, wire)],
            T1B => vec![
                rz(self.phi1),
                GateOp::u2(self.u1.clone(), wire),
                GateOp::phase(FRAC_PI_2, wire),
            ],
            T2B => vec![
                rz(self.phi2),
                GateOp::u2(self.u2.clone(), wire),
                rz(-FRAC_PI_2),
            ],
            T1C => vec![ry(-self.beta3)],
            T2C => vec![rz(FRAC_PI_2), rz(-self.phi4)],
            T1D => vec![ry(self.beta3), ry(FRAC_PI_2)],
            T2D => vec![rz(self.phi4)],
            T1E => vec![ry(-FRAC_PI_2), ry(-self.beta5)],
            T1F => vec![ry(self.beta5)],
            T2E => vec![],
            T1G => vec![
                GateOp::u2(self.u1.adjoint(), wire),
                rz(-self.phi6),
                ry(-self.psi6),
            ],
            T2F => vec![
                GateOp::u2(self.u2.adjoint(), wire),
                rz(-self.phi7),
                ry(-self.psi7),
            ],
            T1H => vec![ry(self.psi6), rz(self.phi6)],
            T2G => vec![ry(self.psi7), rz(self.phi7)],
        }
    }
}

/// Emission template for the all-to-all layout: 10 CNOTs with the runs
/// interleaved in skeleton order.
fn template_a2a() -> Vec<TItem> {
    use SlotId::*;
    let (c, t1, t2) = (0usize, 1usize, 2usize);
    let s = |id, w| TItem::Slot(id, w);
    let x = |a, b| TItem::Cnot { control: a, target: b };
    vec![
        s(T1A, t1),
        x(c, t1),
        s(T2A, t2),
        x(c, t2),
        s(Ca, c),
        s(T1B, t1),
        s(T2B, t2),
        x(t1, t2),
        s(T1C, t1),
        s(T2C, t2),
        x(c, t1),
        s(T1D, t1),
        x(c, t2),
        s(T2D, t2),
        x(t2, t1),
        s(T1E, t1),
        x(c, t1),
        s(T1F, t1),
        s(T2E, t2),
        x(t1, t2),
        s(T1G, t1),
        s(T2F, t2),
        x(c, t1),
        s(T1H, t1),
        x(c, t2),
        s(T2G, t2),
    ]
}

/// Emission template for a chain with the control at an end. Each
/// fan-out pair C(c->t1), C(c->t2) becomes the adjacent 3-CNOT group
/// C(t1->t2), C(c->t1), C(t1->t2).
fn template_chain(c: usize, t1: usize, t2: usize) -> Vec<TItem> {
    use SlotId::*;
    let s = |id, w| TItem::Slot(id, w);
    let x = |a, b| TItem::Cnot { control: a, target: b };
    vec![
        s(T1A, t1),
        s(T2A, t2),
        x(t1, t2),
        x(c, t1),
        x(t1, t2),
        s(Ca, c),
        s(T1B, t1),
        s(T2B, t2),
        x(t1, t2),
        s(T1C, t1),
        s(T2C, t2),
        x(t1, t2),
        x(c, t1),
        x(t1, t2),
        s(T1D, t1),
        s(T2D, t2),
        x(t2, t1),
        s(T1E, t1),
        x(c, t1),
        s(T1F, t1),
        s(T2E, t2),
        x(t1, t2),
        s(T1G, t1),
        s(T2F, t2),
        x(t1, t2),
        x(c, t1),
        x(t1, t2),
        s(T1H, t1),
        s(T2G, t2),
    ]
}

/// Emission template for the centered control. The control starts on
/// wire 1; the first fan CNOT C(c->t1) merges with a control/target
/// swap into two CNOTs ([C(1->0), SWAP] = [C(0->1), C(1->0)]), the
/// middle runs with the control on wire 0, and the last fan CNOT merges
/// with the swap back. Wires: t2 fixed on 2; t1 on 0 outside the middle
/// section, on 1 inside; control the other way round.
fn template_mid() -> Vec<TItem> {
    use SlotId::*;
    let s = |id, w| TItem::Slot(id, w);
    let x = |a, b| TItem::Cnot { control: a, target: b };
    vec![
        s(T2A, 2),
        x(1, 2),
        s(T1A, 0),
        x(0, 1),
        x(1, 0),
        s(Ca, 0),
        s(T1B, 1),
        s(T2B, 2),
        x(1, 2),
        s(T1C, 1),
        s(T2C, 2),
        x(1, 2),
        x(0, 1),
        x(1, 2),
        s(T1D, 1),
        s(T2D, 2),
        x(2, 1),
        s(T1E, 1),
        x(0, 1),
        s(T1F, 1),
        s(T2E, 2),
        x(1, 2),
        s(T1G, 1),
        x(1, 0),
        x(0, 1),
        s(T1H, 0),
        s(T2F, 2),
        x(1, 2),
        s(T2G, 2),
    ]
}

fn template(layout: Layout) -> Vec<TItem> {
    match layout {
        Layout::AllToAll => template_a2a(),
        Layout::LnnControlFirst => template_chain(0, 1, 2),
        Layout::LnnControlLast => template_chain(2, 1, 0),
        Layout::LnnControlMiddle => template_mid(),
    }
}

/// 2x2 matrix of a single-qubit op.
fn op_matrix(op: &GateOp) -> UnitaryMatrix {
    match &op.kind {
        GateKind::H => bloch::hadamard_matrix(),
        GateKind::X => x_matrix(),
        GateKind::Phase(l) => phase_matrix(*l),
        GateKind::Rot { lambda, axis } => rotation_matrix(*lambda, axis),
        GateKind::Pi { axis } => pi_matrix(axis),
        GateKind::U2(u) => u.clone(),
        other => unreachable!("not a single-qubit op: {}", other.name()),
    }
}

fn ops_matrix(ops: &[GateOp]) -> UnitaryMatrix {
    let mut m = bloch::identity2();
    for op in ops {
        m = op_matrix(op).mul(&m);
    }
    m
}

/// Angle classification threshold separating rounding noise from
/// structure; the runs are exact identities, reflections, or rotations
/// by construction, so anything near pi is pi.
const CLASS_TOL: f64 = 1e-9;

enum RunClass {
    Identity,
    Reflection(Axis),
    Generic,
}

fn classify(m: &UnitaryMatrix) -> Result<RunClass> {
    let aa = to_axis_angle(m)?;
    if (aa.lambda / 2.0).sin().abs() <= CLASS_TOL {
        return Ok(RunClass::Identity);
    }
    if (aa.lambda - PI).abs() <= CLASS_TOL {
        return Ok(RunClass::Reflection(aa.axis));
    }
    Ok(RunClass::Generic)
}

/// Emits a merged run matrix as Rz/Ry rotations in circuit order,
/// dropping global phase. Fixed-axis runs become one rotation; generic
/// runs use the ZYZ Euler split, with a trailing Rz(+-pi) absorbed into
/// the Ry (Ry(t) Rz(pi) = Rz(pi) Ry(-t), exactly) so two-rotation
/// products never cost three gates.
fn finalize_zy(m: &UnitaryMatrix, wire: usize) -> Result<Vec<GateOp>> {
    let aa = to_axis_angle(m)?;
    if (aa.lambda / 2.0).sin().abs() <= CLASS_TOL {
        return Ok(vec![]);
    }
    let push = |ops: &mut Vec<GateOp>, angle: f64, axis: Axis| {
        if angle.abs() > tol::ANGLE_ELIDE_TOL {
            ops.push(GateOp::rot(angle, axis, wire));
        }
    };
    let ax = aa.axis;
    if ax.x.abs() <= tol::AXIS_ZERO_TOL && ax.y.abs() <= tol::AXIS_ZERO_TOL {
        let mut ops = vec![];
        push(&mut ops, bloch::wrap_angle(aa.lambda * ax.z.signum()), Axis::Z);
        return Ok(ops);
    }
    if ax.x.abs() <= tol::AXIS_ZERO_TOL && ax.z.abs() <= tol::AXIS_ZERO_TOL {
        let mut ops = vec![];
        push(&mut ops, bloch::wrap_angle(aa.lambda * ax.y.signum()), Axis::Y);
        return Ok(ops);
    }
    let e = euler_decompose(m, EulerConvention::Zyz)?;
    let (f, t, l) = (e.angles[0], e.angles[1], e.angles[2]);
    let lw = bloch::wrap_angle(l);
    let mut ops = vec![];
    if (lw.abs() - PI).abs() <= CLASS_TOL {
        push(&mut ops, -t, Axis::Y);
        push(&mut ops, bloch::wrap_angle(f + lw), Axis::Z);
    } else {
        push(&mut ops, lw, Axis::Z);
        push(&mut ops, t, Axis::Y);
        push(&mut ops, bloch::wrap_angle(f), Axis::Z);
    }
    Ok(ops)
}

/// Emits a merged run as a single axis-angle rotation, or nothing when
/// it is proportional to the identity.
fn finalize_rv(m: &UnitaryMatrix, wire: usize) -> Result<Vec<GateOp>> {
    let aa = to_axis_angle(m)?;
    let lw = bloch::wrap_angle(aa.lambda);
    if (aa.lambda / 2.0).sin().abs() <= CLASS_TOL || lw.abs() <= tol::ANGLE_ELIDE_TOL {
        return Ok(vec![]);
    }
    Ok(vec![GateOp::rot(lw, aa.axis, wire)])
}

/// One per-wire run in the pi-basis planner.
struct PiRun {
    matrix: UnitaryMatrix,
    /// Fixed emission bypassing the planner (the control-phase run,
    /// which becomes [X, Pi] literally). Forces even parity.
    literal: Option<Vec<GateOp>>,
}

/// Pi-gate cost of emitting this run with the given X parity across it.
fn pi_run_cost(run: &PiRun, odd: bool) -> Result<Option<usize>> {
    if let Some(ops) = &run.literal {
        return Ok(if odd { None } else { Some(ops.len()) });
    }
    let m = if odd { run.matrix.mul(&x_matrix()) } else { run.matrix.clone() };
    Ok(Some(match classify(&m)? {
        RunClass::Identity => 0,
        RunClass::Reflection(_) => 1,
        RunClass::Generic => 2,
    }))
}

/// Pi-gate ops of a run with X parities l (earlier side) and r (later
/// side): the effective matrix is X^r M X^l, emitted as zero, one, or
/// two reflections (first factor of a generic split lies in the xy
/// plane). Global phase is dropped.
fn pi_run_emit(run: &PiRun, l: bool, r: bool, wire: usize) -> Result<Vec<GateOp>> {
    if let Some(ops) = &run.literal {
        return Ok(ops.clone());
    }
    let mut m = run.matrix.clone();
    if l {
        m = m.mul(&x_matrix());
    }
    if r {
        m = x_matrix().mul(&m);
    }
    Ok(match classify(&m)? {
        RunClass::Identity => vec![],
        RunClass::Reflection(ax) => vec![GateOp::pi(ax, wire)],
        RunClass::Generic => {
            let f = two_pi_factorize(&m, None)?;
            vec![GateOp::pi(f.v1, wire), GateOp::pi(f.v2, wire)]
        }
    })
}

/// Chooses X parities at the insertable boundaries of one wire (those
/// where the wire is a CNOT target) minimizing the emitted pi count,
/// ties broken toward fewer insertions. Returns the emitted ops per
/// run.
fn pi_wire_plan(
    runs: &[PiRun],
    insertable: &[bool],
    wire: usize,
) -> Result<Vec<Vec<GateOp>>> {
    let n = runs.len();
    debug_assert_eq!(insertable.len() + 1, n);
    if n == 1 {
        return Ok(vec![pi_run_emit(&runs[0], false, false, wire)?]);
    }
    // dp[i][p]: best (pi count, insertions) with parity p at boundary i,
    // covering runs 0..=i.
    let inf = (usize::MAX / 2, usize::MAX / 2);
    let mut dp = vec![[inf; 2]; n - 1];
    let mut parent = vec![[0usize; 2]; n - 1];
    for p in 0..2 {
        if p == 1 && !insertable[0] {
            continue;
        }
        if let Some(c) = pi_run_cost(&runs[0], p == 1)? {
            dp[0][p] = (c, p);
        }
    }
    for i in 1..n - 1 {
        for q in 0..2 {
            if q == 1 && !insertable[i] {
                continue;
            }
            for p in 0..2 {
                if dp[i - 1][p] == inf {
                    continue;
                }
                if let Some(c) = pi_run_cost(&runs[i], p != q)? {
                    let cand = (dp[i - 1][p].0 + c, dp[i - 1][p].1 + q);
                    if cand < dp[i][q] {
                        dp[i][q] = cand;
                        parent[i][q] = p;
                    }
                }
            }
        }
    }
    let mut best = inf;
    let mut best_p = 0;
    for p in 0..2 {
        if dp[n - 2][p] == inf {
            continue;
        }
        if let Some(c) = pi_run_cost(&runs[n - 1], p == 1)? {
            let cand = (dp[n - 2][p].0 + c, dp[n - 2][p].1);
            if cand < best {
                best = cand;
                best_p = p;
            }
        }
    }
    if best == inf {
        return Err(Error::SynthesisFailure("pi-basis planning found no parity assignment".into()));
    }
    let mut parity = vec![0usize; n - 1];
    parity[n - 2] = best_p;
    for i in (1..n - 1).rev() {
        parity[i - 1] = parent[i][parity[i]];
    }
    let mut out = Vec::with_capacity(n);
    for (i, run) in runs.iter().enumerate() {
        let l = i > 0 && parity[i - 1] == 1;
        let r = i < n - 1 && parity[i] == 1;
        out.push(pi_run_emit(run, l, r, wire)?);
    }
    Ok(out)
}

/// Emits the template in the requested basis.
fn emit(items: &[TItem], d: &Derived, basis: BasisChoice, conn: Connectivity) -> Result<Circuit> {
    let mut circuit = Circuit::new(3, conn);
    match basis {
        BasisChoice::ControlledPi => {
            for item in items {
                match item {
                    TItem::Slot(id, w) => circuit.extend(d.atom_ops(*id, *w)),
                    TItem::Cnot { control, target } => {
                        circuit.push(GateOp::cnot(*control, *target))
                    }
                }
            }
        }
        BasisChoice::Zy | BasisChoice::Rv => {
            for item in items {
                match item {
                    TItem::Slot(id, w) => {
                        let m = ops_matrix(&d.rot_ops(*id, *w));
                        let ops = if basis == BasisChoice::Zy {
                            finalize_zy(&m, *w)?
                        } else {
                            finalize_rv(&m, *w)?
                        };
                        circuit.extend(ops);
                    }
                    TItem::Cnot { control, target } => {
                        circuit.push(GateOp::cnot(*control, *target))
                    }
                }
            }
        }
        BasisChoice::Pi => {
            emit_pi(items, d, &mut circuit)?;
        }
    }
    Ok(circuit)
}

/// Pi-basis emission: collects per-wire runs and boundaries, plans X
/// parities, and interleaves the per-run emissions back into template
/// order.
fn emit_pi(items: &[TItem], d: &Derived, circuit: &mut Circuit) -> Result<()> {
    let mut runs: [Vec<PiRun>; 3] = Default::default();
    let mut bounds: [Vec<bool>; 3] = Default::default();
    let mut current: [Vec<GateOp>; 3] = Default::default();
    let mut current_literal: [Option<Vec<GateOp>>; 3] = Default::default();

    let close = |w: usize,
                 current: &mut [Vec<GateOp>; 3],
                 current_literal: &mut [Option<Vec<GateOp>>; 3],
                 runs: &mut [Vec<PiRun>; 3]| {
        let ops = std::mem::take(&mut current[w]);
        runs[w].push(PiRun { matrix: ops_matrix(&ops), literal: current_literal[w].take() });
    };

    for item in items {
        match item {
            TItem::Slot(id, w) => {
                if *id == SlotId::Ca {
                    // The controlled phase becomes Rz(phi) = Pi X up to
                    // global phase: one X and one xy-plane reflection.
                    let phi = bloch::wrap_angle(d.phi);
                    let lit = if phi.abs() <= tol::ANGLE_ELIDE_TOL {
                        vec![]
                    } else {
                        vec![
                            GateOp::x(*w),
                            GateOp::pi(Axis::from_spherical(FRAC_PI_2, phi / 2.0), *w),
                        ]
                    };
                    current_literal[*w] = Some(lit);
                    current[*w] = vec![GateOp::phase(phi, *w)];
                } else {
                    current[*w].extend(d.atom_ops(*id, *w));
                }
            }
            TItem::Cnot { control, target } => {
                for &w in &[*control, *target] {
                    close(w, &mut current, &mut current_literal, &mut runs);
                    bounds[w].push(w == *target);
                }
            }
        }
    }
    for w in 0..3 {
        close(w, &mut current, &mut current_literal, &mut runs);
    }

    let mut emitted: Vec<Vec<Vec<GateOp>>> = Vec::with_capacity(3);
    for w in 0..3 {
        emitted.push(pi_wire_plan(&runs[w], &bounds[w], w)?);
    }

    // Interleave: each run's ops appear at its first slot, or just
    // before the CNOT closing it when the run has no slot (inserted X
    // pairs in otherwise empty runs).
    let mut idx = [0usize; 3];
    let mut flushed = [false; 3];
    let flush = |w: usize, circuit: &mut Circuit, idx: &[usize; 3], flushed: &mut [bool; 3]| {
        if !flushed[w] {
            circuit.extend(emitted[w][idx[w]].clone());
            flushed[w] = true;
        }
    };
    for item in items {
        match item {
            TItem::Slot(_, w) => flush(*w, circuit, &idx, &mut flushed),
            TItem::Cnot { control, target } => {
                for &w in &[*control, *target] {
                    flush(w, circuit, &idx, &mut flushed);
                    idx[w] += 1;
                    flushed[w] = false;
                }
                circuit.push(GateOp::cnot(*control, *target));
            }
        }
    }
    for w in 0..3 {
        flush(w, circuit, &idx, &mut flushed);
    }
    Ok(())
}

/// The dense 8x8 target C-v for a layout's wire placement.
fn controlled_target(v: &UnitaryMatrix, layout: Layout) -> Result<UnitaryMatrix> {
    let (c, t1, t2) = layout.placement();
    multi_controlled_embed(v, &[c], &[t1, t2], 3)
}

/// The controlled-pi skeleton of C-v on wires (c, t1, t2) = (0, 1, 2):
/// the pi-rotation SU(4) circuit with controls added to its seven
/// reflections and the branch phase as P(phi) on the control. The
/// entangling core needs no controls: with the control off it collapses
/// to the identity (i X Z Y = I). Always 15 ops; equals C-v exactly.
pub fn build_cu4_cpi_skeleton(v: &UnitaryMatrix) -> Result<Circuit> {
    let d = Derived::from_unitary(v)?;
    Ok(skeleton_from(&d))
}

fn skeleton_from(d: &Derived) -> Circuit {
    let mut c = Circuit::new(3, Connectivity::All);
    let cpi = |axis: Axis, t: usize| GateOp::mcrot(&[0], t, PI, axis, FRAC_PI_2);
    c.push(cpi(d.v[0], 1));
    c.push(cpi(d.v[1], 2));
    c.push(GateOp::phase(d.phi, 0));
    c.push(GateOp::u2(d.u1.clone(), 1));
    c.push(GateOp::u2(d.u2.clone(), 2));
    c.push(GateOp::ciy(1, 2));
    c.push(cpi(d.v[2], 1));
    c.push(cpi(d.v[3], 2));
    c.push(GateOp::cz(2, 1));
    c.push(cpi(d.v[4], 1));
    c.push(GateOp::cnot(1, 2));
    c.push(GateOp::u2(d.u1.adjoint(), 1));
    c.push(GateOp::u2(d.u2.adjoint(), 2));
    c.push(cpi(d.v[5], 1));
    c.push(cpi(d.v[6], 2));
    c
}

/// Builds C-v in the given layout and basis with a verification report.
///
/// The circuit matrix equals the 8x8 controlled target up to global
/// phase within the reported error; CNOT count is exactly 10 all-to-all
/// and 13 on chains; single-qubit counts stay within 15 rotations (Rv),
/// 10 Ry + 15 Rz (Zy), or 20 reflections-plus-X (Pi).
pub fn build_cu4(
    v: &UnitaryMatrix,
    layout: Layout,
    basis: BasisChoice,
) -> Result<(Circuit, SynthesisReport)> {
    if v.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: v.dim() });
    }
    let d = Derived::from_unitary(v)?;
    let circuit = emit(&template(layout), &d, basis, layout.connectivity())?;

    let built = circuit_unitary(&circuit)?;
    let target = controlled_target(v, layout)?;
    let (alpha, err) = phase_align(&target, &built);
    if err > tol::RECONSTRUCT_2Q_TOL {
        return Err(Error::SynthesisFailure(format!(
            "controlled circuit differs from target by {err:.3e}"
        )));
    }
    let report = SynthesisReport {
        counts: count_gates(&circuit),
        error: err,
        global_phase: alpha,
        branches: d.branches.clone(),
    };
    Ok((circuit, report))
}

/// Parses the 15-op skeleton back into parameters.
fn parse_skeleton(c: &Circuit) -> Result<Derived> {
    let shape_err = || Error::PreconditionViolated("not a controlled-pi skeleton circuit".into());
    if c.width != 3 || c.ops.len() != 15 {
        return Err(shape_err());
    }
    let cpi_axis = |op: &GateOp, t: usize| -> Result<Axis> {
        match &op.kind {
            GateKind::McRot { lambda, axis, psi }
                if (*lambda - PI).abs() <= 1e-9
                    && (*psi - FRAC_PI_2).abs() <= 1e-9
                    && op.qubits == vec![0, t] =>
            {
                Ok(*axis)
            }
            _ => Err(shape_err()),
        }
    };
    let u2_of = |op: &GateOp, q: usize| -> Result<UnitaryMatrix> {
        match &op.kind {
            GateKind::U2(u) if op.qubits == vec![q] => Ok(u.clone()),
            _ => Err(shape_err()),
        }
    };
    let v1 = cpi_axis(&c.ops[0], 1)?;
    let v2 = cpi_axis(&c.ops[1], 2)?;
    let phi = match &c.ops[2].kind {
        GateKind::Phase(l) if c.ops[2].qubits == vec![0] => *l,
        _ => return Err(shape_err()),
    };
    let u1 = u2_of(&c.ops[3], 1)?;
    let u2 = u2_of(&c.ops[4], 2)?;
    if c.ops[5] != GateOp::ciy(1, 2) {
        return Err(shape_err());
    }
    let v3 = cpi_axis(&c.ops[6], 1)?;
    let v4 = cpi_axis(&c.ops[7], 2)?;
    if c.ops[8] != GateOp::cz(2, 1) {
        return Err(shape_err());
    }
    let v5 = cpi_axis(&c.ops[9], 1)?;
    if c.ops[10] != GateOp::cnot(1, 2) {
        return Err(shape_err());
    }
    u2_of(&c.ops[11], 1)?;
    u2_of(&c.ops[12], 2)?;
    let v6 = cpi_axis(&c.ops[13], 1)?;
    let v7 = cpi_axis(&c.ops[14], 2)?;
    let params = Su4PiParams { u1, u2, v1, v2, v3, v4, v5, v6, v7 };
    Derived::new(phi, &params, vec![])
}

/// The image of +x under reflection through m: recovers the controlled
/// axis from its midpoint reflection.
fn reflect_x_through(m: &Axis) -> Result<Axis> {
    let d = m.x;
    Axis::normalize(2.0 * d * m.x - 1.0, 2.0 * d * m.y, 2.0 * d * m.z)
}

/// Parses a controlled-pi basis circuit emitted for `layout` back into
/// parameters. Matches kinds, wires, and the fixed atoms; free
/// parameters are read out of the ops.
fn parse_cpi(c: &Circuit, layout: Layout) -> Result<Derived> {
    let shape_err =
        || Error::PreconditionViolated("not a controlled-pi basis circuit for this layout".into());
    let items = template(layout);
    let mut cursor = 0usize;
    let mut m: [Option<Axis>; 7] = Default::default();
    let mut u1 = None;
    let mut u2 = None;
    let mut phi = None;
    let mut next = |expect_more: bool| -> Result<Option<&GateOp>> {
        if cursor < c.ops.len() {
            let op = &c.ops[cursor];
            cursor += 1;
            Ok(Some(op))
        } else if expect_more {
            Err(shape_err())
        } else {
            Ok(None)
        }
    };
    for item in &items {
        match item {
            TItem::Slot(id, w) => {
                for atom in slot_atoms(*id) {
                    let op = next(true)?.unwrap();
                    if op.qubits != vec![*w] {
                        return Err(shape_err());
                    }
                    match (atom, &op.kind) {
                        (Atom::PiM(j), GateKind::Pi { axis }) => {
                            if let Some(prev) = m[j - 1] {
                                if !prev.approx_eq(axis, 1e-9) {
                                    return Err(shape_err());
                                }
                            }
                            m[j - 1] = Some(*axis);
                        }
                        (Atom::PiVs, GateKind::Pi { axis })
                            if axis.approx_eq(&s_axis(), 1e-9) => {}
                        (Atom::PiH, GateKind::Pi { axis })
                            if axis.approx_eq(&hadamard_axis(), 1e-9) => {}
                        (Atom::UGate(1), GateKind::U2(u)) => u1 = Some(u.clone()),
                        (Atom::UGate(_), GateKind::U2(u)) => u2 = Some(u.clone()),
                        (Atom::UAdj(_), GateKind::U2(_)) => {}
                        (Atom::PhasePhi, GateKind::Phase(l)) => phi = Some(*l),
                        (Atom::PhaseHalfPi, GateKind::Phase(l))
                            if (*l - FRAC_PI_2).abs() <= 1e-9 => {}
                        _ => return Err(shape_err()),
                    }
                }
            }
            TItem::Cnot { control, target } => {
                let op = next(true)?.unwrap();
                if *op != GateOp::cnot(*control, *target) {
                    return Err(shape_err());
                }
            }
        }
    }
    if next(false)?.is_some() {
        return Err(shape_err());
    }
    let mut v = [Axis::X; 7];
    for j in 0..7 {
        v[j] = reflect_x_through(&m[j].ok_or_else(shape_err)?)?;
    }
    let params = Su4PiParams {
        u1: u1.ok_or_else(shape_err)?,
        u2: u2.ok_or_else(shape_err)?,
        v1: v[0],
        v2: v[1],
        v3: v[2],
        v4: v[3],
        v5: v[4],
        v6: v[5],
        v7: v[6],
    };
    Derived::new(phi.ok_or_else(shape_err)?, &params, vec![])
}

fn parse_any(c: &Circuit) -> Result<(Derived, Layout)> {
    if let Ok(d) = parse_skeleton(c) {
        return Ok((d, Layout::AllToAll));
    }
    for layout in [
        Layout::AllToAll,
        Layout::LnnControlFirst,
        Layout::LnnControlLast,
        Layout::LnnControlMiddle,
    ] {
        if let Ok(d) = parse_cpi(c, layout) {
            return Ok((d, layout));
        }
    }
    Err(Error::PreconditionViolated(
        "circuit is neither a controlled-pi skeleton nor a controlled-pi basis circuit".into(),
    ))
}

/// Lowers a skeleton circuit onto a linear chain: fan-out pairs become
/// 3-CNOT groups, and a centered control is swapped in and out with the
/// swaps absorbed into fan CNOTs. The result is the controlled-pi basis
/// circuit with 13 CNOTs, all acting on adjacent wires, and the same
/// matrix as the input.
pub fn lnn_lower(circuit: &Circuit, layout: Layout) -> Result<Circuit> {
    if !layout.is_lnn() {
        return Err(Error::PreconditionViolated(
            "lnn_lower needs a linear-chain layout".into(),
        ));
    }
    let d = parse_skeleton(circuit)?;
    let lowered = emit(&template(layout), &d, BasisChoice::ControlledPi, Connectivity::Lnn)?;
    let a = circuit_unitary(circuit)?;
    let b = circuit_unitary(&lowered)?;
    // The skeleton places (c, t1, t2) on (0, 1, 2); account for the
    // layout's wire placement before comparing.
    let (_, err) = phase_align(&relabeled(&a, layout)?, &b);
    if err > tol::RECONSTRUCT_2Q_TOL {
        return Err(Error::SynthesisFailure(format!(
            "chain lowering drifted from the skeleton by {err:.3e}"
        )));
    }
    Ok(lowered)
}

/// Re-expresses a skeleton wire order (c, t1, t2) = (0, 1, 2) matrix in
/// the layout's placement.
fn relabeled(u: &UnitaryMatrix, layout: Layout) -> Result<UnitaryMatrix> {
    let (c, t1, t2) = layout.placement();
    // Permutation matrix P with P|x_c x_t1 x_t2 at (0,1,2)> = |placed>.
    let dim = 8usize;
    let pos = [c, t1, t2];
    let mut perm = nalgebra::DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..dim {
        let bits = [(i >> 2) & 1, (i >> 1) & 1, i & 1];
        let mut j = 0usize;
        for (k, b) in bits.iter().enumerate() {
            j |= b << (2 - pos[k]);
        }
        perm[(j, i)] = Complex64::new(1.0, 0.0);
    }
    let p = UnitaryMatrix::from_matrix_unchecked(perm);
    Ok(p.mul(u).mul(&p.adjoint()))
}

/// Rewrites a skeleton or controlled-pi circuit into the requested
/// basis, preserving layout and matrix (up to global phase for the
/// merged bases).
pub fn rewrite_basis(circuit: &Circuit, basis: BasisChoice) -> Result<Circuit> {
    let (d, layout) = parse_any(circuit)?;
    let out = emit(&template(layout), &d, basis, layout.connectivity())?;
    let a = circuit_unitary(circuit)?;
    let b = circuit_unitary(&out)?;
    let a = if circuit.ops.len() == 15 { relabeled(&a, layout)? } else { a };
    let (_, err) = phase_align(&a, &b);
    if err > tol::RECONSTRUCT_2Q_TOL {
        return Err(Error::SynthesisFailure(format!(
            "basis rewrite drifted from the source by {err:.3e}"
        )));
    }
    Ok(out)
}
