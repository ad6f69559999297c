//! Controlled pi-rotations and the single-CNOT criterion.
//!
//! A controlled single-qubit gate C-u needs exactly one CNOT precisely
//! when u is a phased pi-rotation, u = exp(i psi) Pi(v). The witness test
//! below decides membership by the trace (phased pi-rotations are exactly
//! the traceless unitaries) and recovers (psi, v).
//!
//! The constructions all follow one pattern: conjugate the target wire so
//! that the axis moves onto +x, where the controlled pi-rotation is a bare
//! CNOT. Conjugating by a single pi-rotation Pi(m), with m the midpoint of
//! +x and v, does it with Hermitian gates; conjugating by rotations does
//! it with Rz/Ry gates and extends to any number of controls.

use num_complex::Complex64;

use crate::bloch::{self, Axis};
use crate::error::{Error, Result};
use crate::ir::{Circuit, Connectivity, GateOp};
use crate::matrix::UnitaryMatrix;
pub use crate::single_qubit::conjugate_pi;
use crate::single_qubit::{self, EulerConvention};
use crate::tol;

/// A controlled phased pi-rotation: the gate C-(exp(i psi) Pi(axis)) with
/// the given control and target wires.
#[derive(Debug, Clone, Copy)]
pub struct ControlledPiSpec {
    pub axis: Axis,
    pub psi: f64,
    pub control: usize,
    pub target: usize,
}

/// A multi-controlled phased rotation: exp(i psi) R_lambda(axis) on the
/// target when every control is set.
#[derive(Debug, Clone)]
pub struct McRotationSpec {
    pub controls: Vec<usize>,
    pub target: usize,
    pub lambda: f64,
    pub axis: Axis,
    pub psi: f64,
}

impl McRotationSpec {
    /// The equivalent IR gate op.
    pub fn to_op(&self) -> GateOp {
        GateOp::mcrot(&self.controls, self.target, self.lambda, self.axis, self.psi)
    }

    /// Dense matrix of the gate over `width` qubits.
    pub fn embed(&self, width: usize) -> Result<UnitaryMatrix> {
        let core = bloch::rotation_matrix(self.lambda, &self.axis)
            .scale(Complex64::from_polar(1.0, self.psi));
        multi_controlled_embed(&core, &self.controls, &[self.target], width)
    }

    fn width(&self) -> usize {
        self.controls.iter().copied().chain([self.target]).max().unwrap_or(0) + 1
    }
}

/// A phased pi-rotation recovered from a matrix: u = exp(i psi) Pi(axis).
#[derive(Debug, Clone, Copy)]
pub struct PiWitness {
    pub psi: f64,
    pub axis: Axis,
}

/// True when the axis is canonical for witnesses: positive z, or z = 0
/// with positive y, or z = y = 0 with positive x.
fn witness_axis_is_canonical(v: &Axis) -> bool {
    if v.z != 0.0 {
        return v.z > 0.0;
    }
    if v.y != 0.0 {
        return v.y > 0.0;
    }
    v.x > 0.0
}

/// Tests whether u is a phased pi-rotation and recovers the witness.
///
/// Returns `None` when |tr u| exceeds [`tol::TRACE_TEST_TOL`]; such a gate
/// cannot be realized as a controlled gate with a single CNOT. The
/// recovered axis is canonicalized to the upper half-space (positive z,
/// ties broken toward positive y then positive x), shifting psi by pi when
/// the axis flips since Pi(-v) = -Pi(v).
pub fn single_cnot_witness(u: &UnitaryMatrix) -> Result<Option<PiWitness>> {
    if u.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: u.dim() });
    }
    if u.trace().norm() > tol::TRACE_TEST_TOL {
        return Ok(None);
    }
    // Traceless means a half-turn: u = exp(i gamma) R_pi(v)
    //                                = exp(i (gamma - pi/2)) Pi(v).
    let aa = single_qubit::to_axis_angle(u)?;
    let mut psi = aa.phase - std::f64::consts::FRAC_PI_2;
    let mut axis = aa.axis;
    if !witness_axis_is_canonical(&axis) {
        axis = axis.flipped();
        psi += std::f64::consts::PI;
    }
    Ok(Some(PiWitness { psi: bloch::wrap_angle(psi), axis }))
}

/// Builds the matrix exp(i psi) Pi(axis) of a witness.
pub fn witness_matrix(w: &PiWitness) -> UnitaryMatrix {
    bloch::pi_matrix(&w.axis).scale(Complex64::from_polar(1.0, w.psi))
}

/// Single-CNOT circuit for a controlled phased pi-rotation.
///
/// The target wire is conjugated by Pi(m) with m the midpoint of +x and
/// the requested axis, turning the CNOT's X into Pi(axis) exactly; the
/// phase rides on the control as P(psi). A zero phase is elided. The
/// circuit spans qubits 0..=max(control, target).
pub fn controlled_pi_one_cnot(spec: &ControlledPiSpec) -> Circuit {
    let m = single_qubit::midpoint_axes(&Axis::X, &spec.axis);
    let width = spec.control.max(spec.target) + 1;
    let mut c = Circuit::new(width, Connectivity::All);
    if bloch::wrap_angle(spec.psi).abs() > tol::ANGLE_ELIDE_TOL {
        c.push(GateOp::phase(spec.psi, spec.control));
    }
    c.push(GateOp::pi(m, spec.target));
    c.push(GateOp::cnot(spec.control, spec.target));
    c.push(GateOp::pi(m, spec.target));
    c
}

/// Multi-controlled pi-rotation over {CNOT or MCX, Rz, Ry}.
///
/// Conjugates the target with W = Rz(phi) Ry(psi), whose angles come from
/// the ZYX Euler decomposition of Pi(m) with m the midpoint of +x and the
/// requested axis; the x-rotation of that decomposition commutes through
/// the multi-controlled X and cancels. Rotations with negligible angle are
/// elided, so the +x axis yields a bare CNOT. Exact including global
/// phase.
pub fn cpi_to_zy(axis: &Axis, controls: &[usize], target: usize) -> Result<Circuit> {
    if controls.is_empty() {
        return Err(Error::PreconditionViolated(
            "cpi_to_zy needs at least one control".into(),
        ));
    }
    let m = single_qubit::midpoint_axes(&Axis::X, axis);
    let euler = single_qubit::euler_decompose(&bloch::pi_matrix(&m), EulerConvention::Zyx)?;
    let (phi, psi) = (euler.angles[0], euler.angles[1]);

    let width = controls.iter().copied().chain([target]).max().unwrap_or(0) + 1;
    let mut c = Circuit::new(width, Connectivity::All);
    let push_rot = |c: &mut Circuit, lambda: f64, axis: Axis| {
        if lambda.abs() > tol::ANGLE_ELIDE_TOL {
            c.push(GateOp::rot(lambda, axis, target));
        }
    };
    push_rot(&mut c, -phi, Axis::Z);
    push_rot(&mut c, -psi, Axis::Y);
    if controls.len() == 1 {
        c.push(GateOp::cnot(controls[0], target));
    } else {
        c.push(GateOp::mcx(controls, target));
    }
    push_rot(&mut c, psi, Axis::Y);
    push_rot(&mut c, phi, Axis::Z);
    Ok(c)
}

/// Controlled phased pi-rotation about an axis lying in a rotation plane:
/// spec.axis = R_sigma(phi) tau with tau perpendicular to sigma.
///
/// The target is conjugated by a single rotation pair R_sigma(-+phi),
/// reducing to the controlled pi-rotation about tau, which is a CNOT when
/// tau is +x, a CZ when tau is +z, and a controlled rotation otherwise.
/// The phase rides on the control. Preconditions are validated within
/// [`tol::RECONSTRUCT_1Q_TOL`].
pub fn cpi_planar(
    spec: &ControlledPiSpec,
    tau: &Axis,
    sigma: &Axis,
    phi: f64,
) -> Result<Circuit> {
    if tau.dot(sigma).abs() > tol::RECONSTRUCT_1Q_TOL {
        return Err(Error::PreconditionViolated(format!(
            "tau is not perpendicular to sigma (dot {:.3e})",
            tau.dot(sigma)
        )));
    }
    let rotated = bloch::rotate_axis(tau, sigma, phi);
    if !rotated.approx_eq(&spec.axis, tol::RECONSTRUCT_1Q_TOL) {
        return Err(Error::PreconditionViolated(
            "axis is not R_sigma(phi) applied to tau".into(),
        ));
    }

    let width = spec.control.max(spec.target) + 1;
    let mut c = Circuit::new(width, Connectivity::All);
    if bloch::wrap_angle(spec.psi).abs() > tol::ANGLE_ELIDE_TOL {
        c.push(GateOp::phase(spec.psi, spec.control));
    }
    let elide = phi.abs() <= tol::ANGLE_ELIDE_TOL;
    if !elide {
        c.push(GateOp::rot(-phi, *sigma, spec.target));
    }
    if tau.approx_eq(&Axis::X, tol::AXIS_ZERO_TOL) {
        c.push(GateOp::cnot(spec.control, spec.target));
    } else if tau.approx_eq(&Axis::Z, tol::AXIS_ZERO_TOL) {
        c.push(GateOp::cz(spec.control, spec.target));
    } else {
        c.push(GateOp::mcrot(
            &[spec.control],
            spec.target,
            std::f64::consts::PI,
            *tau,
            std::f64::consts::FRAC_PI_2,
        ));
    }
    if !elide {
        c.push(GateOp::rot(phi, *sigma, spec.target));
    }
    Ok(c)
}

/// Rewrites a multi-controlled rotation onto a new axis by conjugating its
/// target with the midpoint pi-rotation: emits [Pi(m), original op,
/// Pi(m)] with m the midpoint of the spec's axis and `new_axis`. The
/// circuit implements the same multi-controlled rotation about
/// `new_axis`, phase included.
pub fn mc_axis_transform(spec: &McRotationSpec, new_axis: &Axis) -> Circuit {
    let m = single_qubit::midpoint_axes(&spec.axis, new_axis);
    let mut c = Circuit::new(spec.width(), Connectivity::All);
    c.push(GateOp::pi(m, spec.target));
    c.push(spec.to_op());
    c.push(GateOp::pi(m, spec.target));
    c
}

/// Dense matrix of a controlled operator: applies `u` to the `targets`
/// (most significant target first) when `control` is set, identity
/// otherwise. Verification oracle for controlled synthesis.
pub fn controlled_embed(
    u: &UnitaryMatrix,
    control: usize,
    targets: &[usize],
    width: usize,
) -> Result<UnitaryMatrix> {
    multi_controlled_embed(u, &[control], targets, width)
}

/// Dense matrix of a multi-controlled operator: `u` acts on the targets
/// only when all controls are set.
pub fn multi_controlled_embed(
    u: &UnitaryMatrix,
    controls: &[usize],
    targets: &[usize],
    width: usize,
) -> Result<UnitaryMatrix> {
    if u.dim() != 1 << targets.len() {
        return Err(Error::DimensionMismatch { expected: 1 << targets.len(), got: u.dim() });
    }
    if width > crate::matrix::MAX_QUBITS {
        return Err(Error::WidthOverflow { width, max: crate::matrix::MAX_QUBITS });
    }
    let dim = 1usize << width;
    let cmask = controls
        .iter()
        .fold(0usize, |m, &c| m | 1usize << (width - 1 - c));
    let tbits: Vec<usize> = targets.iter().map(|&t| 1usize << (width - 1 - t)).collect();
    let tmask: usize = tbits.iter().sum();

    // Target bit pattern of a row index, first target most significant.
    let sub = |i: usize| -> usize {
        tbits.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(i & b != 0))
    };

    let mut m = nalgebra::DMatrix::<Complex64>::zeros(dim, dim);
    for i in 0..dim {
        if i & cmask != cmask {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        } else {
            let a = sub(i);
            for b in 0..u.dim() {
                // Column index with i's target bits replaced by pattern b.
                let mut j = i & !tmask;
                for (pos, &bit) in tbits.iter().enumerate() {
                    if b & (1 << (tbits.len() - 1 - pos)) != 0 {
                        j |= bit;
                    }
                }
                m[(i, j)] = u.at(a, b);
            }
        }
    }
    Ok(UnitaryMatrix::from_matrix_unchecked(m))
}
