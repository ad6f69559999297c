//! Single-qubit decompositions: axis-angle form, two pi-rotation
//! factorization, midpoint axes, and Euler angles.
//!
//! The central fact is that any single-qubit unitary u can be written as a
//! phase times a product of exactly two pi-rotations:
//!
//! ```text
//! u = exp(i gamma) Pi(v2) Pi(v1)
//! ```
//!
//! where, writing u = exp(i gamma) R_lambda(v), the first axis v1 is any
//! unit vector perpendicular to v and the second is v1 advanced by half the
//! rotation angle: v2 = R_v(lambda/2) v1. This follows from the product
//! rule Pi(a) Pi(b) = (a . b) I + i (a x b) . sigma, and holds for every
//! lambda including 0 and 2 pi.
//!
//! The midpoint construction is the inverse tool: given two axes it finds
//! the axis m whose half-turn maps one to the other, which is what makes
//! conjugation by a single pi-rotation move rotation axes wherever needed.

use num_complex::Complex64;

use crate::bloch::{self, Axis};
use crate::error::{Error, Result};
use crate::matrix::UnitaryMatrix;
use crate::tol;

/// Axis-angle form of a single-qubit unitary:
/// u = exp(i phase) R_lambda(axis), with lambda in [0, 2 pi) and the axis
/// canonicalized to the half-space with azimuth in [0, pi).
#[derive(Debug, Clone, Copy)]
pub struct AxisAngle {
    /// Rotation angle in [0, 2 pi).
    pub lambda: f64,
    /// Canonical rotation axis.
    pub axis: Axis,
    /// Global phase.
    pub phase: f64,
}

/// Factorization u = exp(i phase) Pi(v2) Pi(v1).
#[derive(Debug, Clone, Copy)]
pub struct TwoPiFactors {
    /// Right factor, applied first.
    pub v1: Axis,
    /// Left factor, applied second.
    pub v2: Axis,
    /// Global phase.
    pub phase: f64,
}

/// Euler angle conventions supported by [`euler_decompose`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EulerConvention {
    /// u = exp(i phase) Rz(angles[0]) Ry(angles[1]) Rz(angles[2]).
    Zyz,
    /// u = exp(i phase) Rz(angles[0]) Ry(angles[1]) Rx(angles[2]).
    Zyx,
}

/// Euler decomposition result. The rightmost rotation is applied first.
#[derive(Debug, Clone, Copy)]
pub struct EulerDecomposition {
    pub convention: EulerConvention,
    pub angles: [f64; 3],
    pub phase: f64,
}

/// True when the axis lies in the canonical half-space: positive y, or
/// y = 0 with positive x, or y = x = 0 with positive z. Exactly one of an
/// axis and its negation is canonical.
fn axis_is_canonical(v: &Axis) -> bool {
    if v.y != 0.0 {
        return v.y > 0.0;
    }
    if v.x != 0.0 {
        return v.x > 0.0;
    }
    v.z > 0.0
}

/// Extracts the axis-angle form of a 2x2 unitary.
///
/// The phase is the principal value arg(det u)/2, adjusted by pi when axis
/// canonicalization flips the axis (which also maps lambda to 2 pi -
/// lambda). Unitaries proportional to the identity report lambda = 0 with
/// axis +z and the phase read off the diagonal.
pub fn to_axis_angle(u: &UnitaryMatrix) -> Result<AxisAngle> {
    if u.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: u.dim() });
    }
    let gamma = u.determinant().arg() / 2.0;
    let phase = Complex64::from_polar(1.0, -gamma);
    let s00 = u.at(0, 0) * phase;
    let s01 = u.at(0, 1) * phase;
    let s10 = u.at(1, 0) * phase;
    let s11 = u.at(1, 1) * phase;

    let cos_half = ((s00.re + s11.re) / 2.0).clamp(-1.0, 1.0);
    let lambda = 2.0 * cos_half.acos();
    let sin_half = (lambda / 2.0).sin();
    if sin_half.abs() < tol::GIMBAL_TOL {
        // u is proportional to the identity (s = I or s = -I); any axis
        // works, so report the canonical zero rotation.
        return Ok(AxisAngle { lambda: 0.0, axis: Axis::Z, phase: u.at(0, 0).arg() });
    }

    let vx = -(s01.im + s10.im) / (2.0 * sin_half);
    let vy = (s10.re - s01.re) / (2.0 * sin_half);
    let vz = (s11.im - s00.im) / (2.0 * sin_half);
    let axis = Axis::normalize(vx, vy, vz)?;

    if axis_is_canonical(&axis) {
        Ok(AxisAngle { lambda, axis, phase: bloch::wrap_angle(gamma) })
    } else {
        // R_lambda(v) = exp(i pi) R_(2 pi - lambda)(-v).
        Ok(AxisAngle {
            lambda: 2.0 * std::f64::consts::PI - lambda,
            axis: axis.flipped(),
            phase: bloch::wrap_angle(gamma + std::f64::consts::PI),
        })
    }
}

/// Reconstructs the unitary exp(i phase) R_lambda(axis).
pub fn from_axis_angle(aa: &AxisAngle) -> UnitaryMatrix {
    bloch::rotation_matrix(aa.lambda, &aa.axis).scale(Complex64::from_polar(1.0, aa.phase))
}

/// Finds an axis m whose half-turn maps `v1` to `v2`: R_m(pi) v1 = v2.
///
/// For non-antipodal inputs the normalized sum works and is returned. For
/// antipodal inputs every axis perpendicular to v1 works; the tie is broken
/// with the normalized cross product of v1 and a fixed reference (+z, or +x
/// when v1 is itself near +-z).
pub fn midpoint_axes(v1: &Axis, v2: &Axis) -> Axis {
    let (sx, sy, sz) = (v1.x + v2.x, v1.y + v2.y, v1.z + v2.z);
    let sum_norm = (sx * sx + sy * sy + sz * sz).sqrt();
    if sum_norm < tol::ANTIPODAL_TOL {
        let w = if v1.z.abs() < 0.9 { Axis::Z } else { Axis::X };
        let (cx, cy, cz) = v1.cross(&w);
        Axis::normalize(cx, cy, cz).expect("cross of non-parallel unit vectors is nonzero")
    } else {
        Axis::normalize(sx, sy, sz).expect("sum norm checked above")
    }
}

/// Finds the axis m such that conjugation by Pi(m) turns Pi(v_source) into
/// Pi(v_target): Pi(m) Pi(v_source) Pi(m) = Pi(v_target), signs included.
pub fn conjugate_pi(v_target: &Axis, v_source: &Axis) -> Axis {
    midpoint_axes(v_source, v_target)
}

/// Factors a 2x2 unitary into two pi-rotations and a phase:
/// u = exp(i phase) Pi(v2) Pi(v1).
///
/// `hint`, when given, selects v1 and must be perpendicular to the rotation
/// axis of u within [`tol::HINT_PERP_TOL`]. The default v1 is the
/// normalized cross product of +z with the rotation axis, which always lies
/// in the xy plane; for z-aligned rotations it degenerates to +x. Unitaries
/// proportional to the identity factor through v1 = v2.
pub fn two_pi_factorize(u: &UnitaryMatrix, hint: Option<&Axis>) -> Result<TwoPiFactors> {
    let aa = to_axis_angle(u)?;
    let v1 = match hint {
        Some(h) => {
            let dot = h.dot(&aa.axis);
            if dot.abs() > tol::HINT_PERP_TOL {
                return Err(Error::InvalidHint { dot });
            }
            *h
        }
        None => {
            let (cx, cy, cz) = Axis::Z.cross(&aa.axis);
            match Axis::normalize(cx, cy, cz) {
                Ok(v) => v,
                Err(_) => Axis::X,
            }
        }
    };
    let v2 = bloch::rotate_axis(&v1, &aa.axis, aa.lambda / 2.0);
    Ok(TwoPiFactors { v1, v2, phase: aa.phase })
}

/// Reconstructs exp(i phase) Pi(v2) Pi(v1) from a factorization.
pub fn from_two_pi(f: &TwoPiFactors) -> UnitaryMatrix {
    bloch::pi_matrix(&f.v2)
        .mul(&bloch::pi_matrix(&f.v1))
        .scale(Complex64::from_polar(1.0, f.phase))
}

/// Euler decomposition of a 2x2 unitary in the given convention.
///
/// ZYZ angles are exact by construction: stripping the determinant phase
/// leaves a special unitary whose entries encode the angles directly, and
/// substituting them back reproduces the matrix to rounding error. ZYX goes
/// through the SO(3) image of the rotation, with the two-valued SU(2) lift
/// absorbed into the phase.
pub fn euler_decompose(u: &UnitaryMatrix, convention: EulerConvention) -> Result<EulerDecomposition> {
    if u.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: u.dim() });
    }
    match convention {
        EulerConvention::Zyz => euler_zyz(u),
        EulerConvention::Zyx => euler_zyx(u),
    }
}

fn euler_zyz(u: &UnitaryMatrix) -> Result<EulerDecomposition> {
    let gamma = u.determinant().arg() / 2.0;
    let strip = Complex64::from_polar(1.0, -gamma);
    let s00 = u.at(0, 0) * strip;
    let s10 = u.at(1, 0) * strip;

    let theta = 2.0 * s10.norm().atan2(s00.norm());
    let (phi, lambda) = if theta < tol::GIMBAL_TOL {
        (-2.0 * s00.arg(), 0.0)
    } else if (std::f64::consts::PI - theta).abs() < tol::GIMBAL_TOL {
        (2.0 * s10.arg(), 0.0)
    } else {
        (s10.arg() - s00.arg(), -s10.arg() - s00.arg())
    };
    Ok(EulerDecomposition { convention: EulerConvention::Zyz, angles: [phi, theta, lambda], phase: gamma })
}

fn euler_zyx(u: &UnitaryMatrix) -> Result<EulerDecomposition> {
    // SO(3) image: r[a][b] = tr(sigma_a u sigma_b u^dagger) / 2.
    let r = so3_adjoint(u);
    let (phi, zeta);
    let cos_psi = (r[2][1] * r[2][1] + r[2][2] * r[2][2]).sqrt();
    // atan2 keeps the middle angle well conditioned near +-pi/2, where
    // asin would amplify rounding in r. cos_psi >= 0, so psi lands in
    // [-pi/2, pi/2] as the convention requires.
    let psi = (-r[2][0]).atan2(cos_psi);
    if cos_psi < tol::GIMBAL_TOL {
        // Gimbal lock: only phi -+ zeta is determined; fix zeta = 0.
        zeta = 0.0;
        phi = (-r[0][1]).atan2(r[1][1]);
    } else {
        phi = r[1][0].atan2(r[0][0]);
        zeta = r[2][1].atan2(r[2][2]);
    }
    let candidate = bloch::rotation_matrix(phi, &Axis::Z)
        .mul(&bloch::rotation_matrix(psi, &Axis::Y))
        .mul(&bloch::rotation_matrix(zeta, &Axis::X));
    let (phase, _err) = bloch::phase_align(u, &candidate);
    Ok(EulerDecomposition { convention: EulerConvention::Zyx, angles: [phi, psi, zeta], phase })
}

/// The SO(3) rotation matrix corresponding to conjugation by u (phase
/// independent): r[a][b] = tr(sigma_a u sigma_b u^dagger) / 2.
fn so3_adjoint(u: &UnitaryMatrix) -> [[f64; 3]; 3] {
    let paulis = [
        bloch::pi_matrix(&Axis::X),
        bloch::pi_matrix(&Axis::Y),
        bloch::pi_matrix(&Axis::Z),
    ];
    let ud = u.adjoint();
    let mut r = [[0.0; 3]; 3];
    for (a, sig_a) in paulis.iter().enumerate() {
        for (b, sig_b) in paulis.iter().enumerate() {
            let m = sig_a.mul(u).mul(sig_b).mul(&ud);
            r[a][b] = m.trace().re / 2.0;
        }
    }
    r
}

/// Reconstructs the unitary described by an Euler decomposition.
pub fn from_euler(d: &EulerDecomposition) -> UnitaryMatrix {
    let last = match d.convention {
        EulerConvention::Zyz => bloch::rotation_matrix(d.angles[2], &Axis::Z),
        EulerConvention::Zyx => bloch::rotation_matrix(d.angles[2], &Axis::X),
    };
    bloch::rotation_matrix(d.angles[0], &Axis::Z)
        .mul(&bloch::rotation_matrix(d.angles[1], &Axis::Y))
        .mul(&last)
        .scale(Complex64::from_polar(1.0, d.phase))
}
