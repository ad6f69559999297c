//! Bloch-sphere axes, rotation matrices, and pi-rotations.
//!
//! A pi-rotation about the unit axis v = (vx, vy, vz) is the Hermitian
//! unitary
//!
//! ```text
//! Pi(v) = [ vz          vx - i vy ]
//!         [ vx + i vy  -vz        ]
//! ```
//!
//! which equals i R_pi(v), where R_lambda(v) = cos(lambda/2) I
//! - i sin(lambda/2) (v . sigma) is the standard rotation by lambda about v.
//! Pi(v) squares to the identity, has determinant -1, and flips sign under
//! axis reversal: Pi(-v) = -Pi(v).
//!
//! In spherical coordinates with polar angle theta from +z and azimuth phi
//! from +x,
//!
//! ```text
//! Pi(theta, phi) = [ cos(theta)              exp(-i phi) sin(theta) ]
//!                  [ exp(i phi) sin(theta)  -cos(theta)             ]
//! ```
//!
//! Two identities drive everything else in the crate:
//!
//! - product rule: Pi(a) Pi(b) = (a . b) I + i (a x b) . sigma, so a pair of
//!   pi-rotations realizes an arbitrary rotation about a x b,
//! - conjugation rule: Pi(m) Pi(v) Pi(m) = Pi(R_m(pi) v) exactly, sign
//!   included, so conjugating by a pi-rotation moves the axis by a
//!   half-turn about m.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::UnitaryMatrix;
use crate::tol;

/// Complex one.
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Complex zero.
pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A unit vector on the Bloch sphere.
///
/// Constructors normalize or validate, so an `Axis` held by value is always
/// unit length to within [`tol::AXIS_UNIT_TOL`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Axis {
    /// The +x axis.
    pub const X: Axis = Axis { x: 1.0, y: 0.0, z: 0.0 };
    /// The +y axis.
    pub const Y: Axis = Axis { x: 0.0, y: 1.0, z: 0.0 };
    /// The +z axis.
    pub const Z: Axis = Axis { x: 0.0, y: 0.0, z: 1.0 };

    /// Validates that (x, y, z) is unit length and returns it as an axis.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Axis> {
        let deviation = ((x * x + y * y + z * z).sqrt() - 1.0).abs();
        if deviation > tol::AXIS_UNIT_TOL {
            return Err(Error::NonUnitAxis { x, y, z, deviation });
        }
        Ok(Axis { x, y, z })
    }

    /// Normalizes (x, y, z) to unit length. Fails on near-zero input.
    pub fn normalize(x: f64, y: f64, z: f64) -> Result<Axis> {
        let norm = (x * x + y * y + z * z).sqrt();
        if norm < tol::AXIS_UNIT_TOL {
            return Err(Error::NonUnitAxis { x, y, z, deviation: 1.0 });
        }
        Ok(Axis { x: x / norm, y: y / norm, z: z / norm })
    }

    /// Axis at polar angle `theta` from +z and azimuth `phi` from +x:
    /// (sin theta cos phi, sin theta sin phi, cos theta).
    pub fn from_spherical(theta: f64, phi: f64) -> Axis {
        let (st, ct) = (theta.sin(), theta.cos());
        Axis { x: st * phi.cos(), y: st * phi.sin(), z: ct }
    }

    /// Polar angle in [0, pi].
    pub fn theta(&self) -> f64 {
        self.z.clamp(-1.0, 1.0).acos()
    }

    /// Azimuth in (-pi, pi].
    pub fn phi(&self) -> f64 {
        if self.x == 0.0 && self.y == 0.0 {
            0.0
        } else {
            let phi = self.y.atan2(self.x);
            if phi == -std::f64::consts::PI { std::f64::consts::PI } else { phi }
        }
    }

    /// Dot product.
    pub fn dot(&self, other: &Axis) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Cross product as a raw (not necessarily unit) vector.
    pub fn cross(&self, other: &Axis) -> (f64, f64, f64) {
        (
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    /// The opposite axis.
    pub fn flipped(&self) -> Axis {
        Axis { x: -self.x, y: -self.y, z: -self.z }
    }

    /// True when the axes agree componentwise within `tol`.
    pub fn approx_eq(&self, other: &Axis, tol: f64) -> bool {
        (self.x - other.x).abs() <= tol
            && (self.y - other.y).abs() <= tol
            && (self.z - other.z).abs() <= tol
    }
}

/// Wraps an angle to the half-open interval (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut w = a % two_pi;
    if w <= -std::f64::consts::PI {
        w += two_pi;
    } else if w > std::f64::consts::PI {
        w -= two_pi;
    }
    w
}

/// Wraps an angle to the half-open interval [0, 2 pi).
pub fn wrap_angle_positive(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut w = a % two_pi;
    if w < 0.0 {
        w += two_pi;
    }
    if w >= two_pi {
        w -= two_pi;
    }
    w
}

/// Rotates `target` by `angle` about `axis` using the Rodrigues formula.
/// The result is renormalized to suppress rounding drift.
pub fn rotate_axis(target: &Axis, axis: &Axis, angle: f64) -> Axis {
    let (c, s) = (angle.cos(), angle.sin());
    let cross = axis.cross(target);
    let dot = axis.dot(target);
    let x = target.x * c + cross.0 * s + axis.x * dot * (1.0 - c);
    let y = target.y * c + cross.1 * s + axis.y * dot * (1.0 - c);
    let z = target.z * c + cross.2 * s + axis.z * dot * (1.0 - c);
    Axis::normalize(x, y, z).expect("rotation of a unit vector stays unit length")
}

/// The pi-rotation Pi(v) as a 2x2 matrix.
pub fn pi_matrix(axis: &Axis) -> UnitaryMatrix {
    UnitaryMatrix::from_rows_2x2(
        Complex64::new(axis.z, 0.0),
        Complex64::new(axis.x, -axis.y),
        Complex64::new(axis.x, axis.y),
        Complex64::new(-axis.z, 0.0),
    )
}

/// The rotation R_lambda(v) = cos(lambda/2) I - i sin(lambda/2) (v . sigma).
pub fn rotation_matrix(lambda: f64, axis: &Axis) -> UnitaryMatrix {
    let (c, s) = ((lambda / 2.0).cos(), (lambda / 2.0).sin());
    UnitaryMatrix::from_rows_2x2(
        Complex64::new(c, -s * axis.z),
        Complex64::new(-s * axis.y, -s * axis.x),
        Complex64::new(s * axis.y, -s * axis.x),
        Complex64::new(c, s * axis.z),
    )
}

/// The phase gate P(lambda) = diag(1, exp(i lambda)).
pub fn phase_matrix(lambda: f64) -> UnitaryMatrix {
    UnitaryMatrix::from_rows_2x2(ONE, ZERO, ZERO, Complex64::from_polar(1.0, lambda))
}

/// The Hadamard gate, which equals the pi-rotation about (1, 0, 1)/sqrt(2).
pub fn hadamard_matrix() -> UnitaryMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    UnitaryMatrix::from_rows_2x2(
        Complex64::new(h, 0.0),
        Complex64::new(h, 0.0),
        Complex64::new(h, 0.0),
        Complex64::new(-h, 0.0),
    )
}

/// The Pauli X gate, which equals Pi(x).
pub fn x_matrix() -> UnitaryMatrix {
    UnitaryMatrix::from_rows_2x2(ZERO, ONE, ONE, ZERO)
}

/// The identity on one qubit.
pub fn identity2() -> UnitaryMatrix {
    UnitaryMatrix::from_rows_2x2(ONE, ZERO, ZERO, ONE)
}

/// The axis (1, 0, 1)/sqrt(2) whose pi-rotation is the Hadamard gate.
pub fn hadamard_axis() -> Axis {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Axis { x: h, y: 0.0, z: h }
}

/// The axis at (theta, phi) = (pi/2, pi/4); together with X, pi-rotations
/// about it generate the S gate up to phase: S = exp(i pi/4) Pi(s) X.
pub fn s_axis() -> Axis {
    Axis::from_spherical(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_4)
}

/// The axis at (theta, phi) = (pi/2, pi/8); together with X, pi-rotations
/// about it generate the T gate up to phase: T = exp(i pi/8) Pi(t) X.
pub fn t_axis() -> Axis {
    Axis::from_spherical(std::f64::consts::FRAC_PI_2, std::f64::consts::PI / 8.0)
}

/// Finds the global phase aligning `a` to `b` and the residual error:
/// returns (alpha, err) with err = max-norm of a - exp(i alpha) b. The
/// phase is read off the largest entry of b^dagger a, which is the most
/// accurate estimate when the matrices genuinely agree up to phase.
pub fn phase_align(a: &UnitaryMatrix, b: &UnitaryMatrix) -> (f64, f64) {
    let prod = b.adjoint().mul(a);
    let mut best = ZERO;
    let mut best_norm = -1.0;
    for r in 0..prod.dim() {
        for c in 0..prod.dim() {
            let e = prod.at(r, c);
            if e.norm() > best_norm {
                best_norm = e.norm();
                best = e;
            }
        }
    }
    let alpha = best.arg();
    let rotated = b.scale(Complex64::from_polar(1.0, alpha));
    (alpha, crate::matrix::max_norm_diff(a, &rotated))
}

/// True when `a` equals `b` up to a global phase within `tol`.
pub fn equiv_up_to_phase(a: &UnitaryMatrix, b: &UnitaryMatrix, tol: f64) -> bool {
    phase_align(a, b).1 <= tol
}
