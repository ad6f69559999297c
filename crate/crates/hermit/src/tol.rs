//! Numerical tolerances used throughout the crate.
//!
//! Every comparison against an analytic identity goes through one of these
//! constants so that the accuracy contract of the library lives in a single
//! place. The values are grouped by how the error they bound arises:
//!
//! - construction checks (is this matrix unitary, is this axis a unit vector)
//!   run close to machine precision because the inputs are either user data
//!   or freshly normalized,
//! - reconstruction checks (does the synthesized circuit reproduce the
//!   target) allow a few orders of magnitude of slack because errors
//!   accumulate over matrix products,
//! - classification thresholds (is this angle zero, are these axes
//!   antipodal) decide between discrete branches and are chosen so that
//!   either branch is numerically valid near the cut.

/// Max-norm tolerance for accepting a matrix as unitary on input.
pub const UNITARY_TOL: f64 = 1e-10;

/// Max-norm tolerance for identities that hold exactly in arithmetic,
/// such as per-gate Hermiticity checks and fixed-point circuit identities.
pub const EXACT_TOL: f64 = 1e-12;

/// Max-norm tolerance for single-qubit reconstruction: a synthesized
/// product of pi-rotations must match its target this closely.
pub const RECONSTRUCT_1Q_TOL: f64 = 1e-10;

/// Max-norm tolerance for two-qubit and controlled-two-qubit
/// reconstruction, where longer gate products accumulate more error.
pub const RECONSTRUCT_2Q_TOL: f64 = 1e-9;

/// Default equivalence tolerance for circuit verification. The CLI reads
/// this unless overridden by a flag or the HERMIT_TOL environment variable.
pub const DEFAULT_EQUIV_TOL: f64 = 1e-9;

/// Trace magnitude below which a 2x2 unitary counts as traceless, i.e. a
/// phased pi-rotation. Used by the single-CNOT witness test.
pub const TRACE_TEST_TOL: f64 = 1e-8;

/// Norm of the axis sum below which two unit axes count as antipodal and
/// the midpoint construction switches to a perpendicular axis.
pub const ANTIPODAL_TOL: f64 = 1e-10;

/// Dot-product magnitude above which a caller-supplied factorization hint
/// is rejected as not perpendicular to the rotation axis.
pub const HINT_PERP_TOL: f64 = 1e-8;

/// Deviation from unit length above which an axis is rejected.
pub const AXIS_UNIT_TOL: f64 = 1e-12;

/// Rotation angles with magnitude below this are elided from emitted
/// circuits.
pub const ANGLE_ELIDE_TOL: f64 = 1e-12;

/// Tolerance for internal orthogonality and factorization residuals inside
/// the two-qubit factorization (off-diagonal mass after simultaneous
/// diagonalization, local-factor reconstruction).
pub const FACTOR_INTERNAL_TOL: f64 = 1e-9;

/// Tolerance for the special-unitary check on extracted local factors.
pub const LOCAL_SU2_TOL: f64 = 1e-10;

/// Gimbal-lock threshold for Euler decompositions: below this the middle
/// angle counts as 0 or pi and the outer angles merge.
pub const GIMBAL_TOL: f64 = 1e-9;

/// Axis components below this magnitude count as zero when classifying a
/// rotation as z-axis or y-axis aligned.
pub const AXIS_ZERO_TOL: f64 = 1e-12;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_tols_are_tighter_than_reconstruction_tols() {
        assert!(EXACT_TOL < UNITARY_TOL);
        assert!(UNITARY_TOL <= RECONSTRUCT_1Q_TOL);
        assert!(RECONSTRUCT_1Q_TOL < RECONSTRUCT_2Q_TOL);
    }

    #[test]
    fn classification_cuts_sit_between_noise_and_signal() {
        // A threshold must clear accumulated rounding noise (~1e-13 for the
        // products involved) while staying far below order-one signals.
        for cut in [
            TRACE_TEST_TOL,
            ANTIPODAL_TOL,
            HINT_PERP_TOL,
            GIMBAL_TOL,
        ] {
            assert!(cut > 1e-13);
            assert!(cut < 1e-3);
        }
    }

    #[test]
    fn elision_thresholds_are_near_machine_precision() {
        assert!(ANGLE_ELIDE_TOL <= 1e-10);
        assert!(AXIS_ZERO_TOL <= 1e-10);
        assert!(AXIS_UNIT_TOL <= 1e-10);
    }
}
