//! Error type shared by all synthesis and verification entry points.

use thiserror::Error;

/// Errors reported by synthesis, verification, and file handling.
#[derive(Debug, Error)]
pub enum Error {
    /// An axis argument was not a unit vector within tolerance.
    #[error("axis ({x}, {y}, {z}) is not a unit vector (norm deviates by {deviation:.3e})")]
    NonUnitAxis { x: f64, y: f64, z: f64, deviation: f64 },

    /// A matrix argument was not unitary within tolerance.
    #[error("matrix is not unitary: max deviation {deviation:.3e} exceeds {tol:.3e}", tol = crate::tol::UNITARY_TOL)]
    NonUnitary { deviation: f64 },

    /// A matrix had the wrong dimension for the requested operation.
    #[error("expected a {expected}x{expected} matrix, got {got}x{got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A factorization hint axis was not perpendicular to the rotation axis.
    #[error("hint axis is not perpendicular to the rotation axis (dot product {dot:.3e})")]
    InvalidHint { dot: f64 },

    /// Inputs violated a documented precondition of the decomposition.
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    /// A circuit exceeded the simulator's width limit.
    #[error("circuit width {width} exceeds the supported maximum of {max}")]
    WidthOverflow { width: usize, max: usize },

    /// The requested builtin circuit name is not known.
    #[error("unknown builtin circuit '{0}'")]
    UnknownBuiltin(String),

    /// The requested gate set name is not known.
    #[error("unknown gate set '{0}'")]
    UnknownGateSet(String),

    /// A gate in the input cannot be rewritten into the requested gate set.
    #[error("gate {gate} is not representable in gate set {set}")]
    UnsupportedForTarget { gate: String, set: String },

    /// Rewriting left a residual X gate that the target set cannot express
    /// without an ancilla.
    #[error(
        "residual X gate on qubit {qubit} cannot be expressed in {set} without an ancilla; \
         see the builtin circuits '{builtin_a}' and '{builtin_b}'"
    )]
    AncillaRequired {
        qubit: usize,
        set: String,
        builtin_a: &'static str,
        builtin_b: &'static str,
    },

    /// Synthesis produced no candidate that met its internal tolerance.
    #[error("synthesis failed: {0}")]
    SynthesisFailure(String),

    /// A file could not be parsed or serialized.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// An I/O operation failed.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
