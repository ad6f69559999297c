//! Circuit synthesis over Hermitian pi-rotation gate sets.
//!
//! A pi-rotation Pi(v) = i R_pi(v) is the Hermitian unitary reflecting
//! the Bloch sphere through the axis v; X, Y, Z, and Hadamard are all
//! instances. This crate factors arbitrary single-qubit unitaries into
//! two pi-rotations plus a global phase, characterizes the controlled
//! gates needing only one CNOT, and compiles controlled two-qubit
//! unitaries (via a KAK decomposition) into 10-CNOT all-to-all or
//! 13-CNOT linear-chain circuits whose single-qubit layer can be emitted
//! in plain rotations, Z/Y rotations, or pi-rotations only.
//!
//! Every synthesis path is backed by a dense simulator oracle; public
//! entry points return reports with reconstruction errors, and the
//! tolerances that gate them live in [`tol`].

pub mod batch;
pub mod bloch;
pub mod controlled;
pub mod cu4;
pub mod error;
pub mod hermitian;
pub mod io;
pub mod ir;
pub mod kak;
pub mod matrix;
pub mod random;
pub mod single_qubit;
pub mod tol;

pub use bloch::Axis;
pub use error::{Error, Result};
pub use ir::{Circuit, Connectivity, GateCounts, GateKind, GateOp};
pub use matrix::UnitaryMatrix;
