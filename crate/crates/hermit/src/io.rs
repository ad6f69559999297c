//! JSON file formats for matrices and circuits.
//!
//! Matrices are stored row-major as [re, im] pairs:
//!
//! ```text
//! { "dim": 2, "entries": [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]] }
//! ```
//!
//! Circuits list ops with lowercase kind names and a params object holding
//! named reals, an axis triple, or a nested 2x2 matrix:
//!
//! ```text
//! { "width": 2, "connectivity": "all",
//!   "ops": [ { "kind": "rot", "qubits": [0],
//!              "params": { "lambda": 1.5707963267948966,
//!                          "axis": [0.0, 0.0, 1.0] } },
//!            { "kind": "cnot", "qubits": [0, 1] } ] }
//! ```
//!
//! Floats are written in scientific notation with 17 significant digits so
//! that values round-trip exactly through the decimal form.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bloch::Axis;
use crate::error::{Error, Result};
use crate::ir::{Circuit, Connectivity, GateKind, GateOp};
use crate::matrix::UnitaryMatrix;

/// Serialized form of a unitary matrix.
#[derive(Debug, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    /// Row-major [re, im] pairs, dim * dim of them.
    pub entries: Vec<[f64; 2]>,
}

impl MatrixFile {
    /// Captures a matrix for writing.
    pub fn from_matrix(u: &UnitaryMatrix) -> MatrixFile {
        let dim = u.dim();
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                let e = u.at(r, c);
                entries.push([e.re, e.im]);
            }
        }
        MatrixFile { dim, entries }
    }

    /// Validates and converts to a unitary matrix.
    pub fn to_matrix(&self) -> Result<UnitaryMatrix> {
        let entries: Vec<Complex64> = self
            .entries
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        UnitaryMatrix::from_entries(self.dim, entries)
    }
}

/// Serialized parameters of a gate; fields are present per kind.
#[derive(Debug, Default, Serialize, Deserialize)]
pub struct OpParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<[f64; 3]>,
    /// 2x2 nested entries, each [re, im].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<[[[f64; 2]; 2]; 2]>,
}

/// Serialized form of one gate op.
#[derive(Debug, Serialize, Deserialize)]
pub struct OpFile {
    pub kind: String,
    pub qubits: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<OpParams>,
}

/// Serialized form of a circuit.
#[derive(Debug, Serialize, Deserialize)]
pub struct CircuitFile {
    pub width: usize,
    pub connectivity: Connectivity,
    pub ops: Vec<OpFile>,
}

fn axis_params(axis: &Axis) -> [f64; 3] {
    [axis.x, axis.y, axis.z]
}

impl CircuitFile {
    /// Captures a circuit for writing.
    pub fn from_circuit(c: &Circuit) -> CircuitFile {
        let ops = c
            .ops
            .iter()
            .map(|op| {
                let params = match &op.kind {
                    GateKind::Phase(lambda) => Some(OpParams { lambda: Some(*lambda), ..Default::default() }),
                    GateKind::Rot { lambda, axis } => Some(OpParams {
                        lambda: Some(*lambda),
                        axis: Some(axis_params(axis)),
                        ..Default::default()
                    }),
                    GateKind::Pi { axis } => Some(OpParams {
                        axis: Some(axis_params(axis)),
                        ..Default::default()
                    }),
                    GateKind::U2(u) => {
                        let m = [
                            [[u.at(0, 0).re, u.at(0, 0).im], [u.at(0, 1).re, u.at(0, 1).im]],
                            [[u.at(1, 0).re, u.at(1, 0).im], [u.at(1, 1).re, u.at(1, 1).im]],
                        ];
                        Some(OpParams { matrix: Some(m), ..Default::default() })
                    }
                    GateKind::McRot { lambda, axis, psi } => Some(OpParams {
                        lambda: Some(*lambda),
                        psi: Some(*psi),
                        axis: Some(axis_params(axis)),
                        ..Default::default()
                    }),
                    _ => None,
                };
                OpFile { kind: op.kind.name().to_string(), qubits: op.qubits.clone(), params }
            })
            .collect();
        CircuitFile { width: c.width, connectivity: c.connectivity, ops }
    }

    /// Validates and converts to a circuit.
    pub fn to_circuit(&self) -> Result<Circuit> {
        let mut circuit = Circuit::new(self.width, self.connectivity);
        for (i, op) in self.ops.iter().enumerate() {
            let missing = |field: &str| {
                Error::PreconditionViolated(format!(
                    "op {i} ({}) is missing required param '{field}'",
                    op.kind
                ))
            };
            let params = op.params.as_ref();
            let get_lambda = || params.and_then(|p| p.lambda).ok_or_else(|| missing("lambda"));
            let get_axis = || -> Result<Axis> {
                let [x, y, z] = params.and_then(|p| p.axis).ok_or_else(|| missing("axis"))?;
                Axis::new(x, y, z)
            };
            let kind = match op.kind.as_str() {
                "cnot" => GateKind::Cnot,
                "cz" => GateKind::Cz,
                "ciy" => GateKind::CiY,
                "swap" => GateKind::Swap,
                "h" => GateKind::H,
                "x" => GateKind::X,
                "mcx" => GateKind::McX,
                "phase" => GateKind::Phase(get_lambda()?),
                "rot" => GateKind::Rot { lambda: get_lambda()?, axis: get_axis()? },
                "pi" => GateKind::Pi { axis: get_axis()? },
                "u2" => {
                    let m = params.and_then(|p| p.matrix).ok_or_else(|| missing("matrix"))?;
                    let entries = m
                        .iter()
                        .flatten()
                        .map(|[re, im]| Complex64::new(*re, *im))
                        .collect();
                    GateKind::U2(UnitaryMatrix::from_entries(2, entries)?)
                }
                "mcrot" => GateKind::McRot {
                    lambda: get_lambda()?,
                    axis: get_axis()?,
                    psi: params.and_then(|p| p.psi).ok_or_else(|| missing("psi"))?,
                },
                other => {
                    return Err(Error::PreconditionViolated(format!(
                        "op {i} has unknown kind '{other}'"
                    )))
                }
            };
            circuit.push(GateOp::new(kind, op.qubits.clone()));
        }
        Ok(circuit)
    }
}

/// JSON formatter that writes floats in scientific notation with 17
/// significant digits, enough for exact f64 round-trips.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + std::io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes a value to a JSON string with full float precision.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json writes utf-8"))
}

/// Reads a matrix file.
pub fn read_matrix(path: &std::path::Path) -> Result<UnitaryMatrix> {
    let text = std::fs::read_to_string(path)?;
    let file: MatrixFile = serde_json::from_str(&text)?;
    file.to_matrix()
}

/// Writes a matrix file with full float precision.
pub fn write_matrix(path: &std::path::Path, u: &UnitaryMatrix) -> Result<()> {
    let text = to_json_string(&MatrixFile::from_matrix(u))?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Reads a circuit file.
pub fn read_circuit(path: &std::path::Path) -> Result<Circuit> {
    let text = std::fs::read_to_string(path)?;
    let file: CircuitFile = serde_json::from_str(&text)?;
    file.to_circuit()
}

/// Writes a circuit file with full float precision.
pub fn write_circuit(path: &std::path::Path, c: &Circuit) -> Result<()> {
    let text = to_json_string(&CircuitFile::from_circuit(c))?;
    std::fs::write(path, text)?;
    Ok(())
}
