//! Dense complex unitary matrices.
//!
//! [`UnitaryMatrix`] wraps a dynamically sized complex matrix and restricts
//! construction to power-of-two dimensions up to 2^12, matching the
//! simulator's width limit. Checked constructors validate unitarity in the
//! max norm; internal code paths that multiply existing unitaries use the
//! unchecked constructor to avoid quadratic revalidation.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

/// Maximum number of qubits a dense matrix may represent.
pub const MAX_QUBITS: usize = 12;

/// A dense unitary matrix of power-of-two dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    data: DMatrix<Complex64>,
}

impl UnitaryMatrix {
    /// Builds a matrix from row-major entries after checking that the
    /// dimension is a power of two within the width limit and that the
    /// matrix is unitary within [`tol::UNITARY_TOL`].
    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<UnitaryMatrix> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim, got: entries.len() / dim.max(1) });
        }
        let data = DMatrix::from_row_iterator(dim, dim, entries);
        let u = UnitaryMatrix { data };
        let dev = u.unitarity_deviation();
        if dev > tol::UNITARY_TOL {
            return Err(Error::NonUnitary { deviation: dev });
        }
        Ok(u)
    }

    /// Wraps a matrix that is already known to be unitary, for example a
    /// product of validated unitaries. Dimension is still checked.
    pub fn from_matrix_unchecked(data: DMatrix<Complex64>) -> UnitaryMatrix {
        debug_assert_eq!(data.nrows(), data.ncols());
        UnitaryMatrix { data }
    }

    /// 2x2 constructor from explicit entries, unchecked. Used for gate
    /// matrices whose unitarity holds by construction.
    pub fn from_rows_2x2(
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
    ) -> UnitaryMatrix {
        UnitaryMatrix {
            data: DMatrix::from_row_slice(2, 2, &[a, b, c, d]),
        }
    }

    /// Identity of the given dimension.
    pub fn identity(dim: usize) -> UnitaryMatrix {
        UnitaryMatrix { data: DMatrix::identity(dim, dim) }
    }

    /// Matrix dimension (the matrix is square).
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    /// Entry at row `r`, column `c`.
    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        self.data[(r, c)]
    }

    /// Matrix product self * other.
    pub fn mul(&self, other: &UnitaryMatrix) -> UnitaryMatrix {
        UnitaryMatrix { data: &self.data * &other.data }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> UnitaryMatrix {
        UnitaryMatrix { data: self.data.adjoint() }
    }

    /// Scalar multiple. The caller is responsible for keeping the result
    /// unitary (unit-modulus scalars).
    pub fn scale(&self, s: Complex64) -> UnitaryMatrix {
        UnitaryMatrix { data: self.data.map(|e| e * s) }
    }

    /// Determinant via LU decomposition.
    pub fn determinant(&self) -> Complex64 {
        self.data.clone().lu().determinant()
    }

    /// Trace.
    pub fn trace(&self) -> Complex64 {
        self.data.trace()
    }

    /// Kronecker product self (x) other, with self on the high-order
    /// (most significant) qubits.
    pub fn kron(&self, other: &UnitaryMatrix) -> UnitaryMatrix {
        UnitaryMatrix { data: self.data.kronecker(&other.data) }
    }

    /// Max-norm deviation of U^dagger U from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let dim = self.dim();
        let prod = self.data.adjoint() * &self.data;
        let mut dev: f64 = 0.0;
        for r in 0..dim {
            for c in 0..dim {
                let expected = if r == c { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
                dev = dev.max((prod[(r, c)] - expected).norm());
            }
        }
        dev
    }

    /// Read access to the underlying nalgebra matrix.
    pub fn raw(&self) -> &DMatrix<Complex64> {
        &self.data
    }
}

fn check_dim(dim: usize) -> Result<()> {
    let ok = dim.is_power_of_two() && dim <= (1 << MAX_QUBITS);
    if ok {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: dim.next_power_of_two().max(2), got: dim })
    }
}

/// Largest entrywise modulus of a - b.
pub fn max_norm_diff(a: &UnitaryMatrix, b: &UnitaryMatrix) -> f64 {
    assert_eq!(a.dim(), b.dim(), "max_norm_diff dimension mismatch");
    let mut m: f64 = 0.0;
    for r in 0..a.dim() {
        for c in 0..a.dim() {
            m = m.max((a.at(r, c) - b.at(r, c)).norm());
        }
    }
    m
}
