//! Haar-random sampling for tests and benchmarks.
//!
//! Unitaries are drawn by orthonormalizing a complex Ginibre matrix
//! (i.i.d. standard complex normal entries) with modified Gram-Schmidt.
//! Gram-Schmidt produces an R factor whose diagonal is real positive by
//! construction, which is exactly the normalization that makes the Q
//! factor Haar-distributed; a plain Householder QR would need an explicit
//! phase correction.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bloch::Axis;
use crate::matrix::UnitaryMatrix;

/// One standard complex normal draw: real and imaginary parts are
/// independent N(0, 1/2), so E|z|^2 = 1.
fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Samples a dim x dim unitary from the Haar measure.
///
/// Cost is O(dim^3); intended for the small dimensions used in synthesis
/// (2 and 4) and their tests.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitaryMatrix {
    let mut g = DMatrix::<Complex64>::from_fn(dim, dim, |_, _| complex_normal(rng));
    for j in 0..dim {
        // Two orthogonalization passes keep the loss of orthogonality at
        // the machine-epsilon level even for ill-conditioned draws.
        for _ in 0..2 {
            for i in 0..j {
                let qi = g.column(i).clone_owned();
                let r = qi.dotc(&g.column(j));
                let gj = g.column(j) - qi * r;
                g.set_column(j, &gj);
            }
        }
        let norm = g.column(j).norm();
        let gj = g.column(j) / Complex64::from(norm);
        g.set_column(j, &gj);
    }
    UnitaryMatrix::from_matrix_unchecked(g)
}

/// Samples a unit axis uniformly on the sphere (normalized Gaussian
/// triple).
pub fn random_axis<R: Rng + ?Sized>(rng: &mut R) -> Axis {
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let y: f64 = rng.sample(StandardNormal);
        let z: f64 = rng.sample(StandardNormal);
        if let Ok(axis) = Axis::normalize(x, y, z) {
            return axis;
        }
    }
}

/// Samples an angle uniformly from (-pi, pi].
pub fn random_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    -rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)
}
