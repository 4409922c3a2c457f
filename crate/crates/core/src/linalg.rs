// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra helpers shared by the simulation modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Tolerance for unitarity checks on user-supplied matrices.
pub const UNITARY_TOL: f64 = 1e-9;

/// Tolerance for state normalization.
pub const NORM_TOL: f64 = 1e-9;

/// Kronecker product `a ⊗ b`; the row index of `a` is the most significant.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `u^{⊗n}` with the first factor most significant.
pub fn kron_power(u: &CMatrix, n: usize) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for _ in 0..n {
        out = kron(&out, u);
    }
    out
}

/// Largest entry-wise modulus of `a - b`. Panics on shape mismatch.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest entry-wise modulus.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |U†U − I|` in the max-entry norm.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let n = u.nrows();
    max_abs_diff(&(u.adjoint() * u), &CMatrix::identity(n, n))
}

pub fn check_unitary(u: &CMatrix, tolerance: f64) -> Result<()> {
    let deviation = unitarity_deviation(u);
    if deviation <= tolerance {
        Ok(())
    } else {
        Err(Error::NotUnitary {
            deviation,
            tolerance,
        })
    }
}

/// Frobenius norm of `a - b`.
pub fn frobenius_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm()
}

/// `|⟨a|b⟩|`, which is insensitive to global phase.
pub fn fidelity(a: &CVector, b: &CVector) -> f64 {
    a.dotc(b).norm()
}

/// Commutator `ab − ba`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Haar-distributed unitary from the QR decomposition of a complex Ginibre
/// matrix, with the phases of R's diagonal folded back into Q.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let z = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) / std::f64::consts::SQRT_2
    });
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { ONE };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}
