//! Small dense complex linear algebra used throughout the crate.

use nalgebra::{Matrix2, Matrix4, SMatrix, Vector4};
use num_complex::Complex64;

pub type ComplexMatrix2 = Matrix2<Complex64>;
/// Operator on the two-qubit Hilbert space, basis `|00>, |01>, |10>, |11>`.
pub type ComplexMatrix4 = Matrix4<Complex64>;
pub type ComplexVector4 = Vector4<Complex64>;
/// Superoperator acting on column-stacked 4x4 matrices.
pub type SuperMatrix = SMatrix<Complex64, 16, 16>;
pub type SuperVector = SMatrix<Complex64, 16, 1>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn pauli_x() -> ComplexMatrix2 {
    Matrix2::new(ZERO, ONE, ONE, ZERO)
}

/// `sigma_z |0> = +|0>`.
pub fn pauli_z() -> ComplexMatrix2 {
    Matrix2::new(ONE, ZERO, ZERO, -ONE)
}

pub fn identity2() -> ComplexMatrix2 {
    Matrix2::identity()
}

/// Kronecker product `a (x) b` of two single-qubit operators.
pub fn kron2(a: &ComplexMatrix2, b: &ComplexMatrix2) -> ComplexMatrix4 {
    ComplexMatrix4::from_fn(|r, col| a[(r / 2, col / 2)] * b[(r % 2, col % 2)])
}

/// Kronecker product of two 4x4 operators into a 16x16 superoperator.
pub fn kron4(a: &ComplexMatrix4, b: &ComplexMatrix4) -> SuperMatrix {
    SuperMatrix::from_fn(|r, col| a[(r / 4, col / 4)] * b[(r % 4, col % 4)])
}

/// Column-stacking vectorisation.
pub fn vec4(m: &ComplexMatrix4) -> SuperVector {
    SuperVector::from_fn(|k, _| m[(k % 4, k / 4)])
}

pub fn unvec4(v: &SuperVector) -> ComplexMatrix4 {
    ComplexMatrix4::from_fn(|r, col| v[col * 4 + r])
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &ComplexMatrix4, b: &ComplexMatrix4) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_abs(a: &ComplexMatrix4) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// `max |a - a^dagger|`.
pub fn hermiticity_error(a: &ComplexMatrix4) -> f64 {
    max_abs_diff(a, &a.adjoint())
}

pub fn approx_eq(a: &ComplexMatrix4, b: &ComplexMatrix4, tol: f64) -> bool {
    max_abs_diff(a, b) <= tol
}

pub fn commutator(a: &ComplexMatrix4, b: &ComplexMatrix4) -> ComplexMatrix4 {
    a * b - b * a
}

/// `<u|v>`, antilinear in the first argument.
pub fn inner(u: &ComplexVector4, v: &ComplexVector4) -> Complex64 {
    u.dotc(v)
}

/// Matrix element `<u|m|v>`.
pub fn sandwich(u: &ComplexVector4, m: &ComplexMatrix4, v: &ComplexVector4) -> Complex64 {
    u.dotc(&(m * v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_places_blocks_in_basis_order() {
        let zi = kron2(&pauli_z(), &identity2());
        let diag: Vec<f64> = (0..4).map(|k| zi[(k, k)].re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
        let iz = kron2(&identity2(), &pauli_z());
        let diag: Vec<f64> = (0..4).map(|k| iz[(k, k)].re).collect();
        assert_eq!(diag, vec![1.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn vec_matches_kron_identity() {
        // vec(A X B) = (B^T (x) A) vec(X)
        let a = ComplexMatrix4::from_fn(|r, k| Complex64::new(r as f64 - k as f64, 0.3 * k as f64));
        let b = ComplexMatrix4::from_fn(|r, k| Complex64::new(0.5 * (r * k) as f64, r as f64));
        let x = ComplexMatrix4::from_fn(|r, k| Complex64::new((r + 2 * k) as f64, -(r as f64)));
        let lhs = vec4(&(a * x * b));
        let rhs = kron4(&b.transpose(), &a) * vec4(&x);
        assert!((lhs - rhs).iter().all(|z| z.norm() < 1e-12));
        assert_eq!(unvec4(&vec4(&x)), x);
    }
}
