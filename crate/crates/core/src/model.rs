//! Physical parameters, Hamiltonian and initial state of the two charge qubits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    c, hermiticity_error, identity2, kron2, pauli_x, pauli_z, ComplexMatrix4, ComplexVector4,
};
use crate::spectral::hermitian_eigen;

/// Hermiticity tolerance of a [`DensityMatrix`].
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Allowed deviation of the trace from one.
pub const TRACE_TOL: f64 = 1e-9;
/// Most negative eigenvalue tolerated before a state counts as non-positive.
pub const POSITIVITY_FLOOR: f64 = 1e-9;

/// Every constant of the two-qubit charge Hamiltonian plus the dephasing rate.
///
/// Energies are dimensionless (hbar = 1) and time is measured in inverse
/// energy units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub e_c1: f64,
    pub e_c2: f64,
    pub e_j1: f64,
    pub e_j2: f64,
    pub e_m: f64,
    pub n_g1: f64,
    pub n_g2: f64,
    pub gamma: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::degenerate(0.0, 0.0, 0.0)
    }
}

impl SystemParams {
    /// Identical qubits at the charge degeneracy point `n_g = 1/2`.
    pub fn degenerate(gamma: f64, e_j: f64, e_m: f64) -> Self {
        Self {
            e_c1: 0.0,
            e_c2: 0.0,
            e_j1: e_j,
            e_j2: e_j,
            e_m,
            n_g1: 0.5,
            n_g2: 0.5,
            gamma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("e_c1", self.e_c1),
            ("e_c2", self.e_c2),
            ("e_j1", self.e_j1),
            ("e_j2", self.e_j2),
            ("e_m", self.e_m),
            ("n_g1", self.n_g1),
            ("n_g2", self.n_g2),
            ("gamma", self.gamma),
        ];
        if let Some((name, v)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Precondition(format!("{name} = {v} is not finite")));
        }
        if self.gamma < 0.0 {
            return Err(Error::Precondition(format!(
                "dephasing rate must be non-negative, got {}",
                self.gamma
            )));
        }
        for (name, n) in [("n_g1", self.n_g1), ("n_g2", self.n_g2)] {
            if !(0.0..=1.0).contains(&n) {
                return Err(Error::Precondition(format!("{name} = {n} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Identical Josephson energies at the degeneracy point, where the
    /// charging terms drop out of the Hamiltonian.
    pub fn degenerate_identical(&self) -> bool {
        self.n_g1 == 0.5 && self.n_g2 == 0.5 && self.e_j1 == self.e_j2
    }
}

/// Charging-energy coefficients multiplying `sigma_z` on each qubit.
pub fn kappa_coefficients(p: &SystemParams) -> (f64, f64) {
    let k1 = 2.0 * p.e_c1 * (1.0 - 2.0 * p.n_g1) + p.e_m * (1.0 - 2.0 * p.n_g2);
    let k2 = 2.0 * p.e_c2 * (1.0 - 2.0 * p.n_g2) + p.e_m * (1.0 - 2.0 * p.n_g1);
    (k1, k2)
}

/// Full two-qubit charge Hamiltonian
/// `H = -1/2 (k1 Z1 + k2 Z2 + EJ1 X1 + EJ2 X2 - 2 Em Z1 Z2)`.
pub fn build_hamiltonian(p: &SystemParams) -> ComplexMatrix4 {
    let (k1, k2) = kappa_coefficients(p);
    let (x, z, id) = (pauli_x(), pauli_z(), identity2());
    let z1 = kron2(&z, &id);
    let z2 = kron2(&id, &z);
    let x1 = kron2(&x, &id);
    let x2 = kron2(&id, &x);
    let zz = kron2(&z, &z);
    let sum = z1 * c(k1) + z2 * c(k2) + x1 * c(p.e_j1) + x2 * c(p.e_j2) - zz * c(2.0 * p.e_m);
    sum * c(-0.5)
}

/// Hermitian, unit-trace, positive semidefinite 4x4 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(ComplexMatrix4);

impl DensityMatrix {
    /// Validates the density-matrix invariants at the default tolerances.
    pub fn new(mat: ComplexMatrix4) -> Result<Self> {
        Self::with_tolerances(mat, HERMITICITY_TOL, TRACE_TOL, POSITIVITY_FLOOR)
    }

    pub fn with_tolerances(
        mat: ComplexMatrix4,
        hermiticity_tol: f64,
        trace_tol: f64,
        positivity_floor: f64,
    ) -> Result<Self> {
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Contract("density matrix has non-finite entries".into()));
        }
        let herm = hermiticity_error(&mat);
        if herm > hermiticity_tol {
            return Err(Error::Contract(format!(
                "density matrix not Hermitian: max |rho - rho^dagger| = {herm:e}"
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > trace_tol || tr.im.abs() > trace_tol {
            return Err(Error::Contract(format!("trace {tr} differs from 1")));
        }
        let (evals, _) = hermitian_eigen(&mat);
        let min = evals.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -positivity_floor {
            return Err(Error::Contract(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self(mat))
    }

    pub fn matrix(&self) -> &ComplexMatrix4 {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix4 {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// `Tr rho^2`.
    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let (evals, _) = hermitian_eigen(&self.0);
        evals.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Completely mixed state `I/4`.
    pub fn maximally_mixed() -> Self {
        Self(ComplexMatrix4::identity() * c(0.25))
    }
}

/// `|psi+> = (|01> + |10>)/sqrt 2`.
pub fn psi_plus() -> ComplexVector4 {
    let a = c(std::f64::consts::FRAC_1_SQRT_2);
    ComplexVector4::new(c(0.0), a, a, c(0.0))
}

/// Projector onto `|psi+>`; the initial state of every evolution.
pub fn bell_state_psi_plus() -> DensityMatrix {
    let mut m = ComplexMatrix4::zeros();
    for (r, col) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
        m[(r, col)] = c(0.5);
    }
    DensityMatrix(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn generic() -> SystemParams {
        SystemParams {
            e_c1: 0.3,
            e_c2: 0.7,
            e_j1: 0.15,
            e_j2: -0.4,
            e_m: 0.2,
            n_g1: 0.25,
            n_g2: 0.75,
            gamma: 0.4,
        }
    }

    #[test]
    fn kappa_vanishes_at_degeneracy() {
        let mut p = generic();
        p.n_g1 = 0.5;
        p.n_g2 = 0.5;
        assert_eq!(kappa_coefficients(&p), (0.0, 0.0));
    }

    #[test]
    fn kappa_single_charging_term() {
        let p = SystemParams {
            e_c1: 1.0,
            e_m: 0.0,
            n_g1: 0.0,
            n_g2: 0.5,
            ..SystemParams::default()
        };
        assert_eq!(kappa_coefficients(&p).0, 2.0);
    }

    #[test]
    fn kappa_generic_hand_values() {
        // k1 = 2*0.3*0.5 + 0.2*(-0.5) = 0.2 ; k2 = 2*0.7*(-0.5) + 0.2*0.5 = -0.6
        let (k1, k2) = kappa_coefficients(&generic());
        assert_abs_diff_eq!(k1, 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(k2, -0.6, epsilon = 1e-15);
    }

    #[test]
    fn hamiltonian_at_degeneracy_point() {
        let h = build_hamiltonian(&SystemParams::degenerate(0.4, 0.1, 0.1));
        let diag: Vec<f64> = (0..4).map(|k| h[(k, k)].re).collect();
        for (got, want) in diag.iter().zip([0.1, -0.1, -0.1, 0.1]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
        // single spin flips couple 00-01, 00-10, 01-11, 10-11
        for (r, col) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
            assert_abs_diff_eq!(h[(r, col)].re, -0.05, epsilon = 1e-15);
            assert_abs_diff_eq!(h[(col, r)].re, -0.05, epsilon = 1e-15);
        }
        for (r, col) in [(0, 3), (1, 2)] {
            assert_eq!(h[(r, col)], Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn hamiltonian_zero_params() {
        let p = SystemParams {
            n_g1: 0.0,
            n_g2: 0.0,
            ..SystemParams::default()
        };
        assert_eq!(build_hamiltonian(&p), ComplexMatrix4::zeros());
    }

    // Independent Kronecker route over plain f64 arrays.
    fn kron_oracle(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> ComplexMatrix4 {
        let mut out = ComplexMatrix4::zeros();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        out[(2 * i + k, 2 * j + l)] = c(a[i][j] * b[k][l]);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn hamiltonian_generic_matches_kron_oracle() {
        let p = generic();
        let sx = [[0.0, 1.0], [1.0, 0.0]];
        let sz = [[1.0, 0.0], [0.0, -1.0]];
        let id = [[1.0, 0.0], [0.0, 1.0]];
        let (k1, k2) = (0.2, -0.6);
        let kappa_part = kron_oracle(sz, id) * c(k1) + kron_oracle(id, sz) * c(k2);
        let reduced = kron_oracle(sx, id) * c(p.e_j1) + kron_oracle(id, sx) * c(p.e_j2)
            - kron_oracle(sz, sz) * c(2.0 * p.e_m);
        let expected = (kappa_part + reduced) * c(-0.5);
        assert!(max_abs_diff(&build_hamiltonian(&p), &expected) < 1e-15);
    }

    #[test]
    fn bell_state_entries_and_invariants() {
        let rho = bell_state_psi_plus();
        assert_eq!(rho.matrix()[(1, 1)].re, 0.5);
        assert_eq!(rho.matrix()[(1, 2)].re, 0.5);
        assert_eq!(rho.trace(), 1.0);
        assert_abs_diff_eq!(rho.purity(), 1.0, epsilon = 1e-15);
        let (mut evals, _) = hermitian_eigen(rho.matrix());
        evals.sort_by(|a, b| b.total_cmp(a));
        for (got, want) in evals.iter().zip([1.0, 0.0, 0.0, 0.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
        assert!(DensityMatrix::new(*rho.matrix()).is_ok());
    }

    #[test]
    fn density_matrix_rejects_bad_input() {
        let mut m = *bell_state_psi_plus().matrix();
        m[(0, 0)] = c(0.1);
        assert!(matches!(DensityMatrix::new(m), Err(Error::Contract(_))));
        let mut m = *bell_state_psi_plus().matrix();
        m[(0, 1)] = Complex64::new(0.0, 0.1);
        assert!(DensityMatrix::new(m).is_err());
        let m = ComplexMatrix4::from_diagonal(&nalgebra::Vector4::new(c(1.2), c(-0.2), c(0.0), c(0.0)));
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn validate_rejects_negative_gamma_and_bad_gate_charge() {
        assert!(SystemParams::degenerate(-0.1, 0.1, 0.1).validate().is_err());
        let mut p = generic();
        p.n_g1 = 1.5;
        assert!(p.validate().is_err());
        p.n_g1 = f64::NAN;
        assert!(p.validate().is_err());
        assert!(generic().validate().is_ok());
    }

    #[test]
    fn degeneracy_predicate() {
        assert!(SystemParams::degenerate(0.4, 0.1, 0.1).degenerate_identical());
        assert!(!generic().degenerate_identical());
        let mut p = SystemParams::degenerate(0.4, 0.1, 0.1);
        p.e_j2 = 0.2;
        assert!(!p.degenerate_identical());
    }

    proptest! {
        #[test]
        fn hamiltonian_is_exactly_hermitian(
            ec1 in -2.0..2.0f64, ec2 in -2.0..2.0f64, ej1 in -2.0..2.0f64, ej2 in -2.0..2.0f64,
            em in -2.0..2.0f64, ng1 in 0.0..1.0f64, ng2 in 0.0..1.0f64,
        ) {
            let p = SystemParams { e_c1: ec1, e_c2: ec2, e_j1: ej1, e_j2: ej2, e_m: em, n_g1: ng1, n_g2: ng2, gamma: 0.0 };
            let h = build_hamiltonian(&p);
            prop_assert_eq!(h, h.adjoint());
        }

        #[test]
        fn charging_energy_irrelevant_at_degeneracy(
            ec1 in -2.0..2.0f64, ec2 in -2.0..2.0f64, ej in -1.0..1.0f64, em in -1.0..1.0f64,
        ) {
            let base = SystemParams::degenerate(0.3, ej, em);
            let moved = SystemParams { e_c1: ec1, e_c2: ec2, ..base };
            prop_assert_eq!(build_hamiltonian(&base), build_hamiltonian(&moved));
        }
    }
}
