use crate::dynamics::{check_time, expm::expm};
use crate::error::{Error, Result};
use crate::linalg::{
    c, commutator, hermiticity_error, identity2, kron2, kron4, pauli_z, unvec4, vec4,
    ComplexMatrix4, SuperMatrix, I,
};
use crate::model::{build_hamiltonian, DensityMatrix, SystemParams};

/// Post-propagation drift in trace or Hermiticity that signals a broken
/// exponential kernel.
pub const PROPAGATION_DRIFT_LIMIT: f64 = 1e-8;

fn dephasing_operators() -> [ComplexMatrix4; 2] {
    let (z, id) = (pauli_z(), identity2());
    [kron2(&z, &id), kron2(&id, &z)]
}

fn rhs(h: &ComplexMatrix4, gamma: f64, rho: &ComplexMatrix4) -> ComplexMatrix4 {
    let mut out = -commutator(h, rho) * I;
    for z in dephasing_operators() {
        let zz = z * z;
        out += (z * rho * z * c(2.0) - zz * rho - rho * zz) * c(gamma / 8.0);
    }
    out
}

/// `d rho/dt = -i[H, rho] + (Gamma/8) sum_j (2 Z_j rho Z_j - Z_j Z_j rho - rho Z_j Z_j)`.
pub fn lindblad_rhs(rho: &DensityMatrix, p: &SystemParams) -> ComplexMatrix4 {
    rhs(&build_hamiltonian(p), p.gamma, rho.matrix())
}

/// Same right-hand side for an arbitrary (not necessarily physical) matrix.
pub(crate) fn lindblad_rhs_raw(h: &ComplexMatrix4, gamma: f64, rho: &ComplexMatrix4) -> ComplexMatrix4 {
    rhs(h, gamma, rho)
}

/// Superoperator form of the master equation acting on column-stacked density
/// matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    pub matrix: SuperMatrix,
    pub params: SystemParams,
}

/// Builds `L` from `vec(A X B) = (B^T (x) A) vec(X)`.
pub fn build_liouvillian(p: &SystemParams) -> Liouvillian {
    let h = build_hamiltonian(p);
    let id = ComplexMatrix4::identity();
    let mut l = (kron4(&id, &h) - kron4(&h.transpose(), &id)) * (-I);
    for z in dephasing_operators() {
        let zz = z * z;
        let term = kron4(&z.transpose(), &z) * c(2.0) - kron4(&id, &zz) - kron4(&zz.transpose(), &id);
        l += term * c(p.gamma / 8.0);
    }
    Liouvillian {
        matrix: l,
        params: *p,
    }
}

fn matrix_unit(r: usize, col: usize) -> ComplexMatrix4 {
    let mut m = ComplexMatrix4::zeros();
    m[(r, col)] = c(1.0);
    m
}

impl Liouvillian {
    pub fn apply(&self, rho: &ComplexMatrix4) -> ComplexMatrix4 {
        unvec4(&(self.matrix * vec4(rho)))
    }

    /// `max |Tr L[E_rc]|` over the 16 matrix units.
    pub fn trace_defect(&self) -> f64 {
        (0..16)
            .map(|k| self.apply(&matrix_unit(k % 4, k / 4)).trace().norm())
            .fold(0.0, f64::max)
    }

    /// `exp(L t)`.
    pub fn propagator(&self, t: f64) -> SuperMatrix {
        expm(&(self.matrix * c(t)))
    }

    pub fn propagate(&self, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        check_time(t)?;
        let out = unvec4(&(self.propagator(t) * vec4(rho0.matrix())));
        let herm = hermiticity_error(&out);
        let trace_err = (out.trace() - c(1.0)).norm();
        if !(herm <= PROPAGATION_DRIFT_LIMIT && trace_err <= PROPAGATION_DRIFT_LIMIT) {
            return Err(Error::Contract(format!(
                "propagated state drifted: hermiticity {herm:e}, trace {trace_err:e}"
            )));
        }
        DensityMatrix::new(out)
    }
}
