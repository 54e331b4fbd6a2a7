//! Adaptive Dormand-Prince 5(4) integration of the master equation, kept as
//! an independent check on the matrix-exponential propagator.

use crate::dynamics::check_time;
use crate::dynamics::liouvillian::lindblad_rhs_raw;
use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix4};
use crate::model::{build_hamiltonian, DensityMatrix, SystemParams, HERMITICITY_TOL, POSITIVITY_FLOOR, TRACE_TOL};

pub const DEFAULT_REL_TOL: f64 = 1e-9;
pub const ABS_TOL_FLOOR: f64 = 1e-12;
const MAX_STEPS: usize = 5_000_000;

// The generator has no explicit time dependence, so the stage nodes c_i are
// never needed.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates the master equation from `0` to `t` with local error control
/// `|err| <= ABS_TOL_FLOOR + rel_tol * |rho|` per entry.
pub fn propagate_rk(
    rho0: &DensityMatrix,
    p: &SystemParams,
    t: f64,
    rel_tol: f64,
) -> Result<DensityMatrix> {
    check_time(t)?;
    if !(1e-12..=1e-4).contains(&rel_tol) {
        return Err(Error::Precondition(format!(
            "rel_tol must lie in [1e-12, 1e-4], got {rel_tol}"
        )));
    }
    let h_op = build_hamiltonian(p);
    let f = |y: &ComplexMatrix4| lindblad_rhs_raw(&h_op, p.gamma, y);

    let mut y = *rho0.matrix();
    let mut time = 0.0;
    let mut k1 = f(&y);
    let mut step = (0.01 * t).clamp(1e-6, 0.1);
    let min_step = 1e-14 * t.max(1.0);

    for _ in 0..MAX_STEPS {
        if time >= t {
            break;
        }
        step = step.min(t - time);

        let k2 = f(&(y + k1 * c(step * A21)));
        let k3 = f(&(y + (k1 * c(A31) + k2 * c(A32)) * c(step)));
        let k4 = f(&(y + (k1 * c(A41) + k2 * c(A42) + k3 * c(A43)) * c(step)));
        let k5 = f(&(y + (k1 * c(A51) + k2 * c(A52) + k3 * c(A53) + k4 * c(A54)) * c(step)));
        let k6 = f(&(y
            + (k1 * c(A61) + k2 * c(A62) + k3 * c(A63) + k4 * c(A64) + k5 * c(A65)) * c(step)));
        let y_new = y + (k1 * c(B1) + k3 * c(B3) + k4 * c(B4) + k5 * c(B5) + k6 * c(B6)) * c(step);
        let k7 = f(&y_new);
        let err = (k1 * c(E1) + k3 * c(E3) + k4 * c(E4) + k5 * c(E5) + k6 * c(E6) + k7 * c(E7))
            * c(step);

        let ratio = err
            .iter()
            .zip(y.iter().zip(y_new.iter()))
            .map(|(e, (a, b))| e.norm() / (ABS_TOL_FLOOR + rel_tol * a.norm().max(b.norm())))
            .fold(0.0, f64::max);

        if ratio <= 1.0 {
            time += step;
            y = y_new;
            k1 = k7;
        }
        let factor = if ratio == 0.0 {
            5.0
        } else {
            (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
        };
        step *= factor;
        if step < min_step && time < t {
            return Err(Error::Integration(format!(
                "step size underflow ({step:e}) at t = {time}"
            )));
        }
        // snap the final sliver so that floating-point drift cannot stall the loop
        if t - time < min_step {
            time = t;
        }
    }
    if time < t {
        return Err(Error::Integration(format!(
            "step budget exhausted at t = {time} of {t}"
        )));
    }
    DensityMatrix::with_tolerances(
        y,
        HERMITICITY_TOL.max(rel_tol),
        TRACE_TOL.max(rel_tol),
        POSITIVITY_FLOOR.max(10.0 * rel_tol),
    )
}
