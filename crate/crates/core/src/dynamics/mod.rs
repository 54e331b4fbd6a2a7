//! Master-equation dynamics: the Liouvillian, two independent numerical
//! propagators, and the closed-form solution with its audit.

pub mod analytic;
pub mod audit;
pub mod expm;
pub mod liouvillian;
pub mod rk;

pub use analytic::{analytic_state, AnalyticCoefficients, AnalyticState};
pub use audit::{audit_analytic, audit_grid, AuditLedger, AuditReport, Verdict};
pub use liouvillian::{build_liouvillian, lindblad_rhs, Liouvillian};
pub use rk::{propagate_rk, DEFAULT_REL_TOL};

use crate::error::{Error, Result};
use crate::model::{DensityMatrix, SystemParams};

/// `rho(t) = exp(L t) rho0` for the time-independent Liouvillian of `p`.
pub fn propagate_expm(rho0: &DensityMatrix, p: &SystemParams, t: f64) -> Result<DensityMatrix> {
    build_liouvillian(p).propagate(rho0, t)
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Precondition(format!(
            "time must be finite and non-negative, got {t}"
        )));
    }
    Ok(())
}
