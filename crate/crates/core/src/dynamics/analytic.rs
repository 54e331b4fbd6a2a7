//! Closed-form density matrix at the degeneracy point, evaluated exactly as
//! published. Nothing here corrects suspected misprints; discrepancies with
//! the numerical propagator are measured by [`super::audit`].

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::check_time;
use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix4};
use crate::model::SystemParams;

/// Coefficients of the closed-form solution at one instant.
///
/// `mu_plus_sol`/`mu_minus_sol` belong to the solution and are unrelated to
/// the eigenvector coefficients of the same name in the spectral module.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticCoefficients {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub mu_plus_sol: f64,
    pub mu_minus_sol: f64,
    pub r1_plus: f64,
    pub r1_minus: f64,
    pub r2_plus: f64,
    pub r2_minus: f64,
    pub upsilon1: f64,
    pub upsilon2: f64,
}

fn checked_sqrt(name: &str, radicand: f64) -> Result<f64> {
    if radicand < 0.0 || !radicand.is_finite() {
        return Err(Error::Domain(format!("{name} radicand is {radicand:e}")));
    }
    Ok(radicand.sqrt())
}

impl AnalyticCoefficients {
    pub fn new(p: &SystemParams, t: f64) -> Result<Self> {
        let (g, ej, em) = (p.gamma, p.e_j1, p.e_m);
        let s2 = std::f64::consts::SQRT_2;

        let lambda3 = checked_sqrt(
            "lambda3",
            em.powi(4) + (ej * ej - g * g).powi(2) + 2.0 * em * (ej * ej + g * g).powi(2),
        )?;
        let shift = em * em + ej * ej - g * g;
        let lambda1 = checked_sqrt("lambda1", lambda3 + shift)?;
        let lambda2 = checked_sqrt("lambda2", lambda3 - shift)?;
        let l123 = lambda1 * lambda2 * lambda3;
        if l123 == 0.0 {
            return Err(Error::Domain(
                "lambda1 * lambda2 * lambda3 vanishes; upsilon1 is undefined".into(),
            ));
        }

        let mu_shift = g * g + em * em - ej * ej;
        let (a1, a2) = (s2 * lambda1 * t, s2 * lambda2 * t);
        let decay = (-2.0 * g * t).exp();

        Ok(Self {
            lambda1,
            lambda2,
            lambda3,
            mu_plus_sol: lambda3 + mu_shift,
            mu_minus_sol: lambda3 - mu_shift,
            r1_plus: s2 * g * a1.sin() + lambda2 * a1.cos(),
            r1_minus: s2 * g * a1.sin() - lambda2 * a1.cos(),
            r2_plus: s2 * g * a2.sinh() + lambda2 * a2.cosh(),
            r2_minus: s2 * g * a2.sinh() - lambda2 * a2.cosh(),
            upsilon1: decay / (8.0 * l123),
            upsilon2: ej * decay / (8.0 * lambda3),
        })
    }
}

/// The closed-form matrix and the coefficients it was built from. The matrix
/// is not validated as a density matrix: the published expressions need not
/// satisfy those invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticState {
    pub matrix: ComplexMatrix4,
    pub coefficients: AnalyticCoefficients,
}

/// Evaluates the published closed-form `rho(t)` for identical qubits at the
/// degeneracy point.
pub fn analytic_state(p: &SystemParams, t: f64) -> Result<AnalyticState> {
    if !p.degenerate_identical() {
        return Err(Error::Precondition(
            "closed form only holds for identical qubits at n_g = 1/2".into(),
        ));
    }
    p.validate()?;
    check_time(t)?;
    let co = AnalyticCoefficients::new(p, t)?;
    let (g, em) = (p.gamma, p.e_m);
    let s2 = std::f64::consts::SQRT_2;
    let (l1, l2, l3) = (co.lambda1, co.lambda2, co.lambda3);
    let l123 = l1 * l2 * l3;
    let (a1, a2) = (s2 * l1 * t, s2 * l2 * t);

    let grow = 2.0 * l123 * (2.0 * g * t).exp();
    let shrink = 2.0 * l123 * (-2.0 * g * t).exp();
    let plus = l2 * co.mu_minus_sol * co.r1_plus + l1 * co.mu_plus_sol * co.r2_plus;
    let minus = l2 * co.mu_minus_sol * co.r1_minus + l1 * co.mu_plus_sol * co.r2_minus;

    let r11 = co.upsilon1 * (grow - plus);
    let r22 = co.upsilon1 * (grow + plus);
    let r14 = co.upsilon1 * (shrink + minus);
    let r23 = co.upsilon1 * (shrink - minus);
    let r12 = Complex64::new(
        2.0 * em * (a2.cosh() - a1.cos()),
        s2 * (l2 * a2.sinh() + l1 * a1.sin()),
    ) * co.upsilon2;

    let mut m = ComplexMatrix4::zeros();
    m[(0, 0)] = c(r11);
    m[(3, 3)] = c(r11);
    m[(1, 1)] = c(r22);
    m[(2, 2)] = c(r22);
    m[(0, 3)] = c(r14);
    m[(3, 0)] = c(r14);
    m[(1, 2)] = c(r23);
    m[(2, 1)] = c(r23);
    for (r, col) in [(0, 1), (0, 2), (3, 1), (3, 2)] {
        m[(r, col)] = r12;
        m[(col, r)] = r12.conj();
    }
    Ok(AnalyticState {
        matrix: m,
        coefficients: co,
    })
}
