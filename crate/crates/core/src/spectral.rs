//! Eigendecomposition of 4x4 density matrices with deterministic ordering and
//! phase convention, plus the closed-form eigensystem kept for auditing.

use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::analytic::{analytic_state, AnalyticState};
use crate::error::{Error, Result};
use crate::linalg::{c, inner, ComplexMatrix4, ComplexVector4, ZERO};
use crate::model::{DensityMatrix, SystemParams};

/// Eigenvalues below this are treated as exactly zero when forming QFI terms.
pub const EIGENVALUE_CLAMP: f64 = 1e-12;
/// Largest tolerated `|rho v - eps v|` before the eigen-kernel is considered broken.
pub const RESIDUAL_LIMIT: f64 = 1e-8;
/// Entry magnitudes within this of the maximum count as ties for gauge fixing.
pub const GAUGE_TIE_TOL: f64 = 1e-5;
const MAX_SWEEPS: usize = 64;

/// Cyclic complex Jacobi diagonalisation of a Hermitian 4x4 matrix.
///
/// Returns eigenvalues in the order they settle on the diagonal and the
/// matching eigenvectors as columns. Only the Hermitian part of `a` is used.
pub fn hermitian_eigen(a: &ComplexMatrix4) -> ([f64; 4], ComplexMatrix4) {
    let mut m = (a + a.adjoint()) * c(0.5);
    let mut v = ComplexMatrix4::identity();
    for k in 0..4 {
        m[(k, k)].im = 0.0;
    }

    for _ in 0..MAX_SWEEPS {
        let converged = (0..4).all(|p| {
            (p + 1..4).all(|q| {
                let off = m[(p, q)].norm();
                off == 0.0
                    || off <= f64::EPSILON * 1e-2 * (m[(p, p)].re.abs() * m[(q, q)].re.abs()).sqrt()
                    || off < f64::MIN_POSITIVE * 1e4
            })
        });
        if converged {
            break;
        }
        for p in 0..4 {
            for q in p + 1..4 {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }

    ([m[(0, 0)].re, m[(1, 1)].re, m[(2, 2)].re, m[(3, 3)].re], v)
}

// Annihilates m[p][q] with a unitary acting on columns p and q.
fn rotate(m: &mut ComplexMatrix4, v: &mut ComplexMatrix4, p: usize, q: usize) {
    let z = m[(p, q)];
    let r = z.norm();
    if r == 0.0 {
        return;
    }
    let phase = z / r;
    let theta = (m[(q, q)].re - m[(p, p)].re) / (2.0 * r);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let cs = 1.0 / (t * t + 1.0).sqrt();
    let sn = t * cs;

    let mut g = ComplexMatrix4::identity();
    g[(p, p)] = c(cs);
    g[(p, q)] = c(sn);
    g[(q, p)] = -phase.conj() * sn;
    g[(q, q)] = phase.conj() * cs;

    *m = g.adjoint() * *m * g;
    *v *= g;
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    for k in 0..4 {
        m[(k, k)].im = 0.0;
    }
}

/// Rotates `v` so that its largest-magnitude entry is real and non-negative.
/// Ties in magnitude go to the lowest index.
pub fn fix_gauge(v: &ComplexVector4) -> ComplexVector4 {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return *v;
    }
    let idx = v
        .iter()
        .position(|z| z.norm() >= max - GAUGE_TIE_TOL)
        .unwrap_or(0);
    let phase = v[idx].conj() / v[idx].norm();
    let mut out = v * phase;
    out[idx] = Complex64::new(out[idx].norm(), 0.0);
    out
}

/// Eigenvalues sorted descending with their gauge-fixed orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: [f64; 4],
    pub eigenvectors: [ComplexVector4; 4],
}

impl SpectralDecomposition {
    /// Decomposes any Hermitian matrix; no density-matrix checks.
    pub fn of_hermitian(a: &ComplexMatrix4) -> Self {
        let (vals, vecs) = hermitian_eigen(a);
        let mut order = [0usize, 1, 2, 3];
        order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]).then(i.cmp(&j)));
        let eigenvalues = order.map(|k| vals[k]);
        let eigenvectors = order.map(|k| fix_gauge(&vecs.column(k).into_owned()));
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    /// Eigenvalues with everything below [`EIGENVALUE_CLAMP`] set to zero, and
    /// how many were clamped.
    pub fn clamped_eigenvalues(&self) -> ([f64; 4], usize) {
        let mut count = 0;
        let vals = self.eigenvalues.map(|e| {
            if e < EIGENVALUE_CLAMP {
                count += 1;
                0.0
            } else {
                e
            }
        });
        (vals, count)
    }

    /// `sum_i eps_i |v_i><v_i|`.
    pub fn reconstruct(&self) -> ComplexMatrix4 {
        self.eigenvalues
            .iter()
            .zip(&self.eigenvectors)
            .fold(ComplexMatrix4::zeros(), |acc, (e, v)| {
                acc + v * v.adjoint() * c(*e)
            })
    }

    /// `max_i |a v_i - eps_i v_i|`.
    pub fn residual(&self, a: &ComplexMatrix4) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&self.eigenvectors)
            .map(|(e, v)| (a * v - v * c(*e)).norm())
            .fold(0.0, f64::max)
    }

    /// `max_ij |<v_i|v_j> - delta_ij|`.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let target = if i == j { 1.0 } else { 0.0 };
                let d = inner(&self.eigenvectors[i], &self.eigenvectors[j]) - c(target);
                worst = worst.max(d.norm());
            }
        }
        worst
    }
}

/// Sorted, gauge-fixed eigendecomposition of a density matrix.
pub fn spectral_decompose(rho: &DensityMatrix) -> Result<SpectralDecomposition> {
    let dec = SpectralDecomposition::of_hermitian(rho.matrix());
    let res = dec.residual(rho.matrix());
    if !(res <= RESIDUAL_LIMIT) {
        return Err(Error::Contract(format!(
            "eigen residual {res:e} exceeds {RESIDUAL_LIMIT:e}"
        )));
    }
    Ok(dec)
}

/// Phase angle, coherence amplitudes and eigenvector coefficients of the
/// closed-form eigensystem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigStructureParams {
    /// `atan2(beta, alpha)`; equals `atan(beta/alpha)` whenever `alpha > 0`.
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub mu_plus_eig: f64,
    pub mu_minus_eig: f64,
}

/// Closed-form eigenvalues and eigenvectors evaluated as published, together
/// with the checks that expose their inconsistencies.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormEigensystem {
    pub eigenvalues: [f64; 4],
    pub eigenvectors: [ComplexVector4; 4],
    pub structure: EigStructureParams,
    /// `<V3|V4>` of the printed vectors.
    pub v3_v4_overlap: Complex64,
    pub eigenvalue_sum: f64,
    pub state: AnalyticState,
}

/// Evaluates the published eigenvalue/eigenvector formulas. Audit only; the
/// QFI path always uses [`spectral_decompose`].
pub fn closed_form_eigensystem(p: &SystemParams, t: f64) -> Result<ClosedFormEigensystem> {
    let state = analytic_state(p, t)?;
    let co = &state.coefficients;
    let rho = &state.matrix;
    let e_j = p.e_j1;
    let s2 = std::f64::consts::SQRT_2;
    let decay = (-2.0 * p.gamma * t).exp();
    let (l1, l2, l3) = (co.lambda1, co.lambda2, co.lambda3);

    let alpha = e_j * p.e_m * decay / (4.0 * l3) * ((s2 * l2 * t).cosh() - (s2 * l1 * t).cos());
    let beta = s2 * e_j * decay / (8.0 * l3)
        * (l2 * (s2 * l2 * t).sinh() + l1 * (s2 * l1 * t).sin());
    let amp = alpha.hypot(beta);
    if amp == 0.0 {
        return Err(Error::Domain(format!(
            "alpha = beta = 0 at t = {t}; theta is undefined"
        )));
    }
    let theta = beta.atan2(alpha);

    let (r11, r14, r22, r23) = (rho[(0, 0)].re, rho[(0, 3)].re, rho[(1, 1)].re, rho[(1, 2)].re);
    let r12r21 = (rho[(0, 1)] * rho[(1, 0)]).re;
    let root = ((r11 + r14 + r22 + r23).powi(2) + 16.0 * r12r21).sqrt();
    let base = -r11 - r14 + r22 + r23;
    let mu_plus = (base + root) / (4.0 * amp);
    let mu_minus = (base - root) / (4.0 * amp);

    let eigenvalues = [
        r11 - r14,
        r22 - r23,
        -2.0 * amp * mu_plus,
        -2.0 * amp * mu_minus,
    ];

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let v1 = ComplexVector4::new(c(-h), ZERO, ZERO, c(h));
    let v2 = ComplexVector4::new(ZERO, c(-h), c(h), ZERO);
    let branch = |mu: f64| {
        let norm = 1.0 / (2.0 * (1.0 + mu * mu)).sqrt();
        let mid = Complex64::from_polar(mu, -theta);
        ComplexVector4::new(c(1.0), mid, mid, c(1.0)) * c(norm)
    };
    let v3 = branch(mu_minus);
    let v4 = branch(mu_plus);

    Ok(ClosedFormEigensystem {
        eigenvalues,
        eigenvectors: [v1, v2, v3, v4],
        structure: EigStructureParams {
            theta,
            alpha,
            beta,
            mu_plus_eig: mu_plus,
            mu_minus_eig: mu_minus,
        },
        v3_v4_overlap: inner(&v3, &v4),
        eigenvalue_sum: eigenvalues.iter().sum(),
        state,
    })
}
