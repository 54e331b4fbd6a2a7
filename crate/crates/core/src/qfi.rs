//! Quantum Fisher information and its classical, pure and mixed parts.
//!
//! Derivatives are central differences of the propagated state. For the
//! decomposition, eigenbranches at `eta +- h` are matched to the base branches
//! by maximal overlap and phase-aligned so that `<V_i(eta)|V_i(eta +- h)>` is
//! real and positive, which puts the derivative in the parallel-transport
//! gauge. The symmetric-logarithmic-derivative sum only needs `d rho` and
//! serves as an independent check.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::propagate_expm;
use crate::error::{Error, Result};
use crate::linalg::{c, hermiticity_error, inner, sandwich, ComplexMatrix4, ComplexVector4};
use crate::model::{bell_state_psi_plus, DensityMatrix, SystemParams};
use crate::spectral::{spectral_decompose, SpectralDecomposition, EIGENVALUE_CLAMP};

pub const DEFAULT_FD_STEP: f64 = 1e-4;
pub const MIN_FD_STEP: f64 = 1e-7;
pub const MAX_FD_STEP: f64 = 1e-3;
/// Eigenvalue gap below which two branches are flagged as near-degenerate.
pub const NEAR_DEGENERACY_GAP: f64 = 1e-6;
/// Two candidate overlaps closer than this make branch matching ambiguous.
pub const MATCHING_AMBIGUITY: f64 = 1e-3;
/// Smallest Fisher information still treated as non-zero by the Cramer-Rao bound.
pub const FISHER_FLOOR: f64 = 1e-12;
/// Most negative total Fisher information accepted as round-off.
pub const NEGATIVITY_FLOOR: f64 = 1e-8;

/// The parameter being estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimand {
    /// Dephasing rate.
    Gamma,
    /// Josephson energy; moves both qubits together.
    #[serde(rename = "ej")]
    EJ,
    /// Mutual coupling energy.
    #[serde(rename = "em")]
    Em,
}

impl Estimand {
    pub const ALL: [Estimand; 3] = [Estimand::Gamma, Estimand::EJ, Estimand::Em];

    pub fn value(self, p: &SystemParams) -> f64 {
        match self {
            Estimand::Gamma => p.gamma,
            Estimand::EJ => p.e_j1,
            Estimand::Em => p.e_m,
        }
    }

    /// Copy of `p` with the estimated parameter set to `value`.
    pub fn with_value(self, p: &SystemParams, value: f64) -> SystemParams {
        let mut q = *p;
        match self {
            Estimand::Gamma => q.gamma = value,
            Estimand::EJ => {
                q.e_j1 = value;
                q.e_j2 = value;
            }
            Estimand::Em => q.e_m = value,
        }
        q
    }

    pub fn shifted(self, p: &SystemParams, delta: f64) -> SystemParams {
        let mut q = *p;
        match self {
            Estimand::Gamma => q.gamma += delta,
            Estimand::EJ => {
                q.e_j1 += delta;
                q.e_j2 += delta;
            }
            Estimand::Em => q.e_m += delta,
        }
        q
    }

    pub fn name(self) -> &'static str {
        match self {
            Estimand::Gamma => "gamma",
            Estimand::EJ => "ej",
            Estimand::Em => "em",
        }
    }
}

impl fmt::Display for Estimand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Estimand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gamma" => Ok(Estimand::Gamma),
            "ej" => Ok(Estimand::EJ),
            "em" => Ok(Estimand::Em),
            other => Err(Error::Precondition(format!("unknown estimand '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QfiDiagnostics {
    pub step: f64,
    pub clamped_eigenvalues: usize,
    /// `max_i |<V_i|dV_i>|` over contributing branches; zero in exact
    /// parallel transport.
    pub gauge_residual: f64,
    /// Relative change of the total when the step is halved, if computed.
    pub step_halving_rel_diff: Option<f64>,
}

/// `F = F_C + F_P - F_M` for one estimand at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QfiBreakdown {
    pub f_c: f64,
    pub f_p: f64,
    pub f_m: f64,
    pub f_total: f64,
    /// `1/F`, infinite when `F` is numerically zero. Serialised as `null`
    /// when infinite.
    pub cramer_rao_bound: f64,
    pub diagnostics: QfiDiagnostics,
}

/// Central-difference derivatives of the eigenvalues and eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDerivative {
    pub base: SpectralDecomposition,
    pub d_eigenvalues: [f64; 4],
    pub d_eigenvectors: [ComplexVector4; 4],
    pub step: f64,
    /// Branches whose eigenvalue is above the clamp and therefore enter the
    /// QFI; derivatives of the others are not reliable.
    pub contributing: [bool; 4],
    /// Pairs of base branches with eigenvalue gap below [`NEAR_DEGENERACY_GAP`].
    pub near_degenerate: Vec<(usize, usize)>,
}

fn check_step(h: f64) -> Result<()> {
    if !(MIN_FD_STEP..=MAX_FD_STEP).contains(&h) {
        return Err(Error::Precondition(format!(
            "finite-difference step {h} outside [{MIN_FD_STEP:e}, {MAX_FD_STEP:e}]"
        )));
    }
    Ok(())
}

fn shifted_pair(p: &SystemParams, eta: Estimand, h: f64) -> Result<(SystemParams, SystemParams)> {
    check_step(h)?;
    let minus = eta.shifted(p, -h);
    if minus.gamma < 0.0 {
        return Err(Error::Precondition(format!(
            "gamma - h = {} is negative; choose a smaller step or larger gamma",
            minus.gamma
        )));
    }
    p.validate()?;
    Ok((eta.shifted(p, h), minus))
}

/// State reached from the Bell state after time `t`.
pub fn evolved_state(p: &SystemParams, t: f64) -> Result<DensityMatrix> {
    propagate_expm(&bell_state_psi_plus(), p, t)
}

/// `(rho(eta + h) - rho(eta - h)) / 2h`.
pub fn d_rho(p: &SystemParams, t: f64, eta: Estimand, h: f64) -> Result<ComplexMatrix4> {
    let (plus, minus) = shifted_pair(p, eta, h)?;
    let rp = evolved_state(&plus, t)?;
    let rm = evolved_state(&minus, t)?;
    let d = (rp.matrix() - rm.matrix()) * c(0.5 / h);
    let herm = hermiticity_error(&d);
    let tr = d.trace().norm();
    if herm > 1e-9 || tr > 1e-9 {
        return Err(Error::Contract(format!(
            "d rho not Hermitian/traceless: hermiticity {herm:e}, trace {tr:e}"
        )));
    }
    Ok(d)
}

// For each base branch, the index of the best-overlapping shifted branch and
// the overlap itself.
fn match_branches(
    base: &SpectralDecomposition,
    shifted: &SpectralDecomposition,
    contributing: &[bool; 4],
) -> Result<[(usize, Complex64); 4]> {
    let overlap = |i: usize, j: usize| inner(&base.eigenvectors[i], &shifted.eigenvectors[j]);
    let mut taken = [false; 4];
    let mut out = [(0usize, Complex64::new(0.0, 0.0)); 4];

    // contributing branches first, in descending eigenvalue order
    let order: Vec<usize> = (0..4)
        .filter(|&i| contributing[i])
        .chain((0..4).filter(|&i| !contributing[i]))
        .collect();
    for i in order {
        let mut ranked: Vec<(f64, usize)> = (0..4)
            .filter(|&j| !taken[j])
            .map(|j| (overlap(i, j).norm(), j))
            .collect();
        ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let (best, j) = ranked[0];
        if contributing[i] {
            if let Some(&(second, _)) = ranked.get(1) {
                if best - second < MATCHING_AMBIGUITY {
                    return Err(Error::DegenerateDerivative(format!(
                        "branch {i}: overlaps {best:.6} and {second:.6} are indistinguishable"
                    )));
                }
            }
        }
        taken[j] = true;
        out[i] = (j, overlap(i, j));
    }
    Ok(out)
}

fn aligned(v: &ComplexVector4, overlap: Complex64) -> ComplexVector4 {
    let n = overlap.norm();
    if n == 0.0 {
        *v
    } else {
        v * (overlap.conj() / n)
    }
}

impl SpectralDerivative {
    /// Builds the derivative from decompositions at `eta`, `eta + h` and
    /// `eta - h`. Any phase convention on `base` is allowed: the shifted
    /// vectors are re-aligned to it.
    pub fn from_decompositions(
        base: SpectralDecomposition,
        plus: &SpectralDecomposition,
        minus: &SpectralDecomposition,
        h: f64,
    ) -> Result<Self> {
        let (vals, _) = base.clamped_eigenvalues();
        let contributing = vals.map(|e| e > 0.0);
        let mut near_degenerate = Vec::new();
        for i in 0..4 {
            for j in i + 1..4 {
                if (base.eigenvalues[i] - base.eigenvalues[j]).abs() < NEAR_DEGENERACY_GAP {
                    near_degenerate.push((i, j));
                }
            }
        }

        let mp = match_branches(&base, plus, &contributing)?;
        let mm = match_branches(&base, minus, &contributing)?;
        let mut d_eigenvalues = [0.0; 4];
        let mut d_eigenvectors = [ComplexVector4::zeros(); 4];
        for i in 0..4 {
            let (jp, op) = mp[i];
            let (jm, om) = mm[i];
            d_eigenvalues[i] = (plus.eigenvalues[jp] - minus.eigenvalues[jm]) / (2.0 * h);
            let vp = aligned(&plus.eigenvectors[jp], op);
            let vm = aligned(&minus.eigenvectors[jm], om);
            d_eigenvectors[i] = (vp - vm) * c(0.5 / h);
        }
        Ok(Self {
            base,
            d_eigenvalues,
            d_eigenvectors,
            step: h,
            contributing,
            near_degenerate,
        })
    }

    pub fn gauge_residual(&self) -> f64 {
        (0..4)
            .filter(|&i| self.contributing[i])
            .map(|i| inner(&self.base.eigenvectors[i], &self.d_eigenvectors[i]).norm())
            .fold(0.0, f64::max)
    }
}

pub fn spectral_derivative(
    p: &SystemParams,
    t: f64,
    eta: Estimand,
    h: f64,
) -> Result<SpectralDerivative> {
    let (pp, pm) = shifted_pair(p, eta, h)?;
    let base = spectral_decompose(&evolved_state(p, t)?)?;
    let plus = spectral_decompose(&evolved_state(&pp, t)?)?;
    let minus = spectral_decompose(&evolved_state(&pm, t)?)?;
    SpectralDerivative::from_decompositions(base, &plus, &minus, h)
}

impl QfiBreakdown {
    /// Evaluates the three parts from a spectral derivative.
    pub fn from_spectral_derivative(sd: &SpectralDerivative) -> Result<Self> {
        let (eps, clamped) = sd.base.clamped_eigenvalues();
        let v = &sd.base.eigenvectors;
        let dv = &sd.d_eigenvectors;
        let live: Vec<usize> = (0..4).filter(|&i| sd.contributing[i]).collect();

        let f_c = live.iter().map(|&i| sd.d_eigenvalues[i].powi(2) / eps[i]).sum::<f64>();
        let f_p = 4.0
            * live
                .iter()
                .map(|&i| eps[i] * (dv[i].norm_squared() - inner(&v[i], &dv[i]).norm_sqr()))
                .sum::<f64>();
        let mut f_m = 0.0;
        for &i in &live {
            for &j in &live {
                if i != j {
                    let w = eps[i] * eps[j] / (eps[i] + eps[j]);
                    f_m += w * inner(&v[i], &dv[j]).norm_sqr();
                }
            }
        }
        f_m *= 8.0;
        let f_total = f_c + f_p - f_m;
        if f_total < -NEGATIVITY_FLOOR {
            return Err(Error::Contract(format!("negative Fisher information {f_total:e}")));
        }
        Ok(Self {
            f_c,
            f_p,
            f_m,
            f_total,
            cramer_rao_bound: cramer_rao(f_total)?,
            diagnostics: QfiDiagnostics {
                step: sd.step,
                clamped_eigenvalues: clamped,
                gauge_residual: sd.gauge_residual(),
                step_halving_rel_diff: None,
            },
        })
    }
}

/// Classical, pure and mixed Fisher information for `eta` at time `t`.
pub fn qfi_components(p: &SystemParams, t: f64, eta: Estimand, h: f64) -> Result<QfiBreakdown> {
    QfiBreakdown::from_spectral_derivative(&spectral_derivative(p, t, eta, h)?)
}

/// [`qfi_components`] plus the relative change of the total when the step is
/// halved (skipped when `h/2` would fall below the minimum step).
pub fn qfi_components_checked(
    p: &SystemParams,
    t: f64,
    eta: Estimand,
    h: f64,
) -> Result<QfiBreakdown> {
    let mut out = qfi_components(p, t, eta, h)?;
    if h / 2.0 >= MIN_FD_STEP {
        let half = qfi_components(p, t, eta, h / 2.0)?;
        let scale = out.f_total.abs().max(1e-6);
        out.diagnostics.step_halving_rel_diff = Some((out.f_total - half.f_total).abs() / scale);
    }
    Ok(out)
}

/// `sum_{ij, eps_i + eps_j > 0} 2 |<V_i| d rho |V_j>|^2 / (eps_i + eps_j)`.
pub fn sld_from(dec: &SpectralDecomposition, drho: &ComplexMatrix4) -> f64 {
    let (eps, _) = dec.clamped_eigenvalues();
    let v = &dec.eigenvectors;
    let mut f = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let s = eps[i] + eps[j];
            if s > EIGENVALUE_CLAMP {
                f += 2.0 * sandwich(&v[i], drho, &v[j]).norm_sqr() / s;
            }
        }
    }
    f
}

/// Fisher information from the symmetric logarithmic derivative; depends on
/// the eigenvectors only through `d rho`, so it is gauge-free.
pub fn qfi_sld(p: &SystemParams, t: f64, eta: Estimand, h: f64) -> Result<f64> {
    let dec = spectral_decompose(&evolved_state(p, t)?)?;
    let drho = d_rho(p, t, eta, h)?;
    Ok(sld_from(&dec, &drho))
}

/// Cramer-Rao bound `1/F` on the variance of an unbiased estimator.
pub fn cramer_rao(f: f64) -> Result<f64> {
    if f.is_nan() || f < -NEGATIVITY_FLOOR {
        return Err(Error::Contract(format!("Fisher information {f:e} is negative")));
    }
    Ok(if f > FISHER_FLOOR { 1.0 / f } else { f64::INFINITY })
}
