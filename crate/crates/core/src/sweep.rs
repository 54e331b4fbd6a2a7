//! Time and parameter sweeps, figure datasets, and their CSV/JSON encodings.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::qfi::{qfi_components, qfi_sld, Estimand, QfiBreakdown, DEFAULT_FD_STEP, MAX_FD_STEP, MIN_FD_STEP};

pub const ENGINE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));
pub const SWEEP_CSV_HEADER: &str = "axis,f_total,f_c,f_p,f_m,crb";
/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "QFI_DEPHASE_THREADS";

/// Quantity varied along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Time,
    Gamma,
    Ej,
    Em,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "time" | "t" => Ok(SweepAxis::Time),
            "gamma" => Ok(SweepAxis::Gamma),
            "ej" => Ok(SweepAxis::Ej),
            "em" => Ok(SweepAxis::Em),
            other => Err(Error::Precondition(format!("unknown sweep axis '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Precondition(format!("unknown output format '{other}'"))),
        }
    }
}

/// Worker count from [`THREADS_ENV`], falling back to the available cores.
pub fn default_parallelism() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    #[serde(flatten)]
    pub params: SystemParams,
    /// Evaluation time for parameter-axis sweeps; ignored for time sweeps.
    pub t: f64,
    pub estimand: Estimand,
    pub axis: SweepAxis,
    pub axis_start: f64,
    pub axis_end: f64,
    pub points: usize,
    pub fd_step: f64,
    pub output_format: OutputFormat,
    pub parallelism: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            params: SystemParams::degenerate(0.4, 0.1, 0.1),
            t: 1.0,
            estimand: Estimand::Gamma,
            axis: SweepAxis::Time,
            axis_start: 0.0,
            axis_end: 10.0,
            points: 201,
            fd_step: DEFAULT_FD_STEP,
            output_format: OutputFormat::Csv,
            parallelism: 1,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.axis_start < self.axis_end) {
            return Err(Error::Precondition(format!(
                "axis_start ({}) must be below axis_end ({})",
                self.axis_start, self.axis_end
            )));
        }
        if self.points < 2 {
            return Err(Error::Precondition("a sweep needs at least 2 points".into()));
        }
        if !(MIN_FD_STEP..=MAX_FD_STEP).contains(&self.fd_step) {
            return Err(Error::Precondition(format!(
                "fd_step {} outside [{MIN_FD_STEP:e}, {MAX_FD_STEP:e}]",
                self.fd_step
            )));
        }
        if self.parallelism == 0 {
            return Err(Error::Precondition("parallelism must be positive".into()));
        }
        if self.axis == SweepAxis::Time && self.axis_start < 0.0 {
            return Err(Error::Precondition("time axis cannot start below 0".into()));
        }
        Ok(())
    }

    /// Evenly spaced axis values; the last one is exactly `axis_end`.
    pub fn axis_values(&self) -> Vec<f64> {
        let n = self.points;
        let span = self.axis_end - self.axis_start;
        (0..n)
            .map(|k| {
                if k + 1 == n {
                    self.axis_end
                } else {
                    self.axis_start + span * k as f64 / (n - 1) as f64
                }
            })
            .collect()
    }

    /// Parameters and time at one axis value.
    pub fn point(&self, x: f64) -> (SystemParams, f64) {
        let mut p = self.params;
        match self.axis {
            SweepAxis::Time => return (p, x),
            SweepAxis::Gamma => p.gamma = x,
            SweepAxis::Ej => {
                p.e_j1 = x;
                p.e_j2 = x;
            }
            SweepAxis::Em => p.e_m = x,
        }
        (p, self.t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis: f64,
    pub qfi: Option<QfiBreakdown>,
    /// Independent SLD value at the same point.
    pub sld: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub engine_version: String,
    /// Worst `|F - F_sld| / max(F_sld, 1e-6)` over successful rows.
    pub oracle_worst_rel_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    pub provenance: Provenance,
}

fn evaluate(cfg: &SweepConfig, x: f64) -> SweepRow {
    let (p, t) = cfg.point(x);
    let outcome = qfi_components(&p, t, cfg.estimand, cfg.fd_step)
        .and_then(|q| Ok((q, qfi_sld(&p, t, cfg.estimand, cfg.fd_step)?)));
    match outcome {
        Ok((q, sld)) => SweepRow {
            axis: x,
            qfi: Some(q),
            sld: Some(sld),
            error: None,
        },
        Err(e) => SweepRow {
            axis: x,
            qfi: None,
            sld: None,
            error: Some(e.to_string()),
        },
    }
}

/// Evaluates the breakdown at every axis point. Point failures are recorded in
/// their row; only an invalid configuration fails the whole sweep.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let xs = cfg.axis_values();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| Error::Precondition(format!("cannot start worker pool: {e}")))?;
    let rows: Vec<SweepRow> = pool.install(|| xs.par_iter().map(|&x| evaluate(cfg, x)).collect());

    let worst = rows
        .iter()
        .filter_map(|r| Some((r.qfi?.f_total, r.sld?)))
        .map(|(f, s)| (f - s).abs() / s.max(1e-6))
        .fold(0.0, f64::max);
    Ok(SweepResult {
        config: cfg.clone(),
        rows,
        provenance: Provenance {
            engine_version: ENGINE_VERSION.to_string(),
            oracle_worst_rel_deviation: worst,
        },
    })
}

/// 17 significant digits, lowercase scientific notation.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SWEEP_CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let cols = match &row.qfi {
                Some(q) => [q.f_total, q.f_c, q.f_p, q.f_m, q.cramer_rao_bound].map(fmt_f64),
                None => std::array::from_fn(|_| "nan".to_string()),
            };
            let _ = writeln!(out, "{},{}", fmt_f64(row.axis), cols.join(","));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("sweep result serialises");
        s.push('\n');
        s
    }

    pub fn render(&self) -> String {
        match self.config.output_format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Json => self.to_json(),
        }
    }

    /// `(axis, f_total)` pairs of the successful rows.
    pub fn totals(&self) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| r.qfi.map(|q| (r.axis, q.f_total)))
            .collect()
    }

    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

/// Panels of the six published figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig1a,
    Fig1b,
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
    Fig4a,
    Fig4b,
    Fig5a,
    Fig5b,
    Fig6a,
    Fig6b,
}

impl FigureId {
    pub const ALL: [FigureId; 12] = [
        FigureId::Fig1a,
        FigureId::Fig1b,
        FigureId::Fig2a,
        FigureId::Fig2b,
        FigureId::Fig3a,
        FigureId::Fig3b,
        FigureId::Fig4a,
        FigureId::Fig4b,
        FigureId::Fig5a,
        FigureId::Fig5b,
        FigureId::Fig6a,
        FigureId::Fig6b,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig1a => "fig1a",
            FigureId::Fig1b => "fig1b",
            FigureId::Fig2a => "fig2a",
            FigureId::Fig2b => "fig2b",
            FigureId::Fig3a => "fig3a",
            FigureId::Fig3b => "fig3b",
            FigureId::Fig4a => "fig4a",
            FigureId::Fig4b => "fig4b",
            FigureId::Fig5a => "fig5a",
            FigureId::Fig5b => "fig5b",
            FigureId::Fig6a => "fig6a",
            FigureId::Fig6b => "fig6b",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        FigureId::ALL
            .into_iter()
            .find(|id| id.name() == lower)
            .ok_or_else(|| Error::Precondition(format!("unknown figure '{s}'")))
    }
}

/// One curve of a figure panel.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    /// File-name friendly label, e.g. `e0.05` or `gamma0.3`.
    pub label: String,
    pub params: SystemParams,
}

pub const FIGURE_T_END: f64 = 10.0;
/// Start of the time grid for component panels, where `t = 0` is singular
/// for the `1/eps` terms.
pub const COMPONENT_T_START: f64 = 1e-6;

/// Caption parameters of a figure panel.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureSpec {
    pub id: FigureId,
    pub estimand: Estimand,
    pub curves: Vec<Curve>,
    pub t_start: f64,
    pub t_end: f64,
}

impl FigureSpec {
    pub fn new(id: FigureId) -> Self {
        use FigureId::*;
        let estimand = match id {
            Fig1a | Fig1b | Fig2a | Fig2b => Estimand::Gamma,
            Fig3a | Fig3b | Fig4a | Fig4b => Estimand::EJ,
            Fig5a | Fig5b | Fig6a | Fig6b => Estimand::Em,
        };
        let energy_curves = |gamma: f64, energies: &[f64]| -> Vec<Curve> {
            energies
                .iter()
                .map(|&e| Curve {
                    label: format!("e{e}"),
                    params: SystemParams::degenerate(gamma, e, e),
                })
                .collect()
        };
        let (curves, t_start) = match id {
            Fig1a | Fig3a | Fig5a => (energy_curves(0.4, &[0.05, 0.1, 0.2]), 0.0),
            Fig1b | Fig3b | Fig5b => (
                [0.3, 0.4, 0.5]
                    .iter()
                    .map(|&g| Curve {
                        label: format!("gamma{g}"),
                        params: SystemParams::degenerate(g, 0.1, 0.1),
                    })
                    .collect(),
                0.0,
            ),
            Fig2a | Fig4a | Fig6a => (energy_curves(0.4, &[0.1]), COMPONENT_T_START),
            Fig2b | Fig4b | Fig6b => (energy_curves(0.4, &[0.2]), COMPONENT_T_START),
        };
        Self {
            id,
            estimand,
            curves,
            t_start,
            t_end: FIGURE_T_END,
        }
    }

    pub fn sweep_config(&self, curve: &Curve, points: usize, fd_step: f64, parallelism: usize) -> SweepConfig {
        SweepConfig {
            params: curve.params,
            t: 0.0,
            estimand: self.estimand,
            axis: SweepAxis::Time,
            axis_start: self.t_start,
            axis_end: self.t_end,
            points,
            fd_step,
            output_format: OutputFormat::Csv,
            parallelism,
        }
    }
}

/// One time sweep per curve of the panel, labelled like the curve.
pub fn figure_dataset(
    id: FigureId,
    points: usize,
    fd_step: f64,
    parallelism: usize,
) -> Result<Vec<(String, SweepResult)>> {
    let spec = FigureSpec::new(id);
    spec.curves
        .iter()
        .map(|curve| {
            let cfg = spec.sweep_config(curve, points, fd_step, parallelism);
            Ok((curve.label.clone(), run_sweep(&cfg)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_values_are_even_and_end_exactly() {
        let cfg = SweepConfig {
            axis_start: 0.0,
            axis_end: 10.0,
            points: 201,
            ..SweepConfig::default()
        };
        let xs = cfg.axis_values();
        assert_eq!(xs.len(), 201);
        assert_eq!(xs[0], 0.0);
        assert_eq!(xs[200], 10.0);
        assert!((xs[1] - 0.05).abs() < 1e-15);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base = SweepConfig::default();
        for cfg in [
            SweepConfig { axis_start: 1.0, axis_end: 1.0, ..base.clone() },
            SweepConfig { points: 1, ..base.clone() },
            SweepConfig { fd_step: 0.1, ..base.clone() },
            SweepConfig { parallelism: 0, ..base.clone() },
            SweepConfig { axis_start: -1.0, ..base.clone() },
        ] {
            assert!(matches!(run_sweep(&cfg), Err(Error::Precondition(_))));
        }
    }

    #[test]
    fn first_row_of_time_sweep_carries_no_information() {
        let cfg = SweepConfig {
            points: 2,
            axis_end: 1.0,
            ..SweepConfig::default()
        };
        let res = run_sweep(&cfg).unwrap();
        assert_eq!(res.rows.len(), 2);
        assert!(res.rows[0].qfi.unwrap().f_total.abs() <= 1e-6);
        assert!(res.rows[1].qfi.unwrap().f_total > 0.0);
    }

    #[test]
    fn failing_points_are_marked_not_fatal() {
        // gamma axis starting at 0 cannot take a central difference in gamma
        let cfg = SweepConfig {
            axis: SweepAxis::Gamma,
            axis_start: 0.0,
            axis_end: 0.5,
            points: 3,
            ..SweepConfig::default()
        };
        let res = run_sweep(&cfg).unwrap();
        assert_eq!(res.failed_rows(), 1);
        assert!(res.rows[0].error.as_deref().unwrap().contains("gamma - h"));
        assert!(res.to_csv().lines().nth(1).unwrap().ends_with("nan,nan,nan,nan,nan"));
        assert!(res.rows[2].qfi.is_some());
    }

    #[test]
    fn parameter_axis_sets_both_josephson_energies() {
        let cfg = SweepConfig {
            axis: SweepAxis::Ej,
            ..SweepConfig::default()
        };
        let (p, t) = cfg.point(0.3);
        assert_eq!((p.e_j1, p.e_j2, t), (0.3, 0.3, cfg.t));
    }

    #[test]
    fn csv_layout_and_number_format() {
        let cfg = SweepConfig {
            points: 3,
            axis_end: 1.0,
            ..SweepConfig::default()
        };
        let csv = run_sweep(&cfg).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], SWEEP_CSV_HEADER);
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("5.0000000000000000e-1,"));
        assert!(lines[1].ends_with(",inf"));
        assert!(!csv.contains('\r'));
        assert_eq!(fmt_f64(1.0 / 3.0), "3.3333333333333331e-1");
    }

    #[test]
    fn parallelism_does_not_change_output() {
        let mk = |n| SweepConfig {
            points: 17,
            axis_end: 3.0,
            parallelism: n,
            ..SweepConfig::default()
        };
        let a = run_sweep(&mk(1)).unwrap();
        let b = run_sweep(&mk(8)).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn config_json_is_flat() {
        let json = serde_json::to_value(SweepConfig::default()).unwrap();
        assert_eq!(json["gamma"], 0.4);
        assert_eq!(json["estimand"], "gamma");
        assert_eq!(json["axis"], "time");
        let back: SweepConfig = serde_json::from_value(json).unwrap();
        assert_eq!(back, SweepConfig::default());
    }

    #[test]
    fn figure_specs_follow_captions() {
        let f1a = FigureSpec::new(FigureId::Fig1a);
        assert_eq!(f1a.estimand, Estimand::Gamma);
        let es: Vec<f64> = f1a.curves.iter().map(|c| c.params.e_m).collect();
        assert_eq!(es, vec![0.05, 0.1, 0.2]);
        assert!(f1a.curves.iter().all(|c| c.params.gamma == 0.4 && c.params.e_j1 == c.params.e_m));

        let f3b = FigureSpec::new(FigureId::Fig3b);
        assert_eq!(f3b.estimand, Estimand::EJ);
        let gs: Vec<f64> = f3b.curves.iter().map(|c| c.params.gamma).collect();
        assert_eq!(gs, vec![0.3, 0.4, 0.5]);

        let f6b = FigureSpec::new(FigureId::Fig6b);
        assert_eq!(f6b.estimand, Estimand::Em);
        assert_eq!(f6b.curves.len(), 1);
        assert_eq!(f6b.curves[0].params.e_j1, 0.2);
        assert_eq!(f6b.t_start, COMPONENT_T_START);

        assert_eq!("FIG2A".parse::<FigureId>().unwrap(), FigureId::Fig2a);
        assert!("fig7a".parse::<FigureId>().is_err());
    }
}
