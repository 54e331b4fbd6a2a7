//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 numerical-contract failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::dynamics::{audit_analytic, audit_grid, propagate_expm, AuditLedger, AuditReport};
use crate::error::Error;
use crate::model::{bell_state_psi_plus, SystemParams};
use crate::qfi::{qfi_components_checked, qfi_sld, Estimand, QfiBreakdown, DEFAULT_FD_STEP};
use crate::sweep::{
    default_parallelism, figure_dataset, fmt_f64, run_sweep, FigureId, OutputFormat, SweepAxis,
    SweepConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

/// Dephasing rates and energies of the acceptance audit grid.
pub const AUDIT_GRID_GAMMAS: [f64; 3] = [0.3, 0.4, 0.5];
pub const AUDIT_GRID_ENERGIES: [f64; 3] = [0.05, 0.1, 0.2];
pub const AUDIT_GRID_TIMES: [f64; 5] = [0.5, 1.0, 2.0, 5.0, 10.0];

#[derive(Debug, Parser)]
#[command(name = "qfi-dephase", version, about = "Fisher information of two dephased charge qubits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the density-matrix trajectory from the Bell state as CSV.
    Evolve(EvolveArgs),
    /// Fisher information and its parts at a single instant, as JSON.
    Qfi(QfiArgs),
    /// Sweep time or a parameter and tabulate the Fisher information.
    Sweep(SweepArgs),
    /// Regenerate the datasets behind a figure panel.
    Figure(FigureArgs),
    /// Compare the closed-form solution with the numerical propagator.
    Audit(AuditArgs),
}

#[derive(Debug, Args, Default)]
struct ParamArgs {
    /// Dephasing rate.
    #[arg(long)]
    gamma: Option<f64>,
    /// Josephson energy of both qubits.
    #[arg(long)]
    ej: Option<f64>,
    /// Mutual coupling energy.
    #[arg(long)]
    em: Option<f64>,
    /// Shorthand for --ej E --em E.
    #[arg(long)]
    e: Option<f64>,
    #[arg(long)]
    ec1: Option<f64>,
    #[arg(long)]
    ec2: Option<f64>,
    #[arg(long)]
    ng1: Option<f64>,
    #[arg(long)]
    ng2: Option<f64>,
}

impl ParamArgs {
    fn apply(&self, mut p: SystemParams) -> SystemParams {
        if let Some(e) = self.e {
            p.e_j1 = e;
            p.e_j2 = e;
            p.e_m = e;
        }
        if let Some(ej) = self.ej {
            p.e_j1 = ej;
            p.e_j2 = ej;
        }
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut p.e_m, self.em);
        set(&mut p.gamma, self.gamma);
        set(&mut p.e_c1, self.ec1);
        set(&mut p.e_c2, self.ec2);
        set(&mut p.n_g1, self.ng1);
        set(&mut p.n_g2, self.ng2);
        p
    }
}

fn default_params() -> SystemParams {
    SystemParams::degenerate(0.4, 0.1, 0.1)
}

#[derive(Debug, Args)]
struct EvolveArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 10.0)]
    t_max: f64,
    #[arg(long, default_value_t = 101)]
    points: usize,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct QfiArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value = "gamma")]
    param: Estimand,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = DEFAULT_FD_STEP)]
    fd_step: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Flat JSON file with SweepConfig fields; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long)]
    param: Option<Estimand>,
    #[arg(long)]
    axis: Option<SweepAxis>,
    #[arg(long)]
    axis_start: Option<f64>,
    #[arg(long)]
    axis_end: Option<f64>,
    /// End of a time axis (same as --axis-end).
    #[arg(long)]
    t_max: Option<f64>,
    /// Evaluation time for parameter axes.
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    fd_step: Option<f64>,
    #[arg(long)]
    format: Option<OutputFormat>,
    #[arg(long)]
    parallelism: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FigureArgs {
    id: FigureId,
    #[arg(long, default_value_t = 200)]
    points: usize,
    /// Output directory; created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_FD_STEP)]
    fd_step: f64,
    #[arg(long)]
    parallelism: Option<usize>,
}

#[derive(Debug, Args)]
struct AuditArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 10.0)]
    t_max: f64,
    /// Number of evenly spaced times in [0, t_max].
    #[arg(long, default_value_t = 21)]
    points: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Audit the full gamma x E x t acceptance grid instead of one parameter set.
    #[arg(long)]
    acceptance_grid: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Precondition(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn emit(out: &mut dyn Write, path: Option<&Path>, content: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, content)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => out
            .write_all(content.as_bytes())
            .map_err(|e| Failure::Usage(format!("cannot write output: {e}"))),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialises");
    s.push('\n');
    s
}

fn linspace(start: f64, end: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| {
            if k + 1 == points {
                end
            } else {
                start + (end - start) * k as f64 / (points - 1) as f64
            }
        })
        .collect()
}

fn evolve(args: EvolveArgs, out: &mut dyn Write) -> CliResult<()> {
    let p = args.params.apply(default_params());
    p.validate()?;
    if args.points < 2 || !(args.t_max > 0.0) {
        return Err(Failure::Usage("evolve needs --points >= 2 and --t-max > 0".into()));
    }
    let mut csv = String::from("t");
    for i in 1..=4 {
        for j in 1..=4 {
            let _ = write!(csv, ",rho_re_{i}{j},rho_im_{i}{j}");
        }
    }
    csv.push('\n');
    let rho0 = bell_state_psi_plus();
    for t in linspace(0.0, args.t_max, args.points) {
        let rho = propagate_expm(&rho0, &p, t)?;
        csv.push_str(&fmt_f64(t));
        for i in 0..4 {
            for j in 0..4 {
                let z = rho.matrix()[(i, j)];
                let _ = write!(csv, ",{},{}", fmt_f64(z.re), fmt_f64(z.im));
            }
        }
        csv.push('\n');
    }
    emit(out, args.out.as_deref(), &csv)
}

#[derive(Serialize)]
struct QfiReport {
    params: SystemParams,
    t: f64,
    estimand: Estimand,
    #[serde(flatten)]
    breakdown: QfiBreakdown,
    sld: f64,
}

fn qfi(args: QfiArgs, out: &mut dyn Write) -> CliResult<()> {
    let p = args.params.apply(default_params());
    let breakdown = qfi_components_checked(&p, args.t, args.param, args.fd_step)?;
    let sld = qfi_sld(&p, args.t, args.param, args.fd_step)?;
    let report = QfiReport {
        params: p,
        t: args.t,
        estimand: args.param,
        breakdown,
        sld,
    };
    emit(out, args.out.as_deref(), &to_json(&report))
}

fn load_config(path: &Path) -> CliResult<SweepConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let file: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let serde_json::Value::Object(fields) = file else {
        return Err(Failure::Usage(format!("{}: expected a JSON object", path.display())));
    };
    let mut merged = serde_json::to_value(SweepConfig::default()).expect("default config serialises");
    let slots = merged.as_object_mut().expect("config is an object");
    for (k, v) in fields {
        if !slots.contains_key(&k) {
            return Err(Failure::Usage(format!("{}: unknown field '{k}'", path.display())));
        }
        slots.insert(k, v);
    }
    serde_json::from_value(merged).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn sweep(args: SweepArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut cfg = match &args.config {
        Some(path) => load_config(path)?,
        None => SweepConfig {
            parallelism: default_parallelism(),
            ..SweepConfig::default()
        },
    };
    cfg.params = args.params.apply(cfg.params);
    if let Some(v) = args.param {
        cfg.estimand = v;
    }
    if let Some(v) = args.axis {
        cfg.axis = v;
    }
    if let Some(v) = args.axis_start {
        cfg.axis_start = v;
    }
    if let Some(v) = args.t_max.or(args.axis_end) {
        cfg.axis_end = v;
    }
    if let Some(v) = args.t {
        cfg.t = v;
    }
    if let Some(v) = args.points {
        cfg.points = v;
    }
    if let Some(v) = args.fd_step {
        cfg.fd_step = v;
    }
    if let Some(v) = args.format {
        cfg.output_format = v;
    }
    if let Some(v) = args.parallelism {
        cfg.parallelism = v;
    }
    let result = run_sweep(&cfg)?;
    emit(out, args.out.as_deref(), &result.render())
}

fn figure(args: FigureArgs, out: &mut dyn Write) -> CliResult<()> {
    let parallelism = args.parallelism.unwrap_or_else(default_parallelism);
    let curves = figure_dataset(args.id, args.points, args.fd_step, parallelism)?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", args.out.display())))?;
    let mut listing = String::new();
    for (label, result) in curves {
        let path = args.out.join(format!("{}_{label}.csv", args.id));
        emit(out, Some(&path), &result.to_csv())?;
        let _ = writeln!(listing, "{}", path.display());
    }
    emit(out, None, &listing)
}

#[derive(Serialize)]
#[serde(untagged)]
enum AuditOutput {
    Single(AuditReport),
    Grid(AuditLedger),
}

fn audit(args: AuditArgs, out: &mut dyn Write) -> CliResult<()> {
    let report = if args.acceptance_grid {
        AuditOutput::Grid(audit_grid(
            &AUDIT_GRID_GAMMAS,
            &AUDIT_GRID_ENERGIES,
            &AUDIT_GRID_TIMES,
            args.tol,
        )?)
    } else {
        if args.points < 2 || !(args.t_max > 0.0) {
            return Err(Failure::Usage("audit needs --points >= 2 and --t-max > 0".into()));
        }
        let p = args.params.apply(default_params());
        AuditOutput::Single(audit_analytic(&p, &linspace(0.0, args.t_max, args.points), args.tol)?)
    };
    emit(out, args.out.as_deref(), &to_json(&report))
}

/// Runs the CLI against explicit output streams and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Evolve(a) => evolve(a, out),
        Command::Qfi(a) => qfi(a, out),
        Command::Sweep(a) => sweep(a, out),
        Command::Figure(a) => figure(a, out),
        Command::Audit(a) => audit(a, out),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Numerical(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_NUMERICAL
        }
    }
}

pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(argv, &mut stdout.lock(), &mut stderr.lock())
}
