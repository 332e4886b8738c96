use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use nalgebra::Vector3;

use rmglab::acceptance::{self, CheckOptions};
use rmglab::config::{ConfigError, Hyp2Config, Hyp2Flow, Rat1Config, RatnConfig, RunConfig, Tolerances};
use rmglab::io::CsvTable;
use rmglab::numerics::{linspace, QuadratureSpec};
use rmglab::rat1::asymptotics::{convergence_table, fit_leading_coefficients, lemma_bound_scan, log_grid, CoefficientTable};
use rmglab::rat1::{energy_and_momenta, LumpState, LumpStateDoc, Rat1Metric};
use rmglab::ratn::{PotentialMode, RatnEqGeometry, PROFILE_HEADER};
use rmglab::runs::{run_hyp2, run_rat1, run_ratn, RunError, RunOutput};

const EXIT_ACCEPTANCE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "rmg", version, about = "Ricci magnetic geodesic flow on soliton moduli spaces")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Vortex pair on the hyperbolic plane, reduced to (s, ψ).
    Hyp2(Hyp2Args),
    /// Single CP¹ lump.
    Rat1 {
        #[command(subcommand)]
        cmd: Rat1Cmd,
    },
    /// Equivariant n-lumps on the cylinder.
    Ratn {
        #[command(subcommand)]
        cmd: RatnCmd,
    },
    /// Run the acceptance suite.
    Check(CheckArgs),
}

#[derive(Args, Default)]
struct TolArgs {
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    #[arg(long)]
    max_step: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
}

impl TolArgs {
    fn tolerances(&self) -> Tolerances {
        Tolerances {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_step: self.max_step,
            max_steps: self.max_steps,
        }
    }
}

#[derive(Args)]
struct Hyp2Args {
    /// JSON config with kind "hyp2"; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    flow: Option<Hyp2Flow>,
    #[arg(long)]
    s0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    psi0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    sdot0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    psidot0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    charge: Option<f64>,
    #[arg(long)]
    tmax: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Append Poincaré-disk positions of both vortices.
    #[arg(long)]
    disk: bool,
    #[command(flatten)]
    tol: TolArgs,
    /// Output CSV; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Rat1Cmd {
    /// Integrate the full flow from an initial state.
    Evolve {
        /// Either a config with kind "rat1" or a bare state document.
        #[arg(long)]
        init: PathBuf,
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Print (E, P, Q); without --init, a lump at rest at λ = (0, 0, 1).
    Charges {
        #[arg(long)]
        init: Option<PathBuf>,
    },
    /// Large-λ coefficient table with fitted values and residuals.
    Asymptotics {
        #[arg(long)]
        json: bool,
    },
    /// Grid lower bound of the reduced potential at ‖Q‖ = 2.
    LemmaScan {
        #[arg(long, default_value_t = 1e2)]
        lambda_min: f64,
        #[arg(long, default_value_t = 1e12)]
        lambda_max: f64,
        #[arg(long, default_value_t = 201)]
        count: usize,
        #[arg(long, default_value_t = 721)]
        thetas: usize,
        #[arg(long)]
        json: bool,
    },
    /// Radial length out to increasing λ.
    Length {
        #[arg(long, value_delimiter = ',', default_values_t = vec![1e1, 1e2, 1e3, 1e6, 1e9, 1e12])]
        lambda: Vec<f64>,
    },
}

#[derive(Args)]
struct ChiRange {
    #[arg(long, default_value_t = 1e-3)]
    chi_min: f64,
    #[arg(long, default_value_t = 1e3)]
    chi_max: f64,
    /// Log-spaced points.
    #[arg(long, default_value_t = 121)]
    count: usize,
}

#[derive(Subcommand)]
enum RatnCmd {
    /// Metric and connection profile as CSV.
    Profile {
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long = "P", allow_hyphen_values = true, default_value_t = 0.0)]
        p: f64,
        #[command(flatten)]
        range: ChiRange,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// JSON report of the χ → 0 limits (n = 2).
    Limits {
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Effective potential V_P(χ) as CSV.
    Potential {
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long = "P", allow_hyphen_values = true, default_value_t = 0.0)]
        p: f64,
        #[arg(long, default_value = "extrinsic")]
        mode: PotentialMode,
        #[command(flatten)]
        range: ChiRange,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Reduced flow, by default launched inward from χ₀.
    Evolve {
        /// JSON config with kind "ratn"; flags override its values.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long = "P", allow_hyphen_values = true)]
        p: Option<f64>,
        #[arg(long)]
        mode: Option<PotentialMode>,
        #[arg(long)]
        chi0: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        chi_dot0: Option<f64>,
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    json: bool,
    /// Print every check, not only those of failing criteria.
    #[arg(long, short)]
    verbose: bool,
    /// Run only these criteria.
    #[arg(long, value_delimiter = ',')]
    only: Vec<u8>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, hide = true)]
    tamper_a: bool,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Numerical(String),
    #[error("acceptance failure: criteria {0:?}")]
    Acceptance(Vec<u8>),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<RunError> for CliError {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Config(c) => CliError::Config(c),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => EXIT_USAGE,
            CliError::Acceptance(_) => EXIT_ACCEPTANCE,
            CliError::Numerical(_) | CliError::Io(_) => EXIT_NUMERICAL,
        }
    }
}

fn emit(line: &str) -> Result<(), CliError> {
    writeln!(std::io::stdout().lock(), "{line}")?;
    Ok(())
}

fn numerical(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

fn load_config(path: Option<&Path>) -> Result<Option<RunConfig>, CliError> {
    path.map(RunConfig::load).transpose().map_err(CliError::from)
}

fn required<T>(v: Option<T>, name: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("--{name} is required (or supply --config)")))
}

fn write_run(out: &RunOutput, path: Option<&Path>) -> Result<(), CliError> {
    out.table.write_path(path)?;
    let s = &out.summary;
    info!(
        "{}: {} at t = {}, speed drift {:e}, momentum drift {:e}",
        s.kind,
        s.termination.label(),
        s.t_end,
        s.speed_drift,
        s.momentum_drift
    );
    match s.termination.into_error() {
        Some(e) => Err(CliError::Numerical(format!("{} run stopped early: {e}", s.kind))),
        None => Ok(()),
    }
}

fn cmd_hyp2(a: Hyp2Args) -> Result<(), CliError> {
    let base = load_config(a.config.as_deref())?.map(|c| c.into_hyp2()).transpose()?;
    let cfg = match base {
        Some(c) => Hyp2Config {
            flow: a.flow.unwrap_or(c.flow),
            s0: a.s0.unwrap_or(c.s0),
            psi0: a.psi0.unwrap_or(c.psi0),
            sdot0: a.sdot0.unwrap_or(c.sdot0),
            psidot0: a.psidot0.unwrap_or(c.psidot0),
            charge: a.charge.unwrap_or(c.charge),
            tmax: a.tmax.unwrap_or(c.tmax),
            samples: a.samples.unwrap_or(c.samples),
            disk: a.disk || c.disk,
            tolerances: c.tolerances.merged(a.tol.tolerances()),
        },
        None => Hyp2Config {
            flow: a.flow.unwrap_or_default(),
            s0: required(a.s0, "s0")?,
            psi0: a.psi0.unwrap_or(0.0),
            sdot0: a.sdot0.unwrap_or(0.0),
            psidot0: a.psidot0.unwrap_or(0.0),
            charge: a.charge.unwrap_or(1.0),
            tmax: required(a.tmax, "tmax")?,
            samples: a.samples.unwrap_or(1001),
            disk: a.disk,
            tolerances: a.tol.tolerances(),
        },
    };
    cfg.validate()?;
    write_run(&run_hyp2(&cfg)?, a.out.as_deref())
}

fn read_init(path: &Path) -> Result<Rat1Config, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.display().to_string(),
        source,
    })?;
    if let Ok(doc) = serde_json::from_str::<LumpStateDoc>(&text) {
        return Ok(Rat1Config {
            init: doc,
            tmax: 100.0,
            samples: 1001,
            tolerances: Tolerances::default(),
        });
    }
    Ok(RunConfig::from_json(&text, &path.display().to_string())?.into_rat1()?)
}

fn cmd_rat1(cmd: Rat1Cmd) -> Result<(), CliError> {
    match cmd {
        Rat1Cmd::Evolve {
            init,
            tmax,
            samples,
            tol,
            out,
        } => {
            let mut cfg = read_init(&init)?;
            cfg.tmax = tmax.unwrap_or(cfg.tmax);
            cfg.samples = samples.unwrap_or(cfg.samples);
            cfg.tolerances = cfg.tolerances.merged(tol.tolerances());
            cfg.validate()?;
            write_run(&run_rat1(&cfg)?, out.as_deref())
        }
        Rat1Cmd::Charges { init } => {
            let st = match init {
                Some(p) => {
                    let cfg = read_init(&p)?;
                    cfg.validate()?;
                    LumpState::from(&cfg.init)
                }
                None => LumpState::at_rest(Vector3::new(0.0, 0.0, 1.0)),
            };
            let c = energy_and_momenta(&st);
            emit(&serde_json::to_string_pretty(&c).map_err(numerical)?)?;
            Ok(())
        }
        Rat1Cmd::Asymptotics { json } => {
            let table = CoefficientTable::new();
            let xs: Vec<f64> = (0..10).map(|i| 0.1 / 1.5f64.powi(i)).collect();
            let fitted = fit_leading_coefficients(&xs, 4).ok_or_else(|| numerical("coefficient fit failed"))?;
            let rows = convergence_table(&table, &[0.1, 0.05, 0.025, 0.0125]);
            let rows_fixed = convergence_table(&table.corrected(), &[0.1, 0.05, 0.025, 0.0125]);
            if json {
                let v = serde_json::json!({
                    "coefficients": table,
                    "expressions": CoefficientTable::expressions(),
                    "fitted_leading": fitted,
                    "residuals": rows,
                    "residuals_corrected_c3": rows_fixed,
                });
                emit(&serde_json::to_string_pretty(&v).map_err(numerical)?)?;
                return Ok(());
            }
            let values = [
                table.a[0],
                table.a[1],
                table.a[2],
                table.b[0],
                table.b[1],
                table.b[2],
                table.c[0],
                table.c[1],
                table.c[2],
                table.c3_corrected,
            ];
            for ((name, expr), v) in CoefficientTable::expressions().iter().zip(values) {
                emit(&format!("{name:<13} = {expr:<36} = {v:.15}"))?;
            }
            emit("")?;
            emit(&format!("fitted leading: a1 {:.10} b1 {:.10} c1 {:.10}", fitted[0], fitted[1], fitted[2]))?;
            emit("")?;
            emit("x = 1/log λ, third-order residuals (F1, F2, F3); last column F3 with corrected c3")?;
            for (r, rf) in rows.iter().zip(&rows_fixed) {
                emit(&format!(
                    "x={:<8} λ={:<12.4e} {:>12.5} {:>12.5} {:>12.5} {:>12.5}",
                    r.x, r.lambda, r.residual[0], r.residual[1], r.residual[2], rf.residual[2]
                ))?;
            }
            Ok(())
        }
        Rat1Cmd::LemmaScan {
            lambda_min,
            lambda_max,
            count,
            thetas,
            json,
        } => {
            if !(lambda_min > 1.0 && lambda_max > lambda_min && count >= 2 && thetas >= 2) {
                return Err(CliError::Usage("need 1 < lambda-min < lambda-max, count ≥ 2, thetas ≥ 2".into()));
            }
            let th: Vec<f64> = linspace(0.0, std::f64::consts::PI, thetas);
            let scan = lemma_bound_scan(&log_grid(lambda_min, lambda_max, count), &th);
            if json {
                emit(&serde_json::to_string_pretty(&scan).map_err(numerical)?)?;
            } else {
                match (scan.c0, scan.lambda0) {
                    (Some(c0), Some(l0)) => emit(&format!("c0 = {c0:e}\nlambda0 = {l0:.6e}"))?,
                    _ => emit("no positive lower bound on the grid")?,
                }
            }
            Ok(())
        }
        Rat1Cmd::Length { lambda } => {
            let spec = QuadratureSpec {
                rel_tol: 1e-13,
                ..QuadratureSpec::default()
            };
            emit("lambda_max,length,increment")?;
            let mut prev = f64::NAN;
            for l in lambda {
                let len = Rat1Metric.radial_length(l, &spec).map_err(numerical)?;
                emit(&format!("{l:e},{len:.15},{:e}", len - prev))?;
                prev = len;
            }
            Ok(())
        }
    }
}

fn chi_grid(r: &ChiRange) -> Result<Vec<f64>, CliError> {
    if !(r.chi_min > 0.0 && r.chi_max > r.chi_min && r.count >= 2) {
        return Err(CliError::Usage("need 0 < chi-min < chi-max and count ≥ 2".into()));
    }
    Ok(log_grid(r.chi_min, r.chi_max, r.count))
}

fn geometry(n: u32) -> Result<RatnEqGeometry, CliError> {
    RatnEqGeometry::new(n).map_err(|e| CliError::Usage(e.to_string()))
}

fn cmd_ratn(cmd: RatnCmd) -> Result<(), CliError> {
    match cmd {
        RatnCmd::Profile { n, p, range, out } => {
            let geom = geometry(n)?;
            let mut t = CsvTable::new(PROFILE_HEADER);
            t.meta("rmglab_version", env!("CARGO_PKG_VERSION"))
                .meta("module", "lump-ratn")
                .meta("n", n)
                .meta("P", p);
            for chi in chi_grid(&range)? {
                t.push(geom.profile_row(chi, p).map_err(numerical)?.to_vec());
            }
            t.write_path(out.as_deref())?;
            Ok(())
        }
        RatnCmd::Limits { n, out } => {
            let geom = geometry(n)?;
            let report = geom.limits_report().map_err(|e| CliError::Usage(e.to_string()))?;
            let text = serde_json::to_string_pretty(&report).map_err(numerical)?;
            match out {
                Some(p) => std::fs::write(p, text + "\n")?,
                None => emit(&text)?,
            }
            for l in report.limits.iter().filter(|l| !l.passed) {
                warn!("{}: estimate {} against {} (error {:e})", l.name, l.estimate, l.target, l.error);
            }
            Ok(())
        }
        RatnCmd::Potential { n, p, mode, range, out } => {
            let geom = geometry(n)?;
            let mut t = CsvTable::new("chi,V");
            t.meta("rmglab_version", env!("CARGO_PKG_VERSION"))
                .meta("module", "lump-ratn")
                .meta("n", n)
                .meta("P", p)
                .meta("mode", format!("{mode:?}").to_lowercase());
            for chi in chi_grid(&range)? {
                t.push(vec![chi, geom.effective_potential(p, chi, mode).map_err(numerical)?]);
            }
            t.write_path(out.as_deref())?;
            Ok(())
        }
        RatnCmd::Evolve {
            config,
            n,
            p,
            mode,
            chi0,
            chi_dot0,
            tmax,
            samples,
            tol,
            out,
        } => {
            let base = load_config(config.as_deref())?.map(|c| c.into_ratn()).transpose()?;
            let cfg = match base {
                Some(c) => RatnConfig {
                    n: n.unwrap_or(c.n),
                    mode: mode.unwrap_or(c.mode),
                    momentum: p.unwrap_or(c.momentum),
                    chi0: chi0.unwrap_or(c.chi0),
                    chi_dot0: chi_dot0.or(c.chi_dot0),
                    tmax: tmax.unwrap_or(c.tmax),
                    samples: samples.unwrap_or(c.samples),
                    tolerances: c.tolerances.merged(tol.tolerances()),
                },
                None => RatnConfig {
                    n: n.unwrap_or(2),
                    mode: mode.unwrap_or_default(),
                    momentum: p.unwrap_or(0.0),
                    chi0: chi0.unwrap_or(1.0),
                    chi_dot0,
                    tmax: tmax.unwrap_or(100.0),
                    samples: samples.unwrap_or(1001),
                    tolerances: tol.tolerances(),
                },
            };
            cfg.validate()?;
            let (run, inward) = run_ratn(&cfg)?;
            run.table.write_path(out.as_deref())?;
            if inward.reached_boundary {
                info!("reached the χ → 0 boundary at t = {}", inward.t_end);
                return Ok(());
            }
            if inward.chi_min < cfg.chi0 && inward.termination.is_completed() {
                info!("turnaround at χ_min = {:e}", inward.chi_min);
            }
            match inward.termination.into_error() {
                Some(e) => Err(numerical(format!("ratn run stopped early: {e}"))),
                None => Ok(()),
            }
        }
    }
}

fn cmd_check(a: CheckArgs) -> Result<(), CliError> {
    let opts = CheckOptions {
        tamper_a: a.tamper_a,
        seed: a.seed,
    };
    let report = if a.only.is_empty() {
        acceptance::run_all(&opts)
    } else {
        let ids: Vec<u8> = a.only.clone();
        if let Some(bad) = ids.iter().find(|&&i| !acceptance::CRITERIA.iter().any(|c| c.0 == i)) {
            return Err(CliError::Usage(format!("no criterion {bad}")));
        }
        let criteria: Vec<_> = ids.iter().map(|&i| acceptance::run_criterion(i, &opts)).collect();
        acceptance::AcceptanceReport {
            passed: criteria.iter().all(|c| c.passed),
            criteria,
        }
    };
    let mut stdout = std::io::stdout().lock();
    if a.json {
        writeln!(stdout, "{}", serde_json::to_string_pretty(&report).map_err(numerical)?)?;
    } else {
        write!(stdout, "{}", report.table(a.verbose))?;
    }
    let failing = report.failing();
    if failing.is_empty() {
        Ok(())
    } else {
        Err(CliError::Acceptance(failing))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RMG_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.cmd {
        Cmd::Hyp2(a) => cmd_hyp2(a),
        Cmd::Rat1 { cmd } => cmd_rat1(cmd),
        Cmd::Ratn { cmd } => cmd_ratn(cmd),
        Cmd::Check(a) => cmd_check(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rmg: {e}");
            ExitCode::from(e.code())
        }
    }
}
