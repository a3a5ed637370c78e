//! Command-line front end: single-point evaluations, parameter sweeps and
//! figure presets, referee validation, and the delocalization-coefficient
//! optimizer.
//!
//! Exit codes: 0 success, 2 invalid arguments, 3 validation-threshold
//! breach, 4 degenerate parameter point.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use su11_core::{observables, optimizer, qfi, DpsoObjective, InterferometerParams};

use su11_cli::output::{write_table, Format, Table, Value};
use su11_cli::sweep::{
    figure_preset, run_sweep, DetectionMode, Quantity, SweepSpec, SweepVar, FIGURE_NAMES,
};
use su11_cli::validate;

#[derive(Parser)]
#[command(
    name = "su11",
    version,
    about = "Phase sensitivity, Fisher information, and metrological limits \
             of an SU(1,1) interferometer with delocalized photon subtraction"
)]
struct Cli {
    /// Plain-text key=value config file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the result table here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format: csv or jsonl.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Worker threads for sweeps (default: single-threaded).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

/// One parameter point; unset flags fall back to the config file, then to
/// the defaults m=0, alpha=1, g=1, t=0.5, T=1, eta=1, phi=1.
#[derive(Args, Clone, Debug, Default)]
struct PointArgs {
    /// Photon-subtraction order.
    #[arg(long)]
    m: Option<u32>,
    /// Coherent amplitude (real).
    #[arg(long)]
    alpha: Option<f64>,
    /// Amplifier gain parameter.
    #[arg(long)]
    g: Option<f64>,
    /// Internal-loss transmissivity.
    #[arg(long = "T")]
    transmissivity: Option<f64>,
    /// Fisher-channel loss parameter.
    #[arg(long)]
    eta: Option<f64>,
    /// Phase shift on mode a.
    #[arg(long)]
    phi: Option<f64>,
    /// Delocalization coefficient on mode a (s = 1 - t).
    #[arg(long)]
    s: Option<f64>,
    /// Delocalization coefficient on mode b (t = 1 - s).
    #[arg(long)]
    t: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Error-propagation phase sensitivity at one parameter point.
    Sensitivity(PointArgs),
    /// Ideal quantum Fisher information at one parameter point.
    Qfi(PointArgs),
    /// Lossy quantum Fisher information at one parameter point.
    QfiLossy(PointArgs),
    /// Sensitivity plus QCRB / SQL / HL benchmark columns.
    Limits {
        #[command(flatten)]
        point: PointArgs,
        /// Number of repeated measurements in the Cramér-Rao bound.
        #[arg(long)]
        v: Option<u64>,
    },
    /// Sweep one variable over a grid of (mode × m) rows.
    Sweep {
        #[command(flatten)]
        point: PointArgs,
        /// Swept variable: phi | alpha | g | T | eta | t.
        #[arg(long)]
        var: String,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        /// Number of grid points.
        #[arg(long)]
        n: usize,
        /// Detection modes (comma-separated): standard | mode_a | mode_b | dpso.
        #[arg(long, value_delimiter = ',', default_value = "dpso")]
        mode: Vec<String>,
        /// Subtraction orders for the subtracting modes (comma-separated).
        #[arg(long, value_delimiter = ',', default_value = "1")]
        ms: Vec<u32>,
        /// Quantity: sensitivity | qfi | qfi-lossy | limits.
        #[arg(long, default_value = "sensitivity")]
        quantity: String,
        /// Pin the delocalization coefficient instead of optimizing per point.
        #[arg(long)]
        pin_t: Option<f64>,
        /// Measurement count for the limits quantity.
        #[arg(long)]
        v: Option<u64>,
        /// Append a relative-delta column against the brute-force referee.
        #[arg(long)]
        check_oracle: bool,
    },
    /// Run a named figure preset (fig2..fig7, fig9..fig13).
    Figure {
        name: String,
        /// Pin the delocalization coefficient instead of optimizing per point.
        #[arg(long)]
        pin_t: Option<f64>,
        /// Append a relative-delta column against the brute-force referee.
        #[arg(long)]
        check_oracle: bool,
    },
    /// Compare every closed form against the brute-force referee.
    Validate {
        /// Also check that the miscopied variant of the lossy bound deviates.
        #[arg(long)]
        printed_variant: bool,
    },
    /// Optimize the delocalization coefficient t at one parameter point.
    OptimizeT {
        #[command(flatten)]
        point: PointArgs,
        /// Objective: sensitivity | qfi | qfi-lossy.
        #[arg(long, default_value = "sensitivity")]
        objective: String,
    },
}

/// Process failure with its exit code.
enum Failure {
    Invalid(String),
    Breach(String),
    Degenerate(String),
    Internal(String),
}

impl Failure {
    fn exit(self) -> ExitCode {
        let (code, label, msg) = match self {
            Failure::Invalid(m) => (2, "invalid arguments", m),
            Failure::Breach(m) => (3, "validation breach", m),
            Failure::Degenerate(m) => (4, "degenerate point", m),
            Failure::Internal(m) => (1, "error", m),
        };
        eprintln!("su11: {label}: {msg}");
        ExitCode::from(code)
    }
}

fn classify_core(e: su11_core::Error) -> Failure {
    use su11_core::Error as E;
    match e {
        E::InvalidParams(_) | E::UnsupportedConfiguration(_) => Failure::Invalid(e.to_string()),
        E::DegenerateState(_) | E::NoFeasiblePoint => Failure::Degenerate(e.to_string()),
        _ => Failure::Internal(e.to_string()),
    }
}

type Run<T> = Result<T, Failure>;

fn load_config(path: &Option<PathBuf>) -> Run<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    let Some(path) = path else { return Ok(map) };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Invalid(format!("cannot read config {}: {e}", path.display())))?;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Failure::Invalid(format!(
                "config line {} is not key=value: '{line}'",
                lineno + 1
            )));
        };
        map.insert(key.trim().to_owned(), value.trim().to_owned());
    }
    Ok(map)
}

/// CLI flag > config value > default.
fn resolve<T: FromStr + Copy>(
    flag: Option<T>,
    config: &BTreeMap<String, String>,
    key: &str,
    default: T,
) -> Run<T>
where
    T::Err: std::fmt::Display,
{
    if let Some(v) = flag {
        return Ok(v);
    }
    match config.get(key) {
        Some(raw) => raw
            .parse()
            .map_err(|e| Failure::Invalid(format!("config key '{key}': {e}"))),
        None => Ok(default),
    }
}

fn resolve_point(args: &PointArgs, config: &BTreeMap<String, String>) -> Run<InterferometerParams> {
    let m = resolve(args.m, config, "m", 0u32)?;
    let alpha = resolve(args.alpha, config, "alpha", 1.0)?;
    let g = resolve(args.g, config, "g", 1.0)?;
    let transmissivity = resolve(args.transmissivity, config, "T", 1.0)?;
    let eta = resolve(args.eta, config, "eta", 1.0)?;
    let phi = resolve(args.phi, config, "phi", 1.0)?;
    let s_flag = match (args.s, config.get("s")) {
        (Some(s), _) => Some(s),
        (None, Some(raw)) => Some(
            raw.parse()
                .map_err(|e| Failure::Invalid(format!("config key 's': {e}")))?,
        ),
        (None, None) => None,
    };
    let t_flag = match (args.t, config.get("t")) {
        (Some(t), _) => Some(t),
        (None, Some(raw)) => Some(
            raw.parse()
                .map_err(|e| Failure::Invalid(format!("config key 't': {e}")))?,
        ),
        (None, None) => None,
    };
    let t = match (s_flag, t_flag) {
        (Some(s), Some(t)) => {
            if (s + t - 1.0).abs() > 1e-12 {
                return Err(Failure::Invalid(format!(
                    "s and t are mutually determined (s + t = 1); got s={s}, t={t}"
                )));
            }
            t
        }
        (Some(s), None) => 1.0 - s,
        (None, Some(t)) => t,
        (None, None) => 0.5,
    };
    InterferometerParams::new(g, Complex64::new(alpha, 0.0), t, m)
        .and_then(|p| p.with_transmissivity(transmissivity))
        .and_then(|p| p.with_eta(eta))
        .map(|p| p.with_phi(phi))
        .map_err(classify_core)
}

fn point_columns(p: &InterferometerParams) -> (Vec<&'static str>, Vec<Value>) {
    (
        vec!["phi", "alpha", "g", "T", "eta", "m", "s", "t"],
        vec![
            p.phi.into(),
            p.alpha.re.into(),
            p.g.into(),
            p.transmissivity.into(),
            p.eta.into(),
            Value::Int(p.m as i64),
            p.s.into(),
            p.t.into(),
        ],
    )
}

fn emit(table: &Table, out: &Option<PathBuf>, format: Format) -> Run<()> {
    let result = match out {
        Some(path) => {
            let file = fs::File::create(path)
                .map_err(|e| Failure::Internal(format!("cannot create {}: {e}", path.display())))?;
            write_table(std::io::BufWriter::new(file), table, format)
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_table(&mut lock, table, format).and_then(|_| lock.flush())
        }
    };
    result.map_err(|e| Failure::Internal(format!("output failed: {e}")))
}

fn log_resolved(p: &InterferometerParams) {
    eprintln!(
        "su11: resolved parameters: m={} alpha={} g={} t={} s={} T={} eta={} phi={}",
        p.m, p.alpha.re, p.g, p.t, p.s, p.transmissivity, p.eta, p.phi
    );
}

fn single_row(
    p: &InterferometerParams,
    extra: &[(&'static str, Value)],
) -> Table {
    let (mut cols, mut row) = point_columns(p);
    for (name, value) in extra {
        cols.push(name);
        row.push(value.clone());
    }
    let mut table = Table::new(&cols);
    table.push(row);
    table
}

fn parse_modes(raw: &[String]) -> Run<Vec<DetectionMode>> {
    raw.iter()
        .map(|s| s.parse().map_err(Failure::Invalid))
        .collect()
}

fn run(cli: Cli) -> Run<()> {
    let config = load_config(&cli.config)?;
    let format: Format = {
        let raw = match (&cli.format, config.get("format")) {
            (Some(f), _) => f.clone(),
            (None, Some(f)) => f.clone(),
            (None, None) => "csv".to_owned(),
        };
        raw.parse().map_err(Failure::Invalid)?
    };
    let jobs = resolve(cli.jobs, &config, "jobs", usize::MAX)?;
    let jobs = if jobs == usize::MAX { None } else { Some(jobs) };

    match &cli.command {
        Command::Sensitivity(point) => {
            let p = resolve_point(point, &config)?;
            log_resolved(&p);
            let dphi = observables::phase_sensitivity(&p).map_err(classify_core)?;
            emit(&single_row(&p, &[("dphi", dphi.into())]), &cli.out, format)
        }
        Command::Qfi(point) => {
            let p = resolve_point(point, &config)?;
            log_resolved(&p);
            let f = qfi::qfi_ideal(&p).map_err(classify_core)?;
            emit(&single_row(&p, &[("f", f.into())]), &cli.out, format)
        }
        Command::QfiLossy(point) => {
            let p = resolve_point(point, &config)?;
            log_resolved(&p);
            let f = qfi::qfi_lossy(&p).map_err(classify_core)?;
            emit(&single_row(&p, &[("f_lossy", f.into())]), &cli.out, format)
        }
        Command::Limits { point, v } => {
            let p = resolve_point(point, &config)?;
            let v = resolve(*v, &config, "v", 1u64)?;
            log_resolved(&p);
            let dphi = observables::phase_sensitivity(&p).map_err(classify_core)?;
            let r = qfi::limits(&p, v).map_err(classify_core)?;
            emit(
                &single_row(
                    &p,
                    &[
                        ("dphi", dphi.into()),
                        ("f", r.f_ideal.into()),
                        ("f_lossy", r.f_lossy.into()),
                        ("n", r.n_total.into()),
                        ("qcrb", r.qcrb.into()),
                        ("sql", r.sql.into()),
                        ("hl", r.hl.into()),
                        ("v", Value::Int(r.v as i64)),
                    ],
                ),
                &cli.out,
                format,
            )
        }
        Command::Sweep {
            point,
            var,
            lo,
            hi,
            n,
            mode,
            ms,
            quantity,
            pin_t,
            v,
            check_oracle,
        } => {
            let var: SweepVar = var.parse().map_err(Failure::Invalid)?;
            let quantity: Quantity = quantity.parse().map_err(Failure::Invalid)?;
            // The swept variable must not also be fixed on the command line.
            let duplicated = match var {
                SweepVar::Phi => point.phi.is_some(),
                SweepVar::Alpha => point.alpha.is_some(),
                SweepVar::G => point.g.is_some(),
                SweepVar::Transmissivity => point.transmissivity.is_some(),
                SweepVar::Eta => point.eta.is_some(),
                SweepVar::Split => point.s.is_some() || point.t.is_some() || pin_t.is_some(),
            };
            if duplicated {
                return Err(Failure::Invalid(format!(
                    "swept variable '{}' is also fixed on the command line",
                    var.name()
                )));
            }
            let base = resolve_point(point, &config)?;
            log_resolved(&base);
            let spec = SweepSpec {
                var,
                lo: *lo,
                hi: *hi,
                n: *n,
                base,
                modes: parse_modes(mode)?,
                ms: ms.clone(),
                quantity,
                pin_t: *pin_t,
                v: resolve(*v, &config, "v", 1u64)?,
                check_oracle: *check_oracle,
                jobs,
            };
            let table = run_sweep(&spec).map_err(|e| Failure::Invalid(e.to_string()))?;
            emit(&table, &cli.out, format)
        }
        Command::Figure { name, pin_t, check_oracle } => {
            let Some(mut spec) = figure_preset(name) else {
                return Err(Failure::Invalid(format!(
                    "unknown figure '{name}' (available: {})",
                    FIGURE_NAMES.join(", ")
                )));
            };
            spec.pin_t = *pin_t;
            spec.check_oracle = *check_oracle;
            spec.jobs = jobs;
            log_resolved(&spec.base);
            let table = run_sweep(&spec).map_err(|e| Failure::Internal(e.to_string()))?;
            emit(&table, &cli.out, format)
        }
        Command::Validate { printed_variant } => {
            eprintln!("su11: validating closed forms against the brute-force referee...");
            let report = validate::run_all(*printed_variant);
            emit(&report.to_table(), &cli.out, format)?;
            let failures: Vec<String> = report
                .failures()
                .map(|e| format!("{} at {} (delta {})", e.check, e.context, e.delta))
                .collect();
            if failures.is_empty() {
                eprintln!("su11: all {} checks passed", report.entries.len());
                Ok(())
            } else {
                Err(Failure::Breach(format!(
                    "{} of {} checks failed: {}",
                    failures.len(),
                    report.entries.len(),
                    failures.join("; ")
                )))
            }
        }
        Command::OptimizeT { point, objective } => {
            let objective = match objective.as_str() {
                "sensitivity" => DpsoObjective::Sensitivity,
                "qfi" => DpsoObjective::Qfi,
                "qfi-lossy" | "qfi_lossy" => DpsoObjective::QfiLossy,
                other => {
                    return Err(Failure::Invalid(format!(
                        "unknown objective '{other}' (sensitivity|qfi|qfi-lossy)"
                    )))
                }
            };
            let p = resolve_point(point, &config)?;
            log_resolved(&p);
            let r = optimizer::optimize_dpso_t(&p, objective).map_err(classify_core)?;
            emit(
                &single_row(
                    &p,
                    &[
                        ("t_opt", r.argmin.into()),
                        ("value", r.value.into()),
                        ("evaluations", Value::Int(r.evaluations as i64)),
                        ("flat", if r.flat { "true" } else { "false" }.into()),
                    ],
                ),
                &cli.out,
                format,
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => failure.exit(),
    }
}
