//! Command-line front end.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::death::{curve_evaluator, death_report, default_coarse_step, DeathReport};
use crate::error::Error;
use crate::io::{fmt_f64, render_csv, Header, SCHEMA};
use crate::kappa::{solve_volterra, MemoryKernel};
use crate::model::{
    validate_ensemble, ChannelKind, Definition, EnsembleConfig, KappaModel, ReservoirConfig,
    TimeGrid,
};
use crate::squeezing::{
    optimal_alpha, scaling_scan, squeezing_curve, ClosedForm, DecoheredSqueezing,
};
use crate::verify::run_verification;

pub const THREADS_ENV: &str = "SQUEEZE_DYN_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "squeeze-dyn",
    version,
    about = "Spin-squeezing dynamics under decoherence"
)]
pub struct Cli {
    /// Worker threads [default: $SQUEEZE_DYN_THREADS, else all cores]
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Squeezing parameter along a kappa trajectory
    Evolve(EvolveArgs),
    /// Death times and squeezed intervals of a trajectory
    DeathTimes(DeathArgs),
    /// Optimal twisting and minimal squeezing against ensemble size
    AlphaScan(ScanArgs),
    /// Compare closed forms with the density-matrix oracle
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KappaKind {
    Markovian,
    Lorentzian,
    Volterra,
}

impl KappaKind {
    fn name(self) -> &'static str {
        match self {
            KappaKind::Markovian => "markovian",
            KappaKind::Lorentzian => "lorentzian",
            KappaKind::Volterra => "volterra",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct CurveArgs {
    /// Number of qubits
    #[arg(long)]
    pub n: usize,
    /// Twisting angle [default: the optimum for N]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// External field strength
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long)]
    pub channel: ChannelKind,
    /// xi or xi-prime
    #[arg(long, default_value = "xi")]
    pub definition: Definition,
    /// printed or corrected closed forms
    #[arg(long, default_value = "printed")]
    pub formula: ClosedForm,
    #[arg(long, value_enum, default_value_t = KappaKind::Lorentzian)]
    pub kappa: KappaKind,
    /// Reservoir spectral width
    #[arg(long, default_value_t = 0.01)]
    pub gamma: f64,
    /// Reservoir coupling strength
    #[arg(long, default_value_t = 10.0)]
    pub eta0: f64,
    /// Decay rate of the Markovian kappa
    #[arg(long, default_value_t = 0.005)]
    pub rate: f64,
    /// Step of the Volterra solver
    #[arg(long, default_value_t = 0.05)]
    pub kappa_step: f64,
    /// Also evaluate kappa = exp(-RATE t)
    #[arg(long, value_name = "RATE")]
    pub compare_markovian: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file [default: stdout]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Omit the timestamp header line
    #[arg(long)]
    pub reproducible: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub curve: CurveArgs,
    #[arg(long, default_value_t = 400.0)]
    pub t_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub dt: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DeathArgs {
    #[command(flatten)]
    pub curve: CurveArgs,
    #[arg(long, default_value_t = 1000.0)]
    pub horizon: f64,
    /// Scan resolution [default: min(0.05, pi/(10 d))]
    #[arg(long)]
    pub coarse_step: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 10)]
    pub n_min: usize,
    #[arg(long, default_value_t = 100_000)]
    pub n_max: usize,
    #[arg(long, default_value_t = 25)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 6)]
    pub max_n: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Model(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

/// Rendered output plus the exit status it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub body: String,
    pub exit_code: u8,
    pub summary: Option<String>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Shortest text that parses back to the same float.
fn arg_f64(x: f64) -> String {
    format!("{x}")
}

fn stamp(header: &mut Header, output: &OutputArgs, args: &[String]) {
    header.push("args", args.join(" "));
    if !output.reproducible {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        header.push("generated_unix", secs.to_string());
    }
}

struct ResolvedCurve {
    cfg: EnsembleConfig,
    alpha_auto: bool,
    model: KappaModel,
    map: DecoheredSqueezing,
    canonical: Vec<String>,
    header: Header,
}

fn resolve_curve(c: &CurveArgs, horizon: f64, command: &str) -> Result<ResolvedCurve, CliError> {
    if c.n < 2 {
        return Err(usage(format!("--n must be at least 2, got {}", c.n)));
    }
    let (alpha, alpha_auto) = match c.alpha {
        Some(a) => (a, false),
        None => {
            if c.n < 3 {
                return Err(usage("--alpha is required for N = 2"));
            }
            (optimal_alpha(c.n)?.alpha_star, true)
        }
    };
    let cfg = EnsembleConfig::new(c.n, alpha).with_delta(c.delta);
    let validated = validate_ensemble(cfg)?;

    let model = match c.kappa {
        KappaKind::Markovian => KappaModel::markovian(c.rate)?,
        KappaKind::Lorentzian => KappaModel::lorentzian(ReservoirConfig::new(c.gamma, c.eta0)?),
        KappaKind::Volterra => {
            let res = ReservoirConfig::new(c.gamma, c.eta0)?;
            let end = (horizon / c.kappa_step).ceil() * c.kappa_step;
            let grid = TimeGrid::new(0.0, end.max(c.kappa_step), c.kappa_step)?;
            solve_volterra(&MemoryKernel::exponential(res), &grid)?.into()
        }
    };
    if let Some(rate) = c.compare_markovian {
        KappaModel::markovian(rate)?;
    }
    let map = DecoheredSqueezing::new(c.n, alpha, c.channel, c.definition, c.formula)?;

    let mut canonical = vec![command.to_string(), "--n".into(), c.n.to_string()];
    if !alpha_auto {
        canonical.extend(["--alpha".into(), arg_f64(alpha)]);
    }
    canonical.extend([
        "--delta".into(),
        arg_f64(c.delta),
        "--channel".into(),
        c.channel.name().into(),
        "--definition".into(),
        c.definition.name().into(),
        "--formula".into(),
        c.formula.name().into(),
        "--kappa".into(),
        c.kappa.name().into(),
    ]);
    match c.kappa {
        KappaKind::Markovian => canonical.extend(["--rate".into(), arg_f64(c.rate)]),
        KappaKind::Lorentzian => canonical.extend([
            "--gamma".into(),
            arg_f64(c.gamma),
            "--eta0".into(),
            arg_f64(c.eta0),
        ]),
        KappaKind::Volterra => canonical.extend([
            "--gamma".into(),
            arg_f64(c.gamma),
            "--eta0".into(),
            arg_f64(c.eta0),
            "--kappa-step".into(),
            arg_f64(c.kappa_step),
        ]),
    }
    if let Some(rate) = c.compare_markovian {
        canonical.extend(["--compare-markovian".into(), arg_f64(rate)]);
    }

    let mut header = Header::new();
    header
        .push("command", command)
        .push("n", c.n.to_string())
        .push_f64("alpha", alpha)
        .push(
            "alpha_source",
            if alpha_auto { "optimized" } else { "user" },
        )
        .push_f64("delta", c.delta)
        .push("channel", c.channel.name())
        .push("definition", c.definition.name())
        .push("formula", c.formula.name());
    if !validated.warnings.is_empty() {
        let w: Vec<String> = validated
            .warnings
            .iter()
            .map(|w| format!("{w:?}"))
            .collect();
        header.push("alpha_warnings", w.join(";"));
    }
    if c.kappa == KappaKind::Volterra {
        header.push("kappa_source", "volterra");
    }
    model.describe(&mut header);
    if let Some(rate) = c.compare_markovian {
        header.push_f64("compare_markovian", rate);
    }

    Ok(ResolvedCurve {
        cfg,
        alpha_auto,
        model,
        map,
        canonical,
        header,
    })
}

fn evolve(a: &EvolveArgs) -> Result<Outcome, CliError> {
    let grid = TimeGrid::new(0.0, a.t_max, a.dt)?;
    let mut r = resolve_curve(&a.curve, a.t_max, "evolve")?;
    let c = &a.curve;
    let curve = squeezing_curve(&r.cfg, c.channel, &r.model, &grid, c.definition, c.formula)?;
    let reference = match c.compare_markovian {
        Some(rate) => Some(squeezing_curve(
            &r.cfg,
            c.channel,
            &KappaModel::markovian(rate)?,
            &grid,
            c.definition,
            c.formula,
        )?),
        None => None,
    };

    r.canonical.extend([
        "--t-max".into(),
        arg_f64(a.t_max),
        "--dt".into(),
        arg_f64(a.dt),
        "--format".into(),
        format_name(a.format).into(),
    ]);
    if a.output.reproducible {
        r.canonical.push("--reproducible".into());
    }
    r.header
        .push_f64("t_start", grid.t_start())
        .push_f64("t_end", grid.t_end())
        .push_f64("dt", grid.step())
        .push("points", grid.len().to_string());
    stamp(&mut r.header, &a.output, &r.canonical);

    let col = c.definition.column();
    let marker = format!("{col}_markovian");
    let mut columns = vec!["t", "kappa", col];
    if reference.is_some() {
        columns.extend(["kappa_markovian", marker.as_str()]);
    }
    let rows: Vec<Vec<f64>> = curve
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut row = vec![p.t, p.kappa, p.xi2];
            if let Some(m) = &reference {
                row.extend([m.points[i].kappa, m.points[i].xi2]);
            }
            row
        })
        .collect();

    let body = match a.format {
        Format::Csv => render_csv(&r.header, &columns, &rows),
        Format::Json => {
            let rows: Vec<Value> = rows
                .iter()
                .map(|row| Value::Array(row.iter().map(|&x| Value::from(x)).collect()))
                .collect();
            to_json(&json!({
                "schema": SCHEMA,
                "metadata": r.header.to_map(),
                "columns": columns,
                "rows": rows,
            }))
        }
    };
    let squeezed = curve.points.iter().filter(|p| p.xi2 < 1.0).count();
    Ok(Outcome {
        body,
        exit_code: 0,
        summary: Some(format!(
            "{} points, {squeezed} squeezed, alpha = {}{}",
            curve.points.len(),
            fmt_f64(r.cfg.alpha),
            if r.alpha_auto { " (optimized)" } else { "" }
        )),
    })
}

#[derive(Debug, Serialize)]
struct MarkovianDeath {
    rate: f64,
    #[serde(flatten)]
    report: DeathReport,
}

fn death_times(a: &DeathArgs) -> Result<Outcome, CliError> {
    if !(a.horizon > 0.0 && a.horizon.is_finite()) {
        return Err(usage(format!(
            "--horizon must be positive, got {}",
            a.horizon
        )));
    }
    let mut r = resolve_curve(&a.curve, a.horizon, "death-times")?;
    let step = a
        .coarse_step
        .unwrap_or_else(|| default_coarse_step(&r.model));
    if !(step > 0.0 && step.is_finite()) {
        return Err(usage(format!("--coarse-step must be positive, got {step}")));
    }
    let report = death_report(curve_evaluator(&r.map, &r.model), a.horizon, step);
    let markovian = match a.curve.compare_markovian {
        Some(rate) => {
            let model = KappaModel::markovian(rate)?;
            Some(MarkovianDeath {
                rate,
                report: death_report(
                    curve_evaluator(&r.map, &model),
                    a.horizon,
                    default_coarse_step(&model),
                ),
            })
        }
        None => None,
    };

    r.canonical.extend(["--horizon".into(), arg_f64(a.horizon)]);
    if let Some(s) = a.coarse_step {
        r.canonical.extend(["--coarse-step".into(), arg_f64(s)]);
    }
    if a.output.reproducible {
        r.canonical.push("--reproducible".into());
    }
    r.header
        .push_f64("horizon", a.horizon)
        .push_f64("coarse_step", step);
    stamp(&mut r.header, &a.output, &r.canonical);

    let fmt_time = |t: Option<f64>| t.map_or("none".to_string(), fmt_f64);
    let summary = format!(
        "first death {}, final death {}, {} squeezed interval(s)",
        fmt_time(report.first_death),
        fmt_time(report.final_death),
        report.intervals.len()
    );
    let body = to_json(&json!({
        "schema": SCHEMA,
        "metadata": r.header.to_map(),
        "curve": report,
        "markovian": markovian,
    }));
    Ok(Outcome {
        body,
        exit_code: 0,
        summary: Some(summary),
    })
}

fn alpha_scan(a: &ScanArgs) -> Result<Outcome, CliError> {
    if a.n_min < 3 || a.n_max <= a.n_min {
        return Err(usage(format!(
            "need 3 <= n-min < n-max, got {}..{}",
            a.n_min, a.n_max
        )));
    }
    if a.points < 2 {
        return Err(usage("--points must be at least 2"));
    }
    let scan = scaling_scan(a.n_min, a.n_max, a.points)?;
    let mut canonical = vec![
        "alpha-scan".to_string(),
        "--n-min".into(),
        a.n_min.to_string(),
        "--n-max".into(),
        a.n_max.to_string(),
        "--points".into(),
        a.points.to_string(),
        "--format".into(),
        format_name(a.format).into(),
    ];
    if a.output.reproducible {
        canonical.push("--reproducible".into());
    }
    let mut header = Header::new();
    header
        .push("command", "alpha-scan")
        .push("n_min", a.n_min.to_string())
        .push("n_max", a.n_max.to_string())
        .push("points", a.points.to_string())
        .push("rows", scan.rows.len().to_string())
        .push_f64("slope", scan.slope);
    stamp(&mut header, &a.output, &canonical);

    let body = match a.format {
        Format::Csv => {
            let mut out = header.render();
            out.push_str("n,alpha_star,xi_min\n");
            for row in &scan.rows {
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    row.n,
                    fmt_f64(row.alpha_star),
                    fmt_f64(row.xi_min)
                );
            }
            out
        }
        Format::Json => to_json(&json!({
            "schema": SCHEMA,
            "metadata": header.to_map(),
            "rows": scan.rows,
            "slope": scan.slope,
        })),
    };
    Ok(Outcome {
        body,
        exit_code: 0,
        summary: Some(format!(
            "{} sizes, slope {}",
            scan.rows.len(),
            fmt_f64(scan.slope)
        )),
    })
}

fn verify(a: &VerifyArgs) -> Result<Outcome, CliError> {
    if a.max_n < 2 || a.max_n > crate::oracle::MAX_QUBITS {
        return Err(usage(format!(
            "--max-n must lie in 2..={}, got {}",
            crate::oracle::MAX_QUBITS,
            a.max_n
        )));
    }
    let report = run_verification(a.max_n, a.tolerance)?;
    let mut canonical = vec![
        "verify".to_string(),
        "--max-n".into(),
        a.max_n.to_string(),
        "--tolerance".into(),
        arg_f64(a.tolerance),
    ];
    if a.output.reproducible {
        canonical.push("--reproducible".into());
    }
    let mut header = Header::new();
    header
        .push("command", "verify")
        .push("max_n", a.max_n.to_string())
        .push_f64("tolerance", a.tolerance);
    stamp(&mut header, &a.output, &canonical);
    let summary = format!(
        "{} comparisons: {} printed, {} corrected-only, {} mismatched",
        report.cases.len(),
        report.printed_matches,
        report.corrected_matches,
        report.mismatches
    );
    let exit_code = if report.passed { 0 } else { 1 };
    let body = to_json(&json!({
        "schema": SCHEMA,
        "metadata": header.to_map(),
        "report": report,
    }));
    Ok(Outcome {
        body,
        exit_code,
        summary: Some(summary),
    })
}

fn format_name(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values always serialize");
    s.push('\n');
    s
}

fn output_of(cmd: &Command) -> &OutputArgs {
    match cmd {
        Command::Evolve(a) => &a.output,
        Command::DeathTimes(a) => &a.output,
        Command::AlphaScan(a) => &a.output,
        Command::Verify(a) => &a.output,
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let threads = match cli.threads {
        Some(t) => Some(t),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(
                v.trim()
                    .parse()
                    .map_err(|_| usage(format!("{THREADS_ENV}={v} is not a thread count")))?,
            ),
            Err(_) => None,
        },
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(usage("thread count must be positive"));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Evolve(a) => evolve(a),
        Command::DeathTimes(a) => death_times(a),
        Command::AlphaScan(a) => alpha_scan(a),
        Command::Verify(a) => verify(a),
    })
}

/// Parses `args`, runs the command and writes its output; returns the
/// process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code() as u8;
        }
    };
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let written = match &output_of(&cli.command).out {
        Some(path) => std::fs::write(path, &outcome.body).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => std::io::stdout()
            .write_all(outcome.body.as_bytes())
            .map_err(|source| CliError::Io {
                path: "stdout".into(),
                source,
            }),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    if let Some(s) = &outcome.summary {
        eprintln!("{s}");
    }
    outcome.exit_code
}
