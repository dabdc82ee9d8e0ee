//! Command-line front end: `density`, `moments`, `mgf`, `verify`, `tabulate`.
//!
//! Exit codes: 0 success, 1 failed verification, 2 usage or parameter error,
//! 3 numerical non-convergence. Relative `--output` paths are resolved against
//! `$QNORMAL_OUTPUT_DIR` when it is set.

pub mod verify;

use std::fmt;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Number, Value};

use crate::densities::{DistributionSpec, Family, FamilyKind};
use crate::error::Error;
use crate::moments::{mgf, moment};
use crate::orthopoly::CoefficientTable;
use crate::qseries::QParameter;
use crate::quadrature::{mgf_oracle, moment_oracle, OracleReport};

/// Environment variable giving the base directory of relative `--output` paths.
pub const OUTPUT_DIR_ENV: &str = "QNORMAL_OUTPUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NON_CONVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qnormal", version, about = "q-Gaussian densities, moments and moment generating functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Density values on an equally spaced grid.
    #[command(allow_negative_numbers = true)]
    Density(DensityArgs),
    /// Closed-form moments next to their quadrature values.
    #[command(allow_negative_numbers = true)]
    Moments(MomentsArgs),
    /// Bessel-series moment generating function next to its quadrature value.
    #[command(allow_negative_numbers = true)]
    Mgf(MgfArgs),
    /// Run the verification suites.
    #[command(allow_negative_numbers = true)]
    Verify(VerifyArgs),
    /// Tabulate coefficient families.
    #[command(allow_negative_numbers = true)]
    Tabulate(TabulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    /// fh, fN, fQ or fCN
    #[arg(long)]
    pub family: FamilyKind,
    #[arg(long)]
    pub q: f64,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub y: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long, default_value_t = 10)]
    pub max_order: u32,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct MgfArgs {
    #[command(flatten)]
    pub family: FamilyArgs,
    #[arg(long)]
    pub t: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Normalization,
    Orthogonality,
    Transfer,
    Moments,
    Mgf,
    Limits,
    All,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    pub suite: Suite,
    /// Multiplies every check tolerance.
    #[arg(long, default_value_t = 1.0)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableKind {
    CCoefficients,
}

#[derive(Debug, Args)]
pub struct TabulateArgs {
    #[arg(long, value_enum)]
    pub what: TableKind,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub q: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Failure of one command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage { parameter: Option<String>, message: String },
    Numerical(Error),
    Io(io::Error),
}

impl CliError {
    fn usage(parameter: &str, message: impl Into<String>) -> Self {
        CliError::Usage {
            parameter: Some(parameter.to_string()),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage { .. } | CliError::Io(_) => EXIT_USAGE,
            CliError::Numerical(Error::NonConvergence { .. }) => EXIT_NON_CONVERGENCE,
            CliError::Numerical(_) => EXIT_USAGE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage {
                parameter: Some(p),
                message,
            } => write!(f, "invalid --{p}: {message}"),
            CliError::Usage { parameter: None, message } => f.write_str(message),
            CliError::Numerical(e) => match e.parameter() {
                Some(p) => write!(f, "invalid --{}: {e}", p.replace('_', "-")),
                None => write!(f, "{e}"),
            },
            CliError::Io(e) => write!(f, "output error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Numerical(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

/// Float formatting used by every output: 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn json_float(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(format_float(x).parse::<Number>().expect("finite float literal"))
    } else {
        Value::String(x.to_string())
    }
}

/// A rectangular result: header plus rows of pre-formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    header: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Float(x) => format_float(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Float(x) => json_float(*x),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::String(s.clone()),
        }
    }
}

impl Report {
    fn new(header: Vec<&'static str>) -> Self {
        Report { header, rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn write(&self, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(out);
                w.write_record(&self.header)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::csv))?;
                }
                w.flush()?;
            }
            Format::Json => {
                let rows: Vec<Value> = self.rows.iter().map(|r| Value::Object(self.object(r))).collect();
                writeln!(out, "{}", serde_json::to_string_pretty(&Value::Array(rows)).expect("serializable"))?;
            }
        }
        Ok(())
    }

    fn object(&self, row: &[Cell]) -> Map<String, Value> {
        self.header.iter().zip(row).map(|(k, v)| (k.to_string(), v.json())).collect()
    }
}

impl FamilyArgs {
    /// Builds the distribution, rejecting parameters that do not belong to the family.
    pub fn spec(&self) -> Result<DistributionSpec, CliError> {
        let kind = self.family;
        let allowed: &[&str] = match kind {
            FamilyKind::QHermite | FamilyKind::QNormal => &[],
            FamilyKind::AlSalamChihara => &["a", "b"],
            FamilyKind::ConditionalQNormal => &["y", "rho"],
        };
        for (name, value) in [("a", self.a), ("b", self.b), ("y", self.y), ("rho", self.rho)] {
            if value.is_some() && !allowed.contains(&name) {
                return Err(CliError::usage(name, format!("not a parameter of family {kind}")));
            }
        }
        let need = |name: &str, value: Option<f64>| {
            value.ok_or_else(|| CliError::usage(name, format!("required for family {kind}")))
        };
        let q = QParameter::new(self.q)?;
        let family = match kind {
            FamilyKind::QHermite => Family::QHermite,
            FamilyKind::QNormal => Family::QNormal,
            FamilyKind::AlSalamChihara => Family::AlSalamChihara {
                a: need("a", self.a)?,
                b: need("b", self.b)?,
            },
            FamilyKind::ConditionalQNormal => Family::ConditionalQNormal {
                y: need("y", self.y)?,
                rho: need("rho", self.rho)?,
            },
        };
        Ok(DistributionSpec::new(family, q)?)
    }
}

fn open_output(output: &OutputArgs) -> Result<Option<File>, CliError> {
    let Some(path) = &output.output else {
        return Ok(None);
    };
    let path = match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
        _ => path.clone(),
    };
    File::create(&path)
        .map(Some)
        .map_err(|e| CliError::usage("output", format!("{}: {e}", path.display())))
}

fn emit(table: &Report, output: &OutputArgs, default: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let format = output.format.unwrap_or(default);
    match open_output(output)? {
        Some(mut file) => table.write(format, &mut file),
        None => table.write(format, out),
    }
}

fn converged(report: OracleReport, what: &'static str) -> Result<OracleReport, CliError> {
    if report.converged {
        Ok(report)
    } else {
        Err(CliError::Numerical(Error::NonConvergence {
            what,
            limit: report.panels,
            detail: format!("error estimate {:e} above {:e}", report.error_estimate, report.tolerance),
        }))
    }
}

fn density_table(args: &DensityArgs) -> Result<Report, CliError> {
    let spec = args.family.spec()?;
    if !args.from.is_finite() {
        return Err(CliError::usage("from", "must be finite"));
    }
    if !(args.to.is_finite() && args.to >= args.from) {
        return Err(CliError::usage("to", "must be finite and not below --from"));
    }
    if args.points == 0 || (args.points == 1 && args.to > args.from) {
        return Err(CliError::usage("points", "need at least two points for a non-empty range"));
    }
    let mut table = Report::new(vec!["x", "density"]);
    let step = if args.points > 1 {
        (args.to - args.from) / (args.points - 1) as f64
    } else {
        0.0
    };
    for i in 0..args.points {
        let x = if i + 1 == args.points { args.to } else { args.from + step * i as f64 };
        table.push(vec![Cell::Float(x), Cell::Float(spec.density(x)?)]);
    }
    Ok(table)
}

fn moments_table(args: &MomentsArgs) -> Result<Report, CliError> {
    let spec = args.family.spec()?;
    if args.max_order > 60 {
        return Err(CliError::usage("max-order", "at most 60"));
    }
    let mut table = Report::new(vec!["n", "closed_form", "oracle", "abs_diff"]);
    for n in 0..=args.max_order {
        let closed = moment(&spec, n)?;
        let oracle = converged(moment_oracle(&spec, n)?, "moment quadrature")?.value;
        table.push(vec![
            Cell::Int(n as i64),
            Cell::Float(closed),
            Cell::Float(oracle),
            Cell::Float((closed - oracle).abs()),
        ]);
    }
    Ok(table)
}

fn mgf_row(args: &MgfArgs) -> Result<Report, CliError> {
    let spec = args.family.spec()?;
    let series = mgf(&spec, args.t)?;
    let oracle = converged(mgf_oracle(&spec, args.t)?, "MGF quadrature")?.value;
    let mut table = Report::new(vec!["series_value", "oracle_value", "outer_terms", "inner_terms"]);
    table.push(vec![
        Cell::Float(series.value),
        Cell::Float(oracle),
        Cell::Int(series.outer_terms as i64),
        Cell::Int(series.inner_terms as i64),
    ]);
    Ok(table)
}

fn mgf_command(args: &MgfArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let table = mgf_row(args)?;
    let format = args.output.format.unwrap_or(Format::Json);
    if format == Format::Csv {
        return emit(&table, &args.output, Format::Csv, out);
    }
    // a single JSON object rather than a one-element array
    let text = serde_json::to_string_pretty(&Value::Object(table.object(&table.rows[0]))).expect("serializable");
    match open_output(&args.output)? {
        Some(mut file) => writeln!(file, "{text}")?,
        None => writeln!(out, "{text}")?,
    }
    Ok(())
}

fn tabulate_table(args: &TabulateArgs) -> Result<Report, CliError> {
    match args.what {
        TableKind::CCoefficients => {
            if args.n == 0 || args.n > 200 {
                return Err(CliError::usage("n", "must lie in 1..=200"));
            }
            let q = QParameter::new(args.q)?;
            let coefficients = CoefficientTable::new(args.n, q)?;
            let mut table = Report::new(vec!["m", "c", "reduced"]);
            for (m, (c, r)) in coefficients.c.iter().zip(&coefficients.reduced).enumerate() {
                table.push(vec![Cell::Int(m as i64), Cell::Float(*c), Cell::Float(*r)]);
            }
            Ok(table)
        }
    }
}

fn verify_command(args: &VerifyArgs, out: &mut dyn Write) -> Result<bool, CliError> {
    if !(args.tol.is_finite() && args.tol > 0.0) {
        return Err(CliError::usage("tol", "must be a positive scale factor"));
    }
    let checks = verify::run_suite(args.suite, args.tol)?;
    let mut table = Report::new(vec!["suite", "check", "value", "reference", "error", "tolerance", "status"]);
    let mut ok = true;
    for c in &checks {
        ok &= c.passed;
        table.push(vec![
            Cell::Text(c.suite.to_string()),
            Cell::Text(c.name.clone()),
            Cell::Float(c.value),
            Cell::Float(c.reference),
            Cell::Float(c.error),
            Cell::Float(c.tolerance),
            Cell::Text(if c.passed { "pass" } else { "fail" }.to_string()),
        ]);
    }
    emit(&table, &args.output, Format::Csv, out)?;
    Ok(ok)
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Density(a) => emit(&density_table(a)?, &a.output, Format::Csv, out)?,
        Command::Moments(a) => emit(&moments_table(a)?, &a.output, Format::Csv, out)?,
        Command::Mgf(a) => mgf_command(a, out)?,
        Command::Tabulate(a) => emit(&tabulate_table(a)?, &a.output, Format::Csv, out)?,
        Command::Verify(a) => {
            return Ok(if verify_command(a, out)? { EXIT_OK } else { EXIT_VERIFY_FAILED });
        }
    }
    Ok(EXIT_OK)
}

/// Runs the command line `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
