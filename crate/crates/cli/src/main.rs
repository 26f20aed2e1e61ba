//! `gaussian-eof`: entanglement of formation of symmetric two-mode Gaussian
//! states from the command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 invalid covariance
//! matrix, 3 asymmetric state, 64 usage error, 65 malformed input data,
//! 66 unreadable input file, 74 output write failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod input;
mod report;
mod sweep;
mod verify;

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use gaussian_eof::DEFAULT_TOL;

use input::{parse_input, ParsedInput};
use report::{csv_row, evaluate_cm, evaluate_params, text_report, Status, CSV_HEADER};
use sweep::{run_sweep, Axis, SweepPlan};
use verify::VerifyArgs;

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_INVALID_CM: u8 = 2;
const EXIT_ASYMMETRIC: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_NO_INPUT: u8 = 66;
const EXIT_IO: u8 = 74;

#[derive(Debug, Parser)]
#[command(
    name = "gaussian-eof",
    version,
    about = "Entanglement of formation of symmetric two-mode Gaussian states"
)]
#[command(
    after_help = "Exit codes: 0 success, 1 verification failure, 2 invalid covariance matrix, \
3 asymmetric state, 64 usage error, 65 malformed input, 66 unreadable input, 74 write failure."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report validity, standard form, EPR-uncertainty and EoF of one state.
    Analyze(AnalyzeArgs),
    /// Run a seeded property suite; exits 1 if any check fails.
    Verify {
        #[command(flatten)]
        args: VerifyArgs,
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = VerifyFormat::Text)]
        format: VerifyFormat,
    },
    /// Tabulate the EoF along one standard-form parameter as CSV.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Numerical tolerance for validity and symmetry checks.
    #[arg(long, env = "GAUSS_EOF_TOL", default_value_t = DEFAULT_TOL)]
    tol: f64,

    /// Write the output here instead of standard output.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Read the state from a file ('-' for standard input): three numbers
    /// `n k_x k_p` or a 4×4 matrix in (X_A, P_A, X_B, P_B) order.
    #[arg(long, short = 'i')]
    input: Option<PathBuf>,

    #[arg(long)]
    n: Option<f64>,
    #[arg(long)]
    kx: Option<f64>,
    #[arg(long)]
    kp: Option<f64>,

    /// Inline numbers, same formats as --input.
    #[arg(allow_negative_numbers = true)]
    values: Vec<String>,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Significant digits of printed numbers.
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u8).range(1..=17))]
    digits: u8,

    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    axis: Axis,
    #[arg(long, allow_negative_numbers = true)]
    lo: f64,
    #[arg(long, allow_negative_numbers = true)]
    hi: f64,
    /// Grid points including both ends; 1 requires --lo equal to --hi.
    #[arg(long)]
    steps: usize,

    /// Fixed parameters not swept.
    #[arg(long)]
    n: Option<f64>,
    #[arg(long)]
    kx: Option<f64>,
    #[arg(long)]
    kp: Option<f64>,

    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    format: TableFormat,

    /// Significant digits of printed numbers.
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u8).range(1..=17))]
    digits: u8,

    #[command(flatten)]
    common: Common,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Analyze(args) => analyze(&args),
        Command::Verify {
            args,
            common,
            format,
        } => verify_cmd(&args, &common, format),
        Command::Sweep(args) => sweep_cmd(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("gaussian-eof: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol.is_finite() && tol >= 0.0 {
        Ok(())
    } else {
        Err(Failure::new(
            EXIT_USAGE,
            format!("--tol must be finite and >= 0, got {tol}"),
        ))
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    let res = match out {
        Some(path) => fs::write(path, text),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
        }
    };
    res.map_err(|e| Failure::new(EXIT_IO, format!("cannot write output: {e}")))
}

fn read_source(args: &AnalyzeArgs) -> Result<String, Failure> {
    let flags = [args.n, args.kx, args.kp];
    let flag_count = flags.iter().filter(|v| v.is_some()).count();
    let sources = usize::from(args.input.is_some())
        + usize::from(flag_count > 0)
        + usize::from(!args.values.is_empty());
    if sources != 1 {
        return Err(Failure::new(
            EXIT_USAGE,
            "give exactly one input: --input, --n/--kx/--kp, or inline numbers",
        ));
    }
    if flag_count > 0 {
        return match flags {
            [Some(n), Some(kx), Some(kp)] => Ok(format!("{n:?} {kx:?} {kp:?}")),
            _ => Err(Failure::new(
                EXIT_USAGE,
                "--n, --kx and --kp must be given together",
            )),
        };
    }
    if let Some(path) = &args.input {
        let mut text = String::new();
        let res = if path.as_os_str() == "-" {
            io::stdin().read_to_string(&mut text).map(|_| ())
        } else {
            fs::read_to_string(path).map(|t| text = t)
        };
        res.map_err(|e| {
            Failure::new(
                EXIT_NO_INPUT,
                format!("cannot read {}: {e}", path.display()),
            )
        })?;
        return Ok(text);
    }
    Ok(args.values.join(" "))
}

fn analyze(args: &AnalyzeArgs) -> Result<u8, Failure> {
    check_tol(args.common.tol)?;
    let text = read_source(args)?;
    let parsed = parse_input(&text).map_err(|e| Failure::new(EXIT_DATA, e.to_string()))?;
    let tol = args.common.tol;
    let eval = match parsed {
        ParsedInput::Triple(p) => evaluate_params(&p, tol),
        ParsedInput::Matrix(cm) => evaluate_cm(&cm, tol),
    };
    let digits = usize::from(args.digits);
    let rendered = match args.format {
        Format::Text => text_report(&eval, digits),
        Format::Csv => format!("{CSV_HEADER}\n{}\n", csv_row(&eval, digits)),
        Format::Json => to_json(&eval)?,
    };
    emit(&args.common.out, &rendered)?;
    let code = match eval.status() {
        Status::Ok => 0,
        Status::Invalid => EXIT_INVALID_CM,
        Status::Asymmetric => EXIT_ASYMMETRIC,
    };
    if code != 0 && args.format != Format::Text {
        if let Some(m) = &eval.message {
            eprintln!("gaussian-eof: {m}");
        }
    }
    Ok(code)
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Failure::new(EXIT_IO, format!("cannot serialize output: {e}")))
}

fn verify_cmd(args: &VerifyArgs, common: &Common, format: VerifyFormat) -> Result<u8, Failure> {
    check_tol(common.tol)?;
    let report = verify::run(args, common.tol).map_err(|e| {
        let code = match e {
            gaussian_eof::Error::InvalidCovariance { .. } => EXIT_INVALID_CM,
            gaussian_eof::Error::Asymmetric { .. } => EXIT_ASYMMETRIC,
            gaussian_eof::Error::InvalidInput(_) => EXIT_USAGE,
            _ => EXIT_VERIFY_FAILED,
        };
        Failure::new(code, e.to_string())
    })?;
    let rendered = match format {
        VerifyFormat::Text => verify::text_report(&report),
        VerifyFormat::Json => to_json(&report)?,
    };
    emit(&common.out, &rendered)?;
    Ok(if report.passed() {
        0
    } else {
        EXIT_VERIFY_FAILED
    })
}

fn sweep_cmd(args: &SweepArgs) -> Result<u8, Failure> {
    check_tol(args.common.tol)?;
    let plan = SweepPlan {
        axis: args.axis,
        lo: args.lo,
        hi: args.hi,
        steps: args.steps,
        n: args.n,
        kx: args.kx,
        kp: args.kp,
    };
    plan.validate().map_err(|m| Failure::new(EXIT_USAGE, m))?;
    let rows = run_sweep(&plan, args.common.tol);
    if rows.iter().all(|r| !r.valid) {
        eprintln!("gaussian-eof: warning: no grid point is a valid covariance matrix");
    }
    let digits = usize::from(args.digits);
    let rendered = match args.format {
        TableFormat::Csv => {
            let mut out = String::with_capacity(64 * (rows.len() + 1));
            out.push_str(CSV_HEADER);
            out.push('\n');
            for r in &rows {
                out.push_str(&csv_row(r, digits));
                out.push('\n');
            }
            out
        }
        TableFormat::Json => to_json(&rows)?,
    };
    emit(&args.common.out, &rendered)?;
    Ok(0)
}
