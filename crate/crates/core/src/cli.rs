//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a checked property is violated (open
//! cycle, invalid walk, residual over tolerance, rejected posting), 2 for
//! usage, I/O and parse errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::cost::{self, Ratio};
use crate::flows::{self, Window};
use crate::ledger::{self, PostingRule, Trace};
use crate::potential::{self, PotentialError};
use crate::scheduler;
use crate::trace_io;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "ledger-kernel",
    version,
    about = "Discrete-ledger verification kernel"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate and check the reciprocal cost J(x) = (x + 1/x)/2 - 1
    #[command(subcommand)]
    Cost(CostCommand),
    /// Replay ledger traces
    #[command(subcommand)]
    Ledger(LedgerCommand),
    /// Clearing-window flows and cycle closure
    #[command(subcommand)]
    Flows(FlowsCommand),
    /// Scalar potentials of cleared flows
    #[command(subcommand)]
    Potential(PotentialCommand),
    /// Gray-code schedules on hypercubes
    #[command(subcommand)]
    Schedule(ScheduleCommand),
}

#[derive(Debug, Subcommand)]
enum CostCommand {
    /// Print J(x)
    Eval {
        #[arg(allow_negative_numbers = true)]
        x: f64,
    },
    /// Print worst-case identity residuals over a log grid
    Check {
        #[arg(long, default_value_t = 100)]
        grid: usize,
        #[arg(long, default_value_t = 1e-3)]
        lo: f64,
        #[arg(long, default_value_t = 1e3)]
        hi: f64,
    },
}

#[derive(Debug, Subcommand)]
enum LedgerCommand {
    /// Replay a trace and print final balances in quantum units
    Replay {
        file: PathBuf,
        /// Accept only postings of exactly one quantum
        #[arg(long)]
        strict_unit: bool,
    },
}

#[derive(Debug, Args)]
struct WindowArgs {
    file: PathBuf,
    /// First tick of the clearing window
    #[arg(long)]
    t0: usize,
    /// Number of ticks in the window
    #[arg(long)]
    window: usize,
}

#[derive(Debug, Subcommand)]
enum FlowsCommand {
    /// Check cycle closure of the cumulative flow over [t0, t0 + window)
    Verify(WindowArgs),
}

#[derive(Debug, Subcommand)]
enum PotentialCommand {
    /// Reconstruct the potential of the cumulative flow over [t0, t0 + window)
    Solve(WindowArgs),
}

#[derive(Debug, Subcommand)]
enum ScheduleCommand {
    /// Print the Gray-code Hamiltonian cycle of Q_d as a walk file
    Gray {
        #[arg(long)]
        dim: u32,
    },
    /// Check atomicity, completeness and uniqueness of a walk file
    Validate {
        file: PathBuf,
        /// Also require the last vertex to be adjacent to the first
        #[arg(long)]
        cyclic: bool,
    },
    /// Scan lcm(2^d, 45) for d = 1..=max
    Dims {
        #[arg(long)]
        max: u32,
        /// Additionally require d >= 3
        #[arg(long)]
        assume_linking: bool,
    },
}

/// Failure carrying its exit code; the message goes to stderr.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn violation(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_VIOLATION,
            message: message.into(),
        }
    }
}

type Outcome = Result<i32, Failure>;

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code. Normal output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Cost(cmd) => run_cost(cmd, out),
        Command::Ledger(LedgerCommand::Replay { file, strict_unit }) => {
            run_replay(&file, strict_unit, out)
        }
        Command::Flows(FlowsCommand::Verify(w)) => run_verify(&w, out),
        Command::Potential(PotentialCommand::Solve(w)) => run_solve(&w, out),
        Command::Schedule(cmd) => run_schedule(cmd, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

/// Formats a real with 12 significant digits, trailing zeros removed.
pub fn format_real(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_owned()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}

fn emit(out: &mut dyn Write, line: impl AsRef<str>) -> Result<(), Failure> {
    writeln!(out, "{}", line.as_ref()).map_err(|e| Failure::usage(format!("write failed: {e}")))
}

fn run_cost(cmd: CostCommand, out: &mut dyn Write) -> Outcome {
    match cmd {
        CostCommand::Eval { x } => {
            let r = Ratio::new(x).map_err(|e| Failure::usage(e.to_string()))?;
            emit(
                out,
                format!("J={}", format_real(cost::eval_cost(r).value())),
            )?;
            Ok(EXIT_OK)
        }
        CostCommand::Check { grid, lo, hi } => {
            if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
                return Err(Failure::usage("--lo must be below --hi"));
            }
            let report =
                cost::check_grid(grid, lo, hi).map_err(|e| Failure::usage(e.to_string()))?;
            emit(out, format!("grid={}", report.points))?;
            emit(
                out,
                format!("reciprocity_max={}", format_real(report.reciprocity)),
            )?;
            emit(
                out,
                format!("composition_max={}", format_real(report.composition)),
            )?;
            emit(out, format!("min_cost={}", format_real(report.min_cost)))?;
            emit(
                out,
                format!("calibration_max={}", format_real(report.calibration)),
            )?;
            let pass = report.passes();
            emit(
                out,
                format!("status={}", if pass { "pass" } else { "fail" }),
            )?;
            Ok(if pass { EXIT_OK } else { EXIT_VIOLATION })
        }
    }
}

fn load_trace(path: &Path) -> Result<Trace, Failure> {
    let bytes =
        std::fs::read(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    trace_io::parse_trace(&bytes).map_err(|e| Failure::usage(format!("{}:{e}", path.display())))
}

fn run_replay(path: &Path, strict_unit: bool, out: &mut dyn Write) -> Outcome {
    let trace = load_trace(path)?;
    let rule = if strict_unit {
        PostingRule::StrictUnit
    } else {
        PostingRule::Multiples
    };
    let replay =
        ledger::replay_with(&trace, rule).map_err(|e| Failure::violation(e.to_string()))?;
    for (node, k) in replay.final_state.balances() {
        emit(out, format!("{node}={k}"))?;
    }
    Ok(EXIT_OK)
}

fn window_flow<'t>(trace: &'t Trace, args: &WindowArgs) -> Result<flows::EdgeFlow<'t>, Failure> {
    let window = Window::new(args.t0, args.window).map_err(|e| Failure::usage(e.to_string()))?;
    let replay = ledger::replay(trace).map_err(|e| Failure::violation(e.to_string()))?;
    flows::accumulate(&replay.increments, window).map_err(|e| Failure::usage(e.to_string()))
}

fn run_verify(args: &WindowArgs, out: &mut dyn Write) -> Outcome {
    let trace = load_trace(&args.file)?;
    let flow = window_flow(&trace, args)?;
    let report = flows::check_cycle_closure(&flow, &trace.graph().cycle_basis())
        .map_err(|e| Failure::usage(e.to_string()))?;
    emit(out, format!("closed={}", report.closed()))?;
    for (cycle, flux) in &report.violations {
        emit(out, format!("violation cycle={cycle} flux={flux}"))?;
    }
    Ok(if report.closed() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

fn run_solve(args: &WindowArgs, out: &mut dyn Write) -> Outcome {
    let trace = load_trace(&args.file)?;
    let flow = window_flow(&trace, args)?;
    match potential::solve_potential(&flow) {
        Ok(p) => {
            for (node, k) in p.values() {
                emit(out, format!("{node}={k}"))?;
            }
            Ok(EXIT_OK)
        }
        Err(PotentialError::Closure { cycle, flux }) => {
            emit(out, "closed=false")?;
            emit(out, format!("violation cycle={cycle} flux={flux}"))?;
            Ok(EXIT_VIOLATION)
        }
        Err(e) => Err(Failure::violation(e.to_string())),
    }
}

fn run_schedule(cmd: ScheduleCommand, out: &mut dyn Write) -> Outcome {
    match cmd {
        ScheduleCommand::Gray { dim } => {
            let walk = scheduler::gray_cycle(dim).map_err(|e| Failure::usage(e.to_string()))?;
            out.write_all(trace_io::emit_walk(&walk).as_bytes())
                .map_err(|e| Failure::usage(format!("write failed: {e}")))?;
            Ok(EXIT_OK)
        }
        ScheduleCommand::Validate { file, cyclic } => {
            let bytes = std::fs::read(&file)
                .map_err(|e| Failure::usage(format!("{}: {e}", file.display())))?;
            let walk = trace_io::parse_walk(&bytes)
                .map_err(|e| Failure::usage(format!("{}:{e}", file.display())))?;
            let report = scheduler::validate_walk(&walk, cyclic)
                .map_err(|e| Failure::usage(e.to_string()))?;
            emit(out, format!("atomic={}", report.atomic))?;
            emit(out, format!("complete={}", report.complete))?;
            emit(out, format!("unique={}", report.unique))?;
            emit(out, format!("period={}", report.period))?;
            emit(out, format!("minimal_period={}", 1u64 << walk.dim))?;
            Ok(if report.valid() {
                EXIT_OK
            } else {
                EXIT_VIOLATION
            })
        }
        ScheduleCommand::Dims {
            max,
            assume_linking,
        } => {
            let rows = scheduler::dimension_scan(max).map_err(|e| Failure::usage(e.to_string()))?;
            emit(
                out,
                "d lcm passes_gap45 closed_form closed_form_agrees survives",
            )?;
            for r in &rows {
                emit(
                    out,
                    format!(
                        "{} {} {} {} {} {}",
                        r.dim,
                        r.lcm,
                        r.passes_gap45,
                        r.closed_form,
                        r.closed_form_agrees(),
                        r.survives(assume_linking)
                    ),
                )?;
            }
            let join = |v: Vec<u32>| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
            emit(out, format!("assume_linking={assume_linking}"))?;
            emit(
                out,
                format!(
                    "surviving={}",
                    join(scheduler::surviving_dimensions(&rows, assume_linking))
                ),
            )?;
            let mismatched: Vec<u32> = rows
                .iter()
                .filter(|r| !r.closed_form_agrees())
                .map(|r| r.dim)
                .collect();
            emit(out, format!("closed_form_discrepancy={}", join(mismatched)))?;
            Ok(EXIT_OK)
        }
    }
}
