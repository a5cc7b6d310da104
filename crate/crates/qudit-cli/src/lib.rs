//! Command-line front end: argument definitions and command execution.
//!
//! Every command returns a [`Report`]; `main` renders it and maps the verdict
//! to the exit code (0 success, 1 verification failure, 2 usage or input error).

mod commands;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use report::{Format, Report};

/// Exit code for a failed verification check.
pub const EXIT_VERIFY: i32 = 1;
/// Exit code for usage, parse or input errors.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "qudit", version, about = "Parallel Givens-rotation scheduling and non-local qudit gate verification")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Show a coupling graph, its canonical text form and spanning-tree count.
    Graph(GraphArgs),
    /// Minimum-depth state-synthesis schedule toward one level.
    ScheduleState(ScheduleArgs),
    /// Width-constrained Givens QR schedule and its step matrix.
    Qr(QrArgs),
    /// Achieved QR depth and lower bounds for widths 7 down to 1.
    Bounds(GraphArgs),
    /// Edge phases and the 3c-step schedule for a diagonal gate.
    Diag(DiagArgs),
    /// Non-local two-qudit protocols.
    #[command(subcommand)]
    Nonlocal(NonlocalCommand),
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Built-in graph name (rb87, cs133) or path to a graph file.
    #[arg(long, default_value = "rb87")]
    pub graph: String,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[arg(long, default_value = "rb87")]
    pub graph: String,
    /// Level that receives the state's amplitude.
    #[arg(long, default_value_t = 0)]
    pub target: usize,
    /// Rotations allowed per step; unconstrained when omitted.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Reduce seeded random states along the schedule and check the leakage.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Args)]
pub struct QrArgs {
    #[arg(long, default_value = "rb87")]
    pub graph: String,
    /// Rotations allowed per step; unconstrained when omitted.
    #[arg(long)]
    pub k: Option<usize>,
    /// Unitary to decompose (`dim n` header, then `re+imj` entries row by row).
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Decompose the matrix (or a seeded random SU(d)) and check the reconstruction.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Args)]
pub struct DiagArgs {
    #[arg(long, default_value = "rb87")]
    pub graph: String,
    /// Comma-separated phases θ_0..θ_{d−1}; seeded random trace-zero phases when omitted.
    #[arg(long, allow_hyphen_values = true)]
    pub phases: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Shift the phases to sum to zero instead of rejecting them.
    #[arg(long)]
    pub normalize: bool,
    /// Accepted for symmetry; diagonal solutions are always verified.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Subcommand)]
pub enum NonlocalCommand {
    /// ∧₁(V) with one e-bit and two c-bits.
    Cv(NonlocalArgs),
    /// Two-qudit state synthesis with d−1 e-bits in seven steps.
    Synth(NonlocalArgs),
    /// Controlled phase on the top levels.
    Phase(PhaseArgs),
    /// Full two-qudit unitary from its spectral decomposition.
    Full(NonlocalArgs),
}

#[derive(Debug, Args)]
pub struct NonlocalArgs {
    /// Qudit dimension (3 for cv and synth, 2 for full when omitted).
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Evaluate one seeded measurement branch instead of all of them.
    #[arg(long)]
    pub sample: bool,
    /// Accepted for symmetry; protocols are always verified.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Args)]
pub struct PhaseArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Phase angle in radians.
    #[arg(long, default_value_t = std::f64::consts::PI, allow_hyphen_values = true)]
    pub phi: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub sample: bool,
}

/// Failure that prevents a command from producing a report.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Library(#[from] qudit::Error),
    #[error("{0}")]
    Usage(String),
}

/// Runs a parsed command.
pub fn run(cli: &Cli) -> Result<Report, CliError> {
    commands::dispatch(&cli.command)
}

/// Parses `args` (including the program name), runs, and returns `(exit code, stdout, stderr)`.
pub fn run_args<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.to_string();
            return if code == 0 {
                (0, text, String::new())
            } else {
                (code, String::new(), text)
            };
        }
    };
    match run(&cli) {
        Ok(report) => {
            let code = if report.passed { 0 } else { EXIT_VERIFY };
            (code, report.render(cli.format), String::new())
        }
        Err(e) => (EXIT_USAGE, String::new(), format!("error: {e}\n")),
    }
}
