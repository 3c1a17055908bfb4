//! Command-line front end: synthetic acquisition, fitting, stitching,
//! plotting and readout mitigation over record CSV and result JSON files.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration or usage error,
//! 3 inconsistent inputs, 4 failed consistency check.

pub mod commands;
pub mod config;
pub mod error;
pub mod svg;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Once;

use clap::{Args, Parser, Subcommand};

pub use config::DeviceConfig;
pub use error::{exit, CliError};

/// Environment variable capping the worker threads used for loss probes.
pub const THREADS_ENV: &str = "LINDBLAD_CALIB_THREADS";

#[derive(Debug, Parser)]
#[command(name = "lindblad-calib", version, about = "Simulate, fit and cross-check qubit relaxation and dephasing sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a shot-sampled record from claimed device parameters.
    Simulate(SimulateArgs),
    /// Fit chain parameters to one or more records.
    Fit(FitArgs),
    /// Cross-check overlapping fits and optionally assemble a larger chain.
    Stitch(StitchArgs),
    /// Draw record probabilities and fitted populations as SVG.
    Plot(PlotArgs),
    /// Undo readout confusion in a record.
    Mitigate(MitigateArgs),
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Delay points per sweep.
    #[arg(long, default_value_t = 75)]
    pub steps: usize,
    #[arg(long = "dt-us", default_value_t = 4.0)]
    pub dt_us: f64,
    #[arg(long = "t0-us", default_value_t = 0.0)]
    pub t0_us: f64,
    /// Ratio of actual to nominal delay.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Device config JSON; the built-in three-qubit device when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// t1, t1-10, t1-01, t1-idle, t2e, t2s, t2s-hx or t2s-hi.
    #[arg(long)]
    pub kind: String,
    /// Number of qubits in the simulated register.
    #[arg(long, default_value_t = 1)]
    pub qubits: usize,
    /// Device index of the register's first qubit.
    #[arg(long = "first-qubit", default_value_t = 0)]
    pub first_qubit: usize,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Shots per delay point; 0 writes exact populations.
    #[arg(long, default_value_t = 8192)]
    pub shots: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Record CSV path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Ground-truth parameter JSON; defaults to `<out>.truth.json`.
    #[arg(long = "truth-out")]
    pub truth_out: Option<PathBuf>,
    /// Also write readout calibration counts (JSON) drawn from the config's
    /// flip probabilities.
    #[arg(long = "calibration-out")]
    pub calibration_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Record CSV files, all over the same qubits.
    #[arg(required = true)]
    pub records: Vec<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Readout calibration counts JSON; records are mitigated before fitting.
    #[arg(long)]
    pub confusion: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 300)]
    pub iters: usize,
    #[arg(long, default_value_t = 3)]
    pub restarts: usize,
    /// Hold couplings at their claimed values.
    #[arg(long = "freeze-coupling")]
    pub freeze_coupling: bool,
    /// Slot names to hold, e.g. `log_t[0]`.
    #[arg(long, value_delimiter = ',')]
    pub freeze: Vec<String>,
    /// Keep weakly identifiable slots free.
    #[arg(long = "no-auto-freeze")]
    pub no_auto_freeze: bool,
    /// Result JSON path.
    #[arg(long, default_value = "fit.json")]
    pub out: PathBuf,
    /// Also write the claimed-versus-fit table here.
    #[arg(long = "table-out")]
    pub table_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StitchArgs {
    /// Fit result JSON files.
    pub fits: Vec<PathBuf>,
    /// Add the published single, pair and triple fits (`held` or `refit`
    /// for the triple's couplings).
    #[arg(long)]
    pub canned: Option<String>,
    #[arg(long = "omega-tol")]
    pub omega_tol: Option<f64>,
    #[arg(long = "t1-tol")]
    pub t1_tol: Option<f64>,
    #[arg(long = "gamma-tol")]
    pub gamma_tol: Option<f64>,
    #[arg(long = "temperature-tol")]
    pub temperature_tol: Option<f64>,
    #[arg(long = "j-tol")]
    pub j_tol: Option<f64>,
    /// Count estimates of held slots in the spreads.
    #[arg(long = "include-frozen")]
    pub include_frozen: bool,
    /// Report JSON path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Contiguous device qubits to assemble, e.g. `0,1,2`.
    #[arg(long, value_delimiter = ',')]
    pub predict: Vec<usize>,
    /// Weight merged estimates by inverse fit loss.
    #[arg(long = "loss-weighted")]
    pub loss_weighted: bool,
    /// Composite parameter JSON path.
    #[arg(long = "predict-out")]
    pub predict_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    pub record: PathBuf,
    /// Fit result whose model populations are drawn as lines.
    #[arg(long)]
    pub fit: Option<PathBuf>,
    /// Delay scale used for the model curves; the record's own by default.
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long, default_value = "plot.svg")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MitigateArgs {
    pub record: PathBuf,
    /// Readout calibration counts JSON.
    #[arg(long, conflicts_with = "flips")]
    pub confusion: Option<PathBuf>,
    /// Per-qubit flip probabilities instead of measured calibration.
    #[arg(long, value_delimiter = ',')]
    pub flips: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

static POOL: Once = Once::new();

/// Sizes the global worker pool from [`THREADS_ENV`], once per process.
pub fn init_threads() {
    POOL.call_once(|| {
        if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0) {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    });
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Human-readable output goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::CONFIG } else { exit::SUCCESS };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    init_threads();
    let result = match &cli.command {
        Command::Simulate(a) => commands::simulate(a, out),
        Command::Fit(a) => commands::fit(a, out),
        Command::Stitch(a) => commands::stitch(a, out),
        Command::Plot(a) => commands::plot(a, out),
        Command::Mitigate(a) => commands::mitigate(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code
        }
    }
}
