mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Phonon-mediated STIRAP toward half-excited Dicke states of trapped ions.
/// Angles are in radians throughout.
#[derive(Parser, Debug)]
#[command(name = "dicke-stirap", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Closed-form dark state at a mixing angle or pair of sideband amplitudes
    Darkstate(DarkArgs),
    /// Integrate a pulse schedule and record collective-spin observables
    Evolve(EvolveArgs),
    /// Spin noise of the state left by pulses truncated at increasing times
    ScanNoise(ScanArgs),
    /// Two-ion parity oscillation and the fidelity derived from it
    Parity(ParityArgs),
    /// Witness <J_b^2> + <J_c^2> and the J_phi^2 azimuth scan
    Witness(WitnessArgs),
    /// Fidelity bounds from measured witness and populations
    Bounds(BoundsArgs),
    /// Parameter sweep over ion number, pulse length and detuning ratio
    Sweep(SweepArgs),
    /// Run the acceptance checks and print a pass/fail table
    Repro(ReproArgs),
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// key = value file supplying flags not given on the command line
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// CSV destination (stdout if omitted)
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
    /// Key-value summary destination (also echoed to stderr)
    #[arg(long, value_name = "FILE")]
    pub summary: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Strict,
    Experimental,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum RampArg {
    Linear,
    Smoothstep,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Reduced,
    Full,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum StateArg {
    /// Target Dicke state
    Ideal,
    /// Reduced-model state at the middle of the schedule
    Midpoint,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    X,
    Y,
    Z,
}

/// Pulse schedule. A preset supplies defaults; explicit flags override them.
#[derive(Args, Debug, Clone)]
pub struct ScheduleArgs {
    #[arg(long = "adiabatic-preset", value_enum, default_value = "strict")]
    pub preset: Preset,
    /// Pulse length T
    #[arg(long)]
    pub t_total: Option<f64>,
    /// Coupling scale eta*Omega_bar, in radians per unit time
    #[arg(long)]
    pub omega_bar: Option<f64>,
    /// Detuning in units of eta*Omega_bar
    #[arg(long)]
    pub delta_ratio: Option<f64>,
    #[arg(long, value_enum, default_value = "linear")]
    pub ramp: RampArg,
    /// Phonon cut-off of the full model (default N/2 + 4)
    #[arg(long)]
    pub n_max: Option<usize>,
}

#[derive(Args, Debug)]
pub struct DarkArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Mixing angle theta in radians: Omega_b = 1 - cos(theta), Omega_r = 1 + cos(theta)
    #[arg(long, conflicts_with_all = ["omega_r", "omega_b"])]
    pub theta: Option<f64>,
    #[arg(long, requires = "omega_b")]
    pub omega_r: Option<f64>,
    #[arg(long, requires = "omega_r")]
    pub omega_b: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[arg(long, value_enum, default_value = "reduced")]
    pub model: ModelArg,
    /// Integrator step (default from the detuning and coupling scale)
    #[arg(long)]
    pub dt: Option<f64>,
    /// Number of output samples
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
    /// Stop the pulse at this time
    #[arg(long)]
    pub truncate: Option<f64>,
    /// Run the ramp backwards
    #[arg(long)]
    pub reverse: bool,
    /// Global factor on ladder couplings (reduced model)
    #[arg(long, default_value_t = 1.0)]
    pub coupling_scale: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    /// Number of evenly spaced cut times on [0, T]
    #[arg(long, default_value_t = 41)]
    pub cuts: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ParityArgs {
    #[arg(long, value_enum, default_value = "midpoint")]
    pub state: StateArg,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    /// Analysis phases, evenly spaced on [0, 2 pi)
    #[arg(long, default_value_t = 32)]
    pub phases: usize,
    /// Shots per phase (exact expectation values if omitted)
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct WitnessArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "midpoint")]
    pub state: StateArg,
    /// Axis of the target Dicke state; the witness uses the other two
    #[arg(long, value_enum, default_value = "x")]
    pub axis: AxisArg,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    /// Shots per setting; four ions, x axis only (exact if omitted)
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    /// File with W, sigma_W, p_list, sigma_list, j_M
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,4")]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "10,20,40")]
    pub t_total: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "20")]
    pub delta_ratio: Vec<f64>,
    /// Coupling scale eta*Omega_bar, in radians per unit time
    #[arg(long, default_value_t = 2.0 * std::f64::consts::PI)]
    pub omega_bar: f64,
    #[arg(long, value_enum, default_value = "linear")]
    pub ramp: RampArg,
    #[arg(long, value_enum, default_value = "reduced")]
    pub model: ModelArg,
    /// Worker threads (default: all cores)
    #[arg(long)]
    pub threads: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct ReproArgs {
    /// Run only these criteria
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

fn main() -> ExitCode {
    let argv = match config::merge_config_file(std::env::args().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
