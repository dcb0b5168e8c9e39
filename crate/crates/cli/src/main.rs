//! `finrot`: rotate square images with the finite-oscillator kernel.

mod angle;
mod commands;
mod selftest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use angle::Unit;

/// Exit statuses.
pub mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 2;
    pub const IO: u8 = 3;
    pub const FORMAT: u8 = 4;
    pub const NUMERIC: u8 = 5;
}

#[derive(Debug, Parser)]
#[command(name = "finrot", version, about = "Unitary rotation of square pixellated images")]
pub struct Cli {
    /// Worker threads for kernel builds and products (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rotate a PNG/PGM/PPM picture or a CSV data-image.
    Rotate(RotateArgs),
    /// Build a kernel and store it in the cache (or a given file).
    Kernel(KernelArgs),
    /// Write a test pattern as picture and CSV.
    Pattern(PatternArgs),
    /// Over/undershoot statistics of rotated patterns or of an image.
    Analyze(AnalyzeArgs),
    /// Run the invariant suites and report.
    Selftest(SelftestArgs),
}

#[derive(Debug, Clone, Args)]
pub struct AngleArgs {
    /// Rotation angle: radians, `pi/8`, `3pi/4`, `45deg`.
    #[arg(long, short = 'a', allow_hyphen_values = true)]
    angle: String,

    /// Read a bare number as degrees.
    #[arg(long)]
    degrees: bool,
}

impl AngleArgs {
    pub fn radians(&self) -> Result<f64, String> {
        let unit = if self.degrees { Unit::Degrees } else { Unit::Radians };
        angle::parse_angle(&self.angle, unit)
    }
}

#[derive(Debug, Clone, Args)]
pub struct CacheArgs {
    /// Kernel cache directory [env: FINROT_CACHE_DIR; default: <tmp>/finrot-kernels].
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

impl CacheArgs {
    pub fn dir(&self) -> PathBuf {
        self.cache_dir
            .clone()
            .or_else(|| std::env::var_os("FINROT_CACHE_DIR").map(PathBuf::from))
            .unwrap_or_else(|| std::env::temp_dir().join("finrot-kernels"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DisplayMode {
    /// One affine map over all channels.
    NormalizeJoint,
    /// A separate affine map per channel.
    NormalizePerChannel,
    /// Clamp to [0, 1].
    Clip,
    /// Unprocessed data values; CSV output only.
    Raw,
}

#[derive(Debug, Args)]
pub struct RotateArgs {
    /// Input picture (.png, .pgm, .ppm) or data-image (.csv).
    input: PathBuf,

    /// Output picture, or .csv for values.
    #[arg(long, short = 'o')]
    output: PathBuf,

    #[command(flatten)]
    angle: AngleArgs,

    /// How data values are brought into [0, 1].
    #[arg(long, short = 'm', value_enum, default_value_t = DisplayMode::NormalizeJoint)]
    mode: DisplayMode,

    /// Also write the unprocessed rotated values to this CSV.
    #[arg(long)]
    raw_csv: Option<PathBuf>,

    #[command(flatten)]
    cache: CacheArgs,

    /// Build the kernel in memory without touching the cache.
    #[arg(long)]
    no_cache: bool,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// Screen side N.
    #[arg(long = "n", visible_alias = "N", short = 'N')]
    side: usize,

    #[command(flatten)]
    angle: AngleArgs,

    /// Write here instead of the cache directory.
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,

    #[command(flatten)]
    cache: CacheArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PatternChoice {
    /// Centre row of ones (odd N).
    Delta,
    /// Upper half of ones (even N).
    Step,
    /// Capital letter R (N ≥ 8).
    LetterR,
}

#[derive(Debug, Args)]
pub struct PatternArgs {
    #[arg(value_enum)]
    kind: PatternChoice,

    /// Screen side N.
    #[arg(long = "n", visible_alias = "N", short = 'N')]
    side: usize,

    /// Output picture; a CSV with the same stem is written beside it.
    #[arg(long, short = 'o')]
    output: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepPattern {
    Delta,
    Step,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Pattern to rotate and measure at every side in --ns.
    #[arg(long, value_enum, conflicts_with = "input", requires_all = ["sides", "angle"])]
    pattern: Option<SweepPattern>,

    /// Comma-separated screen sides for a sweep.
    #[arg(long = "ns", visible_alias = "Ns", value_delimiter = ',')]
    sides: Vec<usize>,

    /// Rotation angle for a sweep.
    #[arg(long, short = 'a', allow_hyphen_values = true)]
    angle: Option<String>,

    /// Read a bare angle as degrees.
    #[arg(long)]
    degrees: bool,

    /// Measure this image (picture or CSV) as it is.
    #[arg(long, short = 'i')]
    input: Option<PathBuf>,

    /// Sweep table CSV (N,s,S,undershoot,overshoot).
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,

    /// Anti-diagonal profile CSV; a directory in sweep mode.
    #[arg(long)]
    profile: Option<PathBuf>,

    #[command(flatten)]
    cache: CacheArgs,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Largest spin j checked (integer or half-integer).
    #[arg(long, default_value = "4")]
    j: String,

    /// Test hook: add this to one kernel entry before the unitarity suite.
    #[arg(long, hide = true)]
    perturb: Option<f64>,
}

/// An error with the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: exit::USAGE, message: message.into() }
    }
}

impl From<finrot::Error> for Failure {
    fn from(e: finrot::Error) -> Self {
        use finrot::Error as E;
        let code = match &e {
            E::Domain(_) => exit::USAGE,
            E::Consistency(_) => exit::NUMERIC,
            e if e.is_io() => exit::IO,
            _ => exit::FORMAT,
        };
        Self { code, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("finrot: error: --threads must be at least 1");
            return ExitCode::from(exit::USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("finrot: error: cannot start {n} worker threads: {e}");
            return ExitCode::from(exit::USAGE);
        }
    }
    let result = match &cli.command {
        Command::Rotate(a) => commands::rotate(a),
        Command::Kernel(a) => commands::kernel(a),
        Command::Pattern(a) => commands::pattern(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Selftest(a) => selftest::run(a),
    };
    match result {
        Ok(()) => ExitCode::from(exit::OK),
        Err(f) => {
            eprintln!("finrot: error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
