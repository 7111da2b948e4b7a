mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wavedge::Error;

const EXIT_CODES: &str = "\
Exit status:
  0  success
  1  I/O error
  2  invalid parameter or command line
  3  malformed input data";

/// Wavelet edge enhancement for images and labeled image datasets.
#[derive(Debug, Parser)]
#[command(name = "wavedge", version, after_help = EXIT_CODES)]
pub struct Cli {
    /// JSON run configuration. Flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Haar-decompose an image and report per-subband energy.
    Decompose(DecomposeArgs),
    /// Reconstruct from detail subbands only.
    EnhanceNaive(NaiveArgs),
    /// Modulus-maxima edge enhancement.
    EnhanceMm(MmArgs),
    /// Enhance a whole dataset.
    Batch(BatchArgs),
    /// Describe an image, a dataset or a provenance manifest.
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// PGM or PPM image.
    pub input: Option<PathBuf>,
    /// Decomposition depth [default: 2]
    #[arg(long, short = 'J')]
    pub levels: Option<usize>,
    /// Write WVQ1 subband files and index.json here.
    #[arg(long, value_name = "DIR")]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NaiveArgs {
    pub input: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Decomposition depth [default: 2]
    #[arg(long, short = 'J')]
    pub levels: Option<usize>,
    /// rescale or clamp [default: rescale]
    #[arg(long)]
    pub renorm: Option<String>,
}

#[derive(Debug, Args)]
pub struct MmArgs {
    pub input: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Gaussian smoothing width [default: 1.0]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// fixed:T or quantile:Q [default: quantile:0.75]
    #[arg(long)]
    pub threshold: Option<String>,
    /// mask or angle [default: mask]
    #[arg(long)]
    pub inject: Option<String>,
    /// clamp or rescale [default: clamp]
    #[arg(long)]
    pub renorm: Option<String>,
    /// Write the seven intermediate images here.
    #[arg(long, value_name = "DIR")]
    pub dump_stages: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    /// idx, cifar_bin or image_dir; guessed from the inputs when omitted.
    #[arg(long)]
    pub format: Option<String>,
    /// IDX: images then labels. CIFAR-10: batch files. image_dir: root.
    #[arg(long, num_args = 1..)]
    pub input: Vec<PathBuf>,
    /// identity, naive or mm [default: mm]
    #[arg(long)]
    pub method: Option<String>,
    /// Output directory.
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
    /// Parallel workers [default: 1]
    #[arg(long, short = 'j')]
    pub workers: Option<usize>,
    /// Records held in memory at once [default: 32 per worker]
    #[arg(long)]
    pub chunk_size: Option<usize>,
    /// same or image_dir [default: same]
    #[arg(long)]
    pub codec: Option<String>,
    #[arg(long, short = 'J')]
    pub levels: Option<usize>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub threshold: Option<String>,
    #[arg(long)]
    pub inject: Option<String>,
    #[arg(long)]
    pub renorm: Option<String>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    /// Dataset format; without it a single path is treated as an image,
    /// a manifest, or an image directory.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => 1,
        Error::Param(_) | Error::Shape(_) => 2,
        Error::Format(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("wavedge: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
