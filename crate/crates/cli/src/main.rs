//! `lfrl` — light-field motion deblurring from the command line.
//!
//! Six subcommands cover the full experimental loop: `synth` renders ground
//! truth from a scene description, `blur` applies the trajectory forward
//! model to a stored field, `deblur` runs the regularized Richardson-Lucy
//! inversion, `metrics` scores a result against truth, `sweep` maps blur
//! strength across candidate velocities, and `view` exports sub-aperture
//! images. Every command is bit-reproducible for fixed inputs and seed.
//!
//! Process exit codes: 0 success, 2 configuration error, 3 I/O or file-
//! format error, 4 numerical failure during iteration.

mod commands;
mod options;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use options::CommonOpts;

#[derive(Parser)]
#[command(
    name = "lfrl",
    version,
    about = "Light-field camera-motion deblurring via trajectory-aware Richardson-Lucy"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutDir {
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct OutFile {
    /// Output file path.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Render a scene: still.lfb always, blurred.lfb with --velocity,
    /// noisy.lfb with --photon-peak, each with a central-view PNG.
    Synth {
        /// Scene description file.
        scene: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        out: OutDir,
    },
    /// Apply the trajectory blur model to a stored light field.
    Blur {
        /// Input light field (.lfb).
        input: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        out: OutDir,
    },
    /// Invert trajectory blur with regularized Richardson-Lucy iteration.
    Deblur {
        /// Blurred input light field (.lfb).
        input: PathBuf,
        /// Ground-truth light field; enables the db diagnostics column.
        #[arg(long, value_name = "FILE")]
        truth: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        out: OutDir,
    },
    /// Score a light field against ground truth (CSV on stdout path).
    Metrics {
        /// Light field under test (.lfb).
        test: PathBuf,
        /// Ground-truth light field (.lfb).
        truth: PathBuf,
        /// Pixel patch "is,it,u0,v0,u1,v1"; repeatable.
        #[arg(long, value_name = "PATCH")]
        patch: Vec<String>,
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        out: OutFile,
    },
    /// Render a scene at several velocities and tabulate blur strength.
    Sweep {
        /// Scene description file.
        scene: PathBuf,
        /// Semicolon-separated velocity list, each "tx,ty,tz,rx,ry,rz".
        #[arg(long, value_name = "LIST")]
        velocities: String,
        /// Optional pixel patch "is,it,u0,v0,u1,v1" for the energy metric
        /// (default: full central view).
        #[arg(long, value_name = "PATCH")]
        patch: Option<String>,
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        out: OutFile,
    },
    /// Export one sub-aperture view (or the full mosaic) as 16-bit PNG.
    View {
        /// Input light field (.lfb).
        input: PathBuf,
        /// View index along s (default: center).
        #[arg(long)]
        s: Option<usize>,
        /// View index along t (default: center).
        #[arg(long)]
        t: Option<usize>,
        /// Tile all views into one mosaic image.
        #[arg(long)]
        mosaic: bool,
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        out: OutFile,
    },
}

fn run(cli: Cli) -> lfrl_core::Result<()> {
    match cli.command {
        Command::Synth { scene, common, out } => {
            commands::cmd_synth(&scene, &common.resolve()?, &out.out)
        }
        Command::Blur { input, common, out } => {
            commands::cmd_blur(&input, &common.resolve()?, &out.out)
        }
        Command::Deblur { input, truth, common, out } => {
            commands::cmd_deblur(&input, truth.as_deref(), &common.resolve()?, &out.out)
        }
        Command::Metrics { test, truth, patch, common, out } => {
            commands::cmd_metrics(&test, &truth, &patch, &common.resolve()?, &out.out)
        }
        Command::Sweep { scene, velocities, patch, common, out } => {
            commands::cmd_sweep(&scene, &velocities, patch.as_deref(), &common.resolve()?, &out.out)
        }
        Command::View { input, s, t, mosaic, common, out } => {
            commands::cmd_view(&input, s, t, mosaic, &common.resolve()?, &out.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code(&e) as u8)
        }
    }
}
