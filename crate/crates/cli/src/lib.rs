//! Command-line driver for the single-pixel imaging toolkit.

// Negated float comparisons reject NaN as well as the out-of-range case.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod commands;
pub mod config;
pub mod dense;

use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "spix",
    version,
    about = "Single-pixel compressive imaging: simulate, reconstruct, evaluate"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate a single-pixel acquisition of a grayscale image.
    Acquire {
        /// Input image (PGM, or an f64 grid dump).
        #[arg(long)]
        image: PathBuf,
        /// Center-crop the image to SIZE x SIZE first (power of two).
        #[arg(long, default_value_t = 0)]
        crop: usize,
        /// Measurement ratio M/N in (0, 1].
        #[arg(long)]
        ratio: Option<f64>,
        /// Absolute number of measurements (overrides --ratio).
        #[arg(long)]
        measurements: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Additive white Gaussian noise level.
        #[arg(long, default_value_t = 0.0)]
        noise_sigma: f64,
        /// Output measurement file.
        #[arg(long)]
        out: PathBuf,
        /// Also dump the (cropped) reference grid for later evaluation.
        #[arg(long)]
        save_reference: Option<PathBuf>,
    },
    /// Reconstruct an image from a measurement file.
    Reconstruct {
        #[arg(long)]
        measurements: PathBuf,
        /// B-spline order of the signal model (0..=5).
        #[arg(long, default_value_t = 0)]
        order: u32,
        /// Wavelet bank: bior2.2, bior4.4, haar.
        #[arg(long, default_value = "bior2.2")]
        bank: String,
        /// Wavelet decomposition depth.
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// l1 regularization weight.
        #[arg(long, default_value_t = 1e-3)]
        lambda: f64,
        #[arg(long, default_value_t = 2000)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-6)]
        rel_tol: f64,
        /// Continuation stages (0 disables the lambda schedule).
        #[arg(long, default_value_t = 6)]
        continuation_stages: usize,
        /// Starting lambda as a fraction of the all-zero threshold.
        #[arg(long, default_value_t = 0.5)]
        continuation_start: f64,
        /// Output directory (SPIX_OUT_DIR overrides the default).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Bit depth of the rendered PGM (8 or 16).
        #[arg(long, default_value_t = 16)]
        bits: u8,
        /// Write per-iteration progress lines to this file.
        #[arg(long)]
        progress_log: Option<PathBuf>,
    },
    /// Compare two images (PGM or grid dumps) with PSNR and SSIM.
    Evaluate {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Peak value of the intensity scale.
        #[arg(long, default_value_t = 1.0)]
        peak: f64,
    },
    /// Run a (ratio x order) experiment table from a config file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output directory override (also SPIX_OUT_DIR).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Print cross-correlation taps and wavelet filter banks.
    Filters {
        /// Spline orders to print (default: all).
        #[arg(long)]
        order: Vec<u32>,
        /// Banks to print (default: bior2.2 and bior4.4).
        #[arg(long)]
        bank: Vec<String>,
    },
    /// Verify adjoint identities, dense equivalence and reconstruction
    /// round trips.
    Selfcheck,
}

/// Runs a parsed command; returns the process exit code.
pub fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Acquire {
            image,
            crop,
            ratio,
            measurements,
            seed,
            noise_sigma,
            out,
            save_reference,
        } => {
            commands::cmd_acquire(
                &image,
                crop,
                ratio,
                measurements,
                seed,
                noise_sigma,
                &out,
                save_reference.as_deref(),
            )?;
            Ok(0)
        }
        Command::Reconstruct {
            measurements,
            order,
            bank,
            levels,
            lambda,
            max_iters,
            rel_tol,
            continuation_stages,
            continuation_start,
            out_dir,
            bits,
            progress_log,
        } => {
            let out_dir = commands::resolve_out_dir(out_dir, std::path::Path::new("recon_out"));
            commands::cmd_reconstruct(
                &measurements,
                order,
                &bank,
                levels,
                lambda,
                max_iters,
                rel_tol,
                continuation_stages,
                continuation_start,
                &out_dir,
                bits,
                progress_log.as_deref(),
            )?;
            Ok(0)
        }
        Command::Evaluate {
            reference,
            test,
            peak,
        } => {
            println!("{}", commands::cmd_evaluate(&reference, &test, peak)?);
            Ok(0)
        }
        Command::Sweep { config, out_dir } => {
            commands::cmd_sweep(&config, out_dir)?;
            Ok(0)
        }
        Command::Filters { order, bank } => {
            print!("{}", commands::cmd_filters(&order, &bank)?);
            Ok(0)
        }
        Command::Selfcheck => {
            let mut stdout = std::io::stdout();
            let failures = commands::cmd_selfcheck(&mut stdout)?;
            Ok(if failures == 0 { 0 } else { 1 })
        }
    }
}
