//! Command-line driver for the qubit coupled-cluster solver.
//!
//! Subcommands: rank | optimize | scan | factorize | exact | taper.
//! Exit codes: 0 ok, 2 input error, 3 convergence warning, 4 internal
//! assertion failure.

mod commands;
mod output;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(
    name = "qcc",
    about = "Qubit coupled-cluster ground-state solver",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Worker threads for geometry/generator parallelism (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,

    /// Seed for every stochastic restart; a fixed seed gives byte-identical output.
    #[arg(long, global = true, default_value_t = 52417)]
    pub seed: u64,

    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output format for report-producing commands.
    #[arg(long, global = true, value_parser = ["csv", "json"], default_value = "csv")]
    pub format: String,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizerArgs {
    /// Gradient max-norm convergence tolerance.
    #[arg(long = "tol-grad", default_value_t = 1e-8)]
    pub tol_grad: f64,

    /// Multi-start restarts for mean-field solves.
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,

    /// Spin-symmetry penalty weight (Hartree per unit of <S^2>).
    #[arg(long, default_value_t = 2.0)]
    pub penalty: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Screen a pool of entangler generators against the mean field.
    Rank {
        /// Hamiltonian file.
        #[arg(long)]
        ham: PathBuf,
        /// Generator pool: "2q", "all", or an explicit length.
        #[arg(long, default_value = "2q")]
        pool: String,
        /// Energy-lowering finalists per tier.
        #[arg(long, default_value_t = 32)]
        top: usize,
        /// Screen against the spin-constrained mean field.
        #[arg(long)]
        constrained: bool,
        /// First-derivative tier threshold.
        #[arg(long = "tol-grad-tier", default_value_t = 1e-6)]
        grad_tol: f64,
        /// Second-derivative tier threshold.
        #[arg(long = "tol-curv", default_value_t = 1e-6)]
        curv_tol: f64,
        /// Discontinuity detection tolerance.
        #[arg(long = "tol-disc", default_value_t = 1e-4)]
        disc_tol: f64,
        /// Polar angles within this of 0/pi trigger azimuth resolution.
        #[arg(long = "pole-tol", default_value_t = 1e-6)]
        angle_pole_tol: f64,
        /// Probe amplitude for resolution and discontinuity tests.
        #[arg(long = "probe-tau", default_value_t = 1e-3)]
        probe_tau: f64,
        /// Eigenvalue cutoff of the relaxation pseudo-inverse.
        #[arg(long = "pinv-cutoff", default_value_t = 1e-10)]
        pinv_cutoff: f64,
        /// Restarts per energy-lowering minimization.
        #[arg(long = "delta-restarts", default_value_t = 12)]
        delta_restarts: usize,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Jointly optimize entangler amplitudes and Bloch angles.
    Optimize {
        #[arg(long)]
        ham: PathBuf,
        /// Entangler list file: one Pauli string per line.
        #[arg(long)]
        ents: PathBuf,
        /// Seed the angles from the spin-constrained mean field.
        #[arg(long)]
        constrained: bool,
        /// Restarts for the joint minimization.
        #[arg(long = "qcc-restarts", default_value_t = 32)]
        qcc_restarts: usize,
        /// Joint gradient tolerance for the correlated minimization.
        #[arg(long = "tol-grad-qcc", default_value_t = 1e-7)]
        tol_grad_qcc: f64,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Sweep a directory of Hamiltonian files (one per geometry).
    Scan {
        /// Directory of .ham files with R=<value> tags.
        #[arg(long)]
        dir: PathBuf,
        /// Entangler list file applied at every geometry.
        #[arg(long)]
        ents: PathBuf,
        #[arg(long = "qcc-restarts", default_value_t = 32)]
        qcc_restarts: usize,
        /// Joint gradient tolerance for the correlated minimization.
        #[arg(long = "tol-grad-qcc", default_value_t = 1e-7)]
        tol_grad_qcc: f64,
        #[command(flatten)]
        opt: OptimizerArgs,
    },
    /// Factorize exp(-i t P) into two-qubit factors.
    Factorize {
        /// Pauli word, e.g. "Z3 Y2 Z1 X0".
        word: String,
    },
    /// Exact spectrum of a Hamiltonian file by dense diagonalization.
    Exact {
        #[arg(long)]
        ham: PathBuf,
        /// Print the full spectrum instead of the ground energy only.
        #[arg(long)]
        spectrum: bool,
    },
    /// Reduce stationary qubits to a Z eigenvalue sector.
    Taper {
        #[arg(long)]
        ham: PathBuf,
        /// Sector assignment, e.g. "2:-1,5:+1".
        #[arg(long)]
        sector: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global();
    }
    match std::panic::catch_unwind(|| commands::run(&cli)) {
        Ok(Ok(code)) => code,
        Ok(Err(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
        Err(_) => {
            eprintln!("error: internal assertion failure");
            ExitCode::from(4)
        }
    }
}
