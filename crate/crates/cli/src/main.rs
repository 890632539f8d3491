//! `qbm`: train, sample and inspect gate-based quantum Boltzmann machines.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qbm_core::model::{AncillaLayout, QbmShape};
use qbm_core::optimizer::NodeMode;
use qbm_core::pauli::DEFAULT_DENSE_CAP;
use qbm_core::validation::Fault;

use config::{LayoutArg, NodeArg, RunFlags};

#[derive(Parser, Debug)]
#[command(name = "qbm", version, about = "Quantum Boltzmann machine ground-state toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FaultArg {
    Circuit,
    Gradient,
    Decomposition,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train a QBM trial state by gradient descent and write a run directory
    Train(RunFlags),
    /// Solve the Hamiltonian exactly and print the ground energy
    Exact {
        #[arg(long)]
        hamiltonian: PathBuf,
        /// Number of basis states to list
        #[arg(long, default_value_t = 8)]
        top: usize,
        /// Largest qubit count handled
        #[arg(long, default_value_t = DEFAULT_DENSE_CAP)]
        cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report gate counts, width, parameter count and shot budget
    Resources {
        #[arg(long)]
        n_visible: usize,
        /// Defaults to the visible layer size
        #[arg(long)]
        n_hidden: Option<usize>,
        #[arg(long, value_enum, default_value = "per-pair")]
        layout: LayoutArg,
        #[arg(long, value_enum, default_value = "sign")]
        node: NodeArg,
        /// C in the C * 2^n shot heuristic
        #[arg(long, default_value_t = qbm_core::decomposition::DEFAULT_SHOT_CONSTANT)]
        shot_constant: u64,
        /// Print JSON instead of text
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the oracle self-check suites
    Validate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
    },
    /// Sample the QBM circuit and compare against the exact distribution
    Sample {
        #[command(flatten)]
        flags: RunFlags,
        /// JSON parameter file (defaults to a fresh seeded initialization)
        #[arg(long)]
        params: Option<PathBuf>,
        /// Keep sampling until this many shots pass post-selection; --shots
        /// then caps the total
        #[arg(long)]
        accepted: Option<u64>,
    },
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Train(flags) => commands::train(&flags)?,
        Command::Exact { hamiltonian, top, cap, out } => commands::exact(&hamiltonian, top, cap, out.as_ref())?,
        Command::Resources {
            n_visible,
            n_hidden,
            layout,
            node,
            shot_constant,
            json,
            out,
        } => {
            let layout = match layout {
                LayoutArg::PerPair => AncillaLayout::OnePerPair,
                LayoutArg::Reused => AncillaLayout::SingleReused,
            };
            let node = match node {
                NodeArg::Sign => NodeMode::Sign,
                NodeArg::Phase => NodeMode::Phase,
            };
            let shape = QbmShape::new(n_visible, n_hidden.unwrap_or(n_visible), layout)?;
            commands::resources(&shape, node, shot_constant, json, out.as_ref())?
        }
        Command::Validate {
            seed,
            trials,
            inject_fault,
        } => {
            let fault = inject_fault.map(|f| match f {
                FaultArg::Circuit => Fault::Circuit,
                FaultArg::Gradient => Fault::Gradient,
                FaultArg::Decomposition => Fault::Decomposition,
            });
            if !commands::validate(seed, trials, fault)? {
                eprintln!("error: validation failed");
                return Ok(false);
            }
        }
        Command::Sample {
            flags,
            params,
            accepted,
        } => commands::sample(&flags, params.as_deref(), accepted)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("QBM_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
