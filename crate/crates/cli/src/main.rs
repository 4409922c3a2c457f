// SPDX-License-Identifier: Apache-2.0

//! `qhe`: keys, encryption, evaluation, sampling and security analysis from
//! the command line.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 I/O error,
//! 3 internal verification failure.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "qhe", version, about = "Bosonic quantum homomorphic encryption laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand; each command uses the subset it needs.
#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Particle count, equal to the number of spatial modes
    #[arg(short = 'm', value_name = "M")]
    pub m: Option<usize>,
    /// Internal levels per particle
    #[arg(short = 'd', value_name = "D")]
    pub d: Option<usize>,
    /// PRNG seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; standard output when absent
    #[arg(short = 'o', long = "out", value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Override the command's acceptance tolerance
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Cap on the Fock-space (or site-space, for analyze) dimension
    #[arg(long = "max-dim")]
    pub max_dim: Option<usize>,
    /// Re-run the relevant invariant checks before writing output
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ViewArg {
    Joint,
    Spatial,
}

#[derive(Debug, Args)]
pub struct StateInput {
    /// State file
    #[arg(long, value_name = "FILE", conflicts_with = "plaintext")]
    pub state: Option<PathBuf>,
    /// Plaintext symbols, comma separated (e.g. 0,1,2)
    #[arg(long, value_name = "LIST")]
    pub plaintext: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a key file
    Keygen {
        #[command(flatten)]
        common: Common,
    },
    /// Apply the encryptor to every particle of a state
    Encrypt {
        #[command(flatten)]
        input: StateInput,
        #[arg(long, value_name = "FILE")]
        key: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Remove the encryption from a state
    Decrypt {
        #[command(flatten)]
        input: StateInput,
        #[arg(long, value_name = "FILE")]
        key: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Apply a spatial circuit to a state
    Evaluate {
        #[command(flatten)]
        input: StateInput,
        #[arg(long, value_name = "FILE")]
        circuit: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Encrypt, evaluate and decrypt a plaintext and compare with plain evaluation
    Run {
        #[arg(long, value_name = "LIST")]
        plaintext: String,
        #[arg(long, value_name = "FILE")]
        circuit: PathBuf,
        #[arg(long, value_name = "FILE")]
        key: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Entropies, Holevo quantity and information gap of the ciphertext ensemble
    Analyze {
        /// Prior file: "uniform" or a map from "a,b,..." to probability
        #[arg(long, value_name = "FILE")]
        prior: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Sample measurement outcomes of a state or of an evaluated (cipher)state
    Sample {
        #[command(flatten)]
        input: StateInput,
        /// Circuit applied before measuring
        #[arg(long, value_name = "FILE")]
        circuit: Option<PathBuf>,
        /// Key used to encrypt a plaintext input before evaluation
        #[arg(long, value_name = "FILE")]
        key: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        shots: u64,
        #[arg(long, value_enum, default_value_t = ViewArg::Joint)]
        view: ViewArg,
        #[command(flatten)]
        common: Common,
    },
    /// Decompose a unitary into a triangular beam-splitter mesh
    Reck {
        #[arg(long, value_name = "FILE")]
        unitary: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Keygen { common } => commands::keygen(&common),
        Command::Encrypt { input, key, common } => commands::crypt(&input, &key, &common, true),
        Command::Decrypt { input, key, common } => commands::crypt(&input, &key, &common, false),
        Command::Evaluate {
            input,
            circuit,
            common,
        } => commands::evaluate(&input, &circuit, &common),
        Command::Run {
            plaintext,
            circuit,
            key,
            common,
        } => commands::run(&plaintext, &circuit, &key, &common),
        Command::Analyze { prior, common } => commands::analyze(prior.as_deref(), &common),
        Command::Sample {
            input,
            circuit,
            key,
            shots,
            view,
            common,
        } => commands::sample(&input, circuit.as_deref(), key.as_deref(), shots, view, &common),
        Command::Reck { unitary, common } => commands::reck(&unitary, &common),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
