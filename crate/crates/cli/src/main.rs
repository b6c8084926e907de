//! `cartan`: command-line driver for the Cartan-type algebra library.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use cartan_core::store::STORE_ENV;
use cartan_core::{AlgebraKind, Error, RingKind, VariableScheme};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "cartan", version, about = "Modular Lie algebras of Cartan type and their symmetric invariants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the basis with grades.
    Basis(AlgebraArgs),
    /// Print the structure constants.
    BracketTable(AlgebraArgs),
    /// Run the invariant pipeline for one power over `Hbar_n`.
    InvariantCompute(ComputeArgs),
    /// Verify a stored record or check a polynomial document for invariance.
    InvariantVerify(VerifyArgs),
    /// Check the generator criterion for a polynomial.
    GeneratorCheck(GeneratorArgs),
    /// Independence report for a set of pipeline records.
    Independence(SweepArgs),
    /// Sweep all powers for one prime and compare the count with `p - 2`.
    Conjecture(ConjectureArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum KindArg {
    W,
    S,
    H,
    Hbar,
}

impl From<KindArg> for AlgebraKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::W => AlgebraKind::W,
            KindArg::S => AlgebraKind::S,
            KindArg::H => AlgebraKind::H,
            KindArg::Hbar => AlgebraKind::Hbar,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum RingArg {
    Int,
    Modp,
}

impl From<RingArg> for RingKind {
    fn from(r: RingArg) -> Self {
        match r {
            RingArg::Int => RingKind::Integers,
            RingArg::Modp => RingKind::ModP,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputArg {
    Text,
    Structured,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum VarsArg {
    Basis,
    U,
}

impl From<VarsArg> for VariableScheme {
    fn from(v: VarsArg) -> Self {
        match v {
            VarsArg::Basis => VariableScheme::Basis,
            VarsArg::U => VariableScheme::Monomial,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct AlgebraArgs {
    #[arg(long, value_enum, default_value = "hbar", ignore_case = true)]
    algebra: KindArg,
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Comma-separated exponent bounds; defaults to all ones.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<u32>>,
    #[arg(long, value_enum, default_value = "modp")]
    ring: RingArg,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    #[arg(long, value_enum, default_value = "text")]
    output: OutputArg,
    /// Variable names for polynomial output; the `u` names when available by default.
    #[arg(long, value_enum)]
    vars: Option<VarsArg>,
    #[arg(long, env = STORE_ENV)]
    store: Option<PathBuf>,
    #[arg(long)]
    max_terms: Option<usize>,
    #[arg(long)]
    max_seconds: Option<f64>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Args, Debug, Clone)]
struct ComputeArgs {
    #[command(flatten)]
    algebra: AlgebraArgs,
    #[arg(long)]
    power: u32,
}

#[derive(Args, Debug, Clone)]
struct VerifyArgs {
    /// A record document or a polynomial document.
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false, id = "source")]
struct PolySource {
    /// Polynomial in canonical text form.
    #[arg(long)]
    poly: Option<String>,
    /// Polynomial document.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct GeneratorArgs {
    #[command(flatten)]
    algebra: AlgebraArgs,
    #[command(flatten)]
    source: PolySource,
}

#[derive(Args, Debug, Clone)]
struct SweepArgs {
    #[arg(long)]
    p: u64,
    /// Comma-separated even powers; defaults to `2, 4, ..., 2(p - 2)`.
    #[arg(long, value_delimiter = ',')]
    power: Option<Vec<u32>>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug, Clone)]
struct ConjectureArgs {
    #[arg(long)]
    p: u64,
    #[command(flatten)]
    common: CommonArgs,
}

/// Exit status for a library error.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::VerificationFailed(_) | Error::NotInSpan | Error::ClosureFailure(_) | Error::NotHomogeneous(_) => 1,
        Error::BudgetExceeded(_) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Basis(a) => commands::basis(a),
        Command::BracketTable(a) => commands::bracket_table(a),
        Command::InvariantCompute(a) => commands::invariant_compute(a),
        Command::InvariantVerify(a) => commands::invariant_verify(a),
        Command::GeneratorCheck(a) => commands::generator_check(a),
        Command::Independence(a) => commands::independence(a),
        Command::Conjecture(a) => commands::conjecture(a),
    };
    match result {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            if let Some(msg) = &outcome.stderr {
                eprintln!("{msg}");
            }
            ExitCode::from(outcome.status)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
