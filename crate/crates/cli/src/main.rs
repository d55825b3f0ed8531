//! `qincompat`: incompatibility measures for POVM files from the command line.
//!
//! Exit codes: 0 success, 1 validation failure, 2 solver non-convergence,
//! 64 usage error.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use qincompat::SchattenP;

use crate::report::Format;

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_NO_CONVERGENCE: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "qincompat", version, about = "Commutator-based incompatibility of quantum measurements")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct PArg {
    /// Schatten index: a real number ≥ 1 or `inf`.
    #[arg(long, default_value = "1", value_parser = parse_p)]
    pub p: SchattenP,
}

#[derive(Args, Debug, Clone)]
pub struct PairFiles {
    /// First POVM (JSON).
    pub e: PathBuf,
    /// Second POVM (JSON).
    pub f: PathBuf,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Υ_p(E, F) for two POVM files.
    Upsilon {
        #[command(flatten)]
        files: PairFiles,
        #[command(flatten)]
        p: PArg,
        #[command(flatten)]
        output: Output,
    },
    /// Generalized incompatibility robustness η^g via the SDP.
    #[command(name = "eta-g")]
    EtaG {
        #[command(flatten)]
        files: PairFiles,
        /// Feasibility tolerance for the primal and dual points.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Also write the SDP in block-hermitian-sdp-v1 JSON to this path.
        #[arg(long)]
        dump_sdp: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
    /// Decide whether a pair is maximally incompatible.
    Certify {
        #[command(flatten)]
        files: PairFiles,
        #[command(flatten)]
        p: PArg,
        /// Tolerance on |c_ab − 1/√d|.
        #[arg(long, default_value_t = qincompat::incompat::CERT_TOL)]
        tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Fourier mutually unbiased pair; with --out DIR writes E.json and F.json.
    Mub {
        #[arg(long)]
        dim: usize,
        #[command(flatten)]
        p: PArg,
        #[command(flatten)]
        output: Output,
    },
    /// Sweep random basis pairs and check the analytic bounds on each.
    Random {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of random pairs.
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Allowed negative slack.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        p: PArg,
        #[command(flatten)]
        output: Output,
    },
    /// Built-in qutrit pair before and after the built-in qutrit-to-qubit channel.
    #[command(name = "preprocess-demo")]
    PreprocessDemo {
        #[command(flatten)]
        p: PArg,
        #[command(flatten)]
        output: Output,
    },
    /// Bound curves as CSV.
    Curves {
        #[arg(value_enum)]
        kind: CurveArg,
        #[arg(long)]
        dim: usize,
        #[command(flatten)]
        p: PArg,
        /// Number of grid points, endpoints included.
        #[arg(long, default_value_t = 101)]
        grid: usize,
        /// Expansion point of the h_p envelopes.
        #[arg(long, default_value_t = 0.5)]
        c_bar: f64,
        /// Output format (CSV by default).
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a POVM or Kraus channel file.
    Validate {
        file: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Write a named fixture. Pair kinds need --out DIR.
    Fixture {
        #[arg(value_enum)]
        kind: FixtureKind,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Outcome count for random-rank1 (default dim + 1).
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum CurveArg {
    Qrac,
    Uncertainty,
    #[value(name = "h_p", alias = "hp")]
    HP,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixtureKind {
    MubPair,
    Computational,
    RandomBasis,
    RandomRank1,
    #[value(name = "paper-qutrit-EF")]
    PaperQutritEF,
    PaperKrausChannel,
}

fn parse_p(s: &str) -> Result<SchattenP, String> {
    s.parse().map_err(|e: qincompat::Error| e.to_string())
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Upsilon { .. } => "upsilon",
            Command::EtaG { .. } => "eta-g",
            Command::Certify { .. } => "certify",
            Command::Mub { .. } => "mub",
            Command::Random { .. } => "random",
            Command::PreprocessDemo { .. } => "preprocess-demo",
            Command::Curves { .. } => "curves",
            Command::Validate { .. } => "validate",
            Command::Fixture { .. } => "fixture",
        }
    }
}

fn subcommand_help(name: Option<&str>) -> String {
    let mut cmd = Cli::command();
    match name.and_then(|n| cmd.find_subcommand_mut(n)) {
        Some(sub) => sub.render_help().to_string(),
        None => cmd.render_help().to_string(),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = err.print();
                return ExitCode::SUCCESS;
            }
            eprintln!("{}", err.render());
            if err.kind() != ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                let sub = argv.iter().skip(1).find(|a| !a.starts_with('-')).map(String::as_str);
                eprintln!("{}", subcommand_help(sub));
            }
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let name = cli.command.name();
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            let code = err.exit_code();
            if code == EXIT_USAGE {
                eprintln!("{}", subcommand_help(Some(name)));
            }
            ExitCode::from(code)
        }
    }
}
