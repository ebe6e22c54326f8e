//! Command-line front end for the qdiff engine.
//!
//! [`run`] takes the argument list and returns the exit code and both
//! output streams, so the binary and the tests share one code path.
//! Exit codes: 0 success, 1 a checked property failed, 2 usage or input
//! error.

pub mod calcfile;
mod commands;
pub mod error;
pub mod json;
pub mod parse;

use std::ffi::OsString;

use clap::{Parser, Subcommand, ValueEnum};

pub use error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LineRoot {
    J,
    Jbar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PlaneRoot {
    J,
    Jbar,
    /// `N = 2`, `q = -1`: the de Rham control.
    Classical,
}

#[derive(Debug, Parser)]
#[command(name = "qdiff", version, about = "Symbolic engine for Z-graded q-differential algebras")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Seed for every randomized check.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the Gaussian binomial [top choose bot] at z_N^root.
    Qbinom {
        #[arg(long = "N")]
        n: u32,
        #[arg(long)]
        top: u32,
        #[arg(long)]
        bot: u32,
        /// Exponent k of the root z_N^k.
        #[arg(long, default_value_t = 1)]
        root: i64,
    },
    /// Normal form of an expression.
    Reduce {
        /// Built-in calculus name or definition file.
        #[arg(long)]
        calc: String,
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    /// Apply the differential.
    D {
        #[arg(long)]
        calc: String,
        #[arg(long, default_value_t = 1)]
        times: u32,
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    /// Run the property suites on random samples.
    Check {
        #[arg(long)]
        calc: String,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Search for admissible (q, p, s) on the tensor product.
    Nogo {
        #[arg(long = "N")]
        n: u32,
        /// Run every modulus from N up to this one.
        #[arg(long = "max-N")]
        max_n: Option<u32>,
        /// Sweep grades over [0, 2N) instead of [0, N).
        #[arg(long)]
        extended_sweep: bool,
    },
    /// Check that the flip A ox_q B -> B ox_qbar A is an isomorphism.
    FlipCheck {
        #[arg(long = "N")]
        n: u32,
        /// Exponent k of the braiding z_N^k.
        #[arg(long)]
        braiding: i64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Also flip this pure tensor, written `a ox b`.
        #[arg(long, allow_hyphen_values = true)]
        element: Option<String>,
    },
    /// Constraints on a two-variable calculus and the braiding verdict.
    PlaneCheck {
        #[arg(long, value_enum)]
        root: PlaneRoot,
    },
    /// Rederive the line relations from d(f) = dx f'.
    DeriveLine {
        #[arg(long, value_enum)]
        root: LineRoot,
    },
    /// Print a calculus in the definition-file format.
    Export {
        #[arg(long)]
        calc: String,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match commands::execute(&cli) {
        Ok(report) => Outcome {
            code: if report.passed { 0 } else { 1 },
            stdout: report.output,
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}
