mod commands;
mod format;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use chandisc::Error;

#[derive(Parser, Debug)]
#[command(name = "chandisc", version, about = "Entanglement-assisted local discrimination of bipartite channels")]
pub struct Cli {
    /// Output format: JSON for scalar results, CSV for tables.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Interior-point iteration cap.
    #[arg(long, global = true, env = "CHANDISC_MAX_ITER")]
    pub max_iter: Option<usize>,
    /// Run grid points and k-scans on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct PairArgs {
    /// First channel, e.g. `depol_pp:d=2,p=0.9`.
    #[arg(long)]
    pub a: Option<String>,
    /// Second channel.
    #[arg(long)]
    pub b: Option<String>,
    /// JSON spec file for the first channel; overrides --a.
    #[arg(long)]
    pub a_file: Option<String>,
    /// JSON spec file for the second channel; overrides --b.
    #[arg(long)]
    pub b_file: Option<String>,
    /// Prior probability of the first channel.
    #[arg(long, default_value_t = 0.5)]
    pub lambda: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LpFamily {
    Bipartite,
    Pp,
    Swap,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Optimal success probability with unrestricted testers.
    Global(PairArgs),
    /// Success probability with k-injectable PPT testers.
    Psucc {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long)]
        k: usize,
    },
    /// One-shot PPT entanglement cost.
    Entcost {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = chandisc::cost::DEFAULT_EQ_TOL)]
        eq_tol: f64,
        /// Largest k to try; defaults to the saturation bound.
        #[arg(long)]
        k_max: Option<usize>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<String>,
    },
    /// Reduced linear program for a symmetric family.
    Lp {
        #[arg(long, value_enum)]
        family: LpFamily,
        /// Local dimension (Alice's for the bipartite family).
        #[arg(long)]
        d: usize,
        /// Bob's dimension for the bipartite family; defaults to --d.
        #[arg(long)]
        db: Option<usize>,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        k: usize,
    },
    /// Worst case over the convex hulls of two lists of channels.
    Composite {
        /// Member of the first set (repeatable).
        #[arg(long, required = true)]
        a: Vec<String>,
        /// Member of the second set (repeatable).
        #[arg(long, required = true)]
        b: Vec<String>,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        #[arg(long)]
        k: usize,
    },
    /// Amplitude damping AD(γ) against AD(1 − γ) over a γ grid.
    Fig5 {
        #[arg(long, default_value_t = 1)]
        copies: usize,
        /// Comma-separated γ values; defaults to 0, 0.02, ..., 0.2.
        #[arg(long, value_delimiter = ',')]
        gammas: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<String>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Solver { .. } => 3,
        Error::Invariant(_) => 4,
        Error::Io(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(text) => {
            if !text.is_empty() {
                println!("{text}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
