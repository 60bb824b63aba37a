use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kzbraid_cli::{
    cmd_associator, cmd_betti, cmd_chord_dims, cmd_compare, cmd_defect, cmd_dims, cmd_zinv,
    Format, RunConfig,
};
use kzbraid_core::dk::CACHE_ENV;
use kzbraid_core::kz::DEFAULT_STEPS;

#[derive(Parser)]
#[command(name = "kzbraid", version, about = "Universal finite-type invariants of braids")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,

    /// Directory for the reduction cache.
    #[arg(long, env = CACHE_ENV, global = true)]
    cache_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Numeric {
    #[arg(long, default_value_t = 3)]
    n: usize,
    /// Truncation degree.
    #[arg(long, default_value_t = 3)]
    degree: usize,
    /// Quadrature panels per path piece.
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    steps: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Graded dimensions of U(n) against the Hilbert series.
    Dims {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        max_degree: usize,
    },
    /// Betti numbers of the braid arrangement complement.
    Betti {
        #[arg(long)]
        n: usize,
    },
    /// The invariant of a braid word, e.g. --word "1 1".
    Zinv {
        #[command(flatten)]
        numeric: Numeric,
        #[arg(long, allow_hyphen_values = true, default_value = "")]
        word: String,
        /// Compare two pure words instead.
        #[arg(long, num_args = 2, allow_hyphen_values = true, value_names = ["W1", "W2"])]
        compare: Option<Vec<String>>,
    },
    /// Compare the invariants of two pure braids.
    Compare {
        #[command(flatten)]
        numeric: Numeric,
        #[arg(allow_hyphen_values = true)]
        first: String,
        #[arg(allow_hyphen_values = true)]
        second: String,
    },
    /// Multiplication defect of Z on two braids.
    Defect {
        #[command(flatten)]
        numeric: Numeric,
        #[arg(allow_hyphen_values = true)]
        first: String,
        #[arg(allow_hyphen_values = true)]
        second: String,
    },
    /// Chord diagram counts and Hopf algebra dimensions.
    ChordDims {
        #[arg(long, default_value_t = 5)]
        max: usize,
    },
    /// The numerical Drinfeld associator.
    Associator {
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long, default_value_t = 1e-3)]
        delta: f64,
        #[arg(long, default_value_t = 128)]
        steps: usize,
        /// Coefficients below this are not printed.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

fn config(numeric: &Numeric, cli: &Cli) -> RunConfig {
    RunConfig {
        n: numeric.n,
        degree: numeric.degree,
        steps: numeric.steps,
        tolerance: numeric.tol,
        cache_dir: cli.cache_dir.clone(),
        format: cli.format,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // The core cache reads its directory from the environment on first use.
    if let Some(dir) = &cli.cache_dir {
        std::env::set_var(CACHE_ENV, dir);
    }
    let report = match &cli.command {
        Command::Dims { n, max_degree } => cmd_dims(*n, *max_degree),
        Command::Betti { n } => cmd_betti(*n),
        Command::Zinv {
            numeric,
            word,
            compare: Some(pair),
        } if word.is_empty() => cmd_compare(&config(numeric, &cli), &pair[0], &pair[1]),
        Command::Zinv { numeric, word, .. } => cmd_zinv(&config(numeric, &cli), word),
        Command::Compare {
            numeric,
            first,
            second,
        } => cmd_compare(&config(numeric, &cli), first, second),
        Command::Defect {
            numeric,
            first,
            second,
        } => cmd_defect(&config(numeric, &cli), first, second),
        Command::ChordDims { max } => cmd_chord_dims(*max),
        Command::Associator {
            degree,
            delta,
            steps,
            tol,
        } => cmd_associator(*degree, *delta, *steps, *tol),
    };
    match report {
        Ok(report) => {
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let _ = writeln!(std::io::stdout(), "{}", report.render(cli.format));
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
