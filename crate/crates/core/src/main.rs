use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use poolruin::cli::{self, CliError, Resolved, Scenario};
use poolruin::ruin::MethodChoice;

#[derive(Parser)]
#[command(name = "poolruin", version, about = "Ruin probabilities before and after proportional risk sharing")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Closed,
    Panjer,
    Mc,
}

impl From<MethodArg> for MethodChoice {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Closed => MethodChoice::Closed,
            MethodArg::Panjer => MethodChoice::Panjer,
            MethodArg::Mc => MethodChoice::Mc,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check full allocation, fairness, capacity and scale family.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
        /// Print the scenario with every default filled in instead.
        #[arg(long)]
        dump_normalized: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stand-alone and pooled ruin curves as CSV.
    Ruin {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Curves and verdicts for one of the bundled figures.
    Reproduce {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
        figure: u8,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Convex-order checks of pooled against stand-alone claims.
    OrderCheck {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &Path) -> Result<Resolved, CliError> {
    Scenario::load(path)?.resolve()
}

fn run(args: Args, out: &mut dyn Write) -> Result<i32, CliError> {
    match args.command {
        Command::Validate {
            scenario,
            dump_normalized,
            out: dir,
        } => cli::cmd_validate(&load(&scenario)?, dump_normalized, dir.as_deref(), out),
        Command::Ruin {
            scenario,
            method,
            seed,
            out: dir,
        } => cli::cmd_ruin(&load(&scenario)?, method.map(Into::into), seed, dir.as_deref(), out),
        Command::Reproduce {
            figure,
            method,
            seed,
            out: dir,
        } => cli::cmd_reproduce(figure, method.map(Into::into), seed, Some(&dir), out).map(|(code, _)| code),
        Command::OrderCheck { scenario, out: dir } => cli::cmd_order_check(&load(&scenario)?, dir.as_deref(), out),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let code = match run(args, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    let _ = out.flush();
    ExitCode::from(code as u8)
}
