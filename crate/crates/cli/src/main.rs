mod commands;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use bclab::parse::parse_field;
use bclab::Error;
use clap::{Parser, Subcommand};

use commands::Config;
use report::{Format, Report};

const EXIT_INVALID: u8 = 2;
const EXIT_CHECK: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "bclab", version, about = "Hecke pairs, narrow class groups, partial zetas and KMS states over Q and quadratic fields")]
struct Cli {
    /// Field: Q, Q(i), Q(sqrt(d)) or a squarefree integer d.
    #[arg(long, global = true, default_value = "Q", allow_hyphen_values = true)]
    field: String,

    /// Inverse temperature as a decimal or fraction (command default if omitted).
    #[arg(long, global = true, allow_hyphen_values = true)]
    beta: Option<String>,

    /// Largest ideal norm summed.
    #[arg(long, global = true, default_value_t = 10_000)]
    cutoff: u64,

    /// Level m of the finite model O/mO.
    #[arg(long, global = true, default_value_t = 1)]
    modulus: u64,

    /// Significant digits of decimal output (1..=50).
    #[arg(long, global = true, default_value_t = 30)]
    precision: usize,

    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,

    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Discriminant, integral basis and unit data.
    Field,
    /// Wide and narrow class groups with representatives.
    Classgroup,
    /// Truncated Dedekind zeta with a tail bound.
    Zeta,
    /// Partial zeta of one narrow class, or of all of them.
    PartialZeta {
        #[arg(long)]
        class: Option<usize>,
    },
    /// Coset counts L, R and the modular function of g = (y, x).
    HeckeDelta {
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        /// Also list the coset representatives.
        #[arg(long)]
        reps: bool,
    },
    /// Value of the state at x = (g, omega) on a test function.
    KmsEval {
        /// Fractional ideal g, as generators.
        #[arg(long, default_value = "(1)")]
        ideal: String,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        omega: String,
        /// one, units or ind:r1,r2,...
        #[arg(long = "function", default_value = "one")]
        function: String,
    },
    /// zeta_L(beta) / zeta_Q([L:Q] beta) with an enclosure.
    InduceRatio,
    /// Euler factors of the induced weight for beta <= 1.
    Divergence {
        #[arg(long, default_value_t = 1000)]
        prime_bound: u64,
    },
    /// Exhaustive checks on finite group actions.
    FiniteInduction {
        /// max_order=N,max_x=M,checks=all|balanced|involution|stages
        #[arg(long, default_value = "")]
        suite: String,
    },
    /// Randomized non-increase check of the monotone factor.
    Monotone {
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 50)]
        grid_points: usize,
    },
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("BCLAB_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| format!("BCLAB_THREADS must be a positive integer, got {v:?}"))?;
    if n == 0 {
        return Err("BCLAB_THREADS must be a positive integer".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn run(cli: &Cli) -> bclab::Result<Report> {
    if !(1..=50).contains(&cli.precision) {
        return Err(Error::Validation("precision must lie in 1..=50".into()));
    }
    if cli.cutoff == 0 {
        return Err(Error::Validation("cutoff must be positive".into()));
    }
    let cfg = Config {
        field: parse_field(&cli.field)?,
        beta: cli.beta.clone(),
        cutoff: cli.cutoff,
        modulus: cli.modulus,
        digits: cli.precision,
        seed: cli.seed,
    };
    match &cli.command {
        Command::Field => commands::field(&cfg),
        Command::Classgroup => commands::classgroup(&cfg),
        Command::Zeta => commands::zeta(&cfg),
        Command::PartialZeta { class } => commands::partial_zeta(&cfg, *class),
        Command::HeckeDelta { y, x, reps } => commands::hecke_delta(&cfg, y, x, *reps),
        Command::KmsEval { ideal, omega, function } => commands::kms(&cfg, ideal, omega, function),
        Command::InduceRatio => commands::induce_ratio(&cfg),
        Command::Divergence { prime_bound } => commands::divergence(&cfg, *prime_bound),
        Command::FiniteInduction { suite } => commands::finite_induction(suite),
        Command::Monotone { instances, grid_points } => commands::monotone(&cfg, *instances, *grid_points),
    }
}

fn emit(cli: &Cli, report: &Report) -> io::Result<()> {
    match &cli.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            report.render(cli.format, &mut w)?;
            w.flush()
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            report.render(cli.format, &mut w)?;
            w.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_INVALID);
    }
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e @ Error::Check(_)) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CHECK);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    if let Err(e) = emit(&cli, &report) {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(1);
    }
    match &report.check_failed {
        Some(why) => {
            eprintln!("check failed ({}): {why}", report.command);
            ExitCode::from(EXIT_CHECK)
        }
        None => ExitCode::SUCCESS,
    }
}
