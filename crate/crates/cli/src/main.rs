use std::path::PathBuf;
use std::process::ExitCode;

use cislunar_cli::commands::{self, BaselineRequest};
use cislunar_cli::CliError;
use cislunar_core::scenario::WalkerFamily;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "cislunar", version, about = "Design hybrid Earth-Moon relay constellations")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimize one constellation structure; writes pareto.csv, history.csv and manifest.json
    Optimize {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to the seed stored in a manifest passed as --config
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate one genome and print its objectives as JSON
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        /// JSON array, list of numbers, or a pareto.csv file
        #[arg(long)]
        genome: PathBuf,
        /// individual_id to take from a pareto.csv file
        #[arg(long)]
        row: Option<usize>,
    },
    /// Optimize every structure listed in a file
    Sweep {
        #[arg(long)]
        structures: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a Walker constellation over the configured grid
    Baseline {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        with_geo: bool,
        /// Delta inclination in degrees; overrides the configured grid
        #[arg(long)]
        inclination: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Star,
    Delta,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("CISLUNAR_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Validation(format!("CISLUNAR_THREADS: '{value}' is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

fn run(args: Args) -> Result<(), CliError> {
    configure_threads()?;
    match args.command {
        Command::Optimize { config, seed, out } => commands::optimize(&config, seed, &out),
        Command::Evaluate { config, genome, row } => {
            let report = commands::evaluate(&config, &genome, row)?;
            println!("{}", serde_json::to_string(&report).map_err(|e| CliError::Runtime(e.to_string()))?);
            Ok(())
        }
        Command::Sweep {
            structures,
            config,
            seed,
            out,
        } => commands::sweep(&structures, config.as_deref(), seed, &out),
        Command::Baseline {
            n,
            family,
            with_geo,
            inclination,
            config,
            out,
        } => {
            let req = BaselineRequest {
                n,
                family: match family {
                    Family::Star => WalkerFamily::Star,
                    Family::Delta => WalkerFamily::Delta,
                },
                with_geo,
                inclination_deg: inclination,
            };
            commands::baseline(config.as_deref(), &req, &out).map(|_| ())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
