use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use plateaulab::{resolve_seed, run, validate_config, CliError, SEED_ENV};

#[derive(Parser)]
#[command(
    name = "plateaulab",
    version,
    about = "Concentration and gradient-decay sweeps for visible/hidden qubit models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory, created if missing.
        #[arg(long)]
        out: PathBuf,
        /// Base seed; overrides both the config and PLATEAULAB_SEED.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a config file and print it with defaults filled in.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { config } => {
            let cfg = validate_config(&config).map_err(CliError::Config)?;
            cfg.check_resources()?;
            print!("{}", plateaulab::render_config(&cfg));
            Ok(())
        }
        Command::Run {
            config,
            out,
            seed,
            threads,
        } => {
            let mut cfg = validate_config(&config).map_err(CliError::Config)?;
            let env = std::env::var(SEED_ENV).ok();
            cfg.seed = resolve_seed(cfg.seed, env.as_deref(), seed)?;
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(n) = threads {
                if n == 0 {
                    return Err(CliError::Config(plateaulab::ConfigReport::single(
                        "--threads",
                        "must be at least 1",
                    )));
                }
                pool = pool.num_threads(n);
            }
            let pool = pool
                .build()
                .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
            let manifest = pool.install(|| run(&cfg, &out))?;
            println!(
                "{} {} (seed {}) finished in {:.2}s, results in {}",
                cfg.experiment,
                cfg.model,
                manifest.base_seed,
                manifest.duration_seconds,
                out.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("plateaulab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
