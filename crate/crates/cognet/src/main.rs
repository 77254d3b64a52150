use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cognet::{run, CliError, Command, Config, Outcome};

/// Batch evaluation of cognitive mmWave network performance.
#[derive(Debug, Parser)]
#[command(name = "cognet", version)]
struct Cli {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed for simulation and placement averaging (overrides `mc.seed`).
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, value_name = "N", env = "COGNET_THREADS")]
    threads: Option<usize>,
    #[arg(long, value_enum)]
    command: Command,
}

fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = match &cli.config {
        Some(p) => cognet::load(p)?,
        None => Config::default(),
    };
    for w in &cfg.warnings {
        log::warn!("{w}");
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let seed = cli.seed.unwrap_or(cfg.mc.seed);
    let mut out: Box<dyn Write> = match &cli.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let outcome = run(cli.command, &cfg, seed, &mut out)?;
    out.flush()?;
    Ok(outcome)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::ValidationFailed) => {
            eprintln!("validation failed: an analytic value lies more than {} standard errors from simulation", cognet::commands::Z_LIMIT);
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("cognet: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
