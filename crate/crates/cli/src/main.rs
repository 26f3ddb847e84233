use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use conformable_cli::{parse_config, run_experiment, write_outputs, RunError, RunOptions};

/// Run a conformable Cauchy-problem experiment described by a config file.
#[derive(Debug, Parser)]
#[command(name = "conformable", version)]
struct Args {
    /// Experiment configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `[output] dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed (overrides `[method] seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    threads: Option<usize>,
    /// Suppress progress messages.
    #[arg(long)]
    quiet: bool,
}

fn run(args: &Args) -> Result<i32, RunError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| RunError::Io(format!("{}: {e}", args.config.display())))?;
    let mut config = parse_config(&text).map_err(RunError::Config)?;
    if let Some(seed) = args.seed {
        config.method.seed = Some(seed);
    }
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from(&config.output.dir));
    let opts = RunOptions { quiet: args.quiet };
    let outcome = match args.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RunError::Invalid(format!("thread pool: {e}")))?
            .install(|| run_experiment(&config, opts))?,
        None => run_experiment(&config, opts)?,
    };
    let written = write_outputs(&out, &config, &outcome)?;
    if !args.quiet {
        eprintln!("wrote {} files to {}", written.len(), out.display());
    }
    for f in &outcome.failures {
        eprintln!("FAIL {f}");
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
